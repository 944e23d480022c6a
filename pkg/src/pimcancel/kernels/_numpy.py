"""Pure-numpy kernels.

Every function here has a loop twin in ``_numba`` with the same signature
and the same results up to floating-point reassociation.
"""
import numpy as np


class DivergenceError(RuntimeError):
    pass


def data_matrix(s1, s2, da, db, dc, n0, n1):
    """Rows ``n0..n1-1`` of ``s1[n-da] s1[n-db] conj(s2[n-dc])`` with zero padding."""
    k = da.shape[0]
    out = np.empty((n1 - n0, k), dtype=np.complex128)
    if k == 0:
        return out
    lo = int(min(da.min(), db.min(), dc.min()))
    hi = int(max(da.max(), db.max(), dc.max()))
    # pad so that index n - d maps to n - d + pre for every delay d
    pre = max(hi, 0)
    post = max(-lo, 0)
    p1 = np.concatenate([np.zeros(pre, np.complex128), s1, np.zeros(post, np.complex128)])
    p2 = np.concatenate([np.zeros(pre, np.complex128), np.conj(s2), np.zeros(post, np.complex128)])
    base = n0 + pre
    m = n1 - n0
    for j in range(k):
        a = base - da[j]
        b = base - db[j]
        c = base - dc[j]
        out[:, j] = p1[a:a + m] * p1[b:b + m] * p2[c:c + m]
    return out


def rls(a, y, lam, delta, theta0, bound, record):
    n, k = a.shape
    theta = theta0.astype(np.complex128).copy()
    p = np.eye(k, dtype=np.complex128) / delta
    traj = np.empty((n if record else 1, k), dtype=np.complex128)
    inv_lam = 1.0 / lam
    for i in range(n):
        row = a[i]
        pa = p @ np.conj(row)
        g = pa / (lam + row @ pa)
        e = y[i] - row @ theta
        theta = theta + g * e
        p = (p - np.outer(g, row @ p)) * inv_lam
        p = 0.5 * (p + p.conj().T)
        if not np.sqrt(np.vdot(theta, theta).real) <= bound:
            raise DivergenceError(f"RLS diverged at sample {i}")
        if record:
            traj[i] = theta
    if not record:
        traj[0] = theta
    return traj


def lms(a, y, mu, theta0, bound, record):
    n, k = a.shape
    theta = theta0.astype(np.complex128).copy()
    traj = np.empty((n if record else 1, k), dtype=np.complex128)
    for i in range(n):
        row = a[i]
        e = y[i] - row @ theta
        theta = theta + mu * np.conj(row) * e
        if not np.sqrt(np.vdot(theta, theta).real) <= bound:
            raise DivergenceError(f"LMS diverged at sample {i}")
        if record:
            traj[i] = theta
    if not record:
        traj[0] = theta
    return traj


def stream_cancel(s1, s2, y, da, db, dc, theta, buf1, buf2, ybuf, count, latency):
    """Process one chunk; mutate the circular buffers, return (out, new_count).

    Sample index ``k`` lives in slot ``k % len(buf1)`` of the s1/s2 buffers
    and in slot ``k % (latency + 1)`` of ``ybuf``. An input at index ``k``
    emits the cancelled sample for ``n = k - latency`` once ``n >= 0``.
    """
    w = buf1.shape[0]
    c = s1.shape[0]
    ly = latency + 1
    # unroll the last w inputs (indices count-w .. count-1) in time order
    hist = np.arange(count - w, count)
    ext1 = np.concatenate([buf1[hist % w], s1])
    ext2 = np.concatenate([buf2[hist % w], s2])
    yhist = np.arange(count - latency, count)
    yext = np.concatenate([ybuf[yhist % ly], y])

    first = max(count, latency)
    ks = np.arange(first, count + c)
    ns = ks - latency
    origin = count - w
    if ns.size:
        rows = (ext1[ns[:, None] - da[None, :] - origin]
                * ext1[ns[:, None] - db[None, :] - origin]
                * np.conj(ext2[ns[:, None] - dc[None, :] - origin]))
        out = yext[ns - (count - latency)] - rows @ theta
    else:
        out = np.empty(0, dtype=np.complex128)

    new_count = count + c
    tail = np.arange(new_count - w, new_count)
    buf1[tail % w] = ext1[tail - origin]
    buf2[tail % w] = ext2[tail - origin]
    ytail = np.arange(new_count - ly, new_count)
    keep = ytail >= count - latency
    ybuf[ytail[keep] % ly] = yext[ytail[keep] - (count - latency)]
    return out, new_count

