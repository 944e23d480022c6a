"""Loop kernels compiled with numba; same contracts as ``_numpy``."""
import numpy as np
from numba import njit

from ._numpy import DivergenceError


@njit(cache=True)
def _data_matrix(s1, s2, da, db, dc, n0, n1):
    n = s1.shape[0]
    k = da.shape[0]
    out = np.zeros((n1 - n0, k), dtype=np.complex128)
    for r in range(n1 - n0):
        t = n0 + r
        for j in range(k):
            ia = t - da[j]
            ib = t - db[j]
            ic = t - dc[j]
            if ia < 0 or ia >= n or ib < 0 or ib >= n or ic < 0 or ic >= n:
                continue
            out[r, j] = s1[ia] * s1[ib] * np.conj(s2[ic])
    return out


def data_matrix(s1, s2, da, db, dc, n0, n1):
    return _data_matrix(s1, s2, da, db, dc, n0, n1)


@njit(cache=True)
def _rls(a, y, lam, delta, theta0, bound, record):
    n, k = a.shape
    theta = theta0.copy()
    p = np.zeros((k, k), dtype=np.complex128)
    for i in range(k):
        p[i, i] = 1.0 / delta
    rows = n if record else 1
    traj = np.empty((rows, k), dtype=np.complex128)
    pa = np.empty(k, dtype=np.complex128)
    ap = np.empty(k, dtype=np.complex128)
    g = np.empty(k, dtype=np.complex128)
    inv_lam = 1.0 / lam
    for i in range(n):
        denom = lam + 0j
        for r in range(k):
            acc = 0j
            for c in range(k):
                acc += p[r, c] * np.conj(a[i, c])
            pa[r] = acc
        for r in range(k):
            denom += a[i, r] * pa[r]
        for c in range(k):
            acc = 0j
            for r in range(k):
                acc += a[i, r] * p[r, c]
            ap[c] = acc
        e = y[i]
        for r in range(k):
            e -= a[i, r] * theta[r]
        norm2 = 0.0
        for r in range(k):
            g[r] = pa[r] / denom
            theta[r] += g[r] * e
            norm2 += theta[r].real ** 2 + theta[r].imag ** 2
        for r in range(k):
            for c in range(k):
                p[r, c] = (p[r, c] - g[r] * ap[c]) * inv_lam
        for r in range(k):
            for c in range(r, k):
                h = 0.5 * (p[r, c] + np.conj(p[c, r]))
                p[r, c] = h
                p[c, r] = np.conj(h)
        if not np.sqrt(norm2) <= bound:
            return traj, i
        if record:
            traj[i] = theta
    if not record:
        traj[0] = theta
    return traj, -1


def rls(a, y, lam, delta, theta0, bound, record):
    traj, bad = _rls(a, y, lam, delta, theta0.astype(np.complex128), bound, record)
    if bad >= 0:
        raise DivergenceError(f"RLS diverged at sample {bad}")
    return traj


@njit(cache=True)
def _lms(a, y, mu, theta0, bound, record):
    n, k = a.shape
    theta = theta0.copy()
    rows = n if record else 1
    traj = np.empty((rows, k), dtype=np.complex128)
    for i in range(n):
        e = y[i]
        for r in range(k):
            e -= a[i, r] * theta[r]
        norm2 = 0.0
        for r in range(k):
            theta[r] += mu * np.conj(a[i, r]) * e
            norm2 += theta[r].real ** 2 + theta[r].imag ** 2
        if not np.sqrt(norm2) <= bound:
            return traj, i
        if record:
            traj[i] = theta
    if not record:
        traj[0] = theta
    return traj, -1


def lms(a, y, mu, theta0, bound, record):
    traj, bad = _lms(a, y, mu, theta0.astype(np.complex128), bound, record)
    if bad >= 0:
        raise DivergenceError(f"LMS diverged at sample {bad}")
    return traj


@njit(cache=True)
def _stream_cancel(s1, s2, y, da, db, dc, theta, buf1, buf2, ybuf, count, latency):
    w = buf1.shape[0]
    ly = latency + 1
    c = s1.shape[0]
    k = da.shape[0]
    first = max(count, latency)
    out = np.empty(max(count + c - first, 0), dtype=np.complex128)
    o = 0
    for i in range(c):
        kk = count + i
        buf1[kk % w] = s1[i]
        buf2[kk % w] = s2[i]
        ybuf[kk % ly] = y[i]
        n = kk - latency
        if n < 0:
            continue
        acc = 0j
        for j in range(k):
            # slots of negative sample indices are still zero
            acc += (theta[j] * buf1[(n - da[j]) % w] * buf1[(n - db[j]) % w]
                    * np.conj(buf2[(n - dc[j]) % w]))
        out[o] = ybuf[n % ly] - acc
        o += 1
    return out, count + c


def stream_cancel(s1, s2, y, da, db, dc, theta, buf1, buf2, ybuf, count, latency):
    return _stream_cancel(s1, s2, y, da, db, dc, theta, buf1, buf2, ybuf, count, latency)
