"""PIM replica regeneration and subtraction, block and streaming."""
import numpy as np

from . import kernels
from .basis import BasisTerm, DataMatrix, build_data_matrix, delay_arrays, history, lookahead
from .signal import IqSequence, check_aligned


class CancellerError(ValueError):
    pass


def _theta_values(theta):
    return np.asarray(getattr(theta, "values", theta), dtype=np.complex128)


def replica(a, theta):
    values = _theta_values(theta)
    if a.values.shape[1] != values.shape[0]:
        raise CancellerError(f"data matrix has {a.values.shape[1]} columns, theta has {values.shape[0]}")
    terms = getattr(theta, "terms", None)
    if terms is not None and tuple(terms) != tuple(a.column_terms):
        raise CancellerError("theta terms do not match the data matrix columns")
    return a.values @ values


def cancel_block(y, a, theta):
    """``y[n] - a[n]^T theta`` over the rows of ``a``."""
    if not isinstance(a, DataMatrix):
        raise CancellerError("cancel_block expects a DataMatrix")
    if a.values.shape[0] != len(y):
        raise CancellerError(f"y has {len(y)} samples, data matrix has {a.values.shape[0]} rows")
    return y.replace(y.samples - replica(a, theta))


def cancel(y, s1, s2, theta):
    """Build the data matrix for ``theta``'s terms and cancel ``y``."""
    check_aligned(y, s1)
    return cancel_block(y, build_data_matrix(s1, s2, theta.terms), theta)


class StreamingState:
    """Running state of a streaming canceller for one input stream.

    Terms with negative delays read future inputs, so output lags input by
    ``latency`` samples: by default the largest negative delay in the term
    list. A larger latency may be requested; a smaller one cannot work.
    """

    def __init__(self, terms, theta, latency=None):
        terms = tuple(t if isinstance(t, BasisTerm) else BasisTerm(*t) for t in terms)
        if not terms:
            raise CancellerError("empty term list")
        values = _theta_values(theta)
        if values.shape != (len(terms),):
            raise CancellerError(f"theta has {values.shape} entries for {len(terms)} terms")
        theta_terms = getattr(theta, "terms", None)
        if theta_terms is not None and tuple(theta_terms) != terms:
            raise CancellerError("theta terms do not match the streaming term list")
        need = lookahead(terms)
        latency = need if latency is None else int(latency)
        if latency < need:
            raise CancellerError(f"latency {latency} is below the {need}-sample lookahead of the terms")
        self.terms = terms
        self.theta = values.copy()
        self.latency = latency
        self.da, self.db, self.dc = delay_arrays(terms)
        width = latency + history(terms) + 1
        self.buf1 = np.zeros(width, dtype=np.complex128)
        self.buf2 = np.zeros(width, dtype=np.complex128)
        self.ybuf = np.zeros(latency + 1, dtype=np.complex128)
        self.count = 0

    @property
    def emitted(self):
        return max(self.count - self.latency, 0)

    def process(self, s1, s2, y):
        s1 = np.ascontiguousarray(s1, dtype=np.complex128)
        s2 = np.ascontiguousarray(s2, dtype=np.complex128)
        y = np.ascontiguousarray(y, dtype=np.complex128)
        if not s1.shape == s2.shape == y.shape or s1.ndim != 1:
            raise CancellerError("stream chunks must be 1-D and of equal length")
        out, self.count = kernels.stream_cancel(
            s1, s2, y, self.da, self.db, self.dc, self.theta,
            self.buf1, self.buf2, self.ybuf, self.count, self.latency,
        )
        return out

    def flush(self):
        """Emit the last ``latency`` samples, reading zeros past the end."""
        z = np.zeros(self.latency, dtype=np.complex128)
        return self.process(z, z, z)


def cancel_streaming(s1, s2, y, terms, theta, state=None, chunk_size=None):
    """Run ``y`` through a streaming canceller and return the full output.

    Inputs are fed in chunks of ``chunk_size`` (all at once by default) and
    the tail is flushed, so the result lines up sample for sample with
    :func:`cancel_block` on the same data.
    """
    x1 = s1.samples if isinstance(s1, IqSequence) else np.asarray(s1)
    x2 = s2.samples if isinstance(s2, IqSequence) else np.asarray(s2)
    yy = y.samples if isinstance(y, IqSequence) else np.asarray(y)
    if state is None:
        state = StreamingState(terms, theta)
    elif tuple(state.terms) != tuple(terms):
        raise CancellerError("streaming state was built for a different term list")
    n = x1.shape[0]
    step = n if not chunk_size else int(chunk_size)
    parts = [state.process(x1[i:i + step], x2[i:i + step], yy[i:i + step]) for i in range(0, n, max(step, 1))]
    parts.append(state.flush())
    out = np.concatenate(parts) if parts else np.empty(0, np.complex128)
    if isinstance(y, IqSequence):
        return y.replace(out)
    return out


__all__ = ["CancellerError", "cancel_block", "cancel", "replica", "StreamingState", "cancel_streaming"]
