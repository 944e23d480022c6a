"""Counter-based SplitMix64 random stream.

The generator is deliberately tiny so other implementations can reproduce
fixtures bit for bit. For a 64-bit seed ``s`` the i-th raw output
(i = 0, 1, 2, ...) is::

    z = s + (i + 1) * 0x9E3779B97F4A7C15          (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (mod 2**64)
    z = z ^ (z >> 31)

Derived quantities:

* uniform in [0, 1):  ``(z >> 11) * 2**-53``
* uniform in (0, 1]:  ``((z >> 11) + 1) * 2**-53``
* standard normal pairs (Box-Muller) from two consecutive raw outputs
  ``u1`` (open at zero) and ``u2`` (half-open)::

      r = sqrt(-2 ln u1);  g0 = r cos(2 pi u2);  g1 = r sin(2 pi u2)

  so ``standard_normal(n)`` consumes ``2 * ceil(n / 2)`` raw outputs.
* child seeds: ``derive_seed(seed, label)`` is the first raw output of the
  stream seeded with ``seed ^ (label * 0xD1B54A32D192ED03 mod 2**64)``.

Because the stream is counter based, drawing ``n`` values is a single
vectorised numpy expression and the stream position is just an integer.
"""
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_LABEL = 0xD1B54A32D192ED03
_MASK = (1 << 64) - 1
_INV53 = 2.0 ** -53


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed, start, count):
    """Raw outputs ``start .. start+count-1`` of the stream for ``seed``."""
    with np.errstate(over="ignore"):
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        z = np.uint64(seed & _MASK) + idx * _GOLDEN
        return _mix(z)


def derive_seed(seed, label):
    """Independent child seed for an integer ``label``."""
    child = (seed ^ ((label * _LABEL) & _MASK)) & _MASK
    return int(splitmix64(child, 0, 1)[0])


class SplitMix64:
    """Stateful cursor over a SplitMix64 stream."""

    def __init__(self, seed):
        if not 0 <= int(seed) <= _MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.position = 0

    def raw(self, n):
        out = splitmix64(self.seed, self.position, n)
        self.position += n
        return out

    def uniform(self, n):
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _INV53

    def uniform_open(self, n):
        return ((self.raw(n) >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV53

    def standard_normal(self, n):
        pairs = (n + 1) // 2
        z = self.raw(2 * pairs) >> np.uint64(11)
        u1 = (z[0::2] + np.uint64(1)).astype(np.float64) * _INV53
        u2 = z[1::2].astype(np.float64) * _INV53
        r = np.sqrt(-2.0 * np.log(u1))
        g = np.empty(2 * pairs)
        g[0::2] = r * np.cos(2.0 * np.pi * u2)
        g[1::2] = r * np.sin(2.0 * np.pi * u2)
        return g[:n]

    def complex_normal(self, n, power=1.0):
        """Circular complex Gaussian samples with ``E|x|^2 = power``."""
        g = self.standard_normal(2 * n)
        return np.sqrt(power / 2.0) * (g[0::2] + 1j * g[1::2])

    def phases(self, n):
        return np.exp(2j * np.pi * self.uniform(n))
