"""Counter-based SplitMix64 random streams.

All randomness in the package (synthetic scenes, medoid subsampling) is
drawn from this generator so that another implementation can reproduce the
exact same numbers from a seed.  The algorithm:

    state_i = seed + (i + 1) * 0x9E3779B97F4A7C15        (mod 2**64)
    z = state_i
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out_i = z ^ (z >> 31)

A uniform double in [0, 1) is ``(out_i >> 11) * 2**-53``.  Normal deviates
use Box-Muller on consecutive uniform pairs ``(u1, u2)`` with
``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.  A :class:`SplitMix64` keeps a
counter so consecutive calls continue the same stream.
"""

from __future__ import annotations

import numpy as np

from .geometry import quat_to_matrix

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit outputs ``start .. start+count-1`` of the stream."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + idx * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = int(seed)
        self.counter = 0

    def _next(self, count: int) -> np.ndarray:
        out = splitmix64(self.seed, self.counter, count)
        self.counter += count
        return out

    def uniform(self, low=0.0, high=1.0, size=None):
        n = 1 if size is None else int(np.prod(size))
        u = (self._next(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        u = low + (high - low) * u
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        n = 1 if size is None else int(np.prod(size))
        u = self.uniform(size=2 * n).reshape(n, 2)
        z = np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])
        z = loc + scale * z
        return float(z[0]) if size is None else z.reshape(size)

    def integers(self, high: int, size=None):
        """Uniform integers in ``[0, high)`` by multiply-shift of a uniform."""
        n = 1 if size is None else int(np.prod(size))
        u = self.uniform(size=n)
        k = np.minimum((u * high).astype(np.int64), high - 1)
        return int(k[0]) if size is None else k.reshape(size)

    def sample_indices(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(n)`` by partial Fisher-Yates."""
        if k > n:
            raise ValueError("cannot sample more indices than available")
        perm = np.arange(n)
        u = self.uniform(size=k)
        for i in range(k):
            j = i + min(int(u[i] * (n - i)), n - i - 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.sort(perm[:k])

    def rotation(self) -> np.ndarray:
        """Uniformly random rotation matrix from a normalized 4D Gaussian."""
        q = self.normal(size=4)
        q /= np.linalg.norm(q)
        return quat_to_matrix(q)
