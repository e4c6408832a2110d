"""Seeded counter-based random number generation.

Every stochastic component of the simulator draws from a `CounterRng`,
a SplitMix64-style generator whose n-th output is a pure function of
(key, n). That makes streams reproducible bit-for-bit across runs and
platforms, lets independent substreams be derived by key mixing instead
of by draw-order bookkeeping, and vectorizes cleanly (the outputs for a
block of counters are computed in one shot).
"""

from __future__ import annotations

import math

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = 0xFFFFFFFFFFFFFFFF


def _fmix64(z: np.ndarray) -> np.ndarray:
    # SplitMix64 output finalizer (Steele, Lea & Flood), uint64 wraparound.
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def mix_key(*values: int) -> int:
    """Fold integers into a single 64-bit stream key.

    Used to derive independent substreams from (master seed, tags...).
    """
    key = 0x6A09E667F3BCC909  # arbitrary non-zero start
    for v in values:
        z = np.uint64((key ^ (int(v) & _U64)) & _U64) + _GOLDEN
        key = int(_fmix64(np.uint64(z)))
    return key


class CounterRng:
    """Deterministic stream of uniforms/normals/gammas keyed by a seed.

    The i-th raw draw is fmix64(key + (i+1)*golden); the counter only
    advances, so a consumed block never overlaps a later one.
    """

    def __init__(self, seed: int, *tags: int):
        self._key = np.uint64(mix_key(seed, *tags))
        self._counter = 0

    def spawn(self, *tags: int) -> "CounterRng":
        """Child stream with an independent key; does not advance self."""
        return CounterRng(int(self._key), *tags)

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        return _fmix64(self._key + idx * _GOLDEN)

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in the open interval (0, 1)."""
        bits = self._raw(n) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * 2.0**-53

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normals(self, n: int) -> np.ndarray:
        """n standard normal draws via Box-Muller."""
        m = (n + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:n]

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def gammas(self, n: int, shape: float) -> np.ndarray:
        """n draws from Gamma(shape, scale=1) via the Marsaglia-Tsang squeeze.

        Requires shape >= 1 (the simulator only uses shape > 1).
        """
        if shape < 1.0:
            raise ValueError(f"gamma shape must be >= 1, got {shape}")
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        out = np.empty(n, dtype=np.float64)
        pending = np.arange(n)
        while pending.size:
            m = pending.size
            x = self.normals(m)
            v = (1.0 + c * x) ** 3
            u = self.uniforms(m)
            pos = v > 0.0
            squeeze = pos & (u < 1.0 - 0.0331 * x**4)
            with np.errstate(invalid="ignore"):
                slow = pos & ~squeeze & (
                    np.log(u) < 0.5 * x * x + d * (1.0 - v + np.log(np.where(pos, v, 1.0)))
                )
            accepted = squeeze | slow
            out[pending[accepted]] = d * v[accepted]
            pending = pending[~accepted]
        return out

    def gamma(self, shape: float) -> float:
        return float(self.gammas(1, shape)[0])

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n) (argsort of a uniform block)."""
        return np.argsort(self.uniforms(n), kind="stable")

    def choice(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), uniform without replacement."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot choose {k} of {n}")
        return self.permutation(n)[:k]
