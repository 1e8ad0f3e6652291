"""Deterministic random streams.

A stream is a 4-word xoshiro256++ state seeded through splitmix64, held in a
small numpy array so the exact same generator can be driven from Python call
sites and from compiled kernels without any global state. Two runs with the
same seed consume the same draw sequence bit for bit, which is what makes
trajectory replay and parallel sweeps reproducible.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as _k

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state by one step; returns (new_state, output)."""
    state = (state + _GOLDEN) & _MASK64
    return state, _mix64(state)


def derive_seed(base_seed: int, *keys: int) -> int:
    """Derive a child seed from a base seed and positional integer keys.

    Used to give every sweep cell and repetition its own independent stream:
    derive_seed(base, alpha_index, beta_index, run_index). The mixing is
    positional, so (1, 0) and (0, 1) land on unrelated seeds.
    """
    s = base_seed & _MASK64
    for i, k in enumerate(keys):
        s = _mix64(s + (_GOLDEN * (i + 1) & _MASK64) + (int(k) & _MASK64))
    return s


def seed_state(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into a xoshiro256++ state array (uint64, shape (4,))."""
    state = np.empty(4, dtype=np.uint64)
    s = seed & _MASK64
    for i in range(4):
        s, out = splitmix64(s)
        state[i] = out
    if not state.any():  # unreachable in practice, but the generator needs a nonzero state
        state[0] = _GOLDEN
    return state


class RandomStream:
    """Explicit-state random stream shared by Python code and compiled kernels.

    The raw ``state`` array can be handed to the jitted simulation loop, which
    advances it in place; draws made before and after through this wrapper see
    a single continuous sequence.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed_state(int(seed))

    def uniform(self) -> float:
        """Draw from [0, 1)."""
        return _k.rng_uniform(self.state)

    def randint(self, n: int) -> int:
        """Draw a uniform integer from {0, ..., n-1}."""
        if n <= 0:
            raise ValueError(f"randint needs n >= 1, got {n}")
        return int(_k.rng_randint(self.state, n))

    def normal(self, mean: float = 0.0, sigma: float = 1.0) -> float:
        """Draw a Gaussian. Consumes two uniforms regardless of sigma."""
        return _k.rng_normal(self.state, mean, sigma)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def copy(self) -> "RandomStream":
        dup = object.__new__(RandomStream)
        dup.state = self.state.copy()
        return dup
