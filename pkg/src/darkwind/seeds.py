"""Deterministic 64-bit seed derivation for reproducible disorder sweeps.

Every random draw in this package is keyed by a seed derived from a user
base seed plus integer coordinates (grid indices, realization index) via a
fixed splitmix64-based mixing chain.  The algorithm is frozen so that runs
are reproducible across machines, worker counts and language ports:

    absorb(s, v)   = mix(s XOR mix(v + GOLDEN))      (all mod 2^64)
    derive_seed(b, i, j, r) = absorb(absorb(absorb(b, i), j), r)

where ``mix`` is the splitmix64 finalizer (Steele/Lea/Flood 2014).
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(x: int) -> int:
    """splitmix64 finalizer: bijective avalanche on 64-bit integers."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def splitmix64(x: int) -> int:
    """One splitmix64 step: mix(x + GOLDEN)."""
    return _mix((x + _GOLDEN) & _MASK64)


def absorb(seed: int, value: int) -> int:
    """Fold one non-negative integer into a seed, returning a new seed."""
    if value < 0:
        raise ValueError("absorbed values must be non-negative")
    return _mix((seed & _MASK64) ^ splitmix64(value))


def derive_seed(base_seed: int, i: int = 0, j: int = 0, r: int = 0) -> int:
    """Seed for grid cell (i, j), realization r.

    Stateless: identical inputs always give the identical seed, and the
    chain structure means a sweep can pre-absorb (i, j) into a per-cell
    base seed and later absorb r without changing the result.
    """
    s = base_seed & _MASK64
    for v in (i, j, r):
        s = absorb(s, v)
    return s
