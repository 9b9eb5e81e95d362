"""Deterministic 64-bit seed derivation.

Every randomized stage derives its per-item seeds from a single master seed
with a fixed mixing function, so results are reproducible and independent of
sharding or worker count.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """Finalization mix with full avalanche (splitmix64 finalizer)."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for item `index` under `master_seed`.

    Pure function of its arguments: shard boundaries and evaluation order
    cannot change the result.
    """
    if index < 0:
        raise ValueError(f"index must be nonnegative, got {index}")
    return mix64((master_seed + (index + 1) * _GAMMA) & _MASK64)


def seed_stream(seed: int):
    """Infinite generator of 64-bit values from `seed`."""
    state = seed & _MASK64
    while True:
        state = (state + _GAMMA) & _MASK64
        yield mix64(state)


def coin(seed: int) -> int:
    """A single fair bit drawn from the stream at `seed`. Returns 0 or 1."""
    return next(seed_stream(seed)) & 1
