"""Deterministic counter-style random bits shared by every simulation path.

All Monte Carlo in this package draws from one splitmix64 stream family.
Per-task states are derived by hashing (master_seed, stream_tag, index), so
replicate j always sees the same bits no matter how work is scheduled or how
many workers run.  The same integer arithmetic is implemented three times --
here (scalar), in kernels.reference (vectorized numpy) and in the compiled
extension -- and the three agree bit for bit.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB

# Stream tags keep the sign bits, the fiber start points and the window
# offsets statistically independent for a given (seed, replicate).
TAG_SIGNS = 0x51
TAG_X0 = 0x52
TAG_T0 = 0x53

_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *parts: int) -> int:
    """Hash a master seed and integer coordinates into a stream state.

    derive_seed(seed, tag, j) is the state of replicate j of stream `tag`.
    """
    h = mix64((seed + GOLDEN) & MASK64)
    for p in parts:
        h = mix64(h ^ mix64((p + GOLDEN) & MASK64))
    return h


def next64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return (new_state, 64 output bits)."""
    state = (state + GOLDEN) & MASK64
    return state, mix64(state)


def uniform01(word: int) -> float:
    """Map 64 output bits to a double in [0, 1) using the top 53 bits."""
    return (word >> 11) * _INV_2_53
