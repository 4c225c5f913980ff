"""Vectorized numpy implementations of the Monte Carlo kernels.

This is the fallback used when the compiled extension is absent, and the
reference the extension is tested against.  Every routine performs the same
integer RNG arithmetic and the same per-replicate floating-point operations
in the same order as skewlab._core, so the two backends return identical
arrays (the C code is compiled with contraction disabled).

Conventions shared by both backends:
  - replicate j of stream `tag` starts from derive_seed(seed, tag, j);
  - sign bit i of a replicate is bit (i mod 64) of output word (i div 64);
  - bit 1 means sign +1 (symbol 1), bit 0 means sign -1 (symbol 0).
"""

from __future__ import annotations

import numpy as np

from ..rng import GOLDEN, MIX_A, MIX_B, TAG_SIGNS

_U64 = np.uint64
_GOLDEN = _U64(GOLDEN)
_MIX_A = _U64(MIX_A)
_MIX_B = _U64(MIX_B)
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U64(30))) * _MIX_A
        z = (z ^ (z >> _U64(27))) * _MIX_B
        return z ^ (z >> _U64(31))


def _advance(states: np.ndarray) -> np.ndarray:
    """In-place splitmix64 step; returns the output words."""
    with np.errstate(over="ignore"):
        states += _GOLDEN
    return _mix64(states.copy())


def derive_states(seed: int, tag: int, count: int) -> np.ndarray:
    """Vectorized derive_seed(seed, tag, j) for j = 0..count-1."""
    with np.errstate(over="ignore"):
        h = _mix64(np.array([_U64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN]))[0]
        h = _mix64(np.array([h ^ _mix64(np.array([_U64(tag) + _GOLDEN]))[0]]))[0]
        idx = np.arange(count, dtype=np.uint64)
        inner = _mix64(idx + _GOLDEN)
        return _mix64(h ^ inner)


def uniforms(seed: int, tag: int, count: int) -> np.ndarray:
    """One double in [0,1) per replicate (first draw of the tagged stream)."""
    states = derive_states(seed, tag, count)
    words = _advance(states)
    return (words >> _U64(11)).astype(np.float64) * _INV_2_53


def raw_words(seed: int, tag: int, count: int, nwords: int) -> np.ndarray:
    """The first nwords output words of each tagged replicate stream."""
    states = derive_states(seed, tag, count)
    out = np.empty((count, nwords), dtype=np.uint64)
    for w in range(nwords):
        out[:, w] = _advance(states)
    return out


def _subset_tables(weights: np.ndarray, nblocks: int) -> np.ndarray:
    """Per-block lookup tables of all 8-bit subset sums, zero padded."""
    padded = np.zeros(nblocks * 8, dtype=np.float64)
    padded[: weights.shape[0]] = weights
    cblk = padded.reshape(nblocks, 8)
    tables = np.zeros((nblocks, 256), dtype=np.float64)
    for b in range(8):
        size = 1 << b
        tables[:, size : 2 * size] = tables[:, :size] + cblk[:, b : b + 1]
    return tables


def subset_sum_samples(
    weights: np.ndarray, checkpoints: np.ndarray, num_samples: int, seed: int
) -> np.ndarray:
    """Sample sums of random subsets of the weights (bit set -> included).

    Returns (len(checkpoints), num_samples); row i holds, per replicate, the
    sum over indices < checkpoints[i] whose sign bit is 1.
    """
    horizon = int(checkpoints[-1])
    nblocks = (horizon + 7) // 8
    tables = _subset_tables(np.ascontiguousarray(weights[:horizon]), nblocks)
    cp_after_block = (np.asarray(checkpoints) + 7) // 8 - 1

    states = derive_states(seed, TAG_SIGNS, num_samples)
    words = np.zeros(num_samples, dtype=np.uint64)
    acc = np.zeros(num_samples, dtype=np.float64)
    out = np.empty((len(cp_after_block), num_samples), dtype=np.float64)
    ci = 0
    for t in range(nblocks):
        if t % 8 == 0:
            words = _advance(states)
        byte = ((words >> _U64(8 * (t % 8))) & _U64(0xFF)).astype(np.intp)
        acc = acc + tables[t][byte]
        while ci < len(cp_after_block) and cp_after_block[ci] == t:
            out[ci] = acc
            ci += 1
    return out


def skew_partial_sums(
    coef_a: np.ndarray,
    coef_b: np.ndarray,
    rot_c: np.ndarray,
    rot_s: np.ndarray,
    cos0: np.ndarray,
    sin0: np.ndarray,
    n: int,
    checkpoints: np.ndarray,
    states: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-replicate signed and plain partial sums of rotation-orbit weights.

    Weight i of replicate j is sum_k coef_a[k]*cos(2*pi*k*x_i) +
    coef_b[k]*sin(2*pi*k*x_i) with x_i the orbit of the replicate's start
    point, maintained by the angle-addition recurrence seeded from
    (cos0, sin0) and rotated by (rot_c, rot_s) each step.  Returns
    (sign_sum, plain_sum), each (len(checkpoints), num_replicates).
    """
    m = states.shape[0]
    nharm = coef_a.shape[0]
    cosk = cos0.astype(np.float64, copy=True)
    sink = sin0.astype(np.float64, copy=True)
    states = states.copy()
    acc_sign = np.zeros(m, dtype=np.float64)
    acc_plain = np.zeros(m, dtype=np.float64)
    out_sign = np.empty((len(checkpoints), m), dtype=np.float64)
    out_plain = np.empty((len(checkpoints), m), dtype=np.float64)
    words = np.zeros(m, dtype=np.uint64)
    ci = 0
    for i in range(n):
        if i % 64 == 0:
            words = _advance(states)
        bit = ((words >> _U64(i % 64)) & _U64(1)).astype(bool)
        c = np.zeros(m, dtype=np.float64)
        for k in range(nharm):
            c = c + (coef_a[k] * cosk[:, k] + coef_b[k] * sink[:, k])
        acc_plain = acc_plain + c
        acc_sign = acc_sign + np.where(bit, c, -c)
        for k in range(nharm):
            cnew = cosk[:, k] * rot_c[k] - sink[:, k] * rot_s[k]
            snew = sink[:, k] * rot_c[k] + cosk[:, k] * rot_s[k]
            cosk[:, k] = cnew
            sink[:, k] = snew
        if ci < len(checkpoints) and checkpoints[ci] == i + 1:
            out_sign[ci] = acc_sign
            out_plain[ci] = acc_plain
            ci += 1
    return out_sign, out_plain


def skew_return_counts(
    coef_a: np.ndarray,
    coef_b: np.ndarray,
    rot_c: np.ndarray,
    rot_s: np.ndarray,
    cos0: np.ndarray,
    sin0: np.ndarray,
    twice_t0: np.ndarray,
    n: int,
    checkpoints: np.ndarray,
    states: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Count visits of the height coordinate to the unit window.

    Step i hits when |sign_sum_i + plain_sum_i + 2*t0| <= 1.  Returns
    (counts, hits): counts is (len(checkpoints), m) int64 with the running
    hit count at each checkpoint, hits is (n,) int64 with the number of
    replicates hitting at each step (for occupation-rate cross checks).
    """
    m = states.shape[0]
    nharm = coef_a.shape[0]
    cosk = cos0.astype(np.float64, copy=True)
    sink = sin0.astype(np.float64, copy=True)
    states = states.copy()
    acc_sign = np.zeros(m, dtype=np.float64)
    acc_plain = np.zeros(m, dtype=np.float64)
    counts = np.zeros(m, dtype=np.int64)
    out = np.empty((len(checkpoints), m), dtype=np.int64)
    hits = np.zeros(n, dtype=np.int64)
    words = np.zeros(m, dtype=np.uint64)
    ci = 0
    for i in range(n):
        if i % 64 == 0:
            words = _advance(states)
        bit = ((words >> _U64(i % 64)) & _U64(1)).astype(bool)
        c = np.zeros(m, dtype=np.float64)
        for k in range(nharm):
            c = c + (coef_a[k] * cosk[:, k] + coef_b[k] * sink[:, k])
        acc_plain = acc_plain + c
        acc_sign = acc_sign + np.where(bit, c, -c)
        for k in range(nharm):
            cnew = cosk[:, k] * rot_c[k] - sink[:, k] * rot_s[k]
            snew = sink[:, k] * rot_c[k] + cosk[:, k] * rot_s[k]
            cosk[:, k] = cnew
            sink[:, k] = snew
        hit = np.abs(acc_sign + acc_plain + twice_t0) <= 1.0
        counts = counts + hit
        hits[i] = int(np.count_nonzero(hit))
        if ci < len(checkpoints) and checkpoints[ci] == i + 1:
            out[ci] = counts
            ci += 1
    return out, hits


def walk_return_within(dim: int, n: int, states: np.ndarray) -> np.ndarray:
    """Flags (uint8) of replicates whose lattice walk revisits the origin.

    dim 1: position moves by the sign bit each step.  dim 3: the sign bit
    moves one of three coordinates, chosen uniformly from the top 32 output
    bits of the same word.
    """
    m = states.shape[0]
    states = states.copy()
    flags = np.zeros(m, dtype=bool)
    if dim == 1:
        pos = np.zeros(m, dtype=np.int64)
        for _ in range(n):
            words = _advance(states)
            sign = np.where((words & _U64(1)).astype(bool), 1, -1)
            pos = pos + sign
            flags |= pos == 0
    elif dim == 3:
        pos = np.zeros((3, m), dtype=np.int64)
        for _ in range(n):
            words = _advance(states)
            sign = np.where((words & _U64(1)).astype(bool), 1, -1)
            with np.errstate(over="ignore"):
                coord = ((words >> _U64(32)) * _U64(3)) >> _U64(32)
            for c in range(3):
                sel = coord == _U64(c)
                pos[c] = pos[c] + np.where(sel, sign, 0)
            flags |= (pos[0] == 0) & (pos[1] == 0) & (pos[2] == 0)
    else:
        raise ValueError(f"walk dimension must be 1 or 3, got {dim}")
    return flags.astype(np.uint8)
