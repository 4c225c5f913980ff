# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte Carlo kernels.

Bit-for-bit twin of skewlab.kernels.reference: same splitmix64 streams, same
per-replicate floating-point operation order (the build disables FP
contraction so no fused multiply-adds sneak in).  Loops are arranged
step-outer / replicate-inner, which keeps the subset-sum lookup tables and
harmonic state hot in cache.
"""

from libc.stdint cimport uint64_t, int64_t, uint8_t

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15UL
cdef uint64_t MIX_A = 0xBF58476D1CE4E5B9UL
cdef uint64_t MIX_B = 0x94D049BB133111EBUL
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef int _TAG_SIGNS = 0x51


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return z ^ (z >> 31)


cdef inline uint64_t _next64(uint64_t* state) noexcept nogil:
    state[0] = state[0] + GOLDEN
    return _mix64(state[0])


def derive_states(seed, tag, count):
    """Vectorized derive_seed(seed, tag, j) for j = 0..count-1."""
    cdef uint64_t h = _mix64((<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)) + GOLDEN)
    h = _mix64(h ^ _mix64((<uint64_t>tag) + GOLDEN))
    cdef Py_ssize_t m = count
    out_arr = np.empty(m, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    cdef Py_ssize_t j
    for j in range(m):
        out[j] = _mix64(h ^ _mix64((<uint64_t>j) + GOLDEN))
    return out_arr


def uniforms(seed, tag, count):
    """One double in [0,1) per replicate (first draw of the tagged stream)."""
    states_arr = derive_states(seed, tag, count)
    cdef uint64_t[::1] states = states_arr
    cdef Py_ssize_t m = states.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j
    cdef uint64_t w
    for j in range(m):
        w = _next64(&states[j])
        out[j] = <double>(w >> 11) * INV_2_53
    return out_arr


def raw_words(seed, tag, count, nwords):
    """The first nwords output words of each tagged replicate stream."""
    states_arr = derive_states(seed, tag, count)
    cdef uint64_t[::1] states = states_arr
    cdef Py_ssize_t m = states.shape[0]
    cdef Py_ssize_t nw = nwords
    out_arr = np.empty((m, nw), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = out_arr
    cdef Py_ssize_t j, w
    for j in range(m):
        for w in range(nw):
            out[j, w] = _next64(&states[j])
    return out_arr


def subset_sum_samples(weights, checkpoints, num_samples, seed):
    """Sample sums of random subsets of the weights (bit set -> included)."""
    cps = np.asarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t horizon = <Py_ssize_t>cps[len(cps) - 1]
    cdef Py_ssize_t nblocks = (horizon + 7) // 8

    padded = np.zeros(nblocks * 8, dtype=np.float64)
    padded[:horizon] = np.asarray(weights, dtype=np.float64)[:horizon]
    tables_arr = np.zeros((nblocks, 256), dtype=np.float64)
    cdef double[:, ::1] tables = tables_arr
    cdef double[::1] wpad = padded
    cdef Py_ssize_t t, b, s
    cdef Py_ssize_t size
    for t in range(nblocks):
        for b in range(8):
            size = 1 << b
            for s in range(size):
                tables[t, s | size] = tables[t, s] + wpad[8 * t + b]

    cp_after = (cps + 7) // 8 - 1
    cdef int64_t[::1] cpb = np.ascontiguousarray(cp_after, dtype=np.int64)
    cdef Py_ssize_t ncp = cpb.shape[0]

    states_arr = derive_states(seed, _TAG_SIGNS, num_samples)
    cdef uint64_t[::1] states = states_arr
    cdef Py_ssize_t m = num_samples
    words_arr = np.zeros(m, dtype=np.uint64)
    cdef uint64_t[::1] words = words_arr
    acc_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] acc = acc_arr
    out_arr = np.empty((ncp, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    cdef Py_ssize_t ci = 0, j
    cdef int shift
    cdef uint64_t byte
    for t in range(nblocks):
        shift = 8 * (t % 8)
        if t % 8 == 0:
            for j in range(m):
                words[j] = _next64(&states[j])
        for j in range(m):
            byte = (words[j] >> shift) & 0xFF
            acc[j] = acc[j] + tables[t, <Py_ssize_t>byte]
        while ci < ncp and cpb[ci] == t:
            for j in range(m):
                out[ci, j] = acc[j]
            ci += 1
    return out_arr


def skew_partial_sums(coef_a, coef_b, rot_c, rot_s, cos0, sin0, n, checkpoints, states):
    """Per-replicate signed and plain partial sums of rotation-orbit weights."""
    cdef double[::1] A = np.ascontiguousarray(coef_a, dtype=np.float64)
    cdef double[::1] B = np.ascontiguousarray(coef_b, dtype=np.float64)
    cdef double[::1] rc = np.ascontiguousarray(rot_c, dtype=np.float64)
    cdef double[::1] rs = np.ascontiguousarray(rot_s, dtype=np.float64)
    cosk_arr = np.array(cos0, dtype=np.float64, copy=True, order="C")
    sink_arr = np.array(sin0, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] cosk = cosk_arr
    cdef double[:, ::1] sink = sink_arr
    st_arr = np.array(states, dtype=np.uint64, copy=True)
    cdef uint64_t[::1] st = st_arr
    cdef int64_t[::1] cps = np.ascontiguousarray(checkpoints, dtype=np.int64)

    cdef Py_ssize_t m = st.shape[0]
    cdef Py_ssize_t nharm = A.shape[0]
    cdef Py_ssize_t nsteps = n
    cdef Py_ssize_t ncp = cps.shape[0]

    acc_sign_arr = np.zeros(m, dtype=np.float64)
    acc_plain_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] acc_sign = acc_sign_arr
    cdef double[::1] acc_plain = acc_plain_arr
    out_sign_arr = np.empty((ncp, m), dtype=np.float64)
    out_plain_arr = np.empty((ncp, m), dtype=np.float64)
    cdef double[:, ::1] out_sign = out_sign_arr
    cdef double[:, ::1] out_plain = out_plain_arr
    words_arr = np.zeros(m, dtype=np.uint64)
    cdef uint64_t[::1] words = words_arr

    cdef Py_ssize_t i, j, k, ci = 0
    cdef int shift
    cdef double c, cnew, snew
    cdef uint64_t bit
    for i in range(nsteps):
        shift = i % 64
        if shift == 0:
            for j in range(m):
                words[j] = _next64(&st[j])
        for j in range(m):
            bit = (words[j] >> shift) & 1
            c = 0.0
            for k in range(nharm):
                c = c + (A[k] * cosk[j, k] + B[k] * sink[j, k])
            acc_plain[j] = acc_plain[j] + c
            if bit:
                acc_sign[j] = acc_sign[j] + c
            else:
                acc_sign[j] = acc_sign[j] + (-c)
            for k in range(nharm):
                cnew = cosk[j, k] * rc[k] - sink[j, k] * rs[k]
                snew = sink[j, k] * rc[k] + cosk[j, k] * rs[k]
                cosk[j, k] = cnew
                sink[j, k] = snew
        if ci < ncp and cps[ci] == i + 1:
            for j in range(m):
                out_sign[ci, j] = acc_sign[j]
                out_plain[ci, j] = acc_plain[j]
            ci += 1
    return out_sign_arr, out_plain_arr


def skew_return_counts(coef_a, coef_b, rot_c, rot_s, cos0, sin0, twice_t0, n, checkpoints, states):
    """Count visits of the height coordinate to the unit window."""
    cdef double[::1] A = np.ascontiguousarray(coef_a, dtype=np.float64)
    cdef double[::1] B = np.ascontiguousarray(coef_b, dtype=np.float64)
    cdef double[::1] rc = np.ascontiguousarray(rot_c, dtype=np.float64)
    cdef double[::1] rs = np.ascontiguousarray(rot_s, dtype=np.float64)
    cosk_arr = np.array(cos0, dtype=np.float64, copy=True, order="C")
    sink_arr = np.array(sin0, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] cosk = cosk_arr
    cdef double[:, ::1] sink = sink_arr
    cdef double[::1] t2 = np.ascontiguousarray(twice_t0, dtype=np.float64)
    st_arr = np.array(states, dtype=np.uint64, copy=True)
    cdef uint64_t[::1] st = st_arr
    cdef int64_t[::1] cps = np.ascontiguousarray(checkpoints, dtype=np.int64)

    cdef Py_ssize_t m = st.shape[0]
    cdef Py_ssize_t nharm = A.shape[0]
    cdef Py_ssize_t nsteps = n
    cdef Py_ssize_t ncp = cps.shape[0]

    acc_sign_arr = np.zeros(m, dtype=np.float64)
    acc_plain_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] acc_sign = acc_sign_arr
    cdef double[::1] acc_plain = acc_plain_arr
    counts_arr = np.zeros(m, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    out_arr = np.empty((ncp, m), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    hits_arr = np.zeros(nsteps, dtype=np.int64)
    cdef int64_t[::1] hits = hits_arr
    words_arr = np.zeros(m, dtype=np.uint64)
    cdef uint64_t[::1] words = words_arr

    cdef Py_ssize_t i, j, k, ci = 0
    cdef int shift
    cdef double c, cnew, snew, v
    cdef uint64_t bit
    cdef int64_t nhit
    for i in range(nsteps):
        shift = i % 64
        if shift == 0:
            for j in range(m):
                words[j] = _next64(&st[j])
        nhit = 0
        for j in range(m):
            bit = (words[j] >> shift) & 1
            c = 0.0
            for k in range(nharm):
                c = c + (A[k] * cosk[j, k] + B[k] * sink[j, k])
            acc_plain[j] = acc_plain[j] + c
            if bit:
                acc_sign[j] = acc_sign[j] + c
            else:
                acc_sign[j] = acc_sign[j] + (-c)
            for k in range(nharm):
                cnew = cosk[j, k] * rc[k] - sink[j, k] * rs[k]
                snew = sink[j, k] * rc[k] + cosk[j, k] * rs[k]
                cosk[j, k] = cnew
                sink[j, k] = snew
            v = (acc_sign[j] + acc_plain[j]) + t2[j]
            if -1.0 <= v <= 1.0:
                counts[j] = counts[j] + 1
                nhit += 1
        hits[i] = nhit
        if ci < ncp and cps[ci] == i + 1:
            for j in range(m):
                out[ci, j] = counts[j]
            ci += 1
    return out_arr, hits_arr


def walk_return_within(dim, n, states):
    """Flags (uint8) of replicates whose lattice walk revisits the origin."""
    st_arr = np.array(states, dtype=np.uint64, copy=True)
    cdef uint64_t[::1] st = st_arr
    cdef Py_ssize_t m = st.shape[0]
    cdef Py_ssize_t nsteps = n
    flags_arr = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[::1] flags = flags_arr
    cdef Py_ssize_t i, j
    cdef uint64_t w, coord
    cdef int64_t sign, x, y, z
    cdef int d = dim

    if d == 1:
        for j in range(m):
            x = 0
            for i in range(nsteps):
                w = _next64(&st[j])
                sign = 1 if (w & 1) else -1
                x = x + sign
                if x == 0:
                    flags[j] = 1
                    break
    elif d == 3:
        for j in range(m):
            x = 0
            y = 0
            z = 0
            for i in range(nsteps):
                w = _next64(&st[j])
                sign = 1 if (w & 1) else -1
                coord = ((w >> 32) * 3) >> 32
                if coord == 0:
                    x = x + sign
                elif coord == 1:
                    y = y + sign
                else:
                    z = z + sign
                if x == 0 and y == 0 and z == 0:
                    flags[j] = 1
                    break
    else:
        raise ValueError(f"walk dimension must be 1 or 3, got {dim}")
    return flags_arr
