"""Kernel backend selection and the shared dispatch surface.

The compiled extension (skewlab._core) is preferred when importable; the
numpy twin in .reference is the fallback.  Set SKEWLAB_BACKEND=python or
SKEWLAB_BACKEND=compiled to force one side (forcing an unavailable compiled
backend raises).  Both backends return identical arrays for identical
arguments, so results never depend on which one is active beyond speed.
"""

from __future__ import annotations

import os

import numpy as np

from . import reference

_requested = os.environ.get("SKEWLAB_BACKEND", "auto").lower()
if _requested in ("auto", "", "compiled"):
    try:
        from skewlab import _core as _impl

        _BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "SKEWLAB_BACKEND=compiled but skewlab._core is not built; "
                "reinstall with a C compiler or use SKEWLAB_BACKEND=python"
            )
        _impl = reference
        _BACKEND = "python"
elif _requested == "python":
    _impl = reference
    _BACKEND = "python"
else:
    raise ValueError(f"unknown SKEWLAB_BACKEND value: {_requested!r}")


def backend_name() -> str:
    """Which kernel implementation is active ('compiled' or 'python')."""
    return _BACKEND


def derive_states(seed: int, tag: int, count: int) -> np.ndarray:
    return _impl.derive_states(seed, tag, count)


def uniforms(seed: int, tag: int, count: int) -> np.ndarray:
    return _impl.uniforms(seed, tag, count)


def raw_words(seed: int, tag: int, count: int, nwords: int) -> np.ndarray:
    return _impl.raw_words(seed, tag, count, nwords)


def _check_checkpoints(checkpoints: np.ndarray, byte_aligned: bool) -> np.ndarray:
    cps = np.asarray(checkpoints, dtype=np.int64)
    if cps.ndim != 1 or cps.size == 0:
        raise ValueError("checkpoints must be a non-empty 1-d sequence")
    if cps[0] < 1 or np.any(np.diff(cps) <= 0):
        raise ValueError("checkpoints must be strictly increasing and >= 1")
    if byte_aligned and np.any(cps[:-1] % 8 != 0):
        raise ValueError(
            "all checkpoints except the last must be multiples of 8 "
            "(the subset-sum sampler works in 8-bit blocks)"
        )
    return cps


def sign_sum_samples(
    weights: np.ndarray, checkpoints, num_samples: int, seed: int
) -> np.ndarray:
    """Monte Carlo samples of the weighted fair-sign sums.

    Row i holds num_samples independent draws of sum_{l < checkpoints[i]}
    weights[l] * X_l with X_l = +/-1 fair, all rows sharing the same sign
    draws (nested horizons).  Deterministic in (weights, checkpoints, seed).
    """
    cps = _check_checkpoints(checkpoints, byte_aligned=True)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if cps[-1] > w.shape[0]:
        raise ValueError("last checkpoint exceeds the number of weights")
    raw = _impl.subset_sum_samples(w, cps, num_samples, seed)
    prefix = np.cumsum(w)[cps - 1]
    return 2.0 * raw - prefix[:, None]


def skew_partial_sums(
    coef_a,
    coef_b,
    rot_c,
    rot_s,
    cos0,
    sin0,
    n: int,
    checkpoints,
    states,
) -> tuple[np.ndarray, np.ndarray]:
    cps = _check_checkpoints(checkpoints, byte_aligned=False)
    if cps[-1] > n:
        raise ValueError("checkpoints exceed the number of steps")
    return _impl.skew_partial_sums(
        np.ascontiguousarray(coef_a, dtype=np.float64),
        np.ascontiguousarray(coef_b, dtype=np.float64),
        np.ascontiguousarray(rot_c, dtype=np.float64),
        np.ascontiguousarray(rot_s, dtype=np.float64),
        np.ascontiguousarray(cos0, dtype=np.float64),
        np.ascontiguousarray(sin0, dtype=np.float64),
        int(n),
        cps,
        np.ascontiguousarray(states, dtype=np.uint64),
    )


def skew_return_counts(
    coef_a,
    coef_b,
    rot_c,
    rot_s,
    cos0,
    sin0,
    twice_t0,
    n: int,
    checkpoints,
    states,
) -> tuple[np.ndarray, np.ndarray]:
    cps = _check_checkpoints(checkpoints, byte_aligned=False)
    if cps[-1] > n:
        raise ValueError("checkpoints exceed the number of steps")
    return _impl.skew_return_counts(
        np.ascontiguousarray(coef_a, dtype=np.float64),
        np.ascontiguousarray(coef_b, dtype=np.float64),
        np.ascontiguousarray(rot_c, dtype=np.float64),
        np.ascontiguousarray(rot_s, dtype=np.float64),
        np.ascontiguousarray(cos0, dtype=np.float64),
        np.ascontiguousarray(sin0, dtype=np.float64),
        np.ascontiguousarray(twice_t0, dtype=np.float64),
        int(n),
        cps,
        np.ascontiguousarray(states, dtype=np.uint64),
    )


def walk_return_within(dim: int, n: int, states) -> np.ndarray:
    return _impl.walk_return_within(
        int(dim), int(n), np.ascontiguousarray(states, dtype=np.uint64)
    )
