"""Return-time growth, Renyi moment ratios and Gaussian limit checks.

All estimators here run on theorem2-mode systems with the fair Bernoulli
base.  A replicate draws its own symbol signs, a uniform fiber start point
and a uniform height in [-1/2, 1/2], all from counter-derived streams, so
every statistic is a pure function of (system, horizon, replicates, seed).

The Gaussian checks standardize the symbol-gated sum by sigma_eff*sqrt(n)
with sigma_eff^2 = (roof second moment)/4: each step contributes weight/2
times a fair sign, and orbit averages of squared weights converge to the
roof's second moment, making the per-step variance I/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from . import kernels
from .rng import TAG_SIGNS, TAG_T0, TAG_X0, derive_seed
from .skew_product import SkewSystem, harmonic_start, theorem2_kernel_setup

_TWO_PI = 2.0 * math.pi


def sigma_eff(sys: SkewSystem) -> float:
    """Effective per-step deviation of the symbol-gated sum."""
    setup = theorem2_kernel_setup(sys)
    return math.sqrt(setup["second_moment"] / 4.0)


def _replicate_inputs(sys: SkewSystem, replicates: int, seed: int, with_t: bool):
    setup = theorem2_kernel_setup(sys)
    x0 = kernels.uniforms(seed, TAG_X0, replicates)
    cos0, sin0 = harmonic_start(x0, setup["degree"])
    states = kernels.derive_states(seed, TAG_SIGNS, replicates)
    t0 = kernels.uniforms(seed, TAG_T0, replicates) - 0.5 if with_t else None
    return setup, x0, cos0, sin0, t0, states


@dataclass
class ReturnStats:
    """Moments of the window return count at one horizon."""

    n: int
    replicates: int
    mean_R: float
    mean_R2: float
    se_mean_R: float
    se_mean_R2: float
    renyi: float


def _stats_from_counts(n: int, counts: np.ndarray) -> ReturnStats:
    m = counts.shape[0]
    r = counts.astype(float)
    r2 = r * r
    mean_r = float(r.mean())
    mean_r2 = float(r2.mean())
    return ReturnStats(
        n=int(n),
        replicates=m,
        mean_R=mean_r,
        mean_R2=mean_r2,
        se_mean_R=float(r.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0,
        se_mean_R2=float(r2.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0,
        renyi=mean_r2 / mean_r**2 if mean_r > 0 else math.inf,
    )


def estimate_return_stats_multi(
    sys: SkewSystem, n_list, replicates: int, seed: int
) -> tuple[list[ReturnStats], np.ndarray]:
    """Return statistics at several nested horizons from one replicate batch.

    Also returns the per-step hit counts summed over replicates (length
    max(n_list)), which integrate to the same mean return count and feed
    the occupation-rate cross-check.
    """
    horizons = np.asarray(sorted(int(n) for n in n_list), dtype=np.int64)
    setup, _, cos0, sin0, t0, states = _replicate_inputs(sys, replicates, seed, with_t=True)
    counts, hits = kernels.skew_return_counts(
        setup["coef_a"],
        setup["coef_b"],
        setup["rot_c"],
        setup["rot_s"],
        cos0,
        sin0,
        2.0 * t0,
        int(horizons[-1]),
        horizons,
        states,
    )
    return [_stats_from_counts(n, counts[j]) for j, n in enumerate(horizons)], hits


def estimate_return_stats(sys: SkewSystem, n: int, replicates: int, seed: int) -> ReturnStats:
    """Monte Carlo moments of the return count R_n over the unit height band."""
    stats_list, _ = estimate_return_stats_multi(sys, [n], replicates, seed)
    return stats_list[0]


@dataclass
class ReturnSequence:
    """Normalized return-count growth a_n with a log-log power fit."""

    horizons: np.ndarray
    values: np.ndarray
    se: np.ndarray
    exponent: float | None
    constant: float | None
    fit_min_n: int
    replicates: int
    per_step_hits: np.ndarray


def fit_growth(horizons: np.ndarray, values: np.ndarray, fit_min_n: int) -> tuple[float | None, float | None]:
    """Log-log least squares fit values ~ constant * n^exponent.

    Uses horizons >= fit_min_n (small horizons carry the pre-asymptotic
    transient); with fewer than 3 horizons no fit is attempted.
    """
    horizons = np.asarray(horizons, dtype=float)
    values = np.asarray(values, dtype=float)
    if horizons.shape[0] < 3:
        return None, None
    mask = horizons >= fit_min_n
    if mask.sum() < 2:
        mask = np.ones_like(mask, dtype=bool)
    coeffs = np.polyfit(np.log(horizons[mask]), np.log(values[mask]), 1)
    return float(coeffs[0]), float(math.exp(coeffs[1]))


def return_sequence(
    sys: SkewSystem, n_list, replicates: int, seed: int, fit_min_n: int = 1024
) -> ReturnSequence:
    """Estimate a_n = E[R_n] per horizon and fit its growth exponent.

    The return set has unit measure under the product normalization, so the
    normalizing prefactor is 1.
    """
    stats_list, hits = estimate_return_stats_multi(sys, n_list, replicates, seed)
    horizons = np.array([s.n for s in stats_list], dtype=np.int64)
    values = np.array([s.mean_R for s in stats_list])
    se = np.array([s.se_mean_R for s in stats_list])
    exponent, constant = fit_growth(horizons, values, fit_min_n)
    return ReturnSequence(
        horizons=horizons,
        values=values,
        se=se,
        exponent=exponent,
        constant=constant,
        fit_min_n=fit_min_n,
        replicates=replicates,
        per_step_hits=hits,
    )


@dataclass
class CltResult:
    """Kolmogorov-Smirnov distance of the standardized sum to N(0,1)."""

    n: int
    samples: int
    ks_distance: float
    sigma_eff: float
    max_drift_ratio: float  # max |s_n^x| / sqrt(n) over sampled points


def clt_check(sys: SkewSystem, n: int, samples: int, seed: int) -> CltResult:
    """Sample the symbol-gated sum, center by half the orbit drift, test vs N(0,1)."""
    setup, _, cos0, sin0, _, states = _replicate_inputs(sys, samples, seed, with_t=False)
    horizons = np.array([n], dtype=np.int64)
    sign_sum, plain_sum = kernels.skew_partial_sums(
        setup["coef_a"],
        setup["coef_b"],
        setup["rot_c"],
        setup["rot_s"],
        cos0,
        sin0,
        int(n),
        horizons,
        states,
    )
    sig = sigma_eff(sys)
    if sig == 0.0:
        raise ValueError("zero roof has no Gaussian limit to test")
    vals = 0.5 * sign_sum[0] / (sig * math.sqrt(n))
    ks = float(sps.kstest(vals, "norm").statistic)
    drift = float(np.abs(plain_sum[0]).max() / math.sqrt(n))
    return CltResult(n=int(n), samples=samples, ks_distance=ks, sigma_eff=sig, max_drift_ratio=drift)


@dataclass
class PathSample:
    """Diffusively scaled partial-sum paths on a time mesh."""

    mesh: np.ndarray
    values: np.ndarray  # (len(mesh), paths)


@dataclass
class FcltResult:
    n: int
    paths: int
    mesh: np.ndarray
    covariance: np.ndarray
    target: np.ndarray
    max_error: float
    sample: PathSample


def fclt_check(sys: SkewSystem, n: int, samples: int, mesh, seed: int) -> FcltResult:
    """Compare scaled-path covariances with the Brownian min(s, u) profile."""
    mesh = np.asarray(sorted(float(s) for s in mesh))
    if mesh.size == 0 or mesh[0] <= 0.0 or mesh[-1] > 1.0:
        raise ValueError("mesh must lie in (0, 1]")
    setup, _, cos0, sin0, _, states = _replicate_inputs(sys, samples, seed, with_t=False)
    cps = np.unique(np.floor(mesh * n).astype(np.int64))
    if cps[0] < 1:
        raise ValueError("mesh times too small for this horizon")
    sign_sum, plain_sum = kernels.skew_partial_sums(
        setup["coef_a"],
        setup["coef_b"],
        setup["rot_c"],
        setup["rot_s"],
        cos0,
        sin0,
        int(cps[-1]),
        cps,
        states,
    )
    sig = sigma_eff(sys)
    if sig == 0.0:
        raise ValueError("zero roof has no Gaussian limit to test")
    idx = np.searchsorted(cps, np.floor(mesh * n).astype(np.int64))
    gated = 0.5 * (sign_sum + plain_sum)  # the raw symbol-gated sums
    full_drift = plain_sum[-1]
    scale = sig * math.sqrt(n)
    w = (gated[idx] - 0.5 * full_drift[None, :] * mesh[:, None]) / scale
    cov = np.cov(w)
    target = np.minimum.outer(mesh, mesh)
    err = float(np.abs(cov - target).max())
    return FcltResult(
        n=int(n),
        paths=samples,
        mesh=mesh,
        covariance=cov,
        target=target,
        max_error=err,
        sample=PathSample(mesh=mesh, values=w),
    )


@dataclass
class IndependenceResult:
    i: int
    j: int
    samples: int
    residual_max: float
    correlation: float
    corr_bound: float  # 4 / sqrt(samples)


def independence_decomposition_check(
    sys: SkewSystem, i: int, j: int, samples: int, seed: int
) -> IndependenceResult:
    """Split the j-step sum into blocks on disjoint sign coordinates.

    The first i steps and the remaining j-i steps (restarted from the
    rotated point with the shifted sign stream) reassemble the full sum
    exactly; their empirical correlation sits at zero within Monte Carlo
    noise because the blocks read disjoint sign bits.
    """
    if not 0 < i < j:
        raise ValueError("need 0 < i < j")
    setup = theorem2_kernel_setup(sys)
    trig = sys.fibers[1].roof.as_trig()
    alpha = setup["alpha"]
    x0 = kernels.uniforms(seed, TAG_X0, samples)
    nwords = (j + 63) // 64
    words = kernels.raw_words(seed, TAG_SIGNS, samples, nwords)

    def sign_at(step: int) -> np.ndarray:
        w = words[:, step >> 6]
        bit = (w >> np.uint64(step & 63)) & np.uint64(1)
        return np.where(bit.astype(bool), 1.0, -1.0)

    def block_sum(start_x: np.ndarray, offset: int, count: int) -> np.ndarray:
        acc = np.zeros(samples)
        x = start_x.copy()
        for l in range(count):
            acc += sign_at(offset + l) * np.asarray(trig(x), dtype=float)
            x = np.mod(x + alpha, 1.0)
        return acc

    full = block_sum(x0, 0, j)
    head = block_sum(x0, 0, i)
    x_mid = np.mod(x0 + i * alpha, 1.0)
    tail = block_sum(x_mid, i, j - i)
    residual = float(np.abs(full - head - tail).max())
    corr = float(np.corrcoef(head, tail)[0, 1])
    return IndependenceResult(
        i=i,
        j=j,
        samples=samples,
        residual_max=residual,
        correlation=corr,
        corr_bound=4.0 / math.sqrt(samples),
    )
