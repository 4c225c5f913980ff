"""The law of weighted fair-sign sums by three routes, plus band verifiers.

Routes: exact enumeration (meet-in-the-middle up to 40 weights, an integer
lattice dynamic program for commensurable weights of any length), a
characteristic-function bracket through a band-limited window pair, and
Monte Carlo.  On top of these sit grid verifiers for the Gaussian sandwich
of the characteristic function near the origin, its exponential decay on a
fixed frequency band, and the sqrt(n)-normalized interval-probability scan
with moving targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from . import kernels
from .circle_dynamics import classify_subgroup
from .fourier_windows import WindowPair, default_window_pair
from .rng import derive_seed
from .skew_product import SkewSystem, theorem2_kernel_setup

_TAG_SCAN = 0x61
_LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class WeightedSignSum:
    """A finite weight list c_0..c_{n-1} attached to independent fair signs."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def sup_weight(self) -> float:
        return float(np.abs(self.weights).max())


@dataclass(frozen=True)
class IntervalQuery:
    """Target interval [a, b] for the sum, moved by a shift.

    The queried event is sum + shift in [a, b].  Probability routes that
    need a unit normalization rescale internally so [a, b] maps to [-1, 1];
    `note` is free-form annotation space.
    """

    a: float
    b: float
    shift: float = 0.0
    note: str = ""

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError("interval must satisfy a <= b")

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.b - self.a)


def _boundary_eps(w: WeightedSignSum, q: IntervalQuery) -> float:
    scale = max(1.0, abs(q.a), abs(q.b), abs(q.shift), float(np.abs(w.weights).sum()))
    return 1e-12 * scale


def _count_inside(values: np.ndarray, q: IntervalQuery, eps: float) -> np.ndarray:
    shifted = values + q.shift
    return (shifted >= q.a - eps) & (shifted <= q.b + eps)


def _half_sums(weights: np.ndarray) -> np.ndarray:
    """All 2^len signed sums of the given weights."""
    sums = np.zeros(1)
    for w in weights:
        sums = np.concatenate([sums - w, sums + w])
    return sums


def lattice_step(weights: np.ndarray, tol: float = _LATTICE_TOL) -> float | None:
    """Common lattice spacing of the weights, or None if incommensurable."""
    cls = classify_subgroup(weights, tol)
    if cls.kind == "lattice":
        return cls.step
    if cls.kind == "trivial":
        return None
    return None


def _lattice_prob(w: WeightedSignSum, q: IntervalQuery, step: float) -> float:
    ints = np.rint(w.weights / step).astype(np.int64)
    reach = int(np.abs(ints).sum())
    if (2 * reach + 1) * w.n > 1 << 33:
        raise ValueError("lattice dynamic program too large for this weight set")
    probs = np.zeros(2 * reach + 1)
    probs[reach] = 1.0
    for k in ints:
        k = int(k)
        up = np.zeros_like(probs)
        down = np.zeros_like(probs)
        if k >= 0:
            if k:
                up[k:] = probs[: probs.shape[0] - k]
                down[: probs.shape[0] - k] = probs[k:]
            else:
                up[:] = probs
                down[:] = probs
        else:
            up[:k] = probs[-k:]
            down[-k:] = probs[:k]
        probs = 0.5 * up + 0.5 * down
    sites = step * (np.arange(-reach, reach + 1, dtype=float))
    eps = _boundary_eps(w, q)
    return float(probs[_count_inside(sites, q, eps)].sum())


def exact_prob(w: WeightedSignSum, q: IntervalQuery) -> float:
    """P[sum + shift in [a, b]] by exhaustive enumeration.

    Up to 40 weights: meet-in-the-middle over all sign vectors.  Beyond
    that, commensurable weight sets go through the integer-lattice dynamic
    program; anything else is out of reach of exact evaluation.
    """
    eps = _boundary_eps(w, q)
    if w.n <= 40:
        left = _half_sums(w.weights[: w.n // 2])
        right = np.sort(_half_sums(w.weights[w.n // 2 :]))
        lo = q.a - q.shift - eps
        hi = q.b - q.shift + eps
        first = np.searchsorted(right, lo - left, side="left")
        last = np.searchsorted(right, hi - left, side="right")
        count = int((last - first).sum())
        return count / 2.0**w.n
    step = lattice_step(w.weights)
    if step is not None:
        return _lattice_prob(w, q, step)
    raise ValueError(
        "exact enumeration handles at most 40 incommensurable weights; "
        "use fourier_bracket or monte_carlo_prob for larger systems"
    )


def char_function(w: WeightedSignSum, t) -> np.ndarray | float:
    """Characteristic function of the sign sum: the product of cos(c_i t)."""
    t = np.asarray(t, dtype=float)
    vals = np.prod(np.cos(np.multiply.outer(w.weights, t)), axis=0)
    return vals if vals.ndim else float(vals)


@dataclass
class BracketResult:
    """Window-pair probability bracket from band-limited inversion."""

    lower: float
    upper: float
    nodes: int
    resolution_ok: bool

    def contains(self, p: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= p <= self.upper + slack


def _band_integral(
    hat, support: float, scaled_weights: np.ndarray, scaled_shift: float, nodes: int
) -> float:
    npts = nodes + 1 - nodes % 2  # composite Simpson wants an odd point count
    grid = np.linspace(-support, support, npts)
    vals = np.empty(npts)
    chunk = max(1, (1 << 22) // max(1, scaled_weights.shape[0]))
    for start in range(0, npts, chunk):
        tb = grid[start : start + chunk]
        prod = np.prod(np.cos(np.multiply.outer(scaled_weights, tb)), axis=0)
        vals[start : start + chunk] = prod * np.cos(tb * scaled_shift)
    return float(simpson(np.asarray(hat(grid)) * vals, x=grid))


def fourier_bracket(
    w: WeightedSignSum,
    q: IntervalQuery,
    pair: WindowPair | None = None,
    nodes: int = 4096,
) -> BracketResult:
    """Probability bracket for the interval query via the window pair.

    The query is rescaled so [a, b] maps onto [-1, 1]; the sandwich
    g <= indicator <= h then gives E[g] <= P <= E[h], each expectation
    evaluated as a finite-band characteristic-function integral by
    composite Simpson quadrature.
    """
    if pair is None:
        pair = default_window_pair()
    r = q.halfwidth
    if r <= 0.0:
        raise ValueError("fourier_bracket needs an interval of positive length")
    scaled = w.weights / r
    shift = (q.shift - q.center) / r
    lower = _band_integral(pair.g_hat, pair.delta_g, scaled, shift, nodes)
    upper = _band_integral(pair.h_hat, pair.delta_h, scaled, shift, nodes)
    return BracketResult(
        lower=lower,
        upper=upper,
        nodes=nodes,
        resolution_ok=lower <= upper + 1e-9,
    )


@dataclass
class MCEstimate:
    estimate: float
    se: float
    samples: int


def monte_carlo_prob(
    w: WeightedSignSum, q: IntervalQuery, samples: int, seed: int
) -> MCEstimate:
    """Plain frequency estimate of the interval probability."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sums = kernels.sign_sum_samples(w.weights, [w.n], samples, seed)[0]
    eps = _boundary_eps(w, q)
    p = float(np.count_nonzero(_count_inside(sums, q, eps))) / samples
    return MCEstimate(estimate=p, se=math.sqrt(p * (1.0 - p) / samples), samples=samples)


def simple_walk_zero_probs(n_max: int) -> np.ndarray:
    """P[unit fair walk sits at 0 after i steps] for i = 0..n_max."""
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    val = 1.0
    for m in range(1, n_max // 2 + 1):
        val *= (2 * m - 1) / (2 * m)
        out[2 * m] = val
    return out


# ---------------------------------------------------------------------------
# Characteristic-function grid verifiers for theorem2-mode systems.
# ---------------------------------------------------------------------------


def _orbit_weights(sys: SkewSystem, x: float, n: int) -> np.ndarray:
    trig = sys.fibers[1].roof.as_trig()
    return np.asarray(trig(sys.rotation.orbit(float(x), n)), dtype=float)


def _cumulative_log_abs_cos(
    weights: np.ndarray, vgrid: np.ndarray, horizons: np.ndarray, chunk: int = 512
) -> tuple[np.ndarray, np.ndarray]:
    """Running sum of log|cos(c_i v)| and count of nonpositive factors.

    Returns (logs, nonpos) of shape (len(horizons), len(vgrid)): row j holds
    the accumulation over i < horizons[j].
    """
    nh = horizons.shape[0]
    logs = np.zeros((nh, vgrid.shape[0]))
    nonpos = np.zeros((nh, vgrid.shape[0]), dtype=np.int64)
    run_log = np.zeros(vgrid.shape[0])
    run_neg = np.zeros(vgrid.shape[0], dtype=np.int64)
    done = 0
    hi_max = int(horizons[-1])
    j = 0
    with np.errstate(divide="ignore"):
        while done < hi_max:
            stop = min(done + chunk, hi_max)
            while j < nh and horizons[j] <= done:
                j += 1
            cos_block = np.cos(np.multiply.outer(weights[done:stop], vgrid))
            run_neg = run_neg + (cos_block <= 0.0).sum(axis=0)
            run_log = run_log + np.log(np.abs(cos_block)).sum(axis=0)
            done = stop
            while j < nh and horizons[j] == done:
                logs[j] = run_log
                nonpos[j] = run_neg
                j += 1
    if j != nh:
        raise ValueError("horizons must be increasing and chunk-aligned reachable")
    return logs, nonpos


def _pad_horizon_chunks(horizons: np.ndarray) -> int:
    """Chunk size that lands exactly on every horizon."""
    g = 0
    for h in horizons:
        g = math.gcd(g, int(h))
    return max(1, min(512, g))


@dataclass
class GaussianBracketReport:
    """Grid check of exp(-a t^2) <= charfn(t/sqrt(n)) <= exp(-b t^2)."""

    a: float
    b: float
    delta: float
    horizons: np.ndarray
    violations: np.ndarray  # (n_x, n_horizons) violation counts
    first_passing_horizon: int | None
    passed: bool


def verify_gaussian_bracket(
    sys: SkewSystem,
    x_grid,
    n_list,
    delta: float,
    grid_points: int = 1000,
) -> GaussianBracketReport:
    """Check the Gaussian sandwich of the sign-sum characteristic function.

    The bounds use the system's exact roof second moment I: a = 4I below,
    b = I/16 above, tested for |t| <= delta*sqrt(n) on a grid of
    `grid_points` frequencies per (x, n).  Violations are data, not errors;
    the report records them per grid point of the (x, n) product.
    """
    setup = theorem2_kernel_setup(sys)
    second = setup["second_moment"]
    a, b = 4.0 * second, second / 16.0
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    horizons = np.asarray(sorted(int(n) for n in n_list), dtype=np.int64)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    vgrid = np.linspace(-delta, delta, grid_points)
    chunk = _pad_horizon_chunks(horizons)
    nv2 = horizons[:, None] * vgrid[None, :] ** 2
    viol = np.zeros((x_grid.shape[0], horizons.shape[0]), dtype=np.int64)
    for ix, x in enumerate(x_grid):
        weights = _orbit_weights(sys, x, int(horizons[-1]))
        logs, nonpos = _cumulative_log_abs_cos(weights, vgrid, horizons, chunk)
        odd = (nonpos % 2).astype(bool)
        lower_bad = odd | (logs < -a * nv2 - 1e-12)
        upper_bad = (~odd) & (logs > -b * nv2 + 1e-12)
        viol[ix] = (lower_bad | upper_bad).sum(axis=1)
    per_horizon_ok = viol.sum(axis=0) == 0
    first_pass = None
    for j in range(horizons.shape[0]):
        if per_horizon_ok[j:].all():
            first_pass = int(horizons[j])
            break
    return GaussianBracketReport(
        a=a,
        b=b,
        delta=delta,
        horizons=horizons,
        violations=viol,
        first_passing_horizon=first_pass,
        passed=bool(per_horizon_ok.all()),
    )


def find_max_gaussian_delta(
    sys: SkewSystem,
    x_grid,
    n_list,
    delta_hi: float = 1.5,
    bisect_iters: int = 24,
    probe_points: int = 2048,
) -> float:
    """Largest delta (by bisection) with a violation-free Gaussian sandwich.

    Probes a fixed fine frequency grid on [0, delta_hi] once per (x, n) and
    bisects the admissible cutoff on it; confirm the winner with
    verify_gaussian_bracket, which uses fresh symmetric grids.
    """
    setup = theorem2_kernel_setup(sys)
    second = setup["second_moment"]
    a, b = 4.0 * second, second / 16.0
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    horizons = np.asarray(sorted(int(n) for n in n_list), dtype=np.int64)
    vgrid = np.linspace(0.0, delta_hi, probe_points)
    chunk = _pad_horizon_chunks(horizons)
    nv2 = horizons[:, None] * vgrid[None, :] ** 2

    bad = np.zeros(vgrid.shape[0], dtype=bool)
    for x in x_grid:
        weights = _orbit_weights(sys, x, int(horizons[-1]))
        logs, nonpos = _cumulative_log_abs_cos(weights, vgrid, horizons, chunk)
        odd = (nonpos % 2).astype(bool)
        lower_bad = odd | (logs < -a * nv2 - 1e-12)
        upper_bad = (~odd) & (logs > -b * nv2 + 1e-12)
        bad |= (lower_bad | upper_bad).any(axis=0)

    def passes(delta: float) -> bool:
        return not bad[vgrid <= delta].any()

    if passes(delta_hi):
        return float(delta_hi)
    lo, hi = 0.0, delta_hi
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)


@dataclass
class DecayBandReport:
    """Per-(x, n) geometric decay rate of |charfn| on a frequency band."""

    delta: float
    big_delta: float
    horizons: np.ndarray
    lambda_hat: np.ndarray  # (n_x, n_horizons)
    lambda_max: np.ndarray  # per horizon, max over x
    lambda_star: float
    first_passing_horizon: int | None
    passed: bool


def verify_decay_band(
    sys: SkewSystem,
    x_grid,
    n_list,
    delta: float = 0.5,
    big_delta: float = 3.0,
    grid_points: int = 1000,
    lambda_star: float = 0.999,
) -> DecayBandReport:
    """Estimate lambda_hat = max over the band of |charfn(t)|^(1/n).

    Exponential decay away from the origin holds when every lambda_hat
    stays below a threshold lambda_star < 1 from some horizon on.
    """
    if not 0.0 < delta < big_delta:
        raise ValueError("need 0 < delta < big_delta")
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    horizons = np.asarray(sorted(int(n) for n in n_list), dtype=np.int64)
    vgrid = np.linspace(delta, big_delta, grid_points)
    chunk = _pad_horizon_chunks(horizons)
    lam = np.zeros((x_grid.shape[0], horizons.shape[0]))
    for ix, x in enumerate(x_grid):
        weights = _orbit_weights(sys, x, int(horizons[-1]))
        logs, _ = _cumulative_log_abs_cos(weights, vgrid, horizons, chunk)
        lam[ix] = np.exp(logs.max(axis=1) / horizons)
    lam_max = lam.max(axis=0)
    first_pass = None
    for j in range(horizons.shape[0]):
        if np.all(lam_max[j:] <= lambda_star):
            first_pass = int(horizons[j])
            break
    return DecayBandReport(
        delta=delta,
        big_delta=big_delta,
        horizons=horizons,
        lambda_hat=lam,
        lambda_max=lam_max,
        lambda_star=lambda_star,
        first_passing_horizon=first_pass,
        passed=first_pass == int(horizons[0]),
    )


@dataclass
class ScanRow:
    x: float
    n: int
    estimate: float
    se: float
    value: float  # sqrt(n) * estimate
    value_se: float
    shift: float


@dataclass
class LltScanResult:
    """sqrt(n)-normalized interval probabilities with moving targets."""

    rows: list
    t_halfwidth: float
    samples: int
    k_hat: float
    n0_estimate: int | None
    stability_factor: float
    stability_min_n: int
    passed: bool
    warning: str | None = None


def _scan_one_x(args) -> list:
    sys_json, x, horizons, t_halfwidth, samples, seed_x = args
    sys = SkewSystem.from_json(sys_json)
    horizons = np.asarray(horizons, dtype=np.int64)
    n_max = int(horizons[-1])
    weights = _orbit_weights(sys, x, n_max)
    drift = np.cumsum(weights)[horizons - 1]
    sums = kernels.sign_sum_samples(weights, horizons, samples, seed_x)
    eps = 1e-12 * max(1.0, t_halfwidth)
    rows = []
    for j, n in enumerate(horizons):
        inside = np.abs(sums[j] + drift[j]) <= t_halfwidth + eps
        p = float(np.count_nonzero(inside)) / samples
        se = math.sqrt(max(p * (1.0 - p), 1e-300) / samples)
        root = math.sqrt(float(n))
        rows.append(
            ScanRow(
                x=float(x),
                n=int(n),
                estimate=p,
                se=se,
                value=root * p,
                value_se=root * se,
                shift=float(drift[j]),
            )
        )
    return rows


def llt_constant_scan(
    sys: SkewSystem,
    x_grid,
    n_list,
    t_halfwidth: float,
    samples: int,
    seed: int,
    stability_factor: float = 2.0,
    stability_min_n: int | None = None,
    sublinearity_ok: bool | None = None,
    threads: int = 1,
) -> LltScanResult:
    """Monte Carlo scan of sqrt(n) * P[sum in [-t, t] - drift_n] over (x, n).

    The moving target is the orbit's own Birkhoff drift.  Summary gates:
    k_hat bounds every value away from 0 and infinity; stability asks each
    base point's max/min ratio over horizons >= stability_min_n to stay
    under stability_factor.  n0_estimate is the first horizon from which
    the stability window holds.
    """
    if t_halfwidth <= 0.0:
        raise ValueError("t_halfwidth must be positive")
    theorem2_kernel_setup(sys)  # validates the mode/base
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    horizons = np.asarray(sorted(int(n) for n in n_list), dtype=np.int64)
    if stability_min_n is None:
        stability_min_n = int(horizons[max(0, horizons.shape[0] // 2)])
    sys_json = sys.to_json()
    tasks = [
        (sys_json, float(x), horizons.tolist(), t_halfwidth, samples, derive_seed(seed, _TAG_SCAN, ix))
        for ix, x in enumerate(x_grid)
    ]
    from .parutil import parallel_map

    per_x = parallel_map(_scan_one_x, tasks, threads)
    rows = [row for chunk in per_x for row in chunk]

    values = np.array([[r.value for r in chunk] for chunk in per_x])  # (n_x, n_h)
    vmax, vmin = float(values.max()), float(values.min())
    k_hat = max(vmax, 1.0 / vmin) if vmin > 0 else math.inf

    n0 = None
    for j in range(horizons.shape[0]):
        tail = values[:, j:]
        ratios = tail.max(axis=1) / tail.min(axis=1)
        if np.all(ratios <= stability_factor):
            n0 = int(horizons[j])
            break
    stable_from_min = n0 is not None and n0 <= stability_min_n
    warning = None
    if sublinearity_ok is None:
        warning = "sublinearity of the drift was not checked for this roof"
    elif not sublinearity_ok:
        warning = "sublinearity check FAILED for this roof; scan values may drift"
    return LltScanResult(
        rows=rows,
        t_halfwidth=t_halfwidth,
        samples=samples,
        k_hat=k_hat,
        n0_estimate=n0,
        stability_factor=stability_factor,
        stability_min_n=int(stability_min_n),
        passed=bool(math.isfinite(k_hat) and stable_from_min),
        warning=warning,
    )


@dataclass
class WeakLltRow:
    n: int
    estimate: float
    se: float
    value: float  # sqrt(2 pi n) * sigma_bar * estimate
    sigma_bar: float
    drift: float


@dataclass
class WeakLltResult:
    rows: list
    target: float
    relative_gap: float
    lattice_flag: bool


def weak_llt_check(
    sys: SkewSystem,
    x: float,
    n_list,
    samples: int,
    seed: int,
    a: float = -1.0,
    b: float = 1.0,
    drift: np.ndarray | str = "birkhoff",
) -> WeakLltResult:
    """Convergence of sqrt(2 pi n) * sigma_bar_n * P[sum in [a,b] - s_n] to b-a.

    sigma_bar_n is the root mean square of the first n weights; the limit
    statement needs this variance normalization to hold for general weight
    sizes, and the output records it explicitly.  Lattice weight sets are
    flagged (the pointwise limit does not apply to them).
    """
    if b < a:
        raise ValueError("need a <= b")
    theorem2_kernel_setup(sys)
    horizons = np.asarray(sorted(int(n) for n in n_list), dtype=np.int64)
    n_max = int(horizons[-1])
    weights = _orbit_weights(sys, float(x), n_max)
    if isinstance(drift, str):
        if drift != "birkhoff":
            raise ValueError("drift must be 'birkhoff' or an array matching n_list")
        drifts = np.cumsum(weights)[horizons - 1]
    else:
        drifts = np.asarray(drift, dtype=float)
        if drifts.shape != horizons.shape:
            raise ValueError("drift array must match n_list")
    sums = kernels.sign_sum_samples(weights, horizons, samples, seed)
    sq_prefix = np.cumsum(weights**2)[horizons - 1]
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    eps = 1e-12 * max(1.0, abs(a), abs(b))
    rows = []
    for j, n in enumerate(horizons):
        inside = np.abs(sums[j] + drifts[j] - center) <= half + eps
        p = float(np.count_nonzero(inside)) / samples
        se = math.sqrt(max(p * (1.0 - p), 1e-300) / samples)
        sigma_bar = math.sqrt(sq_prefix[j] / float(n))
        norm = math.sqrt(2.0 * math.pi * float(n)) * sigma_bar
        rows.append(
            WeakLltRow(
                n=int(n),
                estimate=p,
                se=se,
                value=norm * p,
                sigma_bar=sigma_bar,
                drift=float(drifts[j]),
            )
        )
    target = b - a
    gap = abs(rows[-1].value - target) / target if target > 0 else abs(rows[-1].value)
    lattice = lattice_step(weights) is not None
    return WeakLltResult(rows=rows, target=target, relative_gap=gap, lattice_flag=lattice)
