"""Named, config-driven experiment scenarios.

Each scenario is a pure function of (params, master_seed, threads) returning
tables and PASS/FAIL gates.  Thresholds live in the parameter schema so a
config can tighten or relax them explicitly; every default reproduces the
package's acceptance settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distribution_lab as dl
from . import ergodic_stats as es
from .circle_dynamics import RotationMap, classify_subgroup, cos_roof, golden_mean_angle
from .config import (
    Field,
    any_string,
    horizon_list,
    mesh_list,
    nonneg_number,
    number_pair,
    positive_int,
    positive_number,
    system_json,
)
from .reporting import ScenarioResult
from .sft_core import (
    Cylinder,
    SftSpec,
    bernoulli_spec,
    cylinder_measure,
    density_convergence_demo,
    golden_mean_spec,
    random_admissible_word,
    random_scylinder_pair,
    verify_ratio_preservation,
)
from .skew_product import SkewSystem, make_theorem2, recurrence_demo


def default_system_json() -> dict:
    """Fair Bernoulli base, golden rotation, cosine roof."""
    return make_theorem2(bernoulli_spec(), golden_mean_angle(), cos_roof()).to_json()


def _x_grid(count: int) -> np.ndarray:
    return (np.arange(count) + 0.5) / count


def _system(params) -> SkewSystem:
    return SkewSystem.from_json(params["system"])


# ---------------------------------------------------------------------------


def run_lemma22_ratio(params, seed, threads) -> ScenarioResult:
    """Exact-measure suite: additivity, shift invariance, ratio preservation."""
    specs = {"bernoulli": bernoulli_spec(), "golden_mean": golden_mean_spec()}
    trials = params["pairs"]
    ratio_rows, add_rows = [], []
    ratio_max = add_max = shift_max = 0.0
    for name, spec in specs.items():
        rng = np.random.default_rng([seed, hash(name) & 0xFFFF])
        for trial in range(trials):
            k = int(rng.integers(0, 4))
            a, b = random_scylinder_pair(
                spec, k, int(rng.integers(1, 6)), int(rng.integers(1, 6)), rng
            )
            err = verify_ratio_preservation(spec, a, b, k)
            ratio_max = max(ratio_max, err)
            ratio_rows.append([name, trial, k, err])
        for trial in range(trials):
            word = random_admissible_word(spec, int(rng.integers(1, 8)), rng)
            base = cylinder_measure(spec, Cylinder(word))
            ext = sum(
                cylinder_measure(spec, Cylinder(word + (s,)))
                for s in range(spec.k)
                if spec.P[word[-1], s] > 0
            )
            err = abs(ext - base)
            add_max = max(add_max, err)
            shift_err = abs(
                cylinder_measure(spec, Cylinder(word, start=5)) - base
            )
            shift_max = max(shift_max, shift_err)
            add_rows.append([name, trial, len(word), err, shift_err])
    tol = params["tolerance"]
    return ScenarioResult(
        scenario="lemma22_ratio",
        tables={
            "ratio_preservation": (["spec", "trial", "k", "rel_error"], ratio_rows),
            "additivity": (
                ["spec", "trial", "word_len", "additivity_error", "shift_error"],
                add_rows,
            ),
        },
        gates={
            "ratio_identity": ratio_max <= tol,
            "additivity": add_max <= tol,
            "shift_invariance": shift_max <= tol,
        },
        details={"ratio_max": ratio_max, "additivity_max": add_max, "shift_max": shift_max, "tolerance": tol},
    )


def run_lemma24_density(params, seed, threads) -> ScenarioResult:
    """Shrinking-neighborhood density ratios on cylinder unions."""
    spec = bernoulli_spec()
    k_max = params["k_max"]
    cases = [
        ("own_cylinder", [Cylinder((0,))], (0,) * (k_max + 1), True),
        ("union_inside", [Cylinder((0,)), Cylinder((1,), start=1)], (1, 1) + (0,) * k_max, True),
        ("outside", [Cylinder((0, 0))], (0, 1) + (0,) * k_max, False),
    ]
    rows = []
    gates = {}
    for name, target, point, expect_in in cases:
        res = density_convergence_demo(spec, target, point, k_max)
        for k, ratio in enumerate(res.ratios):
            rows.append([name, k, ratio, res.point_in_target])
        if expect_in:
            gates[f"{name}_reaches_one"] = bool(
                res.point_in_target and abs(res.ratios[-1] - 1.0) <= params["tolerance"]
            )
        else:
            gates[f"{name}_decays"] = bool(
                not res.point_in_target and res.ratios[-1] <= params["tolerance"]
            )
    return ScenarioResult(
        scenario="lemma24_density",
        tables={"ratios": (["case", "k", "ratio", "point_in_target"], rows)},
        gates=gates,
        details={"k_max": k_max},
    )


def run_thm1_subgroup(params, seed, threads) -> ScenarioResult:
    """Subgroup classifier cases and scale equivariance."""
    tol = params["tolerance"]
    cases = [
        ("zeros", [0.0, 0.0, 0.0], "trivial", None),
        ("integers", [-1.0, 1.0, 3.0], "lattice", 1.0),
        ("one_sqrt2", [1.0, math.sqrt(2.0)], "full_line", None),
    ]
    rows = []
    gates = {}
    for name, values, want_kind, want_step in cases:
        got = classify_subgroup(values, tol)
        ok = got.kind == want_kind
        if ok and want_step is not None:
            ok = abs(got.step - want_step) <= 1e-9
        rows.append([name, want_kind, got.kind, got.step if got.step else ""])
        gates[f"case_{name}"] = bool(ok)

    rng = np.random.default_rng(seed)
    equi_ok = True
    for _ in range(params["scalings"]):
        c = float(rng.uniform(0.05, 20.0))
        base = classify_subgroup([-1.0, 1.0, 3.0], tol)
        scaled = classify_subgroup([-c, c, 3 * c], c * tol)
        equi_ok = equi_ok and scaled.kind == base.kind
        if scaled.kind == "lattice":
            equi_ok = equi_ok and abs(scaled.step - c * base.step) <= 1e-9 * c
        dense = classify_subgroup([c, c * math.sqrt(2.0)], c * tol)
        equi_ok = equi_ok and dense.kind == "full_line"
    gates["scale_equivariance"] = bool(equi_ok)

    # The range of the default roof is an interval, so its sampled values
    # generate the full line; the zero roof generates the trivial group.
    grid = _x_grid(params["roof_samples"])
    roof_cls = classify_subgroup(np.asarray(cos_roof()(grid)), tol)
    gates["cos_roof_full_line"] = roof_cls.kind == "full_line"
    rows.append(["cos_roof_sample", "full_line", roof_cls.kind, ""])
    return ScenarioResult(
        scenario="thm1_subgroup",
        tables={"classifier": (["case", "expected", "got", "step"], rows)},
        gates=gates,
        details={"tolerance": tol, "scalings": params["scalings"]},
    )


def run_thm2_rational_ergodicity(params, seed, threads) -> ScenarioResult:
    """Renyi moment ratios and sqrt(n) return-sequence growth."""
    sys = _system(params)
    horizons = params["horizons"]
    stats_list, _ = es.estimate_return_stats_multi(sys, horizons, params["replicates"], seed)
    values = np.array([s.mean_R for s in stats_list])
    exponent, constant = es.fit_growth(
        np.array([s.n for s in stats_list]), values, params["fit_min_n"]
    )
    rows = [
        [s.n, s.mean_R, s.se_mean_R, s.mean_R2, s.se_mean_R2, s.renyi]
        for s in stats_list
    ]
    renyi_max = max(s.renyi for s in stats_list)

    zero_sys = make_theorem2(
        sys.base,
        sys.fibers[1].angle,
        cos_roof(0.0),
    )
    zero_seq = es.return_sequence(
        zero_sys, horizons, params["control_replicates"], seed, fit_min_n=params["fit_min_n"]
    )
    lo, hi = params["exponent_range"]
    gates = {
        "renyi_bounded": renyi_max <= params["renyi_max"],
        "exponent_half": exponent is not None and lo <= exponent <= hi,
        "zero_roof_exponent_one": zero_seq.exponent is not None
        and abs(zero_seq.exponent - 1.0) <= params["control_exponent_tol"],
    }
    return ScenarioResult(
        scenario="thm2_rational_ergodicity",
        tables={
            "return_stats": (
                ["n", "a_n", "se_a_n", "mean_R2", "se_mean_R2", "renyi"],
                rows,
            ),
            "control": (
                ["n", "a_n"],
                [[int(n), v] for n, v in zip(zero_seq.horizons, zero_seq.values)],
            ),
        },
        gates=gates,
        details={
            "exponent": exponent,
            "constant": constant,
            "zero_roof_exponent": zero_seq.exponent,
            "renyi_max_seen": renyi_max,
            "renyi_threshold": params["renyi_max"],
        },
    )


def run_thm4_llt(params, seed, threads) -> ScenarioResult:
    """sqrt(n)-normalized moving-target interval probabilities, plus anchors."""
    sys = _system(params)
    horizons = params["horizons"]
    x_grid = _x_grid(params["x_count"])

    from .circle_dynamics import check_sublinearity

    sub = check_sublinearity(
        sys.fibers[1].roof, sys.rotation, x_grid, horizons, tol=params["sublinearity_tol"]
    )
    scan = dl.llt_constant_scan(
        sys,
        x_grid,
        horizons,
        params["t_halfwidth"],
        params["samples"],
        seed,
        stability_factor=params["stability_factor"],
        stability_min_n=params["stability_min_n"],
        sublinearity_ok=sub.passed,
        threads=threads,
    )
    lo, hi = params["value_range"]
    values = np.array([r.value for r in scan.rows])
    rows = [
        [r.x, r.n, r.estimate, r.se, r.value - 4.0 * r.value_se, r.value + 4.0 * r.value_se, "mc"]
        for r in scan.rows
    ]

    # Fourier spot brackets at the first base point for the smaller horizons.
    spot_ok = True
    trig = sys.fibers[1].roof.as_trig()
    for n in horizons[: params["bracket_spots"]]:
        weights = trig(sys.rotation.orbit(float(x_grid[0]), n))
        drift = float(np.sum(weights))
        w = dl.WeightedSignSum(weights)
        q = dl.IntervalQuery(-params["t_halfwidth"], params["t_halfwidth"], shift=drift)
        br = dl.fourier_bracket(w, q, nodes=params["bracket_nodes"])
        mc_row = next(r for r in scan.rows if r.n == n and r.x == x_grid[0])
        spot_ok = spot_ok and (
            br.lower - 4.0 * mc_row.se <= mc_row.estimate <= br.upper + 4.0 * mc_row.se
        )
        root = math.sqrt(n)
        rows.append(
            [float(x_grid[0]), int(n), mc_row.estimate, mc_row.se, root * br.lower, root * br.upper, "fourier"]
        )

    # Simple-walk anchor: exact lattice evaluation against the Gaussian value.
    anchor_n = params["anchor_n"]
    p0 = dl.exact_prob(
        dl.WeightedSignSum(np.ones(anchor_n)), dl.IntervalQuery(-1.0, 1.0)
    )
    anchor_value = math.sqrt(anchor_n) * p0
    anchor_target = math.sqrt(2.0 / math.pi)
    anchor_ok = abs(anchor_value - anchor_target) <= params["anchor_rel_tol"] * anchor_target
    rows.append(["simple_walk", anchor_n, p0, 0.0, anchor_value, anchor_value, "lattice_dp"])

    gates = {
        "values_in_range": bool(np.all((values >= lo) & (values <= hi))),
        "per_x_stable": scan.passed,
        "anchor_within_tol": bool(anchor_ok),
        "bracket_spots_contain": bool(spot_ok),
        "sublinearity": sub.passed,
    }
    return ScenarioResult(
        scenario="thm4_llt",
        tables={"scan": (["x", "n", "estimate", "se", "lower", "upper", "method"], rows)},
        gates=gates,
        details={
            "k_hat": scan.k_hat,
            "n0_estimate": scan.n0_estimate,
            "anchor_value": anchor_value,
            "anchor_target": anchor_target,
            "warning": scan.warning,
            "value_range": [lo, hi],
        },
    )


def run_lemma51_bracket(params, seed, threads) -> ScenarioResult:
    """Gaussian sandwich of the characteristic function near the origin."""
    sys = _system(params)
    x_grid = _x_grid(params["x_count"])
    horizons = params["horizons"]
    delta = dl.find_max_gaussian_delta(
        sys, x_grid, horizons, delta_hi=params["delta_hi"], probe_points=params["probe_points"]
    )
    report = dl.verify_gaussian_bracket(
        sys, x_grid, horizons, delta, grid_points=params["grid_points"]
    )
    rows = [
        [float(x_grid[ix]), int(n), int(report.violations[ix, jn])]
        for ix in range(x_grid.shape[0])
        for jn, n in enumerate(report.horizons)
    ]
    gates = {
        "delta_exceeds_min": delta > params["delta_min"],
        "zero_violations": report.passed,
    }
    return ScenarioResult(
        scenario="lemma51_bracket",
        tables={"violations": (["x", "n", "violations"], rows)},
        gates=gates,
        details={
            "delta_found": delta,
            "a": report.a,
            "b": report.b,
            "delta_min_required": params["delta_min"],
        },
    )


def run_eq52_band(params, seed, threads) -> ScenarioResult:
    """Exponential decay of the characteristic function on a frequency band."""
    sys = _system(params)
    x_grid = _x_grid(params["x_count"])
    band_lo, band_hi = params["band"]
    report = dl.verify_decay_band(
        sys,
        x_grid,
        params["horizons"],
        delta=band_lo,
        big_delta=band_hi,
        grid_points=params["grid_points"],
        lambda_star=params["lambda_star"],
    )
    rows = [
        [float(x_grid[ix]), int(n), float(report.lambda_hat[ix, jn])]
        for ix in range(x_grid.shape[0])
        for jn, n in enumerate(report.horizons)
    ]
    decreasing = bool(np.all(np.diff(report.lambda_max) < 0.0))
    gates = {
        "lambda_below_star": report.passed,
        "lambda_decreasing": decreasing,
    }
    return ScenarioResult(
        scenario="eq52_band",
        tables={
            "lambda_hat": (["x", "n", "lambda_hat"], rows),
            "lambda_max": (
                ["n", "lambda_max"],
                [[int(n), float(v)] for n, v in zip(report.horizons, report.lambda_max)],
            ),
        },
        gates=gates,
        details={"lambda_star": report.lambda_star, "band": [band_lo, band_hi]},
    )


def run_aaronson_z3(params, seed, threads) -> ScenarioResult:
    """Recurrence contrast: the line walk returns, the 3-d walk escapes."""
    steps, reps = params["steps"], params["replicates"]
    z1 = recurrence_demo("z1", steps, reps, seed)
    z3 = recurrence_demo("z3", steps, reps, seed)
    gates = {
        "z1_recurrent": z1.frequency >= params["z1_min"],
        "z3_transient": z3.frequency <= params["z3_max"],
    }
    return ScenarioResult(
        scenario="aaronson_z3",
        tables={
            "walks": (
                ["walk", "steps", "replicates", "return_frequency"],
                [
                    ["z1", steps, reps, z1.frequency],
                    ["z3", steps, reps, z3.frequency],
                ],
            )
        },
        gates=gates,
        details={"z1": z1.frequency, "z3": z3.frequency},
    )


def run_clt_fclt(params, seed, threads) -> ScenarioResult:
    """Gaussian and Brownian limits of the symbol-gated sums."""
    sys = _system(params)
    clt = es.clt_check(sys, params["n"], params["samples"], seed)
    fclt = es.fclt_check(sys, params["n"], params["paths"], params["mesh"], seed)
    mesh = fclt.mesh
    cov_rows = [
        [float(mesh[i]), float(mesh[j]), float(fclt.covariance[i, j]), float(fclt.target[i, j])]
        for i in range(mesh.shape[0])
        for j in range(mesh.shape[0])
    ]
    gates = {
        "clt_ks": clt.ks_distance <= params["ks_max"],
        "fclt_covariance": fclt.max_error <= params["cov_max"],
    }
    return ScenarioResult(
        scenario="clt_fclt",
        tables={
            "clt": (
                ["n", "samples", "ks_distance", "sigma_eff", "max_drift_ratio"],
                [[clt.n, clt.samples, clt.ks_distance, clt.sigma_eff, clt.max_drift_ratio]],
            ),
            "fclt_covariance": (["s", "u", "covariance", "target"], cov_rows),
        },
        gates=gates,
        details={"ks": clt.ks_distance, "cov_max_error": fclt.max_error},
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioDef:
    fn: callable
    description: str
    params: dict


def _acceptance_horizons(lo: int, hi: int) -> list:
    return [1 << k for k in range(lo, hi + 1)]


REGISTRY: dict[str, ScenarioDef] = {
    "lemma22_ratio": ScenarioDef(
        run_lemma22_ratio,
        "exact cylinder-measure suite: additivity, shift invariance, ratio preservation",
        {
            "pairs": Field(100, positive_int),
            "tolerance": Field(1e-12, positive_number),
        },
    ),
    "lemma24_density": ScenarioDef(
        run_lemma24_density,
        "conditional densities of cylinder unions along shrinking prefixes",
        {
            "k_max": Field(10, positive_int),
            "tolerance": Field(1e-12, positive_number),
        },
    ),
    "thm1_subgroup": ScenarioDef(
        run_thm1_subgroup,
        "finite-sample subgroup classifier: trivial / lattice / full line",
        {
            "tolerance": Field(1e-9, positive_number),
            "scalings": Field(100, positive_int),
            "roof_samples": Field(4096, positive_int),
        },
    ),
    "thm2_rational_ergodicity": ScenarioDef(
        run_thm2_rational_ergodicity,
        "Renyi moment ratio and sqrt(n) growth of the return sequence",
        {
            "system": Field(default_system_json(), system_json),
            "horizons": Field(_acceptance_horizons(8, 14), horizon_list),
            "replicates": Field(10_000, positive_int),
            "control_replicates": Field(1_000, positive_int),
            "fit_min_n": Field(1024, positive_int),
            "renyi_max": Field(4.0, positive_number),
            "exponent_range": Field([0.45, 0.55], number_pair),
            "control_exponent_tol": Field(0.01, positive_number),
        },
    ),
    "thm4_llt": ScenarioDef(
        run_thm4_llt,
        "uniform local limit scan with moving targets plus exact anchors",
        {
            "system": Field(default_system_json(), system_json),
            "horizons": Field(_acceptance_horizons(10, 16), horizon_list),
            "x_count": Field(32, positive_int),
            "samples": Field(100_000, positive_int),
            "t_halfwidth": Field(1.0, positive_number),
            "value_range": Field([0.2, 5.0], number_pair),
            "stability_factor": Field(2.0, positive_number),
            "stability_min_n": Field(4096, positive_int),
            "sublinearity_tol": Field(0.05, positive_number),
            "anchor_n": Field(1 << 14, positive_int),
            "anchor_rel_tol": Field(0.02, positive_number),
            "bracket_spots": Field(2, positive_int),
            "bracket_nodes": Field(1 << 15, positive_int),
        },
    ),
    "lemma51_bracket": ScenarioDef(
        run_lemma51_bracket,
        "Gaussian sandwich of the sign-sum characteristic function",
        {
            "system": Field(default_system_json(), system_json),
            "horizons": Field([256, 1024, 4096], horizon_list),
            "x_count": Field(64, positive_int),
            "grid_points": Field(1000, positive_int),
            "probe_points": Field(2048, positive_int),
            "delta_hi": Field(1.5, positive_number),
            "delta_min": Field(0.1, positive_number),
        },
    ),
    "eq52_band": ScenarioDef(
        run_eq52_band,
        "geometric decay of the characteristic function on a frequency band",
        {
            "system": Field(default_system_json(), system_json),
            "horizons": Field([256, 1024, 4096], horizon_list),
            "x_count": Field(64, positive_int),
            "grid_points": Field(1000, positive_int),
            "band": Field([0.5, 3.0], number_pair),
            "lambda_star": Field(0.999, positive_number),
        },
    ),
    "aaronson_z3": ScenarioDef(
        run_aaronson_z3,
        "recurrence contrast between the line walk and the 3-d lattice walk",
        {
            "steps": Field(20_000, positive_int),
            "replicates": Field(10_000, positive_int),
            "z1_min": Field(0.9, positive_number),
            "z3_max": Field(0.5, positive_number),
        },
    ),
    "clt_fclt": ScenarioDef(
        run_clt_fclt,
        "central and functional central limit checks for the gated sums",
        {
            "system": Field(default_system_json(), system_json),
            "n": Field(4096, positive_int),
            "samples": Field(100_000, positive_int),
            "paths": Field(10_000, positive_int),
            "mesh": Field([0.25, 0.5, 0.75, 1.0], mesh_list),
            "ks_max": Field(0.02, positive_number),
            "cov_max": Field(0.05, positive_number),
        },
    ),
}


def list_scenarios() -> list[tuple[str, str]]:
    """(name, description) pairs in registry order."""
    return [(name, sdef.description) for name, sdef in REGISTRY.items()]
