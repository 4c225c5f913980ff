"""The symbol-driven skew product over a shift of finite type.

One step maps (omega, x, t) to (shifted omega, T_{omega_0} x, t + roof
contribution of symbol omega_0 at x).  Three shapes are supported: a
two-symbol system whose symbol 0 rotates freely and symbol 1 adds a roof
(mode "theorem1"), a two-symbol Bernoulli-driven system with a single
rotation and a roof gated by the symbol (mode "theorem2", the shape all the
distributional statistics run on), and a general per-symbol family.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .circle_dynamics import Angle, RoofFunction, RotationMap, roof_from_json
from .rng import TAG_SIGNS
from .sft_core import SftSpec, SymbolStream

_TWO_PI = 2.0 * math.pi

MODE_THEOREM1 = "theorem1"
MODE_THEOREM2 = "theorem2"
MODE_GENERAL = "general"
_MODES = (MODE_THEOREM1, MODE_THEOREM2, MODE_GENERAL)


@dataclass(frozen=True)
class FiberSpec:
    """Per-symbol fiber map: a rotation plus an optional roof."""

    angle: Angle
    roof: RoofFunction | None = None

    def to_json(self) -> dict:
        return {
            "alpha": self.angle.to_json(),
            "roof": self.roof.to_json() if self.roof is not None else None,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiberSpec":
        roof = data.get("roof")
        return cls(
            angle=Angle.from_json(data["alpha"]),
            roof=roof_from_json(roof) if roof is not None else None,
        )


def _is_bernoulli(spec: SftSpec, atol: float = 1e-12) -> bool:
    return all(np.allclose(spec.P[i], spec.pi, atol=atol) for i in range(spec.k))


@dataclass(frozen=True)
class SkewSystem:
    """Base shift plus one fiber map per symbol."""

    base: SftSpec
    fibers: tuple
    mode: str = MODE_GENERAL

    def __post_init__(self):
        object.__setattr__(self, "fibers", tuple(self.fibers))
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if len(self.fibers) != self.base.k:
            raise ValueError("need exactly one fiber map per symbol")
        if self.mode == MODE_THEOREM2:
            if self.base.k != 2 or not _is_bernoulli(self.base):
                raise ValueError("theorem2 mode needs a 2-symbol Bernoulli base")
            if self.fibers[0].angle.to_json() != self.fibers[1].angle.to_json():
                raise ValueError("theorem2 mode uses a single rotation for both symbols")
            if self.fibers[0].roof is not None:
                raise ValueError("theorem2 mode gates the roof by symbol 1 only")
            if self.fibers[1].roof is None:
                raise ValueError("theorem2 mode needs a roof on symbol 1")
            if self.fibers[1].roof.mean() != 0.0:
                raise ValueError("theorem2 roof must have zero mean")
        if self.mode == MODE_THEOREM1:
            if self.base.k != 2:
                raise ValueError("theorem1 mode needs a 2-symbol base")
            if self.fibers[0].roof is not None or self.fibers[1].roof is None:
                raise ValueError("theorem1 mode: symbol 0 plain, symbol 1 roofed")

    @property
    def rotation(self) -> RotationMap:
        """The shared rotation (theorem1/theorem2 use fiber 1's where needed)."""
        return RotationMap(self.fibers[1].angle if self.base.k > 1 else self.fibers[0].angle)

    @property
    def roof(self) -> RoofFunction:
        if self.mode not in (MODE_THEOREM1, MODE_THEOREM2):
            raise ValueError("no distinguished roof outside theorem1/theorem2 modes")
        return self.fibers[1].roof

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "mode": self.mode,
            "fibers": [f.to_json() for f in self.fibers],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SkewSystem":
        return cls(
            base=SftSpec.from_json(data["base"]),
            fibers=tuple(FiberSpec.from_json(f) for f in data["fibers"]),
            mode=data.get("mode", MODE_GENERAL),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def make_theorem2(base: SftSpec, angle: Angle, roof: RoofFunction) -> SkewSystem:
    return SkewSystem(
        base=base,
        fibers=(FiberSpec(angle=angle), FiberSpec(angle=angle, roof=roof)),
        mode=MODE_THEOREM2,
    )


def make_theorem1(base: SftSpec, angle0: Angle, angle1: Angle, roof: RoofFunction) -> SkewSystem:
    return SkewSystem(
        base=base,
        fibers=(FiberSpec(angle=angle0), FiberSpec(angle=angle1, roof=roof)),
        mode=MODE_THEOREM1,
    )


@dataclass
class SkewState:
    """Current point of an orbit: symbol cursor plus fiber coordinates."""

    stream: SymbolStream
    x: float
    t: float
    step: int = 0


def initial_state(sys: SkewSystem, seed: int, x: float = 0.0, t: float = 0.0) -> SkewState:
    return SkewState(stream=SymbolStream(sys.base, seed), x=float(x), t=float(t))


@dataclass
class Trajectory:
    """Recorded orbit segment with the height decomposition pieces.

    Arrays are indexed by step: symbols/weights/sign_sum/plain_sum have one
    entry per step, x/t include the starting point (length n+1).  sign_sum
    is sum_i c_i * (2 omega_i - 1) and plain_sum is sum_i c_i, where c_i is
    the roof weight along the orbit (NaN-filled outside theorem modes).
    """

    mode: str
    symbols: np.ndarray
    x: np.ndarray
    t: np.ndarray
    weights: np.ndarray
    sign_sum: np.ndarray
    plain_sum: np.ndarray

    @property
    def n(self) -> int:
        return self.symbols.shape[0]

    def write_csv(self, path) -> None:
        """Columns step,symbol,x,t,S,s; step 0 carries the starting point."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "symbol", "x", "t", "S", "s"])
            w.writerow([0, -1, repr(self.x[0]), repr(self.t[0]), repr(0.0), repr(0.0)])
            for i in range(self.n):
                w.writerow(
                    [
                        i + 1,
                        int(self.symbols[i]),
                        repr(float(self.x[i + 1])),
                        repr(float(self.t[i + 1])),
                        repr(float(self.sign_sum[i])),
                        repr(float(self.plain_sum[i])),
                    ]
                )


def iterate(
    sys: SkewSystem, state: SkewState, n: int, record: bool = False
) -> SkewState | tuple[SkewState, Trajectory]:
    """Apply the skew product n times, optionally recording the trajectory."""
    if n < 0:
        raise ValueError("n must be >= 0")
    symbols = state.stream.segment(state.step, n)

    if _single_angle(sys):
        xs = _shared_orbit(sys.fibers[0].angle, state.x, n)
    else:
        alphas = np.array([f.angle.value for f in sys.fibers])
        per_step = alphas[symbols].astype(np.longdouble)
        steps = np.concatenate([np.zeros(1, dtype=np.longdouble), np.cumsum(per_step)])
        xs = np.mod(np.longdouble(state.x) + steps, np.longdouble(1.0)).astype(np.float64)

    if sys.mode in (MODE_THEOREM1, MODE_THEOREM2):
        roof = sys.fibers[1].roof
        weights = np.asarray(roof(xs[:n]), dtype=float) if n else np.zeros(0)
        contribs = np.where(symbols == 1, weights, 0.0)
    else:
        weights = np.full(n, np.nan)
        contribs = np.zeros(n)
        for i in range(n):
            roof = sys.fibers[int(symbols[i])].roof
            if roof is not None:
                contribs[i] = float(roof(float(xs[i])))

    ts = state.t + np.concatenate([[0.0], np.cumsum(contribs)])
    new_state = SkewState(
        stream=state.stream, x=float(xs[n]), t=float(ts[-1]), step=state.step + n
    )
    if not record:
        return new_state

    if sys.mode in (MODE_THEOREM1, MODE_THEOREM2):
        signs = 2.0 * symbols - 1.0
        sign_sum = np.cumsum(weights * signs)
        plain_sum = np.cumsum(weights)
    else:
        sign_sum = np.full(n, np.nan)
        plain_sum = np.full(n, np.nan)
    traj = Trajectory(
        mode=sys.mode,
        symbols=symbols,
        x=xs[: n + 1],
        t=ts,
        weights=weights,
        sign_sum=sign_sum,
        plain_sum=plain_sum,
    )
    return new_state, traj


def _single_angle(sys: SkewSystem) -> bool:
    first = sys.fibers[0].angle.to_json()
    return all(f.angle.to_json() == first for f in sys.fibers)


def _shared_orbit(angle: Angle, x: float, n: int) -> np.ndarray:
    a = angle.value_longdouble()
    idx = np.arange(n + 1, dtype=np.longdouble)
    return np.mod(idx * a + np.longdouble(x), np.longdouble(1.0)).astype(np.float64)


def martingale_decompose(tr: Trajectory) -> tuple[float, float, float]:
    """Split the height displacement into its fair-sign and drift halves.

    Returns (sign_sum, plain_sum, residual) at the trajectory's end, where
    residual = |t_n - t_0 - sign_sum/2 - plain_sum/2| is pure rounding.
    """
    if tr.mode != MODE_THEOREM2:
        raise ValueError("martingale decomposition applies to theorem2-mode trajectories")
    if tr.n == 0:
        return 0.0, 0.0, 0.0
    big_s = float(tr.sign_sum[-1])
    small_s = float(tr.plain_sum[-1])
    residual = abs(float(tr.t[-1]) - float(tr.t[0]) - 0.5 * big_s - 0.5 * small_s)
    return big_s, small_s, residual


def return_function(sys: SkewSystem, state: SkewState, n: int) -> int:
    """Number of the first n steps whose height lands in [-1/2, 1/2].

    The starting height must itself lie in the window (the return set is
    the full base times the unit height band).
    """
    if sys.mode != MODE_THEOREM2:
        raise ValueError("return counting is defined for theorem2-mode systems")
    if not -0.5 <= state.t <= 0.5:
        raise ValueError("starting height must lie in [-1/2, 1/2]")
    _, tr = iterate(sys, state, n, record=True)
    return int(np.count_nonzero(np.abs(tr.t[1:]) <= 0.5))


def zero_mean_condition(sys: SkewSystem) -> float:
    """Symbol-weighted mean of the roof family; nonzero signals drift."""
    total = 0.0
    for i, fiber in enumerate(sys.fibers):
        if fiber.roof is not None:
            total += float(sys.base.pi[i]) * fiber.roof.mean()
    return total


@dataclass
class RecurrenceResult:
    """Fraction of replicate walks revisiting the origin within the horizon."""

    walk: str
    steps: int
    replicates: int
    frequency: float


def recurrence_demo(walk: str, steps: int, replicates: int, seed: int) -> RecurrenceResult:
    """Monte Carlo return-to-origin frequency for the sign-driven walks.

    "z1": one-dimensional fair walk (recurrent).  "z3": each step moves a
    uniformly chosen coordinate of a 3-d lattice position by a fair sign
    (transient).
    """
    if steps < 1 or replicates < 1:
        raise ValueError("steps and replicates must be >= 1")
    dims = {"z1": 1, "z3": 3}
    if walk not in dims:
        raise ValueError(f"walk must be 'z1' or 'z3', got {walk!r}")
    states = kernels.derive_states(seed, TAG_SIGNS, replicates)
    flags = kernels.walk_return_within(dims[walk], steps, states)
    return RecurrenceResult(
        walk=walk,
        steps=steps,
        replicates=replicates,
        frequency=float(flags.sum()) / replicates,
    )


def theorem2_kernel_setup(sys: SkewSystem) -> dict:
    """Shared preparation for the fair-sign Monte Carlo kernels.

    Returns the trig expansion of the roof, the per-harmonic rotation
    constants and the exact second moment.  Requires a fair Bernoulli base:
    the sign decomposition the samplers rely on identifies symbol draws
    with fair coin flips.
    """
    if sys.mode != MODE_THEOREM2:
        raise ValueError("kernel statistics require a theorem2-mode system")
    if not np.allclose(sys.base.pi, 0.5, atol=1e-12):
        raise ValueError("kernel statistics require the fair Bernoulli base pi=(1/2,1/2)")
    trig = sys.fibers[1].roof.as_trig()
    if trig.offset != 0.0:
        raise ValueError("roof must have zero mean")
    k = np.arange(1, trig.degree + 1)
    alpha = sys.fibers[1].angle.value
    return {
        "coef_a": trig.a,
        "coef_b": trig.b,
        "rot_c": np.cos(_TWO_PI * k * alpha),
        "rot_s": np.sin(_TWO_PI * k * alpha),
        "degree": trig.degree,
        "second_moment": trig.second_moment(),
        "alpha": alpha,
        "angle": sys.fibers[1].angle,
        "sup_bound": trig.sup_bound(),
    }


def harmonic_start(x0: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """cos/sin(2 pi k x0) matrices feeding the kernel recurrences."""
    k = np.arange(1, degree + 1)
    phase = _TWO_PI * np.multiply.outer(np.asarray(x0, dtype=float), k)
    return np.cos(phase), np.sin(phase)
