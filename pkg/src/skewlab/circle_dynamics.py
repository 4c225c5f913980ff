"""Circle rotations, zero-mean roof functions and their Birkhoff sums.

Rotation numbers are carried either as quadratic surds (p + q*sqrt(D))/r,
which certifies irrationality and allows extended-precision orbit
evaluation, or as raw floats with a warning flag.  Roofs are trigonometric
polynomials (structurally zero-mean unless an explicit offset is set) or
coboundaries psi(x + alpha) - psi(x) of such polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_TWO_PI = 2.0 * math.pi


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


@dataclass(frozen=True)
class Angle:
    """A rotation number, either an exact quadratic surd or a raw float.

    Surd form: (p + q*sqrt(D)) / r with integer p, q, D, r.  Surds with
    q != 0 and non-square D > 1 are certifiably irrational.
    """

    p: int = 0
    q: int = 0
    D: int = 0
    r: int = 1
    raw: float | None = None

    def __post_init__(self):
        if self.raw is None:
            if self.r == 0:
                raise ValueError("surd denominator r must be nonzero")
            if self.D < 0:
                raise ValueError("surd radicand D must be >= 0")

    @classmethod
    def surd(cls, p: int, q: int, D: int, r: int) -> "Angle":
        return cls(p=p, q=q, D=D, r=r)

    @classmethod
    def from_float(cls, value: float) -> "Angle":
        return cls(raw=float(value))

    @property
    def certified_irrational(self) -> bool:
        return self.raw is None and self.q != 0 and self.D > 1 and not _is_square(self.D)

    def value_longdouble(self) -> np.longdouble:
        if self.raw is not None:
            return np.longdouble(self.raw)
        v = (np.longdouble(self.p) + np.longdouble(self.q) * np.sqrt(np.longdouble(self.D))) / np.longdouble(self.r)
        return np.mod(v, np.longdouble(1.0))

    @property
    def value(self) -> float:
        """The rotation number reduced to [0, 1) as a double."""
        return float(self.value_longdouble())

    def to_json(self) -> dict:
        if self.raw is not None:
            return {"float": self.raw}
        return {"p": self.p, "q": self.q, "D": self.D, "r": self.r}

    @classmethod
    def from_json(cls, data: dict) -> "Angle":
        if "float" in data:
            return cls.from_float(data["float"])
        return cls.surd(int(data["p"]), int(data["q"]), int(data["D"]), int(data["r"]))


def golden_mean_angle() -> Angle:
    """(sqrt(5) - 1) / 2, the golden rotation number."""
    return Angle.surd(-1, 1, 5, 2)


@dataclass(frozen=True)
class RotationMap:
    """x -> frac(x + alpha) on the unit circle."""

    angle: Angle

    @property
    def alpha(self) -> float:
        return self.angle.value

    def apply(self, x: float) -> float:
        return float(np.mod(x + self.alpha, 1.0))

    def iterate(self, x: float, n: int) -> float:
        """n-fold application, computed as frac(x + frac(n*alpha)).

        The multiple of alpha is reduced in extended precision so the result
        stays within ~1e-13 of the exact rotation for n up to 1e6.
        """
        a = self.angle.value_longdouble()
        step = np.mod(np.longdouble(n) * a, np.longdouble(1.0))
        return float(np.mod(np.longdouble(x) + step, np.longdouble(1.0)))

    def orbit(self, x: float, n: int) -> np.ndarray:
        """[x, Tx, ..., T^(n-1) x] as float64, evaluated by direct indexing."""
        a = self.angle.value_longdouble()
        idx = np.arange(n, dtype=np.longdouble)
        pts = np.mod(idx * a + np.longdouble(x), np.longdouble(1.0))
        return pts.astype(np.float64)


@dataclass(frozen=True)
class TrigPoly:
    """Finite trigonometric polynomial sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x).

    No constant term unless `offset` is set explicitly, so the mean is zero
    by construction; a nonzero offset exists only to build drifting
    configurations on purpose.
    """

    a: np.ndarray
    b: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("a and b must be 1-d arrays of equal length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def degree(self) -> int:
        return self.a.shape[0]

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        k = np.arange(1, self.degree + 1)
        phase = _TWO_PI * np.multiply.outer(x, k)
        vals = np.cos(phase) @ self.a + np.sin(phase) @ self.b + self.offset
        return vals if vals.ndim else float(vals)

    def mean(self) -> float:
        return self.offset

    def second_moment(self) -> float:
        """Exact integral of phi^2 over the circle."""
        return 0.5 * float(self.a @ self.a + self.b @ self.b) + self.offset**2

    def sup_bound(self) -> float:
        return float(np.abs(self.a).sum() + np.abs(self.b).sum() + abs(self.offset))

    def as_trig(self, _angle: Angle | None = None) -> "TrigPoly":
        return self

    def to_json(self) -> dict:
        out = {"type": "trig", "a": self.a.tolist(), "b": self.b.tolist()}
        if self.offset:
            out["offset"] = self.offset
        return out


@dataclass(frozen=True)
class Coboundary:
    """Roof of the form psi(x + alpha) - psi(x); Birkhoff sums telescope."""

    psi: TrigPoly
    angle: Angle

    def __post_init__(self):
        if self.psi.offset:
            raise ValueError("coboundary generator must have no constant term")

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        shifted = np.mod(x + self.angle.value, 1.0)
        out = self.psi(shifted) - self.psi(x)
        return out if np.ndim(out) else float(out)

    def mean(self) -> float:
        return 0.0

    def as_trig(self, _angle: Angle | None = None) -> TrigPoly:
        """Expand psi(x+alpha) - psi(x) into an explicit trig polynomial."""
        k = np.arange(1, self.psi.degree + 1)
        theta = _TWO_PI * k * self.angle.value
        ct, st = np.cos(theta), np.sin(theta)
        a = self.psi.a * (ct - 1.0) + self.psi.b * st
        b = self.psi.b * (ct - 1.0) - self.psi.a * st
        return TrigPoly(a=a, b=b)

    def second_moment(self) -> float:
        return self.as_trig().second_moment()

    def sup_bound(self) -> float:
        return 2.0 * self.psi.sup_bound()

    def to_json(self) -> dict:
        return {
            "type": "coboundary",
            "psi": self.psi.to_json(),
            "alpha": self.angle.to_json(),
        }


RoofFunction = TrigPoly | Coboundary


def roof_from_json(data: dict) -> RoofFunction:
    kind = data.get("type")
    if kind == "trig":
        return TrigPoly(
            a=np.asarray(data["a"], dtype=float),
            b=np.asarray(data["b"], dtype=float),
            offset=float(data.get("offset", 0.0)),
        )
    if kind == "coboundary":
        psi = roof_from_json(data["psi"])
        if not isinstance(psi, TrigPoly):
            raise ValueError("coboundary generator must be a trig polynomial")
        return Coboundary(psi=psi, angle=Angle.from_json(data["alpha"]))
    raise ValueError(f"unknown roof type: {kind!r}")


def cos_roof(amplitude: float = 1.0) -> TrigPoly:
    """amplitude * cos(2 pi x), the workhorse roof."""
    return TrigPoly(a=np.array([amplitude]), b=np.array([0.0]))


@dataclass
class BirkhoffRecord:
    """A Birkhoff sum with its base point, horizon and optional weight cache."""

    x: float
    n: int
    s: float
    c: np.ndarray | None = None


def birkhoff_sum(
    roof: RoofFunction, T: RotationMap, x: float, n: int, keep_weights: bool = False
) -> BirkhoffRecord:
    """Sum of roof values along the first n rotation orbit points."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return BirkhoffRecord(x=x, n=0, s=0.0, c=np.array([]) if keep_weights else None)
    weights = np.asarray(roof(T.orbit(x, n)), dtype=float)
    return BirkhoffRecord(x=x, n=n, s=float(weights.sum()), c=weights if keep_weights else None)


@dataclass
class SublinearityReport:
    """max_x |s_n^x| / sqrt(n) per horizon, with a pass flag."""

    horizons: np.ndarray
    max_ratios: np.ndarray
    tol: float
    passed: bool


def check_sublinearity(
    roof: RoofFunction, T: RotationMap, x_grid, n_list, tol: float = 0.05
) -> SublinearityReport:
    """Table of max_x |Birkhoff sum| / sqrt(n) over increasing horizons.

    Passes when the largest horizon's ratio has dropped below tol and does
    not exceed the first horizon's (net decrease).
    """
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    horizons = np.asarray(sorted(int(n) for n in n_list), dtype=np.int64)
    if x_grid.size == 0 or horizons.size == 0:
        raise ValueError("x_grid and n_list must be non-empty")
    if horizons[0] < 1:
        raise ValueError("horizons must be >= 1")
    n_max = int(horizons[-1])
    ratios = np.zeros(horizons.shape[0])
    for x in x_grid:
        sums = np.cumsum(np.asarray(roof(T.orbit(float(x), n_max)), dtype=float))
        ratios = np.maximum(ratios, np.abs(sums[horizons - 1]) / np.sqrt(horizons))
    passed = bool(ratios[-1] <= tol and ratios[-1] <= ratios[0] + 1e-15)
    return SublinearityReport(horizons=horizons, max_ratios=ratios, tol=tol, passed=passed)


@dataclass(frozen=True)
class SubgroupClass:
    """Outcome of the finite-sample subgroup dichotomy."""

    kind: str  # "trivial" | "lattice" | "full_line"
    step: float | None = None

    def __str__(self) -> str:
        if self.kind == "lattice":
            return f"Lattice({self.step:.12g})"
        return {"trivial": "Trivial", "full_line": "FullLine"}[self.kind]


def _real_gcd(a: float, b: float, tol: float) -> tuple[float, bool]:
    """Euclidean descent cut off at tol; returns (candidate, terminated).

    A genuine common divisor makes the remainder collapse far below the
    divisor in the final step; a gradual descent through tol signals
    incommensurability.  `terminated` records the abrupt-collapse case.
    """
    a, b = abs(a), abs(b)
    if a < b:
        a, b = b, a
    while b > tol:
        a, b = b, math.fmod(a, b)
    return a, b <= 1e-3 * a


def classify_subgroup(values, tol: float) -> SubgroupClass:
    """Decide whether a finite sample generates {0}, a lattice d*Z, or is dense.

    Runs the Euclidean algorithm on the absolute values with cutoff tol.
    The lattice verdict needs three things: the descent terminates abruptly
    (the final remainder is negligible against the candidate step), the
    candidate step exceeds tol, and every sample sits within tol of its
    multiple.  Otherwise the generated closed subgroup is the whole line.
    The decision is scale-equivariant: scaling values and tol together
    scales the step.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    vals = np.abs(np.asarray(values, dtype=float).ravel())
    if vals.size == 0:
        raise ValueError("sample must be non-empty")
    vals = vals[vals > tol]
    if vals.size == 0:
        return SubgroupClass(kind="trivial")
    g = float(vals[0])
    for v in vals[1:]:
        g, terminated = _real_gcd(g, float(v), tol)
        if not terminated or g <= tol:
            return SubgroupClass(kind="full_line")
    offsets = np.abs(vals - g * np.round(vals / g))
    if np.all(offsets <= tol):
        return SubgroupClass(kind="lattice", step=g)
    return SubgroupClass(kind="full_line")
