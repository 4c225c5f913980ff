"""Band-limited window pairs sandwiching the unit-interval indicator.

The default pair follows the classical Fejer-style construction: the
minorant is built from powers of the transform of a box of half-width 4,
the majorant is the squared transform of the unit box.  Both transforms
are continuous with compact support, which is what turns expectation
bounds into finite-band characteristic-function integrals:

    E[g(Y)] = integral of g_hat(t) * E[exp(itY)] dt over |t| <= support.

Transform convention: g(y) = integral g_hat(t) exp(ity) dt, so g_hat is
(1/2pi) times the forward integral transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _sinc_scaled(y: np.ndarray, scale: float) -> np.ndarray:
    """sin(scale*y)/y with the y->0 limit filled in."""
    y = np.asarray(y, dtype=float)
    out = np.full_like(y, float(scale), dtype=float)
    nz = y != 0.0
    out[nz] = np.sin(scale * y[nz]) / y[nz]
    return out


def minorant(y) -> np.ndarray:
    """g <= indicator of [-1,1], with g(0) = 1 and band-limited transform."""
    u = 0.5 * _sinc_scaled(np.asarray(y, dtype=float), 4.0)
    return (u**4 - u**2) / 12.0


def majorant(y) -> np.ndarray:
    """h >= indicator of [-1,1]: the squared transform of the unit box."""
    return _sinc_scaled(np.asarray(y, dtype=float), 1.0) ** 2 * 4.0


def _triangle(u: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(u))


def _bspline3(u: np.ndarray) -> np.ndarray:
    """Cubic B-spline on [-2,2] (two-fold convolution of the unit triangle)."""
    a = np.abs(np.asarray(u, dtype=float))
    out = np.zeros_like(a)
    inner = a <= 1.0
    outer = (a > 1.0) & (a < 2.0)
    out[inner] = (4.0 - 6.0 * a[inner] ** 2 + 3.0 * a[inner] ** 3) / 6.0
    out[outer] = (2.0 - a[outer]) ** 3 / 6.0
    return out


def minorant_hat(t) -> np.ndarray:
    """Transform of the minorant: supported on [-16, 16], positive at 0."""
    t = np.asarray(t, dtype=float)
    return (2.0 * _bspline3(t / 8.0) - 0.5 * _triangle(t / 8.0)) / 12.0


def majorant_hat(t) -> np.ndarray:
    """Transform of the majorant: the triangle of height 2 on [-2, 2]."""
    t = np.asarray(t, dtype=float)
    return np.maximum(0.0, 2.0 - np.abs(t))


MINORANT_SUPPORT = 16.0
MAJORANT_SUPPORT = 2.0


@dataclass(frozen=True)
class WindowPair:
    """A minorant/majorant pair for the indicator of [-1,1].

    g and h sandwich the indicator pointwise, their transforms are
    continuous with support in [-delta_g, delta_g] / [-delta_h, delta_h],
    and g_hat(0) > 0.  Construction validates the sandwich on a dense grid.
    """

    g: callable
    h: callable
    g_hat: callable
    h_hat: callable
    delta_g: float
    delta_h: float

    def __post_init__(self):
        grid = np.linspace(-10.0, 10.0, 10_000)
        indicator = (np.abs(grid) <= 1.0).astype(float)
        gv = np.asarray(self.g(grid))
        hv = np.asarray(self.h(grid))
        if np.any(gv > indicator + 1e-12):
            raise ValueError("window minorant exceeds the unit indicator")
        if np.any(hv < indicator - 1e-12):
            raise ValueError("window majorant falls below the unit indicator")
        if not float(self.g_hat(0.0)) > 0.0:
            raise ValueError("minorant transform must be positive at the origin")

    @property
    def support(self) -> float:
        return max(self.delta_g, self.delta_h)


def default_window_pair() -> WindowPair:
    return WindowPair(
        g=minorant,
        h=majorant,
        g_hat=minorant_hat,
        h_hat=majorant_hat,
        delta_g=MINORANT_SUPPORT,
        delta_h=MAJORANT_SUPPORT,
    )
