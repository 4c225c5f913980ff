"""Shifts of finite type with Markov measures: exact cylinder arithmetic.

Words are tuples of symbols in range(k).  A plain cylinder pins a
consecutive block of coordinates; one-sided cylinders extend an anchor
letter backward (SCylinder) or forward (UCylinder).  Measures follow the
product formulas exactly: an initial-distribution weight for the leftmost
pinned letter times one transition probability per adjacent pair (one-sided
u-measures carry no initial weight).
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass

import numpy as np

from .rng import derive_seed, next64, uniform01

_ATOL = 1e-12
_TAG_SYMBOLS = 0x54


class InadmissibleWordError(ValueError):
    """A word contains a transition with zero probability."""

    def __init__(self, i: int, j: int):
        super().__init__(f"inadmissible transition {i} -> {j} (zero probability)")
        self.pair = (i, j)


def stationary_vector(P: np.ndarray, tol: float = 1e-14, max_iter: int = 100_000) -> np.ndarray:
    """Stationary probability vector of a row-stochastic matrix.

    Power iteration until the l1 change drops below tol.
    """
    P = np.asarray(P, dtype=float)
    k = P.shape[0]
    pi = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        nxt = pi @ P
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    return pi / pi.sum()


def _strongly_connected(P: np.ndarray) -> bool:
    adj = np.asarray(P) > 0.0
    k = adj.shape[0]

    def reach(mat: np.ndarray) -> bool:
        seen = np.zeros(k, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in np.nonzero(mat[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    frontier.append(int(j))
        return bool(seen.all())

    return reach(adj) and reach(adj.T)


@dataclass(frozen=True)
class SftSpec:
    """Alphabet size, transition matrix and stationary initial vector."""

    k: int
    P: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)
        if self.k < 2:
            raise ValueError("alphabet size must be >= 2")
        if P.shape != (self.k, self.k):
            raise ValueError(f"P must be {self.k}x{self.k}")
        if pi.shape != (self.k,):
            raise ValueError(f"pi must have length {self.k}")
        if np.any(P < 0.0) or np.any(P > 1.0):
            raise ValueError("transition probabilities must lie in [0,1]")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > _ATOL):
            raise ValueError("every row of P must sum to 1 within 1e-12")
        if abs(pi.sum() - 1.0) > _ATOL:
            raise ValueError("pi must sum to 1 within 1e-12")
        if np.any(np.abs(pi @ P - pi) > _ATOL):
            raise ValueError(
                "pi must be stationary for P within 1e-12 "
                "(use stationary_vector(P) to compute one)"
            )
        if not _strongly_connected(P):
            raise ValueError("transition graph must be strongly connected")

    def check_word(self, word) -> tuple[int, ...]:
        w = tuple(int(s) for s in word)
        if len(w) == 0:
            raise ValueError("word must be non-empty")
        for s in w:
            if not 0 <= s < self.k:
                raise ValueError(f"symbol {s} outside alphabet of size {self.k}")
        for i, j in zip(w[:-1], w[1:]):
            if self.P[i, j] <= 0.0:
                raise InadmissibleWordError(i, j)
        return w

    def to_json(self) -> dict:
        return {"k": self.k, "P": self.P.tolist(), "pi": self.pi.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "SftSpec":
        return cls(k=int(data["k"]), P=np.asarray(data["P"]), pi=np.asarray(data["pi"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def bernoulli_spec(p: float = 0.5) -> SftSpec:
    """Two-symbol Bernoulli shift: symbol 1 drawn with probability p."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    row = [1.0 - p, p]
    return SftSpec(k=2, P=np.array([row, row]), pi=np.array(row))


def golden_mean_spec() -> SftSpec:
    """Two-symbol shift forbidding the pair (1,1)."""
    return SftSpec(
        k=2,
        P=np.array([[0.5, 0.5], [1.0, 0.0]]),
        pi=np.array([2.0 / 3.0, 1.0 / 3.0]),
    )


@dataclass(frozen=True)
class Cylinder:
    """Pin coordinates start..start+len(word)-1 to the given word."""

    word: tuple
    start: int = 0

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(s) for s in self.word))

    @property
    def end(self) -> int:
        return self.start + len(self.word)


@dataclass(frozen=True)
class SCylinder:
    """Backward extension of an anchor: word runs toward the anchor letter.

    word[-1] is the anchor letter; length (number of pinned coordinates
    before the anchor) is len(word) - 1.
    """

    word: tuple
    anchor: int = 0

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(s) for s in self.word))

    @property
    def length(self) -> int:
        return len(self.word) - 1


@dataclass(frozen=True)
class UCylinder:
    """Forward extension of an anchor: word starts at the anchor letter."""

    word: tuple
    anchor: int = 0

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(s) for s in self.word))

    @property
    def length(self) -> int:
        return len(self.word) - 1


def _word_log_measure(spec: SftSpec, word: tuple, with_initial: bool) -> float:
    total = math.log(spec.pi[word[0]]) if with_initial else 0.0
    for i, j in zip(word[:-1], word[1:]):
        total += math.log(spec.P[i, j])
    return total


def _word_measure(spec: SftSpec, word: tuple, with_initial: bool) -> float:
    # Plain products are exact enough for short words; long words go through
    # log accumulation so intermediate values cannot underflow.
    if len(word) > 64:
        return math.exp(_word_log_measure(spec, word, with_initial))
    total = spec.pi[word[0]] if with_initial else 1.0
    for i, j in zip(word[:-1], word[1:]):
        total *= spec.P[i, j]
    return float(total)


def cylinder_measure(spec: SftSpec, c: Cylinder) -> float:
    """Markov measure of a cylinder: initial weight times transition product."""
    word = spec.check_word(c.word)
    return _word_measure(spec, word, with_initial=True)


def log_cylinder_measure(spec: SftSpec, c: Cylinder) -> float:
    """log of cylinder_measure; safe for words of any length."""
    word = spec.check_word(c.word)
    return _word_log_measure(spec, word, with_initial=True)


def side_cylinder_measure(spec: SftSpec, c: SCylinder | UCylinder) -> float:
    """One-sided measure: s-cylinders carry the initial weight, u-cylinders don't."""
    word = spec.check_word(c.word)
    if isinstance(c, SCylinder):
        return _word_measure(spec, word, with_initial=True)
    if isinstance(c, UCylinder):
        if len(word) == 1:
            return 1.0
        return _word_measure(spec, word, with_initial=False)
    raise TypeError(f"expected SCylinder or UCylinder, got {type(c).__name__}")


def _shifted(c: SCylinder | UCylinder, k: int) -> SCylinder | UCylinder:
    """Apply the shift that removes the k innermost pinned coordinates."""
    if isinstance(c, SCylinder):
        return SCylinder(word=c.word[: len(c.word) - k], anchor=c.anchor)
    return UCylinder(word=c.word[k:], anchor=c.anchor)


def verify_ratio_preservation(
    spec: SftSpec, A: SCylinder | UCylinder, B: SCylinder | UCylinder, k: int
) -> float:
    """Relative error of the shift-invariance of one-sided measure ratios.

    A and B must be one-sided cylinders of the same side, both contained in a
    common one-sided cylinder of length k (their k+1 innermost letters
    agree).  Returns |(ratio after shifting away those k letters) /
    (ratio before) - 1|; the identity is exact, so the result is pure
    floating-point noise.
    """
    if type(A) is not type(B):
        raise ValueError("A and B must be cylinders of the same side")
    if k < 0:
        raise ValueError("k must be >= 0")
    if A.length < k or B.length < k:
        raise ValueError("A and B must have length >= k")
    if isinstance(A, SCylinder):
        shared_a, shared_b = A.word[-(k + 1) :], B.word[-(k + 1) :]
    else:
        shared_a, shared_b = A.word[: k + 1], B.word[: k + 1]
    if shared_a != shared_b:
        raise ValueError(
            "A and B are not contained in a common one-sided cylinder of length k"
        )
    before = side_cylinder_measure(spec, A) / side_cylinder_measure(spec, B)
    after = side_cylinder_measure(spec, _shifted(A, k)) / side_cylinder_measure(
        spec, _shifted(B, k)
    )
    return abs(after / before - 1.0)


class SymbolStream:
    """Deterministic lazy realization of the forward symbol sequence.

    The same (spec, seed) always reproduces the same prefix; the first
    symbol follows pi and transitions follow P.
    """

    def __init__(self, spec: SftSpec, seed: int):
        self.spec = spec
        self.seed = int(seed)
        self._state = derive_seed(self.seed, _TAG_SYMBOLS, 0)
        self._buffer: list[int] = []
        self._cum_pi = list(np.cumsum(spec.pi))
        self._cum_rows = [list(row) for row in np.cumsum(spec.P, axis=1)]

    def _draw(self, cum: list) -> int:
        self._state, word = next64(self._state)
        u = uniform01(word)
        return bisect.bisect_right(cum, u)

    def take(self, n: int) -> np.ndarray:
        """First n symbols of the stream (extends the buffer as needed)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        while len(self._buffer) < n:
            if not self._buffer:
                sym = self._draw(self._cum_pi)
            else:
                sym = self._draw(self._cum_rows[self._buffer[-1]])
            self._buffer.append(min(sym, self.spec.k - 1))
        return np.array(self._buffer[:n], dtype=np.int64)

    def segment(self, start: int, count: int) -> np.ndarray:
        """Symbols start..start+count-1."""
        return self.take(start + count)[start:]


def sample_symbols(stream: SymbolStream, n: int) -> np.ndarray:
    """Draw the first n symbols of the stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return stream.take(n)


@dataclass
class DensityDemoResult:
    """Ratios mu(target & pinned prefix)/mu(pinned prefix) for k = 0..k_max."""

    ratios: np.ndarray
    point_in_target: bool
    k_max: int


def _in_target(word: tuple, target: list[Cylinder]) -> bool:
    for c in target:
        if word[c.start : c.end] == c.word:
            return True
    return False


def density_convergence_demo(
    spec: SftSpec,
    target: list[Cylinder],
    point,
    k_max: int,
    max_states: int = 1 << 22,
) -> DensityDemoResult:
    """Conditional density of a cylinder union along shrinking neighborhoods.

    Pins the first k+1 coordinates to the point's prefix and computes the
    exact conditional measure of the target for k = 0..k_max.  For a point
    inside the target the ratio reaches exactly 1 once k covers every
    constrained coordinate; for a point outside it decays to 0 (flagged via
    point_in_target, not an error).
    """
    point = spec.check_word(point)
    if not target:
        raise ValueError("target must be a non-empty union of cylinders")
    for c in target:
        if c.start < 0:
            raise ValueError("target cylinders must pin non-negative coordinates")
        spec.check_word(c.word)
    horizon = max(max(c.end for c in target), k_max + 1)
    if len(point) < horizon:
        raise ValueError(f"point prefix must pin at least {horizon} coordinates")
    if spec.k**horizon > max_states:
        raise ValueError("enumeration window too large; shrink target or k_max")

    words = [(s,) for s in range(spec.k)]
    for _ in range(horizon - 1):
        words = [w + (s,) for w in words for s in range(spec.k) if spec.P[w[-1], s] > 0]

    measures = np.array([_word_measure(spec, w, with_initial=True) for w in words])
    hit = np.array([_in_target(w, target) for w in words])
    if measures[hit].sum() <= 0.0:
        raise ValueError("target has zero measure")

    ratios = np.empty(k_max + 1)
    for k in range(k_max + 1):
        match = np.array([w[: k + 1] == point[: k + 1] for w in words])
        denom = measures[match].sum()
        ratios[k] = measures[match & hit].sum() / denom
    return DensityDemoResult(
        ratios=ratios, point_in_target=_in_target(point, target), k_max=k_max
    )


def random_admissible_word(spec: SftSpec, length: int, rng: np.random.Generator) -> tuple:
    """Uniformly-seeded admissible word of the given length (for tests/demos)."""
    first = int(rng.integers(spec.k))
    word = [first]
    for _ in range(length - 1):
        options = np.nonzero(spec.P[word[-1]] > 0)[0]
        word.append(int(rng.choice(options)))
    return tuple(word)


def random_scylinder_pair(
    spec: SftSpec, k: int, extra_a: int, extra_b: int, rng: np.random.Generator
) -> tuple[SCylinder, SCylinder]:
    """Two s-cylinders sharing their k+1 innermost letters."""

    def extend_left(word: list[int], count: int) -> list[int]:
        for _ in range(count):
            options = np.nonzero(spec.P[:, word[0]] > 0)[0]
            word.insert(0, int(rng.choice(options)))
        return word

    shared = extend_left([int(rng.integers(spec.k))], k)
    wa = extend_left(list(shared), extra_a)
    wb = extend_left(list(shared), extra_b)
    return SCylinder(tuple(wa)), SCylinder(tuple(wb))
