"""Closed-form moment integrals and Wasserstein formulas.

Notation: ``d = t2 - t1`` and ``s = p + q - 2r``.  On the coupling region
``s >= 0``, so the denominator ``(1 - c) + c s`` of the first moment is bounded
below by ``1 - c >= 1/2``.

``phi1`` and ``phi2`` are restricted to the closed coupling region.  The
``*_curve`` variants evaluate the same expressions on the whole real line,
which is what the pole/root analysis needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateSystem, DomainError, OutOfRange, PoleEvaluation
from .ifs import BOUNDARY_SLACK, CouplingParam, IfsSystem, SelfSimilarMeasure

POLE_TOL = 1e-12


@dataclass(frozen=True)
class MomentFormulaInput:
    """Argument tuple ``(sys, p, q, r)`` with ``r`` in the closed coupling region."""

    sys: IfsSystem
    p: float
    q: float
    r: float

    def __post_init__(self):
        CouplingParam(self.p, self.q, self.r)

    @property
    def coupling(self) -> CouplingParam:
        return CouplingParam(self.p, self.q, self.r)


def _check_pqc(p: float, q: float, c: float) -> None:
    for name, v in (("p", p), ("q", q)):
        if not 0.0 < v < 1.0:
            raise OutOfRange(name, f"must lie in (0, 1), got {v!r}")
    if not 0.0 < c <= 0.5:
        raise OutOfRange("c", f"must lie in (0, 1/2], got {c!r}")


# --- first moment ---------------------------------------------------------


def phi1_curve(sys: IfsSystem, p: float, q: float, r: float) -> float:
    """First-moment rational function of ``r``, defined everywhere but its pole."""
    c, d = sys.c, sys.gap
    s = p + q - 2.0 * r
    den = (1.0 - c) + c * s
    if abs(den) <= POLE_TOL:
        raise PoleEvaluation(f"r={r!r} is the pole {phi1_pole(p, q, c)!r}")
    num = c * (p - q) ** 2 + (1.0 - c) * s
    return d / (1.0 - c) * num / den


def phi1(inp: MomentFormulaInput) -> float:
    """``int |x - y| d gamma_r`` for the self-similar coupling with parameter r."""
    return phi1_curve(inp.sys, inp.p, inp.q, inp.r)


def phi1_pole(p: float, q: float, c: float) -> float:
    """The single pole ``(p + q)/2 + (1 - c)/(2c)``; always right of the region."""
    _check_pqc(p, q, c)
    return (p + q) / 2.0 + (1.0 - c) / (2.0 * c)


def phi1_root(p: float, q: float, c: float) -> float:
    """The single root ``(p + q)/2 + c (p - q)^2 / (2 (1 - c))``, between region and pole."""
    _check_pqc(p, q, c)
    return (p + q) / 2.0 + c * (p - q) ** 2 / (2.0 * (1.0 - c))


def phi1_derivative(inp: MomentFormulaInput) -> float:
    c, d, p, q, r = inp.sys.c, inp.sys.gap, inp.p, inp.q, inp.r
    den = 1.0 - c + c * (p + q - 2.0 * r)
    if abs(den) <= POLE_TOL:
        raise PoleEvaluation(f"r={r!r} is the pole of the first moment")
    return 2.0 * d * (c**2 * (p - q) ** 2 - (1.0 - c) ** 2) / ((1.0 - c) * den**2)


# --- second moment --------------------------------------------------------


def phi2_squared_curve(sys: IfsSystem, p: float, q: float, r: float) -> float:
    """Square of the second-moment root, a linear function of ``r``."""
    c, d = sys.c, sys.gap
    radicand = (2.0 * c * (p - q) ** 2 + (1.0 - c) * (p + q - 2.0 * r)) / (1.0 + c)
    return (d / (1.0 - c)) ** 2 * radicand


def phi2_curve(sys: IfsSystem, p: float, q: float, r: float) -> float:
    """Positive square root of :func:`phi2_squared_curve`, defined left of its root."""
    c = sys.c
    radicand = (2.0 * c * (p - q) ** 2 + (1.0 - c) * (p + q - 2.0 * r)) / (1.0 + c)
    if radicand < 0.0:
        raise DomainError(f"negative radicand {radicand!r} at r={r!r}")
    return sys.gap / (1.0 - c) * math.sqrt(radicand)


def phi2(inp: MomentFormulaInput) -> float:
    """``(int |x - y|^2 d gamma_r)^(1/2)`` for the self-similar coupling."""
    return phi2_curve(inp.sys, inp.p, inp.q, inp.r)


def phi2_root(p: float, q: float, c: float) -> float:
    _check_pqc(p, q, c)
    return (p + q) / 2.0 + c * (p - q) ** 2 / (1.0 - c)


def phi2_squared_slope(t1: float, t2: float, c: float) -> float:
    """Constant derivative in ``r`` of the squared second moment."""
    return -2.0 * (t2 - t1) ** 2 / (1.0 - c**2)


# --- Wasserstein distances ------------------------------------------------


def measure_mean(m: SelfSimilarMeasure) -> float:
    s = m.system
    return (m.p * s.t1 + (1.0 - m.p) * s.t2) / (1.0 - s.c)


def kr_functional(sys: IfsSystem, p: float, q: float, lam: float) -> float:
    """``int lam * x d(mu_p - mu_q)``, the dual objective for the test function ``lam x``."""
    if not -1.0 <= lam <= 1.0:
        raise OutOfRange("lambda", f"must lie in [-1, 1], got {lam!r}")
    # product order matches w1_exact so that lam = +-1 reproduces it bit-for-bit
    return lam * (p - q) * ((sys.t1 - sys.t2) / (1.0 - sys.c))


def w1_exact(sys: IfsSystem, p: float, q: float) -> float:
    # scale first: for t2 - t1 = 1 - c it is exactly 1 and W_1 is exactly |p - q|
    return abs(p - q) * ((sys.t2 - sys.t1) / (1.0 - sys.c))


def w2_bounds(sys: IfsSystem, p: float, q: float) -> tuple[float, float]:
    """``(lower, upper)`` bounds on ``W_2(mu_p, mu_q)``.

    The lower bound is ``W_1``; the upper bound is the second moment of the
    coupling at ``r = min(p, q)``.
    """
    c = sys.c
    lower = w1_exact(sys, p, q)
    radicand = (2.0 * c * (p - q) ** 2 + (1.0 - c) * abs(p - q)) / (1.0 + c)
    upper = sys.gap / (1.0 - c) * math.sqrt(radicand)
    return lower, upper


# --- N-map lower bounds ---------------------------------------------------


@dataclass(frozen=True)
class GeneralIfsSpec:
    """N similitudes ``S_i(x) = c_i x + t_i`` with two probability vectors."""

    maps: tuple[tuple[float, float], ...]
    p_vec: tuple[float, ...]
    q_vec: tuple[float, ...]

    def __post_init__(self):
        maps = tuple((float(ci), float(ti)) for ci, ti in self.maps)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "p_vec", tuple(float(v) for v in self.p_vec))
        object.__setattr__(self, "q_vec", tuple(float(v) for v in self.q_vec))
        n = len(maps)
        if n < 2:
            raise OutOfRange("maps", "need at least two maps")
        for name, vec in (("p_vec", self.p_vec), ("q_vec", self.q_vec)):
            if len(vec) != n:
                raise OutOfRange(name, f"length {len(vec)} != number of maps {n}")
            if any(not 0.0 < v < 1.0 for v in vec):
                raise OutOfRange(name, "entries must lie in (0, 1)")
            if abs(math.fsum(vec) - 1.0) > 1e-12:
                raise OutOfRange(name, f"must sum to 1, got {math.fsum(vec)!r}")
        for ci, ti in maps:
            if not 0.0 < ci < 1.0:
                raise OutOfRange("c_i", f"must lie in (0, 1), got {ci!r}")
            if ti < -BOUNDARY_SLACK or ti + ci > 1.0 + BOUNDARY_SLACK:
                raise OutOfRange("t_i", f"image [{ti!r}, {ti + ci!r}] leaves [0, 1]")
        images = sorted((ti, ti + ci) for ci, ti in maps)
        for (_, end), (start, _) in zip(images, images[1:]):
            if start < end - BOUNDARY_SLACK:
                raise OutOfRange("t_i", "images of [0, 1] overlap in more than a point")

    @property
    def ratios(self) -> np.ndarray:
        return np.array([ci for ci, _ in self.maps])

    @property
    def translations(self) -> np.ndarray:
        return np.array([ti for _, ti in self.maps])


def general_lower_bound(spec: GeneralIfsSpec) -> float:
    """Lower bound on ``W_1`` from the test functions ``+-x``.

    With ``P = 1 - sum p_i c_i`` and ``Q = 1 - sum q_i c_i`` the mean of
    ``mu_p`` is ``sum p_i t_i / P``; the bound is the absolute difference of
    the two means.
    """
    c, t = spec.ratios, spec.translations
    p, q = np.array(spec.p_vec), np.array(spec.q_vec)
    den_p = 1.0 - float(np.dot(p, c))
    den_q = 1.0 - float(np.dot(q, c))
    if den_p <= 0.0 or den_q <= 0.0:
        raise DegenerateSystem("1 - sum of weighted ratios must be positive")
    num = float(np.dot(p, t)) * den_q - float(np.dot(q, t)) * den_p
    return abs(num) / (den_p * den_q)


def two_map_distinct_ratio_bound(
    c1: float, c2: float, t1: float, t2: float, p: float, q: float
) -> float:
    """Two-map specialization of :func:`general_lower_bound` with ratios ``c1``, ``c2``."""
    GeneralIfsSpec(((c1, t1), (c2, t2)), (p, 1.0 - p), (q, 1.0 - q))
    den_p = 1.0 - p * c1 - (1.0 - p) * c2
    den_q = 1.0 - q * c1 - (1.0 - q) * c2
    if den_p <= 0.0 or den_q <= 0.0:
        raise DegenerateSystem("1 - weighted ratio sum must be positive")
    mean_p_num = p * t1 + (1.0 - p) * t2
    mean_q_num = q * t1 + (1.0 - q) * t2
    return abs((mean_p_num * den_q - mean_q_num * den_p) / (den_p * den_q))


def equal_ratio_lower_bound(c: float, translations: Sequence[float], p_vec, q_vec) -> float:
    """``|sum (p_i - q_i) t_i| / (1 - c)``, the equal-ratio form of the bound."""
    diff = np.asarray(p_vec, dtype=float) - np.asarray(q_vec, dtype=float)
    return abs(float(np.dot(diff, np.asarray(translations, dtype=float)))) / (1.0 - c)
