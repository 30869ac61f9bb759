"""Brute-force transport oracle on depth-k discretizations.

Everything here works on :class:`DiscreteMeasure` / :class:`DiscreteCoupling`
atoms and never calls the closed forms, except :func:`techlem_residual` which
compares the two sides of the signed-moment identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, OutOfRange
from .ifs import (
    CouplingParam,
    DiscreteCoupling,
    DiscreteMeasure,
    IfsSystem,
    check_normalized,
    discretize_coupling,
)

# Cumulative-sum comparisons tolerate this much drift; segments lighter than
# it are dropped.
QUANTILE_SLACK = 1e-15


@dataclass(frozen=True)
class TransportPlan:
    """Pairs ``(source[i], target[i], mass[i])`` with costs for rho = 1 and 2."""

    source: np.ndarray
    target: np.ndarray
    mass: np.ndarray
    cost_rho1: float
    cost_rho2: float

    @property
    def pairs(self) -> list[tuple[int, int, float]]:
        return list(zip(self.source.tolist(), self.target.tolist(), self.mass.tolist()))

    def cost(self, rho: int) -> float:
        if rho == 1:
            return self.cost_rho1
        if rho == 2:
            return self.cost_rho2
        raise OutOfRange("rho", f"must be 1 or 2, got {rho!r}")

    def row_sums(self, n: int) -> np.ndarray:
        return np.bincount(self.source, weights=self.mass, minlength=n)

    def col_sums(self, n: int) -> np.ndarray:
        return np.bincount(self.target, weights=self.mass, minlength=n)


def _quantile_pairs(wa: np.ndarray, wb: np.ndarray):
    """North-west corner coupling of two weight vectors taken in the given order.

    Returns ``(i, j, mass)``: the unit interval is cut at every cumulative
    breakpoint of either side and each piece is matched to the atoms whose
    cumulative ranges contain it.
    """
    ca = np.cumsum(wa)
    cb = np.cumsum(wb)
    ca /= ca[-1]
    cb /= cb[-1]
    cuts = np.union1d(ca, cb)
    cuts = np.concatenate(([0.0], cuts[cuts > QUANTILE_SLACK]))
    cuts[-1] = 1.0
    mass = np.diff(cuts)
    keep = mass > QUANTILE_SLACK
    mids = (cuts[:-1] + cuts[1:])[keep] / 2.0
    mass = mass[keep]
    mass /= mass.sum()
    i = np.minimum(np.searchsorted(ca, mids), len(wa) - 1)
    j = np.minimum(np.searchsorted(cb, mids), len(wb) - 1)
    return i, j, mass


def _costs(xs: np.ndarray, ys: np.ndarray, mass: np.ndarray) -> tuple[float, float]:
    dist = np.abs(xs - ys)
    return float(np.dot(mass, dist)), float(np.sqrt(np.dot(mass, dist * dist)))


def monotone_transport(a: DiscreteMeasure, b: DiscreteMeasure) -> TransportPlan:
    """Optimal plan between two sorted discrete measures on the line.

    The quantile (monotone) coupling is optimal for every convex cost of
    ``|x - y|``, so one plan serves both reported costs.
    """
    check_normalized(a.weights)
    check_normalized(b.weights)
    i, j, mass = _quantile_pairs(a.weights, b.weights)
    rho1, rho2 = _costs(a.positions[i], b.positions[j], mass)
    return TransportPlan(i, j, mass, rho1, rho2)


def random_feasible_coupling_cost(
    a: DiscreteMeasure, b: DiscreteMeasure, seed: int | None, rho: int
) -> float:
    """Cost of a greedy feasible coupling under random atom orders.

    Both atom lists are shuffled by a generator seeded with ``seed`` and
    coupled by the north-west corner rule.  ``seed=None`` keeps the sorted
    order, which reproduces :func:`monotone_transport`.
    """
    if rho not in (1, 2):
        raise OutOfRange("rho", f"must be 1 or 2, got {rho!r}")
    check_normalized(a.weights)
    check_normalized(b.weights)
    if seed is None:
        pa, pb = np.arange(len(a)), np.arange(len(b))
    else:
        rng = np.random.default_rng(seed)
        pa, pb = rng.permutation(len(a)), rng.permutation(len(b))
    i, j, mass = _quantile_pairs(a.weights[pa], b.weights[pb])
    rho1, rho2 = _costs(a.positions[pa][i], b.positions[pb][j], mass)
    return rho1 if rho == 1 else rho2


def coupling_moment(dc: DiscreteCoupling, rho: int) -> float:
    """``(sum w |x - y|^rho)^(1/rho)`` over the coupling atoms."""
    if rho not in (1, 2):
        raise OutOfRange("rho", f"must be 1 or 2, got {rho!r}")
    check_normalized(dc.weights)
    dist = np.abs(dc.x - dc.y)
    if rho == 1:
        return float(np.dot(dc.weights, dist))
    return float(np.sqrt(np.dot(dc.weights, dist * dist)))


def signed_moment(dc: DiscreteCoupling) -> float:
    """``sum w (x - y)`` over the coupling atoms."""
    check_normalized(dc.weights)
    return float(np.dot(dc.weights, dc.x - dc.y))


def techlem_rhs(sys: IfsSystem, p: float, q: float, r: float, first_moment: float) -> float:
    """Right-hand side of the signed-moment identity for a given first moment."""
    if p == q:
        raise DegenerateInput("the identity divides by p - q")
    c, d = sys.c, sys.gap
    s = p + q - 2.0 * r
    return 4.0 * d * (q - r) * (p - r) / ((p - q) * (1.0 - c + c * s)) - s / (p - q) * first_moment


def techlem_residual(sys: IfsSystem, p: float, q: float, r: float, depth: int) -> float:
    """|signed moment - identity RHS| with both sides from the depth-k coupling."""
    if p == q:
        raise DegenerateInput("the identity divides by p - q")
    dc = discretize_coupling(sys, CouplingParam(p, q, r), depth)
    lhs = signed_moment(dc)
    rhs = techlem_rhs(sys, p, q, r, coupling_moment(dc, 1))
    return abs(lhs - rhs)
