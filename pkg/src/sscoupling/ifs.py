"""Two-map equicontractive IFS on [0, 1], its self-similar measures and couplings.

The system is ``S1(x) = c x + t1``, ``S2(x) = c x + t2`` with ``0 < c <= 1/2``,
``0 <= t1 <= 1 - 2c`` and ``t1 + c <= t2 <= 1 - c``.  These ranges make the
images of ``[0, 1]`` disjoint (or touching at a point when ``c = 1/2``), so the
open set condition holds with the open unit interval.

Depth-``k`` discretizations place one atom per word of length ``k`` at the
image of ``1/2`` under the composed maps, i.e. at the midpoint of the word's
cylinder.  Every point of a cylinder is therefore within ``c**k / 2`` of its
atom.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import NotNormalized, OutOfRange, OutOfRegion, ResourceLimit

# Slack on the boundary comparisons so that values like t2 = 1 - c survive
# floating-point round trips.
BOUNDARY_SLACK = 1e-12

DEFAULT_ATOM_BUDGET = 2**22

MASS_TOL = 1e-12


@dataclass(frozen=True)
class IfsSystem:
    c: float
    t1: float
    t2: float

    def __post_init__(self):
        c, t1, t2 = self.c, self.t1, self.t2
        for name, value in (("c", c), ("t1", t1), ("t2", t2)):
            if not np.isfinite(value):
                raise OutOfRange(name, f"must be finite, got {value!r}")
        if not 0.0 < c <= 0.5:
            raise OutOfRange("c", f"must lie in (0, 1/2], got {c!r}")
        if not -BOUNDARY_SLACK <= t1 <= 1.0 - 2.0 * c + BOUNDARY_SLACK:
            raise OutOfRange("t1", f"must lie in [0, 1 - 2c] = [0, {1.0 - 2.0 * c!r}], got {t1!r}")
        if not t1 + c - BOUNDARY_SLACK <= t2 <= 1.0 - c + BOUNDARY_SLACK:
            raise OutOfRange(
                "t2", f"must lie in [t1 + c, 1 - c] = [{t1 + c!r}, {1.0 - c!r}], got {t2!r}"
            )

    @property
    def gap(self) -> float:
        """Distance ``t2 - t1`` between the two translations."""
        return self.t2 - self.t1

    def apply(self, i: int, x):
        """Apply ``S_i`` (``i`` in {1, 2}) to a scalar or array."""
        if i == 1:
            return self.c * x + self.t1
        if i == 2:
            return self.c * x + self.t2
        raise OutOfRange("i", f"map index must be 1 or 2, got {i!r}")


def validate_system(c: float, t1: float, t2: float) -> IfsSystem:
    """Validate raw parameters and return the corresponding :class:`IfsSystem`."""
    return IfsSystem(float(c), float(t1), float(t2))


def _check_weight(name: str, value: float) -> None:
    if not (np.isfinite(value) and 0.0 < value < 1.0):
        raise OutOfRange(name, f"must lie in the open interval (0, 1), got {value!r}")


@dataclass(frozen=True)
class SelfSimilarMeasure:
    """The self-similar measure giving weight ``p`` to ``S1`` and ``1 - p`` to ``S2``."""

    system: IfsSystem
    p: float

    def __post_init__(self):
        _check_weight("p", self.p)


def coupling_region(p: float, q: float) -> tuple[float, float]:
    """Return ``(max(0, p + q - 1), min(p, q))``, the admissible range of r."""
    _check_weight("p", p)
    _check_weight("q", q)
    return max(0.0, p + q - 1.0), min(p, q)


@dataclass(frozen=True)
class CouplingParam:
    """Self-similar coupling of ``mu_p`` and ``mu_q`` with parameter ``r``.

    ``r`` may sit on either closed endpoint of the region; the resulting
    probability vector then has a zero entry, which is kept.
    """

    p: float
    q: float
    r: float

    def __post_init__(self):
        lo, hi = coupling_region(self.p, self.q)
        if not (np.isfinite(self.r) and lo - BOUNDARY_SLACK <= self.r <= hi + BOUNDARY_SLACK):
            raise OutOfRegion(f"r={self.r!r} outside the coupling region [{lo!r}, {hi!r}]")

    @property
    def region(self) -> tuple[float, float]:
        return coupling_region(self.p, self.q)

    @property
    def probabilities(self) -> tuple[float, float, float, float]:
        """Weights of ``S_{1,1}, S_{1,2}, S_{2,1}, S_{2,2}`` in that order."""
        p, q, r = self.p, self.q, self.r
        vec = (r, p - r, q - r, 1.0 - p - q + r)
        # entries within BOUNDARY_SLACK of zero are boundary round-off
        return tuple(max(0.0, v) for v in vec)

    @property
    def on_boundary(self) -> bool:
        lo, hi = self.region
        return abs(self.r - lo) <= BOUNDARY_SLACK or abs(self.r - hi) <= BOUNDARY_SLACK


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms ``(positions[i], weights[i])`` sorted by position."""

    positions: np.ndarray
    weights: np.ndarray
    depth: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pos.shape != w.shape or pos.ndim != 1:
            raise ValueError("positions and weights must be 1-D arrays of equal length")
        if np.any(np.diff(pos) < 0):
            raise ValueError("atoms must be sorted by position")
        object.__setattr__(self, "positions", _readonly(pos))
        object.__setattr__(self, "weights", _readonly(w))

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.positions.tolist(), self.weights.tolist()))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def mean(self) -> float:
        return float(np.dot(self.weights, self.positions))

    @classmethod
    def from_atoms(cls, atoms, depth: int = 0) -> "DiscreteMeasure":
        """Build from ``(position, weight)`` pairs in any order (stable sort)."""
        arr = np.asarray(list(atoms), dtype=float).reshape(-1, 2)
        order = np.argsort(arr[:, 0], kind="stable")
        return cls(arr[order, 0], arr[order, 1], depth)


@dataclass(frozen=True)
class DiscreteCoupling:
    """Atoms ``((x[i], y[i]), weights[i])`` in word order."""

    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    depth: int = 0
    param: CouplingParam | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("x", "y", "weights"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=float)))
        if not self.x.shape == self.y.shape == self.weights.shape:
            raise ValueError("x, y and weights must have equal shapes")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def atoms(self) -> list[tuple[tuple[float, float], float]]:
        return [((a, b), w) for a, b, w in zip(self.x.tolist(), self.y.tolist(), self.weights.tolist())]

    def marginal(self, axis: int) -> DiscreteMeasure:
        """Project onto coordinate ``axis`` (0 for x, 1 for y), grouping equal positions."""
        coords = self.x if axis == 0 else self.y
        values, inverse = np.unique(coords, return_inverse=True)
        mass = np.bincount(inverse, weights=self.weights, minlength=len(values))
        return DiscreteMeasure(values, mass, self.depth)


def check_normalized(weights: np.ndarray, tol: float = 1e-9) -> None:
    total = float(np.sum(weights))
    if abs(total - 1.0) > tol or np.any(np.asarray(weights) < 0):
        raise NotNormalized(f"total mass {total!r} differs from 1 by more than {tol:g}")


def _check_budget(n_atoms: int, budget: int) -> None:
    if n_atoms > budget:
        raise ResourceLimit(f"{n_atoms} atoms exceed the budget of {budget}")


def _check_depth(depth: int) -> int:
    if isinstance(depth, bool) or int(depth) != depth or depth < 0:
        raise OutOfRange("depth", f"must be a non-negative integer, got {depth!r}")
    return int(depth)


def word_expand(base: np.ndarray, factors, offsets=None) -> np.ndarray:
    """One level of word expansion with the new letter outermost.

    For ``offsets`` given, returns ``factor * base + offset`` per letter
    (positions); otherwise ``factor * base`` (weights).  Letters are the
    major axis so the output stays in lexicographic word order.
    """
    factors = np.asarray(factors, dtype=float)[:, None]
    if offsets is None:
        return (factors * base[None, :]).ravel()
    offsets = np.asarray(offsets, dtype=float)[:, None]
    return (factors * base[None, :] + offsets).ravel()


@functools.lru_cache(maxsize=8)
def _measure_positions(c: float, t1: float, t2: float, depth: int) -> np.ndarray:
    pos = np.array([0.5])
    for _ in range(depth):
        pos = word_expand(pos, (c, c), (t1, t2))
    return _readonly(pos)


def discretize_measure(
    m: SelfSimilarMeasure, depth: int, atom_budget: int = DEFAULT_ATOM_BUDGET
) -> DiscreteMeasure:
    """Depth-``k`` approximation of ``mu_p`` with ``2**k`` atoms.

    Atom ``w`` sits at ``S_{w1} o ... o S_{wk}(1/2)`` with weight
    ``prod p_{wi}``.  Atoms are sorted by position; ties keep word order.
    """
    depth = _check_depth(depth)
    _check_budget(2**depth, atom_budget)
    sys_ = m.system
    pos = _measure_positions(sys_.c, sys_.t1, sys_.t2, depth)
    w = np.array([1.0])
    for _ in range(depth):
        w = word_expand(w, (m.p, 1.0 - m.p))
    order = np.argsort(pos, kind="stable")
    return DiscreteMeasure(pos[order], w[order], depth)


@functools.lru_cache(maxsize=4)
def _product_positions(c: float, t1: float, t2: float, depth: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([0.5])
    y = np.array([0.5])
    cs = (c, c, c, c)
    for _ in range(depth):
        # letter order (1,1), (1,2), (2,1), (2,2)
        x = word_expand(x, cs, (t1, t1, t2, t2))
        y = word_expand(y, cs, (t1, t2, t1, t2))
    return _readonly(x), _readonly(y)


def discretize_coupling(
    sys: IfsSystem, cp: CouplingParam, depth: int, atom_budget: int = DEFAULT_ATOM_BUDGET
) -> DiscreteCoupling:
    """Depth-``k`` approximation of the self-similar coupling ``gamma_r``.

    One atom per word over ``{(1,1), (1,2), (2,1), (2,2)}``, placed at the
    composed product map applied to ``(1/2, 1/2)`` and weighted by the product
    of ``(r, p - r, q - r, 1 - p - q + r)``.  Zero-weight atoms are kept.
    """
    depth = _check_depth(depth)
    _check_budget(4**depth, atom_budget)
    x, y = _product_positions(sys.c, sys.t1, sys.t2, depth)
    probs = cp.probabilities
    w = np.array([1.0])
    for _ in range(depth):
        w = word_expand(w, probs)
    return DiscreteCoupling(x, y, w, depth, cp)
