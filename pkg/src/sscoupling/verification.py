"""Cross-checks of the closed forms against the brute-force oracle.

Each ``check_*`` function runs one property over a batch of seeded random
configurations and returns a :class:`CheckResult` holding the worst case
found.  :func:`run_suite` strings them together for the ``verify`` command.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .closed_forms import (
    MomentFormulaInput,
    GeneralIfsSpec,
    general_lower_bound,
    kr_functional,
    phi1,
    phi1_curve,
    phi1_derivative,
    phi1_root,
    phi2,
    w1_exact,
    w2_bounds,
)
from .ifs import (
    CouplingParam,
    DiscreteMeasure,
    IfsSystem,
    SelfSimilarMeasure,
    coupling_region,
    discretize_coupling,
    discretize_measure,
    validate_system,
    word_expand,
)
from .oracle import (
    coupling_moment,
    monotone_transport,
    random_feasible_coupling_cost,
    techlem_residual,
)

log = logging.getLogger(__name__)

# Below c ~ 0.1 the bound 3 c**14 falls under double-precision resolution of
# the transport cost, so random systems draw c from [C_MIN, 1/2].
C_MIN = 0.2
WEIGHT_RANGE = (0.05, 0.95)


@dataclass(frozen=True)
class Config:
    sys: IfsSystem
    p: float
    q: float


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured_gap: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: gap={self.measured_gap:.3e} "
            f"tol={self.tolerance:.3e} {self.detail}".rstrip()
        )

    def to_dict(self) -> dict:
        return asdict(self)


class _Worst:
    """Tracks the case with the largest gap/tolerance ratio."""

    def __init__(self):
        self.ratio = -math.inf
        self.gap = 0.0
        self.tol = 0.0
        self.passed = True
        self.where = ""

    def add(self, gap: float, tol: float, where: str = "") -> None:
        ok = gap <= tol
        self.passed &= ok
        ratio = gap / tol if tol > 0 else (0.0 if gap == 0 else math.inf)
        if ratio > self.ratio:
            self.ratio, self.gap, self.tol, self.where = ratio, gap, tol, where

    def result(self, name: str, extra: str = "") -> CheckResult:
        detail = " ".join(s for s in (self.where, extra) if s)
        return CheckResult(name, bool(self.passed), float(self.gap), float(self.tol), detail)


def random_config(rng: np.random.Generator, c_min: float = C_MIN, min_gap: float = 0.0) -> Config:
    c = float(rng.uniform(c_min, 0.5))
    t1 = float(rng.uniform(0.0, 1.0 - 2.0 * c))
    t2 = float(rng.uniform(t1 + c, 1.0 - c))
    while True:
        p, q = (float(v) for v in rng.uniform(*WEIGHT_RANGE, size=2))
        if abs(p - q) >= min_gap:
            break
    return Config(validate_system(c, t1, t2), p, q)


def random_configs(n: int, seed: int, **kw) -> list[Config]:
    rng = np.random.default_rng(seed)
    return [random_config(rng, **kw) for _ in range(n)]


def interior_r_values(cfg: Config, n: int, rng: np.random.Generator) -> list[float]:
    lo, hi = coupling_region(cfg.p, cfg.q)
    return sorted(float(v) for v in rng.uniform(lo, hi, size=n))


def _tag(cfg: Config, r: float | None = None) -> str:
    s = f"(c={cfg.sys.c:.4g},t1={cfg.sys.t1:.4g},t2={cfg.sys.t2:.4g},p={cfg.p:.4g},q={cfg.q:.4g}"
    return s + (f",r={r:.4g})" if r is not None else ")")


def _marginals(cfg: Config, depth: int) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    a = discretize_measure(SelfSimilarMeasure(cfg.sys, cfg.p), depth)
    b = discretize_measure(SelfSimilarMeasure(cfg.sys, cfg.q), depth)
    return a, b


# --- checks ---------------------------------------------------------------


def check_first_moment(configs, depth: int = 10, n_r: int = 5, seed: int = 0, factor: float = 3.0):
    """|coupling_moment(depth, 1) - phi1| <= factor * c**depth."""
    rng = np.random.default_rng(seed)
    worst = _Worst()
    for cfg in configs:
        tol = factor * cfg.sys.c**depth
        for r in interior_r_values(cfg, n_r, rng):
            dc = discretize_coupling(cfg.sys, CouplingParam(cfg.p, cfg.q, r), depth)
            gap = abs(coupling_moment(dc, 1) - phi1(MomentFormulaInput(cfg.sys, cfg.p, cfg.q, r)))
            worst.add(gap, tol, _tag(cfg, r))
    return worst.result(f"first moment vs depth-{depth} coupling")


def check_second_moment(configs, depth: int = 9, n_r: int = 5, seed: int = 0, factor: float = 6.0):
    """|coupling_moment(depth, 2)**2 - phi2**2| <= factor * c**depth."""
    rng = np.random.default_rng(seed)
    worst = _Worst()
    for cfg in configs:
        tol = factor * cfg.sys.c**depth
        for r in interior_r_values(cfg, n_r, rng):
            dc = discretize_coupling(cfg.sys, CouplingParam(cfg.p, cfg.q, r), depth)
            exact = phi2(MomentFormulaInput(cfg.sys, cfg.p, cfg.q, r))
            gap = abs(coupling_moment(dc, 2) ** 2 - exact**2)
            worst.add(gap, tol, _tag(cfg, r))
    return worst.result(f"second moment vs depth-{depth} coupling")


def check_w1(configs, depth: int = 14, factor: float = 3.0):
    """Monotone-rearrangement W1 on depth-k marginals vs the exact formula."""
    worst = _Worst()
    for cfg in configs + [Config(validate_system(0.5, 0.0, 0.5), 0.2, 0.8)]:
        a, b = _marginals(cfg, depth)
        gap = abs(monotone_transport(a, b).cost_rho1 - w1_exact(cfg.sys, cfg.p, cfg.q))
        worst.add(gap, factor * cfg.sys.c**depth, _tag(cfg))
    fig1 = w1_exact(validate_system(0.5, 0.0, 0.5), 0.2, 0.8)
    # 0.2 - 0.8 is not exactly representable; allow one ulp
    fig1_ok = abs(fig1 - 0.6) <= math.ulp(0.6)
    res = worst.result(f"W1 formula vs depth-{depth} monotone transport", f"figure1_w1={fig1!r}")
    res.passed = res.passed and fig1_ok
    return res


def check_w2_sandwich(configs, depth: int = 14, factor: float = 3.0):
    """Oracle W2 within [lower - tol, upper + tol]; reports the gap to each bound."""
    worst = _Worst()
    min_lower_gap = math.inf
    min_upper_gap = math.inf
    for cfg in configs:
        a, b = _marginals(cfg, depth)
        w2 = monotone_transport(a, b).cost_rho2
        lower, upper = w2_bounds(cfg.sys, cfg.p, cfg.q)
        tol = factor * cfg.sys.c**depth
        # violation is positive outside the band
        violation = max(lower - w2, w2 - upper, 0.0)
        worst.add(violation, tol, _tag(cfg))
        min_lower_gap = min(min_lower_gap, w2 - lower)
        min_upper_gap = min(min_upper_gap, upper - w2)
    return worst.result(
        f"W2 sandwich at depth {depth}",
        f"min(w2-lower)={min_lower_gap:.3e} min(upper-w2)={min_upper_gap:.3e}",
    )


def check_c_independence(p: float = 0.2, q: float = 0.9):
    """W1 is exactly |p - q| on the middle-(1-2c) Cantor family; the t2 - t1 = c family grows with c."""
    grid = [round(0.05 * i, 10) for i in range(1, 11)]
    target = abs(p - q)
    cantor = [w1_exact(validate_system(c, 0.0, 1.0 - c), p, q) for c in grid]
    close = [w1_exact(validate_system(c, 0.0, c), p, q) for c in grid]
    gap = max(abs(v - target) for v in cantor)
    increasing = all(b > a for a, b in zip(close, close[1:]))
    below = all(v < target for c, v in zip(grid, close) if c < 0.5)
    passed = gap == 0.0 and increasing and below
    return CheckResult(
        "W1 independent of c on the middle Cantor family",
        passed,
        gap,
        0.0,
        f"close_increasing={increasing} close_below={below}",
    )


def equal_ratio_discretization(c: float, translations, weights, depth: int) -> DiscreteMeasure:
    """Depth-k cylinder-midpoint atoms for an N-map equal-ratio IFS."""
    n = len(translations)
    pos = np.array([0.5])
    w = np.array([1.0])
    for _ in range(depth):
        pos = word_expand(pos, [c] * n, translations)
        w = word_expand(w, weights)
    order = np.argsort(pos, kind="stable")
    return DiscreteMeasure(pos[order], w[order], depth)


def check_three_map_counterexample(cs=(0.05, 0.15, 0.25), depth: int = 9):
    p_vec, q_vec = (0.4, 0.5, 0.1), (0.6, 0.1, 0.3)
    worst = _Worst()
    estimates = []
    for c in cs:
        t = (0.0, c, 2.0 * c)
        bound = general_lower_bound(GeneralIfsSpec(tuple(zip((c,) * 3, t)), p_vec, q_vec))
        worst.add(bound, 1e-14, f"c={c}")
        a = equal_ratio_discretization(c, t, p_vec, depth)
        b = equal_ratio_discretization(c, t, q_vec, depth)
        estimates.append(monotone_transport(a, b).cost_rho1)
    res = worst.result(
        "three-map linear lower bound vanishes", "oracle_w1=" + ",".join(f"{e:.4g}" for e in estimates)
    )
    res.passed = res.passed and all(e > 0 for e in estimates)
    return res


def check_lemma_residual(configs, depths=(6, 8, 10), factor: float = 12.0, seed: int = 0):
    rng = np.random.default_rng(seed)
    worst = _Worst()
    decreasing = True
    for cfg in configs:
        (r,) = interior_r_values(cfg, 1, rng)
        prev = math.inf
        for d in depths:
            res = techlem_residual(cfg.sys, cfg.p, cfg.q, r, d)
            worst.add(res, factor * cfg.sys.c**d, _tag(cfg, r) + f" depth={d}")
            decreasing &= res < prev
            prev = res
    out = worst.result("signed-moment identity residual", f"decreasing={decreasing}")
    out.passed = out.passed and decreasing
    return out


def check_analytic_features(configs, seed: int = 0, fd_step: float = 1e-6):
    """Derivative, root, monotonicity, duality closure and boundary identity."""
    rng = np.random.default_rng(seed)
    worst = _Worst()
    failures = []
    for cfg in configs:
        s, p, q = cfg.sys, cfg.p, cfg.q
        lo, hi = coupling_region(p, q)
        # keep the stencil inside the closed region
        r = float(rng.uniform(lo + 2 * fd_step, hi - 2 * fd_step))
        fd = (phi1_curve(s, p, q, r + fd_step) - phi1_curve(s, p, q, r - fd_step)) / (2 * fd_step)
        exact = phi1_derivative(MomentFormulaInput(s, p, q, r))
        worst.add(abs(fd - exact), 1e-6 * abs(exact), _tag(cfg, r) + " derivative")

        worst.add(abs(phi1_curve(s, p, q, phi1_root(p, q, s.c))), 1e-12, _tag(cfg) + " root")

        grid = np.linspace(lo, hi, 101)
        vals = np.array([phi1(MomentFormulaInput(s, p, q, float(g))) for g in grid])
        if not (np.all(np.diff(vals) < 0) and np.all(vals > 0)):
            failures.append(_tag(cfg) + " monotone/positive")

        w1 = w1_exact(s, p, q)
        dual = max(kr_functional(s, p, q, -1.0), kr_functional(s, p, q, 1.0))
        if dual != w1:
            failures.append(_tag(cfg) + f" duality {dual!r} != {w1!r}")

        worst.add(abs(phi1(MomentFormulaInput(s, p, q, hi)) - w1), 1e-12, _tag(cfg) + " boundary")
    res = worst.result("first-moment analytic features", "; ".join(failures))
    res.passed = res.passed and not failures
    return res


def random_discrete_pair(rng: np.random.Generator, max_atoms: int = 64):
    def one():
        n = int(rng.integers(1, max_atoms + 1))
        pos = np.sort(rng.uniform(0.0, 1.0, n))
        w = rng.uniform(0.0, 1.0, n)
        return DiscreteMeasure(pos, w / w.sum())

    return one(), one()


def check_optimality_witness(n_pairs: int = 20, n_seeds: int = 1000, seed: int = 0):
    rng = np.random.default_rng(seed)
    worst = _Worst()
    for k in range(n_pairs):
        a, b = random_discrete_pair(rng)
        plan = monotone_transport(a, b)
        for rho in (1, 2):
            best = plan.cost(rho)
            lowest = min(random_feasible_coupling_cost(a, b, s, rho) for s in range(n_seeds))
            worst.add(max(best - lowest, 0.0), 1e-10, f"pair={k} rho={rho}")
    return worst.result("monotone plan beats random feasible couplings")


# --- suite ----------------------------------------------------------------


def run_suite(depth: int = 10, n_configs: int = 50, seed: int = 42) -> list[CheckResult]:
    """All checks at a given coupling depth.

    Coupling sums use ``depth`` (first moment) and ``depth - 1`` (second
    moment); transport uses ``depth + 4``; tolerances scale as ``c**depth``.
    """
    configs = random_configs(n_configs, seed)
    gapped = random_configs(min(n_configs, 20), seed + 1, min_gap=0.1)
    features = random_configs(2 * n_configs, seed + 2)
    lemma_depths = sorted({max(1, depth - 4), max(1, depth - 2), depth})
    steps: list[Callable[[], CheckResult]] = [
        lambda: check_first_moment(configs, depth, seed=seed),
        lambda: check_second_moment(configs, max(1, depth - 1), seed=seed),
        lambda: check_w1(configs, depth + 4),
        lambda: check_w2_sandwich(configs, depth + 4),
        lambda: check_c_independence(),
        lambda: check_three_map_counterexample(depth=max(1, depth - 1)),
        lambda: check_lemma_residual(gapped, lemma_depths, seed=seed),
        lambda: check_analytic_features(features, seed=seed),
        lambda: check_optimality_witness(seed=seed),
    ]
    results = []
    for step in steps:
        res = step()
        log.info(res.line())
        results.append(res)
    return results
