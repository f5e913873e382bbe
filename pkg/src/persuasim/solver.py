"""The sender's reduced one-dimensional design problem.

With binary terminal laws optimal and garbling ruled out, the sender only
chooses the give-up belief (the lower atom).  The objective is the success
probability from the optional-stopping identity minus the expected delay
cost of the two-boundary exit.  A coarse scan plus golden-section
refinement around every local maximum handles the possible multimodality
introduced by Monte Carlo-backed cost variants; those variants reuse
cached exit samples, so every candidate sees common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_forms import expected_exit_time
from .costs import CostModel, LinearCost, PowerCost, SumCost, expected_cost
from .dynamics import SimConfig
from .model import InvalidModelError, ModelParams, TerminalLaw

EPS_LOW = 1e-6  # the lower atom never reaches 0: strictly increasing costs diverge there
_REFINE_TOL = 1e-8
_TIE_TOL = 1e-10
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolveResult:
    """Optimal give-up belief and the value achieved there."""

    p_star: float
    lower_star: float
    objective: float
    cost_at_opt: float
    trace: tuple[tuple[float, float], ...]

    def to_json_dict(self) -> dict:
        return {
            "p_star": self.p_star,
            "lower_star": self.lower_star,
            "objective": self.objective,
            "cost_at_opt": self.cost_at_opt,
            "trace": [[lo, val] for lo, val in self.trace],
        }


def _two_atom_law(params: ModelParams, lower: float, p: float) -> TerminalLaw:
    return TerminalLaw(atoms=((lower, 1.0 - p), (params.p_bar, p)))


def objective(lower: float, c: CostModel, params: ModelParams,
              cfg: SimConfig | None = None) -> float:
    """Success probability minus expected delay cost at a give-up belief.

    Returns 0 at lower = p0 (no experiment) and -inf at lower = 0, where
    any nondegenerate increasing cost has divergent expectation.
    """
    if not 0.0 <= lower <= params.p0:
        raise InvalidModelError(f"give-up belief {lower} outside [0, {params.p0}]")
    if lower == params.p0:
        return 0.0
    if lower == 0.0:
        return -math.inf
    p = (params.p0 - lower) / (params.p_bar - lower)
    law = _two_atom_law(params, lower, p)
    return p - expected_cost(c, law, params, cfg).value


def _golden_max(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section maximization of f on [a, b] to absolute x tolerance."""
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    mid = 0.5 * (a + b)
    return mid, f(mid)


def solve_sender(c: CostModel, params: ModelParams, grid_n: int = 48,
                 cfg: SimConfig | None = None) -> SolveResult:
    """Maximize the sender's objective over the give-up belief.

    Scans ``grid_n`` coarse candidates on [EPS_LOW, p0], refines around
    every local maximum by golden section to 1e-8, and among ties (within
    1e-10 in value) returns the smallest give-up belief, i.e. the most
    persuasive maximizer.
    """
    if grid_n < 16:
        raise InvalidModelError(f"grid_n must be >= 16 (got {grid_n})")

    def f(lower: float) -> float:
        return objective(lower, c, params, cfg)

    grid = np.linspace(EPS_LOW, params.p0, grid_n)
    vals = np.array([f(lo) for lo in grid])
    trace = tuple((float(lo), float(v)) for lo, v in zip(grid, vals))

    candidates: list[tuple[float, float]] = list(zip(grid.tolist(), vals.tolist()))
    for i in range(grid_n):
        left_ok = i == 0 or vals[i] >= vals[i - 1]
        right_ok = i == grid_n - 1 or vals[i] >= vals[i + 1]
        if left_ok and right_ok:
            a = grid[max(i - 1, 0)]
            b = grid[min(i + 1, grid_n - 1)]
            candidates.append(_golden_max(f, float(a), float(b), _REFINE_TOL))

    best_val = max(v for _, v in candidates)
    lower_star = min(lo for lo, v in candidates if v >= best_val - _TIE_TOL)

    if lower_star == params.p0:
        return SolveResult(p_star=0.0, lower_star=float(params.p0), objective=0.0,
                           cost_at_opt=0.0, trace=trace)
    p_star = (params.p0 - lower_star) / (params.p_bar - lower_star)
    cost_at_opt = expected_cost(c, _two_atom_law(params, lower_star, p_star), params, cfg).value
    return SolveResult(
        p_star=float(p_star),
        lower_star=float(lower_star),
        objective=float(p_star - cost_at_opt),
        cost_at_opt=float(cost_at_opt),
        trace=trace,
    )


def sweep_convexity(c_base: CostModel, extra_quadratic_weights, params: ModelParams,
                    grid_n: int = 48, cfg: SimConfig | None = None
                    ) -> list[tuple[float, SolveResult]]:
    """Solve with cost c_base + w t^2 for each weight w.

    Adding w t^2 is an increasing-convex increment, so the optimal success
    probability is weakly decreasing along the sweep; shared exit samples
    make that monotonicity hold for the realized objectives, not just in
    expectation.
    """
    weights = [float(w) for w in extra_quadratic_weights]
    if any(w < 0 for w in weights):
        raise InvalidModelError(f"quadratic weights must be >= 0, got {weights}")
    if any(w2 < w1 for w1, w2 in zip(weights, weights[1:])):
        raise InvalidModelError(f"weights must be nondecreasing, got {weights}")
    results = []
    for w in weights:
        cost = c_base if w == 0.0 else SumCost(parts=(c_base, PowerCost(coef=w, exponent=2.0)))
        results.append((w, solve_sender(cost, params, grid_n=grid_n, cfg=cfg)))
    return results


def sweep_snr(c: CostModel, kappas, params_template: ModelParams,
              grid_n: int = 48, cfg: SimConfig | None = None
              ) -> list[tuple[float, SolveResult]]:
    """Solve across signal-to-noise ratios.

    Changing the ratio is a deterministic time change: exit times scale by
    the squared ratio of ratios at fixed boundaries (the natural-scale
    driving path does not depend on it), so with a shared seed the sweep
    is coupled exactly and the optimal success probability is weakly
    increasing.
    """
    ks = [float(k) for k in kappas]
    if any(k <= 0 for k in ks):
        raise InvalidModelError(f"signal-to-noise ratios must be positive, got {ks}")
    if any(k2 < k1 for k1, k2 in zip(ks, ks[1:])):
        raise InvalidModelError(f"ratios must be nondecreasing, got {ks}")
    results = []
    for kappa in ks:
        params = params_template.with_snr(kappa)
        results.append((kappa, solve_sender(c, params, grid_n=grid_n, cfg=cfg)))
    return results


def brute_force_objective_scan(c: LinearCost, params: ModelParams,
                               n_points: int = 100_000) -> tuple[float, float]:
    """Dense-scan oracle for linear costs: (best lower, best objective).

    Vectorized through the closed-form exit time; used to validate
    :func:`solve_sender` independently of its search strategy.
    """
    lowers = np.linspace(EPS_LOW, params.p0, n_points)
    p = (params.p0 - lowers) / (params.p_bar - lowers)
    cost = c.rate * expected_exit_time(params.p0, lowers, np.full_like(lowers, params.p_bar), params)
    objs = p - cost
    i = int(np.argmax(objs))
    return float(lowers[i]), float(objs[i])
