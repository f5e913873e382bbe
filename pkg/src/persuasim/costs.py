"""Delay-cost models, expected-cost evaluation, and stochastic-order checks.

Costs are increasing and convex with c(0) = 0.  Expected costs of a
two-atom terminal law use the exit-time closed forms where the family
allows it (linear and exponential-mixture costs) and Monte Carlo
otherwise.  Monte Carlo exit samples are cached per (model, boundaries,
config), which doubles as common random numbers across solver candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import closed_forms
from .dynamics import SimConfig, simulate_exit
from .model import GarblingPolicy, HittingStats, ModelParams, TerminalLaw

# horizon for grid validation of shape constraints; ten times the expected
# exit time of the canonical symmetric benchmark
_CHECK_HORIZON = 10.0 * math.log(3.0)
_CHECK_POINTS = 2001

# default sampling plan when a cost variant needs Monte Carlo and the
# caller does not supply one; sized for solver scans, where the shared
# sample cache matters more than per-point accuracy
DEFAULT_MC_CONFIG = SimConfig(n_paths=4096, du=2.5e-4, max_u=6.0, seed=90210,
                              bridge_correction=True)


class CostModelError(ValueError):
    """A cost model violates the increasing-convex-normalized contract."""


def _check_shape(evaluate, label: str, horizon: float = _CHECK_HORIZON) -> None:
    """Reject cost shapes that fail monotonicity or convexity on a dense grid."""
    t = np.linspace(0.0, horizon, _CHECK_POINTS)
    c = evaluate(t)
    scale = max(float(np.max(np.abs(c))), 1.0)
    if abs(float(c[0])) > 1e-12 * scale:
        raise CostModelError(f"{label}: c(0) = {c[0]}, must be 0")
    d1 = np.diff(c)
    if np.any(d1 < -1e-12 * scale):
        raise CostModelError(f"{label}: not nondecreasing on [0, {horizon:.3g}]")
    d2 = np.diff(d1)
    if np.any(d2 < -1e-10 * scale):
        raise CostModelError(f"{label}: not convex on [0, {horizon:.3g}]")


@dataclass(frozen=True)
class LinearCost:
    """c(t) = rate * t."""

    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise CostModelError(f"linear rate must be positive (got {self.rate})")

    def evaluate(self, t):
        return self.rate * np.asarray(t, dtype=float)

    def to_json_dict(self) -> dict:
        return {"variant": "linear", "rate": self.rate}


@dataclass(frozen=True)
class PowerCost:
    """c(t) = coef * t ** exponent with exponent >= 1."""

    coef: float
    exponent: float

    def __post_init__(self) -> None:
        if not self.coef > 0:
            raise CostModelError(f"power coefficient must be positive (got {self.coef})")
        if not self.exponent >= 1.0:
            raise CostModelError(f"power exponent must be >= 1 (got {self.exponent})")

    def evaluate(self, t):
        return self.coef * np.asarray(t, dtype=float) ** self.exponent

    def to_json_dict(self) -> dict:
        return {"variant": "power", "coef": self.coef, "exponent": self.exponent}


@dataclass(frozen=True)
class LaplaceMixtureCost:
    """c(t) = affine_rate * t + sum_i w_i (1 - exp(-s_i t)).

    Weights may carry either sign; an unsigned mixture of decaying
    exponentials alone cannot be both increasing and convex, so validity
    is checked numerically on a dense grid at construction.
    """

    affine_rate: float
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if self.affine_rate < 0:
            raise CostModelError(f"affine rate must be >= 0 (got {self.affine_rate})")
        atoms = tuple((float(s), float(w)) for s, w in self.atoms)
        if any(s <= 0 for s, _ in atoms):
            raise CostModelError("mixture decay parameters must be positive")
        object.__setattr__(self, "atoms", atoms)
        _check_shape(self.evaluate, "laplace mixture")

    def evaluate(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = self.affine_rate * t_arr
        for s, w in self.atoms:
            out = out + w * (1.0 - np.exp(-s * t_arr))
        return out

    def to_json_dict(self) -> dict:
        return {
            "variant": "laplace_mixture",
            "affine_rate": self.affine_rate,
            "atoms": [[s, w] for s, w in self.atoms],
        }


@dataclass(frozen=True)
class TabulatedCost:
    """Piecewise-linear interpolant through increasing (t, c) knots.

    Must start at (0, 0), be nondecreasing, and have nondecreasing slopes;
    extrapolates beyond the last knot with the final slope.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        knots = tuple((float(t), float(c)) for t, c in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 2:
            raise CostModelError("tabulated cost needs at least two knots")
        ts = np.array([t for t, _ in knots])
        cs = np.array([c for _, c in knots])
        if ts[0] != 0.0 or cs[0] != 0.0:
            raise CostModelError(f"tabulated cost must start at (0, 0), got ({ts[0]}, {cs[0]})")
        if np.any(np.diff(ts) <= 0):
            raise CostModelError("tabulated knots must have strictly increasing times")
        if np.any(np.diff(cs) < 0):
            raise CostModelError("tabulated cost must be nondecreasing")
        slopes = np.diff(cs) / np.diff(ts)
        if np.any(np.diff(slopes) < -1e-12):
            raise CostModelError("tabulated cost must be convex (nondecreasing slopes)")

    def evaluate(self, t):
        t_arr = np.asarray(t, dtype=float)
        ts = np.array([k for k, _ in self.knots])
        cs = np.array([c for _, c in self.knots])
        out = np.interp(t_arr, ts, cs)
        last_slope = (cs[-1] - cs[-2]) / (ts[-1] - ts[-2])
        beyond = t_arr > ts[-1]
        out = np.where(beyond, cs[-1] + last_slope * (t_arr - ts[-1]), out)
        return out

    def to_json_dict(self) -> dict:
        return {"variant": "tabulated", "knots": [[t, c] for t, c in self.knots]}


@dataclass(frozen=True)
class SumCost:
    """Sum of cost models; expected cost splits by linearity.

    Used by the convexity sweep to add a quadratic increment to a base
    cost without leaving the supported families.
    """

    parts: tuple

    def __post_init__(self) -> None:
        if not self.parts:
            raise CostModelError("sum cost needs at least one part")

    def evaluate(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.zeros_like(t_arr)
        for part in self.parts:
            out = out + part.evaluate(t_arr)
        return out

    def to_json_dict(self) -> dict:
        return {"variant": "sum", "parts": [p.to_json_dict() for p in self.parts]}


CostModel = LinearCost | PowerCost | LaplaceMixtureCost | TabulatedCost | SumCost


def cost_from_json_dict(d: dict) -> CostModel:
    try:
        variant = d["variant"]
        if variant == "linear":
            return LinearCost(rate=float(d["rate"]))
        if variant == "power":
            return PowerCost(coef=float(d["coef"]), exponent=float(d["exponent"]))
        if variant == "laplace_mixture":
            return LaplaceMixtureCost(
                affine_rate=float(d["affine_rate"]),
                atoms=tuple((float(s), float(w)) for s, w in d["atoms"]),
            )
        if variant == "tabulated":
            return TabulatedCost(knots=tuple((float(t), float(c)) for t, c in d["knots"]))
        if variant == "sum":
            return SumCost(parts=tuple(cost_from_json_dict(p) for p in d["parts"]))
    except (KeyError, TypeError) as exc:
        raise CostModelError(f"bad cost payload: {exc}") from exc
    raise CostModelError(f"unknown cost variant {variant!r}")


def eval_cost(c: CostModel, t):
    """Evaluate the delay cost at time(s) t >= 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise CostModelError(f"cost evaluated at negative time {t}")
    out = c.evaluate(t_arr)
    return out if t_arr.ndim else float(out)


@dataclass(frozen=True)
class CostEstimate:
    """Expected cost with its Monte Carlo standard error (0 when exact)."""

    value: float
    std_err: float


@lru_cache(maxsize=256)
def _mc_exit_samples(params: ModelParams, lower: float, upper: float,
                     cfg: SimConfig) -> np.ndarray:
    """Cached transparent exit-time samples; the cache is what makes the
    solver's candidate scan use common random numbers."""
    outcomes = simulate_exit(params, lower, upper, GarblingPolicy.none(), cfg)
    return np.array([o.tau for o in outcomes])


def _split_parts(c: CostModel):
    parts = c.parts if isinstance(c, SumCost) else (c,)
    exact = [p for p in parts if isinstance(p, (LinearCost, LaplaceMixtureCost))]
    sampled = [p for p in parts if not isinstance(p, (LinearCost, LaplaceMixtureCost))]
    return exact, sampled


def expected_cost(c: CostModel, law: TerminalLaw, params: ModelParams,
                  cfg: SimConfig | None = None) -> CostEstimate:
    """Expected delay cost of optimally embedding a two-atom law.

    Linear and Laplace-mixture variants evaluate in closed form through
    the exit-time formulas; power and tabulated variants average the cost
    over cached Monte Carlo exit samples and report the standard error.
    """
    if law.is_point_mass:
        return CostEstimate(0.0, 0.0)
    if len(law.atoms) != 2:
        raise CostModelError(f"expected a two-atom law, got {len(law.atoms)} atoms")
    lower, upper = law.beliefs[0], law.beliefs[-1]
    if lower <= 0.0 or upper >= 1.0:
        raise CostModelError(
            f"law boundaries [{lower}, {upper}] touch an absorbing endpoint; "
            "expected delay cost diverges"
        )
    exact_parts, sampled_parts = _split_parts(c)
    value = 0.0
    std_err = 0.0
    e_tau: float | None = None
    for part in exact_parts:
        if e_tau is None:
            e_tau = closed_forms.expected_exit_time(params.p0, lower, upper, params)
        if isinstance(part, LinearCost):
            value += part.rate * e_tau
        else:
            value += part.affine_rate * e_tau
            for s, w in part.atoms:
                transform = closed_forms.laplace_exit_transform(s, params.p0, lower, upper, params)
                value += w * (1.0 - transform)
    if sampled_parts:
        taus = _mc_exit_samples(params, float(lower), float(upper), cfg or DEFAULT_MC_CONFIG)
        draws = np.zeros_like(taus)
        for part in sampled_parts:
            draws += part.evaluate(taus)
        value += float(np.mean(draws))
        std_err = float(np.std(draws, ddof=1) / math.sqrt(draws.size))
    return CostEstimate(value=value, std_err=std_err)


def icx_dominates(a: HittingStats, b: HittingStats, t_grid) -> bool:
    """Empirical increasing-convex-order test: does a dominate b?

    True iff the residual curve of ``a`` stays above that of ``b`` and the
    means are ordered, both up to twice the combined pointwise standard
    errors (diagnostic slack; acceptance-grade checks use three).
    """
    t = np.asarray(t_grid, dtype=float)
    for stats in (a, b):
        if stats.n == 0:
            raise CostModelError("empty sample set")
    mean_tol = 2.0 * (a.std_err + b.std_err)
    if a.mean < b.mean - mean_tol:
        return False
    for ti in t:
        ra = np.maximum(a.samples - ti, 0.0)
        rb = np.maximum(b.samples - ti, 0.0)
        se_a = np.std(ra, ddof=1) / math.sqrt(a.n) if a.n > 1 else 0.0
        se_b = np.std(rb, ddof=1) / math.sqrt(b.n) if b.n > 1 else 0.0
        if np.mean(ra) < np.mean(rb) - 2.0 * (se_a + se_b):
            return False
    return True
