"""Domain types for the belief-diffusion persuasion model.

A binary state drives a Brownian fundamental; the induced posterior belief
is a martingale diffusion on (0, 1).  The sender embeds a terminal belief
distribution by stopping that diffusion, possibly after attenuating its
quadratic variation (garbling).  Everything here is an immutable value
type, safe to share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

MASS_TOL = 1e-12


class InvalidModelError(ValueError):
    """A model parameter or terminal law violates a structural invariant."""


@dataclass(frozen=True)
class ModelParams:
    """Drifts, volatility, prior and approval threshold of the belief diffusion.

    The derived signal-to-noise ratio k = (mu_h - mu_l) / sigma sets the
    speed of learning; the posterior diffuses as dp = k p (1-p) dW.
    """

    mu_h: float
    mu_l: float
    sigma: float
    p0: float
    p_bar: float

    def __post_init__(self) -> None:
        if not self.mu_h > self.mu_l:
            raise InvalidModelError(f"mu_h must exceed mu_l (got {self.mu_h} <= {self.mu_l})")
        if not self.sigma > 0:
            raise InvalidModelError(f"sigma must be positive (got {self.sigma})")
        if not 0.0 < self.p0 < 1.0:
            raise InvalidModelError(f"p0 must lie in (0,1) (got {self.p0})")
        if not 0.0 < self.p_bar < 1.0:
            raise InvalidModelError(f"p_bar must lie in (0,1) (got {self.p_bar})")
        if not self.p0 < self.p_bar:
            raise InvalidModelError(
                f"prior must sit below the approval threshold (p0={self.p0} >= p_bar={self.p_bar})"
            )

    @property
    def k(self) -> float:
        """Signal-to-noise ratio (mu_h - mu_l) / sigma."""
        return (self.mu_h - self.mu_l) / self.sigma

    def with_snr(self, kappa: float) -> "ModelParams":
        """Rescale sigma so the signal-to-noise ratio equals ``kappa``."""
        if not kappa > 0:
            raise InvalidModelError(f"signal-to-noise ratio must be positive (got {kappa})")
        return ModelParams(
            mu_h=self.mu_h,
            mu_l=self.mu_l,
            sigma=(self.mu_h - self.mu_l) / kappa,
            p0=self.p0,
            p_bar=self.p_bar,
        )

    def to_json_dict(self) -> dict:
        return {
            "mu_h": self.mu_h,
            "mu_l": self.mu_l,
            "sigma": self.sigma,
            "p0": self.p0,
            "p_bar": self.p_bar,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelParams":
        try:
            return cls(
                mu_h=float(d["mu_h"]),
                mu_l=float(d["mu_l"]),
                sigma=float(d["sigma"]),
                p0=float(d["p0"]),
                p_bar=float(d["p_bar"]),
            )
        except KeyError as exc:
            raise InvalidModelError(f"model config missing key {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, s: str) -> "ModelParams":
        return cls.from_json_dict(json.loads(s))


@dataclass(frozen=True)
class TerminalLaw:
    """A finitely supported distribution over posterior beliefs.

    Atoms are (belief, mass) pairs with strictly increasing beliefs in
    [0, 1] and masses summing to one.  Bayes plausibility (mean equals the
    prior) is checked against a ModelParams via :func:`validate_law`.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise InvalidModelError("terminal law needs at least one atom")
        beliefs = [b for b, _ in self.atoms]
        masses = [m for _, m in self.atoms]
        for b in beliefs:
            if not 0.0 <= b <= 1.0:
                raise InvalidModelError(f"belief {b} outside [0,1]")
        if any(b2 <= b1 for b1, b2 in zip(beliefs, beliefs[1:])):
            raise InvalidModelError(f"beliefs must be strictly increasing, got {beliefs}")
        for m in masses:
            if not 0.0 < m <= 1.0:
                raise InvalidModelError(f"atom mass {m} outside (0,1]")
        total = math.fsum(masses)
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidModelError(f"masses sum to {total}, off by {total - 1.0}")
        if total != 1.0:
            # rounding drift within tolerance: renormalize exactly
            object.__setattr__(
                self, "atoms", tuple((b, m / total) for b, m in zip(beliefs, masses))
            )

    @property
    def beliefs(self) -> np.ndarray:
        return np.array([b for b, _ in self.atoms])

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms])

    @property
    def mean(self) -> float:
        return math.fsum(b * m for b, m in self.atoms)

    @property
    def is_point_mass(self) -> bool:
        return len(self.atoms) == 1

    def to_json_dict(self) -> dict:
        return {"atoms": [[b, m] for b, m in self.atoms]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "TerminalLaw":
        try:
            atoms = tuple((float(b), float(m)) for b, m in d["atoms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidModelError(f"bad terminal-law payload: {exc}") from exc
        return cls(atoms=atoms)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, s: str) -> "TerminalLaw":
        return cls.from_json_dict(json.loads(s))


@dataclass(frozen=True)
class GarblingPolicy:
    """State-dependent attenuation phi(p) in [0, 1] of the posterior's
    quadratic variation.

    phi == 1 is full transparency (no garbling); smaller phi slows the
    belief clock at that belief level.  Supported forms: a constant, a
    piecewise-constant profile on belief intervals, or a tabulated grid
    with linear interpolation.
    """

    kind: str  # "constant" | "piecewise" | "tabulated"
    values: tuple[float, ...]
    breakpoints: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "piecewise", "tabulated"):
            raise InvalidModelError(f"unknown garbling kind {self.kind!r}")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise InvalidModelError(f"attenuation values must lie in [0,1], got {self.values}")
        if self.kind == "constant" and len(self.values) != 1:
            raise InvalidModelError("constant garbling takes exactly one value")
        if self.kind == "piecewise":
            if len(self.breakpoints) != len(self.values) + 1:
                raise InvalidModelError("piecewise garbling needs len(values)+1 breakpoints")
            if self.breakpoints[0] != 0.0 or self.breakpoints[-1] != 1.0:
                raise InvalidModelError("piecewise breakpoints must span [0,1]")
            if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
                raise InvalidModelError("piecewise breakpoints must be strictly increasing")
        if self.kind == "tabulated":
            if len(self.breakpoints) != len(self.values) or len(self.values) < 2:
                raise InvalidModelError("tabulated garbling needs matching grids of length >= 2")
            if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
                raise InvalidModelError("tabulated grid must be strictly increasing")

    @classmethod
    def none(cls) -> "GarblingPolicy":
        """Full transparency: phi == 1 everywhere."""
        return cls(kind="constant", values=(1.0,))

    @classmethod
    def constant(cls, value: float) -> "GarblingPolicy":
        return cls(kind="constant", values=(float(value),))

    @classmethod
    def piecewise(cls, breakpoints, values) -> "GarblingPolicy":
        return cls(
            kind="piecewise",
            values=tuple(float(v) for v in values),
            breakpoints=tuple(float(b) for b in breakpoints),
        )

    @classmethod
    def tabulated(cls, beliefs, values) -> "GarblingPolicy":
        return cls(
            kind="tabulated",
            values=tuple(float(v) for v in values),
            breakpoints=tuple(float(b) for b in beliefs),
        )

    @property
    def is_identity(self) -> bool:
        return self.kind == "constant" and self.values[0] == 1.0

    def __call__(self, p):
        """Evaluate phi at beliefs ``p`` (scalar or array)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "constant":
            return np.full_like(p, self.values[0]) if p.ndim else float(self.values[0])
        if self.kind == "piecewise":
            # right-open cells [b_i, b_{i+1}); the last cell is closed at 1
            idx = np.clip(
                np.searchsorted(self.breakpoints, p, side="right") - 1, 0, len(self.values) - 1
            )
            out = np.asarray(self.values)[idx]
        else:
            out = np.interp(p, self.breakpoints, self.values)
        return out if p.ndim else float(out)

    def to_json_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.values[0]}
        if self.kind == "piecewise":
            return {
                "kind": "piecewise",
                "breakpoints": list(self.breakpoints),
                "values": list(self.values),
            }
        return {"kind": "tabulated", "beliefs": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "GarblingPolicy":
        kind = d.get("kind")
        if kind == "constant":
            return cls.constant(d["value"])
        if kind == "piecewise":
            return cls.piecewise(d["breakpoints"], d["values"])
        if kind == "tabulated":
            return cls.tabulated(d["beliefs"], d["values"])
        raise InvalidModelError(f"unknown garbling kind {kind!r}")


@dataclass
class HittingStats:
    """Monte Carlo summary of a stopping time."""

    samples: np.ndarray
    success_indicator: np.ndarray

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        self.success_indicator = np.asarray(self.success_indicator, dtype=bool)
        if self.samples.size == 0:
            raise InvalidModelError("empty sample set")
        if self.samples.size != self.success_indicator.size:
            raise InvalidModelError("samples and success indicators differ in length")
        if np.any(self.samples < 0):
            raise InvalidModelError("stopping-time samples must be nonnegative")

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def std_err(self) -> float:
        if self.n < 2:
            return 0.0
        return float(np.std(self.samples, ddof=1) / math.sqrt(self.n))

    @property
    def upper_hit_fraction(self) -> float:
        return float(np.mean(self.success_indicator))


@dataclass(frozen=True)
class LawReport:
    """Outcome of validating a terminal law against model parameters."""

    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def make_two_atom_law(params: ModelParams, p_success: float) -> TerminalLaw:
    """Binary terminal law with mass ``p_success`` at the approval threshold.

    The lower atom is pinned down by the martingale constraint:
    lower = (p0 - p_success * p_bar) / (1 - p_success).  ``p_success`` must
    lie in [0, p0/p_bar]; the upper end places the lower atom at belief 0,
    and p_success = 0 degenerates to a point mass at the prior.
    """
    p = float(p_success)
    p_max = params.p0 / params.p_bar
    if p < 0.0 or p >= 1.0 or p > p_max + 1e-15:
        raise InvalidModelError(
            f"p_success={p} outside feasible range [0, {p_max}] "
            "(would need negative mass or a lower atom below 0)"
        )
    if p == 0.0:
        return TerminalLaw(atoms=((params.p0, 1.0),))
    lower = (params.p0 - p * params.p_bar) / (1.0 - p)
    lower = max(lower, 0.0)  # guard 1e-16-scale negatives at the feasibility edge
    return TerminalLaw(atoms=((lower, 1.0 - p), (params.p_bar, p)))


def success_probability(params: ModelParams, lower: float) -> float:
    """Mass the two-atom law with lower atom ``lower`` puts on the threshold."""
    if lower == params.p0:
        return 0.0
    return (params.p0 - lower) / (params.p_bar - lower)


def validate_law(law: TerminalLaw, params: ModelParams) -> LawReport:
    """Report which terminal-law invariants fail, with numeric discrepancies."""
    violations: list[str] = []
    total = math.fsum(m for _, m in law.atoms)
    if abs(total - 1.0) > MASS_TOL:
        violations.append(f"masses sum to {total} (off by {total - 1.0:.3e})")
    mean = law.mean
    if abs(mean - params.p0) > MASS_TOL:
        violations.append(f"mean {mean} != prior {params.p0} (off by {mean - params.p0:.3e})")
    beliefs = [b for b, _ in law.atoms]
    if any(b2 <= b1 for b1, b2 in zip(beliefs, beliefs[1:])):
        violations.append(f"support not strictly increasing: {beliefs}")
    if any(not 0.0 <= b <= 1.0 for b in beliefs):
        violations.append(f"support leaves [0,1]: {beliefs}")
    return LawReport(ok=not violations, violations=tuple(violations))
