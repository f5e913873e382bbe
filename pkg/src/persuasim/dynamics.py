"""Simulation of the belief diffusion and its garbled variants.

The primary simulator works in natural scale: a driving Brownian path is
run until it exits the belief interval, and calendar time is recovered by
integrating 1 / (phi(p) * sigma0(p)^2) along the path.  Garbling enters
only through that integrand, so a garbled clock and the transparent clock
can be read off the identical driving path, which makes the pathwise
comparison between them exact rather than statistical.  A conventional
Euler scheme in calendar time (``direct_euler_check``) exists purely as an
independent oracle.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import GarblingPolicy, HittingStats, InvalidModelError, ModelParams
from .rng import STREAM_EULER, STREAM_NATURAL_SCALE, PathStreams, path_generator

_BLOCK_MIN = 256
_BLOCK_MAX = 1 << 17
_CENSOR_LIMIT = 0.01


class SimulationError(RuntimeError):
    """Raised when a run produces unusably many censored paths."""


@dataclass(frozen=True)
class SimConfig:
    """Knobs of a Monte Carlo run.

    ``du`` is the natural-scale step of the driving Brownian path (the
    Euler oracle reuses it as its calendar step).  ``max_u`` caps the
    natural-scale clock; paths that exceed it are censored.  When
    ``bridge_correction`` is on, within-step boundary crossings are
    resolved by the Brownian-bridge crossing probability, which removes
    the O(sqrt(du)) late-detection bias of discrete monitoring.
    """

    n_paths: int
    du: float
    max_u: float
    seed: int
    bridge_correction: bool = True

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise InvalidModelError(f"n_paths must be >= 1 (got {self.n_paths})")
        if not self.du > 0:
            raise InvalidModelError(f"du must be positive (got {self.du})")
        if not (self.max_u > 0 and math.isfinite(self.max_u)):
            raise InvalidModelError(f"max_u must be positive and finite (got {self.max_u})")
        if not 0 <= self.seed < 2**64:
            raise InvalidModelError(f"seed must fit in 64 unsigned bits (got {self.seed})")

    def to_json_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "du": self.du,
            "max_u": self.max_u,
            "seed": self.seed,
            "bridge_correction": self.bridge_correction,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SimConfig":
        try:
            return cls(
                n_paths=int(d["n_paths"]),
                du=float(d["du"]),
                max_u=float(d["max_u"]),
                seed=int(d["seed"]),
                bridge_correction=bool(d.get("bridge_correction", True)),
            )
        except KeyError as exc:
            raise InvalidModelError(f"sim config missing key {exc}") from exc


@dataclass(frozen=True, slots=True)
class PathOutcome:
    """One stopped path: exit boundary, calendar time, natural-scale clock."""

    path_index: int
    terminal_belief: float
    tau: float
    u_exit: float


@dataclass
class CoupledComparison:
    """Garbled vs transparent clocks read off identical driving paths."""

    tau_garbled: np.ndarray
    tau_clean: np.ndarray
    terminal_belief: np.ndarray
    u_exit: np.ndarray

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.tau_garbled.tolist(), self.tau_clean.tolist()))


def sigma0(p, params: ModelParams):
    """Volatility of the transparent posterior: k * p * (1 - p).

    Zero at (and beyond) the absorbing endpoints 0 and 1.
    """
    p_arr = np.asarray(p, dtype=float)
    out = np.where((p_arr <= 0.0) | (p_arr >= 1.0), 0.0, params.k * p_arr * (1.0 - p_arr))
    return out if p_arr.ndim else float(out)


def _check_interval(params: ModelParams, lower: float, upper: float) -> None:
    if lower <= 0.0 or upper >= 1.0:
        raise InvalidModelError(
            f"boundaries touching the absorbing endpoints give infinite expected exit "
            f"time and are not simulated (got [{lower}, {upper}])"
        )
    if not lower < params.p0 < upper:
        raise InvalidModelError(
            f"prior {params.p0} must lie strictly inside [{lower}, {upper}]"
        )


def _integrand_factory(params: ModelParams, garbling: GarblingPolicy, include_clean: bool):
    """Vectorized time integrands 1/(phi * sigma0^2), sharing the sigma0 work."""
    k2 = params.k**2
    identity = garbling.is_identity
    const = garbling.values[0] if garbling.kind == "constant" else None

    def values(pc: np.ndarray) -> tuple[np.ndarray, ...]:
        q = pc * (1.0 - pc)
        base = 1.0 / (k2 * q * q)
        if identity:
            return (base, base) if include_clean else (base,)
        if const is not None:
            garbled = base / const if const > 0.0 else np.full_like(base, np.inf)
        else:
            with np.errstate(divide="ignore"):
                garbled = base / garbling(pc)
        return (garbled, base) if include_clean else (garbled,)

    return values


def _walk_path(rg, params: ModelParams, lower: float, upper: float, cfg: SimConfig,
               integrands, n_int: int):
    """Run one driving Brownian path until it exits [lower, upper].

    Returns (terminal_belief, u_exit, taus, censored); taus holds one
    calendar time per integrand, all accumulated along the same path by
    the trapezoidal rule in the natural-scale clock.

    Bridge crossings can only occur on steps with an endpoint within a few
    step widths of a boundary (the crossing probability decays like
    exp(-2 a b / du)), so the correction draws uniforms and exponentials
    for those steps alone.  The candidate set depends only on the driving
    path, which keeps random-stream consumption reproducible.
    """
    du = cfg.du
    sqrt_du = math.sqrt(du)
    expected_steps = (params.p0 - lower) * (upper - params.p0) / du
    # principal decay rate of the residual exit time, per unit natural-scale clock
    lam1 = math.pi**2 / (2.0 * (upper - lower) ** 2)
    block = int(min(max(1.2 * expected_steps + 64, _BLOCK_MIN), _BLOCK_MAX))
    block_next = int(min(max(1.3 / (lam1 * du), _BLOCK_MIN), _BLOCK_MAX))
    thr = 4.8 * sqrt_du  # both step endpoints beyond thr => crossing prob < exp(-46)

    carry_p = params.p0
    carry_near = (upper - carry_p < thr) or (carry_p - lower < thr)
    carry_f = [float(arr[0]) for arr in integrands(np.array([params.p0]))]
    taus = [0.0] * n_int
    steps_done = 0
    max_steps = int(math.ceil(cfg.max_u / du))
    neg2_du = -2.0 / du

    while steps_done < max_steps:
        n = min(block, max_steps - steps_done)
        p = np.cumsum(rg.standard_normal(n))
        p *= sqrt_du
        p += carry_p

        outside = (p >= upper) | (p <= lower)
        j_pos = int(np.argmax(outside)) if outside.any() else -1
        m = j_pos + 1 if j_pos >= 0 else n

        j_exit = j_pos
        exit_up = bool(p[j_pos] >= upper) if j_pos >= 0 else False
        if cfg.bridge_correction:
            d_up = upper - p[:m]
            d_lo = p[:m] - lower
            near_pt = (d_up < thr) | (d_lo < thr)
            limit = j_pos if j_pos >= 0 else m  # the positional exit step needs no bridge
            step_near = np.empty(limit, dtype=bool)
            if limit > 0:
                step_near[0] = carry_near or near_pt[0]
                np.logical_or(near_pt[: limit - 1], near_pt[1:limit], out=step_near[1:])
            idx = np.flatnonzero(step_near)
            if idx.size:
                prev_up = np.where(idx > 0, d_up[idx - 1], upper - carry_p)
                prev_lo = np.where(idx > 0, d_lo[idx - 1], carry_p - lower)
                u = rg.random(idx.size)
                trig_up = u < np.exp(neg2_du * prev_up * d_up[idx])
                trig = trig_up | (u > 1.0 - np.exp(neg2_du * prev_lo * d_lo[idx]))
                if trig.any():
                    pos = int(np.argmax(trig))
                    j_exit = int(idx[pos])
                    exit_up = bool(trig_up[pos])
            carry_near = bool(near_pt[-1]) if j_exit < 0 else False

        upto = j_exit + 1 if j_exit >= 0 else n
        pc = np.clip(p[:upto], lower, upper)
        f_vals = integrands(pc)
        last = upto - 1
        for i in range(n_int):
            # telescoped trapezoid: carry + 2*interior + endpoint, all times du/2
            f = f_vals[i]
            taus[i] += 0.5 * du * (carry_f[i] + 2.0 * float(np.sum(f[:last])) + float(f[last]))
            carry_f[i] = float(f[last])

        if j_exit >= 0:
            u_exit = (steps_done + j_exit + 1) * du
            terminal = upper if exit_up else lower
            return terminal, u_exit, taus, False

        steps_done += n
        carry_p = float(p[-1])
        block = block_next

    return math.nan, math.nan, taus, True


def _run_paths(params, lower, upper, cfg, integrands, n_int, n_workers):
    results: list = [None] * cfg.n_paths

    def run_chunk(indices) -> None:
        streams = PathStreams(cfg.seed, STREAM_NATURAL_SCALE)
        for i in indices:
            rg = streams.for_path(i)
            results[i] = _walk_path(rg, params, lower, upper, cfg, integrands, n_int)

    if n_workers <= 1:
        run_chunk(range(cfg.n_paths))
    else:
        chunks = [range(w, cfg.n_paths, n_workers) for w in range(n_workers)]
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run_chunk, chunks))
    return results


def _censor_check(cfg: SimConfig, n_censored: int) -> None:
    if n_censored == 0:
        return
    frac = n_censored / cfg.n_paths
    if frac > _CENSOR_LIMIT:
        raise SimulationError(
            f"{n_censored}/{cfg.n_paths} paths censored at max_u={cfg.max_u} "
            f"({100 * frac:.2f}% > {100 * _CENSOR_LIMIT:.0f}% limit)"
        )
    warnings.warn(
        f"{n_censored} of {cfg.n_paths} paths censored at max_u={cfg.max_u} and excluded",
        RuntimeWarning,
        stacklevel=3,
    )


def simulate_exit(params: ModelParams, lower: float, upper: float,
                  garbling: GarblingPolicy, cfg: SimConfig,
                  n_workers: int = 1) -> list[PathOutcome]:
    """Exit times of the (possibly garbled) posterior from [lower, upper].

    Each path runs an independent driving Brownian motion from the prior in
    natural scale and converts the exit clock to calendar time through the
    attenuated volatility.  Terminal beliefs land exactly on a boundary.
    Censored paths (natural-scale clock beyond ``max_u``) are excluded with
    a warning; more than 1% of them is an error.
    """
    _check_interval(params, lower, upper)
    if cfg.du > (upper - lower) ** 2 / 100.0:
        warnings.warn(
            f"du={cfg.du} is coarse for interval width {upper - lower}; "
            f"recommend du <= {(upper - lower) ** 2 / 100.0:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    integrands = _integrand_factory(params, garbling, include_clean=False)
    raw = _run_paths(params, lower, upper, cfg, integrands, 1, n_workers)
    outcomes = []
    n_censored = 0
    for i, (terminal, u_exit, taus, censored) in enumerate(raw):
        if censored:
            n_censored += 1
            continue
        outcomes.append(PathOutcome(i, terminal, taus[0], u_exit))
    _censor_check(cfg, n_censored)
    return outcomes


def coupled_no_garbling_comparison(params: ModelParams, lower: float, upper: float,
                                   garbling: GarblingPolicy, cfg: SimConfig,
                                   n_workers: int = 1) -> CoupledComparison:
    """Garbled and transparent calendar times on identical driving paths.

    The driving path, exit step and terminal belief are shared by
    construction; only the time integrand differs.  Since phi <= 1 the
    garbled integrand dominates pointwise, so tau_garbled >= tau_clean
    holds on every path exactly.
    """
    _check_interval(params, lower, upper)
    integrands = _integrand_factory(params, garbling, include_clean=True)
    raw = _run_paths(params, lower, upper, cfg, integrands, 2, n_workers)
    kept = [(t, u, taus) for (t, u, taus, censored) in raw if not censored]
    _censor_check(cfg, cfg.n_paths - len(kept))
    return CoupledComparison(
        tau_garbled=np.array([taus[0] for _, _, taus in kept]),
        tau_clean=np.array([taus[1] for _, _, taus in kept]),
        terminal_belief=np.array([t for t, _, _ in kept]),
        u_exit=np.array([u for _, u, _ in kept]),
    )


def stats_from_outcomes(outcomes: list[PathOutcome], upper: float) -> HittingStats:
    """Summarize simulated exits as hitting-time statistics."""
    return HittingStats(
        samples=np.array([o.tau for o in outcomes]),
        success_indicator=np.array([o.terminal_belief == upper for o in outcomes]),
    )


def residual_curve(stats: HittingStats, t_grid) -> np.ndarray:
    """Empirical residual expected time E[(tau - t)+] on a time grid."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise InvalidModelError("empty time grid")
    if np.any(t < 0) or (t.size > 1 and np.any(np.diff(t) <= 0)):
        raise InvalidModelError("t_grid must be nonnegative and increasing")
    return np.array([np.mean(np.maximum(stats.samples - ti, 0.0)) for ti in t])


def residual_profile(stats: HittingStats, t_grid) -> tuple[np.ndarray, np.ndarray]:
    """Residual curve together with its pointwise standard errors."""
    t = np.asarray(t_grid, dtype=float)
    curve = np.empty(t.size)
    se = np.empty(t.size)
    n = stats.n
    for idx, ti in enumerate(t):
        excess = np.maximum(stats.samples - ti, 0.0)
        curve[idx] = np.mean(excess)
        se[idx] = np.std(excess, ddof=1) / math.sqrt(n) if n > 1 else 0.0
    return curve, se


@dataclass
class EulerCheckResult:
    """Output of the calendar-time Euler oracle."""

    stats: HittingStats
    snapshot_means: tuple[float, ...]


def direct_euler_check(params: ModelParams, lower: float, upper: float,
                       garbling: GarblingPolicy, cfg: SimConfig,
                       snapshot_times: tuple[float, ...] = ()) -> EulerCheckResult:
    """Euler-Maruyama oracle for the belief SDE dp = sqrt(phi) sigma0(p) dB.

    Steps all paths together in calendar time with dt = du, detecting
    boundary crossings (with the optional bridge correction) and censoring
    a path once its accumulated quadratic variation exceeds ``max_u``.
    ``snapshot_times`` records the cross-path mean belief at fixed
    horizons, with absorbed paths held at their boundary (a martingale
    check).  Exists only to cross-validate the time-change simulator.
    """
    _check_interval(params, lower, upper)
    dt = cfg.du
    sqrt_dt = math.sqrt(dt)
    n = cfg.n_paths
    rg = path_generator(cfg.seed, 0, STREAM_EULER)
    k2 = params.k**2

    p = np.full(n, params.p0)
    alive = np.arange(n)
    tau = np.zeros(n)
    terminal = np.full(n, math.nan)
    qv = np.zeros(n)
    censored = np.zeros(n, dtype=bool)

    snapshots = sorted(set(float(t) for t in snapshot_times))
    snap_means: list[float] = []
    snap_idx = 0

    step = 0
    while alive.size:
        step += 1
        t_now = step * dt
        pa = p[alive]
        var_rate = k2 * (pa * (1.0 - pa)) ** 2 * garbling(pa)
        vol = np.sqrt(var_rate)
        p_new = pa + vol * sqrt_dt * rg.standard_normal(alive.size)

        hit_up = p_new >= upper
        hit_lo = p_new <= lower
        if cfg.bridge_correction:
            u12 = rg.random((alive.size, 2))
            inside = ~(hit_up | hit_lo)
            with np.errstate(divide="ignore", invalid="ignore"):
                denom = var_rate * dt
                prob_up = np.exp(-2.0 * (upper - pa) * (upper - p_new) / denom)
                prob_lo = np.exp(-2.0 * (pa - lower) * (p_new - lower) / denom)
            bridge_up = inside & (u12[:, 0] < prob_up)
            bridge_lo = inside & ~bridge_up & (u12[:, 1] < prob_lo)
            hit_up = hit_up | bridge_up
            hit_lo = hit_lo | bridge_lo

        qv_new = qv[alive] + var_rate * dt
        over = qv_new > cfg.max_u

        done = hit_up | hit_lo | over
        idx = alive[done]
        tau[idx] = t_now
        terminal[idx] = np.where(hit_up[done], upper, np.where(hit_lo[done], lower, math.nan))
        censored[alive[over & ~(hit_up | hit_lo)]] = True

        p[alive] = np.clip(p_new, lower, upper)
        p[alive[hit_up]] = upper
        p[alive[hit_lo]] = lower
        qv[alive] = qv_new
        alive = alive[~done]

        while snap_idx < len(snapshots) and t_now >= snapshots[snap_idx]:
            snap_means.append(float(np.mean(p)))
            snap_idx += 1

    while snap_idx < len(snapshots):
        snap_means.append(float(np.mean(p)))
        snap_idx += 1

    keep = ~censored
    _censor_check(cfg, int(np.sum(censored)))
    stats = HittingStats(samples=tau[keep], success_indicator=(terminal[keep] == upper))
    return EulerCheckResult(stats=stats, snapshot_means=tuple(snap_means))


def write_outcomes_csv(outcomes: list[PathOutcome], path) -> None:
    """Export path outcomes as CSV, round-trip exact for doubles."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("path_index,terminal_belief,tau,u_exit\n")
        for o in outcomes:
            fh.write(f"{o.path_index},{o.terminal_belief:.17g},{o.tau:.17g},{o.u_exit:.17g}\n")
