"""Net-utility model and search for the optimal number of speculative attempts.

Utility trades reliability against spend:

    U(r) = log_base( R(r) - R_min ) - theta * C * E[T](r)

R(r) is the strategy's PoCD, R_min the reference level a job must beat (by
default the PoCD with no speculation at all), E[T] the expected machine time
and C its unit price. U is -inf wherever R(r) <= R_min; the sentinel orders
below every finite utility and is never used in arithmetic.

U(r) is concave in r above a strategy-specific threshold Gamma, so the search
runs a gradient line search on the continuous relaxation starting at
ceil(Gamma), projects onto the neighbouring integers, and enumerates the
finitely many r below Gamma where no structure is guaranteed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytics import cost_for, pocd_clone, pocd_for
from .errors import DivergentMoment, InvalidWindow, SearchCapReached
from .model import JobSpec, StrategyConfig, StrategyKind

__all__ = ["UtilityConfig", "OptimizerParams", "OptimizationResult",
           "net_utility", "gamma_threshold", "optimize_r", "brute_force_r"]

NEG_INF = float("-inf")


@dataclass(frozen=True)
class UtilityConfig:
    """Knobs of the utility function.

    r_min_pocd left as None means "the job must beat running with no
    speculation", i.e. the clone PoCD at r = 0. theta = 0 makes U strictly
    increasing wherever it is finite, so no finite optimum exists.
    """

    theta: float = 1e-4
    price: float = 1.0
    r_min_pocd: float | None = None
    log_base: float = 10.0

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.price < 0:
            raise ValueError("price must be >= 0")
        if not self.log_base > 1.0:
            raise ValueError("log_base must exceed 1")

    def resolve_r_min(self, job: JobSpec) -> float:
        if self.r_min_pocd is not None:
            return self.r_min_pocd
        return pocd_clone(job, 0).value


@dataclass(frozen=True)
class OptimizerParams:
    """Line-search tuning: gradient tolerance eta, Armijo slope fraction
    alpha, backtracking shrink xi, and the hard search cap on r."""

    eta: float = 1e-6
    alpha: float = 0.3
    xi: float = 0.5
    r_cap: int = 200
    fd_step: float = 1e-4
    max_iters: int = 80


@dataclass(frozen=True)
class OptimizationResult:
    r_opt: int
    utility: float
    gamma: float
    pocd_at_opt: float
    cost_at_opt: float


def net_utility(job: JobSpec, strategy: StrategyConfig, r, cfg: UtilityConfig) -> float:
    """U(r) for one strategy; -inf when R(r) fails to beat R_min.

    r may be fractional: every closed form extends smoothly, which is what
    the optimizer's continuous relaxation differentiates.
    """
    r_min = cfg.resolve_r_min(job)
    pocd = pocd_for(job, strategy, r).value
    gap = pocd - r_min
    if gap <= 0.0:
        return NEG_INF
    cost = cost_for(job, strategy, r).expected_machine_time
    return math.log(gap) / math.log(cfg.log_base) - cfg.theta * cfg.price * cost


def gamma_threshold(job: JobSpec, strategy: StrategyConfig) -> float:
    """Smallest r beyond which U is concave in the continuous relaxation.

        clone      -log_{t_min/D}(N) / beta - 1
        s-restart   log_{t_min/(D-tau)}(D**beta / (N t_min**beta)) / beta
        s-resume    log_{(1-phi) t_min/(D-tau)}(D**beta / (N t_min**beta)) / beta - 1

    Each log base must lie strictly inside (0, 1): otherwise extra attempts
    cannot finish inside the window and speculation has no effect to analyze.
    """
    p, D, N = job.params, job.deadline, job.num_tasks
    kind = strategy.kind
    if kind is StrategyKind.CLONE:
        base = p.t_min / D
        return -math.log(N) / math.log(base) / p.beta - 1.0
    if kind is StrategyKind.S_RESTART:
        base = p.t_min / (D - strategy.tau_est)
    elif kind is StrategyKind.S_RESUME:
        base = (1.0 - strategy.phi_est) * p.t_min / (D - strategy.tau_est)
    else:
        raise ValueError(f"{kind.value} has no tunable r")
    if not 0.0 < base < 1.0:
        raise InvalidWindow(
            f"t_min-to-window ratio {base:.6g} not in (0, 1): "
            "speculative attempts cannot beat the deadline")
    arg = D ** p.beta / (N * p.t_min ** p.beta)
    gamma = math.log(arg) / math.log(base) / p.beta
    if kind is StrategyKind.S_RESUME:
        gamma -= 1.0
    return gamma


def _utility_or_neg_inf(job, strategy, r, cfg) -> float:
    """Treat r where a moment diverges or the window closes as worthless."""
    try:
        return net_utility(job, strategy, r, cfg)
    except (DivergentMoment, InvalidWindow):
        return NEG_INF


def _gradient(u, x: float, lower: float, h: float) -> float:
    hi, lo = u(x + h), u(x - h) if x - h >= lower else NEG_INF
    if math.isfinite(hi) and math.isfinite(lo):
        return (hi - lo) / (2.0 * h)
    here = u(x)
    if math.isfinite(hi) and math.isfinite(here):
        return (hi - here) / h
    if math.isfinite(lo) and math.isfinite(here):
        return (here - lo) / h
    return float("nan")


def optimize_r(job: JobSpec, strategy: StrategyConfig, cfg: UtilityConfig,
               params: OptimizerParams = OptimizerParams()) -> OptimizationResult:
    """argmax_r U(r) over integers in [0, r_cap]; ties go to the smaller r.

    Phase 1 runs backtracking gradient ascent on the continuous relaxation
    from max(0, ceil(Gamma)), then walks the integer lattice around the
    continuous optimum (concavity makes the local peak global there). Phase 2
    enumerates the integers below ceil(Gamma). Raises SearchCapReached when U
    has no finite maximum: immediately if theta * price = 0 (U is then
    strictly increasing), and whenever the ascent leaves [0, r_cap].
    """
    if cfg.theta * cfg.price == 0.0:
        raise SearchCapReached(
            "theta * price = 0: utility increases in r without bound")
    gamma = gamma_threshold(job, strategy)
    ceil_gamma = math.ceil(gamma)
    lower = max(0, ceil_gamma)
    if lower > params.r_cap:
        raise SearchCapReached(
            f"concavity threshold {gamma:.3g} beyond r_cap {params.r_cap}")

    seen: dict[int, float] = {}

    def u_int(r: int) -> float:
        if r not in seen:
            seen[r] = _utility_or_neg_inf(job, strategy, r, cfg)
        return seen[r]

    def u_cont(x: float) -> float:
        return _utility_or_neg_inf(job, strategy, x, cfg)

    # Advance past any leading -inf plateau (R(r) <= R_min at small r).
    start = lower
    while start < params.r_cap and u_int(start) == NEG_INF:
        start += 1

    if u_int(start) > NEG_INF:
        x = float(start)
        ux = u_cont(x)
        for _ in range(params.max_iters):
            g = _gradient(u_cont, x, float(lower), params.fd_step)
            if not math.isfinite(g) or abs(g) <= params.eta:
                break
            eps = 1.0
            while eps > 1e-12:
                # candidates are evaluated inside [lower, r_cap]; the raw
                # step can land far outside the formulas' domain
                cand_x = min(max(x + eps * g, float(lower)), float(params.r_cap))
                cand = u_cont(cand_x)
                if cand >= ux + params.alpha * eps * g * g:
                    break
                eps *= params.xi
            x_new = x + eps * g
            if x_new > params.r_cap:
                raise SearchCapReached(
                    f"utility still increasing at r_cap = {params.r_cap}; "
                    "is theta * price positive?")
            x_new = max(x_new, float(lower))
            if x_new == x:
                break
            x, ux = x_new, u_cont(x_new)

        r = max(lower, min(params.r_cap, math.floor(x)))
        if u_int(min(r + 1, params.r_cap)) > u_int(r):
            r = min(r + 1, params.r_cap)
        while r + 1 <= params.r_cap and u_int(r + 1) > u_int(r):
            r += 1
        while r - 1 >= lower and u_int(r - 1) >= u_int(r):
            r -= 1

    for rr in range(0, min(ceil_gamma, params.r_cap + 1)):
        u_int(rr)
    if 0 not in seen:
        u_int(0)

    best_r = min(seen, key=lambda r: (-seen[r], r))
    return _result_at(job, strategy, best_r, seen[best_r], gamma)


def brute_force_r(job: JobSpec, strategy: StrategyConfig, cfg: UtilityConfig,
                  r_max: int = 200) -> OptimizationResult:
    """Reference argmax by full enumeration of r in 0..r_max."""
    gamma = gamma_threshold(job, strategy)
    best_r, best_u = 0, NEG_INF
    for r in range(r_max + 1):
        u = _utility_or_neg_inf(job, strategy, r, cfg)
        if u > best_u:
            best_r, best_u = r, u
    return _result_at(job, strategy, best_r, best_u, gamma)


def _result_at(job, strategy, r, utility, gamma) -> OptimizationResult:
    try:
        pocd = pocd_for(job, strategy, r).value
        cost = cost_for(job, strategy, r).expected_machine_time
    except (DivergentMoment, InvalidWindow):
        pocd, cost = float("nan"), float("nan")
    return OptimizationResult(r_opt=r, utility=utility, gamma=gamma,
                              pocd_at_opt=pocd, cost_at_opt=cost)
