"""Closed-form completion probability and machine-time cost for each strategy.

A job of N independent tasks meets its deadline D when every task does. Each
task runs one original attempt plus, depending on the strategy, r speculative
ones, so the probability of completion before the deadline (PoCD) is
(1 - q)**N with q the per-task failure probability, and the expected machine
time is N times the per-task expectation. The three strategies differ in when
speculative attempts start and in whether the original survives detection:

  clone      r extra copies start with the original; at tau_kill all but the
             best-progress attempt are killed.
  s-restart  a straggling original detected at tau_est keeps running while r
             fresh attempts start; at tau_kill only the best attempt survives.
  s-resume   the straggling original is killed at tau_est and r+1 attempts
             resume from its checkpointed fraction phi_est.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (DivergentMoment, InvalidDeadline, InvalidWindow,
                     QuadratureFailure)
from .model import JobSpec, StrategyConfig, StrategyKind, truncated_mean

__all__ = [
    "PoCDResult", "CostResult", "InequalityCheck", "ComparisonReport",
    "pocd_clone", "pocd_s_restart", "pocd_s_resume",
    "cost_clone", "cost_s_restart", "cost_s_resume", "restart_tail_integral",
    "pocd_for", "cost_for", "compare_strategies", "scan_clone_resume_crossover",
    "clone_resume_threshold",
]


@dataclass(frozen=True)
class PoCDResult:
    """Probability that the whole job finishes by its deadline."""

    value: float
    per_task_failure: float


@dataclass(frozen=True)
class CostResult:
    """Expected machine time of the job and its price at the job's VM rate."""

    expected_machine_time: float
    expected_dollars: float


@dataclass(frozen=True)
class InequalityCheck:
    """Outcome of one strategy-ordering comparison."""

    name: str
    holds: bool
    precondition_met: bool


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side PoCD of the three strategies at a common r."""

    r: int
    pocd_clone: float
    pocd_restart: float
    pocd_resume: float
    ordering: tuple[InequalityCheck, ...]
    clone_vs_resume_threshold: float
    crossover_scan: int | None


def _check_deadline(job: JobSpec) -> None:
    if job.deadline <= job.params.t_min:
        raise InvalidDeadline(
            f"deadline {job.deadline} <= t_min {job.params.t_min}")


def _check_window(job: JobSpec, tau_est: float, slack: float) -> None:
    """A fresh attempt launched at tau_est needs at least `slack` time."""
    if tau_est < 0 or tau_est >= job.deadline:
        raise InvalidWindow(f"tau_est {tau_est} outside [0, deadline)")
    if job.deadline - tau_est < slack:
        raise InvalidWindow(
            f"deadline - tau_est < {slack}: speculative attempts cannot finish")


def _check_kill(tau_est: float, tau_kill: float, deadline: float, r) -> None:
    if r >= 1 and not tau_est < tau_kill <= deadline:
        raise InvalidWindow(
            f"tau_kill {tau_kill} must lie in (tau_est, deadline]")


def pocd_clone(job: JobSpec, r) -> PoCDResult:
    """PoCD with r clones: per-task failure (t_min/D)**(beta*(r+1)).

    A task fails only if all r+1 identically launched attempts exceed D.
    """
    _check_deadline(job)
    p = job.params
    failure = (p.t_min / job.deadline) ** (p.beta * (r + 1))
    return PoCDResult(value=(1.0 - failure) ** job.num_tasks,
                      per_task_failure=failure)


def pocd_s_restart(job: JobSpec, r, tau_est: float) -> PoCDResult:
    """PoCD when r fresh attempts start at tau_est for detected stragglers.

    Per-task failure: t_min**(beta*(r+1)) / (D**beta * (D - tau_est)**(beta*r)).
    The original must exceed D and each restart must exceed the remaining
    window D - tau_est.
    """
    _check_deadline(job)
    p, D = job.params, job.deadline
    if r >= 1:
        _check_window(job, tau_est, p.t_min)
    elif not 0 <= tau_est < D:
        raise InvalidWindow(f"tau_est {tau_est} outside [0, deadline)")
    # grouped so every base stays <= 1 once the window check passed; raw
    # t_min**(beta*(r+1)) overflows for large r
    failure = ((p.t_min / D) ** p.beta
               * (p.t_min / (D - tau_est)) ** (p.beta * r))
    return PoCDResult(value=(1.0 - failure) ** job.num_tasks,
                      per_task_failure=failure)


def pocd_s_resume(job: JobSpec, r, tau_est: float, phi_est: float) -> PoCDResult:
    """PoCD when r+1 attempts resume a fraction phi_est of finished work.

    Per-task failure:

        (1-phi)**(beta*(r+1)) * t_min**(beta*(r+2))
        -------------------------------------------
          D**beta * (D - tau_est)**(beta*(r+1))

    The window check applies at every r because detection always replaces the
    original with fresh attempts, and those can never finish inside a window
    shorter than t_min (resumed attempts never run faster than a minimal task).
    """
    _check_deadline(job)
    if not 0.0 <= phi_est < 1.0:
        raise ValueError(f"phi_est must lie in [0, 1), got {phi_est}")
    p, D = job.params, job.deadline
    _check_window(job, tau_est, p.t_min)
    # grouped so every base stays < 1 (window check gives D - tau >= t_min)
    failure = ((p.t_min / D) ** p.beta
               * ((1.0 - phi_est) * p.t_min / (D - tau_est)) ** (p.beta * (r + 1)))
    return PoCDResult(value=(1.0 - failure) ** job.num_tasks,
                      per_task_failure=failure)


def cost_clone(job: JobSpec, r, tau_kill: float) -> CostResult:
    """Expected machine time with r clones.

    Each of the r losing attempts is billed until tau_kill; the winner is the
    minimum of r+1 Pareto draws, whose mean needs beta*(r+1) > 1:

        N * [ r*tau_kill + t_min + t_min / (beta*(r+1) - 1) ]
    """
    _check_deadline(job)
    p = job.params
    _check_kill(0.0, tau_kill, job.deadline, r)
    nb = p.beta * (r + 1)
    if nb <= 1.0:
        raise DivergentMoment(
            f"beta*(r+1) = {nb} <= 1: expected winner time diverges")
    per_task = r * tau_kill + p.t_min + p.t_min / (nb - 1.0)
    total = job.num_tasks * per_task
    return CostResult(total, total * job.price_per_vm_sec)


def restart_tail_integral(job: JobSpec, r, tau_est: float) -> float:
    """Integral over the event that every attempt outlives the deadline window:

        I = integral_{D-tau_est}^{inf} (D/(w+tau_est))**beta * (t_min/w)**(beta*r) dw

    Substituting u = 1/w maps I onto a finite interval:

        I = D**beta * t_min**(beta*r) * integral_0^{1/(D-tau_est)}
                u**(beta*(r+1)-2) * (1 + tau_est*u)**(-beta) du

    The integrand's endpoint power u**(beta*(r+1)-2) is handled analytically:
    on [0, u0] with tau_est*u0 <= 1/2 the binomial series of (1+tau_est*u)**(-beta)
    integrates term by term with geometric convergence, and any remainder
    [u0, U] is smooth and handled by adaptive Simpson. Requires beta*(r+1) > 1,
    otherwise the integral itself diverges.
    """
    _check_deadline(job)
    p, D = job.params, job.deadline
    if not 0 <= tau_est < D:
        raise InvalidWindow(f"tau_est {tau_est} outside [0, deadline)")
    a = p.beta * (r + 1) - 2.0
    if a <= -1.0:
        raise QuadratureFailure(
            f"beta*(r+1) = {p.beta * (r + 1)} <= 1: tail integral diverges")
    upper = 1.0 / (D - tau_est)
    u0 = upper if tau_est == 0.0 else min(upper, 0.5 / tau_est)
    br = p.beta * r
    # t_min**(beta*r) is folded into (t_min*u)**(beta*r) <= 1 so the prefactor
    # cannot overflow at large r; a + 1 - beta*r = beta - 1
    power0 = (p.t_min * u0) ** br * u0 ** (p.beta - 1.0)
    head = _binomial_head(p.beta, tau_est, a, u0, power0)
    body = 0.0
    if u0 < upper:
        f = lambda u: ((p.t_min * u) ** br * u ** (p.beta - 2.0)
                       * (1.0 + tau_est * u) ** (-p.beta))
        body = _adaptive_simpson(f, u0, upper, rel_tol=1e-10)
    return D ** p.beta * (head + body)


def _binomial_head(beta: float, tau: float, a: float, u0: float,
                   power: float) -> float:
    """integral_0^{u0} scale * u**a (1+tau*u)**(-beta) du by term-wise
    integration; the caller passes power = scale * u0**(a+1)."""
    acc = 0.0
    coeff = 1.0              # binomial coefficient C(-beta, k) * tau**k
    for k in range(500):
        term = coeff * power / (a + k + 1.0)
        acc += term
        if abs(term) <= 1e-17 * abs(acc) or coeff == 0.0:
            return acc
        coeff *= -(beta + k) / (k + 1.0) * tau
        power *= u0
    raise QuadratureFailure("series head failed to converge in 500 terms")


def _adaptive_simpson(f, a: float, b: float, rel_tol: float,
                      max_depth: int = 60) -> float:
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = rel_tol * max(abs(whole), 1e-300)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth >= max_depth:
            raise QuadratureFailure(
                f"adaptive refinement exceeded depth {max_depth}")
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def cost_s_restart(job: JobSpec, r, tau_est: float, tau_kill: float) -> CostResult:
    """Expected machine time under restart-based speculation.

    Conditioning on whether the original meets the deadline:

        E = N * [ E(T | T<=D) P(T<=D) + E(T | T>D) P(T>D) ]

    Non-stragglers cost their truncated mean. For a straggler with r >= 1,
    machine time decomposes into tau_est for the shared detection window,
    r*(tau_kill - tau_est) for the killed attempts, and the winner

        E(W) = t_min/(beta*r - 1)
             - t_min**(beta*r) / ((beta*r - 1)*(D - tau_est)**(beta*r - 1))
             + restart_tail_integral + t_min.

    With r = 0 the straggler simply runs out: E(T | T>D) = D*beta/(beta-1).
    Requires beta > 1, and beta*r > 1 when r >= 1.
    """
    _check_deadline(job)
    p, D = job.params, job.deadline
    if p.beta <= 1.0:
        raise DivergentMoment(f"beta = {p.beta} <= 1: mean execution time diverges")
    if r >= 1:
        _check_window(job, tau_est, p.t_min)
        _check_kill(tau_est, tau_kill, D, r)
    elif not 0 <= tau_est < D:
        raise InvalidWindow(f"tau_est {tau_est} outside [0, deadline)")
    prob_late = (p.t_min / D) ** p.beta
    finish_early = truncated_mean(p, D)
    if r > 0:
        br = p.beta * r
        if br <= 1.0:
            raise DivergentMoment(
                f"beta*r = {br} <= 1: straggler winner time diverges")
        winner = (p.t_min / (br - 1.0)
                  - p.t_min * (p.t_min / (D - tau_est)) ** (br - 1.0) / (br - 1.0)
                  + restart_tail_integral(job, r, tau_est)
                  + p.t_min)
        late = tau_est + r * (tau_kill - tau_est) + winner
    else:
        late = D * p.beta / (p.beta - 1.0)
    per_task = finish_early * (1.0 - prob_late) + late * prob_late
    total = job.num_tasks * per_task
    return CostResult(total, total * job.price_per_vm_sec)


def cost_s_resume(job: JobSpec, r, tau_est: float, tau_kill: float,
                  phi_est: float) -> CostResult:
    """Expected machine time under resume-based speculation.

    The straggler branch kills the original at tau_est, bills the r pruned
    resumed attempts to tau_kill, and the winning resumed attempt runs for
    max(t_min, (1-phi)*W) with W the minimum of r+1 fresh draws:

        E(T | T>D) = tau_est + r*(tau_kill - tau_est)
                   + t_min*(1-phi)**(beta*(r+1)) / (beta*(r+1) - 1) + t_min
    """
    _check_deadline(job)
    if not 0.0 <= phi_est < 1.0:
        raise ValueError(f"phi_est must lie in [0, 1), got {phi_est}")
    p, D = job.params, job.deadline
    if p.beta <= 1.0:
        raise DivergentMoment(f"beta = {p.beta} <= 1: mean execution time diverges")
    nb = p.beta * (r + 1)
    if nb <= 1.0:
        raise DivergentMoment(
            f"beta*(r+1) = {nb} <= 1: resumed winner time diverges")
    if not 0 <= tau_est < D:
        raise InvalidWindow(f"tau_est {tau_est} outside [0, deadline)")
    _check_kill(tau_est, tau_kill, D, r)
    prob_late = (p.t_min / D) ** p.beta
    finish_early = truncated_mean(p, D)
    late = (tau_est + r * (tau_kill - tau_est)
            + p.t_min * (1.0 - phi_est) ** nb / (nb - 1.0) + p.t_min)
    per_task = finish_early * (1.0 - prob_late) + late * prob_late
    total = job.num_tasks * per_task
    return CostResult(total, total * job.price_per_vm_sec)


def pocd_for(job: JobSpec, strategy: StrategyConfig, r=None) -> PoCDResult:
    """Dispatch to the closed form matching the strategy kind."""
    r = strategy.r if r is None else r
    kind = strategy.kind
    if kind is StrategyKind.CLONE:
        return pocd_clone(job, r)
    if kind is StrategyKind.S_RESTART:
        return pocd_s_restart(job, r, strategy.tau_est)
    if kind is StrategyKind.S_RESUME:
        return pocd_s_resume(job, r, strategy.tau_est, strategy.phi_est)
    if kind is StrategyKind.HADOOP_NS:
        return pocd_clone(job, 0)
    raise ValueError(f"no closed-form PoCD for {kind.value}")


def cost_for(job: JobSpec, strategy: StrategyConfig, r=None) -> CostResult:
    """Dispatch to the closed form matching the strategy kind."""
    r = strategy.r if r is None else r
    kind = strategy.kind
    if kind is StrategyKind.CLONE:
        return cost_clone(job, r, strategy.tau_kill)
    if kind is StrategyKind.S_RESTART:
        return cost_s_restart(job, r, strategy.tau_est, strategy.tau_kill)
    if kind is StrategyKind.S_RESUME:
        return cost_s_resume(job, r, strategy.tau_est, strategy.tau_kill,
                             strategy.phi_est)
    if kind is StrategyKind.HADOOP_NS:
        return cost_clone(job, 0, 0.0)
    raise ValueError(f"no closed-form cost for {kind.value}")


def clone_resume_threshold(job: JobSpec, tau_est: float, phi_est: float) -> float:
    """r above which cloning is claimed to beat resuming:

        r* = log_{(D-tau_est) / ((1-phi)*D)} ( (1-phi)**beta * t_min**beta / (D-tau_est) )

    Returns nan when the log base degenerates to 1 or below 0 in log space
    (tau_est <= phi*D). The numeric scan is the ground truth; this value is
    reported as stated, without asserting it matches the scan.
    """
    p, D = job.params, job.deadline
    base = (D - tau_est) / ((1.0 - phi_est) * D)
    if base <= 0.0 or math.log(base) == 0.0:
        return float("nan")
    arg = (1.0 - phi_est) ** p.beta * p.t_min ** p.beta / (D - tau_est)
    return math.log(arg) / math.log(base)


def scan_clone_resume_crossover(job: JobSpec, tau_est: float, phi_est: float,
                                r_max: int = 20) -> int | None:
    """Smallest r in 0..r_max where clone PoCD >= resume PoCD, else None."""
    for r in range(r_max + 1):
        if (pocd_clone(job, r).value
                >= pocd_s_resume(job, r, tau_est, phi_est).value):
            return r
    return None


def compare_strategies(job: JobSpec, r: int, tau_est: float,
                       phi_est: float) -> ComparisonReport:
    """Evaluate all three PoCDs at a common r and check their ordering.

    Each inequality records whether it held numerically and whether its
    sufficient precondition was met; an unmet precondition is reported, never
    raised, since the inequality may still hold.
    """
    rc = pocd_clone(job, r).value
    rr = pocd_s_restart(job, r, tau_est).value
    rs = pocd_s_resume(job, r, tau_est, phi_est).value
    checks = (
        InequalityCheck(name="clone > s-restart", holds=rc > rr,
                        precondition_met=r >= 1),
        InequalityCheck(name="s-resume > s-restart", holds=rs > rr,
                        precondition_met=(job.deadline - tau_est
                                          >= job.params.t_min * (1.0 - phi_est))),
    )
    return ComparisonReport(
        r=r, pocd_clone=rc, pocd_restart=rr, pocd_resume=rs, ordering=checks,
        clone_vs_resume_threshold=clone_resume_threshold(job, tau_est, phi_est),
        crossover_scan=scan_clone_resume_crossover(job, tau_est, phi_est),
    )
