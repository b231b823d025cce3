"""Pareto execution-time model, job/strategy descriptions, and reproducible sampling.

Task execution times follow a Pareto distribution with scale t_min and tail
index beta: P(T > t) = (t_min / t)**beta for t >= t_min. All closed forms in
the analytics module are expectations under this model, so the sampling
primitives here are deliberately exact inverses of the same survival function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentMoment, InvalidDeadline, InvalidFloor

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ParetoParams:
    """Scale/tail parameters of the execution-time distribution."""

    t_min: float
    beta: float

    def __post_init__(self):
        if not self.t_min > 0:
            raise ValueError(f"t_min must be positive, got {self.t_min}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def mean(self) -> float:
        """E[T] = t_min * beta / (beta - 1); diverges for beta <= 1."""
        if self.beta <= 1.0:
            raise DivergentMoment(f"mean diverges: beta = {self.beta} <= 1")
        return self.t_min * self.beta / (self.beta - 1.0)


@dataclass(frozen=True)
class JobSpec:
    """One job: N independent tasks, a deadline, and a machine-time price."""

    job_id: str
    num_tasks: int
    params: ParetoParams
    deadline: float
    price_per_vm_sec: float = 1.0
    submit_time: float = 0.0

    def __post_init__(self):
        if self.num_tasks < 1:
            raise ValueError(f"num_tasks must be >= 1, got {self.num_tasks}")
        if not self.deadline > self.params.t_min:
            raise InvalidDeadline(
                f"deadline <= t_min ({self.deadline} <= {self.params.t_min}): "
                "no task can ever finish in time"
            )
        if self.price_per_vm_sec < 0:
            raise ValueError("price_per_vm_sec must be >= 0")


class StrategyKind(enum.Enum):
    CLONE = "clone"
    S_RESTART = "s-restart"
    S_RESUME = "s-resume"
    HADOOP_NS = "hadoop-ns"
    HADOOP_S = "hadoop-s"
    MANTRI = "mantri"


#: Strategies with closed-form completion probability and cost.
ANALYTIC_KINDS = (StrategyKind.CLONE, StrategyKind.S_RESTART, StrategyKind.S_RESUME,
                  StrategyKind.HADOOP_NS)


@dataclass(frozen=True)
class StrategyConfig:
    """Speculation policy: how many extra attempts, and when to act.

    r extra attempts are created for Clone at launch, for S-Restart/S-Resume
    at the detection time tau_est (S-Resume launches r+1 because the original
    is killed on detection). tau_kill is when all but the best attempt are
    pruned. phi_est is the assumed progress fraction of a straggling original
    at tau_est, used by S-Resume to size the remaining work.
    """

    kind: StrategyKind
    r: int = 0
    tau_est: float = 0.0
    tau_kill: float = 0.0
    phi_est: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.tau_est < 0:
            raise ValueError("tau_est must be >= 0")
        if self.tau_kill < self.tau_est:
            raise ValueError(
                f"tau_kill must be >= tau_est ({self.tau_kill} < {self.tau_est})")
        needs_kill_step = self.r >= 1 and self.kind in (
            StrategyKind.CLONE, StrategyKind.S_RESTART, StrategyKind.S_RESUME)
        if needs_kill_step and self.tau_kill <= self.tau_est:
            raise ValueError(
                "tau_kill must exceed tau_est when extra attempts are pruned")
        if not 0.0 <= self.phi_est < 1.0:
            raise ValueError(f"phi_est must lie in [0, 1), got {self.phi_est}")
        if self.kind is StrategyKind.CLONE and self.tau_est != 0.0:
            raise ValueError("clone detects nothing: tau_est must be 0")


class SampleStream:
    """Reproducible uniform source keyed by (seed, stream_index).

    Streams with different keys are statistically independent (counter-based
    Philox keyed on both integers), and the same key yields the same sequence
    on every platform. A stream is cheap to create; parallel workers should
    each derive their own rather than share one.
    """

    __slots__ = ("seed", "stream_index", "_gen")

    def __init__(self, seed: int, stream_index: int = 0):
        self.seed = seed
        self.stream_index = stream_index
        key = np.array([seed & _MASK64, stream_index & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self) -> float:
        """One draw from (0, 1]."""
        return 1.0 - self._gen.random()

    def uniforms(self, n: int) -> np.ndarray:
        """n draws from (0, 1]."""
        return 1.0 - self._gen.random(n)

    def substream(self, index: int) -> "SampleStream":
        """Independent stream derived from the same root seed."""
        return SampleStream(self.seed, index)

    def __repr__(self):
        return f"SampleStream(seed={self.seed}, stream_index={self.stream_index})"


def pareto_survival(t, params: ParetoParams):
    """P(T > t); equals 1 below the support. Accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    out = np.where(t <= params.t_min, 1.0, (params.t_min / t) ** params.beta)
    return float(out) if out.ndim == 0 else out


def pareto_inverse_survival(u, params: ParetoParams):
    """Map a survival value u in (0, 1] back to a duration.

    Inverts pareto_survival up to floating-point rounding. Accepts scalars
    or arrays.
    """
    return params.t_min * u ** (-1.0 / params.beta)


def pareto_sample(stream: SampleStream, params: ParetoParams) -> float:
    """One execution-time draw."""
    return pareto_inverse_survival(stream.uniform(), params)


def pareto_samples(stream: SampleStream, params: ParetoParams, n: int) -> np.ndarray:
    """n execution-time draws as an array."""
    return pareto_inverse_survival(stream.uniforms(n), params)


def min_expectation(params: ParetoParams, n: int) -> float:
    """E[min of n i.i.d. draws] = t_min * n*beta / (n*beta - 1).

    The minimum of n Pareto(t_min, beta) variables is Pareto(t_min, n*beta),
    so the expectation exists only when n*beta > 1.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    nb = n * params.beta
    if nb <= 1.0:
        raise DivergentMoment(f"n*beta = {nb} <= 1: expected minimum diverges")
    return params.t_min * nb / (nb - 1.0)


def truncated_mean(params: ParetoParams, deadline: float) -> float:
    """E[T | T <= deadline] under the Pareto model.

    Closed form

        t_min * D * beta * (t_min**(beta-1) - D**(beta-1))
        --------------------------------------------------
               (1 - beta) * (D**beta - t_min**beta)

    with the beta -> 1 limit t_min * D * ln(D/t_min) / (D - t_min). The
    general expression is a 0/0 at beta = 1 but is numerically stable already
    a few ulps away, so only a narrow band is routed to the limit.
    """
    t_min, beta = params.t_min, params.beta
    if deadline <= t_min:
        raise InvalidDeadline(
            f"deadline <= t_min ({deadline} <= {t_min}): truncation is empty")
    if abs(beta - 1.0) < 1e-9:
        return t_min * deadline * math.log(deadline / t_min) / (deadline - t_min)
    num = t_min * deadline * beta * (t_min ** (beta - 1.0) - deadline ** (beta - 1.0))
    den = (1.0 - beta) * (deadline ** beta - t_min ** beta)
    return num / den


def conditional_tail_sample(stream: SampleStream, params: ParetoParams,
                            floor: float) -> float:
    """Draw from T | T > floor.

    A Pareto tail conditioned to exceed floor >= t_min is again Pareto with
    the same index and scale floor, so a fresh draw with the shifted scale is
    an exact conditional sample.
    """
    if floor < params.t_min:
        raise InvalidFloor(
            f"floor {floor} below support minimum {params.t_min}")
    shifted = ParetoParams(t_min=floor, beta=params.beta)
    return pareto_sample(stream, shifted)
