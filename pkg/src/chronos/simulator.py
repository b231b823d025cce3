"""Trace-driven Monte Carlo simulation of speculative execution.

Attempts progress linearly: an attempt launched at t_lau reports its first
progress at t_lau + jvm_delay and finishes its sampled workload T at
t_lau + jvm_delay + T, so progress(t) = clamp((t - t_lau - jvm_delay)/T, 0, 1).
With jvm_delay = 0 the completion estimator telescopes to the exact finish
time, making Oracle and Estimator detection agree on every trial; a positive
jvm_delay reproduces the bias of elapsed-time/progress estimators.

Accounting convention shared with the closed forms: attempts are pruned only
at tau_kill, each pruned attempt is billed to its kill time even if the
winner finished earlier, and the winner is billed to its own completion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidTimes, InvalidWindow, NoProgress
from .model import (JobSpec, SampleStream, StrategyConfig, StrategyKind,
                    pareto_inverse_survival)

__all__ = [
    "DetectionMode", "SimConfig", "AttemptRecord", "TaskOutcome", "JobOutcome",
    "SimReport", "ResumeOffset", "estimate_completion",
    "estimate_completion_hadoop", "resume_offset", "simulate_job", "run_trials",
]


class DetectionMode(enum.Enum):
    ORACLE = "oracle"        # detector knows the sampled execution time
    ESTIMATOR = "estimator"  # detector extrapolates from reported progress


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls.

    hadoop_s_period and mantri_period are modeling choices, not published
    constants: how often the baseline schedulers wake up and look. mantri_gap
    is the slack (seconds) a task's estimated remaining time must exceed the
    average task time by before the restart baseline reacts.
    """

    trials: int = 10_000
    detection: DetectionMode = DetectionMode.ORACLE
    jvm_delay: float = 0.0
    winner_floor: bool = True
    hadoop_s_period: float = 10.0
    mantri_period: float = 10.0
    mantri_gap: float = 30.0
    mantri_max_extra: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.jvm_delay < 0:
            raise ValueError("jvm_delay must be >= 0")
        if self.hadoop_s_period <= 0 or self.mantri_period <= 0:
            raise ValueError("scheduler periods must be positive")
        if self.mantri_max_extra < 0:
            raise ValueError("mantri_max_extra must be >= 0")


@dataclass
class AttemptRecord:
    """One attempt's lifetime; exactly one of killed_at/finished_at is set."""

    t_lau: float
    t_fp: float
    total_work: float
    killed_at: float | None = None
    finished_at: float | None = None

    @property
    def end(self) -> float:
        return self.killed_at if self.killed_at is not None else self.finished_at

    @property
    def machine_time(self) -> float:
        return self.end - self.t_lau


@dataclass(frozen=True)
class TaskOutcome:
    finish_time: float
    machine_time: float
    straggler: bool
    attempts_launched: int
    phi_at_est: float
    attempts: tuple[AttemptRecord, ...] = ()


@dataclass(frozen=True)
class JobOutcome:
    finish_time: float
    met_deadline: bool
    machine_time: float
    tasks: tuple[TaskOutcome, ...]


@dataclass(frozen=True)
class SimReport:
    """Aggregates over trials; stderr fields are 0 by convention at trials=1."""

    pocd_hat: float
    pocd_stderr: float
    mean_machine_time: float
    machine_time_stderr: float
    mean_phi_est: float
    utility_hat: float


class ResumeOffset(NamedTuple):
    b_extra: float
    b_new: float


def estimate_completion(t_lau: float, t_fp: float, t_now: float,
                        fp: float, cp: float) -> float:
    """Estimated completion time from two progress observations:

        t_lau + (t_fp - t_lau) + (t_now - t_fp) / (cp - fp)

    The last term scales elapsed processing time to the full workload, which
    is exact under linear progress with fp reported at 0. A nonzero fp makes
    the scaling factor too small and the estimate drifts late; the formula is
    applied as stated either way.
    """
    if not t_lau <= t_fp <= t_now:
        raise InvalidTimes(
            f"need t_lau <= t_fp <= t_now, got {t_lau}, {t_fp}, {t_now}")
    if cp <= fp:
        raise NoProgress(f"no progress since first report (cp={cp}, fp={fp})")
    return t_lau + (t_fp - t_lau) + (t_now - t_fp) / (cp - fp)


def estimate_completion_hadoop(t_lau: float, t_now: float, cp: float) -> float:
    """Elapsed-over-progress estimate that ignores the startup gap.

    Counts the whole elapsed time t_now - t_lau as processing, so any launch
    overhead inflates the estimate; with zero overhead it matches
    estimate_completion exactly.
    """
    if t_now < t_lau:
        raise InvalidTimes(f"t_now {t_now} before t_lau {t_lau}")
    if cp <= 0:
        raise NoProgress(f"no reported progress (cp={cp})")
    return t_lau + (t_now - t_lau) / cp


def resume_offset(b_start: float, b_est: float, tau_est: float,
                  t_fp: float, t_lau: float) -> ResumeOffset:
    """Byte offset a resumed attempt should start from.

    b_est bytes were processed between first progress t_fp and detection
    tau_est; extrapolating that rate over the startup gap t_fp - t_lau gives
    the extra bytes the original will chew through while replacements warm up:

        b_extra = b_est / (tau_est - t_fp) * (t_fp - t_lau)
        b_new   = b_start + b_est + b_extra
    """
    if t_fp < t_lau:
        raise InvalidTimes(f"t_fp {t_fp} before t_lau {t_lau}")
    if tau_est <= t_fp:
        raise InvalidTimes(
            f"tau_est {tau_est} must exceed first-progress time {t_fp}")
    b_extra = b_est / (tau_est - t_fp) * (t_fp - t_lau)
    return ResumeOffset(b_extra=b_extra, b_new=b_start + b_est + b_extra)


# ---------------------------------------------------------------------------
# scalar (per-trial) simulation

def _winner_index(completions, t_fps, sim: SimConfig, tau_kill: float) -> int:
    """Attempt kept at tau_kill: smallest estimated completion.

    Under linear progress the estimate of any attempt that has reported is
    its true completion; attempts with nothing reported by tau_kill rank
    last. Ties resolve to the lowest attempt index.
    """
    if sim.detection is DetectionMode.ORACLE:
        scores = completions
    else:
        scores = [c if fp < tau_kill else math.inf
                  for c, fp in zip(completions, t_fps)]
    return min(range(len(scores)), key=lambda i: (scores[i], i))


def _is_straggler(c1: float, t1: float, job: JobSpec, tau_est: float,
                  sim: SimConfig) -> bool:
    if c1 <= tau_est:
        return False
    if sim.detection is DetectionMode.ORACLE:
        return t1 > job.deadline
    if sim.jvm_delay >= tau_est:
        return True  # nothing reported yet: estimate is unbounded
    return c1 > job.deadline  # exact linear-progress estimate


def _single_attempt_outcome(c1: float, t1: float, jvm: float) -> TaskOutcome:
    rec = AttemptRecord(t_lau=0.0, t_fp=jvm, total_work=t1, finished_at=c1)
    return TaskOutcome(finish_time=c1, machine_time=c1, straggler=False,
                       attempts_launched=1, phi_at_est=float("nan"),
                       attempts=(rec,))


def _measured_phi(t1: float, tau_est: float, jvm: float) -> float:
    return min(1.0, max(0.0, (tau_est - jvm) / t1))


def _task_clone(job: JobSpec, st: StrategyConfig, sim: SimConfig,
                times) -> TaskOutcome:
    jvm = sim.jvm_delay
    completions = [jvm + t for t in times]
    t_fps = [jvm] * len(times)
    win = _winner_index(completions, t_fps, sim, st.tau_kill)
    finish = completions[win]
    attempts = []
    for i, (t, c) in enumerate(zip(times, completions)):
        rec = AttemptRecord(t_lau=0.0, t_fp=jvm, total_work=t)
        if i == win:
            rec.finished_at = c
        else:
            rec.killed_at = st.tau_kill
        attempts.append(rec)
    machine = st.r * st.tau_kill + finish
    return TaskOutcome(finish_time=finish, machine_time=machine,
                       straggler=False, attempts_launched=st.r + 1,
                       phi_at_est=float("nan"), attempts=tuple(attempts))


def _task_restart(job: JobSpec, st: StrategyConfig, sim: SimConfig,
                  t1: float, extra_times) -> TaskOutcome:
    jvm, te, tk = sim.jvm_delay, st.tau_est, st.tau_kill
    c1 = jvm + t1
    if not _is_straggler(c1, t1, job, te, sim):
        return _single_attempt_outcome(c1, t1, jvm)
    phi = _measured_phi(t1, te, jvm)
    completions = [c1] + [te + jvm + t for t in extra_times]
    t_fps = [jvm] + [te + jvm] * len(extra_times)
    win = _winner_index(completions, t_fps, sim, tk)
    finish = completions[win]
    attempts = [AttemptRecord(t_lau=0.0, t_fp=jvm, total_work=t1)]
    for t in extra_times:
        attempts.append(AttemptRecord(t_lau=te, t_fp=te + jvm, total_work=t))
    for i, rec in enumerate(attempts):
        if i == win:
            rec.finished_at = completions[i]
        else:
            rec.killed_at = tk
    machine = te + st.r * (tk - te) + (finish - te)
    return TaskOutcome(finish_time=finish, machine_time=machine,
                       straggler=True, attempts_launched=1 + st.r,
                       phi_at_est=phi, attempts=tuple(attempts))


def _resume_remaining_fraction(st: StrategyConfig, jvm: float) -> float:
    """Work fraction left for resumed attempts, including the skip-ahead."""
    b_est = st.phi_est
    if 0.0 < jvm < st.tau_est:
        b_new = resume_offset(0.0, b_est, st.tau_est, jvm, 0.0).b_new
    else:
        b_new = b_est
    return max(0.0, 1.0 - min(1.0, b_new))


def _task_resume(job: JobSpec, st: StrategyConfig, sim: SimConfig,
                 t1: float, new_times) -> TaskOutcome:
    jvm, te, tk = sim.jvm_delay, st.tau_est, st.tau_kill
    c1 = jvm + t1
    if not _is_straggler(c1, t1, job, te, sim):
        return _single_attempt_outcome(c1, t1, jvm)
    phi = _measured_phi(t1, te, jvm)
    rem = _resume_remaining_fraction(st, jvm)
    durations = [rem * t for t in new_times]
    if sim.winner_floor:
        durations = [max(job.params.t_min, d) for d in durations]
    completions = [te + jvm + d for d in durations]
    t_fps = [te + jvm] * len(durations)
    win = _winner_index(completions, t_fps, sim, tk)
    finish = completions[win]
    attempts = [AttemptRecord(t_lau=0.0, t_fp=jvm, total_work=t1,
                              killed_at=te)]
    for d, c in zip(durations, completions):
        attempts.append(AttemptRecord(t_lau=te, t_fp=te + jvm, total_work=d))
    for i in range(len(durations)):
        rec = attempts[1 + i]
        if i == win:
            rec.finished_at = completions[i]
        else:
            rec.killed_at = tk
    machine = te + st.r * (tk - te) + (finish - te)
    return TaskOutcome(finish_time=finish, machine_time=machine,
                       straggler=True, attempts_launched=st.r + 2,
                       phi_at_est=phi, attempts=tuple(attempts))


_DRAWS_PER_TASK = {
    StrategyKind.CLONE: lambda r: r + 1,
    StrategyKind.S_RESTART: lambda r: r + 1,
    StrategyKind.S_RESUME: lambda r: r + 2,
    StrategyKind.HADOOP_NS: lambda r: 1,
}


def _validate(job: JobSpec, st: StrategyConfig) -> None:
    if st.kind in (StrategyKind.S_RESTART, StrategyKind.S_RESUME):
        if not 0 <= st.tau_est < job.deadline:
            raise InvalidWindow(
                f"tau_est {st.tau_est} outside [0, deadline)")
    prunes = st.r >= 1 and st.kind in (
        StrategyKind.CLONE, StrategyKind.S_RESTART, StrategyKind.S_RESUME)
    if prunes and st.tau_kill > job.deadline:
        raise InvalidWindow(f"tau_kill {st.tau_kill} after deadline")


def simulate_job(job: JobSpec, strategy: StrategyConfig, sim: SimConfig,
                 stream: SampleStream) -> JobOutcome:
    """One trial: run all tasks of one job under the strategy.

    Task workloads are drawn from the given stream in a fixed order, so a
    trial is reproducible from its (seed, stream_index) alone.
    """
    _validate(job, strategy)
    kind = strategy.kind
    if kind in _DRAWS_PER_TASK:
        k = _DRAWS_PER_TASK[kind](strategy.r)
        times = pareto_inverse_survival(
            stream.uniforms(job.num_tasks * k), job.params
        ).reshape(job.num_tasks, k)
        tasks = []
        for row in times:
            if kind is StrategyKind.CLONE:
                tasks.append(_task_clone(job, strategy, sim, row))
            elif kind is StrategyKind.S_RESTART:
                tasks.append(_task_restart(job, strategy, sim, row[0], row[1:]))
            elif kind is StrategyKind.S_RESUME:
                tasks.append(_task_resume(job, strategy, sim, row[0], row[1:]))
            else:
                tasks.append(_single_attempt_outcome(
                    sim.jvm_delay + row[0], row[0], sim.jvm_delay))
    elif kind is StrategyKind.HADOOP_S:
        tasks = _job_hadoop_s(job, sim, stream)
    elif kind is StrategyKind.MANTRI:
        tasks = _job_mantri(job, sim, stream)
    else:
        raise ValueError(f"unknown strategy kind {kind}")
    finish = max(t.finish_time for t in tasks)
    machine = sum(t.machine_time for t in tasks)
    return JobOutcome(finish_time=finish, met_deadline=finish <= job.deadline,
                      machine_time=machine, tasks=tuple(tasks))


# ---------------------------------------------------------------------------
# baselines (event-stepped, per trial)

class _Attempt:
    __slots__ = ("t_lau", "work", "completion", "end", "finished")

    def __init__(self, t_lau, work, jvm):
        self.t_lau = t_lau
        self.work = work
        self.completion = t_lau + jvm + work
        self.end = None        # kill or finish time, set once
        self.finished = False


def _attempt_score(att: _Attempt, now: float, sim: SimConfig) -> float:
    """Estimated completion as of `now` (exact once progress is visible)."""
    if sim.detection is DetectionMode.ESTIMATOR and att.t_lau + sim.jvm_delay >= now:
        return math.inf
    return att.completion


def _job_hadoop_s(job: JobSpec, sim: SimConfig, stream: SampleStream):
    """Speculation baseline: after the first completion, wake periodically and
    back up the one running task farthest behind the average finished time.
    At most one backup per task; a task completes with its earliest attempt,
    at which point its other attempt is released."""
    n = job.num_tasks
    works = pareto_inverse_survival(stream.uniforms(n), job.params)
    tasks = [[_Attempt(0.0, w, sim.jvm_delay)] for w in works]
    first_finish = min(a[0].completion for a in tasks)
    check = first_finish + sim.hadoop_s_period
    while True:
        done_times = []
        running = []
        for i, atts in enumerate(tasks):
            completion = min(a.completion for a in atts)
            if completion <= check:
                done_times.append(completion)
            else:
                running.append(i)
        if not running:
            break
        candidates = [i for i in running if len(tasks[i]) == 1]
        if not candidates:
            break  # every running task is already backed up: nothing changes
        if done_times:
            avg_fin = sum(done_times) / len(done_times)
            scores = [(min(_attempt_score(a, check, sim) for a in tasks[i]), i)
                      for i in candidates]
            gap, laggard = max(((s - avg_fin), i) for s, i in scores)
            if gap > 0:
                work = pareto_inverse_survival(stream.uniform(), job.params)
                tasks[laggard].append(_Attempt(check, work, sim.jvm_delay))
        check += sim.hadoop_s_period

    outcomes = []
    for atts in tasks:
        completion = min(a.completion for a in atts)
        for a in atts:
            a.finished = a.completion == completion
            a.end = completion if not a.finished else a.completion
        machine = sum(a.end - a.t_lau for a in atts)
        recs = tuple(AttemptRecord(
            t_lau=a.t_lau, t_fp=a.t_lau + sim.jvm_delay, total_work=a.work,
            killed_at=None if a.finished else a.end,
            finished_at=a.end if a.finished else None) for a in atts)
        outcomes.append(TaskOutcome(
            finish_time=completion, machine_time=machine,
            straggler=len(atts) > 1, attempts_launched=len(atts),
            phi_at_est=float("nan"), attempts=recs))
    return outcomes


def _job_mantri(job: JobSpec, sim: SimConfig, stream: SampleStream):
    """Restart baseline: wake every mantri_period, keep only the most
    promising attempt of each unfinished task, and restart any task whose
    estimated remaining time exceeds the average task time by mantri_gap,
    up to mantri_max_extra restarts per task. Deadline-agnostic."""
    n = job.num_tasks
    works = pareto_inverse_survival(stream.uniforms(n), job.params)
    alive = [[_Attempt(0.0, w, sim.jvm_delay)] for w in works]
    spent: list[list[_Attempt]] = [[] for _ in range(n)]
    extras_used = [0] * n
    done_at: list[float | None] = [None] * n
    check = sim.mantri_period
    while True:
        for i in range(n):
            if done_at[i] is not None:
                continue
            completion = min(a.completion for a in alive[i])
            if completion <= check:
                done_at[i] = completion
                for a in alive[i]:
                    a.finished = a.completion == completion
                    a.end = completion
                spent[i].extend(alive[i])
                alive[i] = []
        undone = [i for i in range(n) if done_at[i] is None]
        if not undone:
            break
        for i in undone:
            if len(alive[i]) > 1:
                scores = [_attempt_score(a, check, sim) for a in alive[i]]
                keep = min(range(len(scores)), key=lambda j: (scores[j], j))
                for j, a in enumerate(alive[i]):
                    if j != keep:
                        a.end = check
                        spent[i].append(a)
                alive[i] = [alive[i][keep]]
        finished_times = [t for t in done_at if t is not None]
        if finished_times:
            avg_exec = sum(finished_times) / len(finished_times)
            for i in undone:
                if extras_used[i] >= sim.mantri_max_extra:
                    continue
                remaining = min(_attempt_score(a, check, sim)
                                for a in alive[i]) - check
                if remaining > avg_exec + sim.mantri_gap:
                    work = pareto_inverse_survival(stream.uniform(), job.params)
                    alive[i].append(_Attempt(check, work, sim.jvm_delay))
                    extras_used[i] += 1
        if all(extras_used[i] >= sim.mantri_max_extra and len(alive[i]) == 1
               for i in undone):
            break  # no future check can change anything: run out the clock
        check += sim.mantri_period

    outcomes = []
    for i in range(n):
        if done_at[i] is None:
            completion = min(a.completion for a in alive[i])
            done_at[i] = completion
            for a in alive[i]:
                a.finished = a.completion == completion
                a.end = completion
            spent[i].extend(alive[i])
            alive[i] = []
        atts = spent[i]
        machine = sum(a.end - a.t_lau for a in atts)
        recs = tuple(AttemptRecord(
            t_lau=a.t_lau, t_fp=a.t_lau + sim.jvm_delay, total_work=a.work,
            killed_at=None if a.finished else a.end,
            finished_at=a.end if a.finished else None) for a in atts)
        outcomes.append(TaskOutcome(
            finish_time=done_at[i], machine_time=machine,
            straggler=extras_used[i] > 0, attempts_launched=len(atts),
            phi_at_est=float("nan"), attempts=recs))
    return outcomes


# ---------------------------------------------------------------------------
# aggregation

def run_trials(job: JobSpec, strategy: StrategyConfig, sim: SimConfig,
               utility_cfg=None) -> SimReport:
    """Monte Carlo estimate of PoCD and machine time over sim.trials trials.

    Deterministic for a fixed SimConfig.seed regardless of how the caller
    parallelizes around it: the closed-form strategies consume one master
    counter-based stream in fixed-size blocks, and the baselines give each
    trial its own substream keyed by trial index.
    """
    _validate(job, strategy)
    if strategy.kind in _DRAWS_PER_TASK:
        met, mach_sum, mach_sq, phi_sum, phi_cnt = _run_vectorized(
            job, strategy, sim)
    else:
        met, mach_sum, mach_sq, phi_sum, phi_cnt = 0, [], [], [], 0
        for trial in range(sim.trials):
            out = simulate_job(job, strategy, sim,
                               SampleStream(sim.seed, trial))
            met += out.met_deadline
            mach_sum.append(out.machine_time)
            mach_sq.append(out.machine_time ** 2)

    trials = sim.trials
    pocd_hat = met / trials
    pocd_stderr = math.sqrt(pocd_hat * (1.0 - pocd_hat) / trials)
    total = math.fsum(mach_sum)
    total_sq = math.fsum(mach_sq)
    mean_mach = total / trials
    if trials > 1:
        var = max(0.0, (total_sq - trials * mean_mach ** 2) / (trials - 1))
        mach_stderr = math.sqrt(var / trials)
    else:
        mach_stderr = 0.0
    mean_phi = math.fsum(phi_sum) / phi_cnt if phi_cnt else float("nan")
    utility_hat = float("nan")
    if utility_cfg is not None:
        gap = pocd_hat - utility_cfg.resolve_r_min(job)
        if gap <= 0:
            utility_hat = float("-inf")
        else:
            utility_hat = (math.log(gap) / math.log(utility_cfg.log_base)
                           - utility_cfg.theta * utility_cfg.price * mean_mach)
    return SimReport(pocd_hat=pocd_hat, pocd_stderr=pocd_stderr,
                     mean_machine_time=mean_mach,
                     machine_time_stderr=mach_stderr,
                     mean_phi_est=mean_phi, utility_hat=utility_hat)


def _run_vectorized(job: JobSpec, st: StrategyConfig, sim: SimConfig):
    """Chunked numpy evaluation of the four closed-form strategies."""
    p, N, r = job.params, job.num_tasks, st.r
    k = _DRAWS_PER_TASK[st.kind](r)
    # fixed work-based chunking: deterministic, independent of memory pressure
    chunk = max(1, 4_000_000 // max(1, N * k))
    master = SampleStream(sim.seed, 0)
    met = 0
    mach_sum, mach_sq, phi_sum = [], [], []
    phi_cnt = 0
    remaining = sim.trials
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        u = master.uniforms(m * N * k).reshape(m, N, k)
        T = pareto_inverse_survival(u, p)
        if st.kind in (StrategyKind.CLONE, StrategyKind.HADOOP_NS):
            finish, mach = _vec_clone(T, job, st, sim)
        elif st.kind is StrategyKind.S_RESTART:
            finish, mach, phis = _vec_restart(T, job, st, sim)
            phi_sum.append(phis.sum())
            phi_cnt += phis.size
        else:
            finish, mach, phis = _vec_resume(T, job, st, sim)
            phi_sum.append(phis.sum())
            phi_cnt += phis.size
        met += int((finish <= job.deadline).all(axis=1).sum())
        per_job = mach.sum(axis=1)
        mach_sum.append(per_job.sum())
        mach_sq.append((per_job ** 2).sum())
    return met, mach_sum, mach_sq, phi_sum, phi_cnt


def _vec_clone(T, job, st, sim):
    jvm = sim.jvm_delay
    if (sim.detection is DetectionMode.ESTIMATOR and st.r >= 1
            and jvm >= st.tau_kill):
        w = T[:, :, 0]  # nothing visible at the prune: index tie keeps attempt 0
    else:
        w = T.min(axis=2)
    finish = jvm + w
    mach = st.r * st.tau_kill + jvm + w
    return finish, mach


def _flagged(T1, c1, job, st, sim):
    if sim.detection is DetectionMode.ORACLE:
        return T1 > job.deadline
    if sim.jvm_delay >= st.tau_est:
        return np.ones_like(T1, dtype=bool)
    return c1 > job.deadline


def _vec_restart(T, job, st, sim):
    jvm, te, tk, r = sim.jvm_delay, st.tau_est, st.tau_kill, st.r
    T1 = T[:, :, 0]
    c1 = jvm + T1
    flagged = _flagged(T1, c1, job, st, sim)
    if r > 0:
        extras_hidden = (sim.detection is DetectionMode.ESTIMATOR
                         and jvm >= tk - te)
        if extras_hidden:
            w = c1 - te
        else:
            w = np.minimum(c1 - te, jvm + T[:, :, 1:].min(axis=2))
    else:
        w = c1 - te
    finish = np.where(flagged, te + w, c1)
    mach = np.where(flagged, te + r * (tk - te) + w, c1)
    phis = np.clip((te - jvm) / T1[flagged], 0.0, 1.0)
    return finish, mach, phis


def _vec_resume(T, job, st, sim):
    jvm, te, tk, r = sim.jvm_delay, st.tau_est, st.tau_kill, st.r
    T1 = T[:, :, 0]
    c1 = jvm + T1
    flagged = _flagged(T1, c1, job, st, sim)
    rem = _resume_remaining_fraction(st, jvm)
    d = rem * T[:, :, 1:]
    if sim.winner_floor:
        d = np.maximum(job.params.t_min, d)
    if sim.detection is DetectionMode.ESTIMATOR and jvm >= tk - te:
        w = d[:, :, 0]
    else:
        w = d.min(axis=2)
    finish = np.where(flagged, te + jvm + w, c1)
    mach = np.where(flagged, te + r * (tk - te) + jvm + w, c1)
    phis = np.clip((te - jvm) / T1[flagged], 0.0, 1.0)
    return finish, mach, phis
