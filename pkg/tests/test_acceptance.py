"""Acceptance gate: eight end-to-end criteria, one test and one printed
PASS/FAIL line each.

Criterion 1 runs 10^6-trial Monte Carlo on a 54-point grid and takes a few
minutes; the rest are fast. Run with -s to see the verdict lines on success.
"""

import math
import os
import subprocess
import sys

import numpy as np

from chronos.analytics import cost_for, pocd_clone, pocd_for, pocd_s_restart, pocd_s_resume
from chronos.errors import SearchCapReached
from chronos.model import (JobSpec, ParetoParams, SampleStream,
                           StrategyConfig, StrategyKind,
                           pareto_inverse_survival)
from chronos.optimizer import UtilityConfig, brute_force_r, gamma_threshold, net_utility, optimize_r
from chronos.simulator import (SimConfig, estimate_completion,
                               estimate_completion_hadoop, run_trials)
from chronos.traceio import WorkloadSpec, generate_workload

TUNABLE = (StrategyKind.CLONE, StrategyKind.S_RESTART, StrategyKind.S_RESUME)

# (beta, t_min, deadline/t_min, r, N): every point keeps beta*(r+1) >= 2.2 so
# the simulated machine time has finite variance and the 1% cost tolerance is
# meaningful at 10^6 trials; large N is paired with small r to bound the
# total draw volume.
GRID = [
    (2.3, 1.0, 1.5, 0, 100), (2.3, 2.0, 1.5, 0, 10), (2.5, 1.0, 1.6, 0, 1),
    (2.5, 20.0, 2.0, 1, 100), (2.2, 5.0, 2.0, 1, 10), (2.4, 3.0, 1.8, 1, 1),
    (1.6, 5.0, 2.5, 2, 10), (1.8, 1.0, 2.5, 2, 100), (1.2, 10.0, 2.2, 2, 1),
    (1.2, 2.0, 3.0, 3, 10), (1.5, 8.0, 3.0, 3, 1), (1.3, 1.0, 3.5, 3, 100),
    (1.1, 10.0, 4.0, 5, 1), (1.25, 1.0, 4.0, 5, 10), (1.15, 4.0, 4.5, 5, 1),
    (1.4, 1.0, 5.0, 4, 1), (1.7, 12.0, 5.0, 4, 10), (1.45, 2.0, 4.8, 4, 1),
]


def _verdict(num: int, failures: list, detail: str = "") -> None:
    ok = not failures
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}"
    if ok and detail:
        line += f" ({detail})"
    if not ok:
        line += f" ({len(failures)} violation(s); first: {failures[0]})"
    print(line)
    assert ok, line


def _job(beta, t_min, mult, n):
    return JobSpec(job_id="acc", num_tasks=n,
                   params=ParetoParams(t_min, beta), deadline=mult * t_min)


def _strategy(kind, r, t_min, phi=0.0):
    tau_est = 0.0 if kind is StrategyKind.CLONE else 0.3 * t_min
    return StrategyConfig(kind=kind, r=r, tau_est=tau_est,
                          tau_kill=0.8 * t_min, phi_est=phi)


def _random_suite():
    """Shared randomized configs for the optimizer criteria."""
    gen = np.random.default_rng(2024)
    suite = []
    for kind in TUNABLE:
        count = 0
        while count < 100:
            t_min = float(gen.uniform(1.0, 20.0))
            beta = float(gen.uniform(1.1, 2.5))
            deadline = t_min * float(gen.uniform(1.5, 5.0))
            n = int(gen.choice([1, 10, 100]))
            tau = (0.0 if kind is StrategyKind.CLONE
                   else float(gen.uniform(0.0, 0.7 * (deadline - t_min))))
            tau_kill = tau + float(gen.uniform(0.1, 1.0)) * (deadline - tau)
            phi = float(gen.uniform(0.0, 0.9))
            theta = float(10.0 ** gen.uniform(-6.0, -2.0))
            job = JobSpec(job_id="r", num_tasks=n,
                          params=ParetoParams(t_min, beta), deadline=deadline)
            strategy = StrategyConfig(kind=kind, tau_est=tau,
                                      tau_kill=tau_kill, phi_est=phi)
            suite.append((job, strategy, UtilityConfig(theta=theta)))
            count += 1
    return suite


def test_criterion_1_closed_form_matches_monte_carlo():
    """Analytic PoCD within 3 binomial standard errors and analytic machine
    time within 1% relative, at 10^6 trials per grid point."""
    failures = []
    worst_p, worst_c = 0.0, 0.0
    points = 0
    for kind in TUNABLE:
        for beta, t_min, mult, r, n in GRID:
            points += 1
            job = _job(beta, t_min, mult, n)
            strategy = _strategy(kind, r, t_min)
            if kind is StrategyKind.S_RESUME:
                # feed back the measured progress fraction of detected
                # stragglers before comparing against the closed forms
                prior = strategy.tau_est * beta / ((beta + 1) * job.deadline)
                meas = run_trials(job, _strategy(kind, r, t_min, prior),
                                  SimConfig(trials=10 ** 5, seed=1013))
                phi_hat = meas.mean_phi_est
                if math.isnan(phi_hat):
                    phi_hat = prior
                strategy = _strategy(kind, r, t_min, phi_hat)
            label = f"{kind.value} beta={beta} t={t_min} m={mult} r={r} N={n}"
            pocd = pocd_for(job, strategy).value
            cost = cost_for(job, strategy).expected_machine_time
            rep = run_trials(job, strategy, SimConfig(trials=10 ** 6, seed=7))
            se = math.sqrt(pocd * (1.0 - pocd) / 10 ** 6)
            p_dev = abs(rep.pocd_hat - pocd)
            if p_dev > 3.0 * se + 1e-12:
                failures.append(f"{label}: pocd {rep.pocd_hat:.6f} vs "
                                f"{pocd:.6f} ({p_dev / max(se, 1e-15):.1f} se)")
            c_dev = abs(rep.mean_machine_time - cost) / cost
            if c_dev > 0.01:
                failures.append(f"{label}: machine {rep.mean_machine_time:.4f}"
                                f" vs {cost:.4f} ({100 * c_dev:.2f}%)")
            worst_p = max(worst_p, p_dev / max(se, 1e-15))
            worst_c = max(worst_c, c_dev)
    assert points >= 50
    _verdict(1, failures, f"{points} points, worst pocd {worst_p:.2f} se, "
                          f"worst cost {100 * worst_c:.3f}%")


def test_criterion_2_search_matches_brute_force():
    failures = []
    checked = 0
    for job, strategy, cfg in _random_suite():
        try:
            got = optimize_r(job, strategy, cfg)
        except SearchCapReached:
            continue  # no finite optimum inside the cap: nothing to compare
        ref = brute_force_r(job, strategy, cfg, r_max=200)
        checked += 1
        if got.r_opt != ref.r_opt:
            failures.append(f"{strategy.kind.value}: search {got.r_opt} vs "
                            f"enumeration {ref.r_opt} (job {job.params})")
    _verdict(2, failures, f"{checked} configs, zero mismatches")


def test_criterion_3_utility_concave_above_threshold():
    failures = []
    checked = 0
    for job, strategy, cfg in _random_suite():
        gamma = gamma_threshold(job, strategy)
        lo = max(0, math.ceil(gamma))
        values = {}
        for r in range(lo, lo + 32):
            try:
                values[r] = net_utility(job, strategy, r, cfg)
            except Exception:
                values[r] = float("nan")
        for r in range(lo + 1, lo + 31):
            triple = (values[r - 1], values[r], values[r + 1])
            if not all(math.isfinite(v) for v in triple):
                continue
            second = triple[2] - 2.0 * triple[1] + triple[0]
            checked += 1
            if second > 1e-9:
                failures.append(f"{strategy.kind.value} r={r}: "
                                f"second difference {second:.3e}")
    _verdict(3, failures, f"{checked} second differences <= 1e-9")


def test_criterion_4_strategy_orderings():
    """Cloning and resuming both beat restarting from scratch wherever the
    window precondition holds, analytically and empirically."""
    failures = []
    trials = 10 ** 5
    compared = 0
    for beta, t_min, mult, r, n in GRID:
        if r < 1:
            continue
        job = _job(beta, t_min, mult, n)
        tau, kill, phi = 0.3 * t_min, 0.8 * t_min, 0.2
        label = f"beta={beta} t={t_min} m={mult} r={r} N={n}"
        p_clone = pocd_clone(job, r).value
        p_restart = pocd_s_restart(job, r, tau).value
        p_resume = pocd_s_resume(job, r, tau, phi).value
        if not p_clone > p_restart:
            failures.append(f"{label}: clone {p_clone} <= restart {p_restart}")
        if not p_resume > p_restart:
            failures.append(f"{label}: resume {p_resume} <= restart {p_restart}")
        hats = {}
        for kind, analytic in ((StrategyKind.CLONE, p_clone),
                               (StrategyKind.S_RESTART, p_restart),
                               (StrategyKind.S_RESUME, p_resume)):
            st = StrategyConfig(kind=kind, r=r,
                                tau_est=0.0 if kind is StrategyKind.CLONE else tau,
                                tau_kill=kill, phi_est=phi)
            rep = run_trials(job, st, SimConfig(trials=trials, seed=11))
            hats[kind] = (rep.pocd_hat, rep.pocd_stderr)
        for better in (StrategyKind.CLONE, StrategyKind.S_RESUME):
            (pb, sb) = hats[better]
            (pr, sr) = hats[StrategyKind.S_RESTART]
            if abs(pb - pr) > 3.0 * (sb + sr):
                compared += 1
                if not pb > pr:
                    failures.append(
                        f"{label}: empirical {better.value} {pb:.5f} below "
                        f"restart {pr:.5f} outside 3 sigma")
    _verdict(4, failures, f"15 grid points, {compared} separable "
                          "empirical pairs agree")


def test_criterion_5_worked_optimization_example():
    failures = []
    job = _job(1.5, 1.0, 2.0, 10)
    strategy = StrategyConfig(kind=StrategyKind.CLONE, tau_est=0.0,
                              tau_kill=1.0)
    cfg = UtilityConfig(theta=1e-4, price=1.0)
    # independent enumeration from the closed forms, no library calls
    r_min = (1.0 - 0.5 ** 1.5) ** 10
    best_r, best_u = 0, float("-inf")
    for r in range(51):
        reach = (1.0 - 0.5 ** (1.5 * (r + 1))) ** 10
        if reach <= r_min:
            continue
        machine = 10.0 * (r * 1.0 + 1.0 + 1.0 / (1.5 * (r + 1) - 1.0))
        u = math.log10(reach - r_min) - 1e-4 * machine
        if u > best_u:
            best_r, best_u = r, u
    if best_r != 7:
        failures.append(f"enumeration found r={best_r}, expected 7")
    res = optimize_r(job, strategy, cfg)
    if res.r_opt != 7:
        failures.append(f"optimize_r found r={res.r_opt}, expected 7")
    if abs(res.utility - best_u) > 1e-9:
        failures.append(f"utility {res.utility} vs enumerated {best_u}")
    _verdict(5, failures, "r_opt = 7 from both search and enumeration")


def test_criterion_6_trend_reproduction():
    failures = []

    # (a) PoCD at the optimum is nonincreasing in theta for every strategy
    job = _job(1.5, 1.0, 2.0, 10)
    for kind in TUNABLE:
        strategy = _strategy(kind, 0, 1.0, phi=0.2)
        last = None
        for theta in (1e-6, 1e-5, 1e-4, 1e-3):
            res = optimize_r(job, strategy, UtilityConfig(theta=theta))
            if last is not None and res.pocd_at_opt > last + 1e-12:
                failures.append(f"(a) {kind.value}: pocd rose at "
                                f"theta={theta}")
            last = res.pocd_at_opt
    # (b) the distribution of optimal r shifts down when theta grows 10x
    jobs = [rec.to_job() for rec in
            generate_workload(WorkloadSpec(num_jobs=20), seed=5)]
    lo, hi = [], []
    for j in jobs:
        strategy = _strategy(StrategyKind.CLONE, 0, j.params.t_min)
        lo.append(optimize_r(j, strategy, UtilityConfig(theta=1e-5)).r_opt)
        hi.append(optimize_r(j, strategy, UtilityConfig(theta=1e-4)).r_opt)
    if any(h > l for l, h in zip(lo, hi)):
        failures.append("(b) some r_opt grew with theta")
    if not sum(hi) < sum(lo):
        failures.append(f"(b) histogram did not shift down "
                        f"({sum(hi)} !< {sum(lo)})")
    # (c) every strategy gets cheaper as the tail lightens, deadline pinned
    # at twice the mean task time
    prev = None
    for i in range(9):
        beta = 1.1 + 0.1 * i
        j = JobSpec(job_id="c", num_tasks=10, params=ParetoParams(1.0, beta),
                    deadline=2.0 * beta / (beta - 1.0))
        costs = tuple(
            cost_for(j, _strategy(kind, 2, 1.0, phi=0.2)).expected_machine_time
            for kind in TUNABLE)
        if prev is not None and not all(c < p for c, p in zip(costs, prev)):
            failures.append(f"(c) cost rose moving to beta={beta:.1f}")
        prev = costs
    # (d) the restart-based baseline spends more machine time than resuming
    for beta, deadline in ((1.2, 4.0), (1.15, 5.0)):
        j = JobSpec(job_id="d", num_tasks=10,
                    params=ParetoParams(1.0, beta), deadline=deadline)
        resume = StrategyConfig(kind=StrategyKind.S_RESUME, r=1, tau_est=0.5,
                                tau_kill=0.8, phi_est=0.2)
        res = run_trials(j, resume, SimConfig(trials=20000, seed=2))
        man = run_trials(j, StrategyConfig(kind=StrategyKind.MANTRI),
                         SimConfig(trials=20000, seed=2, mantri_period=0.5,
                                   mantri_gap=1.0))
        margin = man.mean_machine_time - res.mean_machine_time
        noise = 3.0 * (man.machine_time_stderr + res.machine_time_stderr)
        if not margin > noise:
            failures.append(f"(d) beta={beta}: mantri margin {margin:.3f} "
                            f"inside noise {noise:.3f}")
    _verdict(6, failures, "theta, histogram, beta, and baseline trends hold")


def test_criterion_7_estimator_exactness():
    failures = []
    params = ParetoParams(1.0, 1.5)
    works = pareto_inverse_survival(SampleStream(2025).uniforms(10 ** 4),
                                    params)
    worst = 0.0
    for work in works:
        t_now = 0.37 * work
        got = estimate_completion(0.0, 0.0, t_now, 0.0, t_now / work)
        worst = max(worst, abs(got - work))
    if worst >= 1e-9:
        failures.append(f"zero-delay estimate off by {worst:.2e}")
    delay = 0.5
    overestimates = True
    worst_corr = 0.0
    for work in works:
        t_now = delay + 0.6 * work
        truth = delay + work
        corrected = estimate_completion(0.0, delay, t_now, 0.0, 0.6)
        hadoop = estimate_completion_hadoop(0.0, t_now, 0.6)
        worst_corr = max(worst_corr, abs(corrected - truth))
        overestimates &= hadoop > truth
    if worst_corr >= 1e-9:
        failures.append(f"startup-corrected estimate off by {worst_corr:.2e}")
    if not overestimates:
        failures.append("gap-blind estimate failed to overestimate")
    _verdict(7, failures, "exact to 1e-9 on 10^4 trials; gap-blind "
                          "estimate always late")


def _run_cli(*args):
    env = {k: v for k, v in os.environ.items() if k != "CHRONOS_SEED"}
    return subprocess.run([sys.executable, "-m", "chronos", *args],
                          capture_output=True, text=True, env=env)


def test_criterion_8_cli_determinism(tmp_path):
    failures = []
    sweep = ("sweep", "--tmin", "1", "--beta", "1.5", "--ntasks", "10",
             "--deadline", "2", "--strategy", "s-resume", "--sweep", "theta",
             "--from", "1e-5", "--to", "1e-3", "--steps", "3", "--spacing",
             "log", "--trials", "200", "--seed", "9")
    outs = [_run_cli(*sweep, "--workers", str(w)).stdout
            for w in (1, 1, 2, 4)]
    if len(set(outs)) != 1:
        failures.append("sweep output varies across runs or worker counts")
    trace = tmp_path / "trace.csv"
    trace.write_text(
        "job_id,submit_time_sec,num_tasks,t_min_sec,beta,deadline_sec,"
        "price_per_vm_sec\n"
        "a,0,10,1,1.5,2,1\n"
        "b,1,5,2,2.0,7,0.5\n")
    run = ("trace-run", "--trace", str(trace), "--strategy", "all",
           "--trials", "100", "--seed", "3")
    outs = [_run_cli(*run, "--workers", str(w)).stdout for w in (1, 1, 3)]
    if len(set(outs)) != 1:
        failures.append("trace-run output varies across runs or workers")
    sim = ("simulate", "--tmin", "1", "--beta", "1.5", "--ntasks", "10",
           "--deadline", "2", "--strategy", "clone", "--r", "2", "--trials",
           "500", "--seed", "4", "--baselines", "hadoop-s,mantri")
    if _run_cli(*sim).stdout != _run_cli(*sim).stdout:
        failures.append("simulate output varies across runs")
    _verdict(8, failures, "byte-identical across runs and worker counts")
