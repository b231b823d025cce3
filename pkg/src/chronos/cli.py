"""Batch command-line front end.

Every subcommand validates its flags, computes, and emits one CSV table to
stdout or --output. Output is deterministic given the flags (and --seed where
randomness is involved): repeated invocations produce byte-identical tables,
and parallel sweeps order their rows by grid index before writing.

Exit codes: 0 success, 2 flag/usage error, 3 domain precondition violated
(the message names the failed inequality), 4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .analytics import compare_strategies, cost_for, pocd_for
from .errors import ChronosError, IoError, ParseError, SchemaMismatch, SearchCapReached
from .model import JobSpec, ParetoParams, StrategyConfig, StrategyKind
from .optimizer import (OptimizerParams, UtilityConfig, brute_force_r,
                        net_utility, optimize_r)
from .simulator import DetectionMode, SimConfig, run_trials
from .traceio import (RESULT_HEADER, ResultRow, format_float, load_prices,
                      load_trace, price_at, result_cells, write_results)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

_TUNABLE = ("clone", "s-restart", "s-resume")
_ALL_KINDS = ("clone", "s-restart", "s-resume", "hadoop-ns", "hadoop-s",
              "mantri")
_NAN = float("nan")


def _env_seed() -> int:
    raw = os.environ.get("CHRONOS_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        print(f"chronos: error: CHRONOS_SEED must be an integer, "
              f"got {raw!r}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None


def _expand_strategies(name: str) -> list[str]:
    return list(_TUNABLE) if name == "all" else [name]


def _job_from_args(args) -> JobSpec:
    params = ParetoParams(args.tmin, args.beta)
    deadline = args.deadline
    if deadline is None:
        deadline = args.deadline_multiple * params.mean
    return JobSpec(job_id="cli", num_tasks=args.ntasks, params=params,
                   deadline=deadline, price_per_vm_sec=args.price)


def _strategy_config(kind_name: str, r: int, tmin: float,
                     tau_est: float | None, tau_kill: float | None,
                     phi: float) -> StrategyConfig:
    kind = StrategyKind(kind_name)
    if kind not in (StrategyKind.CLONE, StrategyKind.S_RESTART,
                    StrategyKind.S_RESUME):
        return StrategyConfig(kind=kind)
    if kind is StrategyKind.CLONE:
        tau_est = 0.0
    elif tau_est is None:
        tau_est = 0.3 * tmin
    if tau_kill is None:
        tau_kill = 0.8 * tmin
    return StrategyConfig(kind=kind, r=r, tau_est=tau_est, tau_kill=tau_kill,
                          phi_est=phi)


def _strategy_from_args(args, kind_name: str | None = None,
                        r: int | None = None) -> StrategyConfig:
    return _strategy_config(kind_name or args.strategy,
                            args.r if r is None else r,
                            args.tmin, args.tau_est, args.tau_kill, args.phi)


def _utility_config(args) -> UtilityConfig:
    return UtilityConfig(theta=args.theta, price=args.price,
                         r_min_pocd=args.rmin)


def _sim_config(args) -> SimConfig:
    return SimConfig(trials=args.trials,
                     detection=DetectionMode(args.detection),
                     jvm_delay=args.jvm_delay,
                     winner_floor=not args.no_winner_floor,
                     hadoop_s_period=args.hadoop_s_period,
                     mantri_period=args.mantri_period,
                     mantri_gap=args.mantri_gap,
                     mantri_max_extra=args.mantri_max_extra,
                     seed=args.seed)


def _optimize_capped(job, strategy, cfg, params=OptimizerParams()):
    """Optimize r; with theta = 0 the utility never stops growing, so warn
    and report the best r up to the search cap instead of failing."""
    try:
        return optimize_r(job, strategy, cfg, params)
    except SearchCapReached:
        print(f"chronos: warning: net utility increases with every extra "
              f"attempt (theta too small?); capping r at {params.r_cap}",
              file=sys.stderr)
        return brute_force_r(job, strategy, cfg, r_max=params.r_cap)


def _emit(args, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {args.output}: {exc}") from exc
    else:
        sys.stdout.write(text)


_INPUT_COLS = ["strategy", "r", "tmin", "beta", "ntasks", "deadline",
               "tau_est", "tau_kill", "phi"]


def _input_cells(args, job: JobSpec, st: StrategyConfig) -> list[str]:
    return [st.kind.value, str(st.r), format_float(job.params.t_min),
            format_float(job.params.beta), str(job.num_tasks),
            format_float(job.deadline), format_float(st.tau_est),
            format_float(st.tau_kill), format_float(st.phi_est)]


# ---------------------------------------------------------------------------
# single-point analytic commands

def cmd_pocd(args) -> int:
    job = _job_from_args(args)
    st = _strategy_from_args(args)
    result = pocd_for(job, st)
    _emit(args, _INPUT_COLS + ["pocd", "per_task_failure"],
          [_input_cells(args, job, st)
           + [format_float(result.value), format_float(result.per_task_failure)]])
    return EXIT_OK


def cmd_cost(args) -> int:
    job = _job_from_args(args)
    st = _strategy_from_args(args)
    result = cost_for(job, st)
    _emit(args, _INPUT_COLS + ["price", "expected_machine_time",
                               "expected_dollars"],
          [_input_cells(args, job, st)
           + [format_float(args.price),
              format_float(result.expected_machine_time),
              format_float(result.expected_dollars)]])
    return EXIT_OK


def cmd_utility(args) -> int:
    job = _job_from_args(args)
    st = _strategy_from_args(args)
    cfg = _utility_config(args)
    value = net_utility(job, st, st.r, cfg)
    _emit(args, _INPUT_COLS + ["theta", "price", "rmin", "utility"],
          [_input_cells(args, job, st)
           + [format_float(cfg.theta), format_float(cfg.price),
              format_float(cfg.resolve_r_min(job)), format_float(value)]])
    return EXIT_OK


def cmd_optimize(args) -> int:
    job = _job_from_args(args)
    cfg = _utility_config(args)
    rows = []
    for name in _expand_strategies(args.strategy):
        st = _strategy_from_args(args, kind_name=name, r=0)
        res = _optimize_capped(job, st, cfg)
        rows.append([name, format_float(cfg.theta), str(res.r_opt),
                     format_float(res.gamma), format_float(res.pocd_at_opt),
                     format_float(res.cost_at_opt),
                     format_float(res.utility)])
    _emit(args, ["strategy", "theta", "r_opt", "gamma", "pocd",
                 "cost", "utility"], rows)
    return EXIT_OK


def cmd_compare(args) -> int:
    job = _job_from_args(args)
    tau_est = args.tau_est if args.tau_est is not None else 0.3 * args.tmin
    report = compare_strategies(job, args.r, tau_est, args.phi)
    header = ["r", "tau_est", "phi", "pocd_clone", "pocd_s_restart",
              "pocd_s_resume"]
    cells = [str(report.r), format_float(tau_est), format_float(args.phi),
             format_float(report.pocd_clone), format_float(report.pocd_restart),
             format_float(report.pocd_resume)]
    for check in report.ordering:
        slug = check.name.replace(" ", "_").replace(">", "gt")
        header += [f"{slug}_holds", f"{slug}_precondition"]
        cells += [str(check.holds).lower(), str(check.precondition_met).lower()]
    header += ["clone_resume_threshold", "crossover_r"]
    cells += [format_float(report.clone_vs_resume_threshold),
              "" if report.crossover_scan is None
              else str(report.crossover_scan)]
    _emit(args, header, [cells])
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulation

def cmd_simulate(args) -> int:
    job = _job_from_args(args)
    strategies = [_strategy_from_args(args)]
    if args.baselines:
        for name in args.baselines.split(","):
            name = name.strip()
            if name not in _ALL_KINDS:
                print(f"chronos: error: unknown baseline {name!r}",
                      file=sys.stderr)
                return EXIT_USAGE
            strategies.append(_strategy_from_args(args, kind_name=name, r=0))
    sim = _sim_config(args)
    cfg = _utility_config(args) if args.theta is not None else None
    rows = []
    for st in strategies:
        report = run_trials(job, st, sim, cfg)
        try:
            pocd_a = pocd_for(job, st).value
        except (ValueError, ChronosError):
            pocd_a = _NAN  # no closed form for this scheduler/configuration
        try:
            cost_a = cost_for(job, st).expected_machine_time
        except (ValueError, ChronosError):
            cost_a = _NAN
        rows.append([st.kind.value, str(st.r), str(sim.trials), str(sim.seed),
                     args.detection, format_float(pocd_a),
                     format_float(report.pocd_hat),
                     format_float(report.pocd_stderr), format_float(cost_a),
                     format_float(report.mean_machine_time),
                     format_float(report.machine_time_stderr),
                     format_float(report.mean_phi_est),
                     format_float(report.utility_hat)])
    _emit(args, ["strategy", "r", "trials", "seed", "detection",
                 "pocd_analytic", "pocd_mc", "pocd_stderr", "machine_analytic",
                 "machine_mc", "machine_stderr", "mean_phi_est",
                 "utility_hat"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep

SWEEP_HEADER = ["index", "variable", "value", "strategy", "r_opt", "gamma",
                "pocd", "cost", "utility", "pocd_mc", "pocd_stderr",
                "machine_mc", "machine_stderr"]


def _grid(lo: float, hi: float, steps: int, spacing: str) -> list[float]:
    if steps <= 0:
        return [lo]
    if spacing == "log":
        if lo <= 0 or hi <= 0:
            raise ValueError("log spacing needs positive --from/--to")
        return [lo * (hi / lo) ** (i / steps) for i in range(steps + 1)]
    return [lo + (hi - lo) * i / steps for i in range(steps + 1)]


def _sweep_eval(base: dict, value: float, name: str) -> list[str]:
    var = base["variable"]
    beta = value if var == "beta" else base["beta"]
    params = ParetoParams(base["tmin"], beta)
    deadline = value if var == "deadline" else base["deadline"]
    if deadline is None:
        deadline = base["deadline_multiple"] * params.mean
    job = JobSpec(job_id="sweep", num_tasks=base["ntasks"], params=params,
                  deadline=deadline, price_per_vm_sec=base["price"])
    tau_est = value if (var == "tau-est" and name != "clone") \
        else base["tau_est"]
    tau_kill = value if var == "tau-kill" else base["tau_kill"]
    theta = value if var == "theta" else base["theta"]
    st = _strategy_config(name, 0, base["tmin"], tau_est, tau_kill,
                          base["phi"])
    cfg = UtilityConfig(theta=theta, price=base["price"],
                        r_min_pocd=base["rmin"])
    res = _optimize_capped(job, st, cfg)
    cells = [name, str(res.r_opt), format_float(res.gamma),
             format_float(res.pocd_at_opt), format_float(res.cost_at_opt),
             format_float(res.utility)]
    if base["trials"] > 0:
        sim = SimConfig(trials=base["trials"],
                        detection=DetectionMode(base["detection"]),
                        jvm_delay=base["jvm_delay"], seed=base["seed"])
        report = run_trials(job, replace(st, r=res.r_opt), sim)
        cells += [format_float(report.pocd_hat),
                  format_float(report.pocd_stderr),
                  format_float(report.mean_machine_time),
                  format_float(report.machine_time_stderr)]
    else:
        cells += ["nan"] * 4
    return cells


def _sweep_worker(task):
    index, value, base, names = task
    rows = [[str(index), base["variable"], format_float(value)]
            + _sweep_eval(base, value, name) for name in names]
    return index, rows


def cmd_sweep(args) -> int:
    values = _grid(args.start, args.stop, args.steps, args.spacing)
    names = _expand_strategies(args.strategy)
    base = {
        "variable": args.sweep, "tmin": args.tmin, "beta": args.beta,
        "ntasks": args.ntasks, "deadline": args.deadline,
        "deadline_multiple": args.deadline_multiple, "price": args.price,
        "tau_est": args.tau_est, "tau_kill": args.tau_kill, "phi": args.phi,
        "theta": args.theta, "rmin": args.rmin, "trials": args.trials,
        "detection": args.detection, "jvm_delay": args.jvm_delay,
        "seed": args.seed,
    }
    tasks = [(i, v, base, names) for i, v in enumerate(values)]
    if args.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    else:
        results = [_sweep_worker(t) for t in tasks]
    results.sort(key=lambda item: item[0])
    rows = [cells for _, group in results for cells in group]
    _emit(args, SWEEP_HEADER, rows)
    if args.plot_dir:
        from .plotting import plot_sweep
        plot_sweep([dict(zip(SWEEP_HEADER, row)) for row in rows],
                   args.sweep, args.plot_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# trace-run

def _trace_worker(task):
    index, job, price, names, opts = task
    job = replace(job, price_per_vm_sec=price)
    rows = []
    for name in names:
        st = _strategy_config(name, 0, job.params.t_min,
                              opts["tau_est_frac"] * job.params.t_min,
                              opts["tau_kill_frac"] * job.params.t_min,
                              opts["phi"])
        cfg = UtilityConfig(theta=opts["theta"], price=price,
                            r_min_pocd=opts["rmin"])
        res = _optimize_capped(job, st, cfg)
        pocd_mc = cost_mc = _NAN
        if opts["trials"] > 0:
            sim = SimConfig(trials=opts["trials"],
                            detection=DetectionMode(opts["detection"]),
                            jvm_delay=opts["jvm_delay"], seed=opts["seed"])
            report = run_trials(job, replace(st, r=res.r_opt), sim)
            pocd_mc = report.pocd_hat
            cost_mc = report.mean_machine_time * price
        rows.append(ResultRow(
            job_id=job.job_id, strategy=name, r_opt=res.r_opt,
            pocd_analytic=res.pocd_at_opt,
            cost_analytic=res.cost_at_opt * price, utility=res.utility,
            pocd_mc=pocd_mc, cost_mc=cost_mc, seed=opts["seed"]))
    return index, rows


def cmd_trace_run(args) -> int:
    jobs = load_trace(args.trace)
    prices = load_prices(args.prices) if args.prices else None
    names = _expand_strategies(args.strategy)
    opts = {
        "tau_est_frac": args.tau_est_frac,
        "tau_kill_frac": args.tau_kill_frac, "phi": args.phi,
        "theta": args.theta, "rmin": args.rmin, "trials": args.trials,
        "detection": args.detection, "jvm_delay": args.jvm_delay,
        "seed": args.seed,
    }
    tasks = []
    for index, job in enumerate(jobs):
        price = (price_at(prices, job.submit_time) if prices
                 else job.price_per_vm_sec)
        tasks.append((index, job, price, names, opts))
    if args.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_trace_worker, tasks))
    else:
        results = [_trace_worker(t) for t in tasks]
    results.sort(key=lambda item: item[0])
    rows = [row for _, group in results for row in group]
    if args.output:
        write_results(rows, args.output)
    else:
        out = argparse.Namespace(output=None)
        _emit(out, list(RESULT_HEADER), [result_cells(r) for r in rows])
    if args.plot_dir:
        from .plotting import plot_results
        plot_results([dict(zip(RESULT_HEADER, result_cells(r)))
                      for r in rows], args.plot_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_output(p) -> None:
    p.add_argument("--output", help="write the CSV here instead of stdout")


def _add_job_flags(p, deadline_required: bool) -> None:
    p.add_argument("--tmin", type=float, required=True,
                   help="minimum task time t_min (seconds)")
    p.add_argument("--beta", type=float, required=True,
                   help="Pareto tail index")
    p.add_argument("--ntasks", type=int, required=True,
                   help="number of tasks N")
    p.add_argument("--deadline", type=float, required=deadline_required,
                   help="job deadline D (seconds)")
    if not deadline_required:
        p.add_argument("--deadline-multiple", type=float, default=2.0,
                       help="deadline as a multiple of the mean task time "
                            "when --deadline is omitted (default 2)")
    p.add_argument("--price", type=float, default=1.0,
                   help="VM price per second (default 1)")


def _add_strategy_flags(p, kinds, default=None) -> None:
    p.add_argument("--strategy", choices=kinds,
                   required=default is None, default=default)
    p.add_argument("--r", type=int, default=0,
                   help="extra speculative attempts (default 0)")
    p.add_argument("--tau-est", type=float, default=None,
                   help="straggler detection time (default 0.3*tmin; "
                        "always 0 for clone)")
    p.add_argument("--tau-kill", type=float, default=None,
                   help="prune time for losing attempts (default 0.8*tmin)")
    p.add_argument("--phi", type=float, default=0.0,
                   help="assumed progress fraction recovered by s-resume "
                        "(default 0)")


def _add_utility_flags(p) -> None:
    p.add_argument("--theta", type=float, default=1e-4,
                   help="reward/cost tradeoff factor (default 1e-4)")
    p.add_argument("--rmin", type=float, default=None,
                   help="minimum acceptable PoCD (default: PoCD with no "
                        "speculation)")


def _add_sim_flags(p) -> None:
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=_env_seed(),
                   help="RNG seed (default $CHRONOS_SEED or 0)")
    p.add_argument("--detection", choices=["oracle", "estimator"],
                   default="oracle")
    p.add_argument("--jvm-delay", type=float, default=0.0,
                   help="startup lag before an attempt reports progress")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chronos",
        description="Deadline-aware speculative execution: closed-form "
                    "analysis, utility optimization, and trace-driven "
                    "simulation of straggler mitigation strategies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pocd", help="analytic probability of completing "
                                    "before the deadline")
    _add_job_flags(p, deadline_required=True)
    _add_strategy_flags(p, _ALL_KINDS)
    _add_output(p)
    p.set_defaults(func=cmd_pocd)

    p = sub.add_parser("cost", help="analytic expected machine time")
    _add_job_flags(p, deadline_required=True)
    _add_strategy_flags(p, _ALL_KINDS)
    _add_output(p)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("utility", help="net utility at a fixed r")
    _add_job_flags(p, deadline_required=True)
    _add_strategy_flags(p, _TUNABLE)
    _add_utility_flags(p)
    _add_output(p)
    p.set_defaults(func=cmd_utility)

    p = sub.add_parser("optimize", help="choose r maximizing net utility")
    _add_job_flags(p, deadline_required=True)
    _add_strategy_flags(p, _TUNABLE + ("all",), default="all")
    _add_utility_flags(p)
    _add_output(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compare", help="side-by-side strategy PoCD at one r")
    _add_job_flags(p, deadline_required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--tau-est", type=float, default=None)
    p.add_argument("--phi", type=float, default=0.0)
    _add_output(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte Carlo PoCD and machine time")
    _add_job_flags(p, deadline_required=True)
    _add_strategy_flags(p, _ALL_KINDS)
    _add_sim_flags(p)
    p.add_argument("--baselines", default="",
                   help="comma-separated extra schedulers to simulate "
                        "(hadoop-ns,hadoop-s,mantri)")
    p.add_argument("--no-winner-floor", action="store_true",
                   help="let resumed attempts finish faster than t_min")
    p.add_argument("--hadoop-s-period", type=float, default=10.0)
    p.add_argument("--mantri-period", type=float, default=10.0)
    p.add_argument("--mantri-gap", type=float, default=30.0)
    p.add_argument("--mantri-max-extra", type=int, default=3)
    p.add_argument("--theta", type=float, default=None,
                   help="also report simulated net utility at this theta")
    p.add_argument("--rmin", type=float, default=None)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="optimize r across a parameter grid")
    _add_job_flags(p, deadline_required=False)
    p.add_argument("--strategy", choices=_TUNABLE + ("all",), default="all")
    p.add_argument("--tau-est", type=float, default=None)
    p.add_argument("--tau-kill", type=float, default=None)
    p.add_argument("--phi", type=float, default=0.0)
    _add_utility_flags(p)
    p.add_argument("--sweep", required=True,
                   choices=["theta", "beta", "tau-est", "tau-kill",
                            "deadline"])
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=10,
                   help="grid intervals; 0 evaluates --from only")
    p.add_argument("--spacing", choices=["linear", "log"], default="linear")
    p.add_argument("--trials", type=int, default=0,
                   help="Monte Carlo trials per grid point (0: analytic "
                        "columns only)")
    p.add_argument("--seed", type=int, default=_env_seed())
    p.add_argument("--detection", choices=["oracle", "estimator"],
                   default="oracle")
    p.add_argument("--jvm-delay", type=float, default=0.0)
    p.add_argument("--workers", type=int, default=1,
                   help="parallel processes across grid points")
    p.add_argument("--plot-dir",
                   help="also render PNG figures into this directory")
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace-run",
                       help="optimize every job in a trace file")
    p.add_argument("--trace", required=True, help="trace CSV path")
    p.add_argument("--prices", default=None,
                   help="spot-price CSV; overrides per-job trace prices")
    p.add_argument("--strategy", choices=_TUNABLE + ("all",), default="all")
    _add_utility_flags(p)
    p.add_argument("--tau-est-frac", type=float, default=0.3,
                   help="tau_est as a fraction of each job's t_min")
    p.add_argument("--tau-kill-frac", type=float, default=0.8,
                   help="tau_kill as a fraction of each job's t_min")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=0,
                   help="Monte Carlo trials per job (0: analytic only)")
    p.add_argument("--seed", type=int, default=_env_seed())
    p.add_argument("--detection", choices=["oracle", "estimator"],
                   default="oracle")
    p.add_argument("--jvm-delay", type=float, default=0.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot-dir",
                   help="also render PNG figures into this directory")
    _add_output(p)
    p.set_defaults(func=cmd_trace_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaMismatch, IoError) as exc:
        print(f"chronos: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ChronosError as exc:
        print(f"chronos: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"chronos: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"chronos: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
