"""Deadline-aware speculative execution for MapReduce-style jobs.

Closed-form completion probability and machine-time cost for three straggler
mitigation strategies (clone, speculative restart, speculative resume), a net
utility optimizer for the number of speculative attempts, a trace-driven
Monte Carlo simulator with Hadoop-style and progress-based baselines, and CSV
trace/price/result plumbing.
"""

from .analytics import (ComparisonReport, CostResult, InequalityCheck,
                        PoCDResult, clone_resume_threshold, compare_strategies,
                        cost_clone, cost_for, cost_s_restart, cost_s_resume,
                        pocd_clone, pocd_for, pocd_s_restart, pocd_s_resume,
                        restart_tail_integral, scan_clone_resume_crossover)
from .errors import (ChronosError, DegenerateSample, DivergentMoment,
                     InvalidDeadline, InvalidFloor, InvalidRange, InvalidTimes,
                     InvalidWindow, IoError, NoProgress, ParseError,
                     QuadratureFailure, SchemaMismatch, SearchCapReached)
from .model import (ANALYTIC_KINDS, JobSpec, ParetoParams, SampleStream,
                    StrategyConfig, StrategyKind, conditional_tail_sample,
                    min_expectation, pareto_inverse_survival, pareto_sample,
                    pareto_samples, pareto_survival, truncated_mean)
from .optimizer import (OptimizationResult, OptimizerParams, UtilityConfig,
                        brute_force_r, gamma_threshold, net_utility,
                        optimize_r)
from .simulator import (AttemptRecord, DetectionMode, JobOutcome, ResumeOffset,
                        SimConfig, SimReport, TaskOutcome, estimate_completion,
                        estimate_completion_hadoop, resume_offset, run_trials,
                        simulate_job)
from .traceio import (PriceRecord, ResultRow, TraceRecord, WorkloadSpec,
                      fit_pareto, generate_workload, load_prices, load_results,
                      load_trace, price_at, write_results, write_trace)

__version__ = "0.1.0"

__all__ = [
    "ANALYTIC_KINDS", "AttemptRecord", "ChronosError", "ComparisonReport",
    "CostResult", "DegenerateSample", "DetectionMode", "DivergentMoment",
    "InequalityCheck", "InvalidDeadline", "InvalidFloor", "InvalidRange",
    "InvalidTimes", "InvalidWindow", "IoError", "JobOutcome", "JobSpec",
    "NoProgress", "OptimizationResult", "OptimizerParams", "ParetoParams",
    "ParseError", "PoCDResult", "PriceRecord", "QuadratureFailure",
    "ResultRow", "ResumeOffset", "SampleStream", "SchemaMismatch",
    "SearchCapReached", "SimConfig", "SimReport", "StrategyConfig",
    "StrategyKind", "TaskOutcome", "TraceRecord", "UtilityConfig",
    "WorkloadSpec", "brute_force_r", "clone_resume_threshold",
    "compare_strategies", "conditional_tail_sample", "cost_clone", "cost_for",
    "cost_s_restart", "cost_s_resume", "estimate_completion",
    "estimate_completion_hadoop", "fit_pareto", "gamma_threshold",
    "generate_workload", "load_prices", "load_results", "load_trace",
    "min_expectation", "net_utility", "optimize_r", "pareto_inverse_survival",
    "pareto_sample", "pareto_samples", "pareto_survival", "pocd_clone",
    "pocd_for", "pocd_s_restart", "pocd_s_resume", "price_at",
    "restart_tail_integral", "resume_offset", "run_trials",
    "scan_clone_resume_crossover", "simulate_job", "truncated_mean",
    "write_results", "write_trace", "__version__",
]
