"""CSV ingestion and persistence for job traces, price histories, results.

All files are UTF-8 with LF line endings and a fixed header row. Floats are
serialized with 9 significant digits, so a load/write cycle is stable after
the first quantization. Loaders validate every field and point at offending
cells with 1-based line and column numbers (the header is line 1).
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (DegenerateSample, InvalidRange, IoError, ParseError,
                     SchemaMismatch)
from .model import JobSpec, ParetoParams, SampleStream

__all__ = [
    "TRACE_HEADER", "PRICE_HEADER", "RESULT_HEADER", "TraceRecord",
    "PriceRecord", "ResultRow", "WorkloadSpec", "format_float", "load_trace",
    "write_trace", "fit_pareto", "generate_workload", "load_prices",
    "price_at", "result_cells", "write_results", "load_results",
]

TRACE_HEADER = ("job_id", "submit_time_sec", "num_tasks", "t_min_sec",
                "beta", "deadline_sec", "price_per_vm_sec")
PRICE_HEADER = ("timestamp_sec", "price_per_vm_sec")
RESULT_HEADER = ("job_id", "strategy", "r_opt", "pocd_analytic",
                 "cost_analytic", "utility", "pocd_mc", "cost_mc", "seed")


def format_float(x: float) -> str:
    """9 significant digits; infinities render as 'inf'/'-inf', NaN as 'nan'."""
    return "%.9g" % x


@dataclass(frozen=True)
class TraceRecord:
    """One trace row; field order matches TRACE_HEADER."""

    job_id: str
    submit_time_sec: float
    num_tasks: int
    t_min_sec: float
    beta: float
    deadline_sec: float
    price_per_vm_sec: float

    def to_job(self) -> JobSpec:
        return JobSpec(job_id=self.job_id,
                       num_tasks=self.num_tasks,
                       params=ParetoParams(self.t_min_sec, self.beta),
                       deadline=self.deadline_sec,
                       price_per_vm_sec=self.price_per_vm_sec,
                       submit_time=self.submit_time_sec)


@dataclass(frozen=True)
class PriceRecord:
    timestamp_sec: float
    price_per_vm_sec: float


@dataclass(frozen=True)
class ResultRow:
    """One experiment outcome; field order matches RESULT_HEADER.

    Monte Carlo columns are NaN when no simulation was run; utility is -inf
    when no attainable reward gap exists.
    """

    job_id: str
    strategy: str
    r_opt: int
    pocd_analytic: float
    cost_analytic: float
    utility: float
    pocd_mc: float
    cost_mc: float
    seed: int


@dataclass(frozen=True)
class WorkloadSpec:
    """Ranges for synthetic trace generation; all draws are uniform.

    deadline_multiple scales the mean task time t_min*beta/(beta-1), so the
    beta range must stay above 1 for the mean to exist.
    """

    num_jobs: int
    num_tasks: tuple[int, int] = (10, 100)
    t_min: tuple[float, float] = (1.0, 10.0)
    beta: tuple[float, float] = (1.1, 2.5)
    deadline_multiple: tuple[float, float] = (2.0, 2.0)
    price: tuple[float, float] = (1.0, 1.0)
    interarrival: float = 0.0

    def __post_init__(self):
        if self.num_jobs < 0:
            raise InvalidRange(f"num_jobs must be >= 0, got {self.num_jobs}")
        for name in ("num_tasks", "t_min", "beta", "deadline_multiple",
                     "price"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidRange(f"{name} range [{lo}, {hi}] is empty")
        if self.num_tasks[0] < 1:
            raise InvalidRange("num_tasks lower bound must be >= 1")
        if self.t_min[0] <= 0:
            raise InvalidRange("t_min lower bound must be positive")
        if self.beta[0] <= 1:
            raise InvalidRange(
                "beta lower bound must exceed 1 so mean task time exists")
        if self.deadline_multiple[0] <= 1:
            raise InvalidRange("deadline_multiple lower bound must exceed 1")
        if self.price[0] <= 0:
            raise InvalidRange("price lower bound must be positive")
        if self.interarrival < 0:
            raise InvalidRange("interarrival must be >= 0")


# ---------------------------------------------------------------------------
# parsing helpers

def _open_read(path):
    try:
        return open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _open_write(path):
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _check_header(row: Sequence[str] | None, expected: tuple[str, ...],
                  path) -> None:
    if row is None:
        raise SchemaMismatch(f"{path}: empty file, expected header "
                             f"{','.join(expected)}")
    if tuple(h.strip() for h in row) != expected:
        raise SchemaMismatch(f"{path}: header {','.join(row)!r} does not "
                             f"match {','.join(expected)!r}")


def _field_count(row: Sequence[str], expected: int, line: int) -> None:
    if len(row) != expected:
        raise ParseError(line, 1,
                         f"expected {expected} fields, got {len(row)}")


def _parse_float(row: Sequence[str], col: int, line: int,
                 name: str) -> float:
    try:
        value = float(row[col - 1])
    except ValueError:
        raise ParseError(line, col,
                         f"{name}: not a number: {row[col - 1]!r}") from None
    if not math.isfinite(value):
        raise ParseError(line, col, f"{name}: must be finite, got {value}")
    return value


def _parse_int(row: Sequence[str], col: int, line: int, name: str) -> int:
    try:
        return int(row[col - 1])
    except ValueError:
        raise ParseError(line, col,
                         f"{name}: not an integer: {row[col - 1]!r}") from None


def _require(cond: bool, line: int, col: int, reason: str) -> None:
    if not cond:
        raise ParseError(line, col, reason)


# ---------------------------------------------------------------------------
# traces

def load_trace(path) -> list[JobSpec]:
    """Read a trace CSV into JobSpecs ordered by submit time.

    The sort is stable, so jobs sharing a submit time keep file order.
    """
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, TRACE_HEADER, path)
        jobs = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            _field_count(row, len(TRACE_HEADER), line)
            job_id = row[0].strip()
            _require(bool(job_id), line, 1, "job_id: must be non-empty")
            submit = _parse_float(row, 2, line, "submit_time_sec")
            ntasks = _parse_int(row, 3, line, "num_tasks")
            _require(ntasks >= 1, line, 3, f"num_tasks: {ntasks} < 1")
            t_min = _parse_float(row, 4, line, "t_min_sec")
            _require(t_min > 0, line, 4, f"t_min_sec: {t_min} <= 0")
            beta = _parse_float(row, 5, line, "beta")
            _require(beta > 0, line, 5, f"beta: {beta} <= 0")
            deadline = _parse_float(row, 6, line, "deadline_sec")
            _require(deadline > t_min, line, 6,
                     f"deadline_sec: {deadline} <= t_min_sec {t_min}")
            price = _parse_float(row, 7, line, "price_per_vm_sec")
            _require(price >= 0, line, 7, f"price_per_vm_sec: {price} < 0")
            jobs.append(TraceRecord(job_id, submit, ntasks, t_min, beta,
                                    deadline, price).to_job())
    jobs.sort(key=lambda j: j.submit_time)
    return jobs


def write_trace(jobs: Iterable[JobSpec], path) -> None:
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for job in jobs:
            writer.writerow([
                job.job_id,
                format_float(job.submit_time),
                job.num_tasks,
                format_float(job.params.t_min),
                format_float(job.params.beta),
                format_float(job.deadline),
                format_float(job.price_per_vm_sec),
            ])


# ---------------------------------------------------------------------------
# fitting and generation

def fit_pareto(samples: Sequence[float]) -> ParetoParams:
    """Maximum-likelihood Pareto fit:

        t_min = min(samples),  beta = n / sum(ln(s_i / t_min))

    All-equal samples drive the log sum to zero (beta -> infinity), which
    ParetoParams cannot represent; that raises DegenerateSample instead.
    """
    if len(samples) < 2:
        raise DegenerateSample(f"need >= 2 samples, got {len(samples)}")
    if min(samples) <= 0:
        raise DegenerateSample("samples must be positive durations")
    t_min = float(min(samples))
    log_sum = math.fsum(math.log(s / t_min) for s in samples)
    if log_sum == 0.0:
        raise DegenerateSample(
            "all samples equal: fitted beta is infinite (no tail to fit)")
    return ParetoParams(t_min=t_min, beta=len(samples) / log_sum)


def generate_workload(spec: WorkloadSpec, seed: int) -> list[TraceRecord]:
    """Synthesize a trace by uniform draws within the requested ranges.

    Deadlines are deadline_multiple times the mean task time. Deterministic:
    the same (spec, seed) always yields the same records.
    """
    stream = SampleStream(seed, 0)
    records = []
    for j in range(spec.num_jobs):
        u = [float(v) for v in stream.uniforms(5)]
        lo, hi = spec.num_tasks
        ntasks = min(hi, lo + int(u[0] * (hi - lo + 1)))
        t_min = spec.t_min[0] + u[1] * (spec.t_min[1] - spec.t_min[0])
        beta = spec.beta[0] + u[2] * (spec.beta[1] - spec.beta[0])
        mult = (spec.deadline_multiple[0]
                + u[3] * (spec.deadline_multiple[1]
                          - spec.deadline_multiple[0]))
        price = spec.price[0] + u[4] * (spec.price[1] - spec.price[0])
        deadline = mult * (t_min + t_min / (beta - 1.0))
        records.append(TraceRecord(
            job_id=f"job-{j:05d}",
            submit_time_sec=j * spec.interarrival,
            num_tasks=ntasks,
            t_min_sec=t_min,
            beta=beta,
            deadline_sec=deadline,
            price_per_vm_sec=price,
        ))
    return records


# ---------------------------------------------------------------------------
# prices

def load_prices(path) -> list[PriceRecord]:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, PRICE_HEADER, path)
        prices = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            _field_count(row, len(PRICE_HEADER), line)
            ts = _parse_float(row, 1, line, "timestamp_sec")
            price = _parse_float(row, 2, line, "price_per_vm_sec")
            _require(price >= 0, line, 2, f"price_per_vm_sec: {price} < 0")
            if prices and ts <= prices[-1].timestamp_sec:
                raise ParseError(line, 1,
                                 f"timestamp_sec: {ts} not strictly "
                                 f"increasing after {prices[-1].timestamp_sec}")
            prices.append(PriceRecord(ts, price))
    return prices


def price_at(prices: Sequence[PriceRecord], t: float) -> float:
    """Step-function lookup: the latest record at or before t.

    Times before the first record fall back to the first price.
    """
    if not prices:
        raise ValueError("price list is empty")
    stamps = [p.timestamp_sec for p in prices]
    idx = max(0, bisect_right(stamps, t) - 1)
    return prices[idx].price_per_vm_sec


# ---------------------------------------------------------------------------
# results

def result_cells(r: ResultRow) -> list[str]:
    """Serialized cell values in RESULT_HEADER order."""
    return [
        r.job_id, r.strategy, str(r.r_opt),
        format_float(r.pocd_analytic),
        format_float(r.cost_analytic),
        format_float(r.utility),
        format_float(r.pocd_mc),
        format_float(r.cost_mc),
        str(r.seed),
    ]


def write_results(rows: Iterable[ResultRow], path) -> None:
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for r in rows:
            writer.writerow(result_cells(r))


def load_results(path) -> list[ResultRow]:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, RESULT_HEADER, path)
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            _field_count(row, len(RESULT_HEADER), line)
            rows.append(ResultRow(
                job_id=row[0],
                strategy=row[1],
                r_opt=_parse_int(row, 3, line, "r_opt"),
                pocd_analytic=_parse_result_float(row, 4, line,
                                                  "pocd_analytic"),
                cost_analytic=_parse_result_float(row, 5, line,
                                                  "cost_analytic"),
                utility=_parse_result_float(row, 6, line, "utility"),
                pocd_mc=_parse_result_float(row, 7, line, "pocd_mc"),
                cost_mc=_parse_result_float(row, 8, line, "cost_mc"),
                seed=_parse_int(row, 9, line, "seed"),
            ))
    return rows


def _parse_result_float(row: Sequence[str], col: int, line: int,
                        name: str) -> float:
    """Result floats admit the non-finite sentinels ('-inf', 'nan')."""
    try:
        return float(row[col - 1])
    except ValueError:
        raise ParseError(line, col,
                         f"{name}: not a number: {row[col - 1]!r}") from None
