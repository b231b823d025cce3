"""Tests for trace/price/result CSV round-trips, Pareto fitting, and
workload generation."""

import math

import numpy as np
import pytest

from chronos.errors import (DegenerateSample, InvalidRange, IoError,
                            ParseError, SchemaMismatch)
from chronos.model import (JobSpec, ParetoParams, SampleStream,
                           pareto_inverse_survival)
from chronos.traceio import (PRICE_HEADER, RESULT_HEADER, TRACE_HEADER,
                             PriceRecord, ResultRow, WorkloadSpec,
                             fit_pareto, format_float, generate_workload,
                             load_prices, load_results, load_trace, price_at,
                             write_results, write_trace)


def make_job(job_id="j", submit=0.0, n=10, t_min=1.0, beta=1.5,
             deadline=2.0, price=1.0):
    return JobSpec(job_id=job_id, num_tasks=n,
                   params=ParetoParams(t_min, beta), deadline=deadline,
                   price_per_vm_sec=price, submit_time=submit)


# ---------------------------------------------------------------------------
# trace files

def test_trace_round_trip(tmp_path):
    jobs = [make_job("a", submit=3.0, deadline=2.5),
            make_job("b", submit=1.0, n=3, t_min=2.0, beta=2.2, deadline=9.0,
                     price=0.25),
            make_job("c", submit=2.0, deadline=4.0)]
    path = tmp_path / "trace.csv"
    write_trace(jobs, path)
    loaded = load_trace(path)
    # loading orders by submit time
    assert [j.job_id for j in loaded] == ["b", "c", "a"]
    by_id = {j.job_id: j for j in loaded}
    for job in jobs:
        got = by_id[job.job_id]
        assert got.num_tasks == job.num_tasks
        assert got.params.t_min == pytest.approx(job.params.t_min, rel=1e-8)
        assert got.params.beta == pytest.approx(job.params.beta, rel=1e-8)
        assert got.deadline == pytest.approx(job.deadline, rel=1e-8)
        assert got.price_per_vm_sec == pytest.approx(job.price_per_vm_sec,
                                                     rel=1e-8)
        assert got.submit_time == pytest.approx(job.submit_time, rel=1e-8)


def test_trace_header_only_yields_no_jobs(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(",".join(TRACE_HEADER) + "\n")
    assert load_trace(path) == []


def test_trace_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("job,when,n\n")
    with pytest.raises(SchemaMismatch):
        load_trace(path)


def test_trace_parse_error_carries_line_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(",".join(TRACE_HEADER) + "\n"
                    + "j1,0,4,1.0,0.0,2.0,1.0\n")
    with pytest.raises(ParseError) as err:
        load_trace(path)
    msg = str(err.value)
    assert "line 2" in msg and "column 5" in msg and "beta" in msg


def test_trace_rejects_non_numeric_field(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(",".join(TRACE_HEADER) + "\n"
                    + "j1,0,4,oops,1.5,2.0,1.0\n")
    with pytest.raises(ParseError) as err:
        load_trace(path)
    assert "line 2" in str(err.value)


def test_trace_rejects_deadline_not_beyond_t_min(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(",".join(TRACE_HEADER) + "\n"
                    + "j1,0,4,2.0,1.5,2.0,1.0\n")
    with pytest.raises(ParseError):
        load_trace(path)


def test_missing_file_raises_io_error(tmp_path):
    with pytest.raises(IoError):
        load_trace(tmp_path / "nope.csv")


# ---------------------------------------------------------------------------
# Pareto fitting

def test_fit_pareto_worked_example():
    fitted = fit_pareto([1.0, 2.0, 4.0])
    assert fitted.t_min == 1.0
    assert fitted.beta == pytest.approx(1.0 / math.log(2.0), rel=1e-12)


def test_fit_pareto_rejects_degenerate_input():
    with pytest.raises(DegenerateSample):
        fit_pareto([3.0])
    with pytest.raises(DegenerateSample):
        fit_pareto([5.0, 5.0, 5.0])
    with pytest.raises(DegenerateSample):
        fit_pareto([1.0, -2.0, 3.0])


def test_fit_pareto_recovers_true_parameters():
    params = ParetoParams(t_min=2.0, beta=1.5)
    samples = pareto_inverse_survival(SampleStream(5).uniforms(100_000), params)
    fitted = fit_pareto(list(samples))
    assert fitted.t_min == pytest.approx(2.0, rel=1e-3)
    assert fitted.beta == pytest.approx(1.5, rel=0.02)


def test_fit_pareto_scale_equivariance():
    base = [1.0, 1.7, 2.9, 6.2, 14.0]
    fitted = fit_pareto(base)
    scaled = fit_pareto([60.0 * s for s in base])
    assert scaled.t_min == pytest.approx(60.0 * fitted.t_min, rel=1e-12)
    assert scaled.beta == pytest.approx(fitted.beta, rel=1e-12)


# ---------------------------------------------------------------------------
# workload generation

def test_workload_spec_validation():
    assert generate_workload(WorkloadSpec(num_jobs=0), seed=1) == []
    with pytest.raises(InvalidRange):
        WorkloadSpec(num_jobs=-1)
    with pytest.raises(InvalidRange):
        WorkloadSpec(num_jobs=1, beta=(1.0, 2.0))  # mean must exist
    with pytest.raises(InvalidRange):
        WorkloadSpec(num_jobs=1, t_min=(5.0, 2.0))  # inverted range
    with pytest.raises(InvalidRange):
        WorkloadSpec(num_jobs=1, deadline_multiple=(0.9, 2.0))


def test_generate_workload_is_deterministic_and_loadable(tmp_path):
    spec = WorkloadSpec(num_jobs=20, interarrival=2.5)
    a = generate_workload(spec, seed=8)
    b = generate_workload(spec, seed=8)
    assert a == b
    c = generate_workload(spec, seed=9)
    assert c != a
    path = tmp_path / "gen.csv"
    write_trace([r.to_job() for r in a], path)
    loaded = load_trace(path)
    assert len(loaded) == 20
    assert [j.job_id for j in loaded] == [f"job-{i:05d}" for i in range(20)]


def test_generate_workload_respects_ranges_and_deadline_rule():
    spec = WorkloadSpec(num_jobs=50, num_tasks=(5, 9), t_min=(2.0, 4.0),
                        beta=(1.3, 2.0), deadline_multiple=(2.0, 3.0),
                        price=(0.5, 1.5), interarrival=1.0)
    for j, rec in enumerate(generate_workload(spec, seed=12)):
        assert 5 <= rec.num_tasks <= 9
        assert 2.0 <= rec.t_min_sec <= 4.0
        assert 1.3 <= rec.beta <= 2.0
        assert 0.5 <= rec.price_per_vm_sec <= 1.5
        assert rec.submit_time_sec == pytest.approx(float(j))
        mean = rec.t_min_sec + rec.t_min_sec / (rec.beta - 1.0)
        assert 2.0 * mean <= rec.deadline_sec <= 3.0 * mean + 1e-12
        rec.to_job()  # must satisfy the job constraints


# ---------------------------------------------------------------------------
# price files

def test_price_lookup_steps_and_clamps(tmp_path):
    path = tmp_path / "prices.csv"
    path.write_text(",".join(PRICE_HEADER) + "\n"
                    + "10,0.5\n"
                    + "20,2.0\n")
    prices = load_prices(path)
    assert price_at(prices, 0.0) == 0.5    # before the first record
    assert price_at(prices, 10.0) == 0.5   # boundary belongs to the record
    assert price_at(prices, 19.99) == 0.5
    assert price_at(prices, 20.0) == 2.0
    assert price_at(prices, 1e9) == 2.0


def test_prices_must_increase(tmp_path):
    path = tmp_path / "prices.csv"
    path.write_text(",".join(PRICE_HEADER) + "\n10,0.5\n10,0.7\n")
    with pytest.raises(ParseError):
        load_prices(path)


def test_price_file_rejects_negative_price(tmp_path):
    path = tmp_path / "prices.csv"
    path.write_text(",".join(PRICE_HEADER) + "\n10,-0.5\n")
    with pytest.raises(ParseError):
        load_prices(path)


# ---------------------------------------------------------------------------
# result files

def test_write_results_empty_is_header_only(tmp_path):
    path = tmp_path / "results.csv"
    write_results([], path)
    assert path.read_text() == ",".join(RESULT_HEADER) + "\n"
    assert load_results(path) == []


def test_result_round_trip_with_sentinels(tmp_path):
    rows = [
        ResultRow("j1", "clone", 3, 0.9, 120.5, -0.25, 0.91, 119.0, 7),
        ResultRow("j2", "s-restart", 0, float("nan"), 40.0, float("-inf"),
                  float("nan"), float("nan"), 7),
    ]
    path = tmp_path / "results.csv"
    write_results(rows, path)
    got = load_results(path)
    assert [r.job_id for r in got] == ["j1", "j2"]
    assert got[0].r_opt == 3 and got[0].seed == 7
    assert got[0].pocd_analytic == pytest.approx(0.9, rel=1e-8)
    assert got[1].utility == float("-inf")
    assert math.isnan(got[1].pocd_analytic) and math.isnan(got[1].cost_mc)


def test_result_round_trip_random_rows(tmp_path):
    gen = np.random.default_rng(3)
    rows = [ResultRow(job_id=f"job-{i}", strategy="s-resume",
                      r_opt=int(gen.integers(0, 20)),
                      pocd_analytic=float(gen.random()),
                      cost_analytic=float(gen.uniform(1, 1e4)),
                      utility=float(gen.normal()),
                      pocd_mc=float(gen.random()),
                      cost_mc=float(gen.uniform(1, 1e4)),
                      seed=int(gen.integers(0, 1 << 31)))
            for i in range(100)]
    path = tmp_path / "results.csv"
    write_results(rows, path)
    got = load_results(path)
    assert len(got) == 100
    for want, have in zip(rows, got):
        assert have.job_id == want.job_id
        assert have.r_opt == want.r_opt
        assert have.seed == want.seed
        for field in ("pocd_analytic", "cost_analytic", "utility",
                      "pocd_mc", "cost_mc"):
            assert getattr(have, field) == pytest.approx(
                getattr(want, field), rel=1e-8)


def test_results_reject_wrong_header(tmp_path):
    path = tmp_path / "results.csv"
    path.write_text("a,b,c\n")
    with pytest.raises(SchemaMismatch):
        load_results(path)


def test_format_float_is_compact_and_stable():
    assert format_float(1.0) == "1"
    assert format_float(0.25) == "0.25"
    assert format_float(1e9) == "1e+09"
    # nine significant digits survive the round-trip
    assert float(format_float(0.123456789123)) == pytest.approx(
        0.123456789123, rel=1e-8)
