import logging

import pytest

from models.experiment import ExperimentConfig, RepetitionRecord
from models.strings import SeparatedString
from services import experiments
from services.experiments import (
    SWEEP_COLUMNS,
    aggregate,
    cell_config,
    coarse_errors,
    edit_distance,
    run_experiment,
    run_repetition,
    run_sweep,
)
from utils.constants import THREADS_ENV
from utils.errors import CoarseFailure, ParameterError
from utils.workers import get_worker_count, map_ordered, reset_worker_count


def noiseless_config(**overrides) -> ExperimentConfig:
    settings = dict(n=400, L=20, t=5, delta=0.0, master_seed=17, coarse_reps=3, fine_traces=3, t_traces=3, repetitions=2)
    settings.update(overrides)
    return ExperimentConfig(**settings)


def test_edit_distance():
    assert edit_distance("0101", "0101") == 0
    assert edit_distance("0101", "011") == 1
    assert edit_distance("0" * 10_000 + "1" + "0" * 10_000, "0" * 10_003 + "1" + "0" * 9_997) == 2
    assert edit_distance("0" * 30_000, "1" * 30_000) is None


def test_coarse_errors_are_normalised():
    truth = SeparatedString(gaps=(100, 400))
    errors = coarse_errors([95.0, 370.0], truth, 0.05)
    assert errors == pytest.approx([0.0, 10 / 20])


def test_config_needs_ones():
    with pytest.raises(ValueError):
        ExperimentConfig(n=10, L=2)
    assert ExperimentConfig(n=1_000, L=2, density=0.02).target_t == 20


def test_pipeline_config_defaults_to_padded_length():
    cfg = noiseless_config().pipeline_config()
    assert cfg.align_cfg.n_ref == 440
    assert cfg.padding == 20


def test_noiseless_repetitions_succeed():
    report = run_experiment(noiseless_config())
    assert report.aggregate.runs == 2
    assert report.aggregate.successes == 2
    assert all(r.edit_distance == 0 for r in report.repetitions)
    assert all(r.t_estimated == r.t_true == 5 for r in report.repetitions)
    assert report.aggregate == aggregate(report.repetitions)
    assert report.aggregate.max_coarse_error == 0.0
    assert all(r.coarse_within_tolerance for r in report.repetitions)
    assert report.aggregate.coarse_within_tolerance_rate == 1.0


def test_aggregate_counts_coarse_errors_over_tolerance():
    records = [
        RepetitionRecord(index=0, seed=1, success=True, t_true=3, coarse_errors=[0.5, 2.0], coarse_within_tolerance=True),
        RepetitionRecord(index=1, seed=2, success=True, t_true=3, coarse_errors=[12.0], coarse_within_tolerance=False),
        RepetitionRecord(index=2, seed=3, success=False, t_true=3, failing_stage="coarse"),
    ]
    summary = aggregate(records)
    assert summary.coarse_within_tolerance_rate == 0.5
    assert summary.max_coarse_error == 12.0


def test_reports_are_reproducible():
    first = run_experiment(noiseless_config(delta=0.01, fine_traces=200, t_traces=100, coarse_reps=16))
    again = run_experiment(noiseless_config(delta=0.01, fine_traces=200, t_traces=100, coarse_reps=16))
    assert first.science_json() == again.science_json()
    assert "timings" not in first.science_json()


def test_repetition_records_the_failing_stage(monkeypatch):
    def stalled(*args, **kwargs):
        raise CoarseFailure("no quorum", 3)

    monkeypatch.setattr(experiments, "run_pipeline", stalled)
    record, timings = run_repetition((noiseless_config(repetitions=1), 0))
    assert not record.success
    assert (record.failing_stage, record.failing_m) == ("coarse", 3)
    assert timings == {}


def test_sweep_writes_one_row_per_cell(tmp_path):
    out = tmp_path / "sweep.csv"
    table = run_sweep(noiseless_config(repetitions=1), [0.0], [10, 20], [1.0], str(out))
    assert list(table.columns) == SWEEP_COLUMNS
    assert len(table) == 2
    assert (table["success_rate"] == 1.0).all()
    assert out.read_text().splitlines()[0] == ",".join(SWEEP_COLUMNS)


def test_sweep_resumes_finished_cells(tmp_path, monkeypatch):
    out = tmp_path / "sweep.csv"
    base = noiseless_config(repetitions=1)
    first = run_sweep(base, [0.0], [20], [1.0], str(out))

    def boom(config):
        raise AssertionError("finished cells must not run again")

    monkeypatch.setattr(experiments, "run_experiment", boom)
    again = run_sweep(base, [0.0], [20], [1.0], str(out))
    assert len(again) == 1
    assert again.iloc[0]["success_rate"] == first.iloc[0]["success_rate"] == 1.0
    assert int(again.iloc[0]["cell_seed"]) == int(first.iloc[0]["cell_seed"])


def test_sweep_cells_are_validated():
    with pytest.raises(ParameterError):
        cell_config(noiseless_config(), 1.5, 20, 1.0, 0)


def test_worker_count_from_environment(monkeypatch, caplog):
    monkeypatch.setenv(THREADS_ENV, "3")
    reset_worker_count()
    assert get_worker_count() == 3

    monkeypatch.setenv(THREADS_ENV, "many")
    reset_worker_count()
    with caplog.at_level(logging.WARNING):
        assert get_worker_count() == 1
    assert THREADS_ENV in caplog.text


def test_map_ordered_keeps_order():
    assert map_ordered(abs, [-3, 2, -1]) == [3, 2, 1]
