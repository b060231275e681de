import pytest

from models.experiment import ValidationOptions
from models.strings import BitString
from services.storage import write_string
from services.validation import DEFAULT_SUITES, SUITES, check_behind_bound, check_string, run_suite, run_suites
from utils.errors import ParameterError


def test_every_suite_is_registered():
    assert set(DEFAULT_SUITES) | {"string"} == set(SUITES)


def test_behind_fraction_stays_below_200_delta():
    result = check_behind_bound(seed=1)
    assert result.passed, result.detail
    assert 5.0 <= result.measured["chain_ratio"] <= 20.0


def test_behind_fraction_at_a_single_delta():
    result = check_behind_bound(runs=20_000, delta=0.01, seed=2)
    assert result.passed
    assert result.measured["chain_ratio"] is None
    assert all(rate <= 0.05 for rate in result.measured["rates"]["0.01"].values())


def test_string_check(tmp_path):
    path = tmp_path / "x.txt"
    write_string(path, BitString(bits="0100010001"))
    assert check_string(string_path=str(path)).passed
    assert check_string(string_path=str(path), L=3).passed
    failed = check_string(string_path=str(path), L=4)
    assert not failed.passed
    assert failed.measured["short_runs"] == [1, 2]


def test_string_check_needs_a_file():
    with pytest.raises(ParameterError):
        check_string()


def test_run_suite_uses_options():
    report = run_suites(["catalan", "pk-bound"], ValidationOptions(delta=1e-7))
    assert report.passed
    assert [c.name for c in report.checks] == ["catalan", "pk-bound"]
    assert report.checks[1].measured["delta"] == 1e-7


def test_unknown_suite():
    with pytest.raises(ParameterError):
        run_suite("nope", ValidationOptions())
