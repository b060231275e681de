import pandas as pd
import pytest

from models.experiment import ExperimentConfig, StringMetadata, TraceFileHeader
from models.strings import BitString
from services.storage import (
    format_header,
    metadata_path,
    parse_header,
    read_csv,
    read_json,
    read_string,
    read_traces,
    write_csv,
    write_json,
    write_string,
    write_traces,
)
from utils.errors import TraceFormatError


def test_string_file_round_trip(tmp_path):
    path = tmp_path / "x.txt"
    metadata = StringMetadata(n=5, L=2, t=2, seed=3, gaps=[1, 2, 0])
    write_string(path, BitString(bits="01001"), metadata)
    assert path.read_text() == "01001\n"
    assert read_string(path).bits == "01001"
    assert read_json(metadata_path(path), StringMetadata) == metadata


def test_empty_string_file_round_trip(tmp_path):
    path = tmp_path / "empty.txt"
    write_string(path, BitString(bits=""))
    assert path.read_text() == "\n"
    assert read_string(path).length == 0


def test_string_file_rejects_junk(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("01x01\n")
    with pytest.raises(TraceFormatError):
        read_string(path)
    path.write_text("01\n10\n")
    with pytest.raises(TraceFormatError):
        read_string(path)
    with pytest.raises(TraceFormatError):
        read_string(tmp_path / "missing.txt")


def test_header_format():
    header = TraceFileHeader(n=10, delta=0.05, seed=7, count=3)
    assert format_header(header) == "# n=10 delta=0.05 seed=7 count=3"
    assert parse_header(format_header(header)) == header
    padded = header.model_copy(update={"pad": 4})
    assert format_header(padded).endswith(" pad=4")
    assert parse_header(format_header(padded)).pad == 4


@pytest.mark.parametrize(
    "line",
    ["n=10 delta=0.1 seed=1 count=0", "# n=10 delta=0.1 seed=1", "# n=10 delta=2 seed=1 count=0", "# n=10 bogus=1"],
)
def test_bad_headers(line):
    with pytest.raises(TraceFormatError):
        parse_header(line)


def test_trace_file_round_trip_keeps_empty_traces(tmp_path):
    path = tmp_path / "traces.txt"
    traces = [BitString(bits="0101"), BitString(bits=""), BitString(bits="1")]
    header = TraceFileHeader(n=5, delta=0.3, seed=2, count=3)
    write_traces(path, header, traces)
    read_header, read_back = read_traces(path)
    assert read_header == header
    assert read_back == traces


def test_trace_file_count_must_match(tmp_path):
    header = TraceFileHeader(n=2, delta=0.0, seed=0, count=2)
    with pytest.raises(TraceFormatError):
        write_traces(tmp_path / "t.txt", header, [BitString(bits="01")])

    path = tmp_path / "short.txt"
    path.write_text("# n=2 delta=0.0 seed=0 count=2\n01\n")
    with pytest.raises(TraceFormatError):
        read_traces(path)


def test_trace_file_rejects_bad_lines(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("# n=2 delta=0.0 seed=0 count=1\n0a\n")
    with pytest.raises(TraceFormatError):
        read_traces(path)
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(TraceFormatError):
        read_traces(empty)


def test_config_json_round_trip(tmp_path):
    config = ExperimentConfig(n=1_000, L=50, density=0.01, delta=0.02, master_seed=9, repetitions=3)
    path = tmp_path / "config.json"
    write_json(path, config)
    assert read_json(path, ExperimentConfig) == config


def test_bad_json_is_a_format_error(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"n": -1, "L": 3, "t": 1}')
    with pytest.raises(TraceFormatError):
        read_json(path, ExperimentConfig)


def test_csv_helpers(tmp_path):
    path = tmp_path / "sweep.csv"
    assert read_csv(path).empty
    frame = pd.DataFrame([{"delta": 0.01, "L": 5}])
    write_csv(path, frame)
    assert read_csv(path).to_dict("records") == [{"delta": 0.01, "L": 5}]
