import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import pandas as pd
from pydantic import BaseModel, ValidationError

from models.experiment import StringMetadata, TraceFileHeader
from models.strings import BitString
from utils.errors import TraceFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_HEADER_KEYS = ("n", "delta", "seed", "count", "pad")


def atomic_write_text(path: PathLike, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        logger.error(f"Failed to read {path}: {str(e)}")
        raise TraceFormatError(f"cannot read {path}: {e}")


def metadata_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_string(path: PathLike, bits: BitString, metadata: StringMetadata = None):
    atomic_write_text(path, bits.bits + "\n")
    if metadata is not None:
        atomic_write_text(metadata_path(path), metadata.model_dump_json(indent=2) + "\n")
    logger.info(f"Wrote {bits.length}-bit string to {path}")


def read_string(path: PathLike) -> BitString:
    lines = [line.strip() for line in _read_text(path).splitlines() if line.strip()]
    if not lines:
        return BitString(bits="")
    if len(lines) != 1:
        raise TraceFormatError(f"{path}: expected a single line of bits, found {len(lines)} lines")
    try:
        return BitString(bits=lines[0])
    except ValidationError:
        raise TraceFormatError(f"{path}: string file may only contain 0 and 1")


def format_header(header: TraceFileHeader) -> str:
    fields = [f"n={header.n}", f"delta={header.delta!r}", f"seed={header.seed}", f"count={header.count}"]
    if header.pad is not None:
        fields.append(f"pad={header.pad}")
    return "# " + " ".join(fields)


def parse_header(line: str) -> TraceFileHeader:
    if not line.startswith("#"):
        raise TraceFormatError("trace file must start with a '# n=... delta=... seed=... count=...' header")
    values = {}
    for token in line[1:].split():
        key, sep, value = token.partition("=")
        if not sep or key not in _HEADER_KEYS:
            raise TraceFormatError(f"unexpected header field {token!r}")
        values[key] = value
    try:
        return TraceFileHeader(**values)
    except ValidationError as e:
        raise TraceFormatError(f"invalid trace header: {e}")


def write_traces(path: PathLike, header: TraceFileHeader, traces: Iterable[BitString]):
    lines = [format_header(header)]
    lines.extend(trace.bits for trace in traces)
    if len(lines) - 1 != header.count:
        raise TraceFormatError(f"header announces {header.count} traces but {len(lines) - 1} were given")
    atomic_write_text(path, "\n".join(lines) + "\n")
    logger.info(f"Wrote {header.count} traces to {path}")


def read_traces(path: PathLike) -> Tuple[TraceFileHeader, List[BitString]]:
    lines = _read_text(path).splitlines()
    if not lines:
        raise TraceFormatError(f"{path} is empty")
    header = parse_header(lines[0])
    traces = []
    for number, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            continue
        try:
            traces.append(BitString(bits=line.strip()))
        except ValidationError:
            raise TraceFormatError(f"{path}:{number}: traces may only contain 0 and 1")
    if len(traces) != header.count:
        raise TraceFormatError(f"{path}: header announces {header.count} traces, found {len(traces)}")
    return header, traces


def write_json(path: PathLike, model: BaseModel):
    atomic_write_text(path, model.model_dump_json(indent=2) + "\n")


def read_json(path: PathLike, model_type):
    try:
        return model_type.model_validate_json(_read_text(path))
    except ValidationError as e:
        raise TraceFormatError(f"{path}: {e}")


def write_csv(path: PathLike, frame: pd.DataFrame):
    atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def read_csv(path: PathLike) -> pd.DataFrame:
    if not Path(path).exists():
        return pd.DataFrame()
    try:
        return pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise TraceFormatError(f"cannot read {path}: {e}")
