from typing import Optional

from utils.constants import EXIT_ALGORITHM_FAILURE, EXIT_USAGE


class SeptraceError(Exception):
    """Base error carrying a user-facing detail and the process exit code"""

    exit_code = EXIT_USAGE

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ParameterError(SeptraceError):
    pass


class InfeasibleParameters(ParameterError):
    pass


class IndexOutOfRange(ParameterError):
    pass


class InstanceTooLarge(ParameterError):
    pass


class TraceFormatError(SeptraceError):
    """Unreadable or malformed string/trace/config file"""


class ReconstructionError(SeptraceError):
    """A pipeline stage gave up; `stage` and `m` say where"""

    exit_code = EXIT_ALGORITHM_FAILURE

    def __init__(self, stage: str, detail: str, m: Optional[int] = None):
        where = f"{stage}" if m is None else f"{stage} (m={m})"
        super().__init__(f"{where}: {detail}")
        self.stage = stage
        self.m = m


class TEstimateFailure(ReconstructionError):
    def __init__(self, detail: str):
        super().__init__("t-estimate", detail)


class CoarseFailure(ReconstructionError):
    def __init__(self, detail: str, m: int):
        super().__init__("coarse", detail, m)


class FineFailure(ReconstructionError):
    def __init__(self, detail: str, m: int):
        super().__init__("fine", detail, m)


class LengthMismatch(ReconstructionError):
    def __init__(self, detail: str):
        super().__init__("unpad", detail)
