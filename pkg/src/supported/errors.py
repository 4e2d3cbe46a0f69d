class WorkbenchError(Exception):
    """Base error; `code` is a short stable identifier used in reports."""

    code = "error"

    def __init__(self, message="", **details):
        super().__init__(message or self.code)
        self.details = details


class InvalidSize(WorkbenchError):
    code = "invalid-size"


class NotATree(WorkbenchError):
    code = "not-a-tree"


class BudgetExceeded(WorkbenchError):
    code = "budget-exceeded"


class CapExceeded(WorkbenchError):
    code = "cap-exceeded"


class SizeCap(WorkbenchError):
    code = "size-cap"


class InvalidInput(WorkbenchError):
    code = "invalid-input"


class InvalidK(WorkbenchError):
    code = "invalid-k"


class MissingParent(WorkbenchError):
    code = "missing-parent"


class RejectedInstance(WorkbenchError):
    code = "rejected-instance"


class InvalidColoring(WorkbenchError):
    code = "invalid-coloring"


class InvalidDefaultColoring(WorkbenchError):
    code = "invalid-default-coloring"


class NotFound(WorkbenchError):
    code = "not-found"


class CompletionFailed(WorkbenchError):
    code = "completion-failed"


class Inconsistent(WorkbenchError):
    code = "inconsistent"


class InvalidN0(WorkbenchError):
    code = "invalid-n0"


class InvalidCover(WorkbenchError):
    code = "invalid-cover"


class PreprocessFailed(WorkbenchError):
    code = "preprocess-failed"


class UsageError(WorkbenchError):
    code = "usage"
