"""Exception hierarchy shared by all decsynth modules."""


class DecSynthError(Exception):
    """Base class for every error raised by this package."""


class AutomatonError(DecSynthError, ValueError):
    """An automaton is malformed, or an operation received a foreign state/event."""


class ModelError(DecSynthError, ValueError):
    """A control problem violates a well-formedness assumption.

    ``diagnostics`` carries parser diagnostics when the error originates from
    a model file.
    """

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = tuple(diagnostics)


class SizeBoundExceeded(DecSynthError):
    def __init__(self, bound):
        super().__init__(f"explicit state space exceeds the bound of {bound} states")
        self.bound = bound


class EmptySupervisor(DecSynthError):
    """No controllable and nonblocking supervisor exists (the initial state was pruned)."""

    def __init__(self, label, iterations=0):
        super().__init__(f"{label}: no controllable, nonblocking supervisor exists")
        self.label = label
        self.iterations = iterations


class NotApplicable(DecSynthError):
    """The structural reduction does not apply because RCNMS is violated."""

    def __init__(self, report):
        tags = ", ".join(sorted({v.tag for v in report.violations}))
        super().__init__(f"RCNMS properties violated ({tags}); no reduction guarantee")
        self.report = report
