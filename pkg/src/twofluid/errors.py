"""Exception hierarchy.

Input problems raise :class:`ValidationError`; anything that goes wrong while
the scheme is running derives from :class:`NumericalAbort` and carries the
offending cell (and, once the driver has seen it, the step index).
"""


class ValidationError(ValueError):
    """Rejected input: bad case file, inadmissible state, bad config."""


class NumericalAbort(RuntimeError):
    """Base for every abort raised from inside the time loop."""

    def __init__(self, message, cell=None, step=None):
        super().__init__(message)
        self.message = message
        self.cell = cell
        self.step = step

    def __str__(self):
        where = []
        if self.step is not None:
            where.append(f"step {self.step}")
        if self.cell is not None:
            where.append(f"cell {self.cell}")
        if where:
            return f"{self.message} ({', '.join(where)})"
        return self.message


class ClosureError(NumericalAbort):
    pass


class NoAdmissibleRoot(ClosureError):
    pass


class TwoAdmissibleRoots(ClosureError):
    pass


class ClosureInconsistency(ClosureError):
    pass


class SoundSpeedError(ClosureError):
    pass


class CFLViolation(NumericalAbort):
    pass


class DiffusionLimitError(NumericalAbort):
    pass


class VacuumError(NumericalAbort):
    pass


class BandSolveError(NumericalAbort):
    pass


class BoundaryContamination(NumericalAbort):
    pass
