"""Exception hierarchy shared by all soficmat modules."""


class SoficMatError(Exception):
    """Base class for every error raised by this package."""


class DegreeError(SoficMatError, ValueError):
    pass


class ShapeError(SoficMatError, ValueError):
    pass


class AlphabetError(SoficMatError, ValueError):
    pass


class PartitionError(SoficMatError, ValueError):
    pass


class AmalgamationError(SoficMatError, ValueError):
    """Raised when two vertices cannot be merged.

    ``label`` names the sub-matrix on which the legality check failed, or is
    None if the failure is not label specific (bad indices, u == v).
    """

    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class MergePreconditionError(SoficMatError, ValueError):
    pass


class MoveError(SoficMatError, ValueError):
    def __init__(self, message, step):
        super().__init__(f"move {step}: {message}")
        self.step = step


class BudgetError(SoficMatError, ValueError):
    pass


class DegeneracyError(SoficMatError, ValueError):
    pass


class FormError(SoficMatError, ValueError):
    pass


class SingularError(SoficMatError, ValueError):
    pass


class ParseError(SoficMatError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
