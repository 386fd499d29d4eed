"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 2, ``SolverError`` to 4.
"""


class SepNMFError(ValueError):
    pass


class InputError(SepNMFError):
    pass


class SolverError(SepNMFError):
    pass


class ShapeMismatch(InputError):
    pass


class EmptyColumn(InputError):
    def __init__(self, col_id):
        super().__init__(f"column {col_id!r} has no observed entry")
        self.col_id = col_id


class MissingLabel(InputError):
    def __init__(self, row_id):
        super().__init__(f"row {row_id!r} has no group label")
        self.row_id = row_id


class InvalidInput(InputError):
    pass


class EmptyInput(InputError):
    pass


class BadBinCount(InputError):
    pass


class ZeroVector(InputError):
    pass


class LengthOne(InputError):
    pass


class ParseError(InputError):
    def __init__(self, line, col, token=None):
        msg = f"cannot parse cell at line {line}, column {col}"
        if token is not None:
            msg += f": {token!r}"
        super().__init__(msg)
        self.line = line
        self.col = col


class NegativeValue(InputError):
    def __init__(self, line, col, value=None):
        super().__init__(f"negative value {value!r} at line {line}, column {col}")
        self.line = line
        self.col = col


class DuplicateId(InputError):
    pass


class InvalidSpec(InputError):
    pass


class RankTooLarge(SolverError):
    pass


class InvalidConfig(SolverError):
    pass


class ZeroNorm(SolverError):
    pass


class BadSliceCount(SolverError):
    pass


class DegenerateInput(SolverError):
    pass


class AllDiagonalsEmpty(SolverError):
    pass


class NoFeaturesSurvive(SolverError):
    pass
