"""Exception types raised on invalid input or degenerate estimation problems."""


class DegeneracyError(ValueError):
    """A numerical sub-problem is singular or unidentifiable."""


class SingularGramError(DegeneracyError):
    pass


class RankDeficientError(DegeneracyError):
    pass


class SingularInformationError(DegeneracyError):
    pass


class ZeroInputError(DegeneracyError):
    pass
