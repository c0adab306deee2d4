"""Exception types shared across modules."""


class NCRatError(Exception):
    """Base class; ``detail`` and ``location`` feed the CLI error payload."""

    def __init__(self, detail: str = "", location: str | None = None):
        super().__init__(detail)
        self.detail = detail
        self.location = location


class SingularPencil(NCRatError):
    pass


class SingularAtZero(NCRatError):
    pass


class NotPure(NCRatError):
    pass


class Indeterminate(NCRatError):
    pass


class NotContractive(NCRatError):
    pass


class NotPositive(NCRatError):
    pass


class InnerSymbol(NCRatError):
    pass


class NotHermitian(NCRatError):
    pass


class CapExceeded(NCRatError):
    pass
