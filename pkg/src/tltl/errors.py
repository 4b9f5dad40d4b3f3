"""Exception types shared across the package."""


class TltlError(Exception):
    """Base class for all library errors."""


class FormulaSyntaxError(TltlError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnknownProposition(TltlError):
    pass


class HorizonOverflow(TltlError):
    pass


class AlphabetOverflow(TltlError):
    pass


class BudgetExceeded(TltlError):
    pass


class NonClassicalFormula(TltlError):
    pass


class EnumerationOverflow(TltlError):
    pass


class MisalignedSpec(TltlError):
    pass


class ArithError(TltlError):
    """Ill-formed or unsupported arithmetic formula."""


class CapExceeded(ArithError):
    pass


class ThirdOrderUnsupported(ArithError):
    pass


class FragmentViolation(TltlError):
    pass


class ReductionError(TltlError):
    pass
