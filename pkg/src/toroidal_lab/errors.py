"""Exception types shared across the toolkit."""


class ToroidalLabError(Exception):
    pass


class DomainError(ToroidalLabError, ValueError):
    """Parameters outside the admissible domain (e.g. Im τ <= 0)."""


class ConfigError(ToroidalLabError, ValueError):
    pass


class PrecisionExhausted(ToroidalLabError):
    """Available digits cannot certify the requested quantity."""


class OverflowBudgetError(ToroidalLabError, OverflowError):
    pass


class AliasingError(ToroidalLabError, ValueError):
    pass


class DegenerateFitError(ToroidalLabError, ValueError):
    pass


class RecipeError(ToroidalLabError, ValueError):
    pass


class ClosednessError(ToroidalLabError, ValueError):
    """A form handed to the solver fails the spectral closedness check."""

    def __init__(self, residual: float, tol: float):
        self.residual = float(residual)
        self.tol = float(tol)
        super().__init__(f"form is not dbar-closed: spectral residual {residual:.3e} > {tol:.1e}")


class ResonanceError(ToroidalLabError, ZeroDivisionError):
    """An exactly vanishing denominator in a margin computation."""

    def __init__(self, index, message: str = ""):
        self.index = tuple(index)
        super().__init__(message or f"vanishing denominator at m={self.index}")


class ResonantObstruction(ToroidalLabError):
    """A resonant mode carries data the equation cannot absorb."""

    def __init__(self, mode, data_abs: float, divisor_abs: float, stage: str = ""):
        self.mode = tuple(int(k) for k in mode)
        self.data_abs = float(data_abs)
        self.divisor_abs = float(divisor_abs)
        self.stage = stage
        super().__init__(
            f"resonant mode {self.mode}{' in ' + stage if stage else ''}: "
            f"|data|={self.data_abs:.3e}, |divisor|={self.divisor_abs:.3e}"
        )

    def as_dict(self) -> dict:
        return {
            "mode": list(self.mode),
            "data_abs": self.data_abs,
            "divisor_abs": self.divisor_abs,
            "stage": self.stage,
        }
