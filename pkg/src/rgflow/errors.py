"""Exception hierarchy shared by every rgflow module."""


class RGFlowError(Exception):
    """Base class for all rgflow errors."""


class InvalidHypothesis(RGFlowError, ValueError):
    """Problem data violates a standing hypothesis.

    ``label`` is "H1" (norm index q and data), "H2" (diffusion coefficient),
    "H3" (nonlinearity) or "lambda-range"; ``field`` names the offending input.
    """

    def __init__(self, label, message, field=None):
        self.label = label
        self.field = field
        where = f" [{field}]" if field else ""
        super().__init__(f"{label}{where}: {message}")


class RadiusExceeded(RGFlowError):
    """Solution left the working analyticity region of the nonlinearity."""


class NoContraction(RGFlowError):
    """Picard iteration failed to converge within the iteration budget."""


class InadmissibleData(RGFlowError):
    """Initial data of an RG step is not below its admissibility threshold."""


class InvalidDelta(RGFlowError, ValueError):
    """The exponent delta does not satisfy delta in (0,1), delta-1 > p+3-alpha(p+1)."""


class DegenerateSeries(RGFlowError, ValueError):
    """A time series is too short, too narrow or non-positive for fitting."""


class NonConvergent(RGFlowError):
    """A sequence does not behave geometrically enough to extrapolate."""


class ConfigError(RGFlowError, ValueError):
    """Base class for experiment-configuration problems."""


class ParseError(ConfigError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field}")
        suffix = f" ({', '.join(loc)})" if loc else ""
        super().__init__(message + suffix)


class ValidationError(ConfigError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class QuadratureFailure(RGFlowError):
    """A numerical integral missed its tolerance.

    The built-in diffusion families integrate in closed form, so the core
    never raises this; it is the contract for user-supplied coefficients.
    """
