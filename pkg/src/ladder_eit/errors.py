"""Exception types raised across the package."""


class CatalogError(ValueError):
    """A catalog document does not follow the schema.

    ``field`` names the offending entry (dotted path) so that callers can
    report it without parsing the message.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class CatalogValidationError(CatalogError):
    """A catalog parsed cleanly but breaks a physical invariant."""


class IntegrationError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best available estimate and its error bound are kept on the
    exception; ``index`` is the grid-point index when raised from a
    spectrum synthesis.
    """

    def __init__(self, message, estimate=None, error=None, index=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.index = index


class FitError(RuntimeError):
    """Least-squares fit failed. ``trace`` holds the iteration history."""

    def __init__(self, message, params=None, trace=None):
        super().__init__(message)
        self.params = params
        self.trace = trace if trace is not None else []


class RankDeficiencyError(FitError):
    """The Jacobian at the optimum does not have full column rank."""
