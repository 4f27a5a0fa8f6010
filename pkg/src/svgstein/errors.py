"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class SingularityError(ValueError):
    """A density was requested at a point where it is infinite."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Attributes
    ----------
    achieved : float
        Estimated absolute error reported by the integrator.
    value : float
        The (unreliable) integral estimate.
    """

    def __init__(self, message, achieved=float("nan"), value=float("nan")):
        super().__init__(f"{message} (estimated error {achieved:.3g})")
        self.achieved = achieved
        self.value = value


class BoundValidityError(DomainError):
    """A bound formula is used outside the range where it is informative or proven."""
