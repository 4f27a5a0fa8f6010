"""Result record shared by the bound calculators and the solver checks."""

import math
from dataclasses import asdict, dataclass, field


@dataclass
class BoundReport:
    """One evaluated error bound.

    Attributes
    ----------
    bound_id : str
        Descriptive identifier of the formula.
    bound_value : float
        Value of the bound using exact constants (nan when invalid).
    inputs : dict
        Inputs the formula consumed.
    valid : bool
        False when a precondition failed; ``notes`` then names it.
    notes : str
    printed_value : float or None
        Value with the rounded constants as printed in the source, if they differ.
    empirical : float or None
        Observed quantity the bound is compared against.
    ratio : float or None
        ``empirical / bound_value`` when both are available and the bound is positive.
    argmax : float or None
        Location of the worst case for sup-type checks.
    """

    bound_id: str
    bound_value: float
    inputs: dict = field(default_factory=dict)
    valid: bool = True
    notes: str = ""
    printed_value: float = None
    empirical: float = None
    ratio: float = None
    argmax: float = None

    def attach(self, empirical, argmax=None):
        """Record an observed value and the resulting ratio."""
        self.empirical = float(empirical)
        self.argmax = argmax
        if self.valid and self.bound_value > 0:
            self.ratio = self.empirical / self.bound_value
        elif self.valid and self.empirical == 0:
            self.ratio = 0.0
        else:
            self.ratio = math.inf if self.valid else None
        return self

    @property
    def holds(self):
        """True unless a valid bound is exceeded by more than 1e-6 relative."""
        return not (self.valid and self.ratio is not None and self.ratio > 1.0 + 1e-6)

    def to_dict(self):
        d = asdict(self)
        for k, v in list(d.items()):
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return d


def invalid(bound_id, inputs, reason):
    """Report for a bound whose preconditions fail."""
    return BoundReport(bound_id, math.nan, dict(inputs), valid=False, notes=reason)
