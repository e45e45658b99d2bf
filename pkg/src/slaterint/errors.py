"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DivergentParameterError(DomainError):
    """The requested integral diverges for this parameter set."""


class ConsistencyError(RuntimeError):
    """Two evaluations that must agree by construction did not."""


class BesselUnderflowWarning(RuntimeWarning):
    """K_nu(z) underflowed to zero (z too large for double precision)."""


class BranchWarning(RuntimeWarning):
    """A closed form was evaluated outside its real branch."""
