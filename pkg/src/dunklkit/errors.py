"""Exception types raised across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class BesselRangeError(DomainError):
    """A Bessel argument exceeds the documented evaluation range."""


class SingularPointError(DomainError):
    """Evaluation requested exactly at an integrable singularity."""


class DeltaMeasure(DomainError):
    """The translation measure degenerates to a point mass.

    Raised when one of the two translation arguments is zero; ``atom`` is the
    location of the unit point mass that replaces the density.
    """

    def __init__(self, atom: float):
        super().__init__(f"translation measure is the point mass at z={atom!r}")
        self.atom = atom


class QuadratureError(RuntimeError):
    """Panel refinement failed to reach the requested tolerance."""


class UnsupportedOperation(NotImplementedError):
    """The operation is not available for the given root system."""
