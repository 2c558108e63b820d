"""Exception hierarchy shared by all solver modules."""


class NegcurvError(Exception):
    """Base class for all library errors."""


class GridTooSmall(NegcurvError):
    """A finite-difference stencil does not fit on the grid."""


class DimensionError(NegcurvError):
    """An operation was called for an unsupported spatial dimension."""


class SingularHessian(NegcurvError):
    """|det D2u| fell below the configured determinant floor."""


class SingularMetric(NegcurvError):
    """|det g| fell below the configured determinant floor."""


class NotLorentzian(NegcurvError):
    """The Hessian/metric is not of Lorentzian signature where required."""


class NotSpacelike(NegcurvError):
    """A leaf or boundary facet fails the spacelike test."""


class EmptyDomain(NegcurvError):
    """Causal trimming consumed the whole grid."""


class CFLViolation(NegcurvError):
    """The requested time step exceeds the CFL limit."""


class SignatureLost(NegcurvError):
    """A Newton iterate left the Lorentzian signature class."""


class SupportTouchesBoundary(NegcurvError):
    """A field that must be compactly supported reaches the boundary."""


class StepTooLarge(NegcurvError):
    """The double-null cell solve became ill-conditioned for this step."""


class UnknownCheck(NegcurvError):
    """The convergence harness was asked for an unregistered check."""
