"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`JCoverError`;
the CLI maps :class:`PrecisionError` to exit status 2 and every other
subclass to exit status 1.
"""


class JCoverError(Exception):
    pass


class DeterminantSignError(JCoverError, ValueError):
    """Matrix with non-positive determinant handed to the G constructor."""


class NotInGammaError(JCoverError, ValueError):
    """An element of level > 1 where an element of SL2(Z) was required."""


class AmbiguousFixpointError(JCoverError, ValueError):
    pass


class PrecisionError(JCoverError):
    """Numerical work could not be certified at the requested precision."""


class ExcludedJError(JCoverError, ValueError):
    pass


class SingularCurveError(JCoverError, ValueError):
    pass


class InvalidDiscriminantError(JCoverError, ValueError):
    pass


class LevelMismatchError(JCoverError, ValueError):
    pass


class IndeterminateError(JCoverError):
    """A numeric zero test landed inside the uncertainty band."""


class PreconditionError(JCoverError, ValueError):
    pass
