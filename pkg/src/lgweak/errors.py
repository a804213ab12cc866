"""Exception hierarchy for lgweak."""


class LGWeakError(Exception):
    """Base class for all errors raised by this package."""


class NearOrthogonalPostSelection(LGWeakError):
    """Pre- and post-selected states overlap too little for a stable weak value."""


class EigendecompositionFailure(LGWeakError):
    pass


class GridTooSmall(LGWeakError):
    """The grid extent cannot contain the requested probe mode."""


class GridMismatch(LGWeakError):
    pass


class PostSelectionVanished(LGWeakError):
    """Post-selection probability fell below the renormalization floor."""


class DegenerateL(LGWeakError):
    pass


class SingularSystem(LGWeakError):
    pass


class ParseError(LGWeakError):
    pass


class ValidationError(LGWeakError):
    pass
