"""Exception types raised across the library.

Every failure mode that callers are expected to handle gets its own class, so
that numerical tooling can distinguish "input outside the mathematical domain"
(e.g. asking for a square root outside the image of the squaring map) from
"numerics gave up" (e.g. a path tracker that lost its quarry).
"""


class PslCoverError(Exception):
    """Base class for all library errors."""


# --- matrix level -----------------------------------------------------------

class NonFinite(PslCoverError):
    """An entry is NaN or infinite."""


class NonPositiveDeterminant(PslCoverError):
    """Determinant is not positive, or too far from 1 to renormalize."""


# --- universal cover --------------------------------------------------------

class AmbiguousRegion(PslCoverError):
    """Displacement extrema sit inside the tolerance band of a region wall."""


class NotHyperbolic(PslCoverError):
    """A hyperbolic element was required."""


# --- square map -------------------------------------------------------------

class NotInImage(PslCoverError):
    """Element is outside the image of the squaring map."""


class NegIdentityFiber(PslCoverError):
    """The point -I has no distinguished square root; use the fiber instead."""


class CentralInput(PslCoverError):
    """A central element was passed where a non-central one is required."""


class NotCentral(PslCoverError):
    """A central element was required."""


class DivergentApproach(PslCoverError):
    """Square-root lifts do not settle down on approach to a central crossing."""


class StepTooCoarse(PslCoverError):
    """Consecutive path samples are too far apart for reliable continuation."""


# --- character variety ------------------------------------------------------

class SingularFiber(PslCoverError):
    """Jacobian of the character map is rank-deficient (reducible locus)."""


class NoConvergence(PslCoverError):
    """Newton iteration failed to converge."""


class ForbiddenSample(PslCoverError):
    """Character path sample lies in the forbidden set."""


# --- surfaces / classes -----------------------------------------------------

class RelationViolated(PslCoverError):
    """Generator images do not satisfy the surface relation."""


class NotInW(PslCoverError):
    """A boundary image is not hyperbolic."""


class InterfaceNotHyperbolic(PslCoverError):
    """A gluing-curve image is not hyperbolic."""


class ClassTooHigh(PslCoverError):
    """Requested characteristic class violates the Milnor-Wood bound."""


class TargetUnreachable(PslCoverError):
    """Sampling could not realize the requested class within the retry budget."""


# --- homotopy engine --------------------------------------------------------

class WrongStartClass(PslCoverError):
    """Operation requires a specific characteristic class at the start point."""


class TrackerFailure(PslCoverError):
    """Path continuation failed after densification and retries."""


class TargetLeavesHyperbolic(PslCoverError):
    """Prescribed boundary target path leaves the hyperbolic locus."""


class NotInCommutatorImage(PslCoverError):
    """Cover element is not the commutator of any pair."""


class TemplateUnsupported(PslCoverError):
    """Surface template is outside the supported family."""


class DifferentClasses(PslCoverError):
    """Endpoints lie in different connected components."""


# --- CLI --------------------------------------------------------------------

class ParseError(PslCoverError):
    """Malformed input file or command line value."""
