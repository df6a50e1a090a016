"""Exception types raised by the simulation and estimation stages."""


class ScenarioError(ValueError):
    """Scene configuration produces an unusable geometry (negative or colliding delays)."""


class DegenerateBeamError(ValueError):
    """Beam combination collapses to the zero vector."""


class BeamMeasurementError(RuntimeError):
    """Beam pattern has no usable mainlobe for a width measurement."""


class EstimationError(RuntimeError):
    """Base class for failures inside the estimation pipeline."""


class NoTargetError(EstimationError):
    """No correlation lag exceeded the detection threshold."""


class DetectionShortfallError(EstimationError):
    """Fewer peaks above threshold than the number of expected targets."""


class SingularDesignError(EstimationError):
    """Least-squares design matrix is singular or ill-conditioned."""


class AssociationError(EstimationError):
    """Detected target counts differ across frames; rank-order association impossible."""


class AggregationError(RuntimeError):
    """No successful trials to aggregate."""
