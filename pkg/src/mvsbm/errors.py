"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` which the command line
front end prints as ``ERROR <code>: <message>``.
"""


class MvsbmError(ValueError):
    code = "MvsbmError"

    def __init__(self, message=""):
        super().__init__(message)
        self.message = message


def _make(name, doc):
    return type(name, (MvsbmError,), {"code": name, "__doc__": doc})


# model
NegativeMass = _make("NegativeMass", "A probability mass entry is negative.")
NotNormalized = _make("NotNormalized", "Masses do not sum to one within 1e-12.")
BadLength = _make("BadLength", "Mass array length is not 2**num_views.")
ViewsOutOfRange = _make("ViewsOutOfRange", "num_views outside [1, 16].")
InvalidNodeCount = _make("InvalidNodeCount", "Node count is too small or not even.")
InvalidProbability = _make("InvalidProbability", "Edge probability outside [0, 1].")
BadModelSpec = _make("BadModelSpec", "Malformed model specification.")

# divergence
DimensionMismatch = _make("DimensionMismatch", "Distributions or tensors disagree in shape.")
TOutOfRange = _make("TOutOfRange", "Chernoff exponent t outside [0, 1].")
SupportViolation = _make("SupportViolation", "First argument puts mass outside the second's support.")
DisjointSupports = _make("DisjointSupports", "Bhattacharyya coefficient is zero.")

# sampler
OddN = _make("OddN", "Balanced labelings need an even node count.")
LengthMismatch = _make("LengthMismatch", "Labeling length disagrees with the node count.")
BadTensorFile = _make("BadTensorFile", "Binary tensor file is malformed.")

# estimators
ZeroZeroMass = _make("ZeroZeroMass", "Observed connection vector has zero mass under p and q.")
TooLargeForExact = _make("TooLargeForExact", "Exact enumeration is limited to n <= 32.")
Unbalanced = _make("Unbalanced", "Labeling does not sum to zero.")

# bounds
KOutOfRange = _make("KOutOfRange", "k outside [1, n/2 - 1].")
InvalidTilt = _make("InvalidTilt", "Tilted pair violates the KL balance condition.")
NonpositiveMis = _make("NonpositiveMis", "Expected misclassification count must be positive.")

# harness
Unreachable = _make("Unreachable", "Target threshold statistic not reachable with edge probability <= 1.")
BadShape = _make("BadShape", "Unknown or inconsistent synthesis shape.")
BadConfig = _make("BadConfig", "Malformed experiment configuration.")


class TrialError(MvsbmError):
    """A single Monte Carlo trial failed; identifies the offending trial."""

    code = "TrialError"

    def __init__(self, point_index, trial_index, cause):
        super().__init__(
            f"point {point_index} trial {trial_index}: {getattr(cause, 'code', type(cause).__name__)}: {cause}"
        )
        self.point_index = point_index
        self.trial_index = trial_index
        self.cause = cause
