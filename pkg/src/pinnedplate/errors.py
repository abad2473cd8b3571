"""Exception types shared across the package."""


class PinnedPlateError(Exception):
    """Base class for numerical failures in this package."""


class PoleProximityError(PinnedPlateError):
    """A requested (k, k0) point lies too close to a light line k = |Q_h|."""

    def __init__(self, k, q, guard):
        self.k = k
        self.q = q
        self.guard = guard
        super().__init__(
            f"k={k:.9g} is within the pole guard of a light line at |Q_h|={q:.9g} "
            f"(|Q^2 - k^2| < {guard:g}*k^2); lower pole_guard to evaluate closer"
        )


class BadZetaError(PinnedPlateError):
    """All retried offset vectors hit a near-zero Bessel denominator."""


class MethodMismatchError(PinnedPlateError):
    """Accelerated and spectral dispersion evaluations disagree (diagnostic mode)."""


class NoConvergenceError(PinnedPlateError):
    """Bisection exceeded its iteration cap."""


class DegenerateRatioError(PinnedPlateError):
    """Both numerator and denominator of the Bloch ratio vanish."""


class IdenticalModesError(ValueError):
    """Degeneracy line requested for a pair of identical light-line indices."""


class ParallelLinesError(PinnedPlateError):
    """The three degeneracy lines of a sextet have no common finite point."""


class FitResidualError(PinnedPlateError):
    """Quadratic cone fit residual exceeds tolerance."""


class DuplicatePinsError(ValueError):
    """Cluster geometry contains coincident pins."""


class DegenerateWeightsError(PinnedPlateError):
    """Localisation weights are concentrated on a single pin."""


class NearSingularWarning(UserWarning):
    """Cluster matrix condition estimate exceeds configured bound."""


class UnresolvedGradientWarning(UserWarning):
    """Finite differences straddle a band crossing; contour segment dropped."""
