"""Exception types raised across the package."""


class PSCError(Exception):
    """Base class for all package errors."""


class NumericalFailure(PSCError):
    def __init__(self, shape, message="SVD did not converge"):
        self.shape = tuple(shape)
        super().__init__(f"{message} for matrix of shape {self.shape}")


class RankDeficiencyError(PSCError, ValueError):
    def __init__(self, sigma_min, message="matrix is rank deficient"):
        self.sigma_min = float(sigma_min)
        super().__init__(f"{message} (smallest singular value {self.sigma_min:.3e})")


class NotOrthonormalError(PSCError, ValueError):
    def __init__(self, defect, tol):
        self.defect = float(defect)
        super().__init__(
            f"columns are not orthonormal: ||A^T A - I||_F = {self.defect:.3e} > {tol:.1e}"
        )


class DomainError(PSCError, ValueError):
    """A point lies outside the domain of the projection (rank(alpha^T y) < k)."""

    def __init__(self, sigma_min, index=None):
        self.sigma_min = float(sigma_min)
        self.index = index
        where = "" if index is None else f" at index {index}"
        super().__init__(
            f"point{where} is outside the projection domain (sigma_min = {self.sigma_min:.3e})"
        )


class DegenerateMeanError(PSCError, ValueError):
    def __init__(self, sigma_min):
        self.sigma_min = float(sigma_min)
        super().__init__(
            f"Frechet mean is not unique: summed frames are rank deficient "
            f"(sigma_min = {self.sigma_min:.3e})"
        )


class EmptySurvivorsError(PSCError):
    pass


class DegenerateStepError(PSCError, ValueError):
    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"time step {self.index} has zero norm after centering")
