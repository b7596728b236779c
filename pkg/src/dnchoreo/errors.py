"""Exception hierarchy shared by all modules."""


class ChoreoError(Exception):
    """Base class for every error raised by dnchoreo."""


class OriginTooClose(ChoreoError, ValueError):
    def __init__(self, min_radius, eps_radius):
        self.min_radius = float(min_radius)
        self.eps_radius = float(eps_radius)
        super().__init__(
            f"curve passes within {self.min_radius:.3e} of the origin "
            f"(threshold {self.eps_radius:.3e})"
        )


class UnresolvedWinding(ChoreoError):
    def __init__(self, max_increment, grid_size):
        self.max_increment = float(max_increment)
        self.grid_size = int(grid_size)
        super().__init__(
            f"angular increment {self.max_increment:.3f} rad >= pi at grid size {self.grid_size}"
        )


class ResonantMode(ChoreoError):
    def __init__(self, k, gap=None):
        self.k = int(k)
        self.gap = gap
        msg = f"resonant mode k={self.k}"
        if gap is not None:
            msg += f" (|omega k -/+ Omega| = {gap:.3e})"
        super().__init__(msg)


class HypothesisViolated(ChoreoError, ValueError):
    pass


class CollisionProximity(ChoreoError):
    def __init__(self, rho_observed, rho_min=None):
        self.rho_observed = float(rho_observed)
        self.rho_min = rho_min
        msg = f"pairwise separation {self.rho_observed:.3e}"
        if rho_min is not None:
            msg += f" below collision threshold {rho_min:.3e}"
        super().__init__(msg)


class InadmissibleMode(ChoreoError, ValueError):
    def __init__(self, k, n):
        self.k = int(k)
        self.n = int(n)
        super().__init__(f"mode k={self.k} is not admissible for n={self.n} (need k = 1 mod n)")


class UnsupportedWinding(ChoreoError, ValueError):
    """(n, W) pair outside the supported lattice W = 1 (mod n)."""


class UnsupportedParity(ChoreoError, ValueError):
    pass


class SolverError(ChoreoError):
    """Solver failure carrying the last iterate and its report, when available."""

    def __init__(self, message, curve=None, report=None):
        super().__init__(message)
        self.curve = curve
        self.report = report


class MaxIterations(SolverError):
    pass


class SingularJacobian(SolverError):
    pass


class StageFailed(SolverError):
    def __init__(self, lam, cause, curve=None, report=None):
        self.lam = float(lam)
        self.cause = cause
        super().__init__(f"homotopy stage lambda={self.lam:g} failed: {cause}", curve, report)


class IntegratorCollision(ChoreoError):
    def __init__(self, t, rho_min):
        self.t = float(t)
        self.rho_min = float(rho_min)
        super().__init__(f"integrated bodies closer than {self.rho_min:.3e} at t={self.t:.6g}")


class ConfigError(ChoreoError, ValueError):
    pass
