"""Exception types raised by the solvers and analysis routines."""


class HelixVortexError(Exception):
    pass


class CollisionError(HelixVortexError):
    """Two point vortices came closer than the collision floor."""

    def __init__(self, i, j, distance, t=None):
        self.pair = (i, j)
        self.distance = distance
        self.t = t
        where = "" if t is None else f" at t={t!r}"
        super().__init__(f"vortices {i} and {j} collided (distance {distance:.3e}){where}")


class NonFiniteStateError(HelixVortexError):
    """The state became NaN/inf, usually because the time step is too large."""


class DegenerateStrengthError(HelixVortexError, ValueError):
    """A normalisation by a vanishing total strength was requested."""


class NoCriticalLevelError(HelixVortexError, ValueError):
    """The relative Hamiltonian has no equilibrium, hence no critical level."""


class NoPeriodError(HelixVortexError, ValueError):
    """The requested level set is unbounded, so no period exists."""


class NoReturnError(HelixVortexError):
    """No Poincare return was detected within the integration horizon."""
