"""Classical fixed-step fourth-order Runge-Kutta."""
import numpy as np


def rk4_step(f, y, dt):
    """One classical RK4 step of the autonomous system ``y' = f(y)``."""
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_path(f, y0, dt, n_steps, check=None):
    """Integrate ``n_steps`` steps, returning all ``n_steps + 1`` states.

    ``check(k, y)`` is called after every step and may raise to halt; the
    exception gets the states computed so far attached as ``.partial``.
    """
    y0 = np.asarray(y0, dtype=float)
    out = np.empty((n_steps + 1,) + y0.shape)
    out[0] = y0
    y = y0
    for k in range(1, n_steps + 1):
        y = rk4_step(f, y, dt)
        out[k] = y
        if check is not None:
            try:
                check(k, y)
            except Exception as exc:
                exc.partial = out[: k + 1].copy()
                raise
    return out
