"""Helical vortex dynamics: point-vortex limit, leapfrog analysis, vortex-blob solver."""
import os

# the TBB build shipped with some numba wheels is too old and only produces a warning
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from .geometry import HelixGeometry  # noqa: E402
from .kernel import KernelParams  # noqa: E402
from .pointvortex import OdeParams, OdeState  # noqa: E402
from .leapfrog import LeapfrogParams  # noqa: E402
from .blob import ParticleField, Scenario  # noqa: E402

__all__ = ["HelixGeometry", "KernelParams", "OdeParams", "OdeState", "LeapfrogParams",
           "ParticleField", "Scenario"]
__version__ = "0.1.0"
