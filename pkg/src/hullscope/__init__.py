"""hullscope: convex-hull extrapolation geometry at desk scale.

Hull membership and projection with separation certificates, polynomial
partition fitting and over-parameterized extension families, black-box
decision-boundary probes, and parameter-elimination regime certificates.
"""

from . import arrays, boundary, hull, overparam, polyclass
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["arrays", "boundary", "hull", "overparam", "polyclass", "BACKEND",
           "__version__"]
