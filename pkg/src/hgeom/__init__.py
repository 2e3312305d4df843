"""Horizontal geometry of hypersurfaces in the Heisenberg group H^n.

Modules
-------
core          group law, left-invariant frame, connection, complex structure
surface       level-set jets, horizontal normal frame, H_M, A_M, identity suite
gauge_oracle  closed forms on gauge spheres (independent of the jet route)
cylindrical   profiles f = v(|x|^2 + |y|^2, t) and their (k, l)
flow          reduced (r, theta, t) system, drop quadratures, ambient eta-flow
cli           the ``hgeom`` command
"""

from .core import Point, dilate, gauge_norm, group_inv, group_mul
from .surface import GaugeBall, PolynomialSurface, analyze, mean_curvature, shape_operator

__version__ = "0.1.0"

__all__ = ["Point", "group_mul", "group_inv", "dilate", "gauge_norm", "GaugeBall",
           "PolynomialSurface", "analyze", "mean_curvature", "shape_operator", "__version__"]
