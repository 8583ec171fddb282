"""Numerical solver and verification toolkit for prescribed-curvature
Dirichlet problems on graph hypersurfaces."""

__version__ = "0.1.0"
