"""Constant mean curvature spheres and foliations in asymptotically flat 3-manifolds."""
__version__ = "0.1.0"
