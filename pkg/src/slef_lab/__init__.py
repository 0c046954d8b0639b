"""slef-lab: finite-difference laboratory for -Delta u = f(X) u^-gamma with
zero Dirichlet data on non-smooth planar domains and axisymmetric cones."""

__version__ = "0.1.0"
