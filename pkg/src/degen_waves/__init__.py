"""Large-time behaviour of scalar conservation laws with a degenerate flux and
p-Laplacian viscosity: wave constructors, an explicit solver and diagnostics."""

__version__ = "0.1.0"
