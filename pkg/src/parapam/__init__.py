"""Paracontrolled calculus on the 2-torus and a solver for the quasilinear
generalized parabolic Anderson model."""

__version__ = "0.1.0"
