"""Numerical laboratory for bosons on a ring.

Exact Fock-basis solvers for the contact-interacting gas in fixed
momentum blocks, conditional single-particle wave functions, position
sampling with center-of-mass alignment, Bohmian trajectories in the
ideal gas, and mean-field soliton comparison profiles.
"""

__version__ = "0.1.0"
