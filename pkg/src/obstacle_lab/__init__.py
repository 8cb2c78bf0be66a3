"""Numerical laboratory for the penalized boundary obstacle problem.

Solves Laplace's equation on a half-box with the boundary reaction
u_y = beta_eps(u) on the flat face, the complementarity (Signorini)
limit, and measures the estimates that hold uniformly in the
penalization parameter: maximum-principle bounds, trace bounds,
semiconvexity, the weighted monotonicity functional phi(r), half-sphere
eigenvalues, Hoelder seminorms and interface growth exponents.
"""

from .grid import (DIRICHLET, FLAT, INTERIOR, Field, Grid, GridSpec,
                   build_grid, cylinder_height, field_from_function,
                   laplacian_residual, normal_trace, sup_cylinder,
                   weighted_ball_integral)
from .penalization import (Penalization, admissibility_check, beta_eval,
                           beta_prime, rescale)
from .solver import (DirichletData, NonconvergedError, SolveResult, energy,
                     oracle_minimize, rescaled_solution, solve_penalized,
                     solve_signorini)

__version__ = "0.1.0"
