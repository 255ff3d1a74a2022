"""Numerical toolkit for eigenvalues in the spectral gap of Dirac operators.

Subpackages by concern:

- specfun: log-Gamma, Beta, Gauss hypergeometric (nonpositive argument),
  modified Bessel K.
- dirac_core: Clifford representations, Fourier symbols, closed-form
  resolvent kernel.
- bs_operator: pseudospectral Birman-Schwinger operator, matrix-free
  Lanczos branches, gap-eigenvalue extraction and counting.
- exact_1d: one-dimensional closed forms, the arccos law with its
  phase-angle integrator, hbar/c scaling, implicit pointwise potential.
- radial_ode: shooting solvers for the radial systems in d = 1, 2, 3 and
  the exact bottom-of-gap solution.
- optimizer: self-consistent optimal-potential iteration in 2D.
- lieb_thirring: Riesz means, counting chain and the assembled constant.
- cli: command-line front end emitting CSV data and JSON summaries.
"""

from . import (  # noqa: F401
    bs_operator,
    curves,
    dirac_core,
    errors,
    exact_1d,
    grids,
    lieb_thirring,
    optimizer,
    radial_ode,
    specfun,
)

__version__ = "0.1.0"
