"""Self-contained special-function kernel.

Provides the four scalar functions the closed-form spectral curves need:
log-Gamma, the Euler Beta function, the Gauss hypergeometric function for
non-positive argument, and the modified Bessel function of the second
kind.  Everything is real-valued double precision with a configurable
relative-error target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import ConvergenceError, DomainError

__all__ = [
    "SpecfunTolerance",
    "DEFAULT_TOL",
    "ln_gamma",
    "beta",
    "hyp2f1_nonpos",
    "bessel_k",
]


@dataclass(frozen=True)
class SpecfunTolerance:
    """Relative error target and series-term cap.

    rel_tol must lie in (0, 1e-6]; the default 1e-10 leaves headroom for
    the ~1e-8 accuracy the downstream bisections need.
    """

    rel_tol: float = 1e-10
    max_terms: int = 500_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise DomainError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 64:
            raise DomainError(f"max_terms must be >= 64, got {self.max_terms}")


DEFAULT_TOL = SpecfunTolerance()


def ln_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def beta(a: float, b: float) -> float:
    """Euler Beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b), a, b > 0."""
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"beta requires positive arguments, got ({a}, {b})")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def _gauss_series(a: float, b: float, c: float, w: float, tol: SpecfunTolerance) -> float:
    """Gauss series sum_n (a)_n (b)_n / ((c)_n n!) w^n for |w| < 1."""
    total = 1.0
    term = 1.0
    small_streak = 0
    for n in range(tol.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * w
        total += term
        if abs(term) <= tol.rel_tol * abs(total):
            small_streak += 1
            if small_streak >= 3:
                return total
        else:
            small_streak = 0
    raise ConvergenceError(
        f"hypergeometric series did not converge in {tol.max_terms} terms "
        f"(a={a}, b={b}, c={c}, w={w})",
        best_residual=abs(term),
    )


def hyp2f1_nonpos(a: float, b: float, c: float, z: float, tol: SpecfunTolerance = DEFAULT_TOL) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) for z <= 0 and c > 0.

    A Pfaff transformation maps z < 0 to w = z/(z-1) in (0, 1), where the
    Gauss series converges; of the two Pfaff variants the one with the
    faster-decaying terms is used.  Arguments z > 0 are out of scope.
    """
    if c <= 0.0:
        raise DomainError(f"hyp2f1_nonpos requires c > 0, got c={c}")
    if z > 0.0:
        raise DomainError(f"hyp2f1_nonpos requires z <= 0, got z={z}")
    if z == 0.0:
        return 1.0
    w = z / (z - 1.0)
    # term size ~ n^(a'+b'-c-1) w^n: pick the variant with the smaller a'+b'
    if a + (c - b) <= (c - a) + b:
        prefactor = (1.0 - z) ** (-a)
        return prefactor * _gauss_series(a, c - b, c, w, tol)
    prefactor = (1.0 - z) ** (-b)
    return prefactor * _gauss_series(c - a, b, c, w, tol)


def _log_cosh(y: float) -> float:
    y = abs(y)
    return y + math.log1p(math.exp(-2.0 * y)) - math.log(2.0)


def bessel_k(nu: float, x: float, tol: SpecfunTolerance = DEFAULT_TOL) -> float:
    """Modified Bessel function of the second kind K_nu(x), x > 0, nu >= 0.

    Evaluates exp(-x) * integral_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt
    by adaptive quadrature; the exp(-x) split keeps the integrand O(1)
    and avoids premature underflow at large x.
    """
    if nu < 0.0:
        raise DomainError(f"bessel_k requires nu >= 0, got {nu}")
    if not x > 0.0:
        raise DomainError(f"bessel_k requires x > 0, got {x}")

    def log_integrand(t: float) -> float:
        return -x * (math.cosh(t) - 1.0) + _log_cosh(nu * t)

    # upper cutoff: integrand below e^-60 of its peak scale
    t_hi = math.acosh(61.0 / x + 1.0)
    for _ in range(4):
        t_hi = math.acosh((61.0 + nu * t_hi) / x + 1.0)
    t_hi += 1.0

    value, err = integrate.quad(
        lambda t: math.exp(log_integrand(t)),
        0.0,
        t_hi,
        epsabs=0.0,
        epsrel=min(0.1 * tol.rel_tol, 1e-11),
        limit=400,
    )
    if value <= 0.0 or err > 100.0 * tol.rel_tol * value:
        raise ConvergenceError(
            f"bessel_k quadrature failed to meet tolerance at nu={nu}, x={x}",
            best_residual=err / max(value, 1e-300),
        )
    return math.exp(-x) * value
