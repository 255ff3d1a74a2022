"""Closed forms for the one-dimensional optimal potentials and Keller curves.

For d = 1 the nonlinear Dirac ground-state problem is solvable in closed
form: the subcritical optimal potential is A / (m cosh(Bx) + lam), the
critical one (gap energy -m) is a Lorentzian, and the optimal L^p norm
alpha_D(lam, p) is a Beta / Gauss-hypergeometric expression whose p -> 1
limit is the arccos law.  This module also carries the Pruefer-angle
integrator for the p = 1 bound, the hbar/c scaling of the thresholds,
and the pointwise implicit-potential root used by the interpolation
route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, NoSolutionError, SupercriticalError
from .specfun import DEFAULT_TOL, SpecfunTolerance, beta, hyp2f1_nonpos, ln_gamma

__all__ = [
    "Keller1DParams",
    "PhysicalConstants",
    "PruferReport",
    "potential_subcritical",
    "potential_critical",
    "alpha_D",
    "alpha_star",
    "ALPHA_STAR_LIMIT_P_TO_1",
    "ALPHA_STAR_LIMIT_P_TO_INF",
    "Lambda_D_1d",
    "spinor_solution_1d",
    "conservation",
    "potential_lp_norm_quad",
    "prufer_lambda_bound",
    "prufer_eigenvalue",
    "nonrel_alpha",
    "kp_constant",
    "nonrel_gap_prediction",
    "implicit_potential_pointwise",
]

# limits of the critical-norm curve alpha_star(p); exposed because p = 1
# itself is served by the arccos law, not by the p > 1 formula
ALPHA_STAR_LIMIT_P_TO_1 = math.pi
ALPHA_STAR_LIMIT_P_TO_INF = 2.0


@dataclass(frozen=True)
class Keller1DParams:
    """Mass, exponent and gap energy of a 1D optimal-potential problem.

    Derived scales: A = p/(p-1) (m^2 - lam^2), B = 2/(p-1) sqrt(m^2-lam^2),
    z0 = (m-lam)/(m+lam), zeta = 2m/(p-1).
    """

    m: float
    p: float
    lam: float

    def __post_init__(self):
        if not self.m > 0.0:
            raise DomainError(f"mass must be positive, got {self.m}")
        if self.p < 1.0:
            raise DomainError(f"exponent must satisfy p >= 1, got {self.p}")
        if not (-self.m <= self.lam <= self.m):
            raise DomainError(f"gap energy must lie in [-m, m], got {self.lam}")

    @property
    def kappa(self) -> float:
        return math.sqrt(self.m**2 - self.lam**2)

    @property
    def A(self) -> float:
        return self.p / (self.p - 1.0) * (self.m**2 - self.lam**2)

    @property
    def B(self) -> float:
        return 2.0 / (self.p - 1.0) * self.kappa

    @property
    def z0(self) -> float:
        return (self.m - self.lam) / (self.m + self.lam)

    @property
    def zeta(self) -> float:
        return 2.0 * self.m / (self.p - 1.0)


@dataclass(frozen=True)
class PhysicalConstants:
    """hbar, c and the mass, all strictly positive; defaults restore natural units."""

    hbar: float = 1.0
    c: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.c > 0 and self.m > 0):
            raise DomainError("hbar, c and m must all be positive")


def potential_subcritical(params: Keller1DParams) -> Callable[[np.ndarray], np.ndarray]:
    """Optimal potential A / (m cosh(Bx) + lam) for lam > -m, p > 1.

    Even, strictly decreasing on the positive axis, with
    V(0) = p (m - lam) / (p - 1).
    """
    if params.p <= 1.0:
        raise DomainError("subcritical potential needs p > 1")
    if params.lam <= -params.m:
        raise DomainError("lam = -m is the critical case; use potential_critical")
    A, B, m, lam = params.A, params.B, params.m, params.lam

    def V(x):
        x = np.asarray(x, dtype=float)
        arg = np.minimum(np.abs(B * x), 700.0)
        return A / (m * np.cosh(arg) + lam)

    return V


def potential_critical(m: float, p: float) -> Callable[[np.ndarray], np.ndarray]:
    """Optimal potential zeta p / (1 + zeta^2 x^2) at the bottom of the gap."""
    if p <= 1.0:
        raise DomainError("critical potential needs p > 1")
    if m <= 0:
        raise DomainError("mass must be positive")
    zeta = 2.0 * m / (p - 1.0)

    def V(x):
        x = np.asarray(x, dtype=float)
        return zeta * p / (1.0 + zeta**2 * x**2)

    return V


def alpha_D(lam: float, p: float, m: float = 1.0,
            tol: SpecfunTolerance = DEFAULT_TOL) -> float:
    """Optimal L^p norm alpha_D(lam, p) of a potential with ground state at lam.

    p = 1 obeys the arccos law; for p > 1,
    alpha_D^p = p^p ((m+lam)/(p-1))^(p-1) z0^(p-1/2) B(1/2,p) 2F1(1/2,p;p+1/2;-z0).
    Strictly decreasing in lam, with limits alpha_star(p) at -m and 0 at m.
    """
    params = Keller1DParams(m=m, p=p, lam=lam)  # validates domain
    if p == 1.0:
        return math.acos(lam / m)
    if lam == -m:
        return alpha_star(p, m)
    if lam == m:
        return 0.0
    z0 = params.z0
    log_pow = (
        p * math.log(p)
        + (p - 1.0) * math.log((m + lam) / (p - 1.0))
        + (p - 0.5) * math.log(z0)
        + math.log(beta(0.5, p))
        + math.log(hyp2f1_nonpos(0.5, p, p + 0.5, -z0, tol))
    )
    return math.exp(log_pow / p)


def alpha_star(p: float, m: float = 1.0) -> float:
    """Critical norm alpha_star(p) = p (2m/(p-1))^((p-1)/p) B(1/2, p-1/2)^(1/p), p > 1."""
    if p <= 1.0:
        raise DomainError("alpha_star needs p > 1 (the p -> 1 limit is pi)")
    if m <= 0:
        raise DomainError("mass must be positive")
    log_val = (
        math.log(p)
        + (p - 1.0) / p * math.log(2.0 * m / (p - 1.0))
        + (1.0 / p) * (ln_gamma(0.5) + ln_gamma(p - 0.5) - ln_gamma(p))
    )
    return math.exp(log_val)


def Lambda_D_1d(alpha: float, p: float, m: float = 1.0, tol: float = 1e-10) -> float:
    """Optimal lower bound on the ground state at potential norm alpha.

    Inverts the strictly decreasing map lam -> alpha_D(lam, p) by
    bisection to absolute tolerance tol in lam.
    """
    if alpha <= 0.0:
        raise DomainError(f"norm must be positive, got {alpha}")
    crit = math.pi if p == 1.0 else alpha_star(p, m)
    if alpha >= crit:
        raise SupercriticalError(f"norm {alpha} is at or beyond the critical value {crit}")
    lo = -m + 1e-13 * m
    hi = m - 1e-13 * m
    if alpha_D(lo, p, m) <= alpha:
        raise SupercriticalError(f"norm {alpha} is critical at bisection resolution")
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if alpha_D(mid, p, m) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spinor_solution_1d(params: Keller1DParams):
    """Ground-state spinor components (phi even, chi odd) of the optimal problem.

    phi = sqrt(V^(p-1) (m + lam + (p-1)/p V) / 2m) and
    chi = sign(x) sqrt(V^(p-1) (m - lam - (p-1)/p V) / 2m) with the
    subcritical V; they satisfy V^(p-1) = phi^2 + chi^2 pointwise and
    chi(0) = 0, phi(0) > 0.
    """
    V = potential_subcritical(params)
    m, lam, p = params.m, params.lam, params.p

    def solution(x):
        x = np.asarray(x, dtype=float)
        v = V(x)
        vpow = v ** (p - 1.0)
        phi = np.sqrt(vpow * (m + lam + (p - 1.0) / p * v) / (2.0 * m))
        inner = np.clip(vpow * (m - lam - (p - 1.0) / p * v) / (2.0 * m), 0.0, None)
        chi = np.sign(x) * np.sqrt(inner)
        return phi, chi

    return solution


def conservation(phi, chi, params: Keller1DParams):
    """Conserved quantities of the 1D system.

    H = m(|chi|^2-|phi|^2) + lam(|chi|^2+|phi|^2)
        + (p-1)/p (|chi|^2+|phi|^2)^(p/(p-1)),
    G = conj(chi) phi - conj(phi) chi.
    Both vanish identically along decaying real solutions.
    """
    phi = np.asarray(phi)
    chi = np.asarray(chi)
    m, lam, p = params.m, params.lam, params.p
    dens = np.abs(chi) ** 2 + np.abs(phi) ** 2
    H = m * (np.abs(chi) ** 2 - np.abs(phi) ** 2) + lam * dens + (p - 1.0) / p * dens ** (p / (p - 1.0))
    G = np.conj(chi) * phi - np.conj(phi) * chi
    return H, G


def potential_lp_norm_quad(params: Keller1DParams, rel_tol: float = 1e-12) -> float:
    """||V||_p of the subcritical optimal potential by adaptive quadrature.

    Integrates on [0, X] with X doubled until the analytic exponential
    tail bound drops below 1e-12 of the running integral; independent of
    the closed-form alpha_D route.
    """
    V = potential_subcritical(params)
    p, m, A, B = params.p, params.m, params.A, params.B

    def integrand(x):
        return float(V(x) ** p)

    X = max(1.0, 60.0 / (p * B))
    total = None
    for _ in range(60):
        val, _err = integrate.quad(integrand, 0.0, X, epsabs=0.0, epsrel=rel_tol, limit=500)
        tail = (2.0 * A / m) ** p * math.exp(-p * B * X) / (p * B)
        if tail < 1e-12 * max(val, 1e-300):
            total = val
            break
        X *= 2.0
    if total is None:
        raise NoSolutionError("tail bound did not close; potential decays too slowly")
    return (2.0 * total) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Pruefer angle for p = d = 1


@dataclass
class PruferReport:
    """Outcome of integrating the phase angle across a compactly supported potential.

    theta runs from arcsin(lam/m) at the left support edge; lam is an
    eigenvalue exactly when theta reaches pi/2 at the right edge.  For an
    eigenvalue the accumulated angle is strictly less than the L^1 mass,
    i.e. arccos(lam/m) < ||V||_1 (keller_slack > 0).
    """

    theta_start: float
    theta_end: float
    theta_deficit: float
    reached_half_pi: bool
    l1_norm: float
    keller_slack: float
    is_eigenvalue_consistent: bool


def _prufer_rhs(lam: float, m: float, V: Callable[[float], float]):
    kappa = math.sqrt(m * m - lam * lam)

    def rhs(x, y):
        th = y[0]
        return [float(V(x)) + lam + lam * math.cos(2.0 * th) - kappa * math.sin(2.0 * th)]

    return rhs


def prufer_lambda_bound(V: Callable[[float], float], support: tuple, lam: float,
                        m: float = 1.0, *, rtol: float = 1e-10,
                        consistency_tol: float = 1e-5) -> PruferReport:
    """Integrate the bounded phase angle across the support of V at energy lam.

    The angle ODE is theta' = V(x) + lam + lam cos(2 theta)
    - sqrt(m^2-lam^2) sin(2 theta), the smooth form of the ratio ODE; the
    angle variable stays bounded where the component ratio blows up.
    """
    if not abs(lam) < m:
        raise DomainError(f"energy must lie inside the gap, got {lam}")
    x_lo, x_hi = float(support[0]), float(support[1])
    if not x_hi > x_lo:
        raise DomainError("support must be a nonempty interval")
    theta0 = math.asin(lam / m)
    sol = integrate.solve_ivp(
        _prufer_rhs(lam, m, V), (x_lo, x_hi), [theta0], method="RK45",
        rtol=rtol, atol=1e-12, dense_output=False, max_step=(x_hi - x_lo) / 16.0,
    )
    if not sol.success:
        raise DomainError(f"angle integration failed: {sol.message}")
    theta_end = float(sol.y[0, -1])
    l1, _ = integrate.quad(lambda x: float(V(x)), x_lo, x_hi, epsabs=0.0, epsrel=1e-11, limit=400)
    deficit = math.pi / 2.0 - theta_end
    return PruferReport(
        theta_start=theta0,
        theta_end=theta_end,
        theta_deficit=deficit,
        reached_half_pi=theta_end >= math.pi / 2.0 - consistency_tol,
        l1_norm=l1,
        keller_slack=l1 - math.acos(lam / m),
        is_eigenvalue_consistent=abs(deficit) <= consistency_tol,
    )


def prufer_eigenvalue(V: Callable[[float], float], support: tuple, m: float = 1.0,
                      tol: float = 1e-10) -> float:
    """Ground gap eigenvalue of a compactly supported 1D potential via the angle ODE.

    Bisects on the terminal angle: theta_end(lam) is increasing in lam
    and equals pi/2 exactly at an eigenvalue.
    """
    lo = -m * (1.0 - 1e-9)
    hi = m * (1.0 - 1e-9)

    def deficit(lam):
        return prufer_lambda_bound(V, support, lam, m).theta_deficit

    d_lo = deficit(lo)
    d_hi = deficit(hi)
    if d_lo < 0.0:
        raise SupercriticalError("angle already past pi/2 at the bottom of the gap")
    if d_hi > 0.0:
        raise NoSolutionError("no eigenvalue: angle never reaches pi/2 inside the gap")
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if deficit(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# hbar/c scaling and the nonrelativistic limit


def nonrel_alpha(constants: PhysicalConstants, lam: float, p: float, d: int = 1) -> float:
    """Norm threshold guaranteeing the ground state stays at or above lam.

    With physical constants restored the natural-unit threshold scales as
    hbar^(d/p) m^(1-d/p) c^(2-d/p) alpha_D(lam / (m c^2), p).
    """
    mc2 = constants.m * constants.c**2
    if not abs(lam) < mc2:
        raise DomainError(f"energy must satisfy |lam| < m c^2 = {mc2}")
    base = alpha_D(lam / mc2, p, m=1.0)
    return (
        constants.hbar ** (d / p)
        * constants.m ** (1.0 - d / p)
        * constants.c ** (2.0 - d / p)
        * base
    )


def kp_constant(p: float) -> float:
    """Optimal 1D Schroedinger Keller constant K_p = (p^p (p-1)^(1-p) B(1/2,p))^(-2/(2p-1))."""
    if p <= 1.0:
        raise DomainError("kp_constant needs p > 1")
    log_inner = p * math.log(p) - (p - 1.0) * math.log(p - 1.0) + math.log(beta(0.5, p))
    return math.exp(-2.0 / (2.0 * p - 1.0) * log_inner)


def nonrel_gap_prediction(alpha: float, p: float, d: int = 1) -> float:
    """Leading small-norm behaviour of the gap depth: 1 - Lambda_D ~ 2^(d/(2p-d)) K_p alpha^eta."""
    eta = 2.0 * p / (2.0 * p - d)
    return 2.0 ** (d / (2.0 * p - d)) * kp_constant(p) * alpha**eta


# ---------------------------------------------------------------------------
# pointwise implicit potential


def implicit_potential_pointwise(a: float, b: float, cpar: float, nu: float, p: float) -> float:
    """Unique root X >= 0 of nu X^(p-1) = a + b / (cpar + X)^2.

    The left side increases from 0 and the right side decreases, so a
    monotone bisection converges; residual is driven below
    1e-12 max(a, nu).
    """
    if a < 0 or b < 0 or cpar < 0:
        raise DomainError("a, b, cpar must be nonnegative")
    if not nu > 0:
        raise DomainError("nu must be positive")
    if not p > 1:
        raise DomainError("p must exceed 1")
    if b == 0.0:
        return (a / nu) ** (1.0 / (p - 1.0))
    if a == 0.0 and b == 0.0:
        return 0.0

    def f(x):
        rhs = a + (b / (cpar + x) ** 2 if cpar + x > 0 else math.inf)
        return nu * x ** (p - 1.0) - rhs

    lo = 0.0
    hi = max(1.0, ((a + b / max(cpar, 1e-150) ** 2) / nu) ** (1.0 / (p - 1.0)))
    for _ in range(200):
        if f(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise NoSolutionError("failed to bracket the implicit-potential root")
    target = 1e-12 * max(a, nu)
    mid = 0.5 * (lo + hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val) <= target:
            return mid
        if val > 0.0:
            hi = mid
        else:
            lo = mid
    return mid
