"""Shooting solvers for the radial nonlinear Dirac systems in d = 1, 2, 3.

The radial reduction couples two real profiles (phi, chi) through
centrifugal offsets and the self-consistent potential
V = (phi^2 + chi^2)^(1/(p-1)):

    phi' - (dphi/r) phi = -(lam + m + V) chi
    chi' + (dchi/r) chi =  (lam - m + V) phi

with (dphi, dchi) = (0, 0) in d=1, (n, n+1) in d=2 and
(kappa-1, kappa+1) in d=3; the standard sectors n=0 / kappa=1 give
(0, d-1).  The ground branch is found by bisecting the initial value
phi(0) = s between trajectories whose phi crosses zero (s too large) and
trajectories whose chi turns negative (s too small).

The integrator is a Dormand-Prince 5(4) kernel compiled with Cython when
available; set DIRAC_GAP_PURE_PY=1 to force the pure-Python twin.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .curves import KellerCurve
from .errors import DomainError, IntegrationError, NoSolutionError
from .specfun import ln_gamma
from .util import format_float

if os.environ.get("DIRAC_GAP_PURE_PY"):
    from . import _radial_rk_py as _kernel
else:
    try:
        from . import _radial_rk as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _radial_rk_py as _kernel

COMPILED_KERNEL = bool(_kernel.COMPILED)

__all__ = [
    "COMPILED_KERNEL",
    "RadialSystemSpec",
    "RadialSolution",
    "radial_rhs",
    "shoot_ground_state",
    "radial_keller_curve",
    "alpha_star_radial",
    "wp_norm",
    "wp_closed_form",
]

_SURFACE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


@dataclass(frozen=True)
class RadialSystemSpec:
    """Dimension, sector, gap energy, exponent and mass of a radial system."""

    d: int
    lam: float
    p: float
    m: float = 1.0
    n: int = 0      # angular sector, d = 2 only
    kappa: int = 1  # spin-orbit sector, d = 3 only

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not self.m > 0:
            raise DomainError("mass must be positive")
        if not (-self.m <= self.lam < self.m):
            raise DomainError(f"gap energy must lie in [-m, m), got {self.lam}")
        if self.p <= 1.0 or self.p < self.d:
            raise DomainError(f"exponent must satisfy p > 1 and p >= d, got p={self.p}, d={self.d}")
        if self.d == 3 and self.kappa < 1:
            raise DomainError("spin-orbit sector kappa must be >= 1")
        if self.d == 2 and self.n < 0:
            raise DomainError("angular sector n must be >= 0")

    @property
    def delta_phi(self) -> float:
        if self.d == 1:
            return 0.0
        if self.d == 2:
            return float(self.n)
        return float(self.kappa - 1)

    @property
    def delta_chi(self) -> float:
        if self.d == 1:
            return 0.0
        if self.d == 2:
            return float(self.n + 1)
        return float(self.kappa + 1)

    @property
    def delta(self) -> float:
        """Centrifugal index of the standard sector (d - 1 for n=0 / kappa=1)."""
        return self.delta_chi

    @property
    def decay_rate(self) -> float:
        return math.sqrt(self.m**2 - self.lam**2)


@dataclass
class RadialSolution:
    """Converged radial profiles with their potential and L^p norm.

    alpha is ||V||_p over R^d with the surface-measure weight r^(d-1).
    For subcritical energies the tail is exponential and the profiles
    drop below 1e-8 of their maximum at the end of the grid; at the
    bottom of the gap the decay is only algebraic and the weaker bound
    1e-3 is enforced.
    """

    r_grid: np.ndarray
    phi: np.ndarray
    chi: np.ndarray
    V: np.ndarray
    alpha: float
    lam: float
    p: float
    d: int
    m: float = 1.0
    delta: float = 0.0
    s0: float = 0.0
    n_steps: int = 0
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.r_grid = np.asarray(self.r_grid, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        self.chi = np.asarray(self.chi, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        if np.min(self.V) < 0:
            raise DomainError("potential profile must be nonnegative")
        peak = max(np.max(np.abs(self.phi)), np.max(np.abs(self.chi)), 1e-300)
        tail = max(abs(self.phi[-1]), abs(self.chi[-1]))
        kappa = math.sqrt(self.m**2 - self.lam**2)
        decay_tol = 1e-8 if kappa > 1e-6 else 1e-3
        if tail > decay_tol * peak:
            raise DomainError(
                f"profiles do not decay at the grid end (tail {tail / peak:.2e} of max)"
            )

    def to_csv(self, path, header_comments=()):
        import csv

        with open(path, "w", newline="") as fh:
            for line in header_comments:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow(["r", "phi", "chi", "V"])
            for r, f, c, v in zip(self.r_grid, self.phi, self.chi, self.V):
                writer.writerow([format_float(r), format_float(f), format_float(c), format_float(v)])


def radial_rhs(spec: RadialSystemSpec):
    """Right-hand side (phi', chi') of the radial system at (r, (phi, chi))."""
    lam, m, p = spec.lam, spec.m, spec.p
    dphi, dchi = spec.delta_phi, spec.delta_chi
    e1 = 1.0 / (p - 1.0)

    def rhs(r, state):
        phi, chi = state
        u = phi * phi + chi * chi
        v = u**e1 if u > 0 else 0.0
        out_phi = -(lam + m + v) * chi
        out_chi = (lam - m + v) * phi
        if dphi != 0.0:
            if r <= 0:
                raise DomainError("centrifugal term needs r > 0")
            out_phi += dphi / r * phi
        if dchi != 0.0:
            if r <= 0:
                raise DomainError("centrifugal term needs r > 0")
            out_chi -= dchi / r * chi
        return out_phi, out_chi

    return rhs


def _series_start(spec: RadialSystemSpec, s: float):
    """Regular-origin start radius and (phi, chi) from the leading power series.

    The start radius shrinks with the central potential so the series
    stays in its convergence range for concentrated cores.
    """
    if spec.d == 1:
        return 0.0, s, 0.0
    e1 = 1.0 / (spec.p - 1.0)
    if spec.delta_phi == 0.0:
        v0 = (s * s) ** e1
        r0 = min(1e-6, 1e-3 / max(v0, 1.0))
        c0 = (spec.lam - spec.m + v0) * s
        chi = c0 * r0 / (1.0 + spec.delta_chi)
        phi = s - (spec.lam + spec.m + v0) * c0 * r0 * r0 / (2.0 * (1.0 + spec.delta_chi))
        return r0, phi, chi
    r0 = 1e-6
    phi = s * r0**spec.delta_phi
    chi = (spec.lam - spec.m) * phi * r0 / (1.0 + spec.delta_phi + spec.delta_chi)
    return r0, phi, chi


def _default_r_max(spec: RadialSystemSpec) -> float:
    kappa = spec.decay_rate
    if kappa > 1e-6:
        b_rate = 2.0 * kappa / (spec.p - 1.0)
        return min(max(12.0 / b_rate, 40.0 / kappa), 4000.0)
    return 200.0 * max(1.0, 0.5 * (spec.p - 1.0))


def _run_kernel(spec: RadialSystemSpec, s: float, r_max: float, rtol: float,
                atol: float, r_out=None):
    r0, phi_i, chi_i = _series_start(spec, s)
    lnA0 = 0.5 * math.log(phi_i * phi_i + chi_i * chi_i)
    theta0 = math.atan2(chi_i, phi_i)
    return _kernel.integrate_radial_angle(
        lnA0, theta0, r0, r_max, spec.lam, spec.m, spec.p,
        spec.delta_phi, spec.delta_chi, float(spec.d - 1),
        rtol, atol, 12.0, 35.0, r_out,
    )


def _winding_class(spec: RadialSystemSpec, theta_end: float) -> int:
    """Integer count of unstable decay directions the phase fell below.

    theta_decay = arccos(lam/m)/2 is the unstable fixed point of the
    far-field angle flow (the decaying-tail direction); the stable
    growing direction is its negative.  Trajectories below the ground
    value settle with class 0; crossing the ground value changes the
    class by one (up in the standard regime, down in the concentrated
    p = d regime).
    """
    theta_decay = 0.5 * math.acos(spec.lam / spec.m)
    return int(math.floor((theta_end - theta_decay) / math.pi)) + 1


def _classify(spec: RadialSystemSpec, s: float, r_max: float, rtol: float, atol: float) -> int:
    status, r_stop, _, theta_end, _, _, _, _, _, _, _ = _run_kernel(spec, s, r_max, rtol, atol)
    if status == 4:
        raise IntegrationError(f"radial integration stalled at r={r_stop} for s={s}")
    return _winding_class(spec, theta_end)


def shoot_ground_state(spec: RadialSystemSpec, r_max: float | None = None,
                       tol: float = 1e-14, *, n_out: int = 2001,
                       rtol: float = 1e-10, atol: float = 1e-12,
                       s_range: tuple = (1e-8, 1e13)) -> RadialSolution:
    """Ground-branch radial solution by bisection on the central value phi(0) = s.

    The phase-winding class of the trajectory is 0 below the ground
    value and changes by one above it; the first class change along a
    geometric scan in s gives the bracket.  Additional class changes
    within the scan are recorded as 'bracket-multiplicity' instead of
    assuming uniqueness.
    """
    if r_max is None:
        r_max = _default_r_max(spec)
    flags: list[str] = []
    s_final, scan_transitions = _bisect_shoot(spec, r_max, tol, rtol, atol, s_range)
    if scan_transitions > 1:
        flags.append("bracket-multiplicity")
    return _finalize_solution(spec, s_final, r_max, rtol, atol, n_out, flags)


def _bisect_shoot(spec, r_max, tol, rtol, atol, s_range):
    s_min, s_max = s_range
    v0_target = spec.p * (spec.m - spec.lam) / (spec.p - 1.0)
    s_guess = v0_target ** ((spec.p - 1.0) / 2.0)
    s_guess = min(max(s_guess, 10.0 * s_min), 0.1 * s_max)

    cache: dict[float, int] = {}

    def classify(s):
        if s not in cache:
            cache[s] = _classify(spec, s, r_max, rtol, atol)
        return cache[s]

    # geometric scan for the first class change above the small-s class 0
    bracket = None
    for ratio in (1.5, 1.15, 1.04):
        s = s_guess
        while s > s_min:
            if classify(s) == 0:
                break
            s /= ratio
        lo = s
        if classify(lo) != 0:
            raise NoSolutionError(
                f"no class-0 region above s_min={s_min} for d={spec.d}, lam={spec.lam}, p={spec.p}"
            )
        s = lo
        while s < s_max:
            s_next = s * ratio
            if classify(s_next) != 0:
                bracket = (s, s_next)
                break
            s = s_next
        if bracket is not None:
            break
    if bracket is None:
        raise NoSolutionError(
            f"no winding transition in [{s_min}, {s_max}] for d={spec.d}, lam={spec.lam}, p={spec.p}"
        )

    # multiplicity diagnostic on the coarse scan only (bisection probes
    # straddle the transition by construction and would double-count)
    scan_probes = sorted(cache.items())
    scan_transitions = sum(
        1 for (_, k_a), (_, k_b) in zip(scan_probes, scan_probes[1:]) if k_a != k_b
    )

    s_lo, s_hi = bracket
    while s_hi - s_lo > tol * s_hi:
        mid = 0.5 * (s_lo + s_hi)
        if classify(mid) == 0:
            s_lo = mid
        else:
            s_hi = mid
    return 0.5 * (s_lo + s_hi), scan_transitions


def _finalize_solution(spec, s_final, r_max, rtol, atol, n_out, flags):
    r_grid = np.linspace(0.0, r_max, n_out)
    status, r_stop, _, _, n_steps, lnA_min, r_at_min, norm_at_min, _, lnA_out, theta_out = (
        _run_kernel(spec, s_final, r_max, rtol, atol, r_grid)
    )
    if status == 4:
        raise IntegrationError("final radial integration stalled")
    lnA = np.asarray(lnA_out)
    theta = np.asarray(theta_out)
    with np.errstate(over="ignore", invalid="ignore"):
        amp = np.exp(lnA)
    phi = amp * np.cos(theta)
    chi = amp * np.sin(theta)
    phi[0] = s_final if spec.delta_phi == 0.0 else 0.0
    chi[0] = 0.0

    # beyond the amplitude minimum the forward error outgrows the
    # decaying trajectory; patch the tail with the analytic decay law
    i_cut = int(np.searchsorted(r_grid, r_at_min))
    i_cut = min(max(i_cut, 1), n_out - 1)
    finite = np.isfinite(phi[: i_cut + 1]) & np.isfinite(chi[: i_cut + 1])
    if not np.all(finite):
        i_cut = int(np.nonzero(finite)[0][-1])
    if i_cut < n_out - 1:
        rr = r_grid[i_cut + 1:]
        kappa = spec.decay_rate
        if kappa > 1e-6:
            fac = np.exp(-kappa * (rr - r_grid[i_cut]))
            phi[i_cut + 1:] = phi[i_cut] * fac
            chi[i_cut + 1:] = chi[i_cut] * fac
        else:
            base = max(r_grid[i_cut], 1e-300)
            phi[i_cut + 1:] = phi[i_cut] * (base / rr) ** spec.p
            chi[i_cut + 1:] = chi[i_cut] * (base / rr) ** (spec.p - 1.0)
        flags.append("tail-patched")

    e1 = 1.0 / (spec.p - 1.0)
    V = (phi**2 + chi**2) ** e1
    alpha = (_SURFACE[spec.d] * norm_at_min) ** (1.0 / spec.p)
    return RadialSolution(
        r_grid=r_grid, phi=phi, chi=chi, V=V, alpha=alpha,
        lam=spec.lam, p=spec.p, d=spec.d, m=spec.m, delta=spec.delta,
        s0=s_final, n_steps=int(n_steps), flags=flags,
    )


def radial_keller_curve(d: int, p: float, lambda_grid, *, m: float = 1.0,
                        n: int = 0, kappa: int = 1, tol: float = 1e-13) -> KellerCurve:
    """Sampled (alpha, lambda) optimal-bound curve from radial shooting.

    Failed samples are recorded in the flags and skipped; a violation of
    the expected monotone decrease of alpha in lambda is flagged too.
    """
    alphas = []
    lams = []
    flags: list[str] = []
    for lam in np.asarray(lambda_grid, dtype=float):
        try:
            spec = RadialSystemSpec(d=d, lam=float(lam), p=p, m=m, n=n, kappa=kappa)
            sol = shoot_ground_state(spec, tol=tol)
        except (DomainError, IntegrationError, NoSolutionError) as exc:
            flags.append(f"skip lam={lam:g}: {exc}")
            continue
        alphas.append(sol.alpha)
        lams.append(lam)
    alphas_arr = np.asarray(alphas)
    if alphas_arr.size >= 2 and np.any(np.diff(alphas_arr) > 1e-6 * np.max(alphas_arr)):
        flags.append("alpha-not-decreasing-in-lambda")
    return KellerCurve(alphas_arr, np.asarray(lams), p=p, d=d, provenance="ode", flags=flags)


def alpha_star_radial(d: int, p: float, *, m: float = 1.0, eps: float = 1e-3,
                      n: int = 0, kappa: int = 1) -> float:
    """Critical-norm estimate: shooting norm at gap energy -m + eps."""
    spec = RadialSystemSpec(d=d, lam=-m + eps, p=p, m=m, n=n, kappa=kappa)
    return shoot_ground_state(spec).alpha


# ---------------------------------------------------------------------------
# exact solution at the bottom of the gap (m = 1, lam = -1)


def wp_norm(p: float, d: int, delta: float) -> float:
    """||W_p||_p of the exact bottom-of-gap potential.

    ||W_p||_p^p = p^p pi^(d/2) (2/(p-1-delta))^(p-d) Gamma(p-d/2)/Gamma(p).
    The factor with exponent p-d degenerates to 1 when p = d, which keeps
    the norm finite even at delta = p-1 (profile concentration limit).
    """
    if d not in (1, 2, 3):
        raise DomainError("dimension must be 1, 2 or 3")
    if p <= d / 2.0:
        raise DomainError("norm formula needs p > d/2")
    if p != d and delta >= p - 1.0:
        raise DomainError("need delta < p - 1 (except the p = d concentration limit)")
    if delta > p - 1.0:
        raise DomainError("need delta <= p - 1")
    log_pow = p * math.log(p) + 0.5 * d * math.log(math.pi) + ln_gamma(p - d / 2.0) - ln_gamma(p)
    if p != d:
        log_pow += (p - d) * math.log(2.0 / (p - 1.0 - delta))
    return math.exp(log_pow / p)


def wp_closed_form(p: float, d: int, delta: float, *, r_max: float = 60.0,
                   n_out: int = 4001):
    """Exact bottom-of-gap radial solution (m = 1, lam = -1) and its norm.

    With mu = (p-1-delta)/2:
        phi(r) = (p mu)^((p-1)/2) mu / (mu^2+r^2)^(p/2),
        chi(r) = (p mu)^((p-1)/2) r  / (mu^2+r^2)^(p/2),
        W(r)   = p mu / (mu^2 + r^2).
    Returns (RadialSolution, ||W||_p).  Requires delta < p - 1; at the
    boundary the profiles concentrate and only wp_norm remains finite.
    """
    if delta >= p - 1.0:
        raise DomainError("profiles need delta < p - 1 (norm at the edge via wp_norm)")
    norm = wp_norm(p, d, delta)
    mu = 0.5 * (p - 1.0 - delta)
    r = np.linspace(0.0, r_max, n_out)
    pref = (p * mu) ** ((p - 1.0) / 2.0)
    denom = (mu * mu + r * r) ** (p / 2.0)
    phi = pref * mu / denom
    chi = pref * r / denom
    W = p * mu / (mu * mu + r * r)
    sol = RadialSolution(
        r_grid=r, phi=phi, chi=chi, V=W, alpha=norm, lam=-1.0, p=p, d=d,
        m=1.0, delta=delta, s0=float(phi[0]), flags=["closed-form"],
    )
    return sol, norm
