"""Clifford representations and the free Dirac operator in Fourier and position space.

The symbol of the free operator is M(k) = sum_j alpha_j k_j + m beta and
its resolvent multiplier at a gap energy lam is
g_lam(k) = (M(k) + lam I) / (|k|^2 + m^2 - lam^2).  The position-space
resolvent kernel has a closed form in terms of modified Bessel functions
and is exposed for cross-validation against the Fourier route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularityError
from .specfun import bessel_k

__all__ = [
    "PAULI_1",
    "PAULI_2",
    "PAULI_3",
    "CliffordRep",
    "ResolventParams",
    "clifford_rep",
    "dirac_symbol",
    "resolvent_symbol",
    "resolvent_symbol_z",
    "resolvent_kernel",
]

PAULI_1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_ANTICOMM_TOL = 1e-14


@dataclass(frozen=True)
class CliffordRep:
    """Hermitian matrices alpha_1..alpha_d, beta with the Dirac anticommutation rules."""

    d: int
    n_components: int
    alphas: tuple
    beta: np.ndarray

    def __post_init__(self):
        n = self.n_components
        eye = np.eye(n)
        mats = list(self.alphas) + [self.beta]
        for m_ in mats:
            if m_.shape != (n, n):
                raise DomainError("Clifford matrices must be N x N")
            if np.max(np.abs(m_ - m_.conj().T)) > _ANTICOMM_TOL:
                raise DomainError("Clifford matrices must be Hermitian")
        for j, aj in enumerate(self.alphas):
            for k, ak in enumerate(self.alphas):
                target = 2.0 * eye if j == k else 0.0
                if np.max(np.abs(aj @ ak + ak @ aj - target)) > _ANTICOMM_TOL:
                    raise DomainError("alpha anticommutation rule violated")
            if np.max(np.abs(aj @ self.beta + self.beta @ aj)) > _ANTICOMM_TOL:
                raise DomainError("alpha-beta anticommutation rule violated")
        if np.max(np.abs(self.beta @ self.beta - eye)) > _ANTICOMM_TOL:
            raise DomainError("beta^2 = I violated")


@dataclass(frozen=True)
class ResolventParams:
    """Mass and gap energy; the energy must lie strictly inside (-m, m)."""

    lam: float
    m: float = 1.0

    def __post_init__(self):
        if not self.m > 0.0:
            raise DomainError(f"mass must be positive, got {self.m}")
        if not abs(self.lam) < self.m:
            raise DomainError(f"gap energy must satisfy |lam| < m, got lam={self.lam}, m={self.m}")

    @property
    def kappa(self) -> float:
        """Exponential decay rate sqrt(m^2 - lam^2) of the resolvent kernel."""
        return math.sqrt(self.m * self.m - self.lam * self.lam)


def clifford_rep(d: int) -> CliffordRep:
    """Standard representation for spatial dimension d in {1, 2, 3}.

    d=1: (sigma_2; sigma_3); d=2: (sigma_1, sigma_2; sigma_3);
    d=3: off-diagonal sigma_k blocks with beta = diag(I_2, -I_2).
    """
    if d == 1:
        return CliffordRep(1, 2, (PAULI_2,), PAULI_3)
    if d == 2:
        return CliffordRep(2, 2, (PAULI_1, PAULI_2), PAULI_3)
    if d == 3:
        zeros = np.zeros((2, 2), dtype=complex)
        alphas = tuple(
            np.block([[zeros, sig], [sig, zeros]]) for sig in (PAULI_1, PAULI_2, PAULI_3)
        )
        beta = np.block([[np.eye(2), zeros], [zeros, -np.eye(2)]]).astype(complex)
        return CliffordRep(3, 4, alphas, beta)
    raise DomainError(f"unsupported dimension {d}; expected 1, 2 or 3")


def dirac_symbol(rep: CliffordRep, m: float, k) -> np.ndarray:
    """M(k) = alpha . k + m beta; Hermitian with M(k)^2 = (|k|^2 + m^2) I."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (rep.d,):
        raise DomainError(f"wavevector must have {rep.d} components")
    out = m * rep.beta.copy()
    for kj, aj in zip(k, rep.alphas):
        out = out + kj * aj
    return out


def resolvent_symbol(rep: CliffordRep, params: ResolventParams, k) -> np.ndarray:
    """g_lam(k) = (M(k) + lam I) / (|k|^2 + m^2 - lam^2); Hermitian, pole-free on R^d."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    msym = dirac_symbol(rep, params.m, k)
    denom = float(np.dot(k, k)) + params.m**2 - params.lam**2
    return (msym + params.lam * np.eye(rep.n_components)) / denom


def resolvent_symbol_z(rep: CliffordRep, m: float, z: complex, k) -> np.ndarray:
    """Resolvent multiplier at a general spectral parameter z off the real bands.

    Used for the purely-imaginary-energy decay check z = i s.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    msym = dirac_symbol(rep, m, k)
    denom = float(np.dot(k, k)) + m * m - z * z
    return (msym + z * np.eye(rep.n_components)) / denom


def resolvent_kernel(rep: CliffordRep, params: ResolventParams, x) -> np.ndarray:
    """Closed-form position-space resolvent kernel at x != 0.

    R(x) = c / |x|^(d/2-1) * [ i (alpha . x/|x|) kappa K_{d/2}(kappa |x|)
                               + (m beta + lam I) K_{d/2-1}(kappa |x|) ]
    with c = (1/2pi) (kappa / 2pi)^(d/2-1) and kappa = sqrt(m^2 - lam^2).
    Grid solvers never call this (they apply the resolvent in Fourier
    space); it exists for decay checks and kernel-level validation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (rep.d,):
        raise DomainError(f"position must have {rep.d} components")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise SingularityError("resolvent kernel is singular at x = 0")
    d = rep.d
    kappa = params.kappa
    c = (1.0 / (2.0 * math.pi)) * (kappa / (2.0 * math.pi)) ** (d / 2.0 - 1.0)
    k_hi = bessel_k(d / 2.0, kappa * r)
    k_lo = bessel_k(abs(d / 2.0 - 1.0), kappa * r)
    n = rep.n_components
    drift = np.zeros((n, n), dtype=complex)
    for xj, aj in zip(x, rep.alphas):
        drift = drift + (xj / r) * aj
    out = 1.0j * kappa * k_hi * drift + k_lo * (params.m * rep.beta + params.lam * np.eye(n))
    return (c / r ** (d / 2.0 - 1.0)) * out
