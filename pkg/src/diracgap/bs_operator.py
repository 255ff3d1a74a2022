"""Pseudospectral Birman-Schwinger operator K_V(lam) = sqrt(V) R0(lam) sqrt(V).

The free resolvent is applied as a Fourier multiplier on the dual lattice
of the periodic box, so the operator is matrix-free: one forward FFT, a
pointwise N x N multiplication, one inverse FFT.  Extremal eigenvalues
come from a Lanczos iteration with full reorthogonalization and a
deterministic seeded start vector.  An energy lam in the gap is an
eigenvalue of the potential-perturbed Dirac operator exactly when some
eigenvalue of K_V(lam) equals 1, which turns spectral questions into
root-finding on monotone eigenvalue branches.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .dirac_core import CliffordRep
from .errors import ConvergenceError, DomainError, SupercriticalError
from .grids import GridSpec, PotentialField, SpinorField
from .util import format_float, n_threads

__all__ = [
    "SpectralCurve",
    "Crossing",
    "EigResult",
    "apply_KV",
    "extremal_eigs",
    "sweep_branches",
    "lambda_D",
    "count_gap_eigenvalues",
    "assemble_dense",
    "kv_imaginary_norm",
    "scalar_bs_applier",
    "pseudo_relativistic_symbol",
    "schrodinger_symbol",
    "count_eigs_ge",
]

_BRANCH_MONO_TOL = 1e-8


# ---------------------------------------------------------------------------
# matrix-free appliers


def _resolvent_multiplier(rep: CliffordRep, grid: GridSpec, z, m: float) -> np.ndarray:
    """(M(k) + z I) / (|k|^2 + m^2 - z^2) tabulated on the dual lattice."""
    n = rep.n_components
    kmesh = grid.k_mesh()
    shape = kmesh[0].shape
    g = np.zeros(shape + (n, n), dtype=complex)
    for kj, aj in zip(kmesh, rep.alphas):
        g += kj[..., None, None] * aj
    g += m * rep.beta + z * np.eye(n)
    denom = (grid.k_norm2() + m * m - z * z)[..., None, None]
    return g / denom


class _KVApplier:
    """Callable phi -> sqrt(V) F^-1[g_z(k) F[sqrt(V) phi]] on spinor arrays."""

    def __init__(self, rep: CliffordRep, grid: GridSpec, V: PotentialField, z, m: float = 1.0):
        if V.grid != grid:
            raise DomainError("potential grid mismatch")
        zr = complex(z)
        if zr.imag == 0.0 and not abs(zr.real) < m:
            raise DomainError(f"gap energy must satisfy |lam| < m, got {zr.real}")
        self.rep = rep
        self.grid = grid
        self.sqrtv = V.sqrt_values()
        self.mult = _resolvent_multiplier(rep, grid, zr.real if zr.imag == 0.0 else zr, m)
        self._axes = tuple(range(grid.d))
        self.n = grid.n_nodes * rep.n_components

    def __call__(self, phi_values: np.ndarray) -> np.ndarray:
        psi = self.sqrtv[..., None] * phi_values
        psik = np.fft.fftn(psi, axes=self._axes)
        out = np.einsum("...ij,...j->...i", self.mult, psik)
        out = np.fft.ifftn(out, axes=self._axes)
        return self.sqrtv[..., None] * out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        shape = (self.grid.L,) * self.grid.d + (self.rep.n_components,)
        return self(v.reshape(shape)).ravel()


def apply_KV(rep: CliffordRep, grid: GridSpec, V: PotentialField, lam: float,
             phi: SpinorField, m: float = 1.0) -> SpinorField:
    """One application of the Birman-Schwinger operator at gap energy lam.

    Exactly linear in phi; symmetric because lam is real; scales linearly
    with the potential strength.
    """
    if phi.n_components != rep.n_components:
        raise DomainError("spinor component count does not match the representation")
    applier = _KVApplier(rep, grid, V, lam, m)
    return SpinorField(grid, applier(phi.values))


def scalar_bs_applier(grid: GridSpec, V: PotentialField, symbol_values: np.ndarray):
    """sqrt(V) g(-i grad) sqrt(V) for a scalar Fourier symbol g(k).

    Used for the pseudo-relativistic and Schroedinger comparison
    operators; returns a callable on scalar complex arrays plus the flat
    dimension.
    """
    sqrtv = V.sqrt_values()
    axes = tuple(range(grid.d))

    def matvec(v: np.ndarray) -> np.ndarray:
        psi = sqrtv * v.reshape(sqrtv.shape)
        out = np.fft.ifftn(symbol_values * np.fft.fftn(psi, axes=axes), axes=axes)
        return (sqrtv * out).ravel()

    return matvec, grid.n_nodes


def pseudo_relativistic_symbol(grid: GridSpec, m: float, e: float) -> np.ndarray:
    """1 / (sqrt(|k|^2 + m^2) - m + e): positive symbol of the Chandrasekhar resolvent."""
    if not 0.0 < e:
        raise DomainError("energy offset e must be positive")
    return 1.0 / (np.sqrt(grid.k_norm2() + m * m) - m + e)


def schrodinger_symbol(grid: GridSpec, lam: float) -> np.ndarray:
    """1 / (|k|^2 - lam) for lam < 0: the nonrelativistic comparison resolvent."""
    if not lam < 0.0:
        raise DomainError("Schroedinger comparison needs lam < 0")
    return 1.0 / (grid.k_norm2() - lam)


# ---------------------------------------------------------------------------
# Lanczos with full reorthogonalization


@dataclass
class EigResult:
    top: np.ndarray
    bottom: np.ndarray
    top_vectors: np.ndarray      # (n, k_top) columns
    bottom_vectors: np.ndarray   # (n, k_bottom) columns
    iterations: int
    residuals: np.ndarray


def _lanczos_extremal(matvec, n: int, k_top: int, k_bottom: int, v0: np.ndarray,
                      tol: float, max_iter: int) -> EigResult:
    k_want = k_top + k_bottom
    if k_want == 0:
        raise DomainError("must request at least one eigenvalue")
    max_iter = min(max_iter, n)
    block = min(max_iter, max(64, 4 * k_want))
    Q = np.empty((block, n), dtype=complex)
    alphas = np.empty(max_iter)
    betas = np.zeros(max(max_iter - 1, 1))

    rng = np.random.default_rng(12345)
    q = v0.astype(complex) / np.linalg.norm(v0)
    q_prev = np.zeros(n, dtype=complex)
    beta_prev = 0.0
    check_every = 8
    best_res = math.inf

    def _ritz(mm, beta_next):
        theta, S = eigh_tridiagonal(alphas[: mm + 1], betas[:mm])
        order = np.argsort(theta)
        idx_bottom = order[:k_bottom] if k_bottom else np.array([], dtype=int)
        idx_top = order[::-1][:k_top] if k_top else np.array([], dtype=int)
        idx = np.concatenate([idx_top, idx_bottom])
        res = beta_next * np.abs(S[mm, idx])
        return theta, S, idx_top, idx_bottom, idx, res

    for mit in range(max_iter):
        if mit >= Q.shape[0]:
            grown = np.empty((min(max_iter, 2 * Q.shape[0]), n), dtype=complex)
            grown[: Q.shape[0]] = Q
            Q = grown
        Q[mit] = q
        u = matvec(q)
        alphas[mit] = float(np.real(np.vdot(q, u)))
        r = u - alphas[mit] * q - beta_prev * q_prev
        # full reorthogonalization, two classical Gram-Schmidt passes
        for _ in range(2):
            coeffs = Q[: mit + 1].conj() @ r
            r -= Q[: mit + 1].T @ coeffs
        beta = float(np.linalg.norm(r))
        scale = max(np.max(np.abs(alphas[: mit + 1])), np.max(np.abs(betas[:mit])) if mit else 0.0, 1e-300)

        do_check = (mit + 1 >= k_want) and ((mit % check_every == check_every - 1) or mit == max_iter - 1 or beta <= 1e-13 * scale)
        if do_check:
            theta, S, idx_top, idx_bottom, idx, res = _ritz(mit, beta)
            theta_scale = max(np.max(np.abs(theta)), 1e-300)
            floor = 1e-12 * theta_scale + 1e-300
            ok = res <= np.maximum(tol * np.abs(theta[idx]), floor)
            best_res = min(best_res, float(np.max(res / np.maximum(np.abs(theta[idx]), floor))))
            if np.all(ok):
                basis = Q[: mit + 1]
                top_vals = theta[idx_top]
                bottom_vals = theta[idx_bottom]
                top_vecs = (basis.T @ S[:, idx_top]) if k_top else np.zeros((n, 0), dtype=complex)
                bottom_vecs = (basis.T @ S[:, idx_bottom]) if k_bottom else np.zeros((n, 0), dtype=complex)
                return EigResult(top_vals, bottom_vals, top_vecs, bottom_vecs, mit + 1, res)

        if beta <= 1e-13 * scale:
            # invariant subspace: restart with a fresh direction orthogonal to Q
            if mit + 1 >= n:
                break
            r = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            coeffs = Q[: mit + 1].conj() @ r
            r -= Q[: mit + 1].T @ coeffs
            nr = np.linalg.norm(r)
            if nr == 0.0:
                break
            q_prev = np.zeros(n, dtype=complex)
            beta_prev = 0.0
            q = r / nr
            if mit < max_iter - 1:
                betas[mit] = 0.0
            continue

        q_prev = q
        beta_prev = beta
        q = r / beta
        if mit < max_iter - 1:
            betas[mit] = beta

    raise ConvergenceError(
        f"Lanczos did not converge {k_want} extremal pairs in {max_iter} iterations",
        best_residual=best_res,
    )


def extremal_eigs(rep: CliffordRep, grid: GridSpec, V: PotentialField, lam: float,
                  k_top: int, k_bottom: int, *, m: float = 1.0, tol: float = 1e-9,
                  seed: int = 7, v0: np.ndarray | None = None,
                  max_iter: int | None = None) -> EigResult:
    """Largest k_top and lowest k_bottom eigenvalues of K_V(lam) with eigenvectors.

    Residuals satisfy ||K v - mu v|| <= tol * |mu| for every returned pair
    (tol default 1e-9, stricter than the 1e-8 contract).
    """
    applier = _KVApplier(rep, grid, V, lam, m)
    n = applier.n
    if k_top + k_bottom > n // 4:
        raise DomainError(f"requested {k_top + k_bottom} eigenpairs exceeds n/4 = {n // 4}")
    if v0 is None:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if max_iter is None:
        max_iter = min(n, max(400, 18 * (k_top + k_bottom)))
    return _lanczos_extremal(applier.matvec, n, k_top, k_bottom, v0, tol, max_iter)


def assemble_dense(rep: CliffordRep, grid: GridSpec, V: PotentialField, lam: float,
                   m: float = 1.0) -> np.ndarray:
    """Explicit dense matrix of K_V(lam); only for small grids (n <= 4096)."""
    applier = _KVApplier(rep, grid, V, lam, m)
    n = applier.n
    if n > 4096:
        raise DomainError(f"dense assembly limited to n <= 4096, got {n}")
    out = np.empty((n, n), dtype=complex)
    e = np.zeros(n, dtype=complex)
    for j in range(n):
        e[j] = 1.0
        out[:, j] = applier.matvec(e)
        e[j] = 0.0
    return out


# ---------------------------------------------------------------------------
# branch sweeps, crossings, counting


@dataclass(frozen=True)
class Crossing:
    branch: int
    lam: float


@dataclass
class SpectralCurve:
    """Sampled top/bottom eigenvalue branches of lam -> K_V(lam) with crossing records.

    Branches are matched across energies by sorted order; by min-max
    monotonicity each sorted branch is nondecreasing in lam, which the
    constructor enforces within a solver tolerance.
    """

    lambdas: np.ndarray
    top: np.ndarray
    bottom: np.ndarray
    crossings: list = field(default_factory=list)
    near_degenerate: list = field(default_factory=list)
    supercritical_branches: int = 0
    mono_tol: float = _BRANCH_MONO_TOL

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.top = np.asarray(self.top, dtype=float)
        self.bottom = np.asarray(self.bottom, dtype=float)
        if np.any(np.diff(self.lambdas) <= 0):
            raise DomainError("lambda samples must be strictly increasing")
        for name, branches in (("top", self.top), ("bottom", self.bottom)):
            if branches.size and np.min(np.diff(branches, axis=0)) < -self.mono_tol:
                worst = float(np.min(np.diff(branches, axis=0)))
                raise DomainError(
                    f"{name} branches must be nondecreasing in lambda (worst step {worst:.3e})"
                )

    def to_csv(self, path, header_comments=()):
        k = self.top.shape[1]
        kb = self.bottom.shape[1]
        with open(path, "w", newline="") as fh:
            for line in header_comments:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow(
                ["lambda"] + [f"mu_{j + 1}" for j in range(k)] + [f"nu_{j + 1}" for j in range(kb)]
            )
            for i, lam in enumerate(self.lambdas):
                writer.writerow(
                    [format_float(lam)]
                    + [format_float(v) for v in self.top[i]]
                    + [format_float(v) for v in self.bottom[i]]
                )


def _branch_value(rep, grid, V, lam, branch, *, m, tol, v0=None):
    res = extremal_eigs(rep, grid, V, lam, k_top=branch + 2, k_bottom=0, m=m, tol=tol, v0=v0)
    return res.top[branch], res


def sweep_branches(rep: CliffordRep, grid: GridSpec, V: PotentialField,
                   lambda_grid, k: int, *, m: float = 1.0, tol: float = 1e-9,
                   refine: bool = True, xtol: float = 1e-8,
                   threads: int | None = None) -> SpectralCurve:
    """Track the k largest and k lowest eigenvalue branches over a lambda grid.

    Crossings of the value 1 are bracketed between samples and refined by
    bisection on the sorted-order branch (monotone, so each branch
    crosses at most once).  Near-degenerate top gaps (< 1e-6) at a
    crossing are recorded instead of assuming the branch is simple.
    """
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if lambda_grid.ndim != 1 or np.any(np.diff(lambda_grid) <= 0):
        raise DomainError("lambda_grid must be sorted strictly increasing")
    if np.min(lambda_grid) <= -m or np.max(lambda_grid) >= m:
        raise DomainError("lambda_grid must lie inside the gap (-m, m)")

    def one(lam):
        return extremal_eigs(rep, grid, V, lam, k_top=k, k_bottom=k, m=m, tol=tol)

    workers = threads if threads is not None else n_threads()
    if workers > 1 and lambda_grid.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, lambda_grid))
    else:
        results = [one(lam) for lam in lambda_grid]

    top = np.array([r.top for r in results])
    bottom = np.array([r.bottom for r in results])

    crossings: list[Crossing] = []
    near_degenerate = []
    supercritical = int(np.sum(top[0] >= 1.0))
    if refine:
        for j in range(k):
            col = top[:, j]
            hits = np.nonzero((col[:-1] < 1.0) & (col[1:] >= 1.0))[0]
            for i in hits:
                lo, hi = float(lambda_grid[i]), float(lambda_grid[i + 1])
                flo, fhi = col[i] - 1.0, col[i + 1] - 1.0
                # local linear interpolation seeds the bisection bracket
                lam_c = lo + (hi - lo) * (-flo) / (fhi - flo)
                warm = results[i + 1].top_vectors[:, min(j, results[i + 1].top_vectors.shape[1] - 1)]
                while hi - lo > xtol:
                    mid = 0.5 * (lo + hi)
                    val, eres = _branch_value(rep, grid, V, mid, j, m=m, tol=tol, v0=warm)
                    warm = eres.top_vectors[:, min(j, eres.top_vectors.shape[1] - 1)]
                    if val >= 1.0:
                        hi = mid
                    else:
                        lo = mid
                lam_c = 0.5 * (lo + hi)
                _, eres = _branch_value(rep, grid, V, lam_c, j, m=m, tol=tol, v0=warm)
                gaps = np.abs(np.diff(eres.top))
                if j < len(gaps) and gaps[j] < 1e-6 or (j > 0 and gaps[j - 1] < 1e-6):
                    near_degenerate.append((lam_c, j, float(np.min(gaps))))
                crossings.append(Crossing(branch=j, lam=lam_c))
    crossings.sort(key=lambda c: c.lam)
    return SpectralCurve(lambda_grid, top, bottom, crossings, near_degenerate, supercritical)


def lambda_D(rep: CliffordRep, grid: GridSpec, V: PotentialField, tol: float = 1e-8,
             *, m: float = 1.0, branch: int = 0, seed: int = 7,
             eig_tol: float = 1e-9, max_iter: int = 60):
    """Gap energy where the (branch+1)-th largest eigenvalue of K_V equals 1.

    branch=0 gives the ground state: the smallest energy in (-m, m) at
    which the top eigenvalue reaches 1.  Returns None when the branch
    stays below 1 on the whole gap (no bound state).  Raises
    SupercriticalError when the branch already exceeds 1 at the bottom of
    the gap (the state has dived below the gap).
    """
    if np.all(V.values == 0.0):
        return None
    lo = -m + 10.0 * tol
    hi = m - 10.0 * tol
    val_lo, res = _branch_value(rep, grid, V, lo, branch, m=m, tol=eig_tol)
    warm = res.top_vectors[:, 0]
    if val_lo >= 1.0:
        raise SupercriticalError(
            f"branch {branch} already at {val_lo:.6f} >= 1 at the bottom of the gap"
        )
    val_hi, res = _branch_value(rep, grid, V, hi, branch, m=m, tol=eig_tol, v0=warm)
    if val_hi < 1.0:
        return None
    warm = res.top_vectors[:, 0]
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        val, res = _branch_value(rep, grid, V, mid, branch, m=m, tol=eig_tol, v0=warm)
        warm = res.top_vectors[:, 0]
        if val >= 1.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def count_eigs_ge(matvec, n: int, threshold: float, *, seed: int = 11,
                  tol: float = 1e-9, k0: int = 8, k_cap: int = 128) -> int:
    """Number of eigenvalues >= threshold of a symmetric matrix-free operator.

    Grows the Lanczos window until the smallest computed extremal value
    falls below the threshold, so the count is exhaustive.
    """
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    k = min(k0, max(1, n // 4))
    while True:
        res = _lanczos_extremal(matvec, n, k, 0, v0, tol, min(n, max(400, 18 * k)))
        if res.top[-1] < threshold or k >= min(k_cap, n // 4):
            return int(np.sum(res.top >= threshold))
        k = min(2 * k, n // 4, k_cap)


def count_gap_eigenvalues(rep: CliffordRep, grid: GridSpec, V: PotentialField,
                          e: float, *, m: float = 1.0, tol: float = 1e-9,
                          bottom_offset: float = 1e-6):
    """Eigenvalue counts for the Lieb-Thirring chain at energy offset e in (0, 2m).

    B_e counts eigenvalues of K_V(m - e) that are >= 1.  N_e counts gap
    eigenvalues at energies <= m - e; since every sorted branch is
    monotone and crosses 1 at most once, this equals B_e minus the number
    of branches already >= 1 at the bottom of the gap.
    """
    if not 0.0 < e < 2.0 * m:
        raise DomainError(f"energy offset must lie in (0, 2m), got {e}")
    if np.all(V.values == 0.0):
        return 0, 0
    applier_e = _KVApplier(rep, grid, V, m - e, m)
    b_e = count_eigs_ge(applier_e.matvec, applier_e.n, 1.0, tol=tol)
    applier_bot = _KVApplier(rep, grid, V, -m + bottom_offset, m)
    dived = count_eigs_ge(applier_bot.matvec, applier_bot.n, 1.0, tol=tol)
    n_e = b_e - dived
    return n_e, b_e


def kv_imaginary_norm(rep: CliffordRep, grid: GridSpec, V: PotentialField, s: float,
                      *, m: float = 1.0, iters: int = 80, seed: int = 3) -> float:
    """Largest singular value of K_V(i s) by power iteration on K* K.

    The resolvent multiplier at z = i s is not Hermitian; its adjoint is
    the multiplier at z = -i s.
    """
    fwd = _KVApplier(rep, grid, V, 1j * s, m)
    adj = _KVApplier(rep, grid, V, -1j * s, m)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(fwd.n) + 1j * rng.standard_normal(fwd.n)
    v /= np.linalg.norm(v)
    sigma2 = 0.0
    for _ in range(iters):
        w = adj.matvec(fwd.matvec(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        sigma2 = nw
    return math.sqrt(sigma2)
