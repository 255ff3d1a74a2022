"""Self-consistent search for optimal 2D potentials of the auxiliary problem.

Fixed-point iteration on the unit L^p sphere: take the top eigenvector
phi of K_W(lam), set the next potential to |phi|^(2/p) (automatically of
unit L^p norm when phi has unit L^2 norm), recenter its maximum at the
origin by a torus roll, repeat.  The top eigenvalue mu_1 is monitored
and must not decrease; the L^p norm of the angular derivative serves as
the radiality diagnostic of the limit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .bs_operator import _KVApplier, _lanczos_extremal
from .dirac_core import CliffordRep, clifford_rep
from .errors import DomainError
from .grids import GridSpec, PotentialField, SpinorField
from .util import format_float

__all__ = [
    "ScfHistoryRow",
    "ScfState",
    "random_band_limited_potential",
    "scf_step",
    "run_scf",
    "radiality_metric",
    "el_residual",
    "write_history_csv",
]

_MU1_MONOTONE_TOL = 1e-8


@dataclass(frozen=True)
class ScfHistoryRow:
    iteration: int
    mu1: float
    step_norm: float
    radiality: float


@dataclass
class ScfState:
    """Current iterate of the self-consistent loop.

    W keeps unit L^p norm up to quadrature roundoff; mu1 history must be
    nondecreasing within solver tolerance or the run is aborted and
    flagged.
    """

    iteration: int
    W: PotentialField
    p: float
    mu1: float = math.nan
    phi: SpinorField | None = None
    history: list = field(default_factory=list)
    converged: bool = False
    flags: list = field(default_factory=list)

    def __post_init__(self):
        norm = self.W.lp_norm(self.p)
        if abs(norm - 1.0) > 1e-10:
            raise DomainError(f"SCF potential must have unit L^p norm, got {norm}")


def random_band_limited_potential(grid: GridSpec, p: float, seed: int,
                                  k_cut_frac: float = 0.25) -> PotentialField:
    """|band-limited Gaussian field|, normalized to unit L^p norm."""
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((grid.L,) * grid.d) + 1j * rng.standard_normal((grid.L,) * grid.d)
    k2 = grid.k_norm2()
    k_cut = k_cut_frac * np.max(np.abs(grid.k_axis()))
    coeffs = np.where(k2 <= k_cut**2, coeffs, 0.0)
    fieldvals = np.abs(np.fft.ifftn(coeffs).real)
    norm = (grid.cell_volume * np.sum(fieldvals**p)) ** (1.0 / p)
    if norm == 0.0:
        raise DomainError("degenerate random start")
    return PotentialField(grid, fieldvals / norm)


def _top_two(rep, grid, W, lam, m, v0, tol=1e-11):
    applier = _KVApplier(rep, grid, W, lam, m)
    n = applier.n
    if v0 is None:
        rng = np.random.default_rng(2)
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    res = _lanczos_extremal(applier.matvec, n, 2, 0, v0, tol, min(n, 600))
    return res


def _recenter_shift(grid: GridSpec, values: np.ndarray):
    """Torus roll moving the (first) maximum of values to the origin node."""
    flat_idx = int(np.argmax(values))  # ties: lexicographically smallest index
    idx = np.unravel_index(flat_idx, values.shape)
    return tuple(grid.origin_index - i for i in idx)


def scf_step(rep: CliffordRep, grid: GridSpec, state: ScfState, lam: float, p: float,
             *, m: float = 1.0, eig_tol: float = 1e-11) -> ScfState:
    """One fixed-point update W -> |top eigenvector of K_W|^(2/p), recentered.

    The new potential has exactly unit L^p norm because the eigenvector
    is L^2-normalized on the grid.  A top spectral gap below 1e-8 is
    flagged and resolved by maximal overlap with the previous
    eigenvector.
    """
    if grid.d != 2:
        raise DomainError("the self-consistent optimizer is two-dimensional")
    if not (-m <= lam < m):
        raise DomainError(f"gap energy must lie in [-m, m), got {lam}")
    if p <= grid.d:
        raise DomainError(f"exponent must exceed d = {grid.d}, got {p}")

    v0 = state.phi.values.ravel() if state.phi is not None else None
    res = _top_two(rep, grid, state.W, lam, m, v0, eig_tol)
    mu1 = float(res.top[0])
    flags = list(state.flags)
    pick = 0
    if res.top[0] - res.top[1] < 1e-8:
        flags.append(f"degenerate-top-gap@{state.iteration}")
        if state.phi is not None:
            prev = state.phi.values.ravel()
            overlaps = [abs(np.vdot(res.top_vectors[:, j], prev)) for j in range(2)]
            pick = int(np.argmax(overlaps))
    vec = res.top_vectors[:, pick].reshape((grid.L,) * grid.d + (rep.n_components,))
    phi = SpinorField(grid, vec)
    phi_values = phi.values / phi.l2_norm()

    w_new = np.sum(np.abs(phi_values) ** 2, axis=-1) ** (1.0 / p)
    shift = _recenter_shift(grid, w_new)
    w_new = np.roll(w_new, shift, axis=tuple(range(grid.d)))
    phi_values = np.roll(phi_values, shift, axis=tuple(range(grid.d)))

    w_field = PotentialField(grid, w_new)
    step_norm = (grid.cell_volume * np.sum(np.abs(w_new - state.W.values) ** p)) ** (1.0 / p)
    radiality = radiality_metric(w_field, p)
    row = ScfHistoryRow(state.iteration + 1, mu1, float(step_norm), float(radiality))
    return ScfState(
        iteration=state.iteration + 1,
        W=w_field,
        p=p,
        mu1=mu1,
        phi=SpinorField(grid, phi_values),
        history=state.history + [row],
        flags=flags,
    )


def run_scf(rep: CliffordRep, grid: GridSpec, lam: float, p: float, seed: int,
            max_iter: int = 200, conv_tol: float = 1e-6, *, m: float = 1.0,
            eig_tol: float = 1e-11) -> ScfState:
    """Iterate scf_step from a seeded random start until the L^p step norm drops below conv_tol.

    Non-convergence is reported through the returned state (flag +
    converged=False), not an exception; a decrease of mu1 beyond 1e-8
    aborts the run with a 'mu1-decrease' flag.
    """
    w0 = random_band_limited_potential(grid, p, seed)
    state = ScfState(iteration=0, W=w0, p=p)
    for _ in range(max_iter):
        new_state = scf_step(rep, grid, state, lam, p, m=m, eig_tol=eig_tol)
        if not math.isnan(state.mu1) and new_state.mu1 < state.mu1 - _MU1_MONOTONE_TOL:
            new_state.flags.append(
                f"mu1-decrease@{new_state.iteration}: {state.mu1:.12f} -> {new_state.mu1:.12f}"
            )
            state = new_state
            break
        state = new_state
        if state.history[-1].step_norm < conv_tol:
            state.converged = True
            break
    if not state.converged and not any(f.startswith("mu1-decrease") for f in state.flags):
        state.flags.append("unconverged")
    return state


def radiality_metric(W: PotentialField, p: float) -> float:
    """L^p norm of the angular derivative x d_y W - y d_x W (2D only).

    Spectral differentiation on the torus; identically zero for radial
    fields centered at the origin, and invariant under exact quarter-turn
    grid rotations.
    """
    grid = W.grid
    if grid.d != 2:
        raise DomainError("radiality metric is two-dimensional")
    kx, ky = grid.k_mesh()
    wk = np.fft.fftn(W.values)
    dwx = np.real(np.fft.ifftn(1j * kx * wk))
    dwy = np.real(np.fft.ifftn(1j * ky * wk))
    x, y = grid.mesh()
    dtheta = x * dwy - y * dwx
    return float((grid.cell_volume * np.sum(np.abs(dtheta) ** p)) ** (1.0 / p))


def el_residual(w_field: SpinorField, lam: float, p: float, tau: float,
                *, m: float = 1.0) -> float:
    """Relative L^2 residual of the optimality equation R0(lam) w = tau |w|^(-2/(p+1)) w.

    w is the half-density sqrt(W) phi of a converged state and tau its
    top eigenvalue; the residual is ||R0 w - tau |w|^(-2/(p+1)) w|| / ||w||.
    """
    grid = w_field.grid
    rep = clifford_rep(grid.d)
    if w_field.n_components != rep.n_components:
        raise DomainError("component count mismatch")
    from .bs_operator import _resolvent_multiplier

    mult = _resolvent_multiplier(rep, grid, lam, m)
    axes = tuple(range(grid.d))
    wk = np.fft.fftn(w_field.values, axes=axes)
    r0w = np.fft.ifftn(np.einsum("...ij,...j->...i", mult, wk), axes=axes)

    mag = np.sqrt(np.sum(np.abs(w_field.values) ** 2, axis=-1))
    scale = np.zeros_like(mag)
    pos = mag > 0
    scale[pos] = mag[pos] ** (-2.0 / (p + 1.0))
    nonlinear = tau * scale[..., None] * w_field.values

    num = math.sqrt(grid.cell_volume * np.sum(np.abs(r0w - nonlinear) ** 2))
    den = w_field.l2_norm()
    if den == 0:
        raise DomainError("zero field has no residual")
    return num / den


def write_history_csv(state: ScfState, path, header_comments=()):
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["iter", "mu1", "step_norm", "radiality"])
        for row in state.history:
            writer.writerow(
                [row.iteration, format_float(row.mu1), format_float(row.step_norm), format_float(row.radiality)]
            )
