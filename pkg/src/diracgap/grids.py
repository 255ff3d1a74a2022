"""Periodic-box pseudospectral grids and the fields living on them.

The box is [-a, a]^d with L equally spaced nodes per direction
(x_j = -a + j * h, h = 2a/L) and periodic boundary conditions; the dual
lattice carries angular wavevectors 2*pi*fftfreq(L, h).  L^p norms use
equal-weight quadrature, which on a periodic uniform grid is the
trapezoidal rule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

__all__ = [
    "GridSpec",
    "PotentialField",
    "SpinorField",
    "gaussian_potential",
    "bump_potential",
    "make_potential",
    "read_potential_csv",
    "write_potential_csv",
]


@dataclass(frozen=True)
class GridSpec:
    """Periodic box [-a, a]^d with L nodes per direction (L even, >= 16)."""

    d: int
    a: float
    L: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not self.a > 0.0:
            raise DomainError(f"half-width must be positive, got {self.a}")
        if self.L < 16 or self.L % 2 != 0:
            raise DomainError(f"points per dim must be even and >= 16, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.a / self.L

    @property
    def n_nodes(self) -> int:
        return self.L**self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def origin_index(self) -> int:
        """Index of x = 0 along each axis."""
        return self.L // 2

    def axis(self) -> np.ndarray:
        return -self.a + self.h * np.arange(self.L)

    def mesh(self) -> list[np.ndarray]:
        return list(np.meshgrid(*([self.axis()] * self.d), indexing="ij"))

    def radius2(self) -> np.ndarray:
        return sum(x * x for x in self.mesh())

    def k_axis(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.L, d=self.h)

    def k_mesh(self) -> list[np.ndarray]:
        return list(np.meshgrid(*([self.k_axis()] * self.d), indexing="ij"))

    def k_norm2(self) -> np.ndarray:
        return sum(k * k for k in self.k_mesh())


@dataclass
class PotentialField:
    """Nonnegative real scalar field sampled on the grid nodes."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.L,) * self.grid.d
        if self.values.shape != expected:
            raise DomainError(f"potential shape {self.values.shape} != grid shape {expected}")
        if np.min(self.values) < 0.0:
            raise DomainError("potential values must be nonnegative")

    def lp_norm(self, p: float) -> float:
        return float((self.grid.cell_volume * np.sum(self.values**p)) ** (1.0 / p))

    def sqrt_values(self) -> np.ndarray:
        return np.sqrt(self.values)

    def scaled(self, t: float) -> "PotentialField":
        if t < 0:
            raise DomainError("scaling factor must be nonnegative")
        return PotentialField(self.grid, t * self.values)


@dataclass
class SpinorField:
    """N-component complex field on the grid; last axis indexes the spinor components."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != self.grid.d + 1 or self.values.shape[: self.grid.d] != (self.grid.L,) * self.grid.d:
            raise DomainError("spinor shape incompatible with grid")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("spinor must have finite entries")

    @property
    def n_components(self) -> int:
        return self.values.shape[-1]

    def pointwise_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=-1))

    def l2_norm(self) -> float:
        return float(math.sqrt(self.grid.cell_volume * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "SpinorField") -> complex:
        return complex(self.grid.cell_volume * np.sum(np.conj(self.values) * other.values))


def gaussian_potential(grid: GridSpec, amplitude: float, width2: float) -> PotentialField:
    """amplitude * exp(-|x|^2 / width2)."""
    if amplitude < 0 or width2 <= 0:
        raise DomainError("gaussian family needs amplitude >= 0 and width2 > 0")
    return PotentialField(grid, amplitude * np.exp(-grid.radius2() / width2))


def bump_potential(grid: GridSpec, mass: float, width: float) -> PotentialField:
    """Compactly supported cos^2 bump of given integral (d = 1 only).

    V(x) = (mass / width) * cos^2(pi x / (2 width)) on |x| < width; its
    exact integral is `mass`.
    """
    if grid.d != 1:
        raise DomainError("bump family is one-dimensional")
    if mass < 0 or width <= 0:
        raise DomainError("bump family needs mass >= 0 and width > 0")
    x = grid.axis()
    vals = np.where(
        np.abs(x) < width,
        (mass / width) * np.cos(math.pi * x / (2.0 * width)) ** 2,
        0.0,
    )
    return PotentialField(grid, vals)


def make_potential(grid: GridSpec, config: dict) -> PotentialField:
    """Build a potential from a named analytic family described by a JSON-style dict.

    Families: gaussian {amplitude, width2}; bump {mass, width};
    keller-1d-subcritical {m, p, lam}; keller-1d-critical {m, p}.
    """
    family = config.get("family")
    if family == "gaussian":
        return gaussian_potential(grid, float(config["amplitude"]), float(config["width2"]))
    if family == "bump":
        return bump_potential(grid, float(config["mass"]), float(config["width"]))
    if family == "keller-1d-subcritical":
        from .exact_1d import Keller1DParams, potential_subcritical

        if grid.d != 1:
            raise DomainError("keller-1d families are one-dimensional")
        params = Keller1DParams(m=float(config.get("m", 1.0)), p=float(config["p"]), lam=float(config["lam"]))
        return PotentialField(grid, potential_subcritical(params)(grid.axis()))
    if family == "keller-1d-critical":
        from .exact_1d import potential_critical

        if grid.d != 1:
            raise DomainError("keller-1d families are one-dimensional")
        return PotentialField(
            grid, potential_critical(float(config.get("m", 1.0)), float(config["p"]))(grid.axis())
        )
    raise ValidationError(f"unknown potential family {family!r}")


def write_potential_csv(field: PotentialField, path, header_comments=()):
    """Write columns x1..xd, V in row-major node order; '#' lines carry metadata."""
    grid = field.grid
    mesh = grid.mesh()
    flat = [m.ravel() for m in mesh]
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(grid.d)] + ["V"])
        vals = field.values.ravel()
        for i in range(vals.size):
            writer.writerow([f"{c[i]:.17g}" for c in flat] + [f"{vals[i]:.17g}"])


def read_potential_csv(path) -> PotentialField:
    """Read a potential written by write_potential_csv (full row-major grid)."""
    rows = []
    with open(path) as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        d = len(header) - 1
        if d not in (1, 2, 3) or header[-1] != "V":
            raise ValidationError("potential CSV must have columns x1..xd, V")
        for row in reader:
            rows.append([float(v) for v in row])
    data = np.asarray(rows)
    n = data.shape[0]
    L = round(n ** (1.0 / d))
    if L**d != n:
        raise ValidationError(f"row count {n} is not a d={d} grid")
    first_axis = np.unique(data[:, 0])
    if first_axis.size != L:
        raise ValidationError("CSV nodes do not form a uniform grid")
    h = first_axis[1] - first_axis[0]
    a = -first_axis[0]
    if not math.isclose(first_axis[-1], a - h, rel_tol=0, abs_tol=1e-9 * max(a, 1.0)):
        raise ValidationError("CSV axis is not the periodic grid [-a, a)")
    grid = GridSpec(d=d, a=a, L=L)
    values = data[:, -1].reshape((L,) * d)
    return PotentialField(grid, values)
