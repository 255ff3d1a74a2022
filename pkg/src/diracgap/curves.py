"""Sampled Keller-type curve data with provenance tracking."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .util import format_float

__all__ = ["KellerCurve", "write_alpha_star_csv"]


@dataclass
class KellerCurve:
    """Sampled (alpha, lambda) pairs of an optimal-bound curve.

    provenance records how the points were produced: 'closed-form' for
    the 1D analytic expressions, 'ode' for radial shooting, 'grid' for
    the pseudospectral solver.
    """

    alphas: np.ndarray
    lambdas: np.ndarray
    p: float
    d: int
    provenance: str
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        if self.alphas.shape != self.lambdas.shape:
            raise ValueError("alpha and lambda samples must align")
        if self.provenance not in ("closed-form", "ode", "grid"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_csv(self, path, header_comments=()):
        with open(path, "w", newline="") as fh:
            for line in header_comments:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow(["alpha", "lambda", "provenance"])
            for a, lam in zip(self.alphas, self.lambdas):
                writer.writerow([format_float(a), format_float(lam), self.provenance])


def write_alpha_star_csv(path, ps, alpha_stars, provenance, header_comments=()):
    """Critical-norm curve CSV with columns p, alpha_star, provenance."""
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["p", "alpha_star", "provenance"])
        for p, a in zip(ps, alpha_stars):
            writer.writerow([format_float(p), format_float(a), provenance])
