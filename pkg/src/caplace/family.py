"""Finite families of distinct solutions to one boundary problem.

The solution space of the directional-derivative problem is not finite
dimensional; at desk scale this is echoed by generating one solution per
corrector anchor and certifying linear independence through the Gram matrix
of mean-removed interior samples.  Differences of two members solve the
homogeneous problem everywhere except at their two anchors.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .harmonic import HarmonicSolution, solve_directional_disk
from .riemann_hilbert import boundary_residual
from .validation import check_unimodular


@dataclass(frozen=True)
class SolutionFamily:
    """Solutions sharing (nu, phi), one per corrector anchor."""

    members: tuple
    anchors: tuple
    gram: np.ndarray
    min_eigenvalue: float
    rank: int

    @property
    def size(self):
        return len(self.members)

    def residuals(self, **kw):
        return [
            boundary_residual(m.f, m.nu, m.phi, **kw).max_abs for m in self.members
        ]

    def report_json_dict(self, **kw):
        return {
            "k": self.size,
            "rank": self.rank,
            "min_eig": self.min_eigenvalue,
            "residuals": self.residuals(**kw),
        }

    def to_json(self, path, **kw):
        with open(path, "w") as fh:
            json.dump(self.report_json_dict(**kw), fh, indent=1, sort_keys=True)
            fh.write("\n")


def _interior_samples(grid_n=33, radius=0.9):
    xs = np.linspace(-radius, radius, grid_n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    Z = (X + 1j * Y).ravel()
    return Z[np.abs(Z) <= radius]


def independence_certificate(members, grid_n=33, radius=0.9, threshold=1e-8):
    """Gram matrix of mean-removed interior samples.

    Rank counts eigenvalues above ``threshold * trace`` (scale free).
    Returns (rank, min eigenvalue, gram matrix).
    """
    pts = _interior_samples(grid_n, radius)
    cols = []
    for m in members:
        u = m.u(pts) if isinstance(m, HarmonicSolution) else np.asarray(m(pts))
        cols.append(u - np.mean(u))
    S = np.column_stack(cols)
    gram = S.T @ S
    eig = np.linalg.eigvalsh(gram)
    rank = int(np.sum(eig > threshold * np.trace(gram)))
    return rank, float(eig[0]), gram


def generate_family(nu, phi, anchors, grid_n=33, radius=0.9):
    """One solution of the same problem per distinct corrector anchor.

    Requires winding 1 (so the corrector placement matters) and pairwise
    distinct unimodular anchors.
    """
    anchors = tuple(check_unimodular(a, name="anchor") for a in anchors)
    for i in range(len(anchors)):
        for j in range(i + 1, len(anchors)):
            if abs(anchors[i] - anchors[j]) < 1e-9:
                raise ConfigurationError(f"duplicate corrector anchors at {anchors[i]}")
    if nu.winding != 1:
        raise ConfigurationError(
            "family generation needs winding 1 (correctors act only then)"
        )
    members = tuple(solve_directional_disk(nu, phi, a) for a in anchors)
    rank, min_eig, gram = independence_certificate(members, grid_n, radius)
    return SolutionFamily(
        members=members, anchors=anchors, gram=gram,
        min_eigenvalue=min_eig, rank=rank,
    )
