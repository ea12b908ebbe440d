"""Independent reference solvers used only for cross-validation in tests.

Production solvers never call into this module; the dependency points the
other way.  Two oracles are provided:

* ``fourier_neumann_disk`` -- classical separation of variables on the unit
  disk.  It refuses data with nonzero mean: the classical compatibility
  condition is a hard requirement here, which is precisely the restriction
  the corrector construction removes.
* ``fd_solve_neumann`` -- a conservative bilinear finite-element scheme on a
  Cartesian cut-cell grid for ``div(A grad u) = 0`` with prescribed conormal
  flux ``<A grad u, n>`` (interior normal) on the boundary.  Diagonal
  coefficient fields only; the weak form makes the Neumann data a natural
  boundary term and keeps the system symmetric positive semidefinite.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from matplotlib.path import Path
from shapely.geometry import LineString, Polygon
from shapely.geometry import box as shapely_box

from .analytic import AnalyticRep
from .errors import ConvergenceError, IncompatibleDataError, ValidationError
from .geometry import BoundaryData, JordanCurve

_GAUSS = 1.0 / np.sqrt(3.0)


@dataclass(frozen=True)
class FourierNeumannSolution:
    """Series solution u(re^{i theta}) = -sum r^k (a_k cos + b_k sin)/k."""

    rep: AnalyticRep

    def u(self, z):
        return np.real(self.rep(z))

    def grad(self, z):
        return np.conj(self.rep.derivative()(z))


def fourier_neumann_disk(phi, mean_tol=1e-10):
    """Classical Neumann solution on the disk, normalized by u(0) = 0.

    Interior-normal convention: ``du/dn = -du/dr`` on ``|z| = 1``.
    Raises ``IncompatibleDataError`` for data with nonzero mean.
    """
    if not isinstance(phi, BoundaryData):
        phi = BoundaryData(phi=np.asarray(phi, dtype=float))
    samples = phi.effective_samples()
    scale = max(1.0, float(np.max(np.abs(samples))))
    a = np.fft.fft(samples) / len(samples)
    if abs(a[0].real) > mean_tol * scale:
        raise IncompatibleDataError(
            f"Neumann data must have zero mean for the classical solution; "
            f"got mean {a[0].real:.6g}"
        )
    k = len(samples) // 2
    c = np.zeros(k, dtype=complex)
    c[1:] = -2.0 * a[1:k] / np.arange(1, k)
    return FourierNeumannSolution(rep=AnalyticRep(c))


class FDGrid:
    """Cartesian cut-cell grid over the bounding box of a curve.

    Cells fully inside the domain use standard quadrature; cells cut by the
    boundary carry their clipped area, their quadrature points restricted to
    the domain, and their boundary-arc pieces (length + midpoint) for the
    natural Neumann term.
    """

    def __init__(self, curve: JordanCurve, n: int, margin: float = 0.02):
        self.curve = curve
        self.n = int(n)
        pts = np.column_stack([curve.z.real, curve.z.imag])
        self.poly = Polygon(pts)
        if not self.poly.is_valid:
            raise ValidationError("curve polygon is invalid for grid masking")
        self.path = Path(pts)
        x0, y0, x1, y1 = self.poly.bounds
        pad = margin * max(x1 - x0, y1 - y0)
        self.xlo, self.ylo = x0 - pad, y0 - pad
        side = max(x1 - x0, y1 - y0) + 2 * pad
        self.h = side / self.n
        self.nodes_x = self.xlo + self.h * np.arange(self.n + 1)
        self.nodes_y = self.ylo + self.h * np.arange(self.n + 1)

        CX, CY = np.meshgrid(self.nodes_x, self.nodes_y, indexing="ij")
        inside = self.path.contains_points(
            np.column_stack([CX.ravel(), CY.ravel()])
        ).reshape(self.n + 1, self.n + 1)
        self.node_inside = inside
        nin = (
            inside[:-1, :-1].astype(int)
            + inside[1:, :-1]
            + inside[:-1, 1:]
            + inside[1:, 1:]
        )
        self.full = nin == 4
        self.cut_cells = [tuple(ij) for ij in np.argwhere((nin > 0) & (nin < 4))]

        ring = LineString(np.vstack([pts, pts[:1]]))
        self.frac = np.zeros((self.n, self.n))
        self.frac[self.full] = 1.0
        self.arcs = {}  # (i, j) -> list of (length, midpoint complex)
        for i, j in self.cut_cells:
            cell = shapely_box(
                self.nodes_x[i], self.nodes_y[j],
                self.nodes_x[i + 1], self.nodes_y[j + 1],
            )
            inter = cell.intersection(self.poly)
            self.frac[i, j] = inter.area / self.h**2
            arc = cell.intersection(ring)
            pieces = []
            if not arc.is_empty:
                geoms = getattr(arc, "geoms", [arc])
                for g in geoms:
                    if g.length > 0:
                        m = g.interpolate(0.5, normalized=True)
                        pieces.append((g.length, complex(m.x, m.y)))
            if pieces:
                self.arcs[(i, j)] = pieces
        self.active = self.full | (self.frac > 1e-10)

    @property
    def n_cells(self):
        return int(np.count_nonzero(self.active))

    def node_index_map(self):
        """Global indices for nodes touching at least one active cell."""
        touched = np.zeros((self.n + 1, self.n + 1), dtype=bool)
        act = np.argwhere(self.active)
        for i, j in act:
            touched[i : i + 2, j : j + 2] = True
        idx = -np.ones((self.n + 1, self.n + 1), dtype=int)
        where = np.argwhere(touched)
        idx[where[:, 0], where[:, 1]] = np.arange(len(where))
        return idx, where


def _shape_values(xi, eta):
    return np.array([
        (1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta,
    ])


def _shape_gradients(xi, eta, h):
    dxi = np.array([-(1 - eta), (1 - eta), -eta, eta]) / h
    deta = np.array([-(1 - xi), -xi, (1 - xi), xi]) / h
    return dxi, deta


@dataclass(frozen=True)
class FDSolution:
    """Nodal solution of the cut-cell Neumann solve."""

    grid: FDGrid
    node_idx: np.ndarray
    values: np.ndarray
    algebraic_residual: float
    compatibility_defect: float

    def points(self):
        g = self.grid
        where = np.argwhere(self.node_idx >= 0)
        z = g.nodes_x[where[:, 0]] + 1j * g.nodes_y[where[:, 1]]
        return z, self.values[self.node_idx[where[:, 0], where[:, 1]]]

    def u(self, z):
        """Bilinear interpolation on the grid (nodes outside get nearest data)."""
        g = self.grid
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(len(z))
        for k, zk in enumerate(z):
            i = int(np.clip((zk.real - g.xlo) / g.h, 0, g.n - 1))
            j = int(np.clip((zk.imag - g.ylo) / g.h, 0, g.n - 1))
            xi = (zk.real - g.nodes_x[i]) / g.h
            eta = (zk.imag - g.nodes_y[j]) / g.h
            ids = [
                self.node_idx[i, j], self.node_idx[i + 1, j],
                self.node_idx[i, j + 1], self.node_idx[i + 1, j + 1],
            ]
            if min(ids) < 0:
                raise ValidationError(f"point {zk} outside the solved region")
            vals = self.values[ids]
            out[k] = float(np.dot(_shape_values(xi, eta), vals))
        return out if len(out) > 1 else float(out[0])


def _coefficient_pair(A):
    if hasattr(A, "a12"):
        if np.max(np.abs(A.a12)) > 1e-12:
            raise ValidationError("FD oracle supports diagonal coefficient fields only")
        return A.evaluator("a11"), A.evaluator("a22")
    a11, a22 = A
    if not callable(a11):
        c1, c2 = float(a11), float(a22)
        return (lambda z: c1 + 0.0 * np.real(z)), (lambda z: c2 + 0.0 * np.real(z))
    return a11, a22


def fd_solve_neumann(A, grid, phi, tol=1e-10, max_iter_factor=50):
    """Weak-form solve of div(A grad u) = 0 with conormal Neumann data.

    ``A`` is a diagonal MatrixFieldA or a pair (a11, a22) of callables or
    constants; ``phi`` supplies ``<A grad u, n_interior>`` at the curve
    parameters of ``grid.curve``.  The compatibility defect of the data is
    projected out (and reported); the constant mode is fixed by zero mean.
    Conjugate gradients with diagonal preconditioning, relative tolerance
    ``tol``.
    """
    curve = grid.curve
    a11, a22 = _coefficient_pair(A)
    if not isinstance(phi, BoundaryData):
        phi = BoundaryData(phi=np.asarray(phi, dtype=float))
    if phi.size != curve.size:
        raise ValidationError("boundary data must be sampled on the grid's curve")
    data = phi.effective_samples()

    node_idx, node_where = grid.node_index_map()
    n_nodes = len(node_where)
    h = grid.h
    rows, cols, vals = [], [], []
    b = np.zeros(n_nodes)

    gauss = [(0.5 - 0.5 * _GAUSS, 0.5 - 0.5 * _GAUSS),
             (0.5 + 0.5 * _GAUSS, 0.5 - 0.5 * _GAUSS),
             (0.5 - 0.5 * _GAUSS, 0.5 + 0.5 * _GAUSS),
             (0.5 + 0.5 * _GAUSS, 0.5 + 0.5 * _GAUSS)]

    def cell_nodes(i, j):
        return [node_idx[i, j], node_idx[i + 1, j],
                node_idx[i, j + 1], node_idx[i + 1, j + 1]]

    def clipped_quadrature(i, j, x0, y0):
        """Edge-midpoint rule on a fan triangulation of cell & domain (exact
        for quadratics, hence for the Q1 stiffness with constant A)."""
        cell = shapely_box(x0, y0, x0 + h, y0 + h)
        inter = cell.intersection(grid.poly)
        polys = getattr(inter, "geoms", [inter])
        qpts = []
        for p in polys:
            if p.is_empty or p.area == 0:
                continue
            verts = np.asarray(p.exterior.coords)[:-1]
            c = np.asarray(p.centroid.coords)[0]
            for a in range(len(verts)):
                v1, v2 = verts[a], verts[(a + 1) % len(verts)]
                area = 0.5 * abs(
                    (v1[0] - c[0]) * (v2[1] - c[1]) - (v2[0] - c[0]) * (v1[1] - c[1])
                )
                if area == 0:
                    continue
                for m1, m2 in ((c, v1), (v1, v2), (v2, c)):
                    mx, my = 0.5 * (m1[0] + m2[0]), 0.5 * (m1[1] + m2[1])
                    qpts.append((mx, my, (mx - x0) / h, (my - y0) / h, area / 3.0))
        return qpts

    for i, j in np.argwhere(grid.active):
        x0, y0 = grid.nodes_x[i], grid.nodes_y[j]
        loc = cell_nodes(i, j)
        if grid.full[i, j]:
            qpts = [(x0 + xi * h, y0 + eta * h, xi, eta, h * h / 4.0)
                    for xi, eta in gauss]
        else:
            qpts = clipped_quadrature(i, j, x0, y0)
        K = np.zeros((4, 4))
        for px, py, xi, eta, w in qpts:
            zq = complex(px, py)
            dxi, deta = _shape_gradients(xi, eta, h)
            K += w * (float(a11(zq)) * np.outer(dxi, dxi)
                      + float(a22(zq)) * np.outer(deta, deta))
        for a in range(4):
            for c in range(4):
                if K[a, c] != 0.0:
                    rows.append(loc[a])
                    cols.append(loc[c])
                    vals.append(K[a, c])

    def data_at(point):
        """Boundary value at an off-sample point: project onto the nearest
        polyline segment and interpolate (removes the nearest-sample
        staircase, which would dominate the grid error)."""
        k = int(np.argmin(np.abs(curve.z - point)))
        best = data[k]
        bd = abs(curve.z[k] - point)
        m = curve.size
        for k0 in ((k - 1) % m, k):
            z1, z2 = curve.z[k0], curve.z[(k0 + 1) % m]
            seg = z2 - z1
            s = np.clip(((point - z1) * np.conj(seg)).real / abs(seg) ** 2, 0.0, 1.0)
            d = abs(z1 + s * seg - point)
            if d < bd:
                bd = d
                best = (1.0 - s) * data[k0] + s * data[(k0 + 1) % m]
        return best

    # natural boundary term: integral of the conormal data over arc pieces;
    # the weak form carries the outward normal, the data the interior one
    arc_nodes = []
    arc_weights = []
    for (i, j), pieces in grid.arcs.items():
        loc = cell_nodes(i, j)
        x0, y0 = grid.nodes_x[i], grid.nodes_y[j]
        for length, mid in pieces:
            shp = _shape_values((mid.real - x0) / h, (mid.imag - y0) / h)
            contrib = -data_at(mid) * length * shp
            for a in range(4):
                b[loc[a]] += contrib[a]
            arc_nodes.append(loc)
            arc_weights.append(length * shp)

    # project out the compatibility defect, distributed over the arc weights
    defect = float(np.sum(b))
    wvec = np.zeros(n_nodes)
    for loc, w in zip(arc_nodes, arc_weights):
        for a in range(4):
            wvec[loc[a]] += w[a]
    total_arc = float(np.sum(wvec))
    if total_arc > 0:
        b -= defect * wvec / total_arc

    M = sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))
    dinv = 1.0 / np.maximum(M.diagonal(), 1e-300)
    precond = spla.LinearOperator(M.shape, matvec=lambda x: dinv * x)
    u, info = spla.cg(M, b, rtol=tol, atol=0.0,
                      maxiter=max_iter_factor * n_nodes, M=precond)
    if info != 0:
        raise ConvergenceError(f"Neumann FD solve did not converge (info={info})")
    u -= np.mean(u)
    scale = float(np.linalg.norm(b)) or 1.0
    res = float(np.linalg.norm(M @ u - b)) / scale
    return FDSolution(
        grid=grid, node_idx=node_idx, values=u,
        algebraic_residual=res,
        compatibility_defect=abs(defect) / max(total_arc, 1e-300),
    )


@dataclass(frozen=True)
class LaplacianReport:
    max_abs: float
    mean_abs: float
    step: float


def laplacian_residual(u_eval, radius=0.9, n=33):
    """Five-point discrete-Laplacian statistics on a square grid in the disk."""
    xs = np.linspace(-radius, radius, n)
    h = xs[1] - xs[0]
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    Z = X + 1j * Y
    # statistics over a resolution-independent subregion (so refinement
    # studies measure the stencil error, not region growth); stencils stay
    # inside |z| <= radius, corners of the square may be out of domain
    keep = np.abs(Z) <= 0.85 * radius
    inside = np.abs(Z) <= radius
    U = np.full(Z.shape, np.nan)
    U[inside] = np.asarray(u_eval(Z[inside]))
    lap = np.full_like(U, np.nan)
    lap[1:-1, 1:-1] = (
        U[2:, 1:-1] + U[:-2, 1:-1] + U[1:-1, 2:] + U[1:-1, :-2] - 4 * U[1:-1, 1:-1]
    ) / h**2
    vals = np.abs(lap[keep & ~np.isnan(lap)])
    return LaplacianReport(
        max_abs=float(np.max(vals)), mean_abs=float(np.mean(vals)), step=float(h)
    )
