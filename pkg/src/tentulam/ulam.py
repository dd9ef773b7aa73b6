"""Ulam discretization of the transfer operator.

Cells are squares of a uniform grid clipped to the domain.  Every matrix
entry is an exact polygon area, so at the measure-preserving parameter the
uniform density is an exact fixed point up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .geometry import Polygon, apply_affine, area, clip_area, clip_convex, rectangle
from .maps import OMEGA, PiecewiseAffineMap

STEP_TOL = 1e-12
RESIDUAL_TOL = 1e-10
MAX_ITER = 100_000


class PartitionError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class UlamPartition:
    cells: tuple[Polygon, ...]
    areas: np.ndarray
    adjacency: tuple[tuple[int, int, float], ...]
    # 0: neighbours across a vertical grid line, 1: across a horizontal one
    adjacency_axis: np.ndarray
    resolution: int
    boundary_lengths: np.ndarray
    omega: Polygon
    origin: tuple[float, float]
    side: float
    n_rows: int
    square_of_cell: tuple[tuple[int, int], ...]
    cell_of_square: dict = field(repr=False)
    centroids: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.cells)

    def locate(self, p: Sequence[float]) -> int:
        """Index of the cell containing ``p``; nearest cell if it falls in a gap."""
        x, y = p[0], p[1]
        col = int(math.floor((x - self.origin[0]) / self.side))
        row = int(math.floor((y - self.origin[1]) / self.side))
        col = min(max(col, 0), self.resolution - 1)
        row = min(max(row, 0), self.n_rows - 1)
        k = self.cell_of_square.get((row, col))
        if k is not None and self.cells[k].contains(p, 1e-12):
            return k
        best, best_d = -1, math.inf
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                j = self.cell_of_square.get((row + dr, col + dc))
                if j is None:
                    continue
                if self.cells[j].contains(p, 1e-12):
                    return j
                d = (self.centroids[j, 0] - x) ** 2 + (self.centroids[j, 1] - y) ** 2
                if d < best_d:
                    best, best_d = j, d
        if best < 0:
            d = (self.centroids[:, 0] - x) ** 2 + (self.centroids[:, 1] - y) ** 2
            best = int(np.argmin(d))
        return best

    def cells_in_box(self, xmin: float, ymin: float, xmax: float, ymax: float) -> list[int]:
        c0 = max(int(math.floor((xmin - self.origin[0]) / self.side)), 0)
        c1 = min(int(math.floor((xmax - self.origin[0]) / self.side)), self.resolution - 1)
        r0 = max(int(math.floor((ymin - self.origin[1]) / self.side)), 0)
        r1 = min(int(math.floor((ymax - self.origin[1]) / self.side)), self.n_rows - 1)
        out = []
        for r in range(r0, r1 + 1):
            for c in range(c0, c1 + 1):
                k = self.cell_of_square.get((r, c))
                if k is not None:
                    out.append(k)
        return out


def build_partition(n: int, omega: Polygon = OMEGA) -> UlamPartition:
    """Grid of ``n`` columns of squares over the bounding box of ``omega``.

    For the tent domain the squares have side ``2/n`` and ``n`` must be even
    so that the apex (1, 1) sits on a grid node.
    """
    if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
        raise PartitionError(f"grid resolution must be an even integer >= 2, got {n!r}")
    n = int(n)
    xmin, ymin, xmax, ymax = omega.bbox()
    side = (xmax - xmin) / n
    n_rows = int(math.ceil((ymax - ymin) / side - 1e-9))
    cells: list[Polygon] = []
    squares: list[tuple[int, int]] = []
    for r in range(n_rows):
        for c in range(n):
            sq = rectangle(xmin + c * side, ymin + r * side, xmin + (c + 1) * side, ymin + (r + 1) * side)
            cell = clip_convex(sq, omega)
            if not cell.is_empty:
                cells.append(cell)
                squares.append((r, c))
    lookup = {sq: k for k, sq in enumerate(squares)}
    areas = np.array([area(c) for c in cells])

    adjacency = []
    axis = []
    shared = np.zeros(len(cells))
    for k, (r, c) in enumerate(squares):
        for ax, nb in ((0, (r, c + 1)), (1, (r + 1, c))):
            j = lookup.get(nb)
            if j is None:
                continue
            length = _grid_edge_overlap(cells[k], cells[j], ax, xmin + (c + 1) * side, ymin + (r + 1) * side)
            if length > 0:
                adjacency.append((k, j, length))
                axis.append(ax)
                shared[k] += length
                shared[j] += length
    # cells tile omega, so whatever boundary is not shared lies on its boundary
    perims = np.array([c.perimeter() for c in cells])
    boundary = perims - shared
    boundary[np.abs(boundary) < 1e-12] = 0.0
    centroids = np.array([c.centroid() for c in cells])
    return UlamPartition(
        cells=tuple(cells),
        areas=areas,
        adjacency=tuple(adjacency),
        adjacency_axis=np.array(axis, dtype=np.int8),
        resolution=n,
        boundary_lengths=boundary,
        omega=omega,
        origin=(xmin, ymin),
        side=side,
        n_rows=n_rows,
        square_of_cell=tuple(squares),
        cell_of_square=lookup,
        centroids=centroids,
    )


def _grid_edge_overlap(a: Polygon, b: Polygon, axis: int, xline: float, yline: float) -> float:
    # overlap of the parts of both boundaries lying on the shared grid line
    def span(p: Polygon) -> tuple[float, float] | None:
        k = 1 if axis == 0 else 0
        line = xline if axis == 0 else yline
        coords = [v[k] for v in p.vertices if abs(v[1 - k] - line) <= 1e-12]
        if len(coords) < 2:
            return None
        return min(coords), max(coords)

    sa, sb = span(a), span(b)
    if sa is None or sb is None:
        return 0.0
    length = min(sa[1], sb[1]) - max(sa[0], sb[0])
    return length if length > 1e-12 else 0.0


@dataclass
class TransferMatrix:
    """Row-stochastic Ulam matrix ``P[i, j] = m(Q_i & phi^-1 Q_j) / m(Q_i)``."""

    matrix: sp.csr_matrix
    t_param: Optional[float]
    _density_op: Optional[sp.csr_matrix] = field(default=None, repr=False)

    @property
    def rows(self) -> list[list[tuple[int, float]]]:
        m = self.matrix
        return [
            list(zip(m.indices[m.indptr[i]:m.indptr[i + 1]].tolist(), m.data[m.indptr[i]:m.indptr[i + 1]].tolist()))
            for i in range(m.shape[0])
        ]

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def density_operator(self, areas: np.ndarray) -> sp.csr_matrix:
        # f -> (P^T (f a)) / a, the action on piecewise-constant densities
        if self._density_op is None:
            a = sp.diags(areas)
            ainv = sp.diags(1.0 / areas)
            op = (ainv @ self.matrix.T @ a).tocsr()
            op.sort_indices()
            self._density_op = op
        return self._density_op

    def to_json(self) -> dict:
        return {"t": self.t_param, "rows": [[[j, w] for j, w in row] for row in self.rows]}


def transfer_matrix(m: PiecewiseAffineMap, part: UlamPartition) -> TransferMatrix:
    """Assemble the Ulam matrix by exact clipping.

    The forward image of each cell piece is intersected with the target
    cells; dividing by the branch Jacobian gives the preimage areas.
    """
    n = len(part)
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for i, cell in enumerate(part.cells):
        acc: dict[int, float] = {}
        a_i = part.areas[i]
        for b in m.branches:
            piece = clip_convex(cell, b.domain)
            if piece.is_empty:
                continue
            img = apply_affine(b.forward, piece)
            scale = 1.0 / (b.jacobian * a_i)
            for j in part.cells_in_box(*img.bbox()):
                w = clip_area(img, part.cells[j])
                if w > 0.0:
                    acc[j] = acc.get(j, 0.0) + w * scale
        for j in sorted(acc):
            indices.append(j)
            data.append(acc[j])
        indptr.append(len(indices))
    mat = sp.csr_matrix((np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)), shape=(n, n))
    return TransferMatrix(mat, m.t)


@dataclass(frozen=True)
class DensityVector:
    values: np.ndarray
    iterations: int = 0
    residual: float = 0.0

    def mass(self, part: UlamPartition) -> float:
        return float(np.dot(self.values, part.areas))


def apply_transfer(P: TransferMatrix, part: UlamPartition, f, allow_signed: bool = False) -> np.ndarray:
    """Push a piecewise-constant function forward one step."""
    f = np.asarray(getattr(f, "values", f), dtype=float)
    if f.shape != (len(part),):
        raise ValueError(f"expected {len(part)} cell values, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("cell values must be finite")
    if not allow_signed and np.any(f < 0):
        raise ValueError("negative values need allow_signed=True")
    return P.density_operator(part.areas) @ f


def l1_norm(f: np.ndarray, part: UlamPartition) -> float:
    return float(np.dot(np.abs(f), part.areas))


def stationary_density(
    P: TransferMatrix,
    part: UlamPartition,
    step_tol: float = STEP_TOL,
    max_iter: int = MAX_ITER,
    residual_tol: float = RESIDUAL_TOL,
) -> DensityVector:
    """Power iteration from the uniform density, renormalized every step."""
    op = P.density_operator(part.areas)
    a = part.areas
    f = np.ones(len(part))
    f /= np.dot(f, a)
    step = math.inf
    for k in range(1, max_iter + 1):
        g = op @ f
        g /= np.dot(g, a)
        step = float(np.dot(np.abs(g - f), a))
        f = g
        if step < step_tol:
            break
    else:
        k = max_iter
    residual = float(np.dot(np.abs(op @ f - f), a))
    if step >= step_tol or residual > residual_tol:
        raise ConvergenceError(
            f"power iteration did not converge after {k} iterations (residual {residual:.3e})", residual, k
        )
    return DensityVector(f, iterations=k, residual=residual)


def quadrature_points(part: UlamPartition, i: int, per_side: int = 4) -> list[tuple[float, float]]:
    """Midpoints of a ``per_side`` x ``per_side`` subgrid of the cell's square lying in the cell."""
    r, c = part.square_of_cell[i]
    x0 = part.origin[0] + c * part.side
    y0 = part.origin[1] + r * part.side
    h = part.side / per_side
    cell = part.cells[i]
    pts = []
    for ky in range(per_side):
        for kx in range(per_side):
            p = (x0 + (kx + 0.5) * h, y0 + (ky + 0.5) * h)
            if cell.contains(p, 0.0):
                pts.append(p)
    if not pts:
        pts.append(tuple(part.centroids[i]))
    return pts


def duality_check(
    m: PiecewiseAffineMap,
    part: UlamPartition,
    f,
    g,
    P: Optional[TransferMatrix] = None,
    per_side: int = 4,
) -> float:
    """``|int f L g dm - int (f o phi) g dm|`` with midpoint quadrature on the right."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if P is None:
        P = transfer_matrix(m, part)
    lhs = float(np.dot(f * apply_transfer(P, part, g, allow_signed=True), part.areas))
    rhs = 0.0
    for i in range(len(part)):
        if g[i] == 0.0:
            continue
        pts = quadrature_points(part, i, per_side)
        s = 0.0
        for p in pts:
            k = m.branch_index(p)
            s += f[part.locate(m.branches[k].forward(p))]
        rhs += g[i] * part.areas[i] * s / len(pts)
    return abs(lhs - rhs)
