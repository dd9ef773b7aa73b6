"""Variation of piecewise-constant functions and the inequalities built on it.

A grid function is a vector of cell values on an :class:`UlamPartition`.
Its variation has an interior part (jumps across shared cell edges) and a
boundary trace on the outer boundary of the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import Polygon, clip_area
from .maps import ComparisonMap, tent_family
from .ulam import TransferMatrix, UlamPartition, apply_transfer, l1_norm, transfer_matrix


class DegenerateRatio(ValueError):
    """Zero denominator in a ratio that is only defined for non-trivial input."""


def _jumps(f: np.ndarray, part: UlamPartition):
    adj = np.asarray(part.adjacency, dtype=float).reshape(-1, 3)
    i = adj[:, 0].astype(np.int64)
    j = adj[:, 1].astype(np.int64)
    return i, j, np.abs(f[i] - f[j]) * adj[:, 2]


def discrete_variation(f, part: UlamPartition, isotropic: bool = True) -> float:
    """Variation of a cell-constant function, interior jumps plus boundary trace.

    With ``isotropic=False`` this is the exact variation of the
    piecewise-constant function, ``sum |f_i - f_j| * edge``.  That value is
    anisotropic: a staircase approximating a curve keeps the length of the
    staircase, not of the curve.  The default splits every jump evenly
    between its two cells, collects horizontal and vertical contributions
    per cell and combines them in the Euclidean norm.  Straight axis-aligned
    interfaces and boundary traces are unchanged; staircases converge to the
    length of the curve they resolve.
    """
    f = np.asarray(getattr(f, "values", f), dtype=float)
    i, j, w = _jumps(f, part)
    trace = float(np.dot(np.abs(f), part.boundary_lengths))
    if not isotropic:
        return float(w.sum()) + trace
    n = len(part)
    axis = part.adjacency_axis
    dx = np.zeros(n)
    dy = np.zeros(n)
    half = 0.5 * w
    hx = axis == 0
    np.add.at(dx, i[hx], half[hx])
    np.add.at(dx, j[hx], half[hx])
    np.add.at(dy, i[~hx], half[~hx])
    np.add.at(dy, j[~hx], half[~hx])
    return float(np.hypot(dx, dy).sum()) + trace


def bv_norm(f, part: UlamPartition, isotropic: bool = True) -> float:
    f = np.asarray(getattr(f, "values", f), dtype=float)
    return l1_norm(f, part) + discrete_variation(f, part, isotropic)


@dataclass(frozen=True)
class AVRatio:
    ratio: float
    numerator: float
    denominator: float
    degenerate: bool


def comparison_lookup(psi: ComparisonMap, part: UlamPartition) -> tuple[np.ndarray, np.ndarray]:
    """Cells with centroid in ``K`` and the cells holding their images under ``psi``."""
    src, dst = [], []
    for k in range(len(part)):
        c = part.centroids[k]
        if psi.k_set.contains(c, 1e-12):
            src.append(k)
            dst.append(part.locate(psi.psi(c)))
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def lemma_av_ratio(f, psi: ComparisonMap, part: UlamPartition, lookup=None) -> AVRatio:
    """``int_K |f o psi - f| dm / (||psi - id||_0 V(f))`` by centroid lookup.

    Cells whose centroid lies in ``K`` contribute; ``f o psi`` is read from
    the cell containing the image of the centroid.  A vanishing denominator
    gives a degenerate result whose ratio is 0 when the numerator is 0 too.
    Pass ``lookup=comparison_lookup(psi, part)`` to reuse it across functions.
    """
    f = np.asarray(getattr(f, "values", f), dtype=float)
    src, dst = comparison_lookup(psi, part) if lookup is None else lookup
    num = float(np.dot(np.abs(f[dst] - f[src]), part.areas[src]))
    den = psi.sup_deviation * discrete_variation(f, part)
    if den <= 0.0:
        if num > 0.0:
            raise DegenerateRatio("zero denominator with a non-zero numerator")
        return AVRatio(0.0, num, den, True)
    return AVRatio(num / den, num, den, False)


def sobolev_ratio(f, part: UlamPartition) -> float:
    """``||f||_2 / V(f)``, the planar Sobolev quotient (p = 2 in dimension 2)."""
    f = np.asarray(getattr(f, "values", f), dtype=float)
    v = discrete_variation(f, part)
    if v <= 0.0:
        raise DegenerateRatio("sobolev ratio of a function with zero variation")
    return math.sqrt(float(np.dot(f * f, part.areas))) / v


# -- seeded test functions ---------------------------------------------------

@dataclass
class TestSuite:
    seed: int
    functions: list[np.ndarray]
    descriptors: list[dict] = field(default_factory=list)

    __test__ = False  # not a pytest class

    def __len__(self) -> int:
        return len(self.functions)


def polygon_indicator(part: UlamPartition, poly: Polygon) -> np.ndarray:
    """Cell averages of the indicator of ``poly``."""
    out = np.zeros(len(part))
    for k in part.cells_in_box(*poly.bbox()):
        out[k] = clip_area(part.cells[k], poly) / part.areas[k]
    return out


def disk_indicator(part: UlamPartition, center, radius: float) -> np.ndarray:
    """1 on cells whose centroid lies in the closed disk, else 0."""
    d = np.hypot(part.centroids[:, 0] - center[0], part.centroids[:, 1] - center[1])
    return (d <= radius).astype(float)


def _random_convex(rng: np.random.Generator, part: UlamPartition) -> tuple[Polygon, dict]:
    omega = part.omega
    xmin, ymin, xmax, ymax = omega.bbox()
    while True:
        c = (rng.uniform(xmin, xmax), rng.uniform(ymin, ymax))
        if omega.contains(c, 0.0):
            break
    r = rng.uniform(0.05, 0.3)
    k = int(rng.integers(3, 9))
    ang = np.sort(rng.uniform(0.0, 2 * math.pi, size=k))
    verts = [(c[0] + r * math.cos(a), c[1] + r * math.sin(a)) for a in ang]
    return Polygon(verts), {"kind": "indicator", "center": list(c), "radius": r, "vertices": k}


def build_suite(
    part: UlamPartition,
    seed: int = 42,
    n_indicators: int = 8,
    n_trig: int = 6,
    n_blocky: int = 6,
    max_frequency: int = 6,
) -> TestSuite:
    """Deterministic mix of indicators, trigonometric polynomials and block noise."""
    rng = np.random.default_rng(seed)
    funcs, desc = [], []
    while len(funcs) < n_indicators:
        poly, d = _random_convex(rng, part)
        f = polygon_indicator(part, poly)
        if f.any():
            funcs.append(f)
            desc.append(d)
    x, y = part.centroids[:, 0], part.centroids[:, 1]
    for _ in range(n_trig):
        terms = int(rng.integers(1, 5))
        f = np.zeros(len(part))
        spec = []
        for _ in range(terms):
            k1, k2 = (int(v) for v in rng.integers(0, max_frequency + 1, size=2))
            amp, phase = float(rng.normal()), float(rng.uniform(0, 2 * math.pi))
            f += amp * np.cos(math.pi * (k1 * x + k2 * y) + phase)
            spec.append({"k": [k1, k2], "amplitude": amp, "phase": phase})
        funcs.append(f)
        desc.append({"kind": "trig", "terms": spec})
    for _ in range(n_blocky):
        block = int(rng.integers(2, 9))
        cols = -(-part.resolution // block)
        rows = -(-part.n_rows // block)
        vals = rng.uniform(-1.0, 1.0, size=(rows, cols))
        sq = np.array(part.square_of_cell)
        funcs.append(vals[sq[:, 0] // block, sq[:, 1] // block].copy())
        desc.append({"kind": "blocks", "block": block})
    for f in funcs:
        if discrete_variation(f, part) <= 0.0:
            raise DegenerateRatio("suite function with zero variation")
    return TestSuite(seed, funcs, desc)


# -- Lasota-Yorke ------------------------------------------------------------

@dataclass(frozen=True)
class LYReport:
    theta_hat: float
    m_hat: float
    ell: int
    samples: list[tuple[float, float, float]]
    t: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "theta_hat": self.theta_hat,
            "m_hat": self.m_hat,
            "ell": self.ell,
            "t": self.t,
            "samples": [{"v_f": v, "l1_f": l, "v_lf": w} for v, l, w in self.samples],
        }


def fit_ly(samples, tie_tol: float = 1e-12) -> tuple[float, float]:
    """Least-squares ``w ~ theta v + M l`` over the region where every sample holds.

    The feasible set ``{theta, M >= 0 : theta v_k + M l_k >= w_k}`` is a
    convex polygon in the plane, so the constrained minimizer is the free
    minimizer, a minimizer restricted to one boundary line, or a vertex.
    All candidates are enumerated; ties go to the smallest ``theta``.
    """
    s = np.asarray(samples, dtype=float).reshape(-1, 3)
    if len(s) == 0:
        raise ValueError("no samples")
    X = s[:, :2]
    w = s[:, 2]
    # constraints a . (theta, M) >= b, including positivity
    cons_a = np.vstack([X, [[1.0, 0.0], [0.0, 1.0]]])
    cons_b = np.concatenate([w, [0.0, 0.0]])
    scale = np.maximum(np.abs(cons_a).max(axis=1), 1e-300)

    def feasible(p):
        slack = cons_a @ p - cons_b
        return bool(np.all(slack >= -1e-10 * np.maximum(np.abs(cons_b), scale)))

    def objective(p):
        r = X @ p - w
        return float(r @ r)

    cands = []
    free = np.linalg.lstsq(X, w, rcond=None)[0]
    cands.append(free)
    for a, b in zip(cons_a, cons_b):
        # minimize |X p - w|^2 on the line a . p = b
        nrm = a @ a
        if nrm == 0.0:
            continue
        p0 = a * b / nrm
        d = np.array([-a[1], a[0]])
        Xd = X @ d
        den = Xd @ Xd
        lam = 0.0 if den == 0.0 else -(Xd @ (X @ p0 - w)) / den
        cands.append(p0 + lam * d)
    for k in range(len(cons_a)):
        for m in range(k + 1, len(cons_a)):
            A = np.vstack([cons_a[k], cons_a[m]])
            if abs(np.linalg.det(A)) < 1e-14 * (np.abs(A).max() ** 2):
                continue
            cands.append(np.linalg.solve(A, [cons_b[k], cons_b[m]]))
    best = None
    for p in cands:
        p = np.maximum(p, 0.0)
        if not feasible(p):
            continue
        val = objective(p)
        if best is None:
            best = (val, p)
            continue
        tol = tie_tol * max(1.0, abs(best[0]))
        if val < best[0] - tol or (abs(val - best[0]) <= tol and p[0] < best[1][0]):
            best = (val, p)
    if best is None:
        # M alone always works: theta = 0, M = max w / l
        with np.errstate(divide="ignore"):
            m = float(np.max(np.where(X[:, 1] > 0, w / X[:, 1], np.inf)))
        return 0.0, m
    return float(best[1][0]), float(best[1][1])


def ly_samples(P: TransferMatrix, part: UlamPartition, suite: TestSuite, ell: int) -> list[tuple[float, float, float]]:
    out = []
    for f in suite.functions:
        g = f
        for _ in range(ell):
            g = apply_transfer(P, part, g, allow_signed=True)
        out.append((discrete_variation(f, part), l1_norm(f, part), discrete_variation(g, part)))
    return out


def ly_check(
    t: float,
    part: UlamPartition,
    suite: TestSuite,
    ell: int = 6,
    P: Optional[TransferMatrix] = None,
) -> LYReport:
    """Fit ``V(L^ell f) <= theta V(f) + M ||f||_1`` over the suite at parameter ``t``."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not len(suite):
        raise ValueError("empty test suite")
    if P is None:
        P = transfer_matrix(tent_family(t), part)
    samples = ly_samples(P, part, suite, ell)
    theta, m = fit_ly(samples)
    return LYReport(theta, m, ell, samples, t)
