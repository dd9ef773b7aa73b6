"""Parameter sweeps over the tent family and the estimates checked along them."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .bv import TestSuite, bv_norm
from .geometry import area, clip_area
from .maps import (
    TAU,
    MapError,
    PiecewiseAffineMap,
    check_tent_param,
    comparison_map,
    eval_map,
    jacobian_ratio_deviation,
    tent_family,
)
from .ulam import (
    ConvergenceError,
    DensityVector,
    TransferMatrix,
    UlamPartition,
    apply_transfer,
    build_partition,
    l1_norm,
    stationary_density,
    transfer_matrix,
)

WORKERS_ENV = "TENTULAM_WORKERS"
NOISE_FLOOR = 1e-3


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def tent_grid(steps: int, t_min: float = TAU, t_max: float = 1.0) -> list[float]:
    if steps < 2:
        raise ValueError("a sweep needs at least 2 steps")
    t_min, t_max = check_tent_param(t_min), check_tent_param(t_max)
    if not t_min < t_max:
        raise ValueError("t_min must be below t_max")
    grid = np.linspace(t_min, t_max, steps).tolist()
    grid[0], grid[-1] = t_min, t_max
    return grid


class SweepError(RuntimeError):
    def __init__(self, t: float, cause: ConvergenceError):
        super().__init__(f"t = {t!r}: {cause}")
        self.t = t
        self.cause = cause


@dataclass
class SweepResult:
    t_values: list[float]
    densities: list[DensityVector]
    entropies_lebesgue: list[float]
    entropies_measure: list[float]
    resolution: int
    pairwise: list[tuple[float, float, float]]
    partition: UlamPartition = field(repr=False)
    matrices: list[TransferMatrix] = field(repr=False, default_factory=list)

    @property
    def entropies(self) -> list[float]:
        return self.entropies_lebesgue

    def pair_gaps(self) -> list[tuple[float, float]]:
        return [(t - s, d) for t, s, d in self.pairwise]


@lru_cache(maxsize=4)
def _partition(n: int) -> UlamPartition:
    return build_partition(n)


def _pipeline(t: float, n: int) -> tuple[float, TransferMatrix, DensityVector]:
    part = _partition(n)
    P = transfer_matrix(tent_family(t), part)
    try:
        rho = stationary_density(P, part)
    except ConvergenceError as exc:
        raise SweepError(t, exc) from exc
    return t, P, rho


def sweep(t_grid: Sequence[float], n: int = 128, workers: Optional[int] = None) -> SweepResult:
    """Density and entropy at every ``t`` plus all pairwise L1 distances.

    Per-parameter pipelines are independent; with ``workers > 1`` they run
    in separate processes and are collected in grid order.
    """
    t_grid = [check_tent_param(t) for t in t_grid]
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t grid must be strictly increasing")
    part = _partition(n)
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(t_grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_pipeline, t_grid, [n] * len(t_grid)))
    else:
        results = [_pipeline(t, n) for t in t_grid]
    matrices = [r[1] for r in results]
    densities = [r[2] for r in results]
    ent = [entropy(t, rho, part) for t, rho in zip(t_grid, densities)]
    pairs = []
    for a in range(len(t_grid)):
        for b in range(a):
            pairs.append((t_grid[a], t_grid[b], l1_distance(densities[a], densities[b], part)))
    return SweepResult(
        t_values=list(t_grid),
        densities=densities,
        entropies_lebesgue=[e[0] for e in ent],
        entropies_measure=[e[1] for e in ent],
        resolution=n,
        pairwise=pairs,
        partition=part,
        matrices=matrices,
    )


def l1_distance(a, b, part: UlamPartition) -> float:
    a = np.asarray(getattr(a, "values", a), dtype=float)
    b = np.asarray(getattr(b, "values", b), dtype=float)
    if a.shape != b.shape or a.shape != (len(part),):
        raise ValueError(f"length mismatch: {a.shape}, {b.shape}, partition of {len(part)} cells")
    return float(np.dot(np.abs(a - b), part.areas))


# -- Hoelder fit -------------------------------------------------------------

class FitError(ValueError):
    pass


@dataclass(frozen=True)
class HolderFit:
    c_hat: float
    eta_hat: float
    r_squared: float
    pairs_used: int
    min_distance: float
    slack: float

    def to_json(self) -> dict:
        return {
            "c_hat": self.c_hat,
            "eta_hat": self.eta_hat,
            "r_squared": self.r_squared,
            "pairs_used": self.pairs_used,
            "min_distance": self.min_distance,
            "slack": self.slack,
        }


def holder_fit(pairs: Sequence[tuple[float, float]], min_distance: float = NOISE_FLOOR) -> HolderFit:
    """Least-squares line through ``(log gap, log distance)``.

    Pairs with distance at or below ``min_distance`` are dropped.  ``slack``
    is how far the worst retained pair sits above the fitted curve, as a
    fraction of it.
    """
    used = [(g, d) for g, d in pairs if g > 0 and d > min_distance]
    if len(used) < 3:
        raise FitError(f"need at least 3 pairs above the noise floor, have {len(used)}")
    x = np.log([g for g, _ in used])
    y = np.log([d for _, d in used])
    if np.ptp(x) == 0.0:
        raise FitError("all gaps are equal")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    slack = float(np.exp(resid.max()) - 1.0)
    return HolderFit(float(math.exp(intercept)), float(slope), r2, len(used), min_distance, slack)


# -- entropy -----------------------------------------------------------------

def entropy_of_map(m: PiecewiseAffineMap, rho, part: UlamPartition) -> tuple[float, float]:
    """``int log J dm`` and ``int log J dmu`` with ``J`` read at cell centroids."""
    rho = np.asarray(getattr(rho, "values", rho), dtype=float)
    logj = np.empty(len(part))
    for k, c in enumerate(part.centroids):
        jac = m.jacobian_at(c)
        if not jac > 0:
            raise MapError(f"non-positive Jacobian at {tuple(c)}")
        logj[k] = math.log(jac)
    w = logj * part.areas
    return float(w.sum()), float(np.dot(w, rho))


def entropy(t: float, rho, part: UlamPartition) -> tuple[float, float]:
    return entropy_of_map(tent_family(t), rho, part)


def birkhoff_entropy_of_map(m: PiecewiseAffineMap, orbits: int, length: int, seed: int, transient: int = 100) -> float:
    """Time average of ``log J`` along seeded orbits started uniformly in the domain."""
    if orbits < 1 or length < 1:
        raise ValueError("orbits and length must be >= 1")
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = m.omega.bbox()
    total = 0.0
    for _ in range(orbits):
        while True:
            x = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
            if m.omega.contains(x, 0.0):
                break
        for _ in range(transient):
            x, _ = eval_map(m, x)
        s = 0.0
        for _ in range(length):
            k = m.branch_index(x)
            s += math.log(m.branches[k].jacobian)
            x = m.branches[k].forward(x)
        total += s / length
    return total / orbits


def birkhoff_entropy(t: float, orbits: int = 1, length: int = 1000, seed: int = 42) -> float:
    return birkhoff_entropy_of_map(tent_family(t), orbits, length, seed)


# -- closed-form bounds for the tent family -----------------------------------

@dataclass(frozen=True)
class BoundItem:
    name: str
    computed: float
    paper_bound: float
    satisfied: bool
    closed_form: Optional[float] = None

    def to_json(self) -> dict:
        d = {"name": self.name, "computed": self.computed, "paper_bound": self.paper_bound, "satisfied": self.satisfied}
        if self.closed_form is not None:
            d["closed_form"] = self.closed_form
        return d


@dataclass(frozen=True)
class BoundReport:
    t: float
    s: float
    items: list[BoundItem]

    @property
    def all_satisfied(self) -> bool:
        return all(it.satisfied for it in self.items)

    def item(self, name: str) -> BoundItem:
        return next(it for it in self.items if it.name == name)

    def to_json(self) -> dict:
        return {"t": self.t, "s": self.s, "items": [it.to_json() for it in self.items]}


def _item(name: str, computed: float, bound: float, closed_form: Optional[float] = None) -> BoundItem:
    return BoundItem(name, float(computed), float(bound), bool(computed <= bound + 1e-12), closed_form)


def verify_bounds(t: float, s: float) -> BoundReport:
    """Compare the five perturbation estimates of the tent family with their explicit constants.

    (a) preimage measure of the part of the larger branch image missed by
        the smaller one, (b) sup deviation of the comparison map from the
        identity, (c) Jacobian ratio deviation, (d) L^2 distance of the log
        Jacobians, (e) sup of the log Jacobian.
    """
    t, s = check_tent_param(t), check_tent_param(s)
    gap = abs(t - s)
    hi, lo = max(t, s), min(t, s)
    m_hi, m_lo = tent_family(hi), tent_family(lo)

    a_vals = []
    for b_hi, b_lo in zip(m_hi.branches, m_lo.branches):
        img_hi, img_lo = b_hi.image(), b_lo.image()
        missed = area(img_hi) - clip_area(img_hi, img_lo)
        a_vals.append(max(missed, 0.0) / b_hi.jacobian)
    a_closed = (hi * hi - lo * lo) / (2 * hi * hi)
    item_a = _item("a", max(a_vals), gap / TAU, a_closed)

    b_val = max(comparison_map(t, s, i).sup_deviation for i in (1, 2))
    item_b = _item("b", b_val, math.sqrt(2) / TAU * gap, math.sqrt(2) * abs(1 - s / t))

    item_c = _item("c", jacobian_ratio_deviation(t, s), 2 / TAU**2 * gap)

    omega_area = area(m_hi.omega)
    # L^2 norm of a constant over a domain of area m(Omega)
    d_val = abs(math.log(2 * s * s) - math.log(2 * t * t)) * math.sqrt(omega_area)
    item_d = _item("d", d_val, 2 / TAU * omega_area * gap)

    item_e = _item("e", max(abs(math.log(2 * t * t)), abs(math.log(2 * s * s))), math.log(2))
    return BoundReport(t, s, [item_a, item_b, item_c, item_d, item_e])


# -- operator gap and spectral projection -------------------------------------

def tnorm_estimate(
    t: float,
    s: float,
    part: UlamPartition,
    suite: TestSuite,
    P_t: Optional[TransferMatrix] = None,
    P_s: Optional[TransferMatrix] = None,
) -> float:
    """Lower bound ``max_f ||L_t f - L_s f||_1 / ||f||_BV`` over the suite."""
    if not len(suite):
        raise ValueError("empty test suite")
    if t == s:
        return 0.0
    P_t = transfer_matrix(tent_family(t), part) if P_t is None else P_t
    P_s = transfer_matrix(tent_family(s), part) if P_s is None else P_s
    best = 0.0
    for f in suite.functions:
        diff = apply_transfer(P_t, part, f, allow_signed=True) - apply_transfer(P_s, part, f, allow_signed=True)
        best = max(best, l1_norm(diff, part) / bv_norm(f, part))
    return best


def spectral_projection(rho, f, part: UlamPartition) -> np.ndarray:
    """``rho * int f dm``."""
    rho = np.asarray(getattr(rho, "values", rho), dtype=float)
    f = np.asarray(getattr(f, "values", f), dtype=float)
    return rho * float(np.dot(f, part.areas))
