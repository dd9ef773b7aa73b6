"""Piecewise-affine expanding maps on polygonal domains.

The two-dimensional tent family lives here together with its closed-form
inverses, the comparison maps between two parameters, and the expansion and
distortion constants of the map and its iterates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .geometry import (
    AffineMap2,
    GeometryError,
    Point2,
    Polygon,
    apply_affine,
    area,
    clip_area,
    clip_convex,
)

TAU = (math.sqrt(2.0) + 1.0) ** 0.25 / math.sqrt(2.0)

OMEGA = Polygon([(0.0, 0.0), (2.0, 0.0), (1.0, 1.0)])
R1 = Polygon([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])
R2 = Polygon([(1.0, 0.0), (2.0, 0.0), (1.0, 1.0)])

# containment slack for eval: orbits of the exact map drift by rounding only
POINT_TOL = 1e-9


class MapError(ValueError):
    """Invalid map definition or an evaluation outside the domain."""


@dataclass(frozen=True)
class Branch:
    domain: Polygon
    forward: AffineMap2
    inverse: AffineMap2 = None  # type: ignore[assignment]
    jacobian: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.inverse is None:
            object.__setattr__(self, "inverse", self.forward.inverse())
        if self.jacobian is None:
            object.__setattr__(self, "jacobian", abs(self.forward.det))
        if not self.jacobian > 0:
            raise MapError("branch map must be invertible")

    def image(self) -> Polygon:
        return apply_affine(self.forward, self.domain)


@dataclass(frozen=True)
class PiecewiseAffineMap:
    omega: Polygon
    branches: tuple[Branch, ...]
    t: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise MapError("map needs at least one branch")

    def validate(self, tol: float = 1e-10) -> None:
        """Check the partition and image-containment invariants."""
        total = sum(area(b.domain) for b in self.branches)
        if abs(total - area(self.omega)) > tol:
            raise MapError(f"branch domains cover area {total}, domain has {area(self.omega)}")
        for i, bi in enumerate(self.branches):
            for bj in self.branches[i + 1:]:
                if clip_area(bi.domain, bj.domain) > 1e-12:
                    raise MapError("branch domains overlap")
            img = bi.image()
            if abs(clip_area(img, self.omega) - area(img)) > tol:
                raise MapError("branch image leaves the domain")

    def branch_index(self, x: Sequence[float], tol: float = POINT_TOL) -> int:
        """0-based index of the first branch whose closed domain contains ``x``."""
        for k, b in enumerate(self.branches):
            if b.domain.contains(x, tol):
                return k
        raise MapError(f"point {tuple(x)} is outside the domain")

    def jacobian_at(self, x: Sequence[float]) -> float:
        return self.branches[self.branch_index(x)].jacobian


def check_tent_param(t: float) -> float:
    t = float(t)
    # tolerance lets grids built by linspace hit the endpoints
    if not (TAU - 1e-12 <= t <= 1.0 + 1e-12):
        raise MapError(f"t = {t} outside [tau, 1] = [{TAU:.6f}, 1]")
    return min(max(t, TAU), 1.0)


def tent_family(t: float) -> PiecewiseAffineMap:
    """Tent map ``t * phi_1`` on the triangle (0,0), (2,0), (1,1)."""
    t = check_tent_param(t)
    f1 = AffineMap2(((t, t), (t, -t)))
    f2 = AffineMap2(((-t, t), (-t, -t)), Point2(2 * t, 2 * t))
    h = 1.0 / (2 * t)
    g1 = AffineMap2(((h, h), (h, -h)))
    g2 = AffineMap2(((-h, -h), (h, -h)), Point2(2.0, 0.0))
    jac = 2 * t * t
    return PiecewiseAffineMap(
        OMEGA,
        (Branch(R1, f1, g1, jac), Branch(R2, f2, g2, jac)),
        t=t,
    )


def eval_map(m: PiecewiseAffineMap, x: Sequence[float]) -> tuple[Point2, int]:
    """Apply ``m`` at ``x``; returns the image and the 1-based branch index.

    Points on a shared boundary go to the lowest-numbered branch.
    """
    k = m.branch_index(x)
    return m.branches[k].forward(x), k + 1


def iterate_pieces(m: PiecewiseAffineMap, j: int) -> list[tuple[Polygon, AffineMap2]]:
    """Smoothness pieces of the ``j``-th iterate as ``(domain, composite map)`` pairs."""
    if j < 1:
        raise MapError("iterate must be >= 1")
    pieces = [(b.domain, b.forward) for b in m.branches]
    for _ in range(j - 1):
        nxt = []
        for dom, comp in pieces:
            back = comp.inverse()
            for b in m.branches:
                sub = clip_convex(dom, apply_affine(back, b.domain))
                if not sub.is_empty:
                    nxt.append((sub, b.forward.compose(comp)))
        pieces = nxt
    return pieces


@dataclass(frozen=True)
class ConditionConstants:
    sigma: float
    delta: float
    ell: int
    alpha: Optional[float] = None
    beta: Optional[float] = None
    theta: Optional[float] = None
    big_m: Optional[float] = None


def condition_constants(m: PiecewiseAffineMap, iterate: int = 1, ell: int = 6) -> ConditionConstants:
    """Expansion bound ``sigma`` and distortion ``delta`` of the ``iterate``-th power.

    ``sigma`` is the largest operator norm of an inverse branch.  Affine
    branches have constant Jacobian, so ``delta`` is 0.  The boundary
    constants ``alpha``, ``beta`` are not derived and stay unset.
    """
    if not m.branches:
        raise MapError("empty branch list")
    pieces = iterate_pieces(m, iterate)
    sigma = max(comp.inverse().operator_norm() for _, comp in pieces)
    return ConditionConstants(sigma=sigma, delta=0.0, ell=ell)


@dataclass(frozen=True)
class ComparisonMap:
    psi: AffineMap2
    k_set: Polygon
    branch_index: int
    sup_deviation: float


class EmptyComparisonDomain(MapError):
    """The two branch images do not overlap."""


def comparison_map_between(mt: PiecewiseAffineMap, ms: PiecewiseAffineMap, branch_index: int) -> ComparisonMap:
    bt = mt.branches[branch_index - 1]
    bs = ms.branches[branch_index - 1]
    overlap = clip_convex(bt.image(), bs.image())
    if overlap.is_empty:
        raise EmptyComparisonDomain(f"branch {branch_index}: images are disjoint")
    k_set = apply_affine(bs.inverse, overlap)
    if bt.forward == bs.forward:
        # same branch: exact identity instead of an inverse-forward round trip
        return ComparisonMap(AffineMap2.identity(), k_set, branch_index, 0.0)
    psi = bt.inverse.compose(bs.forward)
    # an affine deviation attains its sup over a convex set at a vertex
    dev = max(math.dist(psi(v), v) for v in k_set.vertices)
    return ComparisonMap(psi, k_set, branch_index, dev)


def comparison_map(t: float, s: float, branch_index: int) -> ComparisonMap:
    """``phi_{t,i}^{-1} o phi_{s,i}`` restricted to where it is defined."""
    if branch_index not in (1, 2):
        raise MapError("tent branches are numbered 1 and 2")
    return comparison_map_between(tent_family(t), tent_family(s), branch_index)


def jacobian_ratio_deviation(t: float, s: float) -> float:
    t, s = check_tent_param(t), check_tent_param(s)
    return abs(s * s / (t * t) - 1.0)


# -- map-definition files ----------------------------------------------------

def map_to_dict(m: PiecewiseAffineMap) -> dict:
    return {
        "omega": [list(v) for v in m.omega.vertices],
        "branches": [
            {
                "domain": [list(v) for v in b.domain.vertices],
                "linear": [list(r) for r in b.forward.linear],
                "translation": list(b.forward.translation),
            }
            for b in m.branches
        ],
    }


def map_from_dict(data: dict, validate: bool = True) -> PiecewiseAffineMap:
    try:
        omega = Polygon(data["omega"])
        branches = []
        for raw in data["branches"]:
            lin = raw["linear"]
            if len(lin) != 2 or any(len(r) != 2 for r in lin):
                raise MapError("linear part must be 2x2")
            fwd = AffineMap2((tuple(lin[0]), tuple(lin[1])), Point2(*raw.get("translation", (0.0, 0.0))))
            branches.append(Branch(Polygon(raw["domain"]), fwd))
    except (KeyError, TypeError, GeometryError) as exc:
        raise MapError(f"bad map definition: {exc}") from exc
    m = PiecewiseAffineMap(omega, tuple(branches))
    if validate:
        m.validate()
    return m


def load_map(path: str | Path) -> PiecewiseAffineMap:
    with open(path, encoding="utf-8") as fh:
        return map_from_dict(json.load(fh))


def dump_map(m: PiecewiseAffineMap, path: str | Path) -> None:
    Path(path).write_text(json.dumps(map_to_dict(m), indent=2) + "\n", encoding="utf-8")
