"""Property suites for the discrete transfer operator, run by ``check-ops``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import l1_distance, spectral_projection, tent_grid
from .bv import build_suite, comparison_lookup, lemma_av_ratio, sobolev_ratio
from .maps import comparison_map, tent_family
from .ulam import apply_transfer, build_partition, duality_check, l1_norm, stationary_density, transfer_matrix


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "limit": self.limit, "passed": self.passed}


def _check(name: str, value: float, limit: float) -> Check:
    return Check(name, float(value), float(limit), bool(value <= limit))


def operator_checks(t: float = 0.95, n: int = 128, seed: int = 42, n_signed: int = 100) -> list[Check]:
    part = build_partition(n)
    m = tent_family(t)
    P = transfer_matrix(m, part)
    rng = np.random.default_rng(seed)
    out = []

    left = (part.centroids[:, 0] < 1.0).astype(float)
    out.append(_check("C1 duality, left-half indicator", duality_check(m, part, left, np.ones(len(part)), P), 1e-2))
    g = rng.uniform(0.0, 1.0, len(part))
    out.append(_check("C1 duality, f = 1", duality_check(m, part, np.ones(len(part)), g, P), 1e-12))

    worst_contraction = worst_mass = 0.0
    min_positive = np.inf
    for _ in range(n_signed):
        f = rng.normal(size=len(part))
        lf = apply_transfer(P, part, f, allow_signed=True)
        worst_contraction = max(worst_contraction, l1_norm(lf, part) - l1_norm(f, part))
        worst_mass = max(worst_mass, abs(np.dot(lf, part.areas) - np.dot(f, part.areas)))
        pos = apply_transfer(P, part, np.abs(f))
        min_positive = min(min_positive, float(pos.min()))
    out.append(_check("C2 L1 contraction excess", worst_contraction, 0.0))
    out.append(_check("C2 positivity deficit", -min_positive, 0.0))
    out.append(_check("mass conservation", worst_mass, 1e-12))

    rho = stationary_density(P, part)
    out.append(_check("C3 invariance residual", rho.residual, 1e-10))

    suite = build_suite(part, seed)
    out.append(_check("Sobolev ratio", max(sobolev_ratio(f, part) for f in suite.functions), 0.3))

    worst_av = 0.0
    grid = tent_grid(5)
    for a in grid:
        for b in grid:
            if abs(a - b) < 0.01:
                continue
            for i in (1, 2):
                psi = comparison_map(a, b, i)
                lookup = comparison_lookup(psi, part)
                for f in suite.functions:
                    worst_av = max(worst_av, lemma_av_ratio(f, psi, part, lookup).ratio)
    out.append(_check("Lemma AV ratio", worst_av, 10.0))

    proj = spectral_projection(rho, rho.values, part)
    out.append(_check("projection fixes rho", l1_distance(proj, rho, part), 1e-12))
    f = suite.functions[0]
    once = spectral_projection(rho, f, part)
    twice = spectral_projection(rho, once, part)
    out.append(_check("projection idempotence", l1_distance(once, twice, part), 1e-12))

    rho_s = stationary_density(transfer_matrix(tent_family(min(1.0, t + 0.02)), part), part)
    lhs = l1_distance(rho_s, rho, part)
    rhs = l1_distance(spectral_projection(rho_s, rho_s, part), spectral_projection(rho, rho_s, part), part)
    out.append(_check("projection-gap identity", abs(lhs - rhs), 1e-12))
    return out
