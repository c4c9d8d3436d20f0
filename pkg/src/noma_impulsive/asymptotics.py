"""High-SNR behaviour: finite-SNR diversity slopes and first-order outage."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import ConditionError, outage
from .config import Scenario


class DegenerateCurveError(ValueError):
    pass


@dataclass(frozen=True)
class OutageCurve:
    """Outage versus background SNR; ``rho_w_db`` strictly increasing."""

    rho_w_db: tuple[float, ...]
    op: tuple[float, ...]

    def __post_init__(self):
        if len(self.rho_w_db) != len(self.op):
            raise ValueError("rho_w_db and op must have equal length")
        if np.any(np.diff(self.rho_w_db) <= 0):
            raise ValueError("rho_w_db must be strictly increasing")

    @classmethod
    def from_points(cls, points: Sequence[tuple[float, float]]) -> "OutageCurve":
        db, op = zip(*points) if points else ((), ())
        return cls(tuple(map(float, db)), tuple(map(float, op)))


def outage_curve(j: int, sc: Scenario, grid_db: Sequence[float]) -> OutageCurve:
    ops = tuple(outage(j, sc.replace(rho_w_db=float(x))) for x in grid_db)
    return OutageCurve(tuple(map(float, grid_db)), ops)


def diversity_slope(curve: OutageCurve, window: tuple[float, float]) -> float:
    """Least-squares slope of -log10(op) against log10(rho_w) inside ``window`` (dB)."""
    lo, hi = window
    db = np.asarray(curve.rho_w_db)
    op = np.asarray(curve.op)
    mask = (db >= lo) & (db <= hi)
    if mask.sum() < 2:
        raise ValueError(f"need at least 2 curve points in window {window}, got {int(mask.sum())}")
    if np.any(op[mask] <= 0):
        raise DegenerateCurveError("outage must be positive to take logarithms")
    x = db[mask] / 10.0
    y = -np.log10(op[mask])
    return float(np.polyfit(x, y, 1)[0])


def asymptotic_diversity(j: int) -> int:
    """Diversity order of the j-th weakest user, with or without impulses."""
    if j < 1:
        raise ValueError(f"user index must be >= 1, got {j}")
    return j


def failure_constant(i: int, sc: Scenario) -> float:
    """kappa with Pr(user i fails | rho) = kappa / rho**i + o(rho**-i).

    Near the origin the spacings y_1..y_i have joint density
    M!/(M-i)!, and user i fails on the simplex
    D_i y_1 + sum_k |c_k| y_k <= phi_i / rho, whose volume is
    (phi_i/rho)**i / (i! D_i prod|c_k|).
    """
    a = sc.a
    phi = sc.phi[i - 1]
    d = a[i - 1] - phi * sum(a[: i - 1])
    if not d > 0:
        raise ConditionError(f"user {i}: outage does not vanish at high SNR (a_{i} <= phi_{i} * sum a_q)")
    coeffs = [a[i - 1] - phi * sum(a[k - 1 : i - 1]) for k in range(2, i + 1)]
    density = math.perm(sc.m, i)
    return density * phi**i / (math.factorial(i) * d * math.prod(coeffs))


def high_snr_outage_approx(j: int, sc: Scenario) -> float:
    """Leading term of the outage of user j as rho_w grows.

    The first user in j..M with a non-zero threshold dominates; for user i
    the background and impulsive states contribute kappa_i / rho_w**i and
    kappa_i (Gamma+1)**i / rho_w**i, weighted by 1-p and p.
    """
    if not 1 <= j <= sc.m:
        raise ValueError(f"user index must be in 1..{sc.m}, got {j}")
    for i in range(j, sc.m + 1):
        failure_constant(i, sc)  # validity of the whole chain
    for i in range(j, sc.m + 1):
        if sc.phi[i - 1] > 0:
            kappa = failure_constant(i, sc)
            return kappa * ((1 - sc.p) * sc.rho_w**-i + sc.p * sc.rho_i**-i)
    return 0.0
