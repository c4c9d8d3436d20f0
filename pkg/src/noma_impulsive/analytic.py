"""Analytic success and outage probabilities of uplink NOMA with SIC.

The ordered gains are written as g_i = y_1 + ... + y_i with independent
y_k ~ Exp(M+1-k).  User i is decoded in noise state s iff

    y_1 * D_i > N_i(y_2, ..., y_i),
    D_i = a_i - phi_i * sum_{q<i} a_q,
    N_i = phi_i/rho_s + sum_{k=2}^{i} c_k y_k,
    c_k = phi_i * sum_{q=k}^{i-1} a_q - a_i,

so the probability conditioned on y_2..y_i is an exponential tail of y_1.
Everything below integrates that conditional over y_2..y_i, either in closed
form (M = 3), by nested quadrature or by conditional Monte Carlo.

Failure probabilities are computed directly rather than as ``1 - success``
so that outage values far below machine epsilon relative to 1 stay accurate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import mpmath
import numpy as np
from scipy import integrate

from .config import NoiseState, Scenario
from .channel import OrderedGains, spacing_rates
from .rng import as_generator

__all__ = [
    "NoiseState",
    "ConditionError",
    "WrongEngineError",
    "AccuracyError",
    "SuccessProbTable",
    "success_user1_m3",
    "success_user2_m3",
    "success_user3_m3",
    "success_general",
    "failure_probability",
    "success_table",
    "outage",
    "outage_joint",
    "mixture_sinr",
    "tdma_outage",
]

STATES = (NoiseState.BACKGROUND, NoiseState.IMPULSIVE)

# e^{-r y} < 1e-16 beyond y = 16 ln(10) / r
_TAIL = 16.0 * math.log(10.0)
_DEGENERATE_RTOL = 1e-12
_MP_DPS = 80
QUAD_MAX_USER = 4


class ConditionError(ValueError):
    """Closed-form validity condition a_i > phi_i * sum_{q<i} a_q fails;
    use :func:`success_general` instead."""


class WrongEngineError(ValueError):
    """A closed form was called for a user count it does not cover."""


class AccuracyError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class SuccessProbTable:
    """Per-user, per-state decoding success probabilities."""

    success: dict[tuple[int, NoiseState], float]
    failure: dict[tuple[int, NoiseState], float]

    def __getitem__(self, key: tuple[int, NoiseState | str]) -> float:
        i, s = key
        return self.success[i, NoiseState(s)]


# --------------------------------------------------------------- closed forms


def _require_m3(sc: Scenario):
    if sc.m != 3:
        raise WrongEngineError(f"closed forms cover M = 3 only, got M = {sc.m}")


def _check_condition(sc: Scenario, i: int):
    if not sc.closed_form_valid(i):
        raise ConditionError(
            f"user {i}: a_{i} <= phi_{i} * sum(a_1..a_{i-1}); "
            "route through success_general"
        )


def _closed_form_mp(i: int, sc: Scenario, state) -> mpmath.mpf:
    """Success probability of user i (M = 3) at high precision."""
    mp = mpmath.mp
    rho = mp.mpf(sc.rho(state))
    a1, a2, a3 = (mp.mpf(x) for x in sc.a)
    phi = mp.mpf(sc.phi[i - 1])
    exp = mp.exp

    if i == 1:
        return exp(-3 * phi / (rho * a1))

    if i == 2:
        d = a2 - phi * a1
        e2 = exp(-2 * phi / (rho * a2))
        return e2 + (exp(-3 * phi / (rho * d)) - e2) / (1 - 3 * a2 / (2 * d))

    c1 = a3 - phi * a2
    c2 = a3 - phi * (a1 + a2)
    c3 = phi / (rho * a3)
    k = 2 - 3 * c1 / c2
    u = 1 - 3 * a3 / c2
    v = u - a3 * k / c1
    # (1 - e^{-c3 x}) / x, finite as c3 -> 0
    def ratio(x):
        return -mp.expm1(-c3 * x) / x

    w = 1 - 2 * a3 / c1
    return (
        exp(-c3)
        + exp(-2 * phi / (rho * c1)) * ratio(w)
        + 2 * exp(-3 * phi / (rho * c2)) / k
        * (ratio(u) - ratio(v) / exp(phi * k / (rho * c1)))
    )


def _closed_form(i: int, sc: Scenario, state) -> tuple[float, float]:
    _require_m3(sc)
    _check_condition(sc, i)
    with mpmath.workdps(_MP_DPS):
        s = _closed_form_mp(i, sc, state)
        return float(s), float(1 - s)


def success_user1_m3(sc: Scenario, state) -> float:
    """exp(-3 phi_1 / (rho_s a_1))."""
    return _closed_form(1, sc, state)[0]


def success_user2_m3(sc: Scenario, state) -> float:
    """Closed-form success of the middle user; needs a_2 > phi_2 a_1."""
    return _closed_form(2, sc, state)[0]


def success_user3_m3(sc: Scenario, state) -> float:
    """Closed-form success of the strongest user; needs a_3 > phi_3 (a_1 + a_2)."""
    return _closed_form(3, sc, state)[0]


# ------------------------------------------------------------- general engine


@dataclass(frozen=True)
class _Linear:
    """Decoding condition of user i as ``y_1 * d > n0 + sum_k c[k] y_{k+2}``."""

    d: float
    n0: float
    c: np.ndarray
    rates: np.ndarray
    m: int


def _linear_condition(i: int, sc: Scenario, rho: float) -> _Linear:
    a = sc.a
    phi = sc.phi[i - 1]
    interference = phi * sum(a[: i - 1])
    d = a[i - 1] - interference
    if abs(d) <= _DEGENERATE_RTOL * max(a[i - 1], interference):
        d = 0.0
    c = np.array([phi * sum(a[k - 1 : i - 1]) - a[i - 1] for k in range(2, i + 1)])
    return _Linear(d, phi / rho, c, spacing_rates(sc.m)[1:i], sc.m)


def _conditional_failure(lin: _Linear, y: np.ndarray) -> np.ndarray:
    """Pr(user fails | y_2..y_i) for rows of ``y``."""
    n = lin.n0 + y @ lin.c
    if lin.d > 0:
        return -np.expm1(-lin.m * np.maximum(n, 0.0) / lin.d)
    if lin.d < 0:
        return np.exp(-lin.m * np.maximum(n / lin.d, 0.0))
    return (n >= 0).astype(float)


def _quad(f, lo, hi, tol, points=None):
    if hi <= lo:
        return 0.0, 0.0
    pts = [p for p in (points or ()) if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return integrate.quad(f, lo, hi, epsabs=tol, epsrel=1e-12, limit=200, points=pts)
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad(f, lo, hi, epsabs=tol, epsrel=1e-12, limit=200, points=pts)
            raise AccuracyError(f"quadrature did not converge: {exc}", err) from None


def _quad_single(lin: _Linear, tol: float) -> tuple[float, float, float]:
    """Nested quadrature for one user; returns (success, failure, error).

    For d > 0 the failure is integrated over {N > 0}, a simplex whose
    nested upper limits are the recursive bounds xi_k.  For d <= 0 the
    success is integrated over {N < 0} instead.  Either way the integrand
    vanishes outside its region, so the small quantity is computed directly.
    """
    nvar = len(lin.c)
    m = lin.m
    if lin.d > 0:
        def weight(n):
            return -math.expm1(-m * n / lin.d) if n > 0 else 0.0
    elif lin.d < 0:
        def weight(n):
            return -math.expm1(-m * n / lin.d) if n < 0 else 0.0
    else:
        def weight(n):
            return 1.0 if n < 0 else 0.0

    if nvar == 0:
        val, err = weight(lin.n0), 0.0
    else:
        positive_region = lin.d > 0
        inner_err = [0.0]
        # each nesting level gets a share of the budget, so the summed
        # estimate stays below tol
        level_tol = tol / (2 * nvar)

        def level(idx: int, partial: float) -> tuple[float, float]:
            ck, r = lin.c[idx], lin.rates[idx]
            tail = _TAIL / r
            innermost = idx == nvar - 1
            # the zero of partial + ck*y, if any, bounds or kinks the region
            root = -partial / ck if ck != 0 else math.inf
            if positive_region:
                # all c_k < 0 here, so N > 0 needs y < root
                if partial <= 0:
                    return 0.0, 0.0
                lo, hi = 0.0, min(tail, root)
                points = None
            elif innermost:
                # c_i = -a_i < 0: N < 0 needs y > root
                lo, hi = max(0.0, root), max(0.0, root) + tail
                points = None
            else:
                lo, hi = 0.0, tail
                points = [root] if root > 0 else None

            if innermost:
                def f(y):
                    return weight(partial + ck * y) * r * math.exp(-r * y)
            else:
                def f(y):
                    v, e = level(idx + 1, partial + ck * y)
                    inner_err[0] = max(inner_err[0], e)
                    return v * r * math.exp(-r * y)

            return _quad(f, lo, hi, level_tol, points)

        val, err = level(0, lin.n0)
        # inner errors are integrated against a probability density
        err += inner_err[0]

    val = min(max(val, 0.0), 1.0)
    if lin.d > 0:
        return 1.0 - val, val, err
    return val, 1.0 - val, err


def _mc_single(lin: _Linear, samples: int, rng) -> tuple[float, float, float]:
    """Conditional Monte Carlo for one user; returns (success, failure, stderr)."""
    rng = as_generator(rng)
    y = rng.standard_exponential((samples, len(lin.c))) / lin.rates
    fail = _conditional_failure(lin, y)
    mean = float(fail.mean())
    err = float(fail.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return 1.0 - mean, mean, err


Backend = Literal["auto", "quad", "mc"]


def _general(
    i: int,
    sc: Scenario,
    state,
    backend: Backend = "auto",
    tol: float | None = None,
    samples: int = 1 << 20,
    rng=None,
) -> tuple[float, float, float]:
    if not 1 <= i <= sc.m:
        raise ValueError(f"user index must be in 1..{sc.m}, got {i}")
    if backend == "auto":
        backend = "quad" if i <= QUAD_MAX_USER else "mc"
    lin = _linear_condition(i, sc, sc.rho(state))
    if backend == "quad":
        tol = 1e-8 if tol is None else tol
        s, f, err = _quad_single(lin, tol)
    elif backend == "mc":
        s, f, err = _mc_single(lin, samples, rng if rng is not None else (0, i))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if tol is not None and err > tol:
        raise AccuracyError(f"user {i}: requested tolerance {tol:g} not reached", err)
    return s, f, err


def success_general(
    i: int,
    sc: Scenario,
    state,
    backend: Backend = "auto",
    tol: float | None = None,
    samples: int = 1 << 20,
    rng=None,
    full_output: bool = False,
):
    """Pr(user i is decoded | noise state) for any M and power allocation.

    Parameters
    ----------
    backend : {"auto", "quad", "mc"}
        ``"quad"`` is nested adaptive quadrature over y_2..y_i; ``"mc"``
        averages the exact conditional over sampled y_2..y_i.  ``"auto"``
        uses quadrature for i <= 4.
    tol : float, optional
        Absolute tolerance.  Defaults to 1e-8 for quadrature; for the
        Monte Carlo backend it is only enforced when given.
    samples, rng
        Monte Carlo sample count and generator (or integer seed).
    full_output : bool
        Also return the error estimate.

    Raises
    ------
    AccuracyError
        If the error estimate exceeds ``tol``.
    """
    s, _, err = _general(i, sc, state, backend, tol, samples, rng)
    return (s, err) if full_output else s


_FAILURE_CACHE_SIZE = 1 << 14
_failure_cache: dict[tuple, float] = {}


def failure_probability(i: int, sc: Scenario, state) -> float:
    """Pr(user i is not decoded | noise state), from the closed forms when
    M = 3 and their condition holds, otherwise from the general engine.

    Values are memoised on (i, a, phi, rho): sweeps over p or Gamma, and the
    two states when Gamma = 0, reuse the same evaluations.
    """
    key = (i, tuple(sc.a), tuple(sc.phi), float(sc.rho(state)))
    cached = _failure_cache.get(key)
    if cached is not None:
        return cached
    if sc.m == 3 and sc.closed_form_valid(i):
        f = _closed_form(i, sc, state)[1]
    else:
        f = _general(i, sc, state)[1]
    if len(_failure_cache) >= _FAILURE_CACHE_SIZE:
        _failure_cache.clear()
    _failure_cache[key] = f
    return f


def success_table(sc: Scenario) -> SuccessProbTable:
    failure = {(i, s): failure_probability(i, sc, s) for i in range(1, sc.m + 1) for s in STATES}
    success = {k: 1.0 - v for k, v in failure.items()}
    return SuccessProbTable(success, failure)


def _chain_failure(failures) -> float:
    """1 - prod(1 - f) without cancellation."""
    log_success = 0.0
    for f in failures:
        if f >= 1.0:
            return 1.0
        log_success += math.log1p(-f)
    return -math.expm1(log_success)


def _state_outage(j: int, sc: Scenario, state, failures=None) -> float:
    if failures is None:
        failures = [failure_probability(i, sc, state) for i in range(j, sc.m + 1)]
    return _chain_failure(failures)


def outage(j: int, sc: Scenario) -> float:
    """Outage probability of the j-th weakest user.

    1 - (1-p) prod_{i>=j} Pr(E^c_{i|w}) - p prod_{i>=j} Pr(E^c_{i|I}), with
    one noise state per detection epoch and the per-user decoding events
    multiplied as independent.
    """
    if not 1 <= j <= sc.m:
        raise ValueError(f"user index must be in 1..{sc.m}, got {j}")
    ow = _state_outage(j, sc, NoiseState.BACKGROUND)
    if sc.p == 0.0:
        return ow
    if sc.rho_i == sc.rho_w:
        oi = ow
    else:
        oi = _state_outage(j, sc, NoiseState.IMPULSIVE)
    return (1.0 - sc.p) * ow + sc.p * oi


def outages(sc: Scenario) -> list[float]:
    """Outage of every user, sharing the per-user failure evaluations."""
    per_state = {}
    for s in STATES:
        if s is NoiseState.IMPULSIVE and (sc.p == 0.0 or sc.rho_i == sc.rho_w):
            per_state[s] = per_state[NoiseState.BACKGROUND]
            continue
        per_state[s] = [failure_probability(i, sc, s) for i in range(1, sc.m + 1)]
    out = []
    for j in range(1, sc.m + 1):
        ow = _chain_failure(per_state[NoiseState.BACKGROUND][j - 1 :])
        oi = _chain_failure(per_state[NoiseState.IMPULSIVE][j - 1 :])
        out.append(ow if sc.p == 0.0 else (1.0 - sc.p) * ow + sc.p * oi)
    return out


# ------------------------------------------------------ joint (no independence)


def _joint_conditional_failure(conds: list[_Linear], m: int, y: np.ndarray) -> np.ndarray:
    """Pr(some user in the chain fails | y_2..y_M) for rows of ``y``."""
    lo = np.zeros(len(y))
    hi = np.full(len(y), np.inf)
    blocked = np.zeros(len(y), dtype=bool)
    for lin in conds:
        n = lin.n0 + y[:, : len(lin.c)] @ lin.c
        if lin.d > 0:
            lo = np.maximum(lo, n / lin.d)
        elif lin.d < 0:
            hi = np.minimum(hi, n / lin.d)
        else:
            blocked |= n >= 0
    # Pr(lo < y_1 < hi) = e^{-m lo} - e^{-m hi}; failure is its complement
    fail = -np.expm1(-m * lo) + np.exp(-m * hi)
    fail = np.where(hi <= lo, 1.0, fail)
    return np.where(blocked, 1.0, np.minimum(fail, 1.0))


def _joint_failure_scalar(conds: list[_Linear], m: int, y: tuple) -> float:
    lo, hi = 0.0, math.inf
    for lin in conds:
        n = lin.n0
        for ck, yk in zip(lin.c, y):
            n += ck * yk
        if lin.d > 0:
            lo = max(lo, n / lin.d)
        elif lin.d < 0:
            hi = min(hi, n / lin.d)
        elif n >= 0:
            return 1.0
    if hi <= lo:
        return 1.0
    return min(1.0, -math.expm1(-m * lo) + math.exp(-m * hi))


def _quad_joint(conds: list[_Linear], m: int, rates: np.ndarray, tol: float) -> tuple[float, float]:
    nvar = len(rates)
    inner_err = [0.0]

    def level(idx: int, prefix: tuple) -> tuple[float, float]:
        r = rates[idx]
        # each user's boundary crossing (inner variables at zero) is a kink
        points = []
        for lin in conds:
            if len(lin.c) > idx and lin.c[idx] != 0:
                partial = lin.n0 + sum(ck * yk for ck, yk in zip(lin.c, prefix))
                root = -partial / lin.c[idx]
                if root > 0:
                    points.append(root)
        if idx == nvar - 1:
            def f(y):
                return _joint_failure_scalar(conds, m, prefix + (y,)) * r * math.exp(-r * y)
        else:
            def f(y):
                v, e = level(idx + 1, prefix + (y,))
                inner_err[0] = max(inner_err[0], e)
                return v * r * math.exp(-r * y)
        return _quad(f, 0.0, _TAIL / r, tol, sorted(points))

    val, err = level(0, ())
    return val, err + inner_err[0]


def outage_joint(
    j: int,
    sc: Scenario,
    backend: Literal["quad", "mc"] = "quad",
    tol: float = 1e-9,
    samples: int = 1 << 20,
    rng=None,
    full_output: bool = False,
):
    """Outage of user j from the exact joint SIC-chain event.

    Unlike :func:`outage`, the decoding events of users j..M are not
    treated as independent: given y_2..y_M they jointly confine y_1 to an
    interval, whose probability is integrated over y_2..y_M.  This is the
    quantity a full link-level simulation estimates.  The quadrature
    backend is practical for M <= 3.
    """
    if not 1 <= j <= sc.m:
        raise ValueError(f"user index must be in 1..{sc.m}, got {j}")
    m = sc.m
    rates = spacing_rates(m)[1:]
    total, total_err = 0.0, 0.0
    for s, weight in ((NoiseState.BACKGROUND, 1.0 - sc.p), (NoiseState.IMPULSIVE, sc.p)):
        if weight == 0.0:
            continue
        conds = [_linear_condition(i, sc, sc.rho(s)) for i in range(j, m + 1)]
        nvar = max(len(c.c) for c in conds)
        if backend == "mc":
            g = as_generator(rng if rng is not None else (1, j, int(s is NoiseState.IMPULSIVE)))
            y = g.standard_exponential((samples, nvar)) / rates[:nvar]
            fail = _joint_conditional_failure(conds, m, y)
            val = float(fail.mean())
            err = float(fail.std(ddof=1) / math.sqrt(samples))
        elif nvar == 0:
            val, err = float(_joint_conditional_failure(conds, m, np.zeros((1, 0)))[0]), 0.0
        else:
            val, err = _quad_joint(conds, m, rates[:nvar], tol)
        total += weight * val
        total_err += weight * err
    total = min(max(total, 0.0), 1.0)
    return (total, total_err) if full_output else total


# ------------------------------------------------------------- SINR and TDMA


def mixture_sinr(j: int, gains, sc: Scenario) -> float:
    """State-averaged SINR of user j (diagnostic only; outage never uses it)."""
    g = np.asarray(gains.g if isinstance(gains, OrderedGains) else gains, dtype=float)
    a = np.asarray(sc.a)
    signal = a[j - 1] * g[j - 1]
    interference = float(np.dot(a[: j - 1], g[: j - 1]))
    p = sc.p
    return (1 - p) * signal / (interference + 1 / sc.rho_w) + p * signal / (interference + 1 / sc.rho_i)


RateScaling = Literal["slots", "none"]


def tdma_threshold(j: int, sc: Scenario, rate_scaling: RateScaling = "slots") -> float:
    """SINR threshold of user j in the TDMA baseline.

    With ``"slots"`` each user owns 1/M of the time and must reach M*R_j
    inside its slot.
    """
    if rate_scaling == "slots":
        rate = sc.m * sc.config.target_rates[j - 1]
        return math.expm1(rate * math.log(2.0))
    if rate_scaling == "none":
        return sc.phi[j - 1]
    raise ValueError(f"rate_scaling must be 'slots' or 'none', got {rate_scaling!r}")


def tdma_outage(j: int, sc: Scenario, rate_scaling: RateScaling = "slots") -> float:
    """Outage of user j over its own unordered unit-mean Rayleigh link."""
    if not 1 <= j <= sc.m:
        raise ValueError(f"user index must be in 1..{sc.m}, got {j}")
    thr = tdma_threshold(j, sc, rate_scaling)
    a = sc.a[j - 1]
    ow = -math.expm1(-thr / (sc.rho_w * a))
    oi = -math.expm1(-thr / (sc.rho_i * a))
    return (1 - sc.p) * ow + sc.p * oi
