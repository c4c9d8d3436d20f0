"""Link-level Monte Carlo of the SIC chain for NOMA, and of the TDMA baseline.

Trials are split into fixed-size chunks; chunk ``c`` draws from the stream
``(seed, *key, c)``.  Counts are integer sums over chunks, so results depend on
``(seed, chunk_size)`` only and not on how many workers ran the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .analytic import RateScaling, tdma_threshold
from .channel import rayleigh_power_gains, sample_ordered_gains_sort
from .config import NoiseState, Scenario
from .rng import as_generator, stream

CHUNK_SIZE = 1 << 16
WORKERS_ENV = "NOMA_WORKERS"


def confidence_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    z = float(norm.ppf(0.5 + level / 2))
    n = trials
    phat = successes / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == n else min(1.0, centre + half)
    return low, high


@dataclass(frozen=True)
class OutageEstimate:
    user: int
    failures: int
    trials: int
    level: float = 0.95

    @property
    def op_hat(self) -> float:
        return self.failures / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return confidence_interval(self.failures, self.trials, self.level)

    @property
    def ci_low(self) -> float:
        return self.ci[0]

    @property
    def ci_high(self) -> float:
        return self.ci[1]

    def std_error(self, p: float | None = None) -> float:
        """Binomial standard error, at ``p`` if given, else at the estimate."""
        p = self.op_hat if p is None else p
        return math.sqrt(p * (1 - p) / self.trials)


@dataclass(frozen=True)
class TrialOutcome:
    decode_ok: tuple[bool, ...]
    noise_state: NoiseState

    def in_outage(self, j: int) -> bool:
        """User j fails if any of users j..M is not decoded."""
        return not all(self.decode_ok[j - 1 :])


def _decode(sc: Scenario, g: np.ndarray, impulsive: np.ndarray) -> np.ndarray:
    """decode_ok[n, i] for each row of sorted gains ``g`` (perfect SIC)."""
    a = np.asarray(sc.a)
    phi = np.asarray(sc.phi)
    noise = np.where(impulsive, 1.0 / sc.rho_i, 1.0 / sc.rho_w)
    received = a * g
    # interference seen by user i: users 1..i-1, the ones not yet decoded
    interference = np.cumsum(received, axis=1) - received
    return received > phi * (interference + noise[:, None])


def chain_failures(ok: np.ndarray) -> np.ndarray:
    """Per-user failure counts of the SIC chain from a decode_ok matrix."""
    # chain_ok[:, j] = all(ok[:, j:])
    chain_ok = np.flip(np.logical_and.accumulate(np.flip(ok, axis=1), axis=1), axis=1)
    return (~chain_ok).sum(axis=0)


def run_trial(sc: Scenario, rng) -> TrialOutcome:
    """One detection epoch: sorted gains, one noise state, SIC from user M down."""
    rng = as_generator(rng)
    g = sample_ordered_gains_sort(sc.m, rng).g
    impulsive = rng.random() < sc.p
    ok = _decode(sc, g[None, :], np.array([impulsive]))[0]
    state = NoiseState.IMPULSIVE if impulsive else NoiseState.BACKGROUND
    return TrialOutcome(tuple(bool(x) for x in ok), state)


def _noma_chunk(sc: Scenario, seed: int, key: tuple, chunk: int, n: int) -> np.ndarray:
    rng = stream(seed, *key, chunk)
    g = sample_ordered_gains_sort(sc.m, rng, size=n)
    impulsive = rng.random(n) < sc.p
    return chain_failures(_decode(sc, g, impulsive))


def _tdma_chunk(sc: Scenario, seed: int, key: tuple, chunk: int, n: int, rate_scaling: RateScaling) -> np.ndarray:
    rng = stream(seed, *key, chunk)
    g = rayleigh_power_gains(sc.m, rng, size=n)
    impulsive = rng.random(n) < sc.p
    rho = np.where(impulsive, sc.rho_i, sc.rho_w)
    thr = np.array([tdma_threshold(j, sc, rate_scaling) for j in range(1, sc.m + 1)])
    snr = np.asarray(sc.a) * g * rho[:, None]
    return (snr <= thr).sum(axis=0)


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunks(trials: int, chunk_size: int):
    return [(c, min(chunk_size, trials - c * chunk_size)) for c in range(math.ceil(trials / chunk_size))]


def _run(fn, sc, trials, seed, key, chunk_size, workers, *extra) -> np.ndarray:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    chunks = _chunks(trials, chunk_size)
    workers = worker_count() if workers is None else workers
    workers = min(workers, len(chunks))
    if workers <= 1:
        parts = [fn(sc, seed, key, c, n, *extra) for c, n in chunks]
    else:
        with ProcessPoolExecutor(workers) as ex:
            futures = [ex.submit(fn, sc, seed, key, c, n, *extra) for c, n in chunks]
            parts = [f.result() for f in futures]
    return np.sum(parts, axis=0, dtype=np.int64)


def estimate_outage(
    sc: Scenario,
    trials: int,
    seed: int = 0,
    chunk_size: int = CHUNK_SIZE,
    workers: int | None = None,
    key: tuple[int, ...] = (),
) -> list[OutageEstimate]:
    """Simulated outage of every user over ``trials`` full SIC-chain trials.

    ``key`` extends the stream id, e.g. with a sweep grid index.
    ``workers`` defaults to the ``NOMA_WORKERS`` environment variable or the
    CPU count; it never changes the result.
    """
    counts = _run(_noma_chunk, sc, trials, seed, key, chunk_size, workers)
    return [OutageEstimate(j + 1, int(k), trials) for j, k in enumerate(counts)]


def estimate_tdma_outage(
    sc: Scenario,
    trials: int,
    seed: int = 0,
    rate_scaling: RateScaling = "slots",
    chunk_size: int = CHUNK_SIZE,
    workers: int | None = None,
    key: tuple[int, ...] = (),
) -> list[OutageEstimate]:
    """Simulated TDMA outage: each user over its own unordered Rayleigh link."""
    counts = _run(_tdma_chunk, sc, trials, seed, key, chunk_size, workers, rate_scaling)
    return [OutageEstimate(j + 1, int(k), trials) for j, k in enumerate(counts)]
