"""Ordered Rayleigh power gains and Bernoulli-Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import NoiseParams, NoiseState
from .rng import as_generator


@dataclass(frozen=True)
class OrderedGains:
    """Sorted power gains |h_1|^2 <= ... <= |h_M|^2 of one realization."""

    g: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.g) < 0):
            raise ValueError("gains must be ascending")

    def __len__(self) -> int:
        return len(self.g)

    def __getitem__(self, i):
        return self.g[i]


@dataclass(frozen=True)
class NoiseSample:
    value: complex
    state: NoiseState


def rayleigh_power_gains(m: int, rng, size: int | None = None) -> np.ndarray:
    """Unsorted |h|^2 for h ~ CN(0, 1); shape ``(m,)`` or ``(size, m)``."""
    rng = as_generator(rng)
    shape = (m,) if size is None else (size, m)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return 0.5 * (re * re + im * im)


def sample_ordered_gains_sort(m: int, rng, size: int | None = None):
    """Draw M unit-mean exponential gains and sort them.

    Returns an :class:`OrderedGains` for a single draw, or a ``(size, m)``
    array of sorted rows when ``size`` is given.
    """
    if m < 1:
        raise ValueError(f"M must be >= 1, got {m}")
    g = np.sort(rayleigh_power_gains(m, rng, size), axis=-1)
    return OrderedGains(g) if size is None else g


def spacing_rates(m: int) -> np.ndarray:
    """Rates M, M-1, ..., 1 of the independent exponential spacings y_k."""
    return np.arange(m, 0, -1, dtype=float)


def sample_ordered_gains_decomposition(m: int, rng, size: int | None = None):
    """Ordered gains as cumulative sums of exponential spacings.

    g_i = y_1 + ... + y_i with y_k ~ Exp(rate M+1-k); ascending by
    construction and equal in distribution to the sorted sampler.
    """
    if m < 1:
        raise ValueError(f"M must be >= 1, got {m}")
    rng = as_generator(rng)
    shape = (m,) if size is None else (size, m)
    y = rng.standard_exponential(shape) / spacing_rates(m)
    g = np.cumsum(y, axis=-1)
    return OrderedGains(g) if size is None else g


def noise_pdf(n, params: NoiseParams):
    """Density of the two-component circular complex Gaussian mixture."""
    r2 = np.abs(n) ** 2
    vw = params.sigma_w2
    vi = params.sigma_w2 + params.sigma_i2
    return (1 - params.p) / (np.pi * vw) * np.exp(-r2 / vw) + params.p / (np.pi * vi) * np.exp(-r2 / vi)


def sample_noise_array(params: NoiseParams, rng, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized draw: returns ``(values, impulsive)`` with ``impulsive`` boolean."""
    rng = as_generator(rng)
    impulsive = rng.random(size) < params.p
    var = np.where(impulsive, params.sigma_w2 + params.sigma_i2, params.sigma_w2)
    scale = np.sqrt(var / 2)
    values = scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
    return values, impulsive


def sample_noise(params: NoiseParams, rng) -> NoiseSample:
    values, impulsive = sample_noise_array(params, rng, 1)
    state = NoiseState.IMPULSIVE if impulsive[0] else NoiseState.BACKGROUND
    return NoiseSample(complex(values[0]), state)
