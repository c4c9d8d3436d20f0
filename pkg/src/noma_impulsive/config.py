"""Scenario description: user count, powers, target rates, noise and SNR.

All SNR values cross the public interface in dB and are converted to linear
precisions once, in :func:`validate`.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


class ConfigError(ValueError):
    """Raised when a scenario violates one or more invariants."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def rate_threshold(rate: float) -> float:
    """SINR threshold 2**R - 1 for a target rate in bits/s/Hz."""
    if not rate >= 0:
        raise ValueError(f"target rate must be >= 0, got {rate}")
    return math.expm1(rate * math.log(2.0))


def powers_from_backoff(a1: float, beta_db: float, m: int) -> tuple[float, ...]:
    """Powers a_i = a1 * 10**(beta_db*(i-1)/10) for sorted users i = 1..m."""
    if not a1 > 0:
        raise ValueError(f"a1 must be > 0, got {a1}")
    if m < 1:
        raise ValueError(f"user count must be >= 1, got {m}")
    return (float(a1),) + tuple(a1 * db_to_linear(beta_db * i) for i in range(1, m))


class NoiseState(str, enum.Enum):
    """Noise state of one detection epoch."""

    BACKGROUND = "w"
    IMPULSIVE = "I"


@dataclass(frozen=True)
class NoiseParams:
    """Bernoulli-Gaussian noise: background variance ``sigma_w2``, impulses
    with probability ``p`` and impulsive-to-background power ratio ``gamma``."""

    p: float
    gamma: float
    sigma_w2: float = 1.0

    @property
    def sigma_i2(self) -> float:
        return self.gamma * self.sigma_w2

    @property
    def rho_w(self) -> float:
        return 1.0 / self.sigma_w2

    @property
    def rho_i(self) -> float:
        return self.rho_w / (self.gamma + 1.0)

    def errors(self) -> list[str]:
        errs = []
        if not 0.0 <= self.p <= 1.0:
            errs.append(f"p out of [0,1]: {self.p}")
        if not self.gamma >= 0.0:
            errs.append(f"gamma must be >= 0: {self.gamma}")
        if not self.sigma_w2 > 0.0:
            errs.append(f"sigma_w2 must be > 0: {self.sigma_w2}")
        return errs


def noise_precisions(noise: NoiseParams, rho_w_db: float | None = None) -> tuple[float, float]:
    """Return ``(rho_w, rho_I)``.

    With ``rho_w_db`` given the background precision is taken from it;
    otherwise it is ``1/sigma_w2``.
    """
    rho_w = db_to_linear(rho_w_db) if rho_w_db is not None else noise.rho_w
    return rho_w, rho_w / (noise.gamma + 1.0)


@dataclass(frozen=True)
class PowerAllocation:
    """Either an explicit power vector or an (a1, beta_db) back-off rule."""

    values: tuple[float, ...] | None = None
    a1: float = 1.0
    beta_db: float | None = None

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "PowerAllocation":
        return cls(values=tuple(float(v) for v in values))

    @classmethod
    def backoff(cls, a1: float, beta_db: float) -> "PowerAllocation":
        return cls(a1=float(a1), beta_db=float(beta_db))

    def expand(self, m: int) -> tuple[float, ...]:
        if self.values is not None:
            return self.values
        return powers_from_backoff(self.a1, self.beta_db or 0.0, m)


@dataclass(frozen=True)
class SystemConfig:
    m: int
    powers: PowerAllocation
    target_rates: tuple[float, ...]
    noise: NoiseParams
    rho_w_db: float = 15.0


@dataclass(frozen=True)
class Scenario:
    """A validated :class:`SystemConfig` with its derived quantities.

    ``a[i-1]`` and ``phi[i-1]`` belong to the i-th weakest user.
    """

    config: SystemConfig
    a: tuple[float, ...]
    phi: tuple[float, ...]
    rho_w: float
    rho_i: float

    @property
    def m(self) -> int:
        return self.config.m

    @property
    def p(self) -> float:
        return self.config.noise.p

    @property
    def gamma(self) -> float:
        return self.config.noise.gamma

    def rho(self, state: "NoiseState | str") -> float:
        return self.rho_w if NoiseState(state) is NoiseState.BACKGROUND else self.rho_i

    def closed_form_valid(self, i: int) -> bool:
        """Whether a_i > phi_i * sum_{q<i} a_q (strict)."""
        return self.a[i - 1] > self.phi[i - 1] * sum(self.a[: i - 1])

    def replace(self, **changes) -> "Scenario":
        """Re-validate with some fields changed.

        Accepts the :class:`SystemConfig` fields plus the shortcuts ``p``,
        ``gamma``, ``beta_db`` and ``a`` (explicit powers).
        """
        cfg = self.config
        noise_changes = {k: changes.pop(k) for k in ("p", "gamma", "sigma_w2") if k in changes}
        if noise_changes:
            changes["noise"] = dataclasses.replace(cfg.noise, **noise_changes)
        if "a" in changes:
            changes["powers"] = PowerAllocation.explicit(changes.pop("a"))
        if "beta_db" in changes:
            a1 = changes.pop("a1", cfg.powers.a1 if cfg.powers.values is None else cfg.powers.values[0])
            changes["powers"] = PowerAllocation.backoff(a1, changes.pop("beta_db"))
        return validate(dataclasses.replace(cfg, **changes))


def validate(cfg: SystemConfig) -> Scenario:
    """Check every invariant of ``cfg`` and attach derived quantities.

    All violations are collected and raised together as a :class:`ConfigError`.
    """
    errs: list[str] = []
    m = cfg.m
    if not isinstance(m, int) or m < 1:
        errs.append(f"M must be an integer >= 1: {m}")
        raise ConfigError(errs)

    errs.extend(cfg.noise.errors())

    rates = tuple(float(r) for r in cfg.target_rates)
    if len(rates) != m:
        errs.append(f"rates has {len(rates)} entries, expected M={m}")
    bad = [r for r in rates if not r >= 0]
    if bad:
        errs.append(f"rates must be >= 0: {bad}")

    powers: tuple[float, ...] = ()
    pa = cfg.powers
    if pa.values is None and not pa.a1 > 0:
        errs.append(f"a1 must be > 0: {pa.a1}")
    else:
        powers = tuple(float(v) for v in pa.expand(m))
        if len(powers) != m:
            errs.append(f"a has {len(powers)} entries, expected M={m}")
        if any(not v > 0 for v in powers):
            errs.append(f"a must be all > 0: {list(powers)}")

    if not math.isfinite(cfg.rho_w_db):
        errs.append(f"rho_w_db must be finite: {cfg.rho_w_db}")

    if errs:
        raise ConfigError(errs)

    rho_w, rho_i = noise_precisions(cfg.noise, cfg.rho_w_db)
    return Scenario(
        config=dataclasses.replace(cfg, target_rates=rates),
        a=powers,
        phi=tuple(rate_threshold(r) for r in rates),
        rho_w=rho_w,
        rho_i=rho_i,
    )


def make_scenario(
    m: int = 3,
    rates: float | Sequence[float] = 0.5,
    p: float = 0.01,
    gamma: float = 100.0,
    rho_w_db: float = 15.0,
    a: Sequence[float] | None = None,
    beta_db: float | None = None,
    a1: float = 1.0,
) -> Scenario:
    """Shortcut for building a validated scenario; defaults follow the
    three-user, R = 0.5, unit-power setup."""
    if isinstance(rates, (int, float)):
        rates = (float(rates),) * m
    if a is not None:
        powers = PowerAllocation.explicit(a)
    else:
        powers = PowerAllocation.backoff(a1, beta_db or 0.0)
    return validate(SystemConfig(m, powers, tuple(rates), NoiseParams(p, gamma), rho_w_db))


# ---------------------------------------------------------------- file format

_LIST_KEYS = {"a", "rates"}
_FLOAT_KEYS = {"a1", "beta_db", "p", "gamma", "rho_w_db"}
KNOWN_KEYS = {"M"} | _LIST_KEYS | _FLOAT_KEYS
REQUIRED_KEYS = ("M", "rates", "p", "gamma")


def parse_config_text(text: str, defaults: dict | None = None) -> SystemConfig:
    """Parse ``key = value`` lines (``#`` comments allowed) into a config.

    Unknown keys, missing keys and malformed values are collected and raised
    as one :class:`ConfigError`.
    """
    raw: dict[str, str] = {}
    errs: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            errs.append(f"line {lineno}: unknown key '{key}'")
        elif key in raw:
            errs.append(f"line {lineno}: duplicate key '{key}'")
        else:
            raw[key] = value

    values: dict = dict(defaults or {})
    for key, value in raw.items():
        try:
            if key == "M":
                values[key] = int(value)
            elif key in _LIST_KEYS:
                values[key] = tuple(float(v) for v in value.split(",") if v.strip())
            else:
                values[key] = float(value)
        except ValueError:
            errs.append(f"{key}: cannot parse '{value}'")

    for key in REQUIRED_KEYS:
        if key not in values and key not in raw:
            errs.append(f"missing key '{key}'")
    if "a" in values and ("beta_db" in raw or "a1" in raw):
        errs.append("give either 'a' or 'a1'/'beta_db', not both")
    if "a" not in values and "beta_db" not in values and "a1" not in values:
        errs.append("missing key 'a' (or 'a1'/'beta_db')")
    if errs:
        raise ConfigError(errs)

    if "a" in values:
        powers = PowerAllocation.explicit(values["a"])
    else:
        powers = PowerAllocation.backoff(values.get("a1", 1.0), values.get("beta_db", 0.0))
    return SystemConfig(
        m=values["M"],
        powers=powers,
        target_rates=values["rates"],
        noise=NoiseParams(values["p"], values["gamma"]),
        rho_w_db=values.get("rho_w_db", 15.0),
    )


def load_config(path: str | Path, defaults: dict | None = None) -> SystemConfig:
    return parse_config_text(Path(path).read_text(), defaults)


def config_to_dict(cfg: SystemConfig) -> dict:
    d = {
        "M": cfg.m,
        "rates": list(cfg.target_rates),
        "p": cfg.noise.p,
        "gamma": cfg.noise.gamma,
        "sigma_w2": cfg.noise.sigma_w2,
        "rho_w_db": cfg.rho_w_db,
    }
    if cfg.powers.values is not None:
        d["a"] = list(cfg.powers.values)
    else:
        d["a1"] = cfg.powers.a1
        d["beta_db"] = cfg.powers.beta_db
    return d
