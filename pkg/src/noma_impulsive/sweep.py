"""Parameter sweeps over SNR or power back-off, and their CSV tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import analytic, montecarlo
from .asymptotics import asymptotic_diversity, diversity_slope, outage_curve
from .config import Scenario

ENGINES = ("analytic", "montecarlo", "tdma")
KINDS = ("snr", "backoff")
CSV_HEADER = ("sweep_var", "user", "engine", "op", "ci_low", "ci_high")

DEFAULT_SNR_GRID = "0:45:1"
DEFAULT_BACKOFF_GRID = "0:10:0.5"


class SweepError(RuntimeError):
    pass


def parse_grid(text: str) -> tuple[float, ...]:
    """``START:STOP:STEP`` (STOP included) or a comma list of values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be START:STOP:STEP, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be > 0")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = tuple(round(start + k * step, 10) for k in range(max(n, 0)))
    else:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    check_grid(values)
    return values


def check_grid(values: Sequence[float]):
    if len(values) == 0:
        raise ValueError("grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("grid must be strictly increasing")


def parse_window(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"window must be LO:HI, got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not hi > lo:
        raise ValueError(f"window must have HI > LO, got {text!r}")
    return lo, hi


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    grid: tuple[float, ...]
    engines: tuple[str, ...] = ("analytic",)
    trials: int = 1_000_000
    seed: int = 0
    tdma_rate_scaling: str = "slots"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        check_grid(self.grid)
        unknown = set(self.engines) - set(ENGINES)
        if unknown or not self.engines:
            raise ValueError(f"engines must be a non-empty subset of {ENGINES}, got {self.engines}")
        if "montecarlo" in self.engines and self.trials < 1:
            raise ValueError("trials must be >= 1 when montecarlo is selected")


@dataclass(frozen=True)
class SweepRow:
    sweep_var: float
    user: int
    engine: str
    op: float
    ci_low: float | None = None
    ci_high: float | None = None


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def __eq__(self, other):
        return isinstance(other, SweepResult) and self.rows == other.rows

    def select(self, engine: str, user: int) -> tuple[np.ndarray, np.ndarray]:
        """(sweep values, op values) of one engine and user."""
        pts = [(r.sweep_var, r.op) for r in self.rows if r.engine == engine and r.user == user]
        x, y = zip(*pts) if pts else ((), ())
        return np.array(x), np.array(y)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([_fmt(r.sweep_var), r.user, r.engine, _fmt(r.op), _fmt(r.ci_low), _fmt(r.ci_high)])
        return buf.getvalue()

    def write_csv(self, path: str | Path):
        Path(path).write_text(self.to_csv_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "SweepResult":
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            x, user, engine, op, lo, hi = rec
            rows.append(SweepRow(float(x), int(user), engine, float(op), _parse(lo), _parse(hi)))
        return cls(rows)

    @classmethod
    def read_csv(cls, path: str | Path) -> "SweepResult":
        return cls.from_csv_text(Path(path).read_text())


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def _parse(s: str) -> float | None:
    return float(s) if s else None


def scenario_at(sc: Scenario, kind: str, value: float) -> Scenario:
    if kind == "snr":
        return sc.replace(rho_w_db=value)
    return sc.replace(beta_db=value)


def run_sweep(sc: Scenario, spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate every selected engine at every grid point for every user.

    Monte Carlo at grid index k draws from streams keyed ``(seed, k, ...)``,
    so grid points are independent and the table depends only on the seed.
    """
    rows: list[SweepRow] = []
    for k, x in enumerate(spec.grid):
        try:
            point = scenario_at(sc, spec.kind, x)
            if "analytic" in spec.engines:
                for j, op in enumerate(analytic.outages(point), 1):
                    rows.append(SweepRow(x, j, "analytic", op))
            if "montecarlo" in spec.engines:
                for est in montecarlo.estimate_outage(point, spec.trials, spec.seed, key=(k, 0), workers=workers):
                    rows.append(SweepRow(x, est.user, "montecarlo", est.op_hat, *est.ci))
            if "tdma" in spec.engines:
                for j in range(1, point.m + 1):
                    rows.append(SweepRow(x, j, "tdma", analytic.tdma_outage(j, point, spec.tdma_rate_scaling)))
        except Exception as exc:
            raise SweepError(f"grid point {spec.kind}={x:g}: {exc}") from exc
    return SweepResult(rows)


def crossing_db(grid: Sequence[float], op: Sequence[float], level: float) -> float | None:
    """First dB value where ``op`` falls to ``level``, interpolating
    log10(op) linearly in dB; None if the curve never reaches it."""
    target = math.log10(level)
    logs = [math.log10(v) if v > 0 else -math.inf for v in op]
    for k in range(len(grid) - 1):
        y0, y1 = logs[k], logs[k + 1]
        if y0 >= target > y1:
            if math.isinf(y1):
                return float(grid[k + 1])
            return grid[k] + (target - y0) * (grid[k + 1] - grid[k]) / (y1 - y0)
    return None


def horizontal_gap(grid, op_ref, op_other, level: float = 1e-2) -> float:
    """dB shift of ``op_other`` to the right of ``op_ref`` at outage ``level``."""
    x_ref = crossing_db(grid, op_ref, level)
    x_other = crossing_db(grid, op_other, level)
    if x_ref is None or x_other is None:
        raise ValueError(f"a curve does not cross outage level {level:g} inside the grid")
    return x_other - x_ref


@dataclass(frozen=True)
class DiversityReport:
    user: int
    slope: float
    asymptotic: int


def diversity_report(sc: Scenario, grid: Sequence[float], window: tuple[float, float]) -> list[DiversityReport]:
    inside = [x for x in grid if window[0] <= x <= window[1]]
    if len(inside) < 2:
        raise ValueError(f"window {window} holds {len(inside)} grid point(s); need at least 2")
    out = []
    for j in range(1, sc.m + 1):
        curve = outage_curve(j, sc, inside)
        out.append(DiversityReport(j, diversity_slope(curve, window), asymptotic_diversity(j)))
    return out


def iter_engine_agreement(result: SweepResult, trials: int) -> Iterable[tuple[float, int, float, float, float]]:
    """(x, user, analytic, montecarlo, standard error at the analytic value)."""
    ana = {(r.sweep_var, r.user): r.op for r in result.rows if r.engine == "analytic"}
    for r in result.rows:
        if r.engine == "montecarlo" and (r.sweep_var, r.user) in ana:
            p = ana[r.sweep_var, r.user]
            yield r.sweep_var, r.user, p, r.op, math.sqrt(p * (1 - p) / trials)
