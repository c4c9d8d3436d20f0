"""Command-line front end.

    noma-impulsive validate      --config FILE
    noma-impulsive sweep-snr     --config FILE [--grid 0:45:1] [--engines analytic,montecarlo,tdma] --out FILE
    noma-impulsive sweep-backoff --config FILE [--grid 0:10:0.5] ... --out FILE
    noma-impulsive diversity     --config FILE [--grid 0:60:1] [--window 35:50] [--out FILE]
    noma-impulsive simulate      --config FILE [--trials N] [--seed N] [--out FILE]

Every CSV gets a JSON sidecar (same name, ``.json``) echoing the config,
seed and library versions.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__, analytic, montecarlo
from .config import ConfigError, config_to_dict, load_config, validate
from .sweep import (
    DEFAULT_BACKOFF_GRID,
    DEFAULT_SNR_GRID,
    ENGINES,
    SweepError,
    SweepResult,
    SweepRow,
    SweepSpec,
    diversity_report,
    parse_grid,
    parse_window,
    run_sweep,
)


def _load(path):
    return validate(load_config(path))


def write_sidecar(out: Path, command: str, sc, extra: dict):
    meta = {
        "command": command,
        "config": config_to_dict(sc.config),
        "derived": {"a": list(sc.a), "phi": list(sc.phi), "rho_w": sc.rho_w, "rho_I": sc.rho_i},
        **extra,
        "versions": {
            "noma_impulsive": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "mpmath": mpmath.__version__,
        },
    }
    out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_validate(args) -> int:
    sc = _load(args.config)
    print(f"M          = {sc.m}")
    print(f"a          = {', '.join(f'{v:.6g}' for v in sc.a)}")
    print(f"phi        = {', '.join(f'{v:.6g}' for v in sc.phi)}")
    print(f"rho_w      = {sc.rho_w:.6g} ({sc.config.rho_w_db:g} dB)")
    print(f"rho_I      = {sc.rho_i:.6g}")
    for i in range(1, sc.m + 1):
        flag = sc.closed_form_valid(i)
        note = "" if flag else "  -> general engine"
        print(f"user {i}: a_{i} > phi_{i}*sum(a_q, q<{i}): {str(flag).lower()}{note}")
    return 0


def _sweep(args, kind: str) -> int:
    sc = _load(args.config)
    engines = tuple(e.strip() for e in args.engines.split(",") if e.strip())
    spec = SweepSpec(kind, parse_grid(args.grid), engines, args.trials, args.seed, args.tdma_rate_scaling)
    result = run_sweep(sc, spec)
    out = Path(args.out)
    result.write_csv(out)
    write_sidecar(
        out,
        f"sweep-{kind}",
        sc,
        {
            "grid": list(spec.grid),
            "engines": list(spec.engines),
            "trials": spec.trials,
            "seed": spec.seed,
            "chunk_size": montecarlo.CHUNK_SIZE,
            "tdma_rate_scaling": spec.tdma_rate_scaling,
        },
    )
    print(f"wrote {len(result.rows)} rows to {out}")
    return 0


def cmd_sweep_snr(args) -> int:
    return _sweep(args, "snr")


def cmd_sweep_backoff(args) -> int:
    return _sweep(args, "backoff")


def cmd_diversity(args) -> int:
    sc = _load(args.config)
    grid = parse_grid(args.grid)
    window = parse_window(args.window)
    report = diversity_report(sc, grid, window)
    print(f"window {window[0]:g}-{window[1]:g} dB")
    for r in report:
        print(f"user {r.user}: slope {r.slope:.4f}  (asymptotic {r.asymptotic})")
    if args.out:
        out = Path(args.out)
        lines = ["user,slope,asymptotic,window_lo,window_hi"]
        lines += [f"{r.user},{r.slope!r},{r.asymptotic},{window[0]!r},{window[1]!r}" for r in report]
        out.write_text("\n".join(lines) + "\n")
        write_sidecar(out, "diversity", sc, {"grid": list(grid), "window": list(window)})
    return 0


def cmd_simulate(args) -> int:
    sc = _load(args.config)
    noma = montecarlo.estimate_outage(sc, args.trials, args.seed)
    tdma = montecarlo.estimate_tdma_outage(sc, args.trials, args.seed, args.tdma_rate_scaling, key=(1,))
    x = sc.config.rho_w_db
    rows = []
    print(f"rho_w = {x:g} dB, {args.trials} trials, seed {args.seed}")
    for est, t in zip(noma, tdma):
        j = est.user
        ana = analytic.outage(j, sc)
        print(
            f"user {j}: NOMA mc {est.op_hat:.6g} [{est.ci_low:.6g}, {est.ci_high:.6g}]  analytic {ana:.6g}  "
            f"TDMA mc {t.op_hat:.6g}  analytic {analytic.tdma_outage(j, sc, args.tdma_rate_scaling):.6g}"
        )
        rows.append(SweepRow(x, j, "montecarlo", est.op_hat, *est.ci))
        rows.append(SweepRow(x, j, "tdma", t.op_hat, *t.ci))
    if args.out:
        out = Path(args.out)
        SweepResult(rows).write_csv(out)
        write_sidecar(
            out,
            "simulate",
            sc,
            {"trials": args.trials, "seed": args.seed, "chunk_size": montecarlo.CHUNK_SIZE,
             "tdma_rate_scaling": args.tdma_rate_scaling},
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noma-impulsive", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", required=True, help="key = value scenario file")
        p.add_argument("--out", required=out_required, help="output CSV path")

    def mc_flags(p):
        p.add_argument("--trials", type=int, default=1_000_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tdma-rate-scaling", choices=("slots", "none"), default="slots")

    p = sub.add_parser("validate", help="print derived quantities of a config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    for name, func, grid in (
        ("sweep-snr", cmd_sweep_snr, DEFAULT_SNR_GRID),
        ("sweep-backoff", cmd_sweep_backoff, DEFAULT_BACKOFF_GRID),
    ):
        p = sub.add_parser(name, help=f"outage table over a {name[6:]} grid (dB)")
        common(p, out_required=True)
        p.add_argument("--grid", default=grid, help="START:STOP:STEP in dB")
        p.add_argument("--engines", default="analytic", help=f"comma list from {','.join(ENGINES)}")
        mc_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("diversity", help="finite-SNR diversity slopes per user")
    common(p)
    p.add_argument("--grid", default="0:60:1")
    p.add_argument("--window", default="35:50")
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("simulate", help="single-point Monte Carlo at the config's rho_w_db")
    common(p)
    mc_flags(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for e in exc.errors:
            print(f"  - {e}", file=sys.stderr)
        return 2
    except (SweepError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
