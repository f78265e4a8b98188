"""Command-line front end: replay, quote, analyze, simulate.

Every subcommand is a thin shell over the library — numbers in the output
tables come straight from the corresponding library call.  Each run writes
its tables into --out plus a manifest.json describing the run; the data
tables are byte-identical across runs with the same inputs and seeds (the
manifest records wall time and is exempt).

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
import warnings
from dataclasses import replace
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import fixmath as fm
from .analytics import (PairPricing, breakeven_size, concentration_series,
                        full_range_fee_returns, median_concentration, quote,
                        share_above_threshold)
from .blocktime import SimConfig, compare_fcfs, scaling_exponent, simulate
from .errors import CLPoolError, UsageError
from .ingest import (aggregate_stats, load_dataset, load_gas_series,
                     load_router_registry, position_lifecycle_stats, replay,
                     segment_flow, swap_usd_size)

DATA_DIR_ENV = "CLPOOL_DATA_DIR"
SECONDS_PER_YEAR = 365 * 86_400


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _resolve(path: str) -> str:
    """Resolve an input path, falling back to $CLPOOL_DATA_DIR for relative
    names that do not exist as given."""
    p = Path(path)
    if p.exists() or p.is_absolute():
        return str(p)
    base = os.environ.get(DATA_DIR_ENV)
    if base and (Path(base) / p).exists():
        return str(Path(base) / p)
    return str(p)


def _jsonable(value):
    if isinstance(value, Decimal):
        return str(value)
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True)
                    + "\n")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _decimal_flag(value: str, flag: str) -> Decimal:
    try:
        return Decimal(value)
    except InvalidOperation:
        raise UsageError(f"{flag} must be a decimal number, got {value!r}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


class _Run:
    """Collects inputs/outputs for the manifest and writes it on close."""

    def __init__(self, args):
        self.subcommand = args.subcommand
        self.args = {k: str(v) for k, v in sorted(vars(args).items())
                     if k not in ("func", "subcommand") and v is not None}
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.out = _out_dir(args)
        self.t0 = time.monotonic()

    def read(self, path: str) -> str:
        resolved = _resolve(path)
        self.inputs.append(resolved)
        return resolved

    def table(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def finish(self) -> int:
        digest = hashlib.sha256(json.dumps(
            self.args, sort_keys=True).encode()).hexdigest()
        _write_json(self.out / "manifest.json", {
            "subcommand": self.subcommand,
            "inputs": self.inputs,
            "config_hash": digest,
            "tool_version": __version__,
            "outputs": self.outputs,
            "wall_time_seconds": round(time.monotonic() - self.t0, 3),
        })
        return 0


def _direction(args) -> bool:
    return args.direction == "zero-for-one"


def _replayed_pool(run: _Run, events: str, fee: int, tick_spacing):
    dataset = load_dataset(run.read(events))
    return replay(dataset, fee, tick_spacing).pool


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_replay(args) -> int:
    run = _Run(args)
    dataset = load_dataset(run.read(args.events))
    if dataset.pool and dataset.pool != args.pool.lower():
        raise UsageError(f"--pool {args.pool} does not match dataset pool "
                         f"{dataset.pool}")
    res = replay(dataset, args.fee, args.tick_spacing,
                 snapshot_interval=args.snapshot_every)
    state_hash = res.pool.state_hash()

    run.table("final_state.json").write_text(res.pool.snapshot_json() + "\n")
    run.table("state_hash.txt").write_text(state_hash + "\n")
    _write_csv(run.table("snapshots.csv"), ["timestamp", "state_hash"],
               res.snapshots)
    _write_csv(run.table("audits.csv"),
               ["block_number", "log_index", "tx_hash", "field", "recorded",
                "computed"],
               [(a.block_number, a.log_index, a.tx_hash, a.field, a.recorded,
                 a.computed) for a in res.audits])
    print(f"applied {res.events_applied} events, "
          f"{len(res.audits)} audits, state hash {state_hash}")
    return run.finish()


def cmd_quote(args) -> int:
    run = _Run(args)
    pool = _replayed_pool(run, args.events, args.fee, args.tick_spacing)
    q = quote(pool, args.amount_in, _direction(args))
    _write_json(run.table("quote.json"), {
        "amount_in": args.amount_in,
        "direction": args.direction,
        "amount_out": q.amount_out,
        "fee_paid": q.fee_paid,
        "partial": q.partial,
        "end_sqrt_price_x96": str(q.end_sqrt_price),
    })
    print(f"amount_out {q.amount_out}" + (" (partial)" if q.partial else ""))
    return run.finish()


def cmd_concentration(args) -> int:
    run = _Run(args)
    dataset = load_dataset(run.read(args.events))
    profiles = concentration_series(
        dataset, args.fee, args.tick_spacing,
        interval_seconds=args.interval,
        window_half_width_bps=args.window_bps,
        bucket_width_bps=args.bucket_bps)
    _write_csv(run.table("concentration.csv"),
               ["timestamp", "mid_share", "empty"],
               [(p.timestamp, float(p.mid_share), int(p.empty))
                for p in profiles])
    _write_csv(run.table("profiles.csv"),
               ["timestamp", "offset_bps", "share"],
               [(p.timestamp, off, float(share))
                for p in profiles for off, share in p.shares])
    median = median_concentration(profiles) if profiles else None
    _write_json(run.table("summary.json"), {
        "samples": len(profiles),
        "median_mid_share": float(median) if median is not None else None,
    })
    print(f"{len(profiles)} samples")
    return run.finish()


def cmd_breakeven(args) -> int:
    run = _Run(args)
    pool_a = _replayed_pool(run, args.events_a, args.fee_a,
                            args.tick_spacing_a)
    pool_b = _replayed_pool(run, args.events_b, args.fee_b,
                            args.tick_spacing_b)
    pricing = PairPricing(_decimal_flag(args.usd_token0, "--usd-token0"),
                          _decimal_flag(args.usd_token1, "--usd-token1"))
    point = breakeven_size(
        pool_a, _decimal_flag(args.gas_a, "--gas-a"),
        pool_b, _decimal_flag(args.gas_b, "--gas-b"),
        _direction(args), pricing,
        tol_usd=_decimal_flag(args.tol_usd, "--tol-usd"),
        chain_a=args.label_a, chain_b=args.label_b)
    _write_json(run.table("breakeven.json"), {
        "chain_a": point.chain_a,
        "chain_b": point.chain_b,
        "input_token": point.input_token,
        "output_token": point.output_token,
        "breakeven_input_usd": point.breakeven_input_usd,
        "gas_a_usd": point.gas_a_usd,
        "gas_b_usd": point.gas_b_usd,
        "regime": point.regime,
        "degenerate": point.degenerate,
    })
    print(f"breakeven {point.breakeven_input_usd} USD "
          f"(regime {point.regime})")
    return run.finish()


def cmd_fees(args) -> int:
    run = _Run(args)
    if args.flow == "arb-only" and args.registry is None:
        raise UsageError("--flow arb-only requires --registry")
    dataset = load_dataset(run.read(args.events))
    registry = (load_router_registry(run.read(args.registry))
                if args.registry else None)
    flow = {"all": "all", "arb-only": "arbitrage_only"}[args.flow]
    rows, audits = full_range_fee_returns(dataset, args.fee,
                                          args.tick_spacing, flow=flow,
                                          registry=registry)
    _write_csv(run.table("fee_returns.csv"),
               ["day", "pool", "flow", "growth0", "growth1",
                "return_token0_per_L", "return_token1_per_L",
                "return_bps_of_full_range_value"],
               [(r.day.isoformat(), r.pool, r.flow, r.growth0, r.growth1,
                 repr(r.return_token0_per_L), repr(r.return_token1_per_L),
                 repr(r.return_bps_of_full_range_value)) for r in rows])
    _write_json(run.table("summary.json"), {
        "days": len(rows),
        "flow": flow,
        "audits": audits,
    })
    print(f"{len(rows)} days, {len(audits)} audits")
    return run.finish()


def cmd_stats(args) -> int:
    run = _Run(args)
    dataset = load_dataset(run.read(args.events))
    series = load_gas_series(run.read(args.gas_series))
    stats = {"aggregate": aggregate_stats(dataset, series)}

    sized = dataset.swaps()
    if args.registry:
        registry = load_router_registry(run.read(args.registry))
        labels, counts = segment_flow(dataset, registry)
        stats["flow_counts"] = counts
        retail = {(l.tx_hash, l.log_index)
                  for l in labels if l.label == "retail"}
        sized = [e for e in sized if (e.tx_hash, e.log_index) in retail]
        stats["sized_flow"] = "retail"
    else:
        stats["sized_flow"] = "all"

    thresholds = []
    if args.thresholds and sized:
        sizes = [swap_usd_size(e, series) for e in sized]
        for raw in args.thresholds.split(","):
            t = _decimal_flag(raw.strip(), "--thresholds")
            share = share_above_threshold(sizes, t)
            thresholds.append({
                "threshold_usd": t,
                "share_above": float(share),
                "count_above": sum(1 for s in sizes if s > t),
                "swap_count": len(sizes),
            })
    stats["thresholds"] = thresholds

    if args.fee is not None or args.tick_spacing is not None:
        spacing = args.tick_spacing
        if spacing is None:
            spacing = fm.tick_spacing_for_fee(args.fee)
        stats["lifecycle"] = {
            "all": position_lifecycle_stats(dataset, spacing),
            "excluding_single_spacing": position_lifecycle_stats(
                dataset, spacing, exclude_single_spacing=True),
        }

    _write_json(run.table("stats.json"), stats)
    print(f"{stats['aggregate']['swap_count']} swaps")
    return run.finish()


def cmd_simulate(args) -> int:
    run = _Run(args)
    if (args.sigma is None) == (args.sigma_annual is None):
        raise UsageError("exactly one of --sigma / --sigma-annual required")
    sigma = (args.sigma if args.sigma is not None
             else args.sigma_annual / math.sqrt(SECONDS_PER_YEAR))
    taus = [float(t) for t in args.tau_grid.split(",")]
    base = SimConfig(sigma=sigma, gamma=args.gamma, tau=taus[0],
                     horizon_seconds=args.horizon, paths=args.paths,
                     seed=args.seed, pool_value_usd=args.pool_value,
                     price0=args.price0, arb_gas_usd=args.arb_gas)

    rows = []
    profits = []
    for tau in taus:
        r = simulate(replace(base, tau=tau))
        profits.append(r.arb_profit_per_day_usd_mean)
        rows.append((repr(tau), repr(r.fees_per_day_usd_mean),
                     repr(r.fees_per_day_usd_se),
                     repr(r.arb_profit_per_day_usd_mean),
                     repr(r.arb_profit_per_day_usd_se),
                     repr(r.trades_per_day), r.paths))
    _write_csv(run.table("simulate.csv"),
               ["tau", "fees_per_day_usd_mean", "fees_per_day_usd_se",
                "arb_profit_per_day_usd_mean", "arb_profit_per_day_usd_se",
                "trades_per_day", "paths"], rows)

    summary = {"taus": taus, "paths": args.paths, "seed": args.seed}
    positive = sum(1 for p in profits if p > 0)
    if len(taus) >= 2 and positive >= 2:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            summary["scaling_exponent"] = scaling_exponent(taus, profits)
    else:
        summary["scaling_exponent"] = None

    if args.fcfs:
        fast, slow = (float(t) for t in args.fcfs.split(","))
        summary["fcfs"] = compare_fcfs(replace(base, tau=fast), fast, slow)
    _write_json(run.table("summary.json"), summary)
    print(f"{len(taus)} grid points, "
          f"scaling exponent {summary['scaling_exponent']}")
    return run.finish()


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_pool_flags(p, suffix=""):
    dash = f"-{suffix}" if suffix else ""
    us = f"_{suffix}" if suffix else ""
    p.add_argument(f"--events{dash}", dest=f"events{us}", required=True,
                   help="events CSV")
    p.add_argument(f"--fee{dash}", dest=f"fee{us}", type=int, required=True,
                   help="pool fee in pips")
    p.add_argument(f"--tick-spacing{dash}", dest=f"tick_spacing{us}",
                   type=int, default=None,
                   help="override tick spacing (default: by fee tier)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clpool",
        description="Concentrated-liquidity pool replay and analytics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("replay", help="re-execute an event stream")
    _add_pool_flags(p)
    p.add_argument("--pool", required=True, help="pool address")
    p.add_argument("--snapshot-every", type=int, default=900,
                   help="snapshot grid interval in seconds")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("quote", help="quote a swap against replayed state")
    _add_pool_flags(p)
    p.add_argument("--amount-in", type=int, required=True)
    p.add_argument("--direction", choices=["zero-for-one", "one-for-zero"],
                   default="zero-for-one")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quote)

    analyze = sub.add_parser("analyze", help="analytics tables")
    asub = analyze.add_subparsers(dest="analysis", required=True)

    p = asub.add_parser("concentration", help="liquidity near mid over time")
    _add_pool_flags(p)
    p.add_argument("--interval", type=int, default=900)
    p.add_argument("--window-bps", type=int, default=200)
    p.add_argument("--bucket-bps", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_concentration)

    p = asub.add_parser("breakeven",
                        help="venue-indifference trade size for two pools")
    _add_pool_flags(p, "a")
    _add_pool_flags(p, "b")
    p.add_argument("--gas-a", required=True, help="swap gas cost USD")
    p.add_argument("--gas-b", required=True, help="swap gas cost USD")
    p.add_argument("--usd-token0", required=True,
                   help="USD per raw token0 unit")
    p.add_argument("--usd-token1", required=True,
                   help="USD per raw token1 unit")
    p.add_argument("--direction", choices=["zero-for-one", "one-for-zero"],
                   default="zero-for-one")
    p.add_argument("--tol-usd", default="0.25")
    p.add_argument("--label-a", default="a")
    p.add_argument("--label-b", default="b")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_breakeven)

    p = asub.add_parser("fees", help="daily full-range fee returns")
    _add_pool_flags(p)
    p.add_argument("--flow", choices=["all", "arb-only"], default="all")
    p.add_argument("--registry", default=None,
                   help="router registry JSON (required for arb-only)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fees)

    p = asub.add_parser("stats", help="swap / position statistics")
    p.add_argument("--events", required=True)
    p.add_argument("--gas-series", required=True)
    p.add_argument("--registry", default=None)
    p.add_argument("--thresholds", default="25000,125000",
                   help="comma-separated USD size thresholds")
    p.add_argument("--fee", type=int, default=None,
                   help="enable lifecycle stats for this fee tier")
    p.add_argument("--tick-spacing", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("simulate", help="block-time Monte Carlo")
    p.add_argument("--sigma", type=float, default=None,
                   help="volatility per sqrt-second")
    p.add_argument("--sigma-annual", type=float, default=None,
                   help="annualized volatility, e.g. 0.8")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tau-grid", required=True,
                   help="comma-separated block times in seconds")
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=3600.0)
    p.add_argument("--pool-value", type=float, default=1_000_000.0)
    p.add_argument("--price0", type=float, default=1_850.0)
    p.add_argument("--arb-gas", type=float, default=0.0)
    p.add_argument("--fcfs", default=None,
                   help="tau_fast,tau_slow paired comparison")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLPoolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
