"""Dataframe bindings over the ``clpool`` command-line tool.

Every operation shells out to the installed tool and parses the tables
it writes; nothing here imports the engine.  That pins the bindings to
the tool's stable outward surface — command-line flags, the events CSV
format, the JSON/CSV output tables, and the snapshot serialization —
instead of library internals, so replayed state and analysis results
drop straight into pandas workflows with numbers identical to the
tool's own output files.

The tool is located via $CLPOOL_BIN, then ``clpool`` on PATH, then
``python -m clpool`` in the current interpreter.  Input paths are
handed to the tool as given, so its $CLPOOL_DATA_DIR resolution still
applies.  A nonzero exit is re-raised as CLIError carrying the tool's
stderr message verbatim.
"""

import csv
import json
import os
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

BIN_ENV = "CLPOOL_BIN"

DIRECTIONS = ("zero-for-one", "one-for-zero")

# Flags each analysis accepts (events/fee flags first, in the order the
# command line is assembled).
_ANALYSIS_FLAGS = {
    "concentration": ("events", "fee", "tick_spacing", "interval",
                      "window_bps", "bucket_bps"),
    "breakeven": ("events_a", "fee_a", "tick_spacing_a",
                  "events_b", "fee_b", "tick_spacing_b",
                  "gas_a", "gas_b", "usd_token0", "usd_token1",
                  "direction", "tol_usd", "label_a", "label_b"),
    "fees": ("events", "fee", "tick_spacing", "flow", "registry"),
    "stats": ("events", "gas_series", "registry", "thresholds",
              "fee", "tick_spacing"),
}


class BindingsError(RuntimeError):
    """The tool's output could not be bound (format drift, bad usage)."""


class CLIError(BindingsError):
    """The tool exited nonzero; str(exc) is its stderr error message."""

    def __init__(self, message: str, returncode: int, stderr: str):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


# ---------------------------------------------------------------------------
# subprocess plumbing
# ---------------------------------------------------------------------------

def tool_argv() -> list[str]:
    """Command prefix used to invoke the tool."""
    override = os.environ.get(BIN_ENV)
    if override:
        return [override]
    exe = shutil.which("clpool")
    if exe:
        return [exe]
    return [sys.executable, "-m", "clpool"]


def tool_version() -> str:
    proc = subprocess.run(tool_argv() + ["--version"],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise CLIError(proc.stderr.strip() or "clpool --version failed",
                       proc.returncode, proc.stderr)
    return proc.stdout.strip()


def _run(argv: list[str], out: Path) -> None:
    """Invoke one subcommand writing into out/; raise CLIError on failure."""
    proc = subprocess.run(tool_argv() + argv + ["--out", str(out)],
                          capture_output=True, text=True)
    if proc.returncode == 0:
        return
    message = proc.stderr.strip()
    if message.startswith("error: "):
        message = message[len("error: "):]
    raise CLIError(message or f"clpool exited {proc.returncode}",
                   proc.returncode, proc.stderr)


def _csv_frame(path: Path, columns: dict) -> pd.DataFrame:
    """Parse one output CSV with per-column converters.

    Integer columns are converted through Python int so values wider
    than 64 bits (fee-growth deltas) survive exactly; pandas falls back
    to object dtype for those.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != list(columns):
            raise BindingsError(f"{path.name}: expected columns "
                                f"{list(columns)}, tool wrote {header}")
        rows = list(reader)
    return pd.DataFrame({name: [conv(row[i]) for row in rows]
                         for i, (name, conv) in enumerate(columns.items())})


# ---------------------------------------------------------------------------
# replay handles and quoting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundPool:
    """Immutable handle to a replayed pool.

    state_hash is the tool's replay hash — the sha256 of snapshot_json,
    so the handle is self-verifying.  Methods never mutate the snapshot;
    quoting and analysis replay the recorded stream in a scratch
    directory each call, which keeps handles safe to share and quote
    concurrently at the cost of a replay per call.
    """
    events_path: str
    pool: str
    fee: int
    tick_spacing: int | None
    state_hash: str
    snapshot_json: str
    audits: int

    @property
    def snapshot(self) -> dict:
        """Deserialized final pool state; a fresh dict on every access."""
        return json.loads(self.snapshot_json)


@dataclass(frozen=True)
class BoundQuote:
    """Exact-input quote; partial flags quotes that ran the pool dry."""
    amount_out: int
    fee_paid: int
    partial: bool
    end_sqrt_price_x96: int


def bind_load_and_replay(events_path, pool: str, fee: int,
                         tick_spacing: int | None = None) -> BoundPool:
    """Replay a recorded event stream into an immutable BoundPool.

    fee is the pool's fee tier in pips (the events format carries it out
    of band).  Tool errors — unreadable file, schema violations, pool
    address mismatch — are re-raised as CLIError with the tool's text.
    """
    events_path = str(events_path)
    argv = ["replay", "--events", events_path, "--fee", str(fee),
            "--pool", pool]
    if tick_spacing is not None:
        argv += ["--tick-spacing", str(tick_spacing)]
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        _run(argv, out)
        state_hash = (out / "state_hash.txt").read_text().strip()
        snapshot_json = (out / "final_state.json").read_text().strip()
        with open(out / "audits.csv", newline="") as fh:
            audits = sum(1 for _ in csv.reader(fh)) - 1
    return BoundPool(events_path=events_path, pool=pool, fee=fee,
                     tick_spacing=tick_spacing, state_hash=state_hash,
                     snapshot_json=snapshot_json, audits=audits)


def bind_quote(handle: BoundPool, amount_in: int,
               direction: str = "zero-for-one") -> BoundQuote:
    """Quote an exact-input swap against the handle's replayed state.

    Numbers are the tool's own quote output parsed back to ints, so they
    are integer-identical to ``clpool quote`` on the same stream.
    """
    if not isinstance(handle, BoundPool):
        raise TypeError(f"expected BoundPool, got {type(handle).__name__}")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, "
                         f"got {direction!r}")
    argv = ["quote", "--events", handle.events_path,
            "--fee", str(handle.fee),
            "--amount-in", str(amount_in), "--direction", direction]
    if handle.tick_spacing is not None:
        argv += ["--tick-spacing", str(handle.tick_spacing)]
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        _run(argv, out)
        doc = json.loads((out / "quote.json").read_text())
    return BoundQuote(amount_out=doc["amount_out"],
                      fee_paid=doc["fee_paid"],
                      partial=doc["partial"],
                      end_sqrt_price_x96=int(doc["end_sqrt_price_x96"]))


# ---------------------------------------------------------------------------
# analysis tables
# ---------------------------------------------------------------------------

def _concentration_frame(out: Path) -> pd.DataFrame:
    return _csv_frame(out / "concentration.csv",
                      {"timestamp": int, "mid_share": float, "empty": int})


def _fees_frame(out: Path) -> pd.DataFrame:
    return _csv_frame(out / "fee_returns.csv", {
        "day": str, "pool": str, "flow": str,
        "growth0": int, "growth1": int,
        "return_token0_per_L": float, "return_token1_per_L": float,
        "return_bps_of_full_range_value": float})


def _stats_frame(out: Path) -> pd.DataFrame:
    doc = json.loads((out / "stats.json").read_text())
    cols = ("threshold_usd", "share_above", "count_above", "swap_count")
    return pd.DataFrame({c: [row[c] for row in doc["thresholds"]]
                         for c in cols})


def _breakeven_frame(out: Path) -> pd.DataFrame:
    doc = json.loads((out / "breakeven.json").read_text())
    cols = ("chain_a", "chain_b", "input_token", "output_token",
            "breakeven_input_usd", "gas_a_usd", "gas_b_usd",
            "regime", "degenerate")
    return pd.DataFrame({c: [doc[c]] for c in cols})


_FRAME_READERS = {
    "concentration": _concentration_frame,
    "fees": _fees_frame,
    "stats": _stats_frame,
    "breakeven": _breakeven_frame,
}


def _source_params(source, analysis: str) -> dict:
    """Normalize the source argument into tool flag values."""
    if isinstance(source, dict):
        return dict(source)
    if analysis == "breakeven":
        if (isinstance(source, (tuple, list)) and len(source) == 2
                and all(isinstance(p, BoundPool) for p in source)):
            a, b = source
            params = {"events_a": a.events_path, "fee_a": a.fee,
                      "events_b": b.events_path, "fee_b": b.fee}
            if a.tick_spacing is not None:
                params["tick_spacing_a"] = a.tick_spacing
            if b.tick_spacing is not None:
                params["tick_spacing_b"] = b.tick_spacing
            return params
        raise TypeError("breakeven takes a (BoundPool, BoundPool) pair "
                        "or a mapping of flag values")
    if isinstance(source, BoundPool):
        params = {"events": source.events_path}
        if analysis != "stats":  # stats takes --fee only to opt into lifecycle
            params["fee"] = source.fee
            if source.tick_spacing is not None:
                params["tick_spacing"] = source.tick_spacing
        return params
    raise TypeError(f"expected BoundPool or mapping, "
                    f"got {type(source).__name__}")


def bind_tables(source, analysis: str, params: dict | None = None
                ) -> pd.DataFrame:
    """Run one analysis and bind its result table as a DataFrame.

    source: a BoundPool (a pair of them for breakeven), or a mapping of
    flag values such as {"events": ..., "fee": ...}.  params: further
    flag values by name (underscores for dashes: window_bps, gas_a,
    gas_series, ...); they override what the source contributed.

    Tables bind column-for-column to the tool's output: concentration →
    concentration.csv, fees → fee_returns.csv, stats → the size-threshold
    rows of stats.json, breakeven → the one-row breakeven.json result.
    Parameter validation beyond flag names is the tool's own (CLIError).
    """
    if analysis not in _ANALYSIS_FLAGS:
        raise ValueError(f"unknown analysis {analysis!r}; expected one of "
                         + ", ".join(sorted(_ANALYSIS_FLAGS)))
    merged = _source_params(source, analysis)
    merged.update(params or {})
    unknown = sorted(set(merged) - set(_ANALYSIS_FLAGS[analysis]))
    if unknown:
        raise ValueError(f"{analysis} does not take: " + ", ".join(unknown))
    argv = ["analyze", analysis]
    for key in _ANALYSIS_FLAGS[analysis]:
        if merged.get(key) is not None:
            argv += ["--" + key.replace("_", "-"), str(merged[key])]
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        _run(argv, out)
        return _FRAME_READERS[analysis](out)
