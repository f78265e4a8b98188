"""Shared fixture set and raw tool invocation.

Everything here talks to the tool the way any outside consumer would:
subprocess plus hand-written input files.  Nothing imports the engine —
run_cli is the independent side of every parity check.
"""

import csv
import subprocess
from pathlib import Path

from clpool_bindings.shell import tool_argv

DATA = Path(__file__).parent / "data"
EVENTS = DATA / "events.csv"
REGISTRY = DATA / "registry.json"
GAS = DATA / "gas.csv"

CHAIN = "l2-sim"
POOL = "0x" + "f0" * 20
LP = "0x" + "01" * 20
FEE = 500

# Input format of the tool: one row per event, blanks for unset fields.
EVENT_COLUMNS = [
    "schema_version", "chain", "pool", "block_number", "timestamp",
    "tx_hash", "log_index", "kind", "owner", "tick_lower", "tick_upper",
    "liquidity_delta", "amount0", "amount1", "sqrt_price_x96",
    "liquidity_after", "tick_after", "tx_to", "gas_fee_usd",
]

Q96 = 2 ** 96        # sqrt price of 1.0 in the tool's Q64.96 format


def run_cli(*argv, out=None):
    cmd = tool_argv() + [str(a) for a in argv]
    if out is not None:
        cmd += ["--out", str(out)]
    return subprocess.run(cmd, capture_output=True, text=True)


def event_row(block, log, kind, **fields):
    base = {"schema_version": "1", "chain": CHAIN, "pool": POOL,
            "block_number": block, "timestamp": 1_700_000_000 + 2 * block,
            "tx_hash": f"0x{block:08x}{log:02x}", "log_index": log,
            "kind": kind}
    base.update(fields)
    return [str(base.get(c, "")) for c in EVENT_COLUMNS]


def write_events(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENT_COLUMNS)
        writer.writerows(rows)


def write_single_position_pool(path, liquidity, lower=-887_270,
                               upper=887_270):
    """Initialize at price 1.0 plus one position.  At tick 0 the sqrt
    price is exactly 2**96, so the rows can be written by hand."""
    write_events(path, [
        event_row(1, 0, "Initialize", sqrt_price_x96=Q96, tick_after=0),
        event_row(1, 1, "Mint", owner=LP, tick_lower=lower,
                  tick_upper=upper, liquidity_delta=liquidity),
    ])
