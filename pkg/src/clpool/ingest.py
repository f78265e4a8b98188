"""Event-log ingestion, chronological replay, flow segmentation, and
dataset-level statistics.

Event files are one CSV per (chain, pool) with a versioned header; amounts
are decimal strings, unused columns empty.  Replay re-executes every event
through the pool engine and audits recorded post-swap state against computed
state — mismatches are surfaced, never corrected.  Swaps are labeled retail
or arbitrage purely by whether the transaction's outermost call target is in
a router registry.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import fixmath as fm
from .engine import Pool
from .errors import CoverageError, DomainError, SchemaError, StateError

SCHEMA_VERSION = "1"

EVENT_COLUMNS = [
    "schema_version", "chain", "pool", "block_number", "timestamp",
    "tx_hash", "log_index", "kind", "owner", "tick_lower", "tick_upper",
    "liquidity_delta", "amount0", "amount1", "sqrt_price_x96",
    "liquidity_after", "tick_after", "tx_to", "gas_fee_usd",
]

EVENT_KINDS = ("Initialize", "Mint", "Burn", "Swap")

REGISTRY_LABELS = ("interface", "aggregator", "other-retail")


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass
class PoolEvent:
    chain: str
    pool: str
    block_number: int
    timestamp: int
    tx_hash: str
    log_index: int
    kind: str
    owner: str = ""
    tick_lower: int | None = None
    tick_upper: int | None = None
    liquidity_delta: int | None = None
    amount0: int | None = None
    amount1: int | None = None
    sqrt_price_x96: int | None = None
    liquidity_after: int | None = None
    tick_after: int | None = None
    tx_to: str = ""
    gas_fee_usd: Decimal | None = None

    @property
    def order_key(self) -> tuple[int, int]:
        return (self.block_number, self.log_index)


@dataclass
class ChainDataset:
    chain: str
    pool: str
    events: list[PoolEvent] = field(default_factory=list)
    block_time_seconds: float | None = None

    def swaps(self) -> list[PoolEvent]:
        return [e for e in self.events if e.kind == "Swap"]


@dataclass
class RouterRegistry:
    chain: str
    entries: dict[str, tuple[str, str]]  # address -> (label, note)

    def __contains__(self, address: str) -> bool:
        return address.lower() in self.entries


@dataclass
class FlowLabel:
    tx_hash: str
    log_index: int
    label: str  # "retail" | "arbitrage"


@dataclass
class GasSeries:
    """Step function over time: (gas_fee_usd for a representative swap,
    native_usd = USD per raw token1 unit), last observation carried forward."""
    timestamps: list[int]
    gas_fee_usd: list[Decimal]
    native_usd: list[Decimal]

    def _index_for(self, ts: int) -> int:
        import bisect
        i = bisect.bisect_right(self.timestamps, ts) - 1
        if i < 0:
            raise CoverageError(
                f"timestamp {ts} precedes series start {self.timestamps[0]}")
        return i

    def gas_at(self, ts: int) -> Decimal:
        return self.gas_fee_usd[self._index_for(ts)]

    def native_usd_at(self, ts: int) -> Decimal:
        return self.native_usd[self._index_for(ts)]

    def check_coverage(self, timestamps) -> None:
        if not self.timestamps:
            raise CoverageError("empty pricing series")
        uncovered = [t for t in timestamps
                     if t < self.timestamps[0] or t > self.timestamps[-1]]
        if uncovered:
            raise CoverageError(
                f"series covers [{self.timestamps[0]}, {self.timestamps[-1]}] "
                f"but events span [{min(uncovered)}, {max(uncovered)}] "
                f"outside it ({len(uncovered)} uncovered)")


@dataclass
class ReplayAudit:
    """One recorded-vs-computed mismatch found during replay."""
    block_number: int
    log_index: int
    tx_hash: str
    field: str
    recorded: int
    computed: int


@dataclass
class ReplayResult:
    pool: Pool
    snapshots: list[tuple[int, str]]          # (grid timestamp, state hash)
    audits: list[ReplayAudit]
    events_applied: int


class ReplayError(StateError):
    def __init__(self, event: PoolEvent, message: str):
        super().__init__(
            f"event {event.kind} at block {event.block_number} "
            f"log {event.log_index} ({event.tx_hash}): {message}")
        self.event = event


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _parse_int(value: str, column: str, path, line) -> int:
    try:
        return int(value)
    except ValueError:
        raise SchemaError(f"column {column!r} is not an integer: {value!r}",
                          path=path, line=line) from None


def _parse_opt_int(value: str, column: str, path, line) -> int | None:
    if value == "":
        return None
    return _parse_int(value, column, path, line)


def _format_opt(value) -> str:
    return "" if value is None else str(value)


# ---------------------------------------------------------------------------
# loading / writing
# ---------------------------------------------------------------------------

def load_dataset(path, schema_version: str = SCHEMA_VERSION) -> ChainDataset:
    """Load and fully validate one (chain, pool) event file.

    Malformed rows are reported with their line number; events must be
    strictly ordered by (block_number, log_index) with non-decreasing
    timestamps.
    """
    path = Path(path)
    events: list[PoolEvent] = []
    chain = pool = None

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("missing header", path=str(path), line=1) from None
        if header != EVENT_COLUMNS:
            raise SchemaError(
                f"header mismatch: expected {','.join(EVENT_COLUMNS)}",
                path=str(path), line=1)

        prev_key = None
        prev_ts = None
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(EVENT_COLUMNS):
                raise SchemaError(f"expected {len(EVENT_COLUMNS)} columns, "
                                  f"got {len(row)}", path=str(path), line=line_no)
            rec = dict(zip(EVENT_COLUMNS, row))
            if rec["schema_version"] != schema_version:
                raise SchemaError(
                    f"schema_version {rec['schema_version']!r} != "
                    f"{schema_version!r}", path=str(path), line=line_no)
            if chain is None:
                chain, pool = rec["chain"], rec["pool"]
            elif rec["chain"] != chain or rec["pool"] != pool:
                raise SchemaError(
                    "file mixes multiple (chain, pool) streams",
                    path=str(path), line=line_no)
            if rec["kind"] not in EVENT_KINDS:
                raise SchemaError(f"unknown event kind {rec['kind']!r}",
                                  path=str(path), line=line_no)

            gas = None
            if rec["gas_fee_usd"]:
                try:
                    gas = Decimal(rec["gas_fee_usd"])
                except InvalidOperation:
                    raise SchemaError(
                        f"bad gas_fee_usd {rec['gas_fee_usd']!r}",
                        path=str(path), line=line_no) from None
                if gas < 0:
                    raise SchemaError("negative gas_fee_usd",
                                      path=str(path), line=line_no)

            ev = PoolEvent(
                chain=rec["chain"], pool=rec["pool"],
                block_number=_parse_int(rec["block_number"], "block_number",
                                        str(path), line_no),
                timestamp=_parse_int(rec["timestamp"], "timestamp",
                                     str(path), line_no),
                tx_hash=rec["tx_hash"],
                log_index=_parse_int(rec["log_index"], "log_index",
                                     str(path), line_no),
                kind=rec["kind"], owner=rec["owner"],
                tick_lower=_parse_opt_int(rec["tick_lower"], "tick_lower",
                                          str(path), line_no),
                tick_upper=_parse_opt_int(rec["tick_upper"], "tick_upper",
                                          str(path), line_no),
                liquidity_delta=_parse_opt_int(rec["liquidity_delta"],
                                               "liquidity_delta",
                                               str(path), line_no),
                amount0=_parse_opt_int(rec["amount0"], "amount0",
                                       str(path), line_no),
                amount1=_parse_opt_int(rec["amount1"], "amount1",
                                       str(path), line_no),
                sqrt_price_x96=_parse_opt_int(rec["sqrt_price_x96"],
                                              "sqrt_price_x96",
                                              str(path), line_no),
                liquidity_after=_parse_opt_int(rec["liquidity_after"],
                                               "liquidity_after",
                                               str(path), line_no),
                tick_after=_parse_opt_int(rec["tick_after"], "tick_after",
                                          str(path), line_no),
                tx_to=rec["tx_to"], gas_fee_usd=gas,
            )

            _validate_event(ev, str(path), line_no)

            key = ev.order_key
            if prev_key is not None and key <= prev_key:
                raise SchemaError(
                    f"out of order: (block, log) {key} after {prev_key}",
                    path=str(path), line=line_no)
            if prev_ts is not None and ev.timestamp < prev_ts:
                raise SchemaError(
                    f"timestamp {ev.timestamp} decreases (prev {prev_ts})",
                    path=str(path), line=line_no)
            prev_key, prev_ts = key, ev.timestamp
            events.append(ev)

    return ChainDataset(chain=chain or "", pool=pool or "", events=events)


def _validate_event(ev: PoolEvent, path: str, line: int) -> None:
    def need(cond, msg):
        if not cond:
            raise SchemaError(f"{ev.kind}: {msg}", path=path, line=line)

    if ev.kind == "Initialize":
        need(ev.sqrt_price_x96 is not None, "missing sqrt_price_x96")
        need(ev.tick_after is not None, "missing tick_after")
    elif ev.kind in ("Mint", "Burn"):
        need(ev.owner != "", "missing owner")
        need(ev.tick_lower is not None and ev.tick_upper is not None,
             "missing tick bounds")
        need(ev.tick_lower < ev.tick_upper, "empty tick range")
        need(ev.liquidity_delta is not None, "missing liquidity_delta")
        need(ev.liquidity_delta >= 0, "negative liquidity_delta")
    else:  # Swap
        need(ev.amount0 is not None and ev.amount1 is not None,
             "missing amounts")
        need(ev.sqrt_price_x96 is not None, "missing post-swap sqrt_price_x96")
        need(ev.liquidity_after is not None, "missing liquidity_after")
        need(ev.liquidity_after >= 0, "negative liquidity_after")
        need(ev.tick_after is not None, "missing tick_after")


def write_dataset(dataset: ChainDataset, path) -> None:
    """Inverse of load_dataset; loading the written file reproduces it
    byte-identically."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENT_COLUMNS)
        for ev in dataset.events:
            writer.writerow([
                SCHEMA_VERSION, ev.chain, ev.pool, str(ev.block_number),
                str(ev.timestamp), ev.tx_hash, str(ev.log_index), ev.kind,
                ev.owner, _format_opt(ev.tick_lower), _format_opt(ev.tick_upper),
                _format_opt(ev.liquidity_delta), _format_opt(ev.amount0),
                _format_opt(ev.amount1), _format_opt(ev.sqrt_price_x96),
                _format_opt(ev.liquidity_after), _format_opt(ev.tick_after),
                ev.tx_to, _format_opt(ev.gas_fee_usd),
            ])


def load_router_registry(path) -> RouterRegistry:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", path=str(path)) from None
    if not isinstance(doc, dict) or "chain" not in doc or "entries" not in doc:
        raise SchemaError("registry needs 'chain' and 'entries'", path=str(path))
    entries: dict[str, tuple[str, str]] = {}
    for i, row in enumerate(doc["entries"]):
        addr = row.get("address", "").lower()
        label = row.get("label", "")
        if not addr:
            raise SchemaError(f"entry {i}: missing address", path=str(path))
        if label not in REGISTRY_LABELS:
            raise SchemaError(
                f"entry {i}: label {label!r} not one of {REGISTRY_LABELS}",
                path=str(path))
        if addr in entries:
            raise SchemaError(f"entry {i}: duplicate address {addr}",
                              path=str(path))
        entries[addr] = (label, row.get("note", ""))
    return RouterRegistry(chain=doc["chain"], entries=entries)


def load_gas_series(path) -> GasSeries:
    path = Path(path)
    timestamps: list[int] = []
    gas: list[Decimal] = []
    native: list[Decimal] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("missing header", path=str(path), line=1) from None
        if header != ["timestamp", "gas_fee_usd", "native_usd"]:
            raise SchemaError("header mismatch: expected "
                              "timestamp,gas_fee_usd,native_usd",
                              path=str(path), line=1)
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise SchemaError("expected 3 columns", path=str(path),
                                  line=line_no)
            ts = _parse_int(row[0], "timestamp", str(path), line_no)
            if timestamps and ts < timestamps[-1]:
                raise SchemaError(f"timestamp {ts} decreases",
                                  path=str(path), line=line_no)
            try:
                g, n = Decimal(row[1]), Decimal(row[2])
            except InvalidOperation:
                raise SchemaError("bad decimal value", path=str(path),
                                  line=line_no) from None
            if g < 0 or n < 0:
                raise SchemaError("negative value", path=str(path), line=line_no)
            timestamps.append(ts)
            gas.append(g)
            native.append(n)
    return GasSeries(timestamps, gas, native)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def apply_event(pool: Pool, ev: PoolEvent, check=None) -> None:
    """Apply one recorded event to a pool.

    Swaps re-run as exact-input swaps of the recorded input amount (the
    positive side).  When check is given it is called as
    check(field, recorded, computed) for every recorded post-state field
    that is present, so callers can audit without correcting.  Events the
    engine rejects raise ReplayError with the event's coordinates.
    """
    def note(fieldname, recorded, computed):
        if check is not None and recorded is not None:
            check(fieldname, recorded, computed)

    try:
        if ev.kind == "Initialize":
            pool.initialize(ev.sqrt_price_x96)
            note("tick_after", ev.tick_after, pool.tick)
        elif ev.kind == "Mint":
            a0, a1 = pool.mint(ev.owner, ev.tick_lower, ev.tick_upper,
                               ev.liquidity_delta)
            note("amount0", ev.amount0, a0)
            note("amount1", ev.amount1, a1)
        elif ev.kind == "Burn":
            a0, a1 = pool.burn(ev.owner, ev.tick_lower, ev.tick_upper,
                               ev.liquidity_delta)
            note("amount0", ev.amount0, a0)
            note("amount1", ev.amount1, a1)
        else:  # Swap: re-run as exact input of the recorded input amount
            if ev.amount0 is not None and ev.amount0 > 0:
                pool.swap(True, ev.amount0)
            elif ev.amount1 is not None and ev.amount1 > 0:
                pool.swap(False, ev.amount1)
            else:
                raise ReplayError(ev, "no positive input amount")
            note("sqrt_price_x96", ev.sqrt_price_x96, pool.sqrt_price)
            note("tick_after", ev.tick_after, pool.tick)
            note("liquidity_after", ev.liquidity_after, pool.liquidity)
    except (DomainError, StateError) as exc:
        if isinstance(exc, ReplayError):
            raise
        raise ReplayError(ev, str(exc)) from exc


def replay(dataset: ChainDataset, fee_pips: int,
           tick_spacing: int | None = None,
           until: tuple[int, int] | None = None,
           snapshot_interval: int | None = None) -> ReplayResult:
    """Re-execute a dataset's events through the pool engine.

    Swaps are re-run as exact-input swaps of the recorded input amount;
    every recorded post-swap field (and recorded mint/burn amounts, when
    present) is audited against the computed state.  Snapshots are emitted
    on a fixed wall-clock grid of snapshot_interval seconds when requested.
    Events that cannot be applied at all raise ReplayError with coordinates.
    """
    if tick_spacing is None:
        tick_spacing = fm.tick_spacing_for_fee(fee_pips)
    pool = Pool(fee_pips, tick_spacing)
    snapshots: list[tuple[int, str]] = []
    audits: list[ReplayAudit] = []
    applied = 0
    next_grid: int | None = None

    for ev in dataset.events:
        if until is not None and ev.order_key > until:
            break

        if snapshot_interval:
            if next_grid is None:
                next_grid = (ev.timestamp // snapshot_interval + 1) \
                    * snapshot_interval
            while ev.timestamp >= next_grid:
                snapshots.append((next_grid, pool.state_hash()))
                next_grid += snapshot_interval

        def check(fieldname, recorded, computed, ev=ev):
            if recorded != computed:
                audits.append(ReplayAudit(ev.block_number, ev.log_index,
                                          ev.tx_hash, fieldname,
                                          recorded, computed))

        apply_event(pool, ev, check)
        applied += 1

    return ReplayResult(pool=pool, snapshots=snapshots, audits=audits,
                        events_applied=applied)


# ---------------------------------------------------------------------------
# flow segmentation
# ---------------------------------------------------------------------------

def segment_flow(dataset: ChainDataset,
                 registry: RouterRegistry) -> tuple[list[FlowLabel], dict]:
    """Label every swap retail or arbitrage by registry membership of tx_to.

    Returns the labels plus counts; retail + arbitrage always equals the
    total swap count.
    """
    if registry.chain != dataset.chain:
        raise DomainError(
            f"registry chain {registry.chain!r} != dataset chain "
            f"{dataset.chain!r}")
    labels: list[FlowLabel] = []
    counts = {"retail": 0, "arbitrage": 0}
    for ev in dataset.events:
        if ev.kind != "Swap":
            continue
        label = "retail" if ev.tx_to in registry else "arbitrage"
        counts[label] += 1
        labels.append(FlowLabel(ev.tx_hash, ev.log_index, label))
    return labels, counts


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def lower_median(values):
    """Median with the lower-of-two-middles convention; None when empty."""
    ordered = sorted(values)
    if not ordered:
        return None
    return ordered[(len(ordered) - 1) // 2]


def swap_usd_size(ev: PoolEvent, series: GasSeries) -> Decimal:
    """USD notional of a swap: |token1 amount| times USD per raw token1 unit
    as of the event timestamp."""
    return abs(ev.amount1) * series.native_usd_at(ev.timestamp)


def aggregate_stats(dataset: ChainDataset, series: GasSeries) -> dict:
    """Per-chain swap statistics: count, USD volume, lower-median swap size
    and gas cost.  The pricing series must cover every swap timestamp."""
    swaps = dataset.swaps()
    series.check_coverage([e.timestamp for e in swaps])
    sizes = [swap_usd_size(e, series) for e in swaps]
    gas_values = [e.gas_fee_usd for e in swaps if e.gas_fee_usd is not None]
    return {
        "swap_count": len(swaps),
        "volume_usd": sum(sizes, Decimal(0)),
        "median_swap_usd": lower_median(sizes),
        "median_gas_usd": lower_median(gas_values),
    }


def position_lifecycle_stats(dataset: ChainDataset, tick_spacing: int,
                             exclude_single_spacing: bool = False) -> dict:
    """Position lifecycle statistics from Mint/Burn events.

    A lifecycle starts when a (owner, tick_lower, tick_upper) key goes from
    zero to positive liquidity and its holding time runs to the first burn
    after that; re-minting the same range after a full burn starts a new
    lifecycle.  Positions never burned count as created but are excluded
    from the holding-time median.  With exclude_single_spacing, positions
    exactly one tick spacing wide (the JIT / limit-order shape) are dropped
    from the holding-time median as well.
    """
    open_liquidity: dict[tuple, int] = {}
    first_mint_ts: dict[tuple, int] = {}
    burned_once: set = set()
    created = 0
    single_spacing = 0
    owners = set()
    holdings: list[int] = []

    for ev in dataset.events:
        if ev.kind not in ("Mint", "Burn"):
            continue
        key = (ev.owner, ev.tick_lower, ev.tick_upper)
        is_single = ev.tick_upper - ev.tick_lower == tick_spacing
        if ev.kind == "Mint":
            owners.add(ev.owner)
            if open_liquidity.get(key, 0) == 0:
                created += 1
                if is_single:
                    single_spacing += 1
                first_mint_ts[key] = ev.timestamp
                burned_once.discard(key)
            open_liquidity[key] = open_liquidity.get(key, 0) \
                + (ev.liquidity_delta or 0)
        else:
            if key not in open_liquidity or key in burned_once:
                # burn on an unseen or already-measured lifecycle
                if key in open_liquidity:
                    open_liquidity[key] = max(
                        0, open_liquidity[key] - (ev.liquidity_delta or 0))
                continue
            burned_once.add(key)
            if not (exclude_single_spacing and is_single):
                holdings.append(ev.timestamp - first_mint_ts[key])
            open_liquidity[key] = max(
                0, open_liquidity[key] - (ev.liquidity_delta or 0))

    return {
        "positions_created": created,
        "unique_lp_wallets": len(owners),
        "median_holding_seconds": lower_median(holdings),
        "share_single_tick_spacing":
            single_spacing / created if created else None,
    }
