"""Market-structure analytics over pool states and event datasets:
liquidity-concentration profiles, hypothetical-swap quoting, cross-venue
breakeven trade sizes, trade-size shares, and daily full-range fee returns
with an arbitrage-only re-simulation mode.

All price-critical arithmetic is exact (ints and Fractions); floats appear
only in reported convenience metrics.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from decimal import Decimal
from fractions import Fraction

from . import fixmath as fm
from .engine import Pool
from .errors import DomainError
from .ingest import (ChainDataset, RouterRegistry, apply_event,
                     lower_median, segment_flow)

Q192 = fm.Q96 * fm.Q96
BPS = 10_000


def _as_fraction(x) -> Fraction:
    """Exact rational view of a number; floats go through their decimal
    string so 0.70 means 7/10, not the binary float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, Decimal):
        return Fraction(x)
    raise DomainError(f"not a number: {x!r}")


# ---------------------------------------------------------------------------
# liquidity concentration
# ---------------------------------------------------------------------------

@dataclass
class ConcentrationProfile:
    """Normalized liquidity mass per price bucket around the current mid.

    Buckets are half-open price intervals [mid·(1 + k·w/1e4),
    mid·(1 + (k+1)·w/1e4)) for k from -half/w to half/w - 1; shares[i] is
    (k·w, share) with exact Fraction shares summing to 1 unless empty.
    mid_share is the k = 0 bucket — the one whose left edge is the current
    price, hence the bucket containing the current tick.
    """
    timestamp: int | None
    window_half_width_bps: int
    bucket_width_bps: int
    shares: list[tuple[int, Fraction]]
    mid_share: Fraction
    empty: bool


def _liquidity_segments(pool: Pool) -> list[tuple[Fraction, Fraction | None, int]]:
    """Piecewise-constant active liquidity over price: (price_lo, price_hi,
    liquidity), open-ended final segment, derived from net liquidity at
    each initialized tick."""
    segs: list[tuple[Fraction, Fraction | None, int]] = []
    running = 0
    prev = Fraction(0)
    for t in sorted(pool.ticks):
        price = Fraction(fm.tick_to_sqrt_price(t) ** 2, Q192)
        segs.append((prev, price, running))
        running += pool.ticks[t].liquidity_net
        prev = price
    segs.append((prev, None, running))
    return segs


def concentration_profile(pool: Pool, window_half_width_bps: int = 200,
                          bucket_width_bps: int = 10,
                          timestamp: int | None = None) -> ConcentrationProfile:
    """Integrate active liquidity over price within ±window of the current
    mid, bucketed in equal-bps slices, normalized by the window total."""
    if not pool.initialized:
        raise DomainError("pool not initialized")
    if window_half_width_bps <= 0 or bucket_width_bps <= 0:
        raise DomainError("window and bucket widths must be positive")
    if window_half_width_bps % bucket_width_bps:
        raise DomainError("bucket width must divide the window half-width")

    n = window_half_width_bps // bucket_width_bps
    mid = Fraction(pool.sqrt_price ** 2, Q192)
    edges = [mid * (BPS + k * bucket_width_bps) / BPS
             for k in range(-n, n + 1)]
    segs = _liquidity_segments(pool)

    masses: list[Fraction] = []
    for j in range(2 * n):
        lo, hi = edges[j], edges[j + 1]
        mass = Fraction(0)
        for s_lo, s_hi, liq in segs:
            if liq == 0:
                continue
            top = hi if s_hi is None else min(hi, s_hi)
            overlap = top - max(lo, s_lo)
            if overlap > 0:
                mass += liq * overlap
        masses.append(mass)

    total = sum(masses)
    if total == 0:
        zero = [(k * bucket_width_bps, Fraction(0)) for k in range(-n, n)]
        return ConcentrationProfile(timestamp, window_half_width_bps,
                                    bucket_width_bps, zero, Fraction(0), True)
    shares = [((k - n) * bucket_width_bps, m / total)
              for k, m in enumerate(masses)]
    return ConcentrationProfile(timestamp, window_half_width_bps,
                                bucket_width_bps, shares, shares[n][1], False)


def median_concentration(profiles) -> Fraction:
    """Lower-median of mid_share over a series of profiles."""
    mids = [p.mid_share for p in profiles]
    if not mids:
        raise DomainError("empty profile series")
    return lower_median(mids)


def relative_uplift(a, b) -> Fraction:
    """a/b - 1, exact: relative_uplift(0.70, 0.40) is exactly 3/4."""
    fa, fb = _as_fraction(a), _as_fraction(b)
    if fb == 0:
        raise DomainError("zero baseline")
    return fa / fb - 1


def concentration_series(dataset: ChainDataset, fee_pips: int,
                         tick_spacing: int | None = None,
                         interval_seconds: int = 900,
                         window_half_width_bps: int = 200,
                         bucket_width_bps: int = 10) -> list[ConcentrationProfile]:
    """Replay a dataset and profile concentration on a UTC-aligned sampling
    grid; each sample reflects the last state at-or-before the grid time.
    Grid points before the pool is initialized are skipped."""
    if tick_spacing is None:
        tick_spacing = fm.tick_spacing_for_fee(fee_pips)
    pool = Pool(fee_pips, tick_spacing)
    out: list[ConcentrationProfile] = []
    if not dataset.events:
        return out
    first = dataset.events[0].timestamp
    last = dataset.events[-1].timestamp
    grid = -(-first // interval_seconds) * interval_seconds
    i = 0
    while grid <= last:
        while i < len(dataset.events) and dataset.events[i].timestamp <= grid:
            apply_event(pool, dataset.events[i])
            i += 1
        if pool.initialized:
            out.append(concentration_profile(pool, window_half_width_bps,
                                             bucket_width_bps, timestamp=grid))
        grid += interval_seconds
    return out


# ---------------------------------------------------------------------------
# quoting and breakeven size
# ---------------------------------------------------------------------------

@dataclass
class QuoteResult:
    amount_out: int
    partial: bool        # ran out of liquidity before consuming the input
    fee_paid: int
    end_sqrt_price: int


def quote(pool: Pool, amount_in: int, zero_for_one: bool) -> QuoteResult:
    """Output of a hypothetical exact-input swap; the pool is untouched."""
    if amount_in < 0:
        raise DomainError("negative input")
    if amount_in == 0:
        return QuoteResult(0, False, 0, pool.sqrt_price)
    work = pool.clone()
    res = work.swap(zero_for_one, amount_in)
    out = -(res.amount1 if zero_for_one else res.amount0)
    return QuoteResult(out, res.partial, res.fee_paid, res.end_price)


@dataclass
class PairPricing:
    """USD value of one raw unit of each token."""
    usd_per_token0: Decimal
    usd_per_token1: Decimal


@dataclass
class BreakevenPoint:
    timestamp: int | None
    chain_a: str
    chain_b: str
    input_token: str
    output_token: str
    breakeven_input_usd: Decimal | None
    gas_a_usd: Decimal
    gas_b_usd: Decimal
    regime: str          # chain id that nets more output below the point
    degenerate: bool     # net outputs identical across the whole scan


def _geometric_grid(lo: Fraction, hi: Fraction, points: int) -> list[Fraction]:
    ratio = (float(hi) / float(lo)) ** (1.0 / (points - 1))
    grid = [lo]
    x = float(lo)
    for _ in range(points - 2):
        x *= ratio
        grid.append(Fraction(x))
    grid.append(hi)
    return grid


def breakeven_size(state_a: Pool, gas_a_usd: Decimal,
                   state_b: Pool, gas_b_usd: Decimal,
                   zero_for_one: bool, pricing: PairPricing,
                   tol_usd: Decimal = Decimal("0.25"),
                   grid_lo: int = 10, grid_hi: int = 10 ** 9,
                   grid_points: int = 65,
                   timestamp: int | None = None,
                   chain_a: str = "a", chain_b: str = "b") -> BreakevenPoint:
    """First trade size (USD of input) at which venue a and venue b net the
    same output after gas; below it the regime venue nets more.

    f(x) = net_out_a(x) - net_out_b(x), net output in output-token units
    with gas converted at the given pricing.  A geometric scan over
    [grid_lo, grid_hi] USD brackets the first sign change, then bisection
    narrows it to tol_usd.  States are held fixed: gas is flat per trade
    regardless of size.
    """
    if gas_a_usd < 0 or gas_b_usd < 0:
        raise DomainError("negative gas cost")
    if state_a.fee_pips != state_b.fee_pips:
        # allowed, but both sides must still quote the same token pair;
        # there is nothing to check beyond what the caller asserts.
        pass
    in_usd = _as_fraction(pricing.usd_per_token0 if zero_for_one
                          else pricing.usd_per_token1)
    out_usd = _as_fraction(pricing.usd_per_token1 if zero_for_one
                           else pricing.usd_per_token0)
    if in_usd <= 0 or out_usd <= 0:
        raise DomainError("token prices must be positive")
    gas_a_out = _as_fraction(gas_a_usd) / out_usd
    gas_b_out = _as_fraction(gas_b_usd) / out_usd

    cache: dict[int, Fraction] = {}

    def f(x_usd: Fraction) -> Fraction:
        units = int(x_usd / in_usd)
        if units not in cache:
            out_a = quote(state_a, units, zero_for_one).amount_out
            out_b = quote(state_b, units, zero_for_one).amount_out
            cache[units] = (out_a - gas_a_out) - (out_b - gas_b_out)
        return cache[units]

    grid = _geometric_grid(Fraction(grid_lo), Fraction(grid_hi), grid_points)
    values = [f(x) for x in grid]

    token_in = "token0" if zero_for_one else "token1"
    token_out = "token1" if zero_for_one else "token0"

    def point(root, regime, degenerate=False):
        return BreakevenPoint(timestamp, chain_a, chain_b, token_in,
                              token_out, root, gas_a_usd, gas_b_usd,
                              regime, degenerate)

    if all(v == 0 for v in values):
        return point(None, "degenerate", degenerate=True)

    first_nonzero = next(v for v in values if v != 0)
    regime = chain_a if first_nonzero > 0 else chain_b

    lo = hi = None
    for j in range(len(grid) - 1):
        va, vb = values[j], values[j + 1]
        if va != 0 and vb != 0 and (va > 0) != (vb > 0):
            lo, hi = grid[j], grid[j + 1]
            break
        if va != 0 and vb == 0:
            # f reached a zero plateau: the crossing starts here
            lo, hi = grid[j], grid[j + 1]
            break
    if lo is None:
        return point(None, regime)

    tol = _as_fraction(tol_usd)
    f_lo = f(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        f_mid = f(mid)
        same_side = f_mid != 0 and (f_mid > 0) == (f_lo > 0)
        if same_side:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = Decimal(float((lo + hi) / 2)).quantize(Decimal("0.01"))
    return point(root, regime)


# ---------------------------------------------------------------------------
# trade-size shares
# ---------------------------------------------------------------------------

def share_above_threshold(sizes_usd, threshold_usd) -> Fraction:
    """Fraction (by count, not volume) of sizes strictly above the
    threshold."""
    sizes = list(sizes_usd)
    if not sizes:
        raise DomainError("no sizes")
    thr = _as_fraction(threshold_usd)
    above = sum(1 for s in sizes if _as_fraction(s) > thr)
    return Fraction(above, len(sizes))


# ---------------------------------------------------------------------------
# daily full-range fee returns
# ---------------------------------------------------------------------------

@dataclass
class FeeReturnRow:
    day: date
    pool: str
    flow: str                   # "all" | "arbitrage_only"
    growth0: int                # raw day delta of fee_growth_global_0 (Q128)
    growth1: int
    return_token0_per_L: float  # growth0 / 2^128
    return_token1_per_L: float
    return_bps_of_full_range_value: float


def _utc_day(ts: int) -> date:
    return datetime.fromtimestamp(ts, tz=timezone.utc).date()


def _bps_of_value(growth0: int, growth1: int, sqrt_price: int) -> float:
    """Day fees per unit L as bps of full-range position value at the
    day-end price: value/L = 2·sqrt(p) token1, fees/L = g0/2^128·p +
    g1/2^128 token1-equivalent."""
    if sqrt_price == 0:
        return 0.0
    sp = sqrt_price / fm.Q96
    fees_token1 = (growth0 / fm.Q128) * sp * sp + growth1 / fm.Q128
    return 1e4 * fees_token1 / (2 * sp)


def full_range_fee_returns(dataset: ChainDataset, fee_pips: int,
                           tick_spacing: int | None = None,
                           flow: str = "all",
                           registry: RouterRegistry | None = None,
                           ) -> tuple[list[FeeReturnRow], list[str]]:
    """Daily fee-growth deltas from replay, one row per UTC day from the
    first event's day through the last's (eventless days report zero).

    flow="all" replays everything.  flow="arbitrage_only" drops retail
    swaps (registry required), re-executes the remaining swaps as
    exact-input swaps of their recorded input against the re-simulated
    state, and applies mints/burns unconditionally; swaps that find no
    liquidity are skipped with an audit note.  Returns (rows, audit notes).
    """
    if flow not in ("all", "arbitrage_only"):
        raise DomainError(f"unknown flow filter {flow!r}")
    retail: set[tuple[str, int]] = set()
    if flow == "arbitrage_only":
        if registry is None:
            raise DomainError("arbitrage_only requires a router registry")
        labels, _ = segment_flow(dataset, registry)
        retail = {(l.tx_hash, l.log_index) for l in labels
                  if l.label == "retail"}
    if tick_spacing is None:
        tick_spacing = fm.tick_spacing_for_fee(fee_pips)

    pool = Pool(fee_pips, tick_spacing)
    rows: list[FeeReturnRow] = []
    audits: list[str] = []
    if not dataset.events:
        return rows, audits

    day = _utc_day(dataset.events[0].timestamp)
    last_day = _utc_day(dataset.events[-1].timestamp)
    open0 = open1 = 0

    def close_day(d):
        nonlocal open0, open1
        g0 = fm.sub_u256(pool.fee_growth_global_0, open0)
        g1 = fm.sub_u256(pool.fee_growth_global_1, open1)
        rows.append(FeeReturnRow(
            d, dataset.pool, flow, g0, g1, g0 / fm.Q128, g1 / fm.Q128,
            _bps_of_value(g0, g1, pool.sqrt_price)))
        open0, open1 = pool.fee_growth_global_0, pool.fee_growth_global_1

    for ev in dataset.events:
        d = _utc_day(ev.timestamp)
        while day < d:
            close_day(day)
            day += timedelta(days=1)
        if ev.kind == "Swap" and (ev.tx_hash, ev.log_index) in retail:
            continue
        if flow == "arbitrage_only" and ev.kind == "Swap" \
                and pool.initialized and not _has_liquidity(pool):
            audits.append(
                f"block {ev.block_number} log {ev.log_index}: swap skipped, "
                f"no liquidity in re-simulated state")
            continue
        apply_event(pool, ev)
    while day <= last_day:
        close_day(day)
        day += timedelta(days=1)
    return rows, audits


def _has_liquidity(pool: Pool) -> bool:
    return pool.liquidity > 0 or any(
        t.liquidity_gross > 0 for t in pool.ticks.values())


def compare_fee_returns(series_a, series_b,
                        field: str = "return_bps_of_full_range_value") -> dict:
    """Pair two daily series by UTC day and compare the chosen field.

    ratio = a/b per overlapping day (days where b is zero are excluded and
    counted); the headline is the mean of daily ratios, with the ratio of
    means and the quantiles of both distributions alongside.
    """
    by_day_a = {r.day: getattr(r, field) for r in series_a}
    by_day_b = {r.day: getattr(r, field) for r in series_b}
    days = sorted(set(by_day_a) & set(by_day_b))
    if not days:
        raise DomainError("no overlapping days")
    ratios = []
    skipped = 0
    for d in days:
        if by_day_b[d] == 0:
            skipped += 1
            continue
        ratios.append(by_day_a[d] / by_day_b[d])

    def quantiles(values):
        vals = sorted(values)
        if not vals:
            return {}
        def q(p):
            idx = p * (len(vals) - 1)
            lo = int(idx)
            hi = min(lo + 1, len(vals) - 1)
            return vals[lo] + (vals[hi] - vals[lo]) * (idx - lo)
        return {f"p{int(p * 100)}": q(p)
                for p in (0.10, 0.25, 0.50, 0.75, 0.90)}

    va = [by_day_a[d] for d in days]
    vb = [by_day_b[d] for d in days]
    mean_b = sum(vb) / len(vb)
    return {
        "days": len(days),
        "ratio_days": len(ratios),
        "zero_denominator_days": skipped,
        "mean_daily_ratio": sum(ratios) / len(ratios) if ratios else None,
        "ratio_of_means": (sum(va) / len(va)) / mean_b if mean_b else None,
        "quantiles_a": quantiles(va),
        "quantiles_b": quantiles(vb),
    }
