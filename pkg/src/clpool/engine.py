"""Concentrated-liquidity pool state machine.

Mint/burn/swap with tick crossing and fee-growth accounting, mirroring
on-chain semantics integer-for-integer so replayed state agrees with
recorded state.  Differences from the chain implementation are operational,
not arithmetic: initialized ticks live in a plain sorted list (successor and
predecessor queries instead of a bitmap), the protocol fee is always off,
and a swap that exhausts liquidity before the requested amount returns a
partial-fill flag instead of aborting — replay must never die mid-stream.

A Pool is single-writer; use clone() to get an independent copy for
hypothetical quotes.
"""

from __future__ import annotations

import bisect
import hashlib
import json
from dataclasses import dataclass, field

from . import fixmath as fm
from .errors import DomainError, StateError


@dataclass
class TickInfo:
    liquidity_gross: int = 0
    liquidity_net: int = 0
    fee_growth_outside_0: int = 0
    fee_growth_outside_1: int = 0

    @property
    def initialized(self) -> bool:
        return self.liquidity_gross > 0


@dataclass
class Position:
    owner: str
    tick_lower: int
    tick_upper: int
    liquidity: int = 0
    fee_growth_inside_last_0: int = 0
    fee_growth_inside_last_1: int = 0
    tokens_owed_0: int = 0
    tokens_owed_1: int = 0


@dataclass
class SwapResult:
    amount0: int            # signed: positive flows into the pool
    amount1: int
    fee_paid: int           # in the input token
    end_price: int
    end_tick: int
    end_liquidity: int
    ticks_crossed: int
    partial: bool           # liquidity/limit bound before amount was filled


SNAPSHOT_SCHEMA_VERSION = "1"


@dataclass
class Pool:
    """One pool's full state: price, in-range liquidity, tick table, positions."""

    fee_pips: int
    tick_spacing: int
    sqrt_price: int = 0
    tick: int = 0
    liquidity: int = 0
    fee_growth_global_0: int = 0
    fee_growth_global_1: int = 0
    ticks: dict[int, TickInfo] = field(default_factory=dict)
    positions: dict[tuple[str, int, int], Position] = field(default_factory=dict)
    initialized: bool = False
    # sorted view of ticks' keys, maintained incrementally
    _order: list[int] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not 0 <= self.fee_pips < fm.FEE_DENOM:
            raise DomainError(f"fee {self.fee_pips} outside [0, 1e6)")
        if self.tick_spacing <= 0:
            raise DomainError("tick spacing must be positive")

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------

    def initialize(self, sqrt_price: int) -> None:
        if self.initialized:
            raise StateError("pool already initialized")
        if not fm.MIN_SQRT_RATIO <= sqrt_price < fm.MAX_SQRT_RATIO:
            raise DomainError(
                f"sqrt price {sqrt_price} outside "
                f"[{fm.MIN_SQRT_RATIO}, {fm.MAX_SQRT_RATIO})")
        self.sqrt_price = sqrt_price
        self.tick = fm.sqrt_price_to_tick(sqrt_price)
        self.initialized = True

    def clone(self) -> "Pool":
        twin = Pool(self.fee_pips, self.tick_spacing,
                    sqrt_price=self.sqrt_price, tick=self.tick,
                    liquidity=self.liquidity,
                    fee_growth_global_0=self.fee_growth_global_0,
                    fee_growth_global_1=self.fee_growth_global_1,
                    initialized=self.initialized)
        twin.ticks = {
            t: TickInfo(i.liquidity_gross, i.liquidity_net,
                        i.fee_growth_outside_0, i.fee_growth_outside_1)
            for t, i in self.ticks.items()}
        twin.positions = {
            k: Position(p.owner, p.tick_lower, p.tick_upper, p.liquidity,
                        p.fee_growth_inside_last_0, p.fee_growth_inside_last_1,
                        p.tokens_owed_0, p.tokens_owed_1)
            for k, p in self.positions.items()}
        twin._order = list(self._order)
        return twin

    # ------------------------------------------------------------------
    # tick table
    # ------------------------------------------------------------------

    def _ensure_tick(self, t: int) -> TickInfo:
        info = self.ticks.get(t)
        if info is None:
            info = TickInfo()
            # by convention all fee growth happened below a tick that starts
            # at or under the current price
            if t <= self.tick:
                info.fee_growth_outside_0 = self.fee_growth_global_0
                info.fee_growth_outside_1 = self.fee_growth_global_1
            self.ticks[t] = info
            bisect.insort(self._order, t)
        return info

    def _drop_tick(self, t: int) -> None:
        del self.ticks[t]
        idx = bisect.bisect_left(self._order, t)
        del self._order[idx]

    def _next_initialized(self, zero_for_one: bool) -> int | None:
        """Successor/predecessor query over initialized ticks."""
        if zero_for_one:
            idx = bisect.bisect_right(self._order, self.tick)
            return self._order[idx - 1] if idx else None
        idx = bisect.bisect_right(self._order, self.tick)
        return self._order[idx] if idx < len(self._order) else None

    # ------------------------------------------------------------------
    # fee growth
    # ------------------------------------------------------------------

    def fee_growth_inside(self, tick_lower: int, tick_upper: int) -> tuple[int, int]:
        """Accumulated fee growth per unit liquidity inside a tick range.

        Uses the stored outside values (zero for uninitialized boundary
        ticks); subtraction wraps mod 2^256 so deltas stay correct across
        accumulator wrap.
        """
        lo = self.ticks.get(tick_lower) or TickInfo()
        hi = self.ticks.get(tick_upper) or TickInfo()

        if self.tick >= tick_lower:
            below_0, below_1 = lo.fee_growth_outside_0, lo.fee_growth_outside_1
        else:
            below_0 = fm.sub_u256(self.fee_growth_global_0, lo.fee_growth_outside_0)
            below_1 = fm.sub_u256(self.fee_growth_global_1, lo.fee_growth_outside_1)

        if self.tick < tick_upper:
            above_0, above_1 = hi.fee_growth_outside_0, hi.fee_growth_outside_1
        else:
            above_0 = fm.sub_u256(self.fee_growth_global_0, hi.fee_growth_outside_0)
            above_1 = fm.sub_u256(self.fee_growth_global_1, hi.fee_growth_outside_1)

        return (fm.sub_u256(fm.sub_u256(self.fee_growth_global_0, below_0), above_0),
                fm.sub_u256(fm.sub_u256(self.fee_growth_global_1, below_1), above_1))

    def _update_position(self, owner: str, tick_lower: int, tick_upper: int,
                         liquidity_delta: int) -> Position:
        key = (owner, tick_lower, tick_upper)
        pos = self.positions.get(key)
        if pos is None:
            pos = Position(owner, tick_lower, tick_upper)
            self.positions[key] = pos
        if liquidity_delta == 0 and pos.liquidity == 0:
            raise StateError("fee poke on empty position")
        inside_0, inside_1 = self.fee_growth_inside(tick_lower, tick_upper)
        pos.tokens_owed_0 += fm.mul_div(
            fm.sub_u256(inside_0, pos.fee_growth_inside_last_0), pos.liquidity, fm.Q128)
        pos.tokens_owed_1 += fm.mul_div(
            fm.sub_u256(inside_1, pos.fee_growth_inside_last_1), pos.liquidity, fm.Q128)
        pos.fee_growth_inside_last_0 = inside_0
        pos.fee_growth_inside_last_1 = inside_1
        pos.liquidity += liquidity_delta
        return pos

    # ------------------------------------------------------------------
    # liquidity changes
    # ------------------------------------------------------------------

    def _check_range(self, tick_lower: int, tick_upper: int) -> None:
        if tick_lower >= tick_upper:
            raise DomainError(f"tick range [{tick_lower}, {tick_upper}) is empty")
        if tick_lower < fm.MIN_TICK or tick_upper > fm.MAX_TICK:
            raise DomainError("tick range outside global bounds")
        if tick_lower % self.tick_spacing or tick_upper % self.tick_spacing:
            raise DomainError(
                f"ticks must be multiples of spacing {self.tick_spacing}")

    def _range_amounts(self, tick_lower: int, tick_upper: int, liquidity: int,
                       round_up: bool) -> tuple[int, int]:
        price_lower = fm.tick_to_sqrt_price(tick_lower)
        price_upper = fm.tick_to_sqrt_price(tick_upper)
        if self.tick < tick_lower:
            return (fm.amount0_delta(price_lower, price_upper, liquidity, round_up), 0)
        if self.tick < tick_upper:
            return (fm.amount0_delta(self.sqrt_price, price_upper, liquidity, round_up),
                    fm.amount1_delta(price_lower, self.sqrt_price, liquidity, round_up))
        return (0, fm.amount1_delta(price_lower, price_upper, liquidity, round_up))

    def mint(self, owner: str, tick_lower: int, tick_upper: int,
             liquidity_delta: int) -> tuple[int, int]:
        """Add liquidity; returns (amount0, amount1) owed to the pool (round-up)."""
        if not self.initialized:
            raise StateError("pool not initialized")
        self._check_range(tick_lower, tick_upper)
        if liquidity_delta <= 0:
            raise DomainError("mint needs positive liquidity")

        lo = self._ensure_tick(tick_lower)
        hi = self._ensure_tick(tick_upper)
        if (lo.liquidity_gross + liquidity_delta > fm.U128_MAX
                or hi.liquidity_gross + liquidity_delta > fm.U128_MAX):
            raise DomainError("liquidity_gross overflow")
        lo.liquidity_gross += liquidity_delta
        lo.liquidity_net += liquidity_delta
        hi.liquidity_gross += liquidity_delta
        hi.liquidity_net -= liquidity_delta

        self._update_position(owner, tick_lower, tick_upper, liquidity_delta)

        if tick_lower <= self.tick < tick_upper:
            self.liquidity += liquidity_delta
        return self._range_amounts(tick_lower, tick_upper, liquidity_delta, True)

    def burn(self, owner: str, tick_lower: int, tick_upper: int,
             liquidity_delta: int) -> tuple[int, int]:
        """Remove liquidity; returns principal (amount0, amount1), round-down.

        Accrued fees are credited to the position's tokens_owed.  A zero
        liquidity_delta is a pure fee poke.
        """
        if not self.initialized:
            raise StateError("pool not initialized")
        if liquidity_delta < 0:
            raise DomainError("burn takes a non-negative amount")
        pos = self.positions.get((owner, tick_lower, tick_upper))
        if pos is None or pos.liquidity < liquidity_delta:
            raise StateError("burning more than the position holds")

        self._update_position(owner, tick_lower, tick_upper, -liquidity_delta)
        if liquidity_delta == 0:
            return (0, 0)

        lo = self.ticks[tick_lower]
        hi = self.ticks[tick_upper]
        lo.liquidity_gross -= liquidity_delta
        lo.liquidity_net -= liquidity_delta
        hi.liquidity_gross -= liquidity_delta
        hi.liquidity_net += liquidity_delta

        amounts = self._range_amounts(tick_lower, tick_upper, liquidity_delta, False)
        if tick_lower <= self.tick < tick_upper:
            self.liquidity -= liquidity_delta

        if lo.liquidity_gross == 0:
            self._drop_tick(tick_lower)
        if hi.liquidity_gross == 0:
            self._drop_tick(tick_upper)
        return amounts

    # ------------------------------------------------------------------
    # swapping
    # ------------------------------------------------------------------

    def swap(self, zero_for_one: bool, amount_specified: int,
             sqrt_price_limit: int | None = None) -> SwapResult:
        """Execute a swap; positive amount_specified = exact input, negative
        = exact output.  Stops at amount exhaustion or the price limit;
        running out of initialized liquidity reports a partial fill."""
        if not self.initialized:
            raise StateError("pool not initialized")
        if amount_specified == 0:
            raise DomainError("zero swap amount")
        if not -(1 << 255) < amount_specified < (1 << 255):
            raise DomainError("swap amount outside signed 256-bit range")

        if sqrt_price_limit is None:
            sqrt_price_limit = (fm.MIN_SQRT_RATIO + 1 if zero_for_one
                                else fm.MAX_SQRT_RATIO - 1)
        if zero_for_one:
            if not fm.MIN_SQRT_RATIO < sqrt_price_limit < self.sqrt_price:
                raise DomainError("price limit on the wrong side of the price")
        else:
            if not self.sqrt_price < sqrt_price_limit < fm.MAX_SQRT_RATIO:
                raise DomainError("price limit on the wrong side of the price")

        exact_in = amount_specified > 0
        remaining = amount_specified
        calculated = 0
        fee_paid = 0
        crossed = 0

        while remaining != 0 and self.sqrt_price != sqrt_price_limit:
            price_start = self.sqrt_price
            next_tick = self._next_initialized(zero_for_one)
            if next_tick is None:
                next_tick = fm.MIN_TICK if zero_for_one else fm.MAX_TICK
                on_initialized = False
            else:
                on_initialized = True
            price_next = fm.tick_to_sqrt_price(next_tick)

            if zero_for_one:
                target = max(price_next, sqrt_price_limit)
            else:
                target = min(price_next, sqrt_price_limit)

            step = fm.compute_swap_step(
                self.sqrt_price, target, self.liquidity, remaining, self.fee_pips)
            self.sqrt_price = step.sqrt_price_next

            if exact_in:
                remaining -= step.amount_in + step.fee_amount
                calculated -= step.amount_out
            else:
                remaining += step.amount_out
                calculated += step.amount_in + step.fee_amount
            fee_paid += step.fee_amount

            if self.liquidity > 0 and step.fee_amount:
                growth = (step.fee_amount << 128) // self.liquidity
                if zero_for_one:
                    self.fee_growth_global_0 = fm.add_u256(
                        self.fee_growth_global_0, growth)
                else:
                    self.fee_growth_global_1 = fm.add_u256(
                        self.fee_growth_global_1, growth)

            if self.sqrt_price == price_next:
                if on_initialized:
                    info = self.ticks[next_tick]
                    info.fee_growth_outside_0 = fm.sub_u256(
                        self.fee_growth_global_0, info.fee_growth_outside_0)
                    info.fee_growth_outside_1 = fm.sub_u256(
                        self.fee_growth_global_1, info.fee_growth_outside_1)
                    net = -info.liquidity_net if zero_for_one else info.liquidity_net
                    self.liquidity += net
                    crossed += 1
                self.tick = next_tick - 1 if zero_for_one else next_tick
            elif self.sqrt_price != price_start:
                self.tick = fm.sqrt_price_to_tick(self.sqrt_price)

        if exact_in == zero_for_one:
            amount0 = amount_specified - remaining
            amount1 = calculated
        else:
            amount0 = calculated
            amount1 = amount_specified - remaining

        return SwapResult(
            amount0=amount0, amount1=amount1, fee_paid=fee_paid,
            end_price=self.sqrt_price, end_tick=self.tick,
            end_liquidity=self.liquidity, ticks_crossed=crossed,
            partial=remaining != 0)

    # ------------------------------------------------------------------
    # snapshot serialization
    # ------------------------------------------------------------------

    def snapshot(self) -> dict:
        """Canonical snapshot: all pool fields plus the full tick table,
        integers as decimal strings, ticks ascending."""
        return {
            "schema_version": SNAPSHOT_SCHEMA_VERSION,
            "fee_pips": str(self.fee_pips),
            "tick_spacing": str(self.tick_spacing),
            "initialized": self.initialized,
            "sqrt_price_x96": str(self.sqrt_price),
            "tick": str(self.tick),
            "liquidity": str(self.liquidity),
            "fee_growth_global_0_x128": str(self.fee_growth_global_0),
            "fee_growth_global_1_x128": str(self.fee_growth_global_1),
            "ticks": [
                {
                    "tick": str(t),
                    "liquidity_gross": str(info.liquidity_gross),
                    "liquidity_net": str(info.liquidity_net),
                    "fee_growth_outside_0_x128": str(info.fee_growth_outside_0),
                    "fee_growth_outside_1_x128": str(info.fee_growth_outside_1),
                }
                for t in self._order
                for info in (self.ticks[t],)
            ],
        }

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))

    def state_hash(self) -> str:
        return hashlib.sha256(self.snapshot_json().encode("ascii")).hexdigest()

    @classmethod
    def from_snapshot(cls, snap: dict | str) -> "Pool":
        if isinstance(snap, str):
            snap = json.loads(snap)
        if snap.get("schema_version") != SNAPSHOT_SCHEMA_VERSION:
            raise DomainError(
                f"unsupported snapshot schema {snap.get('schema_version')!r}")
        pool = cls(int(snap["fee_pips"]), int(snap["tick_spacing"]),
                   sqrt_price=int(snap["sqrt_price_x96"]),
                   tick=int(snap["tick"]),
                   liquidity=int(snap["liquidity"]),
                   fee_growth_global_0=int(snap["fee_growth_global_0_x128"]),
                   fee_growth_global_1=int(snap["fee_growth_global_1_x128"]),
                   initialized=bool(snap["initialized"]))
        for row in snap["ticks"]:
            t = int(row["tick"])
            pool.ticks[t] = TickInfo(
                liquidity_gross=int(row["liquidity_gross"]),
                liquidity_net=int(row["liquidity_net"]),
                fee_growth_outside_0=int(row["fee_growth_outside_0_x128"]),
                fee_growth_outside_1=int(row["fee_growth_outside_1_x128"]),
            )
            pool._order.append(t)
        pool._order.sort()
        return pool
