"""Independent exact-arithmetic reference implementations used by the tests.

Everything in here is deliberately written the slow, obvious way — Fraction
math, math.isqrt on exact integers, ceil/floor spelled out from the rounding
contract — so the production code (big-int mul/div chains, bit twiddling) is
checked against a second route that shares no code with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

Q96 = 1 << 96
Q128 = 1 << 128
FEE_DENOM = 1_000_000

MIN_TICK = -887272
MAX_TICK = 887272


# ---------------------------------------------------------------------------
# tick -> sqrt price
# ---------------------------------------------------------------------------

def exact_sqrt_price_floor(tick: int) -> int:
    """floor(sqrt(1.0001^tick) * 2^96) via exact integer arithmetic.

    sqrt(10001^t / 10000^t) * 2^96 = isqrt(10001^t * 10000^t * 2^192) // 10000^t
    for t >= 0 (and the reciprocal arrangement for t < 0).  Slow for large
    |tick| (isqrt on million-digit integers) — keep |tick| modest.
    """
    t = abs(tick)
    a = 10001**t
    b = 10000**t
    if tick >= 0:
        # floor(sqrt(a/b) * 2^96) = isqrt(a * b * 2^192) // b
        return math.isqrt(a * b << 192) // b
    # floor(sqrt(b/a) * 2^96) = isqrt(a * b * 2^192) // a
    return math.isqrt(a * b << 192) // a


def exact_sqrt_price_even(tick: int) -> int:
    """floor(sqrt(1.0001^tick) * 2^96) for even ticks — no isqrt needed.

    sqrt(1.0001^(2k)) = 1.0001^k exactly, so the result is a pure rational
    floor and stays fast even at the extreme ticks.
    """
    if tick % 2:
        raise ValueError("even ticks only")
    k = tick // 2
    if k >= 0:
        return (10001**k << 96) // 10000**k
    k = -k
    return (10000**k << 96) // 10001**k


# ---------------------------------------------------------------------------
# Fraction-based price/amount math (rounding spelled out from the contract)
# ---------------------------------------------------------------------------

def frac_ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def o_amount0(sqrt_a: int, sqrt_b: int, liquidity: int, round_up: bool) -> int:
    """Token0 between two sqrt prices: L * (sb - sa) / (sb * sa) in Q96 terms."""
    if sqrt_a > sqrt_b:
        sqrt_a, sqrt_b = sqrt_b, sqrt_a
    exact = Fraction(liquidity * (sqrt_b - sqrt_a) * Q96, sqrt_b * sqrt_a)
    return frac_ceil(exact) if round_up else frac_floor(exact)


def o_amount1(sqrt_a: int, sqrt_b: int, liquidity: int, round_up: bool) -> int:
    """Token1 between two sqrt prices: L * (sb - sa) / Q96."""
    if sqrt_a > sqrt_b:
        sqrt_a, sqrt_b = sqrt_b, sqrt_a
    exact = Fraction(liquidity * (sqrt_b - sqrt_a), Q96)
    return frac_ceil(exact) if round_up else frac_floor(exact)


def o_next_price_from_input(sqrt_price: int, liquidity: int, amount_in: int,
                            zero_for_one: bool) -> int:
    if zero_for_one:
        # price moves down; round up (away from the move) so the pool never
        # under-charges: ceil(L*Q*P / (L*Q + x*P))
        num = liquidity * Q96
        return frac_ceil(Fraction(num * sqrt_price, num + amount_in * sqrt_price))
    # price moves up; round down the increment
    return sqrt_price + (amount_in * Q96) // liquidity


def o_next_price_from_output(sqrt_price: int, liquidity: int, amount_out: int,
                             zero_for_one: bool) -> int:
    if zero_for_one:
        # token1 out, price moves down; round the subtraction up toward zero move
        return sqrt_price - frac_ceil(Fraction(amount_out * Q96, liquidity))
    # token0 out, price moves up: ceil(L*Q*P / (L*Q - y*P))
    num = liquidity * Q96
    denom = num - amount_out * sqrt_price
    assert denom > 0, "requested output exceeds segment reserves"
    return frac_ceil(Fraction(num * sqrt_price, denom))


@dataclass
class OSwapStep:
    sqrt_price_next: int
    amount_in: int
    amount_out: int
    fee_amount: int


def o_swap_step(sqrt_current: int, sqrt_target: int, liquidity: int,
                amount_remaining: int, fee_pips: int) -> OSwapStep:
    """One swap step inside a single liquidity segment, exact arithmetic.

    amount_remaining > 0 means exact input (fee taken from it), < 0 exact
    output.  Mirrors the swap-step contract: input rounded up, output rounded
    down, fee on input, price never overshoots the target.
    """
    zero_for_one = sqrt_current >= sqrt_target
    exact_in = amount_remaining >= 0

    if exact_in:
        less_fee = amount_remaining * (FEE_DENOM - fee_pips) // FEE_DENOM
        if zero_for_one:
            amount_in_to_target = o_amount0(sqrt_target, sqrt_current, liquidity, True)
        else:
            amount_in_to_target = o_amount1(sqrt_current, sqrt_target, liquidity, True)
        if less_fee >= amount_in_to_target:
            sqrt_next = sqrt_target
        else:
            sqrt_next = o_next_price_from_input(
                sqrt_current, liquidity, less_fee, zero_for_one)
    else:
        if zero_for_one:
            amount_out_to_target = o_amount1(sqrt_target, sqrt_current, liquidity, False)
        else:
            amount_out_to_target = o_amount0(sqrt_current, sqrt_target, liquidity, False)
        if -amount_remaining >= amount_out_to_target:
            sqrt_next = sqrt_target
        else:
            sqrt_next = o_next_price_from_output(
                sqrt_current, liquidity, -amount_remaining, zero_for_one)

    reached = sqrt_next == sqrt_target

    if zero_for_one:
        amount_in = o_amount0(sqrt_next, sqrt_current, liquidity, True)
        amount_out = o_amount1(sqrt_next, sqrt_current, liquidity, False)
    else:
        amount_in = o_amount1(sqrt_current, sqrt_next, liquidity, True)
        amount_out = o_amount0(sqrt_current, sqrt_next, liquidity, False)

    if exact_in and reached:
        fee = frac_ceil(Fraction(amount_in * fee_pips, FEE_DENOM - fee_pips))
    elif exact_in:
        # everything left over after the in-amount is fee
        fee = amount_remaining - amount_in
    else:
        if not reached and amount_out > -amount_remaining:
            amount_out = -amount_remaining
        fee = frac_ceil(Fraction(amount_in * fee_pips, FEE_DENOM - fee_pips))

    return OSwapStep(sqrt_next, amount_in, amount_out, fee)


# ---------------------------------------------------------------------------
# Naive reference pool
# ---------------------------------------------------------------------------

@dataclass
class OTick:
    liquidity_gross: int = 0
    liquidity_net: int = 0
    fee_growth_outside0: int = 0
    fee_growth_outside1: int = 0


@dataclass
class OPosition:
    liquidity: int = 0
    fee_growth_inside_last0: int = 0
    fee_growth_inside_last1: int = 0
    tokens_owed0: int = 0
    tokens_owed1: int = 0


U256 = (1 << 256) - 1


@dataclass
class NaivePool:
    """Straight-line reference interpreter for pool state transitions.

    Walks initialized ticks from a plain sorted scan; all price math goes
    through the Fraction oracles above.  No shared code with the engine —
    the production tick->price map is injected as ``price_of_tick`` so both
    sides agree on tick boundary prices while computing everything else
    differently.
    """

    fee_pips: int
    tick_spacing: int
    price_of_tick: object = None  # callable tick -> sqrt price
    sqrt_price: int = 0
    tick: int = 0
    liquidity: int = 0
    fee_growth_global0: int = 0
    fee_growth_global1: int = 0
    ticks: dict[int, OTick] = field(default_factory=dict)
    positions: dict[tuple, OPosition] = field(default_factory=dict)

    # -- setup ------------------------------------------------------------

    def initialize(self, sqrt_price: int) -> None:
        self.sqrt_price = sqrt_price
        self.tick = naive_tick_for_price(sqrt_price, self.price_of_tick)

    # -- liquidity --------------------------------------------------------

    def _touch_tick(self, t: int) -> OTick:
        info = self.ticks.get(t)
        if info is None:
            info = OTick()
            if t <= self.tick:
                info.fee_growth_outside0 = self.fee_growth_global0
                info.fee_growth_outside1 = self.fee_growth_global1
            self.ticks[t] = info
        return info

    def fee_growth_inside(self, lower: int, upper: int) -> tuple[int, int]:
        lo = self.ticks.get(lower, OTick())
        hi = self.ticks.get(upper, OTick())
        if self.tick >= lower:
            below0, below1 = lo.fee_growth_outside0, lo.fee_growth_outside1
        else:
            below0 = (self.fee_growth_global0 - lo.fee_growth_outside0) & U256
            below1 = (self.fee_growth_global1 - lo.fee_growth_outside1) & U256
        if self.tick < upper:
            above0, above1 = hi.fee_growth_outside0, hi.fee_growth_outside1
        else:
            above0 = (self.fee_growth_global0 - hi.fee_growth_outside0) & U256
            above1 = (self.fee_growth_global1 - hi.fee_growth_outside1) & U256
        return ((self.fee_growth_global0 - below0 - above0) & U256,
                (self.fee_growth_global1 - below1 - above1) & U256)

    def _update_position(self, owner, lower, upper, delta) -> OPosition:
        key = (owner, lower, upper)
        pos = self.positions.get(key)
        if pos is None:
            pos = OPosition()
            self.positions[key] = pos
        fgi0, fgi1 = self.fee_growth_inside(lower, upper)
        owed0 = ((fgi0 - pos.fee_growth_inside_last0) & U256) * pos.liquidity // Q128
        owed1 = ((fgi1 - pos.fee_growth_inside_last1) & U256) * pos.liquidity // Q128
        pos.tokens_owed0 += owed0
        pos.tokens_owed1 += owed1
        pos.fee_growth_inside_last0 = fgi0
        pos.fee_growth_inside_last1 = fgi1
        pos.liquidity += delta
        return pos

    def mint(self, owner, lower, upper, liquidity_delta) -> tuple[int, int]:
        price_of_tick = self.price_of_tick
        assert liquidity_delta > 0
        lo = self._touch_tick(lower)
        hi = self._touch_tick(upper)
        lo.liquidity_gross += liquidity_delta
        lo.liquidity_net += liquidity_delta
        hi.liquidity_gross += liquidity_delta
        hi.liquidity_net -= liquidity_delta
        self._update_position(owner, lower, upper, liquidity_delta)
        pa, pb = price_of_tick(lower), price_of_tick(upper)
        if self.tick < lower:
            a0 = o_amount0(pa, pb, liquidity_delta, True)
            a1 = 0
        elif self.tick < upper:
            a0 = o_amount0(self.sqrt_price, pb, liquidity_delta, True)
            a1 = o_amount1(pa, self.sqrt_price, liquidity_delta, True)
            self.liquidity += liquidity_delta
        else:
            a0 = 0
            a1 = o_amount1(pa, pb, liquidity_delta, True)
        return a0, a1

    def burn(self, owner, lower, upper, liquidity_delta) -> tuple[int, int]:
        price_of_tick = self.price_of_tick
        assert liquidity_delta > 0
        lo = self.ticks[lower]
        hi = self.ticks[upper]
        lo.liquidity_gross -= liquidity_delta
        lo.liquidity_net -= liquidity_delta
        hi.liquidity_gross -= liquidity_delta
        hi.liquidity_net += liquidity_delta
        self._update_position(owner, lower, upper, -liquidity_delta)
        if lo.liquidity_gross == 0:
            del self.ticks[lower]
        if hi.liquidity_gross == 0 and upper in self.ticks:
            del self.ticks[upper]
        pa, pb = price_of_tick(lower), price_of_tick(upper)
        if self.tick < lower:
            a0 = o_amount0(pa, pb, liquidity_delta, False)
            a1 = 0
        elif self.tick < upper:
            a0 = o_amount0(self.sqrt_price, pb, liquidity_delta, False)
            a1 = o_amount1(pa, self.sqrt_price, liquidity_delta, False)
            self.liquidity -= liquidity_delta
        else:
            a0 = 0
            a1 = o_amount1(pa, pb, liquidity_delta, False)
        return a0, a1

    # -- swapping ---------------------------------------------------------

    def _next_initialized(self, zero_for_one: bool) -> int | None:
        if zero_for_one:
            cands = [t for t in self.ticks if t <= self.tick]
            return max(cands) if cands else None
        cands = [t for t in self.ticks if t > self.tick]
        return min(cands) if cands else None

    def swap(self, zero_for_one: bool, amount_specified: int,
             sqrt_price_limit: int) -> dict:
        price_of_tick = self.price_of_tick
        assert amount_specified != 0
        exact_in = amount_specified > 0
        remaining = amount_specified
        calculated = 0
        fee_total = 0
        crossed = 0
        # (tick identifying the active segment, fee, liquidity) per step
        self.last_steps: list[tuple[int, int, int]] = []

        while remaining != 0 and self.sqrt_price != sqrt_price_limit:
            step_start = self.sqrt_price
            next_tick = self._next_initialized(zero_for_one)
            if next_tick is None:
                next_tick = MIN_TICK if zero_for_one else MAX_TICK
                on_boundary = False
            else:
                on_boundary = True
            target = price_of_tick(next_tick)
            if zero_for_one:
                limited = max(target, sqrt_price_limit)
            else:
                limited = min(target, sqrt_price_limit)

            step = o_swap_step(self.sqrt_price, limited, self.liquidity,
                               remaining, self.fee_pips)
            self.last_steps.append((self.tick, step.fee_amount, self.liquidity))
            self.sqrt_price = step.sqrt_price_next
            if exact_in:
                remaining -= step.amount_in + step.fee_amount
                calculated -= step.amount_out
            else:
                remaining += step.amount_out
                calculated += step.amount_in + step.fee_amount
            fee_total += step.fee_amount

            if self.liquidity > 0:
                growth = step.fee_amount * Q128 // self.liquidity
                if zero_for_one:
                    self.fee_growth_global0 = (self.fee_growth_global0 + growth) & U256
                else:
                    self.fee_growth_global1 = (self.fee_growth_global1 + growth) & U256

            if self.sqrt_price == target:
                if on_boundary:
                    info = self.ticks[next_tick]
                    info.fee_growth_outside0 = (
                        self.fee_growth_global0 - info.fee_growth_outside0) & U256
                    info.fee_growth_outside1 = (
                        self.fee_growth_global1 - info.fee_growth_outside1) & U256
                    net = info.liquidity_net
                    if zero_for_one:
                        net = -net
                    self.liquidity += net
                    crossed += 1
                self.tick = next_tick - 1 if zero_for_one else next_tick
            elif self.sqrt_price != step_start:
                self.tick = naive_tick_for_price(self.sqrt_price, price_of_tick)

        if exact_in:
            amount0 = amount_specified - remaining if zero_for_one else calculated
            amount1 = calculated if zero_for_one else amount_specified - remaining
        else:
            amount0 = calculated if zero_for_one else amount_specified - remaining
            amount1 = amount_specified - remaining if zero_for_one else calculated

        return {
            "amount0": amount0,
            "amount1": amount1,
            "fee_paid": fee_total,
            "sqrt_price": self.sqrt_price,
            "tick": self.tick,
            "liquidity": self.liquidity,
            "ticks_crossed": crossed,
            "partial": remaining != 0,
        }


def naive_tick_for_price(sqrt_price: int, price_of_tick) -> int:
    """Greatest tick t with price_of_tick(t) <= sqrt_price, by plain bisection.

    Same semantics as the production log-based search but found a completely
    different way.  price_of_tick is the production tick->price map so both
    sides agree on what a tick's price *is* while disagreeing on everything
    else.
    """
    ratio = (sqrt_price / Q96) ** 2
    est = int(math.log(ratio) / math.log(1.0001))
    lo = max(MIN_TICK, est - 5)
    hi = min(MAX_TICK, est + 5)
    # widen if the float estimate was off
    while lo > MIN_TICK and price_of_tick(lo) > sqrt_price:
        lo -= 16
    while hi < MAX_TICK and price_of_tick(hi) <= sqrt_price:
        hi += 16
    lo, hi = max(lo, MIN_TICK), min(hi, MAX_TICK)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if price_of_tick(mid) <= sqrt_price:
            lo = mid
        else:
            hi = mid - 1
    return lo
