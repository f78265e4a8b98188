"""Fixed-point price/tick/amount arithmetic with on-chain rounding semantics.

Everything here operates on plain Python ints interpreted as the familiar
fixed-point encodings: sqrt prices are Q64.96 (sqrt(token1/token0) * 2^96),
fee growth is Q128, fees are parts-per-million of input.  The tick<->price
conversions use the canonical lookup algorithms, bit for bit, so state
produced here is integer-identical to recorded chain state; rounding
directions on amount math always favor the pool (round input up, output
down).
"""

from __future__ import annotations

from typing import NamedTuple

from .errors import DomainError

MIN_TICK = -887272
MAX_TICK = 887272

# sqrt prices at MIN_TICK and MAX_TICK
MIN_SQRT_RATIO = 4295128739
MAX_SQRT_RATIO = 1461446703485210103287273052203988822378723970342

Q32 = 1 << 32
Q96 = 1 << 96
Q128 = 1 << 128
U128_MAX = (1 << 128) - 1
U160_MAX = (1 << 160) - 1
U256_MAX = (1 << 256) - 1

FEE_DENOM = 1_000_000

# standard fee tier (pips) -> tick spacing
TICK_SPACING_BY_FEE = {100: 1, 500: 10, 3000: 60, 10000: 200}


def tick_spacing_for_fee(fee_pips: int) -> int:
    try:
        return TICK_SPACING_BY_FEE[fee_pips]
    except KeyError:
        raise DomainError(
            f"no default tick spacing for fee {fee_pips}; pass one explicitly"
        ) from None


# ---------------------------------------------------------------------------
# integer division helpers
# ---------------------------------------------------------------------------

def mul_div(a: int, b: int, denominator: int) -> int:
    """floor(a * b / denominator)."""
    return a * b // denominator


def mul_div_ceil(a: int, b: int, denominator: int) -> int:
    """ceil(a * b / denominator)."""
    return -((-a * b) // denominator)


def div_ceil(x: int, y: int) -> int:
    return -((-x) // y)


# ---------------------------------------------------------------------------
# tick -> sqrt price
# ---------------------------------------------------------------------------

# Each constant is round(2^128 / sqrt(1.0001^(2^i))) for bit i of |tick|;
# the product is assembled in Q128 then converted to Q96 rounding up.
_TICK_MULTIPLIERS = (
    0xFFFCB933BD6FAD37AA2D162D1A594001,
    0xFFF97272373D413259A46990580E213A,
    0xFFF2E50F5F656932EF12357CF3C7FDCC,
    0xFFE5CACA7E10E4E61C3624EAA0941CD0,
    0xFFCB9843D60F6159C9DB58835C926644,
    0xFF973B41FA98C081472E6896DFB254C0,
    0xFF2EA16466C96A3843EC78B326B52861,
    0xFE5DEE046A99A2A811C461F1969C3053,
    0xFCBE86C7900A88AEDCFFC83B479AA3A4,
    0xF987A7253AC413176F2B074CF7815E54,
    0xF3392B0822B70005940C7A398E4B70F3,
    0xE7159475A2C29B7443B29C7FA6E889D9,
    0xD097F3BDFD2022B8845AD8F792AA5825,
    0xA9F746462D870FDF8A65DC1F90E061E5,
    0x70D869A156D2A1B890BB3DF62BAF32F7,
    0x31BE135F97D08FD981231505542FCFA6,
    0x9AA508B5B7A84E1C677DE54F3E99BC9,
    0x5D6AF8DEDB81196699C329225EE604,
    0x2216E584F5FA1EA926041BEDFE98,
    0x48A170391F7DC42444E8FA2,
)


def tick_to_sqrt_price(tick: int) -> int:
    """Q64.96 sqrt price at a tick, canonical rounding.

    Matches the on-chain lookup exactly (including its final round-up from
    Q128 to Q96), which keeps replayed state integer-identical to recorded
    state; the result is within one ulp above floor(sqrt(1.0001^tick)*2^96).
    """
    if not MIN_TICK <= tick <= MAX_TICK:
        raise DomainError(f"tick {tick} outside [{MIN_TICK}, {MAX_TICK}]")
    abs_tick = -tick if tick < 0 else tick

    ratio = _TICK_MULTIPLIERS[0] if abs_tick & 1 else 0x100000000000000000000000000000000
    for i in range(1, 20):
        if abs_tick & (1 << i):
            ratio = (ratio * _TICK_MULTIPLIERS[i]) >> 128

    if tick > 0:
        ratio = U256_MAX // ratio

    # Q128 -> Q96, rounding up: this loses at most 2^-32 of precision and
    # guarantees price(tick) < price(tick + 1) everywhere.
    return (ratio >> 32) + (1 if ratio % Q32 else 0)


# ---------------------------------------------------------------------------
# sqrt price -> tick
# ---------------------------------------------------------------------------

def sqrt_price_to_tick(sqrt_price_x96: int) -> int:
    """Greatest tick whose canonical sqrt price is <= sqrt_price_x96."""
    if not MIN_SQRT_RATIO <= sqrt_price_x96 < MAX_SQRT_RATIO:
        raise DomainError(
            f"sqrt price {sqrt_price_x96} outside "
            f"[{MIN_SQRT_RATIO}, {MAX_SQRT_RATIO})")

    ratio = sqrt_price_x96 << 32

    # most significant bit
    f = ratio
    msb = 0
    for shift in (128, 64, 32, 16, 8, 4, 2, 1):
        if f >= (1 << shift):
            msb += shift
            f >>= shift

    # fixed-point log2 with 14 fractional bits of refinement
    if msb >= 128:
        r = ratio >> (msb - 127)
    else:
        r = ratio << (127 - msb)
    log_2 = (msb - 128) << 64
    for bit in range(63, 49, -1):
        r = (r * r) >> 127
        f = r >> 128
        log_2 |= f << bit
        r >>= f

    log_sqrt10001 = log_2 * 255738958999603826347141  # log base sqrt(1.0001)

    tick_low = (log_sqrt10001 - 3402992956809132418596140100660247210) >> 128
    tick_hi = (log_sqrt10001 + 291339464771989622907027621153398088495) >> 128

    if tick_low == tick_hi:
        return tick_low
    return tick_hi if tick_to_sqrt_price(tick_hi) <= sqrt_price_x96 else tick_low


# ---------------------------------------------------------------------------
# amount deltas between sqrt prices
# ---------------------------------------------------------------------------

def amount0_delta(sqrt_a: int, sqrt_b: int, liquidity: int, round_up: bool) -> int:
    """Token0 owed for liquidity between two sqrt prices.

    amount0 = L * 2^96 * (sb - sa) / (sb * sa), computed as nested divisions
    so both rounding directions are exact at every step.
    """
    if sqrt_a > sqrt_b:
        sqrt_a, sqrt_b = sqrt_b, sqrt_a
    if sqrt_a <= 0:
        raise DomainError("sqrt price must be positive")
    numerator1 = liquidity << 96
    numerator2 = sqrt_b - sqrt_a
    if round_up:
        return div_ceil(mul_div_ceil(numerator1, numerator2, sqrt_b), sqrt_a)
    return mul_div(numerator1, numerator2, sqrt_b) // sqrt_a


def amount1_delta(sqrt_a: int, sqrt_b: int, liquidity: int, round_up: bool) -> int:
    """Token1 owed for liquidity between two sqrt prices: L * (sb - sa) / 2^96."""
    if sqrt_a > sqrt_b:
        sqrt_a, sqrt_b = sqrt_b, sqrt_a
    if round_up:
        return mul_div_ceil(liquidity, sqrt_b - sqrt_a, Q96)
    return mul_div(liquidity, sqrt_b - sqrt_a, Q96)


# ---------------------------------------------------------------------------
# next sqrt price from an amount
# ---------------------------------------------------------------------------

def next_sqrt_price_from_input(sqrt_price: int, liquidity: int, amount_in: int,
                               zero_for_one: bool) -> int:
    """Price after adding amount_in of the input token within one segment.

    Rounding never lets the implied input exceed amount_in: the price rounds
    up (toward the start) for token0 in, and the increment rounds down for
    token1 in.
    """
    if sqrt_price <= 0 or liquidity <= 0:
        raise DomainError("price and liquidity must be positive")
    if amount_in == 0:
        return sqrt_price
    if zero_for_one:
        numerator = liquidity << 96
        product = amount_in * sqrt_price
        return mul_div_ceil(numerator, sqrt_price, numerator + product)
    return sqrt_price + (amount_in << 96) // liquidity


def next_sqrt_price_from_output(sqrt_price: int, liquidity: int, amount_out: int,
                                zero_for_one: bool) -> int:
    """Price after removing amount_out of the output token within one segment.

    Rounding never lets the implied output fall short of amount_out.
    """
    if sqrt_price <= 0 or liquidity <= 0:
        raise DomainError("price and liquidity must be positive")
    if zero_for_one:
        # token1 out, price falls
        next_price = sqrt_price - mul_div_ceil(amount_out, Q96, liquidity)
        if next_price <= 0:
            raise DomainError("output exceeds token1 reserves of segment")
        return next_price
    numerator = liquidity << 96
    product = amount_out * sqrt_price
    if numerator <= product:
        raise DomainError("output exceeds token0 reserves of segment")
    return mul_div_ceil(numerator, sqrt_price, numerator - product)


# ---------------------------------------------------------------------------
# one swap step
# ---------------------------------------------------------------------------

class SwapStep(NamedTuple):
    sqrt_price_next: int
    amount_in: int
    amount_out: int
    fee_amount: int


def compute_swap_step(sqrt_current: int, sqrt_target: int, liquidity: int,
                      amount_remaining: int, fee_pips: int) -> SwapStep:
    """Advance the price toward sqrt_target within one liquidity segment.

    amount_remaining > 0 is exact input (fee comes out of it), < 0 exact
    output.  The price stops at sqrt_target if the remaining amount is enough
    to get there, otherwise at the price the remainder buys.  Input amounts
    round up, output amounts round down, and the fee is taken on input:
    fee = ceil(amount_in * fee / (1e6 - fee)) when the target is reached,
    everything left over otherwise.
    """
    zero_for_one = sqrt_current >= sqrt_target
    exact_in = amount_remaining >= 0

    if exact_in:
        amount_remaining_less_fee = mul_div(
            amount_remaining, FEE_DENOM - fee_pips, FEE_DENOM)
        if zero_for_one:
            amount_in = amount0_delta(sqrt_target, sqrt_current, liquidity, True)
        else:
            amount_in = amount1_delta(sqrt_current, sqrt_target, liquidity, True)
        if amount_remaining_less_fee >= amount_in:
            sqrt_next = sqrt_target
        else:
            sqrt_next = next_sqrt_price_from_input(
                sqrt_current, liquidity, amount_remaining_less_fee, zero_for_one)
    else:
        if zero_for_one:
            amount_out = amount1_delta(sqrt_target, sqrt_current, liquidity, False)
        else:
            amount_out = amount0_delta(sqrt_current, sqrt_target, liquidity, False)
        if -amount_remaining >= amount_out:
            sqrt_next = sqrt_target
        else:
            sqrt_next = next_sqrt_price_from_output(
                sqrt_current, liquidity, -amount_remaining, zero_for_one)

    reached_target = sqrt_target == sqrt_next

    if zero_for_one:
        if not (reached_target and exact_in):
            amount_in = amount0_delta(sqrt_next, sqrt_current, liquidity, True)
        if not (reached_target and not exact_in):
            amount_out = amount1_delta(sqrt_next, sqrt_current, liquidity, False)
    else:
        if not (reached_target and exact_in):
            amount_in = amount1_delta(sqrt_current, sqrt_next, liquidity, True)
        if not (reached_target and not exact_in):
            amount_out = amount0_delta(sqrt_current, sqrt_next, liquidity, False)

    if not exact_in and amount_out > -amount_remaining:
        amount_out = -amount_remaining

    if exact_in and not reached_target:
        fee_amount = amount_remaining - amount_in
    else:
        fee_amount = mul_div_ceil(amount_in, fee_pips, FEE_DENOM - fee_pips)

    return SwapStep(sqrt_next, amount_in, amount_out, fee_amount)


# ---------------------------------------------------------------------------
# wrap-safe u256 arithmetic for fee growth accumulators
# ---------------------------------------------------------------------------

def u256(x: int) -> int:
    return x & U256_MAX

def sub_u256(a: int, b: int) -> int:
    """a - b modulo 2^256 (fee growth deltas stay correct across wrap)."""
    return (a - b) & U256_MAX

def add_u256(a: int, b: int) -> int:
    return (a + b) & U256_MAX
