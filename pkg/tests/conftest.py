import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from clpool import fixmath as fm
from clpool.engine import Pool

import oracles as oc


def build_pool_pair(rng: random.Random, max_positions: int = 8,
                    tick_span: int = 200):
    """A randomized engine pool and its naive twin, identically initialized."""
    fee = rng.choice([100, 500, 3000, 10000])
    spacing = fm.TICK_SPACING_BY_FEE[fee]
    pool = Pool(fee, spacing)
    ref = oc.NaivePool(fee, spacing, price_of_tick=fm.tick_to_sqrt_price)
    t0 = rng.randint(-5000, 5000)
    p0 = min(fm.tick_to_sqrt_price(t0) + rng.randint(0, 10**20),
             fm.MAX_SQRT_RATIO - 1)
    pool.initialize(p0)
    ref.initialize(p0)
    for _ in range(rng.randint(0, max_positions)):
        lo = rng.randint(-tick_span, tick_span - 1) * spacing
        hi = rng.randint(lo // spacing + 1, tick_span + 1) * spacing
        liq = rng.randint(10**6, 10**18)
        pool.mint("lp", lo, hi, liq)
        ref.mint("lp", lo, hi, liq)
    return pool, ref


def random_swap_args(rng: random.Random, pool: Pool):
    """Legal random swap arguments for the pool's current price, or None."""
    zero_for_one = rng.random() < 0.5
    amount = rng.randint(1, 10**21) * (1 if rng.random() < 0.7 else -1)
    limit = fm.MIN_SQRT_RATIO + 1 if zero_for_one else fm.MAX_SQRT_RATIO - 1
    if zero_for_one and limit >= pool.sqrt_price:
        return None
    if not zero_for_one and limit <= pool.sqrt_price:
        return None
    return zero_for_one, amount, limit
