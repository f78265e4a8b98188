"""Synthetic (chain, pool) event-stream fixtures.

Streams are produced by driving the reference interpreter in oracles.py,
so every recorded post-state field is exactly what a faithful replay must
reproduce.  Mix: swaps (retail routers vs arbitrage takers), mints/burns
including occasional single-spacing ranges, one deep base position so
swaps always fill.
"""

from __future__ import annotations

import json
import random
from decimal import Decimal
from pathlib import Path

from oracles import NaivePool

from clpool import fixmath as fm
from clpool.ingest import ChainDataset, PoolEvent, write_dataset

POOL_ADDR = "0x" + "p0".replace("p", "f") * 20          # 0xf0f0...
BASE_LP = "0x" + "01" * 20

RETAIL_ROUTERS = (
    ("0x" + "ab" * 20, "interface", "canonical frontend router"),
    ("0x" + "cd" * 20, "aggregator", "meta aggregator"),
)
ARB_TAKERS = ("0x" + "e1" * 20, "0x" + "e2" * 20)

DEFAULT_LIMIT = {True: fm.MIN_SQRT_RATIO + 1, False: fm.MAX_SQRT_RATIO - 1}


def registry_dict(chain: str) -> dict:
    return {
        "chain": chain,
        "entries": [
            {"address": addr, "label": label, "note": note}
            for addr, label, note in RETAIL_ROUTERS
        ],
    }


def write_registry(path, chain: str) -> None:
    with open(path, "w") as fh:
        json.dump(registry_dict(chain), fh, indent=1)


def write_gas_series(path, start_ts: int, end_ts: int, gas_usd: str,
                     native_usd: str = "1", step: int = 3600) -> None:
    """Flat pricing series covering [start_ts, end_ts]."""
    with open(path, "w") as fh:
        fh.write("timestamp,gas_fee_usd,native_usd\n")
        ts = start_ts
        while ts <= end_ts + step:
            fh.write(f"{ts},{gas_usd},{native_usd}\n")
            ts += step


def _hash(rng: random.Random) -> str:
    return f"0x{rng.getrandbits(256):064x}"


def _align(tick: int, spacing: int) -> int:
    return (tick // spacing) * spacing


def synth_dataset(seed: int = 0, n_events: int = 400,
                  chain: str = "l2-sim", pool: str = POOL_ADDR,
                  fee_pips: int = 500, start_ts: int = 1_700_000_000,
                  block_time: int = 2, retail_share: float = 0.6,
                  base_liquidity: int = 10 ** 15,
                  swap_hi: int = 5 * 10 ** 13) -> ChainDataset:
    """Deterministic synthetic stream: Initialize, one deep base position,
    then a seeded mix of swaps/mints/burns with recorded post-state taken
    from the reference interpreter."""
    rng = random.Random(seed)
    spacing = fm.tick_spacing_for_fee(fee_pips)
    ref = NaivePool(fee_pips, spacing, fm.tick_to_sqrt_price)
    events: list[PoolEvent] = []
    block, ts, log = 1_000_000, start_ts, 0

    def emit(kind, **kw):
        events.append(PoolEvent(chain=chain, pool=pool, block_number=block,
                                timestamp=ts, tx_hash=_hash(rng),
                                log_index=log, kind=kind, **kw))

    sp0 = fm.tick_to_sqrt_price(rng.randrange(-3000, 3000))
    ref.initialize(sp0)
    emit("Initialize", sqrt_price_x96=sp0, tick_after=ref.tick)

    block += 1
    ts += block_time
    base_lo = _align(-120_000, spacing)
    base_hi = _align(120_000, spacing)
    a0, a1 = ref.mint(BASE_LP, base_lo, base_hi, base_liquidity)
    emit("Mint", owner=BASE_LP, tick_lower=base_lo, tick_upper=base_hi,
         liquidity_delta=base_liquidity, amount0=a0, amount1=a1)

    owners = [f"0x{rng.getrandbits(160):040x}" for _ in range(6)]
    base_key = (BASE_LP, base_lo, base_hi)

    while len(events) < n_events:
        if rng.random() < 0.6:
            step = rng.randint(1, 3)
            block += step
            ts += block_time * step
            log = 0
        else:
            log += rng.randint(1, 4)

        r = rng.random()
        if r < 0.20:
            owner = rng.choice(owners)
            if rng.random() < 0.08:  # single-spacing range at the money
                lower = _align(ref.tick, spacing)
                upper = lower + spacing
            else:
                lower = _align(ref.tick + rng.randrange(-3000, 3000), spacing)
                upper = lower + spacing * rng.randint(1, 60)
            lower = max(lower, base_lo)
            upper = min(upper, base_hi)
            if lower >= upper:
                continue
            liq = rng.randrange(10 ** 10, 10 ** 14)
            a0, a1 = ref.mint(owner, lower, upper, liq)
            emit("Mint", owner=owner, tick_lower=lower, tick_upper=upper,
                 liquidity_delta=liq, amount0=a0, amount1=a1)
        elif r < 0.35:
            live = [k for k, p in ref.positions.items()
                    if p.liquidity > 0 and k != base_key]
            if not live:
                continue
            key = rng.choice(live)
            held = ref.positions[key].liquidity
            amount = held if rng.random() < 0.5 \
                else rng.randrange(1, held + 1)
            a0, a1 = ref.burn(*key, amount)
            emit("Burn", owner=key[0], tick_lower=key[1], tick_upper=key[2],
                 liquidity_delta=amount, amount0=a0, amount1=a1)
        else:
            z41 = rng.random() < 0.5
            amount = rng.randrange(10 ** 9, swap_hi)
            res = ref.swap(z41, amount, DEFAULT_LIMIT[z41])
            if res["amount0"] == 0 and res["amount1"] == 0:
                continue
            taker = rng.choice(RETAIL_ROUTERS)[0] \
                if rng.random() < retail_share else rng.choice(ARB_TAKERS)
            emit("Swap", amount0=res["amount0"], amount1=res["amount1"],
                 sqrt_price_x96=res["sqrt_price"], tick_after=res["tick"],
                 liquidity_after=res["liquidity"], tx_to=taker,
                 gas_fee_usd=Decimal(f"{rng.uniform(0.05, 15.0):.2f}"))

    return ChainDataset(chain=chain, pool=pool, events=events,
                        block_time_seconds=float(block_time))


def write_synth_fixture(dirpath, seed: int = 0, n_events: int = 400,
                        **kw) -> dict:
    """Write events CSV + registry + flat gas series into dirpath; returns
    the paths plus the dataset."""
    ds = synth_dataset(seed=seed, n_events=n_events, **kw)
    Path(dirpath).mkdir(parents=True, exist_ok=True)
    events_path = f"{dirpath}/events.csv"
    registry_path = f"{dirpath}/registry.json"
    gas_path = f"{dirpath}/gas.csv"
    write_dataset(ds, events_path)
    write_registry(registry_path, ds.chain)
    write_gas_series(gas_path, ds.events[0].timestamp - 3600,
                     ds.events[-1].timestamp + 3600, "0.28")
    return {"dataset": ds, "events": events_path,
            "registry": registry_path, "gas": gas_path}
