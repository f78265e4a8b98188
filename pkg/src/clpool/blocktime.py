"""Monte Carlo of arbitrageur-vs-LP interaction under varying block times.

External log price follows a driftless Gaussian random walk sampled once
per block; the pool is a full-range constant-product market with input fee
gamma.  Each block the arbitrageur moves the pool to the myopically
optimal post-fee target whenever the external price sits outside the
no-trade band [p·(1-gamma), p/(1-gamma)] and the trade clears its fixed
cost.  Fees and mark-to-external profit are accumulated per path and
reported per day.

Paths are independent streams seeded as SeedSequence((seed, path_index));
the reduction order is fixed, so a (config, seed) pair fully determines
the result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .errors import DomainError

SECONDS_PER_DAY = 86_400.0


@dataclass(frozen=True)
class SimConfig:
    sigma: float                 # volatility per sqrt(second)
    gamma: float                 # pool input fee, also the band half-width
    tau: float                   # block time, seconds
    horizon_seconds: float = 3_600.0
    paths: int = 1_000
    seed: int = 0
    pool_value_usd: float = 1_000_000.0
    price0: float = 1_850.0      # USD per token0; token1 is the numeraire
    arb_gas_usd: float = 0.0     # fixed cost per arbitrage trade


@dataclass(frozen=True)
class SimResult:
    fees_per_day_usd_mean: float
    fees_per_day_usd_se: float
    arb_profit_per_day_usd_mean: float
    arb_profit_per_day_usd_se: float
    trades_per_day: float
    paths: int


def _validate(cfg: SimConfig) -> None:
    if cfg.sigma < 0:
        raise DomainError("sigma must be >= 0")
    if not 0 <= cfg.gamma < 1:
        raise DomainError("gamma must be in [0, 1)")
    if cfg.tau <= 0:
        raise DomainError("tau must be positive")
    if cfg.paths < 1:
        raise DomainError("paths must be >= 1")
    if cfg.horizon_seconds < cfg.tau:
        raise DomainError("horizon shorter than one block")
    if cfg.pool_value_usd <= 0 or cfg.price0 <= 0:
        raise DomainError("pool value and price must be positive")
    if cfg.arb_gas_usd < 0:
        raise DomainError("arb_gas_usd must be >= 0")


@njit(cache=True)
def _run_path(normals, stride, sig_dt, gamma, price0, liquidity, gas):
    """One path over the fine grid, taking `stride` normals per block.

    sig_dt is sigma*sqrt(fine step); aggregating stride normals gives a
    per-block standard deviation of sigma*sqrt(stride * fine step), which
    is how a slow chain and a fast chain share one underlying price path.
    Returns (fees_usd, profit_usd, trades, min_trade_profit).
    """
    one_minus = 1.0 - gamma
    log_m = 0.0
    p = price0
    m = price0
    fees = 0.0
    profit = 0.0
    trades = 0
    min_trade = np.inf
    n_blocks = normals.shape[0] // stride
    idx = 0
    for _ in range(n_blocks):
        dz = 0.0
        for _ in range(stride):
            dz += normals[idx]
            idx += 1
        log_m += sig_dt * dz
        m = price0 * math.exp(log_m)

        if m > p / one_minus:
            # push the pool price up to the post-fee optimum m*(1-gamma)
            p_new = m * one_minus
            s_p = math.sqrt(p)
            s_n = math.sqrt(p_new)
            dy_net = liquidity * (s_n - s_p)
            dx_out = liquidity * (1.0 / s_p - 1.0 / s_n)
            fee = dy_net * gamma / one_minus          # token1 == USD
            pr = m * dx_out - (dy_net + fee) - gas
            if pr > 0.0:
                fees += fee
                profit += pr
                trades += 1
                p = p_new
                if pr < min_trade:
                    min_trade = pr
        elif m < p * one_minus:
            p_new = m / one_minus
            s_p = math.sqrt(p)
            s_n = math.sqrt(p_new)
            dx_net = liquidity * (1.0 / s_n - 1.0 / s_p)
            dy_out = liquidity * (s_p - s_n)
            fee = dx_net * gamma / one_minus          # token0, marked at m
            pr = dy_out - m * (dx_net + fee) - gas
            if pr > 0.0:
                fees += m * fee
                profit += pr
                trades += 1
                p = p_new
                if pr < min_trade:
                    min_trade = pr
    return fees, profit, trades, min_trade


def _path_normals(seed: int, index: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed, index))))
    return rng.standard_normal(n)


def simulate(cfg: SimConfig) -> SimResult:
    """Run cfg.paths independent paths and report per-day means with
    standard errors."""
    _validate(cfg)
    n_blocks = int(cfg.horizon_seconds // cfg.tau)
    sig_dt = cfg.sigma * math.sqrt(cfg.tau)
    liquidity = cfg.pool_value_usd / (2.0 * math.sqrt(cfg.price0))
    scale = SECONDS_PER_DAY / (n_blocks * cfg.tau)

    fees = np.empty(cfg.paths)
    profit = np.empty(cfg.paths)
    trades = np.empty(cfg.paths)
    for i in range(cfg.paths):
        normals = _path_normals(cfg.seed, i, n_blocks)
        f, pr, tr, mn = _run_path(normals, 1, sig_dt, cfg.gamma,
                                  cfg.price0, liquidity, cfg.arb_gas_usd)
        if mn < 0.0:
            raise AssertionError(f"loss-making trade on path {i}: {mn}")
        fees[i] = f * scale
        profit[i] = pr * scale
        trades[i] = tr * scale

    def se(a):
        return float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0

    return SimResult(float(fees.mean()), se(fees),
                     float(profit.mean()), se(profit),
                     float(trades.mean()), cfg.paths)


def scaling_exponent(taus, profits) -> float:
    """OLS slope of log(profit) vs log(tau); non-positive profits are
    excluded with a warning."""
    pairs = [(t, p) for t, p in zip(taus, profits) if p > 0]
    dropped = len(list(taus)) - len(pairs)
    if dropped:
        warnings.warn(f"excluded {dropped} non-positive profit points")
    if len(pairs) < 2:
        raise DomainError("need at least two positive profit points")
    x = np.log([t for t, _ in pairs])
    y = np.log([p for _, p in pairs])
    x = x - x.mean()
    return float((x * y).sum() / (x * x).sum())


def tau_grid(cfg: SimConfig, taus) -> list[tuple[float, SimResult]]:
    """simulate() across a tau grid with everything else held fixed."""
    return [(t, simulate(replace(cfg, tau=t))) for t in taus]


def compare_fcfs(cfg: SimConfig, tau_fast: float, tau_slow: float) -> dict:
    """Paired comparison of a fast chain vs a slow chain on common random
    numbers: both sample the same underlying path, the slow one at every
    ratio-th point.  tau_slow must be an integer multiple of tau_fast.
    Reports the relative fee gain and arb-profit reduction of the fast
    chain; zero/zero degenerates (e.g. sigma = 0) report 0.
    """
    _validate(replace(cfg, tau=tau_fast))
    ratio = tau_slow / tau_fast
    if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
        raise DomainError("tau_slow must be an integer multiple of tau_fast")
    ratio = int(round(ratio))
    n_slow = int(cfg.horizon_seconds // tau_slow)
    if n_slow < 1:
        raise DomainError("horizon shorter than one slow block")
    n_fine = n_slow * ratio
    sig_dt = cfg.sigma * math.sqrt(tau_fast)
    liquidity = cfg.pool_value_usd / (2.0 * math.sqrt(cfg.price0))

    fees = np.zeros((2, cfg.paths))
    profit = np.zeros((2, cfg.paths))
    for i in range(cfg.paths):
        normals = _path_normals(cfg.seed, i, n_fine)
        for row, stride in ((0, 1), (1, ratio)):
            f, pr, _, mn = _run_path(normals, stride, sig_dt, cfg.gamma,
                                     cfg.price0, liquidity, cfg.arb_gas_usd)
            if mn < 0.0:
                raise AssertionError(f"loss-making trade on path {i}")
            fees[row, i] = f
            profit[row, i] = pr

    def rel(fast, slow):
        if fast == slow:
            return 0.0
        if slow == 0:
            raise DomainError("slow-chain mean is zero but fast differs")
        return fast / slow - 1.0

    mean = fees.mean(axis=1)
    pmean = profit.mean(axis=1)
    return {
        "fee_uplift_fraction": rel(mean[0], mean[1]),
        "profit_reduction_fraction": -rel(pmean[0], pmean[1]),
        "fees_fast_per_day": mean[0] * SECONDS_PER_DAY / (n_fine * tau_fast),
        "fees_slow_per_day": mean[1] * SECONDS_PER_DAY / (n_fine * tau_fast),
        "paths": cfg.paths,
    }
