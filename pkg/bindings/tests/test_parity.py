"""Acceptance: every bound result must be byte/integer-equal to what the
tool itself writes for the same inputs, on the shared fixture set —
replay hash, quote integers, and all four analysis tables."""

import json

import fixtures
from clpool_bindings import bind_load_and_replay, bind_quote, bind_tables

THRESHOLDS = "2000000000000,20000000000000"   # straddle the retail sizes


def rebuild_csv(df) -> str:
    """Re-serialize a bound frame the way the tool writes its tables."""
    lines = [",".join(df.columns)]
    for row in df.itertuples(index=False):
        lines.append(",".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def test_replay_hash_matches_tool(handle, tmp_path):
    out = tmp_path / "out"
    proc = fixtures.run_cli("replay", "--events", fixtures.EVENTS,
                            "--pool", fixtures.POOL, "--fee", fixtures.FEE,
                            out=out)
    assert proc.returncode == 0
    assert (out / "state_hash.txt").read_text().strip() == handle.state_hash
    assert (out / "final_state.json").read_text().strip() == \
        handle.snapshot_json


def test_quote_integers_match_tool(handle, tmp_path):
    for amount in (1, 10 ** 9, 3 * 10 ** 12, 7 * 10 ** 13):
        for direction in ("zero-for-one", "one-for-zero"):
            out = tmp_path / f"q{amount}{direction[0]}"
            proc = fixtures.run_cli(
                "quote", "--events", fixtures.EVENTS,
                "--fee", fixtures.FEE, "--amount-in", amount,
                "--direction", direction, out=out)
            assert proc.returncode == 0
            doc = json.loads((out / "quote.json").read_text())
            q = bind_quote(handle, amount, direction)
            assert q.amount_out == doc["amount_out"]
            assert q.fee_paid == doc["fee_paid"]
            assert q.partial == doc["partial"]
            assert q.end_sqrt_price_x96 == int(doc["end_sqrt_price_x96"])


def test_concentration_table_matches_tool(handle, tmp_path):
    out = tmp_path / "out"
    proc = fixtures.run_cli("analyze", "concentration",
                            "--events", fixtures.EVENTS,
                            "--fee", fixtures.FEE, "--interval", 1800,
                            out=out)
    assert proc.returncode == 0
    df = bind_tables(handle, "concentration", {"interval": 1800})
    assert len(df) > 0
    assert rebuild_csv(df) == (out / "concentration.csv").read_text()


def test_fees_tables_match_tool(handle, tmp_path):
    for name, flags, params in (
            ("all", [], {}),
            ("arb", ["--flow", "arb-only", "--registry", fixtures.REGISTRY],
             {"flow": "arb-only", "registry": fixtures.REGISTRY})):
        out = tmp_path / name
        proc = fixtures.run_cli("analyze", "fees",
                                "--events", fixtures.EVENTS,
                                "--fee", fixtures.FEE, *flags, out=out)
        assert proc.returncode == 0
        df = bind_tables(handle, "fees", params)
        assert len(df) > 0
        assert rebuild_csv(df) == (out / "fee_returns.csv").read_text()


def test_stats_table_matches_tool(handle, tmp_path):
    out = tmp_path / "out"
    proc = fixtures.run_cli("analyze", "stats",
                            "--events", fixtures.EVENTS,
                            "--gas-series", fixtures.GAS,
                            "--registry", fixtures.REGISTRY,
                            "--thresholds", THRESHOLDS, out=out)
    assert proc.returncode == 0
    doc = json.loads((out / "stats.json").read_text())
    df = bind_tables(handle, "stats",
                     {"gas_series": fixtures.GAS,
                      "registry": fixtures.REGISTRY,
                      "thresholds": THRESHOLDS})
    assert len(df) == len(doc["thresholds"]) == 2
    for i, rec in enumerate(doc["thresholds"]):
        for col in df.columns:
            assert df.iloc[i][col] == rec[col]
    assert 0.0 < df.iloc[1]["share_above"] < df.iloc[0]["share_above"] < 1.0


def test_breakeven_table_matches_tool(deep_events, shallow_events,
                                      tmp_path):
    out = tmp_path / "out"
    proc = fixtures.run_cli(
        "analyze", "breakeven",
        "--events-a", deep_events, "--fee-a", fixtures.FEE,
        "--events-b", shallow_events, "--fee-b", fixtures.FEE,
        "--gas-a", "10.00", "--gas-b", "0.28",
        "--usd-token0", "1", "--usd-token1", "1",
        "--label-a", "mainnet", "--label-b", "rollup", out=out)
    assert proc.returncode == 0
    doc = json.loads((out / "breakeven.json").read_text())
    pair = (bind_load_and_replay(deep_events, fixtures.POOL, fixtures.FEE),
            bind_load_and_replay(shallow_events, fixtures.POOL,
                                 fixtures.FEE))
    df = bind_tables(pair, "breakeven",
                     {"gas_a": "10.00", "gas_b": "0.28",
                      "usd_token0": "1", "usd_token1": "1",
                      "label_a": "mainnet", "label_b": "rollup"})
    assert len(df) == 1
    row = df.iloc[0]
    for key, value in doc.items():
        assert row[key] == value, key
    assert doc["breakeven_input_usd"] is not None
