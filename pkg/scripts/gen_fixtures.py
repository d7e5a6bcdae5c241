#!/usr/bin/env python3
"""Regenerate the committed demo fixtures under fixtures/.

Everything is seeded and value-exact so the acceptance suite can assert
against frozen numbers. Run from the repo root:

    python3 scripts/gen_fixtures.py
"""

import datetime as dt
import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIX = ROOT / "fixtures"

WINDOW_START = dt.date(2025, 1, 2)
WINDOW_END = dt.date(2025, 3, 31)
CCC_DELIST = dt.date(2025, 3, 10)


def weekdays(start, end):
    days, day = [], start
    while day <= end:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def write_prices():
    rng = random.Random(20250102)
    dates = weekdays(WINDOW_START, WINDOW_END)
    (FIX / "prices").mkdir(parents=True, exist_ok=True)
    for ticker, start_price, drift in (("AAA", 120.0, 0.0006), ("BBB", 45.0, -0.0003), ("CCC", 18.0, -0.002)):
        rows = ["date,open,high,low,close,volume,spread"]
        close = start_price
        for day in dates:
            if ticker == "CCC" and day > CCC_DELIST:
                break
            opn = close * (1.0 + rng.uniform(-0.01, 0.01))
            close = opn * math.exp(rng.gauss(drift, 0.018))
            lo = min(opn, close) * (1.0 - rng.uniform(0.0, 0.006))
            hi = max(opn, close) * (1.0 + rng.uniform(0.0, 0.006))
            vol = rng.randint(200_000, 3_000_000)
            spread = round(rng.uniform(0.0004, 0.0016), 6)
            rows.append(f"{day},{opn:.4f},{hi:.4f},{lo:.4f},{close:.4f},{vol},{spread}")
        (FIX / "prices" / f"{ticker}.csv").write_text("\n".join(rows) + "\n")
    return dates


def write_manifest():
    doc = {
        "model_id": "demo-llm-v3",
        "knowledge_cutoff": "2024-06-01",
        "post_training_boundary": "2024-08-01",
        "retrieval_corpus_max_date": "2024-09-15",
        "window_start": WINDOW_START.isoformat(),
        "window_end": WINDOW_END.isoformat(),
        "claim_tier": "deployable",
        "price_adjustment": "split-adjusted closes, dividends not reinvested",
        "sharpe_convention": 252,
        "ece_threshold": 0.10,
        "rho_grid": [0.6, 0.66, 0.75, 1.0],
        "frictions_modeled": ["commission", "spread", "market_impact", "token_cost", "latency", "financing"],
        "frictions_not_applicable": ["slippage", "taxes"],
        "frictions": {
            "commission_rate": 0.001,
            "kappa": 0.0008,
            "beta": 1.0,
            "token_price": 0.012,
            "latency_bars": 0,
            "borrow_rate": 0.0002,
        },
        "universe": [
            {"ticker": "AAA", "intervals": [[WINDOW_START.isoformat(), WINDOW_END.isoformat()]]},
            {"ticker": "BBB", "intervals": [[WINDOW_START.isoformat(), WINDOW_END.isoformat()]]},
            {"ticker": "CCC",
             "intervals": [[WINDOW_START.isoformat(), CCC_DELIST.isoformat()]],
             "delist_date": CCC_DELIST.isoformat(),
             "delist_recovery": 0.25},
        ],
    }
    (FIX / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_decisions(dates):
    rng = random.Random(77)
    (FIX / "decisions").mkdir(parents=True, exist_ok=True)

    def rec(day, ticker, agent, **kw):
        base = {
            "date": day.isoformat(), "ticker": ticker, "agent_id": agent,
            "tokens_in": rng.randint(400, 2600), "tokens_out": rng.randint(120, 900),
            "latency_ms": rng.randint(800, 6000),
        }
        base.update(kw)
        return json.dumps(base, sort_keys=True)

    # Solo agent:周期 trading on all three tickers, one late decision on CCC
    # lands after the delisting to exercise the exceptions path.
    lines = []
    solo_days = dates[:: 5]
    cycle = ["buy", "hold", "sell", "buy", "hold"]
    for i, day in enumerate(solo_days):
        for ticker in ("AAA", "BBB", "CCC"):
            if ticker == "CCC" and day > CCC_DELIST:
                continue
            action = cycle[(i + hash(ticker) % 3) % len(cycle)]
            lines.append(rec(day, ticker, "solo-1",
                             action=action, confidence=round(rng.uniform(0.55, 0.9), 2)))
    lines.append(rec(dt.date(2025, 3, 20), "CCC", "solo-1", action="buy", confidence=0.7))
    (FIX / "decisions" / "solo.jsonl").write_text("\n".join(lines) + "\n")

    # Committee: two analysts plus the merged consensus log on AAA/BBB.
    lines = []
    committee_days = dates[::4]
    for i, day in enumerate(committee_days):
        for ticker in ("AAA", "BBB"):
            a = "buy" if (i + len(ticker)) % 3 else "sell"
            b = a if rng.random() < 0.7 else ("sell" if a == "buy" else "buy")
            consensus = a if a == b or rng.random() < 0.5 else b
            lines.append(rec(day, ticker, "analyst-a", action=a,
                             confidence=round(rng.uniform(0.5, 0.95), 2), round=1))
            lines.append(rec(day, ticker, "analyst-b", action=b,
                             confidence=round(rng.uniform(0.5, 0.95), 2), round=1))
            lines.append(rec(day, ticker, "__consensus__", action=consensus,
                             confidence=round(rng.uniform(0.5, 0.95), 2), round=2))
    (FIX / "decisions" / "committee.jsonl").write_text("\n".join(lines) + "\n")


def write_calibration():
    """Five occupied bins, 40 trials each; pooled ECE is exactly 0.055."""
    (FIX / "calibration").mkdir(parents=True, exist_ok=True)
    plan = [  # (confidence, bull correct of 20, bear correct of 20)
        (0.55, 11, 11),
        (0.65, 13, 11),
        (0.75, 15, 12),
        (0.85, 17, 14),
        (0.95, 19, 16),
    ]
    lines = []
    for conf, bull_ok, bear_ok in plan:
        for regime, n_ok in (("bull", bull_ok), ("bear", bear_ok)):
            for i in range(20):
                lines.append(json.dumps(
                    {"confidence": conf, "correct": i < n_ok, "regime": regime},
                    sort_keys=True))
    (FIX / "calibration" / "trials.jsonl").write_text("\n".join(lines) + "\n")


def _counterfactual_file(name, flips_per_rho, tech_dist, defensive_dist, seed):
    """50 trials per rho point; sector tilts and flip counts are exact."""
    rng = random.Random(seed)
    grid = [0.6, 0.66, 0.75, 1.0]
    views = []
    for sector, (n_long, n_short, n_neutral) in (("Technology", tech_dist),
                                                 ("Consumer Defensive", defensive_dist)):
        views += [(sector, "long")] * n_long + [(sector, "short")] * n_short \
               + [(sector, "neutral")] * n_neutral
    rng.shuffle(views)
    assert len(views) == 200
    lines = []
    flipped_to = {"long": "short", "short": "long", "neutral": "long"}
    idx = 0
    for rho, n_flips in zip(grid, flips_per_rho):
        for j in range(50):
            sector, baseline = views[idx]
            idx += 1
            flip = j < n_flips
            updated = flipped_to[baseline] if flip else baseline
            conf_before = round(rng.uniform(0.66, 0.9), 2)
            drop = 0.05 + 0.3 * (rho - 0.6) + rng.uniform(0.0, 0.02)
            conf_after = round(max(0.01, conf_before - drop), 2)
            pos_before = {"long": 0.8, "short": -0.8, "neutral": 0.0}[baseline]
            pos_after = round(pos_before * (1.0 - 0.8 * (rho - 0.5)), 3)
            lines.append(json.dumps({
                "trial_id": f"{name}-{rho:g}-{j:03d}", "rho": rho,
                "baseline_view": baseline, "updated_view": updated,
                "confidence_before": conf_before, "confidence_after": conf_after,
                "position_before": pos_before, "position_after": pos_after,
                "sector": sector,
            }, sort_keys=True))
    (FIX / "counterfactual" / f"{name}.jsonl").write_text("\n".join(lines) + "\n")


def write_counterfactual():
    (FIX / "counterfactual").mkdir(parents=True, exist_ok=True)
    # Responsive low-bias profile: flips 0.30/0.50/0.70/1.00; Tech tilt 0.13 vs 0.04.
    _counterfactual_file("low_bias", [15, 25, 35, 50],
                         tech_dist=(40, 27, 33), defensive_dist=(30, 26, 44), seed=11)
    # Sticky strong-prior profile: flips 0.08/0.20/0.40/1.00; Tech tilt 0.38 vs 0.02.
    _counterfactual_file("strong_prior", [4, 10, 20, 50],
                         tech_dist=(55, 17, 28), defensive_dist=(25, 23, 52), seed=12)


def write_coverage():
    (FIX / "coverage").mkdir(parents=True, exist_ok=True)
    systems = [
        {"name": f"system-{i}", "frictions_modeled": ["commission"]}
        for i in range(1, 6)
    ]
    (FIX / "coverage" / "systems.json").write_text(
        json.dumps({"systems": systems}, indent=2, sort_keys=True) + "\n")


def main():
    dates = write_prices()
    write_manifest()
    write_decisions(dates)
    write_calibration()
    write_counterfactual()
    write_coverage()
    print(f"fixtures regenerated under {FIX}")


if __name__ == "__main__":
    main()
