"""Seeded random small-backtest instances shared by the property suites.

Each case is plain dicts (dates as datetime.date) so the brute-force oracle
never touches engine types. ``to_engine_inputs`` adapts a case for the engine.
"""

import datetime as dt
import math
import random

from alpha_audit.datamodel import (
    DecisionLog,
    DecisionRecord,
    PriceBar,
    PriceSeries,
    UniverseMembership,
)
from alpha_audit.friction import FrictionSpec

TICKER_POOL = ("AAA", "BBB", "CCC")


def _weekdays(start: dt.date, count: int) -> list:
    days, day = [], start
    while len(days) < count:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def _series(rng: random.Random, dates: list) -> list:
    bars = []
    close = rng.uniform(20.0, 200.0)
    for day in dates:
        opn = close * (1.0 + rng.uniform(-0.02, 0.02))
        close = opn * math.exp(rng.gauss(0.0, 0.03))
        lo = min(opn, close) * (1.0 - rng.uniform(0.0, 0.01))
        hi = max(opn, close) * (1.0 + rng.uniform(0.0, 0.01))
        bars.append({
            "date": day, "open": opn, "high": hi, "low": lo, "close": close,
            "volume": float(rng.randint(1000, 500000)),
            "spread": rng.choice([0.0, rng.uniform(0.0, 0.004)]),
        })
    return bars


def make_case(seed: int, max_tickers: int = 3, max_days: int = 20, max_decisions: int = 8) -> dict:
    rng = random.Random(seed)
    n_days = rng.randint(2, max_days)
    dates = _weekdays(dt.date(2025, 1, 2), n_days)
    tickers = sorted(rng.sample(TICKER_POOL, rng.randint(1, max_tickers)))

    spec = {
        "commission_rate": rng.choice([0.0, 0.0005, 0.002]),
        "kappa": rng.choice([0.0, 0.001, 0.01]),
        "beta": rng.choice([0.5, 1.0, 1.5]),
        "token_price": rng.choice([0.0, 0.01]),
        "latency_bars": rng.choice([0, 0, 1, 2]),
        "borrow_rate": rng.choice([None, 0.0, 0.001]),
    }

    universe_mode = rng.random()
    universe = []
    delisted = {}
    if universe_mode < 0.15:
        pass  # unrestricted
    else:
        for t in tickers:
            start = dates[0]
            end = dates[-1]
            entry = {"ticker": t, "intervals": [(start, end)], "delist_date": None, "delist_recovery": None}
            roll = rng.random()
            if roll < 0.15 and n_days >= 4:
                entry["intervals"] = [(dates[rng.randint(1, n_days // 2)], end)]
            elif roll < 0.30 and n_days >= 6:
                cut = rng.randint(2, n_days - 3)
                entry["intervals"] = [(start, dates[cut]), (dates[cut + 2], end)]
            elif roll < 0.42 and n_days >= 5:
                liq = rng.randint(2, n_days - 2)
                entry["intervals"] = [(start, dates[liq])]
                entry["delist_date"] = dates[liq]
                entry["delist_recovery"] = rng.choice([0.0, 0.25, 1.0])
                delisted[t] = liq
            universe.append(entry)

    prices = {}
    for t in tickers:
        bars = _series(rng, dates)
        if t in delisted:
            bars = bars[: delisted[t] + 1]
        prices[t] = bars
    if delisted and all(t in delisted for t in tickers):
        # keep at least one full-length grid series
        keep = tickers[0]
        prices[keep] = _series(rng, dates)
        for u in universe:
            if u["ticker"] == keep:
                u["intervals"] = [(dates[0], dates[-1])]
                u["delist_date"] = None
                u["delist_recovery"] = None
        delisted.pop(keep)

    decisions = []
    for _ in range(rng.randint(1, max_decisions)):
        t = rng.choice(tickers)
        roll = rng.random()
        if roll < 0.80:
            day = rng.choice(dates)
        elif roll < 0.90:
            day = dates[0] - dt.timedelta(days=rng.randint(1, 5))  # pre-window
        else:
            day = dates[-1] + dt.timedelta(days=rng.randint(0, 3))  # near/past the end
        rec = {
            "date": day, "ticker": t, "agent_id": "agent-x",
            "tokens_in": rng.choice([0, rng.randint(100, 3000)]),
            "tokens_out": rng.choice([0, rng.randint(50, 1500)]),
            "latency_ms": float(rng.randint(0, 4000)),
        }
        if rng.random() < 0.6:
            rec["action"] = rng.choice(["buy", "sell", "hold"])
        else:
            rec["target_weight"] = round(rng.uniform(-1.0, 1.0), 3)
        if rng.random() < 0.7:
            rec["confidence"] = round(rng.random(), 3)
        decisions.append(rec)

    return {
        "capital": rng.choice([10_000.0, 100_000.0, 250_000.0]),
        "spec": spec,
        "prices": prices,
        "decisions": decisions,
        "universe": universe,
    }


def to_engine_inputs(case: dict):
    prices = {
        t: PriceSeries(ticker=t, bars=tuple(PriceBar(**b) for b in bars))
        for t, bars in case["prices"].items()
    }
    records = [
        DecisionRecord(
            date=d["date"], ticker=d["ticker"], agent_id=d["agent_id"],
            action=d.get("action"), target_weight=d.get("target_weight"),
            confidence=d.get("confidence"), tokens_in=d["tokens_in"],
            tokens_out=d["tokens_out"], latency_ms=d["latency_ms"],
        )
        for d in case["decisions"]
    ]
    log = DecisionLog.from_records(records)
    universe = tuple(
        UniverseMembership(
            ticker=u["ticker"], intervals=tuple(u["intervals"]),
            delist_date=u["delist_date"], delist_recovery=u["delist_recovery"],
        )
        for u in case["universe"]
    )
    spec = FrictionSpec(**case["spec"])
    return prices, log, universe, spec, case["capital"]
