"""Independent brute-force replay simulator used to cross-check the engine.

Works on plain dicts/lists (no engine types) and walks every sleeve day by
day with inline arithmetic. Rules implemented, in order:

* sleeves are the decision tickers, each funded capital/n and entered fully
  at the first bar's close (one-time entry cost), unless outside the universe;
* a decision dated d fills at the open of the first bar after d plus
  latency_bars; fills before bar 1, beyond the series, after delisting,
  outside membership, or short-without-borrow are dropped;
* fill cost = commission + half-spread + kappa*|dw|^beta on sleeve value;
  |dw| <= 1e-12 is a no-op; delisting liquidates at recovery * last close;
* shorts accrue borrow_rate * short notional at each close; token costs are
  portfolio-level, dated at the decision; net = gross - costs with date <= t;
* curves truncate at the first day net <= 0 (bankrupt).
"""


def _cost(notional, dw, spread, spec):
    total = spec["commission_rate"] * notional + 0.5 * spread * notional
    if dw > 0:
        total += spec["kappa"] * dw ** spec["beta"] * (notional / dw)
    return total


def _truncate(dates, gross, net):
    for i, v in enumerate(net):
        if v <= 0:
            return dates[: i + 1], gross[: i + 1], net[: i + 1], True
    return dates, gross, net, False


def _net_of(gross, dates, entries):
    entries = sorted(entries, key=lambda e: e[0])
    net, cum, k = [], 0.0, 0
    for t, g in zip(dates, gross):
        while k < len(entries) and entries[k][0] <= t:
            cum += entries[k][1]
            k += 1
        net.append(g - cum)
    return net


def simulate(case):
    spec, capital = case["spec"], case["capital"]
    decisions = sorted(case["decisions"], key=lambda d: (d["ticker"], d["date"]))
    tickers = sorted({d["ticker"] for d in decisions})
    sleeve_cap = capital / len(tickers)
    grid = [b["date"] for b in max((case["prices"][t] for t in tickers), key=len)]
    uni = {u["ticker"]: u for u in case["universe"]}

    def member(ticker, day):
        if not case["universe"]:
            return True
        u = uni.get(ticker)
        return u is not None and any(s <= day <= e for s, e in u["intervals"])

    per, entries_all = {}, []
    for t in tickers:
        bars = case["prices"][t]
        u = uni.get(t)
        liq = None
        if u is not None and u.get("delist_date") is not None:
            below = [i for i, b in enumerate(bars) if b["date"] <= u["delist_date"]]
            liq = below[-1] if below else -1
        fills = []
        for d in (d for d in decisions if d["ticker"] == t):
            if d.get("action") == "hold":
                continue
            target = {"buy": 1.0, "sell": 0.0}.get(d.get("action"), d.get("target_weight"))
            base = next((i for i, b in enumerate(bars) if b["date"] > d["date"]), None)
            if base is None or base == 0:
                continue
            ex = base + spec["latency_bars"]
            if ex >= len(bars) or (liq is not None and ex > liq):
                continue
            if not member(t, bars[ex]["date"]) or (target < 0 and spec["borrow_rate"] is None):
                continue
            fills.append((ex, target))
        cash, shares, gross, entries = sleeve_cap, 0.0, [], []
        if member(t, bars[0]["date"]) and liq != -1:
            shares, cash = sleeve_cap / bars[0]["close"], 0.0
            entries.append((bars[0]["date"], _cost(sleeve_cap, 1.0, bars[0]["spread"], spec)))
        for i, b in enumerate(bars):
            for ex, target in fills:
                if ex != i:
                    continue
                value = cash + shares * b["open"]
                if value <= 0:
                    continue
                dw = target - shares * b["open"] / value
                if abs(dw) <= 1e-12:
                    continue
                entries.append((b["date"], _cost(abs(dw) * value, abs(dw), b["spread"], spec)))
                new_shares = target * value / b["open"]
                cash -= (new_shares - shares) * b["open"]
                shares = new_shares
            if liq is not None and i == liq and shares != 0.0:
                cash += shares * u["delist_recovery"] * b["close"]
                shares = 0.0
            gross.append(cash + shares * b["close"])
            if shares < 0 and spec["borrow_rate"] is not None:
                entries.append((b["date"], spec["borrow_rate"] * (-shares) * b["close"]))
        while len(gross) < len(grid):
            gross.append(gross[-1])
        net = _net_of(gross, grid, entries)
        dts, g, n, bankrupt = _truncate(grid, gross, net)
        per[t] = {"dates": dts, "gross": g, "net": n, "bankrupt": bankrupt,
                  "gross_full": gross, "entries": entries}
        entries_all.extend(entries)
    for d in decisions:
        if d.get("tokens_in", 0) + d.get("tokens_out", 0) > 0:
            amount = (d["tokens_in"] + d["tokens_out"]) / 1000.0 * spec["token_price"]
            entries_all.append((d["date"], amount))
    gross_p = [sum(per[t]["gross_full"][i] for t in tickers) for i in range(len(grid))]
    net_p = _net_of(gross_p, grid, entries_all)
    dts, g, n, bankrupt = _truncate(grid, gross_p, net_p)
    return {
        "per_ticker": per,
        "portfolio": {"dates": dts, "gross": g, "net": n, "bankrupt": bankrupt},
        "cost_total": sum(a for _, a in entries_all),
    }
