"""Deterministic replay of decision logs into gross/net equity curves.

Execution model (documented because recorded logs rarely state one):

* Each decision ticker gets an equal sleeve of the initial capital, entered
  fully at the first bar's close with a one-time entry cost, so an all-hold
  log reproduces buy-and-hold exactly.
* A decision dated t fills at the open of the first bar after t, shifted by
  ``latency_bars``; the earliest possible fill is bar 1. Fills outside a
  ticker's universe intervals, short fills without a declared borrow rate,
  and fills past the price series or a delisting are rejected and recorded,
  never silently executed.
* Gross marks positions to close and never charges costs; the itemized
  ledger accumulates costs per fill (plus daily borrow and portfolio-level
  token costs), and net equals gross minus the cumulative ledger total by
  construction.
* Delisting liquidates at ``delist_recovery`` times the last close. A curve
  whose net value reaches zero is truncated there and flagged bankrupt.

Turnover below 1e-12 in weight terms is treated as a no-op so repeated
identical targets do not generate phantom fills.
"""

from __future__ import annotations

import bisect
import datetime as dt
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .datamodel import DecisionLog, PriceSeries, UniverseMembership
from .errors import ContractError, ValidationError
from .friction import FrictionLedgerEntry, FrictionSpec, ledger_sum, token_cost, trade_costs

PORTFOLIO_TICKER = "__portfolio__"
_MIN_TURNOVER = 1e-12


@dataclass(frozen=True)
class EquityCurve:
    """Daily gross/net values plus the itemized ledger behind the gap."""

    label: str
    dates: tuple
    gross: tuple
    net: tuple
    ledger: tuple
    bankrupt: bool = False

    def __post_init__(self) -> None:
        if not (len(self.dates) == len(self.gross) == len(self.net)):
            raise ValidationError(f"{self.label}: date/value arrays must share one length")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class MetricTriple:
    """Cumulative return, Sharpe (None when undefined), max drawdown."""

    cumulative_return: float
    sharpe: Optional[float]
    max_drawdown: float

    def as_dict(self) -> dict:
        return {
            "cumulative_return": self.cumulative_return,
            "sharpe": self.sharpe,
            "max_drawdown": self.max_drawdown,
        }


@dataclass(frozen=True)
class TradeException:
    """One rejected or unexecutable decision, kept for the audit trail."""

    date: dt.date
    ticker: str
    agent_id: str
    kind: str
    detail: str

    def as_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "ticker": self.ticker,
            "agent_id": self.agent_id,
            "kind": self.kind,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class BacktestResult:
    per_ticker: dict
    portfolio: EquityCurve
    exceptions: tuple
    out_of_universe_fills: int = 0  # engine never fills outside membership; kept as evidence


def _net_values(gross: Sequence[float], dates: Sequence[dt.date], entries: Sequence[FrictionLedgerEntry]) -> list:
    ordered = sorted(entries, key=lambda e: e.date)
    net, cum, k = [], 0.0, 0
    for day, g in zip(dates, gross):
        while k < len(ordered) and ordered[k].date <= day:
            cum += ordered[k].total
            k += 1
        net.append(g - cum)
    return net


def _truncate_curve(label: str, dates, gross, net, entries) -> EquityCurve:
    cut = len(net)
    bankrupt = False
    for i, v in enumerate(net):
        if v <= 0:
            cut, bankrupt = i + 1, True
            break
    return EquityCurve(
        label=label,
        dates=tuple(dates[:cut]),
        gross=tuple(gross[:cut]),
        net=tuple(net[:cut]),
        ledger=tuple(entries),
        bankrupt=bankrupt,
    )


def _target_of(record) -> Optional[float]:
    if record.action == "hold":
        return None
    if record.action == "buy":
        return 1.0
    if record.action == "sell":
        return 0.0
    return record.target_weight


class _Sleeve:
    """Replay state for one ticker's share of the portfolio."""

    def __init__(
        self,
        series: PriceSeries,
        membership: Optional[UniverseMembership],
        unrestricted: bool,
        spec: FrictionSpec,
        capital: float,
    ) -> None:
        self.series = series
        self.membership = membership
        self.unrestricted = unrestricted
        self.spec = spec
        self.capital = capital
        self.entries: list = []
        self.exceptions: list = []
        self.gross: list = []
        self.liq_index: Optional[int] = None
        if membership is not None and membership.delist_date is not None:
            idx = bisect.bisect_right(series.dates, membership.delist_date) - 1
            self.liq_index = idx  # -1 when delisted before the first bar

    def tradable(self, day: dt.date) -> bool:
        if self.unrestricted:
            return True
        return self.membership is not None and self.membership.contains(day)

    def schedule(self, records) -> dict:
        """Map bar index -> ordered fill targets, recording rejections."""
        fills: dict = {}
        bars = self.series.bars
        dates = self.series.dates
        for r in records:
            target = _target_of(r)
            if target is None:
                continue
            base = bisect.bisect_right(dates, r.date)
            if base == 0:
                self._reject(r, "before_window", "decision precedes the price window")
                continue
            ex = base + self.spec.latency_bars
            if ex >= len(bars):
                self._reject(r, "execution_window_exceeded",
                             f"no bar at decision date + latency {self.spec.latency_bars}")
                continue
            if self.liq_index is not None and ex > self.liq_index:
                self._reject(r, "after_delisting", "fill would land after delisting")
                continue
            fill_date = dates[ex]
            if not self.tradable(fill_date):
                reason = "no universe membership" if self.membership is None else "outside membership intervals"
                self._reject(r, "out_of_universe", f"fill date {fill_date} {reason}")
                continue
            if target < 0 and not self.spec.shorts_allowed:
                self._reject(r, "short_undeclared", "short target without declared borrow_rate")
                continue
            fills.setdefault(ex, []).append(target)
        return fills

    def _reject(self, record, kind: str, detail: str) -> None:
        self.exceptions.append(TradeException(record.date, record.ticker, record.agent_id, kind, detail))

    def replay(self, fills: dict) -> None:
        bars = self.series.bars
        spec = self.spec
        cash, shares = self.capital, 0.0
        if self.tradable(bars[0].date) and self.liq_index != -1:
            shares, cash = self.capital / bars[0].close, 0.0
            self.entries.append(trade_costs(self.capital, 1.0, bars[0].spread, spec,
                                            date=bars[0].date, ticker=self.series.ticker))
        else:
            detail = ("delisted before the price window" if self.liq_index == -1
                      else "initial entry outside universe membership")
            self.exceptions.append(TradeException(
                bars[0].date, self.series.ticker, "", "entry_suppressed", detail))
        recovery = self.membership.delist_recovery if self.membership is not None else None
        for i, bar in enumerate(bars):
            for target in fills.get(i, ()):
                value = cash + shares * bar.open
                if value <= 0:
                    self.exceptions.append(TradeException(
                        bar.date, self.series.ticker, "", "fill_skipped",
                        "sleeve value nonpositive at fill"))
                    continue
                dw = target - shares * bar.open / value
                if abs(dw) <= _MIN_TURNOVER:
                    continue
                self.entries.append(trade_costs(abs(dw) * value, abs(dw), bar.spread, spec,
                                                date=bar.date, ticker=self.series.ticker))
                new_shares = target * value / bar.open
                cash -= (new_shares - shares) * bar.open
                shares = new_shares
            if self.liq_index is not None and i == self.liq_index and shares != 0.0:
                cash += shares * recovery * bar.close
                shares = 0.0
            self.gross.append(cash + shares * bar.close)
            if shares < 0 and spec.borrow_rate is not None:
                self.entries.append(FrictionLedgerEntry(
                    date=bar.date, ticker=self.series.ticker,
                    borrow_cost=spec.borrow_rate * (-shares) * bar.close))

    def extend_to(self, length: int) -> None:
        while len(self.gross) < length:
            self.gross.append(self.gross[-1])


def run_backtest(
    prices: Mapping[str, PriceSeries],
    decisions: DecisionLog,
    universe: Sequence[UniverseMembership],
    spec: FrictionSpec,
    initial_capital: float,
    agent_id: Optional[str] = None,
) -> BacktestResult:
    """Replay one agent's log into per-ticker sleeves plus a portfolio curve.

    Tickers in the log split ``initial_capital`` equally. Token costs are
    charged on the portfolio ledger only, dated at the decision.
    """
    if initial_capital <= 0:
        raise ContractError(f"initial_capital must be > 0, got {initial_capital}")
    agents = decisions.agents
    if agent_id is not None:
        decisions = decisions.for_agent(agent_id)
        if not decisions.records:
            raise ValidationError(f"no decisions for agent {agent_id!r} (have: {', '.join(agents)})")
    elif len(agents) > 1:
        raise ValidationError(f"log contains multiple agents {agents}; pass agent_id to select one")
    if not decisions.records:
        raise ValidationError("decision log is empty; nothing to replay")

    tickers = decisions.tickers
    missing = [t for t in tickers if t not in prices]
    if missing:
        raise ValidationError(f"no price series for decision tickers: {', '.join(missing)}")

    grid_series = max((prices[t] for t in tickers), key=len)
    grid = grid_series.dates
    memberships = {m.ticker: m for m in universe}
    unrestricted = len(universe) == 0
    for t in tickers:
        series = prices[t]
        if series.dates != grid[: len(series)]:
            raise ValidationError(f"{t}: price dates do not align with the common grid")
        if len(series) < len(grid):
            m = memberships.get(t)
            if m is None or m.delist_date is None:
                raise ValidationError(f"{t}: price series ends early without a declared delisting")

    sleeve_capital = initial_capital / len(tickers)
    per_ticker: dict = {}
    exceptions: list = []
    portfolio_entries: list = []
    gross_rows = []
    for t in tickers:
        sleeve = _Sleeve(prices[t], memberships.get(t), unrestricted, spec, sleeve_capital)
        fills = sleeve.schedule(decisions.for_ticker(t))
        sleeve.replay(fills)
        sleeve.extend_to(len(grid))
        net = _net_values(sleeve.gross, grid, sleeve.entries)
        per_ticker[t] = _truncate_curve(t, grid, sleeve.gross, net, sleeve.entries)
        exceptions.extend(sleeve.exceptions)
        portfolio_entries.extend(sleeve.entries)
        gross_rows.append(sleeve.gross)

    for r in decisions.records:
        if r.tokens_in + r.tokens_out > 0:
            portfolio_entries.append(FrictionLedgerEntry(
                date=r.date, ticker=PORTFOLIO_TICKER,
                token_cost=token_cost(r.tokens_in, r.tokens_out, spec)))

    portfolio_gross = [sum(row[i] for row in gross_rows) for i in range(len(grid))]
    portfolio_net = _net_values(portfolio_gross, grid, portfolio_entries)
    portfolio = _truncate_curve(PORTFOLIO_TICKER, grid, portfolio_gross, portfolio_net, portfolio_entries)
    return BacktestResult(
        per_ticker=per_ticker,
        portfolio=portfolio,
        exceptions=tuple(sorted(exceptions, key=lambda e: (e.date, e.ticker, e.kind))),
    )


def buy_and_hold(
    prices: PriceSeries,
    spec: FrictionSpec,
    initial_capital: float,
    delist: Optional[tuple] = None,
    grid: Optional[tuple] = None,
) -> EquityCurve:
    """Full entry at the first close, held; net subtracts the one-time entry cost.

    ``delist=(date, recovery)`` liquidates like the engine does; ``grid``
    extends the curve flat past the series end so portfolios stay aligned.
    """
    if initial_capital <= 0:
        raise ContractError(f"initial_capital must be > 0, got {initial_capital}")
    bars = prices.bars
    entry = trade_costs(initial_capital, 1.0, bars[0].spread, spec,
                        date=bars[0].date, ticker=prices.ticker)
    liq_index = None
    recovery = None
    if delist is not None:
        delist_date, recovery = delist
        idx = bisect.bisect_right(prices.dates, delist_date) - 1
        liq_index = idx
    shares = initial_capital / bars[0].close
    dates = list(prices.dates)
    gross = []
    cash = 0.0
    for i, bar in enumerate(bars):
        if liq_index is not None and i == liq_index and shares != 0.0:
            cash += shares * recovery * bar.close
            shares = 0.0
        gross.append(cash + shares * bar.close)
    if grid is not None:
        if tuple(dates) != tuple(grid[: len(dates)]):
            raise ValidationError(f"{prices.ticker}: series dates do not align with the supplied grid")
        while len(gross) < len(grid):
            gross.append(gross[-1])
        dates = list(grid)
    net = _net_values(gross, dates, [entry])
    return _truncate_curve(prices.ticker, dates, gross, net, [entry])


def metrics(curve: EquityCurve, convention: int) -> tuple:
    """Gross and net metric triples for one curve.

    Cumulative return is measured against the initial (pre-cost) capital,
    i.e. the first gross value, for both variants. Sharpe uses sample-std
    daily returns, zero risk-free rate, annualized by sqrt(252) only when
    ``convention`` is 252. Drawdown is peak-relative, capped at 1.
    """
    if convention not in (1, 252):
        raise ContractError(f"convention must be 1 or 252, got {convention}")
    if len(curve) < 2:
        raise ContractError(f"{curve.label}: need at least 2 curve points, got {len(curve)}")
    base = curve.gross[0]
    out = []
    for values in (curve.gross, curve.net):
        arr = np.asarray(values, dtype=float)
        cr = arr[-1] / base - 1.0
        rets = arr[1:] / arr[:-1] - 1.0
        std = float(np.std(rets, ddof=1)) if len(rets) > 1 else 0.0
        if std > 0 and math.isfinite(std):
            sharpe = float(np.mean(rets)) / std
            if convention == 252:
                sharpe *= math.sqrt(252.0)
        else:
            sharpe = None
        peak = np.maximum.accumulate(arr)
        with np.errstate(divide="ignore", invalid="ignore"):
            dd = np.where(peak > 0, (peak - arr) / peak, 1.0)
        mdd = min(1.0, float(np.max(dd)))
        out.append(MetricTriple(cumulative_return=float(cr), sharpe=sharpe, max_drawdown=max(0.0, mdd)))
    return out[0], out[1]


def portfolio_aggregate(curves: Sequence[EquityCurve], weights: Sequence[float]) -> EquityCurve:
    """Weighted sum of aligned curves; sleeve ledgers are scaled and merged.

    Weights must be nonnegative and sum to 1 (1e-9 slack). Capital is
    allocated per sleeve at t=0 with no cross-sleeve rebalancing afterwards.
    """
    if len(curves) != len(weights) or not curves:
        raise ContractError("need one weight per curve and at least one curve")
    if any(w < 0 for w in weights):
        raise ContractError("weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ContractError(f"weights must sum to 1, got {sum(weights)!r}")
    grid = curves[0].dates
    for c in curves[1:]:
        if c.dates != grid:
            raise ValidationError(f"{c.label}: date grid does not match {curves[0].label}")
    gross = [0.0] * len(grid)
    net = [0.0] * len(grid)
    entries = []
    for curve, w in zip(curves, weights):
        if w == 0:
            continue
        for i in range(len(grid)):
            gross[i] += w * curve.gross[i]
            net[i] += w * curve.net[i]
        for e in curve.ledger:
            entries.append(FrictionLedgerEntry(
                date=e.date, ticker=e.ticker,
                commission=w * e.commission, spread_cost=w * e.spread_cost,
                impact_cost=w * e.impact_cost, token_cost=w * e.token_cost,
                borrow_cost=w * e.borrow_cost))
    entries.sort(key=lambda e: (e.date, e.ticker))
    return _truncate_curve(PORTFOLIO_TICKER, grid, gross, net, entries)


def curve_report(curve: EquityCurve, convention: int) -> dict:
    """Bundle-ready summary of one curve (both variants plus ledger totals)."""
    g, n = metrics(curve, convention)
    totals = ledger_sum(curve.ledger)
    return {
        "label": curve.label,
        "start": curve.dates[0].isoformat(),
        "end": curve.dates[-1].isoformat(),
        "observations": len(curve) - 1,
        "initial_capital": curve.gross[0],
        "final_gross": curve.gross[-1],
        "final_net": curve.net[-1],
        "bankrupt": curve.bankrupt,
        "gross": g.as_dict(),
        "net": n.as_dict(),
        "ledger_totals": totals.as_dict(),
    }
