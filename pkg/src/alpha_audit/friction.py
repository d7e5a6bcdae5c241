"""Trading-cost model and itemized per-fill ledger.

Net performance is reconstructed as gross minus an explicit cost ledger, so
every deduction is auditable line by line. Per-fill market costs follow a
linear commission plus half-spread plus a power-law temporary-impact term
(``kappa * |dw|**beta`` on the capital base backing the trade, ``beta`` close
to 1 for the standard linear case). Inference costs are charged per thousand
tokens, and short financing accrues daily on short notional.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ContractError, ValidationError

# The eight canonical cost components a coverage audit reasons over.
CANONICAL_COMPONENTS = (
    "commission",
    "spread",
    "slippage",
    "market_impact",
    "latency",
    "financing",
    "taxes",
    "token_cost",
)


@dataclass(frozen=True)
class FrictionSpec:
    """Cost parameterization for one backtest run.

    All rates are dimensionless fractions. ``borrow_rate`` is ``None`` when
    short financing has not been declared, in which case the engine rejects
    short fills instead of silently pricing them at zero.
    """

    commission_rate: float = 0.0
    kappa: float = 0.0
    beta: float = 1.0
    token_price: float = 0.0  # currency per 1000 tokens
    latency_bars: int = 0
    borrow_rate: Optional[float] = None  # per-day fraction of short notional

    def __post_init__(self) -> None:
        for name in ("commission_rate", "kappa", "token_price"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.beta <= 0:
            raise ValidationError(f"beta must be > 0, got {self.beta}")
        if self.latency_bars < 0 or int(self.latency_bars) != self.latency_bars:
            raise ValidationError(f"latency_bars must be a nonnegative integer, got {self.latency_bars}")
        if self.borrow_rate is not None and self.borrow_rate < 0:
            raise ValidationError(f"borrow_rate must be >= 0, got {self.borrow_rate}")

    @property
    def shorts_allowed(self) -> bool:
        return self.borrow_rate is not None


@dataclass(frozen=True)
class FrictionLedgerEntry:
    """One itemized deduction: all components in currency, all >= 0."""

    date: dt.date
    ticker: str
    commission: float = 0.0
    spread_cost: float = 0.0
    impact_cost: float = 0.0
    token_cost: float = 0.0
    borrow_cost: float = 0.0

    def __post_init__(self) -> None:
        for name in ("commission", "spread_cost", "impact_cost", "token_cost", "borrow_cost"):
            if getattr(self, name) < 0:
                raise ValidationError(f"ledger component {name} must be >= 0, got {getattr(self, name)}")

    @property
    def total(self) -> float:
        return self.commission + self.spread_cost + self.impact_cost + self.token_cost + self.borrow_cost

    def as_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "ticker": self.ticker,
            "commission": self.commission,
            "spread_cost": self.spread_cost,
            "impact_cost": self.impact_cost,
            "token_cost": self.token_cost,
            "borrow_cost": self.borrow_cost,
            "total": self.total,
        }


@dataclass(frozen=True)
class LedgerTotals:
    """Componentwise sums over a ledger plus the grand total."""

    commission: float = 0.0
    spread_cost: float = 0.0
    impact_cost: float = 0.0
    token_cost: float = 0.0
    borrow_cost: float = 0.0

    @property
    def total(self) -> float:
        return self.commission + self.spread_cost + self.impact_cost + self.token_cost + self.borrow_cost

    def as_dict(self) -> dict:
        return {
            "commission": self.commission,
            "spread_cost": self.spread_cost,
            "impact_cost": self.impact_cost,
            "token_cost": self.token_cost,
            "borrow_cost": self.borrow_cost,
            "total": self.total,
        }


def trade_costs(
    traded_notional: float,
    turnover: float,
    spread: float,
    spec: FrictionSpec,
    date: Optional[dt.date] = None,
    ticker: str = "",
) -> FrictionLedgerEntry:
    """Market cost components for a single fill.

    ``traded_notional`` is ``turnover * capital_base`` in currency, so the
    impact charge ``kappa * turnover**beta * capital_base`` can be recovered
    without passing the base explicitly. Zero turnover yields an all-zero
    entry regardless of the spec.
    """
    if traded_notional < 0 or turnover < 0 or spread < 0:
        raise ContractError(
            f"trade_costs requires nonnegative inputs, got notional={traded_notional},"
            f" turnover={turnover}, spread={spread}"
        )
    commission = spec.commission_rate * traded_notional
    spread_cost = 0.5 * spread * traded_notional
    if turnover > 0:
        impact_cost = spec.kappa * turnover ** spec.beta * (traded_notional / turnover)
    else:
        impact_cost = 0.0
    return FrictionLedgerEntry(
        date=date if date is not None else dt.date(1970, 1, 1),
        ticker=ticker,
        commission=commission,
        spread_cost=spread_cost,
        impact_cost=impact_cost,
    )


def token_cost(tokens_in: int, tokens_out: int, spec: FrictionSpec) -> float:
    """Inference cost in currency for one decision's token usage."""
    if tokens_in < 0 or tokens_out < 0:
        raise ContractError(f"token counts must be >= 0, got in={tokens_in} out={tokens_out}")
    return (tokens_in + tokens_out) / 1000.0 * spec.token_price


def ledger_sum(entries: Iterable[FrictionLedgerEntry]) -> LedgerTotals:
    """Componentwise totals; an empty ledger sums to all zeros."""
    commission = spread_cost = impact_cost = tok = borrow = 0.0
    for e in entries:
        commission += e.commission
        spread_cost += e.spread_cost
        impact_cost += e.impact_cost
        tok += e.token_cost
        borrow += e.borrow_cost
    return LedgerTotals(commission, spread_cost, impact_cost, tok, borrow)


def validate_components(names: Iterable[str], context: str = "friction component") -> frozenset:
    """Check component names against the canonical eight; returns them as a set."""
    out = set()
    for name in names:
        if name not in CANONICAL_COMPONENTS:
            raise ValidationError(
                f"unknown {context} {name!r}; canonical names are: {', '.join(CANONICAL_COMPONENTS)}"
            )
        out.add(name)
    return frozenset(out)


@dataclass(frozen=True)
class CoverageMatrix:
    """Modeled/unmodeled flags per system and cost component."""

    systems: tuple
    components: tuple = CANONICAL_COMPONENTS
    flags: tuple = field(default=())  # flags[i][j] True iff systems[i] models components[j]

    @property
    def unmodeled_count(self) -> int:
        return sum(1 for row in self.flags for modeled in row if not modeled)

    @property
    def cell_count(self) -> int:
        return len(self.systems) * len(self.components)

    def as_dict(self) -> dict:
        return {
            "systems": list(self.systems),
            "components": list(self.components),
            "flags": [
                {c: bool(v) for c, v in zip(self.components, row)} for row in self.flags
            ],
            "unmodeled_count": self.unmodeled_count,
            "cell_count": self.cell_count,
        }


def coverage_matrix(systems: Sequence[tuple] | Mapping[str, Iterable[str]]) -> CoverageMatrix:
    """Build the system x component coverage matrix.

    ``systems`` maps system name to the set of components it models (a mapping
    or a sequence of ``(name, components)`` pairs). Component names must be
    canonical.
    """
    if isinstance(systems, Mapping):
        pairs = list(systems.items())
    else:
        pairs = [(name, comps) for name, comps in systems]
    names = tuple(name for name, _ in pairs)
    rows = []
    for name, comps in pairs:
        modeled = validate_components(comps, context=f"friction component for system {name!r}")
        rows.append(tuple(c in modeled for c in CANONICAL_COMPONENTS))
    return CoverageMatrix(systems=names, flags=tuple(rows))
