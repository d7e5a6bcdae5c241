"""Multi-agent disaggregation: is the ensemble earning its coordination cost?

A multi-agent net-return delta compares the consensus system against its
best constituent agent run alone under identical rules; role similarity and
disagreement expose whether the "committee" is actually independent experts
or one prior speaking through several personas. The reserved agent id
``__consensus__`` marks the ensemble's merged log.

Agents are compared on a shared (date, ticker) grid. Emissions are bucketed
to buy/sell/hold for comparison (weights by sign); cells missing any agent
are excluded and tallied, so coverage gaps are not scored as disagreement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .backtest import EquityCurve
from .datamodel import DecisionLog
from .errors import ContractError, ValidationError

CONSENSUS_AGENT_ID = "__consensus__"
_WEIGHT_EPS = 1e-12


def _bucket(record) -> str:
    if record.action is not None:
        return record.action
    w = record.target_weight
    if w > _WEIGHT_EPS:
        return "buy"
    if w < -_WEIGHT_EPS:
        return "sell"
    return "hold"


def _cells(log: DecisionLog) -> dict:
    """Last emission per (date, ticker); duplicate cells keep the final record."""
    out = {}
    for r in log.records:
        out[(r.date, r.ticker)] = _bucket(r)
    return out


@dataclass(frozen=True)
class DisagreementResult:
    rate: float
    cells_considered: int
    cells_excluded: int

    def as_dict(self) -> dict:
        return {
            "rate": self.rate,
            "cells_considered": self.cells_considered,
            "cells_excluded": self.cells_excluded,
        }


def disagreement_rate(logs: Mapping[str, DecisionLog]) -> DisagreementResult:
    """Fraction of fully-covered grid cells where agents are not unanimous."""
    if len(logs) < 2:
        raise ContractError(f"disagreement needs >= 2 agents, got {len(logs)}")
    per_agent = {a: _cells(log) for a, log in logs.items()}
    all_cells = set()
    for cells in per_agent.values():
        all_cells.update(cells)
    shared = [c for c in all_cells if all(c in cells for cells in per_agent.values())]
    if not shared:
        raise ValidationError("agents share no (date, ticker) cells")
    disagreements = sum(
        1 for c in shared if len({cells[c] for cells in per_agent.values()}) > 1
    )
    return DisagreementResult(
        rate=disagreements / len(shared),
        cells_considered=len(shared),
        cells_excluded=len(all_cells) - len(shared),
    )


@dataclass(frozen=True)
class SimilarityMatrix:
    agents: tuple
    matrix: tuple  # matrix[i][j] = action-agreement fraction for agents i, j

    def as_dict(self) -> dict:
        return {
            "agents": list(self.agents),
            "matrix": [list(row) for row in self.matrix],
        }


def role_similarity(logs: Mapping[str, DecisionLog]) -> SimilarityMatrix:
    """Pairwise action-agreement matrix (unit diagonal, symmetric).

    Pairs are scored over the cells both agents cover; a pair with no shared
    cells scores 0. Similarity is operationalized as action agreement, not
    rationale-text similarity, so it is computable from the logs alone.
    """
    if len(logs) < 2:
        raise ContractError(f"role similarity needs >= 2 agents, got {len(logs)}")
    agents = tuple(sorted(logs))
    per_agent = {a: _cells(logs[a]) for a in agents}
    n = len(agents)
    matrix = [[1.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a, b = per_agent[agents[i]], per_agent[agents[j]]
            shared = [c for c in a if c in b]
            if shared:
                agree = sum(1 for c in shared if a[c] == b[c])
                sim = agree / len(shared)
            else:
                sim = 0.0
            matrix[i][j] = matrix[j][i] = sim
    return SimilarityMatrix(agents=agents, matrix=tuple(tuple(row) for row in matrix))


def _net_cr(curve: EquityCurve) -> float:
    return curve.net[-1] / curve.gross[0] - 1.0


def _log_totals(log: DecisionLog) -> tuple:
    tokens = sum(r.tokens_in + r.tokens_out for r in log.records)
    latency = sum(r.latency_ms for r in log.records)
    return tokens, latency


@dataclass(frozen=True)
class MultiAgentDelta:
    net_return_delta: float  # multi net CR - best single net CR
    best_agent: str
    best_single_net_cr: float
    multi_net_cr: float
    coordination_tokens: int
    coordination_latency_ms: float

    def as_dict(self) -> dict:
        return {
            "net_return_delta": self.net_return_delta,
            "best_agent": self.best_agent,
            "best_single_net_cr": self.best_single_net_cr,
            "multi_net_cr": self.multi_net_cr,
            "coordination_tokens": self.coordination_tokens,
            "coordination_latency_ms": self.coordination_latency_ms,
        }


def multiagent_delta(
    multi_curve: EquityCurve,
    single_curves: Mapping[str, EquityCurve],
    multi_log: DecisionLog = None,
    single_logs: Mapping[str, DecisionLog] = None,
) -> MultiAgentDelta:
    """Net-CR delta of the ensemble over its best constituent, plus overhead.

    Coordination cost is the whole system's token/latency total (every
    constituent plus the consensus log) minus the best single agent's own
    total; logs may be omitted when only the return delta is needed.
    """
    if not single_curves:
        raise ContractError("need at least one single-agent curve")
    for label, curve in single_curves.items():
        if curve.dates != multi_curve.dates:
            raise ContractError(f"{label}: date grid does not match the multi-agent curve")
    single_crs = {a: _net_cr(c) for a, c in single_curves.items()}
    best_agent = max(sorted(single_crs), key=lambda a: single_crs[a])
    best_cr = single_crs[best_agent]
    multi_cr = _net_cr(multi_curve)
    tokens = latency = 0
    if multi_log is not None:
        tokens, latency = _log_totals(multi_log)
        if single_logs is not None and best_agent in single_logs:
            bt, bl = _log_totals(single_logs[best_agent])
            tokens, latency = tokens - bt, latency - bl
    return MultiAgentDelta(
        net_return_delta=multi_cr - best_cr,
        best_agent=best_agent,
        best_single_net_cr=best_cr,
        multi_net_cr=multi_cr,
        coordination_tokens=tokens,
        coordination_latency_ms=latency,
    )
