"""alpha-audit: evidence auditing for recorded LLM-trading-agent backtests.

Replays decision logs against prices under an itemized friction ledger,
quantifies Sharpe uncertainty and confidence calibration, probes
counterfactual robustness and multi-agent value-add, and gates claim
language behind six minimum-evidence protocol checks.
"""

__version__ = "0.1.0"

from .backtest import (
    BacktestResult,
    EquityCurve,
    MetricTriple,
    buy_and_hold,
    metrics,
    portfolio_aggregate,
    run_backtest,
)
from .calibration import BinStats, CalibrationTrial, ece, regime_conditioned_ece, reliability_curve
from .counterfactual import BiasScore, MonotonicityVerdict, bias_score, flip_rate, monotonicity_verdict
from .datamodel import (
    CounterfactualTrial,
    CutoffManifest,
    DecisionLog,
    DecisionRecord,
    PriceBar,
    PriceSeries,
    UniverseMembership,
    load_counterfactual_trials,
    load_decisions,
    load_manifest,
    load_price_dir,
    load_prices,
)
from .disaggregation import (
    CONSENSUS_AGENT_ID,
    disagreement_rate,
    multiagent_delta,
    role_similarity,
)
from .errors import AuditError, ContractError, ParseError, ValidationError
from .friction import (
    CANONICAL_COMPONENTS,
    CoverageMatrix,
    FrictionLedgerEntry,
    FrictionSpec,
    LedgerTotals,
    coverage_matrix,
    ledger_sum,
    token_cost,
    trade_costs,
)
from .protocol import (
    ComplianceReport,
    EvidenceBundle,
    ProtocolVerdict,
    classify_window,
    contamination_delta,
    evaluate,
)
from .sharpestats import (
    SharpeQuery,
    ci_half_width,
    lo_se,
    norm_ppf,
    t_hurdle,
    zero_coverage_boundary,
)
