"""Domain types and loaders for the three input formats.

Inputs are plain files so that audits stay reproducible from artifacts alone:

* prices: one CSV per ticker, header ``date,open,high,low,close,volume,spread``
  (ISO dates; ``spread`` is the full bid-ask spread as a fraction of price);
* decision log: JSON Lines, one flat object per record with keys named
  exactly as the ``DecisionRecord`` fields;
* manifest: a single JSON document with ``CutoffManifest`` keys, a ``universe``
  list, and a ``frictions`` section.

Loaders validate every invariant up front and never default an absent field
silently; optional fields stay ``None`` so downstream checks can tell
"not reported" from "reported as zero". All loaded types are immutable.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import ParseError, ValidationError
from .friction import FrictionSpec, validate_components

ACTIONS = ("buy", "sell", "hold")
VIEWS = ("long", "short", "neutral")
CLAIM_TIERS = ("extractor", "prototype", "deployable", "autonomous")


def _parse_date(raw: str, context: str) -> dt.date:
    try:
        return dt.date.fromisoformat(str(raw))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{context}: invalid ISO date {raw!r}") from exc


def _parse_float(raw, context: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{context}: expected a number, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# Prices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PriceBar:
    """One daily bar; ``spread`` is the full bid-ask spread / price."""

    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float
    spread: float

    def __post_init__(self) -> None:
        for name in ("open", "high", "low", "close"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{self.date}: {name} must be > 0, got {getattr(self, name)}")
        if self.volume < 0:
            raise ValidationError(f"{self.date}: volume must be >= 0, got {self.volume}")
        if self.spread < 0:
            raise ValidationError(f"{self.date}: spread must be >= 0, got {self.spread}")
        if self.low > min(self.open, self.close):
            raise ValidationError(f"{self.date}: low {self.low} exceeds min(open, close)")
        if self.high < max(self.open, self.close):
            raise ValidationError(f"{self.date}: high {self.high} below max(open, close)")


@dataclass(frozen=True)
class PriceSeries:
    """Ordered daily bars for one ticker; dates strictly increasing."""

    ticker: str
    bars: tuple

    def __post_init__(self) -> None:
        if not self.bars:
            raise ValidationError(f"{self.ticker}: price series must be nonempty")
        prev = None
        for bar in self.bars:
            if prev is not None and bar.date <= prev:
                kind = "duplicate" if bar.date == prev else "non-monotone"
                raise ValidationError(f"{self.ticker}: {kind} date {bar.date}")
            prev = bar.date

    @property
    def dates(self) -> tuple:
        return tuple(b.date for b in self.bars)

    def __len__(self) -> int:
        return len(self.bars)


PRICE_HEADER = ["date", "open", "high", "low", "close", "volume", "spread"]


def load_prices(path) -> PriceSeries:
    """Load one ticker's CSV; the ticker is the file stem."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"price file not found: {path}")
    bars = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty price file") from None
        if [h.strip() for h in header] != PRICE_HEADER:
            raise ParseError(f"{path}: header must be {','.join(PRICE_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PRICE_HEADER):
                raise ParseError(f"{path}:{lineno}: expected {len(PRICE_HEADER)} fields, got {len(row)}")
            ctx = f"{path}:{lineno}"
            bar = PriceBar(
                date=_parse_date(row[0], ctx),
                open=_parse_float(row[1], ctx),
                high=_parse_float(row[2], ctx),
                low=_parse_float(row[3], ctx),
                close=_parse_float(row[4], ctx),
                volume=_parse_float(row[5], ctx),
                spread=_parse_float(row[6], ctx),
            )
            bars.append(bar)
    return PriceSeries(ticker=path.stem, bars=tuple(bars))


def load_price_dir(path) -> dict:
    """Load every ``*.csv`` in a directory, keyed by ticker."""
    path = Path(path)
    if not path.is_dir():
        raise ParseError(f"price directory not found: {path}")
    out = {}
    for csv_path in sorted(path.glob("*.csv")):
        series = load_prices(csv_path)
        out[series.ticker] = series
    if not out:
        raise ParseError(f"no price CSVs found in {path}")
    return out


def serialize_prices(series: PriceSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PRICE_HEADER)
    for b in series.bars:
        writer.writerow([b.date.isoformat(), b.open, b.high, b.low, b.close, b.volume, b.spread])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Decisions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionRecord:
    """One agent decision for one ticker-day.

    Exactly one of ``action`` / ``target_weight`` is present. ``confidence``
    is optional and never imputed. ``round`` is reserved for debate-round
    bookkeeping in multi-agent logs.
    """

    date: dt.date
    ticker: str
    agent_id: str
    action: Optional[str] = None
    target_weight: Optional[float] = None
    confidence: Optional[float] = None
    tokens_in: int = 0
    tokens_out: int = 0
    latency_ms: float = 0.0
    rationale: Optional[str] = None
    round: Optional[int] = None

    def __post_init__(self) -> None:
        where = f"{self.agent_id}/{self.ticker}@{self.date}"
        if (self.action is None) == (self.target_weight is None):
            raise ValidationError(f"{where}: exactly one of action/target_weight must be present")
        if self.action is not None and self.action not in ACTIONS:
            raise ValidationError(f"{where}: action must be one of {ACTIONS}, got {self.action!r}")
        if self.target_weight is not None and not -1.0 <= self.target_weight <= 1.0:
            raise ValidationError(f"{where}: target_weight must be in [-1, 1], got {self.target_weight}")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"{where}: confidence must be in [0, 1], got {self.confidence}")
        if self.tokens_in < 0 or self.tokens_out < 0:
            raise ValidationError(f"{where}: token counts must be >= 0")
        if self.latency_ms < 0:
            raise ValidationError(f"{where}: latency_ms must be >= 0")


@dataclass(frozen=True)
class DecisionLog:
    """Decision records grouped by agent and ticker, date-sorted within."""

    records: tuple

    @staticmethod
    def from_records(records: Sequence[DecisionRecord]) -> "DecisionLog":
        ordered = tuple(sorted(records, key=lambda r: (r.agent_id, r.ticker, r.date)))
        return DecisionLog(records=ordered)

    @property
    def agents(self) -> tuple:
        return tuple(sorted({r.agent_id for r in self.records}))

    @property
    def tickers(self) -> tuple:
        return tuple(sorted({r.ticker for r in self.records}))

    def for_agent(self, agent_id: str) -> "DecisionLog":
        return DecisionLog(records=tuple(r for r in self.records if r.agent_id == agent_id))

    def for_ticker(self, ticker: str) -> tuple:
        return tuple(r for r in self.records if r.ticker == ticker)

    def __len__(self) -> int:
        return len(self.records)


_DECISION_KEYS = {
    "date", "ticker", "agent_id", "action", "target_weight", "confidence",
    "tokens_in", "tokens_out", "latency_ms", "rationale", "round",
}


def _decision_from_obj(obj: Mapping, ctx: str) -> DecisionRecord:
    unknown = set(obj) - _DECISION_KEYS
    if unknown:
        raise ParseError(f"{ctx}: unknown decision keys {sorted(unknown)}")
    for key in ("date", "ticker", "agent_id", "tokens_in", "tokens_out", "latency_ms"):
        if key not in obj:
            raise ParseError(f"{ctx}: missing required key {key!r}")
    return DecisionRecord(
        date=_parse_date(obj["date"], ctx),
        ticker=str(obj["ticker"]),
        agent_id=str(obj["agent_id"]),
        action=obj.get("action"),
        target_weight=None if obj.get("target_weight") is None else _parse_float(obj["target_weight"], ctx),
        confidence=None if obj.get("confidence") is None else _parse_float(obj["confidence"], ctx),
        tokens_in=int(obj["tokens_in"]),
        tokens_out=int(obj["tokens_out"]),
        latency_ms=_parse_float(obj["latency_ms"], ctx),
        rationale=obj.get("rationale"),
        round=None if obj.get("round") is None else int(obj["round"]),
    )


def load_decisions(path) -> DecisionLog:
    """Load a JSONL decision log; an empty file is a valid empty log."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"decision log not found: {path}")
    records = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            ctx = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{ctx}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"{ctx}: each line must be a flat key-value object")
            records.append(_decision_from_obj(obj, ctx))
    return DecisionLog.from_records(records)


def serialize_decisions(log: DecisionLog) -> str:
    lines = []
    for r in log.records:
        obj = {"date": r.date.isoformat(), "ticker": r.ticker, "agent_id": r.agent_id,
               "tokens_in": r.tokens_in, "tokens_out": r.tokens_out, "latency_ms": r.latency_ms}
        if r.action is not None:
            obj["action"] = r.action
        if r.target_weight is not None:
            obj["target_weight"] = r.target_weight
        if r.confidence is not None:
            obj["confidence"] = r.confidence
        if r.rationale is not None:
            obj["rationale"] = r.rationale
        if r.round is not None:
            obj["round"] = r.round
        lines.append(json.dumps(obj, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Universe and manifest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniverseMembership:
    """Tradability intervals (inclusive) plus optional delisting terms."""

    ticker: str
    intervals: tuple  # ((start, end), ...) sorted, non-overlapping
    delist_date: Optional[dt.date] = None
    delist_recovery: Optional[float] = None  # fraction of last close recovered

    def __post_init__(self) -> None:
        prev_end = None
        for start, end in self.intervals:
            if end < start:
                raise ValidationError(f"{self.ticker}: interval end {end} before start {start}")
            if prev_end is not None and start <= prev_end:
                raise ValidationError(f"{self.ticker}: universe intervals overlap or are unsorted")
            prev_end = end
        if self.delist_date is not None:
            if self.intervals and self.delist_date < self.intervals[-1][1]:
                raise ValidationError(f"{self.ticker}: delist_date before last interval end")
            if self.delist_recovery is None:
                raise ValidationError(f"{self.ticker}: delist_date requires delist_recovery")
        if self.delist_recovery is not None and not 0.0 <= self.delist_recovery <= 1.0:
            raise ValidationError(f"{self.ticker}: delist_recovery must be in [0, 1]")

    def contains(self, day: dt.date) -> bool:
        return any(start <= day <= end for start, end in self.intervals)


@dataclass(frozen=True)
class CutoffManifest:
    """Run metadata: model identity, temporal boundaries, declared settings.

    ``knowledge_cutoff`` and ``model_id`` may be absent at load time; the
    protocol checks then report the gap instead of the loader guessing.
    """

    window_start: dt.date
    window_end: dt.date
    claim_tier: str
    model_id: Optional[str] = None
    knowledge_cutoff: Optional[dt.date] = None
    post_training_boundary: Optional[dt.date] = None
    retrieval_corpus_max_date: Optional[dt.date] = None
    frictions_modeled: frozenset = frozenset()
    frictions_not_applicable: frozenset = frozenset()
    frictions: FrictionSpec = field(default_factory=FrictionSpec)
    universe: tuple = ()
    attestation: Optional[str] = None  # free-text point-in-time attestation
    price_adjustment: Optional[str] = None
    ece_threshold: Optional[float] = None
    sharpe_convention: Optional[int] = None  # 1 or 252 when declared
    rho_grid: tuple = ()

    def __post_init__(self) -> None:
        if self.window_start >= self.window_end:
            raise ValidationError(
                f"window_start {self.window_start} must precede window_end {self.window_end}"
            )
        if self.claim_tier not in CLAIM_TIERS:
            raise ValidationError(f"claim_tier must be one of {CLAIM_TIERS}, got {self.claim_tier!r}")
        if self.sharpe_convention is not None and self.sharpe_convention not in (1, 252):
            raise ValidationError(f"sharpe_convention must be 1 or 252, got {self.sharpe_convention}")
        if self.ece_threshold is not None and self.ece_threshold <= 0:
            raise ValidationError(f"ece_threshold must be > 0, got {self.ece_threshold}")
        for rho in self.rho_grid:
            if not 0.0 <= rho <= 1.0:
                raise ValidationError(f"rho_grid values must be in [0, 1], got {rho}")

    def membership(self, ticker: str) -> Optional[UniverseMembership]:
        for m in self.universe:
            if m.ticker == ticker:
                return m
        return None


_MANIFEST_DATE_KEYS = ("knowledge_cutoff", "post_training_boundary", "retrieval_corpus_max_date")


def _membership_from_obj(obj: Mapping, ctx: str) -> UniverseMembership:
    if "ticker" not in obj or "intervals" not in obj:
        raise ParseError(f"{ctx}: universe entries need ticker and intervals")
    intervals = []
    for pair in obj["intervals"]:
        if len(pair) != 2:
            raise ParseError(f"{ctx}: intervals must be [start, end] pairs")
        intervals.append((_parse_date(pair[0], ctx), _parse_date(pair[1], ctx)))
    return UniverseMembership(
        ticker=str(obj["ticker"]),
        intervals=tuple(intervals),
        delist_date=None if obj.get("delist_date") is None else _parse_date(obj["delist_date"], ctx),
        delist_recovery=None if obj.get("delist_recovery") is None else _parse_float(obj["delist_recovery"], ctx),
    )


def load_manifest(path) -> CutoffManifest:
    """Load and validate the JSON manifest document."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: manifest must be a key-value document")
    ctx = str(path)
    for key in ("window_start", "window_end", "claim_tier"):
        if key not in doc:
            raise ParseError(f"{ctx}: missing required manifest key {key!r}")

    dates = {k: (None if doc.get(k) is None else _parse_date(doc[k], ctx)) for k in _MANIFEST_DATE_KEYS}
    fr = doc.get("frictions", {})
    if not isinstance(fr, dict):
        raise ParseError(f"{ctx}: frictions section must be a key-value object")
    spec = FrictionSpec(
        commission_rate=_parse_float(fr.get("commission_rate", 0.0), ctx),
        kappa=_parse_float(fr.get("kappa", 0.0), ctx),
        beta=_parse_float(fr.get("beta", 1.0), ctx),
        token_price=_parse_float(fr.get("token_price", 0.0), ctx),
        latency_bars=int(fr.get("latency_bars", 0)),
        borrow_rate=None if fr.get("borrow_rate") is None else _parse_float(fr["borrow_rate"], ctx),
    )
    universe = tuple(_membership_from_obj(m, ctx) for m in doc.get("universe", []))
    return CutoffManifest(
        window_start=_parse_date(doc["window_start"], ctx),
        window_end=_parse_date(doc["window_end"], ctx),
        claim_tier=str(doc["claim_tier"]),
        model_id=None if doc.get("model_id") is None else str(doc["model_id"]),
        knowledge_cutoff=dates["knowledge_cutoff"],
        post_training_boundary=dates["post_training_boundary"],
        retrieval_corpus_max_date=dates["retrieval_corpus_max_date"],
        frictions_modeled=validate_components(doc.get("frictions_modeled", []), "frictions_modeled entry"),
        frictions_not_applicable=validate_components(
            doc.get("frictions_not_applicable", []), "frictions_not_applicable entry"
        ),
        frictions=spec,
        universe=universe,
        attestation=doc.get("attestation"),
        price_adjustment=doc.get("price_adjustment"),
        ece_threshold=None if doc.get("ece_threshold") is None else _parse_float(doc["ece_threshold"], ctx),
        sharpe_convention=None if doc.get("sharpe_convention") is None else int(doc["sharpe_convention"]),
        rho_grid=tuple(_parse_float(r, ctx) for r in doc.get("rho_grid", [])),
    )


def serialize_manifest(manifest: CutoffManifest) -> str:
    doc: dict = {
        "window_start": manifest.window_start.isoformat(),
        "window_end": manifest.window_end.isoformat(),
        "claim_tier": manifest.claim_tier,
    }
    if manifest.model_id is not None:
        doc["model_id"] = manifest.model_id
    for key in _MANIFEST_DATE_KEYS:
        value = getattr(manifest, key)
        if value is not None:
            doc[key] = value.isoformat()
    if manifest.frictions_modeled:
        doc["frictions_modeled"] = sorted(manifest.frictions_modeled)
    if manifest.frictions_not_applicable:
        doc["frictions_not_applicable"] = sorted(manifest.frictions_not_applicable)
    spec = manifest.frictions
    doc["frictions"] = {
        "commission_rate": spec.commission_rate,
        "kappa": spec.kappa,
        "beta": spec.beta,
        "token_price": spec.token_price,
        "latency_bars": spec.latency_bars,
    }
    if spec.borrow_rate is not None:
        doc["frictions"]["borrow_rate"] = spec.borrow_rate
    if manifest.universe:
        doc["universe"] = []
        for m in manifest.universe:
            entry: dict = {
                "ticker": m.ticker,
                "intervals": [[s.isoformat(), e.isoformat()] for s, e in m.intervals],
            }
            if m.delist_date is not None:
                entry["delist_date"] = m.delist_date.isoformat()
            if m.delist_recovery is not None:
                entry["delist_recovery"] = m.delist_recovery
            doc["universe"].append(entry)
    for key in ("attestation", "price_adjustment", "ece_threshold", "sharpe_convention"):
        value = getattr(manifest, key)
        if value is not None:
            doc[key] = value
    if manifest.rho_grid:
        doc["rho_grid"] = list(manifest.rho_grid)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Counterfactual trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CounterfactualTrial:
    """One reverse-evidence probe: baseline view vs. view after counter-evidence
    of strength ``rho``. ``intensity`` is reserved; no operation consumes it."""

    trial_id: str
    rho: float
    baseline_view: str
    updated_view: str
    confidence_before: Optional[float] = None
    confidence_after: Optional[float] = None
    position_before: Optional[float] = None
    position_after: Optional[float] = None
    sector: Optional[str] = None
    intensity: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho <= 1.0:
            raise ValidationError(f"trial {self.trial_id}: rho must be in [0, 1], got {self.rho}")
        for name in ("baseline_view", "updated_view"):
            if getattr(self, name) not in VIEWS:
                raise ValidationError(
                    f"trial {self.trial_id}: {name} must be one of {VIEWS}, got {getattr(self, name)!r}"
                )
        for name in ("confidence_before", "confidence_after"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValidationError(f"trial {self.trial_id}: {name} must be in [0, 1], got {v}")


def load_counterfactual_trials(path) -> tuple:
    """Load JSONL counterfactual trials."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"counterfactual trials file not found: {path}")
    trials = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            ctx = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{ctx}: invalid JSON ({exc.msg})") from exc
            for key in ("trial_id", "rho", "baseline_view", "updated_view"):
                if key not in obj:
                    raise ParseError(f"{ctx}: missing required key {key!r}")
            trials.append(CounterfactualTrial(
                trial_id=str(obj["trial_id"]),
                rho=_parse_float(obj["rho"], ctx),
                baseline_view=str(obj["baseline_view"]),
                updated_view=str(obj["updated_view"]),
                confidence_before=None if obj.get("confidence_before") is None else _parse_float(obj["confidence_before"], ctx),
                confidence_after=None if obj.get("confidence_after") is None else _parse_float(obj["confidence_after"], ctx),
                position_before=None if obj.get("position_before") is None else _parse_float(obj["position_before"], ctx),
                position_after=None if obj.get("position_after") is None else _parse_float(obj["position_after"], ctx),
                sector=obj.get("sector"),
                intensity=None if obj.get("intensity") is None else _parse_float(obj["intensity"], ctx),
            ))
    return tuple(trials)
