"""Command-line front end with a stable exit-code contract.

Exit codes: 0 success (and, for ``audit``, claim granted), 1 protocol
failure/overclaim, 2 input or usage error. Reports never embed timestamps,
so identical inputs produce byte-identical output files.

Subcommands: ``backtest``, ``audit``, ``sharpe``, ``calibrate``,
``counterfactual``, ``disaggregate``, ``coverage``. The Sharpe convention K
is never defaulted: pass ``--k`` or declare ``sharpe_convention`` in the
manifest.

The mapping from decisions to calibration trials lives here (not in the
calibration module): a decision is correct when the sign of the next bar's
close-to-close return matches its direction, longs up and shorts down;
holds, zero targets, zero returns at the boundary, and confidence-free
records are excluded and tallied. The rule is printed in every report.
"""

from __future__ import annotations

import argparse
import bisect
import json
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .backtest import buy_and_hold, curve_report, portfolio_aggregate, run_backtest
from .calibration import CalibrationTrial, ece, regime_conditioned_ece
from .counterfactual import bias_scores, flip_rate, monotonicity_verdict, trial_recommendations
from .datamodel import (
    CutoffManifest,
    DecisionLog,
    PriceSeries,
    load_counterfactual_trials,
    load_decisions,
    load_manifest,
    load_price_dir,
)
from .disaggregation import (
    CONSENSUS_AGENT_ID,
    disagreement_rate,
    multiagent_delta,
    role_similarity,
)
from .errors import AuditError, ParseError, ValidationError
from .friction import coverage_matrix, ledger_sum
from .protocol import (
    EvidenceBundle,
    classify_window,
    evaluate,
    manifest_digest,
)
from .sharpestats import (
    QUANTILE_METHOD,
    SharpeQuery,
    ci_half_width,
    half_width_grid,
    lo_se,
    t_hurdle,
    zero_coverage_boundary,
)

CORRECTNESS_RULE = (
    "correct iff sign(next-bar close-to-close return) matches the decision direction"
    " (buy/positive weight = up, sell/negative weight = down); holds, zero targets,"
    " zero returns, and confidence-free records excluded"
)
EXECUTION_RULE = "decision dated t fills at the open of the first bar after t plus latency_bars"


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _resolve_k(flag: Optional[int], manifest: Optional[CutoffManifest]) -> int:
    if flag is not None:
        return flag
    if manifest is not None and manifest.sharpe_convention is not None:
        return manifest.sharpe_convention
    raise ValidationError(
        "Sharpe convention K not declared; pass --k {1,252} or set sharpe_convention in the manifest"
    )


def _trim_to_window(prices: dict, manifest: CutoffManifest) -> dict:
    out = {}
    for ticker, series in prices.items():
        bars = tuple(b for b in series.bars
                     if manifest.window_start <= b.date <= manifest.window_end)
        if bars:
            out[ticker] = PriceSeries(ticker=ticker, bars=bars)
    if not out:
        raise ValidationError("no price bars fall inside the manifest window")
    return out


def _select_agent(log: DecisionLog, flag: Optional[str]) -> str:
    agents = log.agents
    if flag is not None:
        if flag not in agents:
            raise ValidationError(f"agent {flag!r} not in log (have: {', '.join(agents)})")
        return flag
    if len(agents) == 1:
        return agents[0]
    if CONSENSUS_AGENT_ID in agents:
        return CONSENSUS_AGENT_ID
    raise ValidationError(
        f"log contains multiple agents {agents}; pass --agent (or include {CONSENSUS_AGENT_ID})"
    )


def _frictions_charged(manifest: CutoffManifest) -> list:
    charged = ["commission", "spread", "market_impact", "token_cost", "latency"]
    if manifest.frictions.borrow_rate is not None:
        charged.append("financing")
    return sorted(charged)


def build_bundle(prices: dict, log: DecisionLog, manifest: CutoffManifest,
                 convention: int, agent_id: str, initial_capital: float,
                 manifest_sha256: str) -> dict:
    """Run the replay and assemble the machine-readable results bundle."""
    window_prices = _trim_to_window(prices, manifest)
    result = run_backtest(window_prices, log, manifest.universe,
                          manifest.frictions, initial_capital, agent_id=agent_id)
    tickers = sorted(result.per_ticker)
    sleeve_capital = initial_capital / len(tickers)
    grid = result.portfolio.dates if not result.portfolio.bankrupt else None

    per_ticker = {}
    bh_curves = []
    full_grid = max((window_prices[t].dates for t in tickers), key=len)
    for t in tickers:
        per_ticker[t] = curve_report(result.per_ticker[t], convention)
        membership = manifest.membership(t)
        delist = None
        if membership is not None and membership.delist_date is not None:
            delist = (membership.delist_date, membership.delist_recovery)
        bh = buy_and_hold(window_prices[t], manifest.frictions, sleeve_capital,
                          delist=delist, grid=full_grid)
        per_ticker[t]["buy_and_hold"] = curve_report(bh, convention)
        bh_curves.append(bh)

    rejected = sum(1 for e in result.exceptions if e.kind in ("out_of_universe", "short_undeclared"))
    bundle = {
        "header": {
            "tool": "alpha-audit",
            "version": __version__,
            "agent_id": agent_id,
            "initial_capital": initial_capital,
            "window": [manifest.window_start.isoformat(), manifest.window_end.isoformat()],
            "sharpe_convention": convention,
            "execution_rule": EXECUTION_RULE,
            "rebalancing": "per-sleeve capital at t=0, no cross-sleeve rebalancing",
            "quantile_method": QUANTILE_METHOD,
            "price_adjustment": manifest.price_adjustment,
            "manifest_sha256": manifest_sha256,
        },
        "per_ticker": per_ticker,
        "portfolio": curve_report(result.portfolio, convention),
        "ledger": {
            "entries": [e.as_dict() for e in result.portfolio.ledger],
            "totals": ledger_sum(result.portfolio.ledger).as_dict(),
        },
        "exceptions": [e.as_dict() for e in result.exceptions],
        "universe": {
            "memberships_supplied": len(manifest.universe) > 0,
            "memberships": len(manifest.universe),
            "out_of_universe_fills": result.out_of_universe_fills,
            "rejected_decisions": rejected,
        },
        "decisions": {
            "count": len(log.for_agent(agent_id)),
            "agents_in_file": list(log.agents),
        },
        "frictions_charged": _frictions_charged(manifest),
        "net_metrics_reported": True,
    }
    if len(bh_curves) > 1:
        weights = [1.0 / len(bh_curves)] * len(bh_curves)
        bundle["portfolio"]["buy_and_hold"] = curve_report(
            portfolio_aggregate(bh_curves, weights), convention)
        # per-sleeve B&H already carries sleeve capital; aggregate keeps scale
        bundle["portfolio"]["buy_and_hold"]["initial_capital"] = sleeve_capital
    elif bh_curves:
        bundle["portfolio"]["buy_and_hold"] = curve_report(bh_curves[0], convention)
    return bundle


def decision_calibration_trials(log: DecisionLog, prices: dict, agent_id: str) -> tuple:
    """Score one agent's decisions against realized next-bar returns."""
    trials, excluded = [], 0
    for r in log.for_agent(agent_id).records:
        if r.confidence is None:
            excluded += 1
            continue
        if r.action == "hold":
            excluded += 1
            continue
        if r.action == "buy":
            direction = 1
        elif r.action == "sell":
            direction = -1
        elif r.target_weight is not None and abs(r.target_weight) > 1e-12:
            direction = 1 if r.target_weight > 0 else -1
        else:
            excluded += 1
            continue
        series = prices.get(r.ticker)
        if series is None:
            excluded += 1
            continue
        i = bisect.bisect_left(series.dates, r.date)
        if i + 1 >= len(series.bars):
            excluded += 1
            continue
        ret = series.bars[i + 1].close / series.bars[i].close - 1.0
        correct = ret > 0 if direction > 0 else ret < 0
        trials.append(CalibrationTrial(confidence=r.confidence, correct=correct))
    return trials, excluded


def _calibration_section(trials, pre_excluded: int, bins: int, out_of_sample: bool,
                         source: str) -> dict:
    result = ece(trials, bins)
    section = result.as_dict()
    section["n_excluded"] += pre_excluded
    section["bins_requested"] = bins
    section["reliability_curve"] = [[b.mean_confidence, b.accuracy] for b in result.bins]
    section["out_of_sample"] = out_of_sample
    section["correctness_rule"] = CORRECTNESS_RULE if source == "decisions" else None
    section["source"] = source
    if all(t.regime is not None for t in trials) and trials:
        section["per_regime"] = regime_conditioned_ece(trials, bins).as_dict()
    return section


def _counterfactual_section(trials, manifest: Optional[CutoffManifest]) -> dict:
    grid = list(manifest.rho_grid) if manifest is not None and manifest.rho_grid else None
    present = sorted({t.rho for t in trials})
    use_grid = grid if grid else present
    section: dict = {
        "rho_grid": use_grid,
        "flip_rates": [[rho, flip_rate(trials, rho)] for rho in use_grid],
        "n_trials": len(trials),
    }
    recs = trial_recommendations(trials)
    section["bias_scores"] = [b.as_dict() for b in bias_scores(recs)] if recs else []
    if len(use_grid) >= 3:
        section["monotonicity"] = monotonicity_verdict(trials, grid=use_grid).as_dict()
    else:
        section["monotonicity"] = None
        section["note"] = "fewer than 3 rho grid points; monotonicity undefined"
    return section


def _disaggregation_section(prices: dict, log: DecisionLog, manifest: CutoffManifest,
                            initial_capital: float) -> dict:
    agents = log.agents
    constituents = [a for a in agents if a != CONSENSUS_AGENT_ID]
    if len(agents) == 1:
        return {"not_applicable": True, "reason": "single-agent log; nothing to disaggregate"}
    if CONSENSUS_AGENT_ID not in agents:
        return {"note": f"no {CONSENSUS_AGENT_ID} log; multi-agent net delta unavailable",
                "agents": list(agents)}
    window_prices = _trim_to_window(prices, manifest)
    curves, crs, logs = {}, {}, {}
    for a in constituents:
        res = run_backtest(window_prices, log, manifest.universe, manifest.frictions,
                           initial_capital, agent_id=a)
        curves[a] = res.portfolio
        crs[a] = res.portfolio.net[-1] / res.portfolio.gross[0] - 1.0
        logs[a] = log.for_agent(a)
    multi_res = run_backtest(window_prices, log, manifest.universe, manifest.frictions,
                             initial_capital, agent_id=CONSENSUS_AGENT_ID)
    # align on the shared grid; bankrupt truncation would desync, surface it
    aligned = {a: c for a, c in curves.items() if c.dates == multi_res.portfolio.dates}
    if len(aligned) != len(curves):
        return {"note": "curves desynchronized by bankruptcy truncation; delta unavailable",
                "agents": list(agents)}
    delta = multiagent_delta(multi_res.portfolio, aligned, multi_log=log,
                             single_logs=logs)
    section = delta.as_dict()
    if len(constituents) >= 2:
        sub_logs = {a: logs[a] for a in constituents}
        section["disagreement_rate"] = disagreement_rate(sub_logs).as_dict()["rate"]
        section["disagreement"] = disagreement_rate(sub_logs).as_dict()
        section["role_similarity"] = role_similarity(sub_logs).as_dict()
    else:
        section["disagreement_rate"] = None
        section["role_similarity"] = None
    section["single_agent_net_cr"] = {a: crs[a] for a in sorted(crs)}
    return section


# ---------------------------------------------------------------------------
# Subcommand drivers
# ---------------------------------------------------------------------------

def cmd_backtest(args) -> int:
    manifest = load_manifest(args.manifest)
    digest = manifest_digest(Path(args.manifest).read_bytes())
    prices = load_price_dir(args.prices)
    log = load_decisions(args.decisions)
    agent = _select_agent(log, args.agent)
    convention = _resolve_k(args.k, manifest)
    bundle = build_bundle(prices, log, manifest, convention, agent,
                          args.capital, digest)
    _write_json(Path(args.out), bundle)
    print(f"bundle written to {args.out} (agent {agent}, K={convention})")
    return 0


def cmd_audit(args) -> int:
    manifest = load_manifest(args.manifest)
    digest = manifest_digest(Path(args.manifest).read_bytes())
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    bundle = None
    prices = None
    log = None
    if args.bundle is not None:
        try:
            bundle = json.loads(Path(args.bundle).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read bundle {args.bundle}: {exc}") from exc
    elif args.prices is not None and args.decisions is not None:
        prices = load_price_dir(args.prices)
        log = load_decisions(args.decisions)
        agent = _select_agent(log, args.agent)
        convention = _resolve_k(args.k, manifest)
        bundle = build_bundle(prices, log, manifest, convention, agent,
                              args.capital, digest)
        _write_json(out_dir / "bundle.json", bundle)

    calibration_section = None
    if args.calibration_trials is not None:
        trials = _load_standalone_trials(args.calibration_trials)
        calibration_section = _calibration_section(
            trials, 0, args.bins, args.trials_out_of_sample, source="trials-file")
    elif prices is not None and log is not None:
        trials, pre_excluded = decision_calibration_trials(log, _trim_to_window(prices, manifest), agent)
        if trials:
            try:
                oos = classify_window(manifest) == "post_cutoff"
            except ValidationError:
                oos = False
            calibration_section = _calibration_section(
                trials, pre_excluded, args.bins, oos, source="decisions")
    if calibration_section is not None:
        _write_json(out_dir / "calibration.json", calibration_section)

    counterfactual_section = None
    if args.counterfactual_trials is not None:
        trials = load_counterfactual_trials(args.counterfactual_trials)
        counterfactual_section = _counterfactual_section(trials, manifest)
        _write_json(out_dir / "counterfactual.json", counterfactual_section)

    disaggregation_section = None
    if prices is not None and log is not None:
        disaggregation_section = _disaggregation_section(prices, log, manifest, args.capital)
        _write_json(out_dir / "disaggregation.json", disaggregation_section)

    report = evaluate(
        manifest,
        EvidenceBundle(
            backtest=bundle,
            calibration=calibration_section,
            counterfactual=counterfactual_section,
            disaggregation=disaggregation_section,
        ),
        manifest_bytes=Path(args.manifest).read_bytes(),
    )
    _write_json(out_dir / "compliance.json", report.as_dict())
    (out_dir / "summary.txt").write_text(report.summary_text())
    print(report.summary_text(), end="")
    return 1 if report.overclaim else 0


def _load_standalone_trials(path) -> list:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"calibration trials file not found: {path}")
    trials = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if "correct" not in obj:
                raise ParseError(f"{path}:{lineno}: missing required key 'correct'")
            trials.append(CalibrationTrial(
                confidence=obj.get("confidence"),
                correct=bool(obj["correct"]),
                regime=obj.get("regime"),
            ))
    if not trials:
        raise ValidationError(f"{path}: no calibration trials")
    return trials


def cmd_sharpe(args) -> int:
    did_something = False
    if args.grid_out is not None:
        sr_values = [i * 0.5 for i in range(17)]        # 0.0 .. 8.0
        t_values = list(range(20, 501, 20))             # 20 .. 500
        rows = half_width_grid(sr_values, t_values, args.k, args.level)
        lines = ["sr,T,half_width"]
        lines += [f"{sr:g},{T},{hw!r}" for sr, T, hw in rows]
        Path(args.grid_out).write_text("\n".join(lines) + "\n")
        print(f"grid written to {args.grid_out} ({len(rows)} rows, K={args.k})")
        did_something = True
    if args.sr is not None and args.t is not None:
        q = SharpeQuery(sr_hat=args.sr, T=args.t, K=args.k, level=args.level)
        se = lo_se(q)
        hw = ci_half_width(q)
        t_stat, passes = t_hurdle(args.sr, args.t)
        print(f"convention K: {args.k}")
        print(f"sharpe estimate: {args.sr:.6f}  (T={args.t} observations)")
        print(f"lo standard error: {se:.6f}")
        print(f"{args.level:.0%} CI: [{args.sr - hw:.6f}, {args.sr + hw:.6f}]  half-width {hw:.6f}")
        try:
            boundary = zero_coverage_boundary(args.t, args.k, args.level)
            print(f"zero-coverage boundary at T={args.t}: {boundary:.6f}")
        except AuditError as exc:
            print(f"zero-coverage boundary: undefined ({exc})")
        print(f"t-statistic: {t_stat:.6f}  multiple-testing hurdle 3.0: {'PASS' if passes else 'FAIL'}")
        did_something = True
    if not did_something:
        raise ValidationError("nothing to do: pass --sr and --t, and/or --grid-out")
    return 0


def cmd_calibrate(args) -> int:
    if args.trials is not None:
        trials = _load_standalone_trials(args.trials)
        section = _calibration_section(trials, 0, args.bins, args.trials_out_of_sample,
                                       source="trials-file")
    else:
        if args.prices is None or args.decisions is None or args.manifest is None:
            raise ValidationError("calibrate needs --trials, or --prices + --decisions + --manifest")
        manifest = load_manifest(args.manifest)
        prices = _trim_to_window(load_price_dir(args.prices), manifest)
        log = load_decisions(args.decisions)
        agent = _select_agent(log, args.agent)
        trials, pre_excluded = decision_calibration_trials(log, prices, agent)
        if not trials:
            raise ValidationError("no scorable decisions (need confidence and a direction)")
        try:
            oos = classify_window(manifest) == "post_cutoff"
        except ValidationError:
            oos = False
        section = _calibration_section(trials, pre_excluded, args.bins, oos, source="decisions")
    if args.out:
        _write_json(Path(args.out), section)
    print(f"ECE: {section['ece']:.6f} over {section['n_used']} trials "
          f"({section['n_excluded']} excluded, {args.bins} bins, "
          f"out_of_sample={section['out_of_sample']})")
    for conf, acc in section["reliability_curve"]:
        print(f"  bin conf {conf:.4f} -> acc {acc:.4f}")
    return 0


def cmd_counterfactual(args) -> int:
    trials = load_counterfactual_trials(args.trials)
    if not trials:
        raise ValidationError(f"{args.trials}: no counterfactual trials")
    manifest = load_manifest(args.manifest) if args.manifest else None
    section = _counterfactual_section(trials, manifest)
    if section["monotonicity"] is None:
        raise ValidationError(section["note"])
    if args.out:
        _write_json(Path(args.out), section)
    for rho, rate in section["flip_rates"]:
        print(f"flip rate at rho={rho:g}: {rate:.4f}")
    mono = section["monotonicity"]
    print(f"locked: {mono['locked']} (flip={mono['flip_axis_monotone']}, "
          f"confidence={mono['confidence_axis_monotone']}, position={mono['position_axis_monotone']})")
    for b in section["bias_scores"]:
        print(f"sector bias {b['sector']}: {b['pi_s']:+.4f}")
    return 0


def cmd_disaggregate(args) -> int:
    manifest = load_manifest(args.manifest)
    prices = load_price_dir(args.prices)
    log = load_decisions(args.decisions)
    section = _disaggregation_section(prices, log, manifest, args.capital)
    if section.get("not_applicable"):
        raise ValidationError(section["reason"])
    if "note" in section:
        raise ValidationError(section["note"])
    if args.out:
        _write_json(Path(args.out), section)
    print(f"best single agent: {section['best_agent']} (net CR {section['best_single_net_cr']:+.4%})")
    print(f"multi-agent net CR: {section['multi_net_cr']:+.4%}")
    print(f"net return delta: {section['net_return_delta']:+.4%}")
    print(f"coordination: {section['coordination_tokens']} tokens, "
          f"{section['coordination_latency_ms']:.0f} ms")
    if section.get("disagreement_rate") is not None:
        print(f"disagreement rate: {section['disagreement_rate']:.4f}")
    return 0


def cmd_coverage(args) -> int:
    try:
        doc = json.loads(Path(args.systems).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read systems file {args.systems}: {exc}") from exc
    if isinstance(doc, dict) and "systems" in doc:
        doc = doc["systems"]
    if not isinstance(doc, list):
        raise ParseError("systems file must be a list of {name, frictions_modeled} objects")
    pairs = []
    for entry in doc:
        if "name" not in entry or "frictions_modeled" not in entry:
            raise ParseError("each system needs name and frictions_modeled")
        pairs.append((entry["name"], entry["frictions_modeled"]))
    matrix = coverage_matrix(pairs)
    if args.out:
        _write_json(Path(args.out), matrix.as_dict())
    print(f"{matrix.unmodeled_count} of {matrix.cell_count} system x component cells unmodeled")
    for name, row in zip(matrix.systems, matrix.flags):
        modeled = [c for c, f in zip(matrix.components, row) if f]
        print(f"  {name}: models {', '.join(modeled) if modeled else '(nothing)'}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alpha-audit",
        description="Audit recorded trading-agent backtests: friction ledger, "
                    "Sharpe uncertainty, calibration, counterfactuals, compliance tiers.",
    )
    parser.add_argument("--version", action="version", version=f"alpha-audit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("backtest", help="replay a decision log into a results bundle")
    p.add_argument("--prices", required=True, help="directory of per-ticker CSVs")
    p.add_argument("--decisions", required=True, help="JSONL decision log")
    p.add_argument("--manifest", required=True, help="manifest JSON")
    p.add_argument("--agent", default=None, help="agent_id to replay (default: sole agent)")
    p.add_argument("--k", type=int, choices=[1, 252], default=None,
                   help="Sharpe convention (overrides manifest)")
    p.add_argument("--capital", type=float, default=100_000.0)
    p.add_argument("--out", required=True, help="bundle output path")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("audit", help="evaluate P1-P6 compliance and the claim tier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--prices", default=None)
    p.add_argument("--decisions", default=None)
    p.add_argument("--agent", default=None)
    p.add_argument("--bundle", default=None, help="pre-built results bundle (instead of prices/decisions)")
    p.add_argument("--calibration-trials", default=None, help="standalone JSONL calibration trials")
    p.add_argument("--trials-out-of-sample", action="store_true",
                   help="attest that standalone trials are out-of-sample")
    p.add_argument("--counterfactual-trials", default=None, help="JSONL counterfactual trials")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--k", type=int, choices=[1, 252], default=None)
    p.add_argument("--capital", type=float, default=100_000.0)
    p.add_argument("--out", required=True, help="report output directory")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("sharpe", help="Sharpe standard error, CI, boundary, t-hurdle")
    p.add_argument("--sr", type=float, default=None, help="estimated Sharpe ratio")
    p.add_argument("--t", type=int, default=None, help="number of return observations")
    p.add_argument("--k", type=int, choices=[1, 252], required=True,
                   help="convention: 1 period, 252 annualized-from-daily (never defaulted)")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--grid-out", default=None, help="write sr,T,half_width CSV surface")
    p.set_defaults(func=cmd_sharpe)

    p = sub.add_parser("calibrate", help="expected calibration error and reliability curve")
    p.add_argument("--trials", default=None, help="standalone JSONL trials (confidence, correct, regime)")
    p.add_argument("--trials-out-of-sample", action="store_true")
    p.add_argument("--prices", default=None)
    p.add_argument("--decisions", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--agent", default=None)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("counterfactual", help="flip rates, monotonicity verdict, sector bias")
    p.add_argument("--trials", required=True, help="JSONL counterfactual trials")
    p.add_argument("--manifest", default=None, help="manifest declaring the rho grid")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_counterfactual)

    p = sub.add_parser("disaggregate", help="multi-agent baseline delta and coordination cost")
    p.add_argument("--prices", required=True)
    p.add_argument("--decisions", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--capital", type=float, default=100_000.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_disaggregate)

    p = sub.add_parser("coverage", help="friction-coverage matrix over reported systems")
    p.add_argument("--systems", required=True, help="JSON list of {name, frictions_modeled}")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    raise SystemExit(main(sys.argv[1:]))
