"""Minimum-evidence gate: six protocol verdicts and the strongest defensible claim.

The six checks split into evidence-source controls (P1 temporal integrity,
P2 dynamic universe, P3 counterfactual robustness) and evidence-to-decision
controls (P4 epistemic calibration, P5 realistic implementation, P6
multi-agent disaggregation). Failing any one of them disqualifies a
deployment-strength reading of the numbers; missing evidence never counts
as a pass, even for the light extractor-tier variants.

Claim tiers are ordered extractor < prototype < deployable < autonomous.
Required sets: extractor needs light P1/P3 (metadata completeness and a
reported sector-bias profile); prototype needs full P1 + P2 + P5;
deployable needs full P1-P5; autonomous needs full P1-P6. The granted tier
is the strongest whose requirements are all satisfied, and the report
carries the permissible-language line for that tier plus a caveat line for
every unmet protocol.
"""

from __future__ import annotations

import datetime as dt
import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .datamodel import CutoffManifest, serialize_manifest
from .errors import ContractError, ValidationError
from .friction import CANONICAL_COMPONENTS

PROTOCOLS = ("P1", "P2", "P3", "P4", "P5", "P6")
TIERS = ("extractor", "prototype", "deployable", "autonomous")
DEFAULT_ECE_THRESHOLD = 0.10

PROTOCOL_NAMES = {
    "P1": "temporal integrity",
    "P2": "dynamic universe",
    "P3": "counterfactual robustness",
    "P4": "epistemic calibration",
    "P5": "realistic implementation",
    "P6": "multi-agent disaggregation",
}

# Language shown when a protocol is unmet.
UNMET_LANGUAGE = {
    "P1": "At most historical-backtest evidence",
    "P2": "Alpha may come from ex-post-filtered universes",
    "P3": "Recommendations may reflect priors, not information",
    "P4": "LLM confidence should not control sizing",
    "P5": "Profits cannot show deployability",
    "P6": "Debate is not independent-expert aggregation",
}

# Language that remains defensible at each granted tier.
TIER_LANGUAGE = {
    "extractor": "improves information extraction; semantic features have marginal contribution",
    "prototype": "produces a positive-return trajectory in this window; no deployment language",
    "deployable": "retains net return under structural tests",
    "autonomous": "retains net return after multi-agent disaggregation",
}
NO_TIER_LANGUAGE = UNMET_LANGUAGE["P1"]

# (protocol, light?) requirement sets per tier.
TIER_REQUIREMENTS = {
    "extractor": (("P1", True), ("P3", True)),
    "prototype": (("P1", False), ("P2", False), ("P5", False)),
    "deployable": (("P1", False), ("P2", False), ("P3", False), ("P4", False), ("P5", False)),
    "autonomous": (("P1", False), ("P2", False), ("P3", False), ("P4", False), ("P5", False), ("P6", False)),
}


def check_tier_structure() -> None:
    """Stronger tiers must subsume weaker ones (full checks subsume light)."""
    def subsumes(stronger, weaker) -> bool:
        for proto, light in weaker:
            if not any(p == proto and (light or not l) for p, l in stronger):
                return False
        return True

    chain = ("prototype", "deployable", "autonomous")
    for lower, upper in zip(chain, chain[1:]):
        if not subsumes(TIER_REQUIREMENTS[upper], TIER_REQUIREMENTS[lower]):
            raise ContractError(f"tier {upper} does not inherit the requirements of {lower}")
    # Extractor's light checks must be subsumed somewhere up the chain.
    if not subsumes(TIER_REQUIREMENTS["autonomous"], TIER_REQUIREMENTS["extractor"]):
        raise ContractError("extractor light requirements are not covered by the full chain")


@dataclass(frozen=True)
class ProtocolVerdict:
    protocol: str
    status: str  # pass | fail | insufficient_evidence | not_applicable
    evidence: dict = field(default_factory=dict)
    light_pass: bool = False
    caveat: str = ""

    def __post_init__(self) -> None:
        if self.status not in ("pass", "fail", "insufficient_evidence", "not_applicable"):
            raise ContractError(f"unknown verdict status {self.status!r}")
        if self.status == "pass" and not self.evidence:
            raise ContractError(f"{self.protocol}: a pass verdict requires nonempty evidence")


    def as_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "name": PROTOCOL_NAMES[self.protocol],
            "status": self.status,
            "light_pass": self.light_pass,
            "evidence": self.evidence,
            "caveat": self.caveat,
        }


@dataclass(frozen=True)
class ComplianceReport:
    verdicts: dict  # protocol -> ProtocolVerdict
    claimed_tier: str
    granted_tier: str  # a tier name or "none"
    permissible_language: str
    sharpe_convention: Optional[int]
    manifest_sha256: str
    overclaim: bool

    def as_dict(self) -> dict:
        return {
            "verdicts": {p: self.verdicts[p].as_dict() for p in PROTOCOLS},
            "claimed_tier": self.claimed_tier,
            "granted_tier": self.granted_tier,
            "permissible_language": self.permissible_language,
            "sharpe_convention": self.sharpe_convention,
            "manifest_sha256": self.manifest_sha256,
            "overclaim": self.overclaim,
        }

    def summary_text(self) -> str:
        lines = [
            "alpha-audit compliance report",
            f"manifest sha256: {self.manifest_sha256}",
            f"sharpe convention K: {self.sharpe_convention if self.sharpe_convention is not None else 'undeclared'}",
            "",
        ]
        for p in PROTOCOLS:
            v = self.verdicts[p]
            line = f"{p} {PROTOCOL_NAMES[p]:28s} {v.status}"
            if v.caveat:
                line += f"  [{v.caveat}]"
            lines.append(line)
        lines += [
            "",
            f"claimed tier: {self.claimed_tier}",
            f"granted tier: {self.granted_tier}",
            f"permissible language: {self.permissible_language}",
            f"overclaim: {'yes' if self.overclaim else 'no'}",
        ]
        return "\n".join(lines) + "\n"


def classify_window(manifest: CutoffManifest) -> str:
    """Window position vs. the effective cutoff (max of the declared bounds)."""
    if manifest.knowledge_cutoff is None:
        raise ValidationError("knowledge_cutoff missing; window cannot be classified")
    bounds = [manifest.knowledge_cutoff]
    if manifest.post_training_boundary is not None:
        bounds.append(manifest.post_training_boundary)
    if manifest.retrieval_corpus_max_date is not None:
        bounds.append(manifest.retrieval_corpus_max_date)
    effective = max(bounds)
    if manifest.window_start > effective:
        return "post_cutoff"
    if manifest.window_end <= effective:
        return "in_cutoff"
    return "straddling"


def contamination_delta(metric_pre: float, metric_post: float) -> float:
    """Fractional drop (pre - post) / |pre| of a metric across a cutoff."""
    if metric_pre == 0:
        raise ContractError("pre-cutoff metric is zero; fractional drop undefined")
    return (metric_pre - metric_post) / abs(metric_pre)


@dataclass(frozen=True)
class EvidenceBundle:
    """Evidence sections, each either a parsed dict or explicitly absent."""

    backtest: Optional[Mapping] = None
    calibration: Optional[Mapping] = None
    counterfactual: Optional[Mapping] = None
    disaggregation: Optional[Mapping] = None


def _verdict_p1(manifest: CutoffManifest) -> ProtocolVerdict:
    metadata_complete = manifest.model_id is not None and manifest.knowledge_cutoff is not None
    evidence = {
        "model_id": manifest.model_id,
        "knowledge_cutoff": _iso(manifest.knowledge_cutoff),
        "post_training_boundary": _iso(manifest.post_training_boundary),
        "retrieval_corpus_max_date": _iso(manifest.retrieval_corpus_max_date),
        "window": [manifest.window_start.isoformat(), manifest.window_end.isoformat()],
        "attestation": manifest.attestation,
    }
    if manifest.knowledge_cutoff is None:
        return ProtocolVerdict("P1", "insufficient_evidence", evidence,
                               light_pass=False, caveat=UNMET_LANGUAGE["P1"])
    classification = classify_window(manifest)
    evidence["window_classification"] = classification
    light = metadata_complete
    if metadata_complete and (classification == "post_cutoff" or manifest.attestation):
        return ProtocolVerdict("P1", "pass", evidence, light_pass=light)
    if not metadata_complete:
        return ProtocolVerdict("P1", "insufficient_evidence", evidence,
                               light_pass=False, caveat=UNMET_LANGUAGE["P1"])
    return ProtocolVerdict("P1", "fail", evidence, light_pass=light, caveat=UNMET_LANGUAGE["P1"])


def _verdict_p2(manifest: CutoffManifest, bundle: EvidenceBundle) -> ProtocolVerdict:
    supplied = len(manifest.universe) > 0
    evidence = {"memberships_supplied": supplied, "memberships": len(manifest.universe)}
    if bundle.backtest is None:
        return ProtocolVerdict("P2", "insufficient_evidence", evidence, caveat=UNMET_LANGUAGE["P2"])
    universe_section = bundle.backtest.get("universe", {})
    evidence["out_of_universe_fills"] = universe_section.get("out_of_universe_fills")
    evidence["rejected_decisions"] = universe_section.get("rejected_decisions")
    if not supplied:
        return ProtocolVerdict("P2", "insufficient_evidence", evidence, caveat=UNMET_LANGUAGE["P2"])
    if evidence["out_of_universe_fills"] == 0:
        return ProtocolVerdict("P2", "pass", evidence)
    return ProtocolVerdict("P2", "fail", evidence, caveat=UNMET_LANGUAGE["P2"])


def _verdict_p3(bundle: EvidenceBundle) -> ProtocolVerdict:
    section = bundle.counterfactual
    if section is None:
        return ProtocolVerdict("P3", "insufficient_evidence", caveat=UNMET_LANGUAGE["P3"])
    evidence = {}
    bias = section.get("bias_scores")
    light = bool(bias)
    if bias:
        evidence["bias_scores"] = bias
    verdict = section.get("monotonicity")
    if verdict is None:
        return ProtocolVerdict("P3", "insufficient_evidence", evidence,
                               light_pass=light, caveat=UNMET_LANGUAGE["P3"])
    evidence["locked"] = verdict.get("locked")
    evidence["axes_monotone"] = {
        "flip": verdict.get("flip_axis_monotone"),
        "confidence": verdict.get("confidence_axis_monotone"),
        "position": verdict.get("position_axis_monotone"),
    }
    if verdict.get("locked") is False:
        return ProtocolVerdict("P3", "pass", evidence, light_pass=light)
    return ProtocolVerdict("P3", "fail", evidence, light_pass=light, caveat=UNMET_LANGUAGE["P3"])


def _verdict_p4(manifest: CutoffManifest, bundle: EvidenceBundle) -> ProtocolVerdict:
    threshold = manifest.ece_threshold if manifest.ece_threshold is not None else DEFAULT_ECE_THRESHOLD
    evidence = {
        "ece_threshold": threshold,
        "threshold_source": "manifest" if manifest.ece_threshold is not None else "default",
    }
    section = bundle.calibration
    if section is None or section.get("ece") is None:
        return ProtocolVerdict("P4", "insufficient_evidence", evidence, caveat=UNMET_LANGUAGE["P4"])
    evidence["ece"] = section["ece"]
    evidence["n_used"] = section.get("n_used")
    evidence["n_excluded"] = section.get("n_excluded")
    evidence["out_of_sample"] = bool(section.get("out_of_sample", False))
    if not evidence["out_of_sample"]:
        return ProtocolVerdict("P4", "insufficient_evidence", evidence, caveat=UNMET_LANGUAGE["P4"])
    if section["ece"] < threshold:
        return ProtocolVerdict("P4", "pass", evidence)
    return ProtocolVerdict("P4", "fail", evidence, caveat=UNMET_LANGUAGE["P4"])


def _verdict_p5(manifest: CutoffManifest, bundle: EvidenceBundle) -> ProtocolVerdict:
    evidence = {"frictions_not_applicable": sorted(manifest.frictions_not_applicable)}
    if bundle.backtest is None:
        return ProtocolVerdict("P5", "insufficient_evidence", evidence, caveat=UNMET_LANGUAGE["P5"])
    charged = set(bundle.backtest.get("frictions_charged", []))
    evidence["frictions_charged"] = sorted(charged)
    net_reported = bundle.backtest.get("net_metrics_reported", False)
    evidence["net_metrics_reported"] = net_reported
    covered = charged | set(manifest.frictions_not_applicable)
    missing = [c for c in CANONICAL_COMPONENTS if c not in covered]
    evidence["uncovered_components"] = missing
    if not missing and net_reported:
        return ProtocolVerdict("P5", "pass", evidence)
    return ProtocolVerdict("P5", "fail", evidence, caveat=UNMET_LANGUAGE["P5"])


_P6_REQUIRED = ("single_agent_net_cr", "disagreement_rate", "role_similarity",
                "coordination_tokens", "coordination_latency_ms", "net_return_delta")


def _verdict_p6(bundle: EvidenceBundle) -> ProtocolVerdict:
    section = bundle.disaggregation
    if section is None:
        return ProtocolVerdict("P6", "insufficient_evidence", caveat=UNMET_LANGUAGE["P6"])
    if section.get("not_applicable"):
        return ProtocolVerdict("P6", "not_applicable",
                               {"reason": section.get("reason", "single-agent system")})
    evidence = {}
    missing = [k for k in _P6_REQUIRED if section.get(k) is None]
    for k in _P6_REQUIRED:
        if section.get(k) is not None:
            evidence[k] = section[k]
    if missing:
        evidence["missing"] = missing
        return ProtocolVerdict("P6", "insufficient_evidence", evidence, caveat=UNMET_LANGUAGE["P6"])
    return ProtocolVerdict("P6", "pass", evidence)


def _iso(day: Optional[dt.date]) -> Optional[str]:
    return None if day is None else day.isoformat()


def manifest_digest(manifest_bytes: bytes) -> str:
    return hashlib.sha256(manifest_bytes).hexdigest()


def evaluate(manifest: CutoffManifest, bundle: EvidenceBundle,
             manifest_bytes: Optional[bytes] = None) -> ComplianceReport:
    """Evaluate all six protocols and grant the strongest permissible tier.

    Deterministic and order-independent in the bundle sections. Granting is
    strict: every full requirement of a tier must have status ``pass`` and
    every light requirement its light check, so neither missing evidence nor
    an explicit not-applicable marker (P6 for single-agent systems) carries
    a tier on its own.
    """
    check_tier_structure()
    verdicts = {
        "P1": _verdict_p1(manifest),
        "P2": _verdict_p2(manifest, bundle),
        "P3": _verdict_p3(bundle),
        "P4": _verdict_p4(manifest, bundle),
        "P5": _verdict_p5(manifest, bundle),
        "P6": _verdict_p6(bundle),
    }

    def satisfied(requirement) -> bool:
        proto, light = requirement
        v = verdicts[proto]
        if light:
            return v.light_pass
        return v.status == "pass"

    granted = "none"
    for tier in TIERS:
        if all(satisfied(req) for req in TIER_REQUIREMENTS[tier]):
            granted = tier
    language = TIER_LANGUAGE.get(granted, NO_TIER_LANGUAGE)
    claimed = manifest.claim_tier
    claimed_rank = TIERS.index(claimed)
    granted_rank = TIERS.index(granted) if granted in TIERS else -1
    if manifest_bytes is None:
        manifest_bytes = serialize_manifest(manifest).encode()
    digest = manifest_digest(manifest_bytes)
    return ComplianceReport(
        verdicts=verdicts,
        claimed_tier=claimed,
        granted_tier=granted,
        permissible_language=language,
        sharpe_convention=manifest.sharpe_convention,
        manifest_sha256=digest,
        overclaim=granted_rank < claimed_rank,
    )
