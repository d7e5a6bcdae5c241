"""Expected calibration error and reliability-curve data.

ECE partitions trials into M equal-width confidence bins on [0, 1]
(right-closed, so 1.0 lands in the top bin and 0.0 in the bottom) and
weights the per-bin |accuracy - mean confidence| gap by bin occupancy:

    ECE = sum_m (|B_m| / n) * |acc(B_m) - conf(B_m)|

A verbally confident system that sizes positions off its own confidence is
implicitly claiming this number is near zero; the audit measures it instead.
Trials without a confidence are excluded and tallied, never imputed.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ContractError, ValidationError

DEFAULT_BINS = 10


@dataclass(frozen=True)
class CalibrationTrial:
    """One scored prediction: claimed confidence vs. realized correctness."""

    confidence: Optional[float]
    correct: bool
    regime: Optional[str] = None

    def __post_init__(self) -> None:
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class BinStats:
    """Occupancy and gap data for one confidence bin (1-based index)."""

    bin_index: int
    count: int
    mean_confidence: float
    accuracy: float

    def as_dict(self) -> dict:
        return {
            "bin_index": self.bin_index,
            "count": self.count,
            "mean_confidence": self.mean_confidence,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class EceResult:
    value: float
    bins: tuple
    n_used: int
    n_excluded: int

    def as_dict(self) -> dict:
        return {
            "ece": self.value,
            "bins": [b.as_dict() for b in self.bins],
            "n_used": self.n_used,
            "n_excluded": self.n_excluded,
        }


def _bin_index(confidence: float, edges: Sequence[float]) -> int:
    """Right-closed equal-width bin, 1-based; 0.0 maps to bin 1."""
    idx = bisect.bisect_left(edges, confidence, lo=1)
    return min(idx, len(edges) - 1)


def ece(trials: Iterable[CalibrationTrial], bins: int = DEFAULT_BINS) -> EceResult:
    """ECE over equal-width bins; empty bins contribute nothing."""
    if bins < 1:
        raise ContractError(f"bin count must be >= 1, got {bins}")
    trials = list(trials)
    if not trials:
        raise ValidationError("cannot compute ECE over an empty trial list")
    edges = [i / bins for i in range(bins + 1)]
    counts = [0] * (bins + 1)
    conf_sums = [0.0] * (bins + 1)
    correct_sums = [0] * (bins + 1)
    excluded = 0
    for t in trials:
        if t.confidence is None:
            excluded += 1
            continue
        m = _bin_index(t.confidence, edges)
        counts[m] += 1
        conf_sums[m] += t.confidence
        correct_sums[m] += 1 if t.correct else 0
    n = sum(counts)
    if n == 0:
        raise ValidationError("every trial lacks a confidence; ECE undefined")
    stats = []
    value = 0.0
    for m in range(1, bins + 1):
        if counts[m] == 0:
            continue
        conf = conf_sums[m] / counts[m]
        acc = correct_sums[m] / counts[m]
        value += counts[m] / n * abs(acc - conf)
        stats.append(BinStats(bin_index=m, count=counts[m], mean_confidence=conf, accuracy=acc))
    return EceResult(value=value, bins=tuple(stats), n_used=n, n_excluded=excluded)


def reliability_curve(trials: Iterable[CalibrationTrial], bins: int = DEFAULT_BINS) -> list:
    """(mean confidence, accuracy) per occupied bin, in bin order."""
    result = ece(trials, bins)
    return [(b.mean_confidence, b.accuracy) for b in result.bins]


@dataclass(frozen=True)
class RegimeEce:
    per_regime: dict
    low_sample: frozenset  # regimes with fewer trials than bins

    def as_dict(self) -> dict:
        return {
            "per_regime": {k: v.as_dict() for k, v in sorted(self.per_regime.items())},
            "low_sample": sorted(self.low_sample),
        }


def regime_conditioned_ece(trials: Iterable[CalibrationTrial], bins: int = DEFAULT_BINS) -> RegimeEce:
    """Independent ECE per regime label; labels must be present on every trial.

    Regimes in the result are exactly the labels seen; regimes with fewer
    trials than bins are flagged low-sample rather than dropped. Note the
    pooled ECE is not in general a weighted mean of the per-regime values,
    because pooling changes bin memberships.
    """
    trials = list(trials)
    groups: dict = {}
    for t in trials:
        if t.regime is None:
            raise ValidationError("regime-conditioned ECE requires a regime label on every trial")
        groups.setdefault(t.regime, []).append(t)
    if not groups:
        raise ValidationError("cannot compute regime-conditioned ECE over an empty trial list")
    per = {regime: ece(group, bins) for regime, group in groups.items()}
    low = frozenset(regime for regime, group in groups.items() if len(group) < bins)
    return RegimeEce(per_regime=per, low_sample=low)
