"""Reverse-evidence diagnostics: view-flip rate, response monotonicity, sector tilt.

The flip rate at counter-evidence strength rho is the fraction of trials
whose updated view differs from the baseline view. A well-updating agent
need not flip every time, but should respond monotonically in at least one
of three axes as rho rises: flip rate, confidence reduction, or position
reduction. An agent flat on all three simultaneously is "locked": its
recommendations cannot be distinguished from a fixed internal prior.

The rho grid is caller-declared; there is no interpolation between points.
"Monotone" means nondecreasing with at least one strict step (1e-9
comparison tolerance), so constant noise never counts as a response.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ContractError, ValidationError

_TOL = 1e-9


@dataclass(frozen=True)
class MonotonicityVerdict:
    """Per-axis monotonicity flags; locked iff every axis fails."""

    flip_axis_monotone: bool
    confidence_axis_monotone: bool
    position_axis_monotone: bool
    locked: bool
    axis_statistics: dict  # axis name -> ordered (rho, response) pairs

    def as_dict(self) -> dict:
        return {
            "flip_axis_monotone": self.flip_axis_monotone,
            "confidence_axis_monotone": self.confidence_axis_monotone,
            "position_axis_monotone": self.position_axis_monotone,
            "locked": self.locked,
            "axis_statistics": {
                axis: [[rho, resp] for rho, resp in pairs]
                for axis, pairs in self.axis_statistics.items()
            },
        }


@dataclass(frozen=True)
class BiasScore:
    """Normalized long-minus-short tilt for one sector, in [-1, +1]."""

    sector: str
    pi_s: float

    def __post_init__(self) -> None:
        if not -1.0 <= self.pi_s <= 1.0:
            raise ValidationError(f"bias score must be in [-1, 1], got {self.pi_s}")

    def as_dict(self) -> dict:
        return {"sector": self.sector, "pi_s": self.pi_s}


def _grid_of(trials) -> list:
    return sorted({t.rho for t in trials})


def flip_rate(trials: Iterable, rho: float) -> float:
    """Fraction of trials at exactly ``rho`` whose view flipped."""
    trials = list(trials)
    at = [t for t in trials if t.rho == rho]
    if not at:
        grid = ", ".join(f"{g:g}" for g in _grid_of(trials))
        raise ContractError(f"no trials at rho={rho:g}; available grid points: {grid or '(none)'}")
    flips = sum(1 for t in at if t.updated_view != t.baseline_view)
    return flips / len(at)


def _is_monotone(responses: Sequence[Optional[float]]) -> bool:
    if any(r is None for r in responses) or len(responses) < 2:
        return False
    strict = False
    for a, b in zip(responses, responses[1:]):
        if b < a - _TOL:
            return False
        if b > a + _TOL:
            strict = True
    return strict


def _mean_or_none(values: list) -> Optional[float]:
    return sum(values) / len(values) if values else None


def monotonicity_verdict(trials: Iterable, grid: Optional[Sequence[float]] = None) -> MonotonicityVerdict:
    """Three-axis monotone-response verdict over a rho grid.

    ``grid`` defaults to the distinct rho values present; at least three
    points are required, each with at least one trial. Confidence response
    is the signed mean drop (before - after); position response is the mean
    absolute-size reduction. Grid points where an axis has no data leave
    that axis non-monotone rather than interpolating.
    """
    trials = list(trials)
    grid = sorted(grid) if grid is not None else _grid_of(trials)
    if len(grid) < 3:
        raise ContractError(f"monotonicity needs >= 3 distinct rho grid points, got {len(grid)}")
    flip_axis, conf_axis, pos_axis = [], [], []
    for rho in grid:
        at = [t for t in trials if t.rho == rho]
        if not at:
            raise ContractError(f"declared grid point rho={rho:g} has no trials")
        flip_axis.append(flip_rate(at, rho))
        conf_axis.append(_mean_or_none(
            [t.confidence_before - t.confidence_after for t in at
             if t.confidence_before is not None and t.confidence_after is not None]))
        pos_axis.append(_mean_or_none(
            [abs(t.position_before) - abs(t.position_after) for t in at
             if t.position_before is not None and t.position_after is not None]))
    flags = tuple(_is_monotone(axis) for axis in (flip_axis, conf_axis, pos_axis))
    return MonotonicityVerdict(
        flip_axis_monotone=flags[0],
        confidence_axis_monotone=flags[1],
        position_axis_monotone=flags[2],
        locked=not any(flags),
        axis_statistics={
            "flip_rate": tuple(zip(grid, flip_axis)),
            "confidence_drop": tuple(zip(grid, conf_axis)),
            "position_reduction": tuple(zip(grid, pos_axis)),
        },
    )


def bias_score(recommendations: Iterable[tuple], sector: str) -> BiasScore:
    """(long - short) / total over one sector's recommendations.

    ``recommendations`` is an iterable of (sector, direction) with direction
    in {long, short, neutral}. Flipping every direction negates the score.
    """
    directions = [d for s, d in recommendations if s == sector]
    if not directions:
        raise ValidationError(f"no recommendations for sector {sector!r}")
    for d in directions:
        if d not in ("long", "short", "neutral"):
            raise ValidationError(f"direction must be long/short/neutral, got {d!r}")
    longs = sum(1 for d in directions if d == "long")
    shorts = sum(1 for d in directions if d == "short")
    return BiasScore(sector=sector, pi_s=(longs - shorts) / len(directions))


def bias_scores(recommendations: Iterable[tuple]) -> list:
    """Bias score per sector present, sorted by sector label."""
    recommendations = list(recommendations)
    sectors = sorted({s for s, _ in recommendations})
    return [bias_score(recommendations, s) for s in sectors]


def trial_recommendations(trials: Iterable) -> list:
    """(sector, baseline_view) pairs from trials that carry a sector label."""
    return [(t.sector, t.baseline_view) for t in trials if t.sector is not None]
