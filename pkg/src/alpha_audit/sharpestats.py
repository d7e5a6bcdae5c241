"""Sharpe-ratio uncertainty under the iid large-sample approximation.

The standard error of an estimated Sharpe ratio ``sr`` over ``T`` return
observations is ``sqrt((K + sr**2/2) / T)``, where ``K`` is 1 for a period
Sharpe and 252 for a Sharpe annualized from daily data. The convention
constant must always be disclosed next to the number: the two conventions
differ by more than an order of magnitude and headline figures are not
comparable without it.

Normal quantiles use the Acklam rational approximation polished with one
Halley step (documented in reports as ``QUANTILE_METHOD``), accurate to
well below 1e-9 without a stats dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractError

QUANTILE_METHOD = "acklam-rational+halley"

# Acklam inverse-normal-CDF coefficients.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def norm_ppf(p: float) -> float:
    """Inverse standard-normal CDF."""
    if not 0.0 < p < 1.0:
        raise ContractError(f"quantile probability must be in (0, 1), got {p}")
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # One Halley refinement against the exact CDF via erfc.
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


@dataclass(frozen=True)
class SharpeQuery:
    """One uncertainty query: estimate, sample size, convention, CI level."""

    sr_hat: float
    T: int
    K: int
    level: float = 0.95

    def __post_init__(self) -> None:
        if self.T < 2:
            raise ContractError(f"T must be >= 2, got {self.T}")
        if self.K not in (1, 252):
            raise ContractError(f"K must be 1 or 252, got {self.K}")
        if not 0.0 < self.level < 1.0:
            raise ContractError(f"level must be in (0, 1), got {self.level}")


def lo_se(q: SharpeQuery) -> float:
    """Standard error sqrt((K + sr^2/2) / T)."""
    return math.sqrt((q.K + q.sr_hat ** 2 / 2.0) / q.T)


def ci_half_width(q: SharpeQuery) -> float:
    """Two-sided normal CI half-width at the query's level."""
    z = norm_ppf(0.5 + q.level / 2.0)
    return z * lo_se(q)


def zero_coverage_boundary(T: int, K: int, level: float = 0.95) -> float:
    """Smallest sr whose two-sided CI at ``level`` excludes zero.

    Solves sr = z * sqrt((K + sr^2/2) / T); in closed form
    sr^2 = z^2 K / (T - z^2/2), which has no real root once z^2 >= 2T.
    """
    if T < 2:
        raise ContractError(f"T must be >= 2, got {T}")
    if K not in (1, 252):
        raise ContractError(f"K must be 1 or 252, got {K}")
    z = norm_ppf(0.5 + level / 2.0)
    denom = T - z * z / 2.0
    if denom <= 0:
        raise ContractError(f"no real boundary: z^2={z*z:.6f} >= 2T={2*T}")
    return z * math.sqrt(K / denom)


def t_hurdle(sr_hat: float, T: int, hurdle: float = 3.0) -> tuple:
    """t-statistic ``sr*sqrt(T)/sqrt(1 + sr^2/2)`` and the multiple-testing verdict.

    The denominator reuses the period-convention standard error so the
    statistic stays consistent with ``lo_se``; passes iff t >= ``hurdle``
    (the near-3.0 bar for data-mined strategy discoveries).
    """
    if T < 2:
        raise ContractError(f"T must be >= 2, got {T}")
    t_stat = sr_hat * math.sqrt(T) / math.sqrt(1.0 + sr_hat ** 2 / 2.0)
    return t_stat, t_stat >= hurdle


def half_width_grid(sr_values, T_values, K: int, level: float = 0.95) -> list:
    """Pointwise CI half-width surface rows ``(sr, T, half_width)``.

    Row order is T-major then sr, matching the CSV the CLI emits for
    external heatmap plotting.
    """
    rows = []
    for T in T_values:
        for sr in sr_values:
            rows.append((float(sr), int(T), ci_half_width(SharpeQuery(sr_hat=float(sr), T=int(T), K=K, level=level))))
    return rows
