"""Probit-space evidence fusion of user-side and video-side quantiles.

Both quantiles are mapped to standard-normal z-scores, combined by a
weighted average normalized by sqrt(alpha^2 + beta^2), and mapped back
through the normal CDF. With equal weights the fused z of two agreeing
inputs is sqrt(2) times the shared z, so fused scores are sharpened
rather than identity-preserving; downstream checks are rank-level only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the inverse normal CDF, refined below
# by one Halley step against the erf-based CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)

_erfc = np.frompyfunc(math.erfc, 1, 1)


def normal_cdf(x):
    """Standard normal CDF via erfc (accurate in both tails)."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * np.asarray(_erfc(-x / _SQRT2), dtype=float)
    return float(out) if out.ndim == 0 else out


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return float(out) if out.ndim == 0 else out


def _probit_rational(q: np.ndarray) -> np.ndarray:
    plow = 0.02425
    x = np.empty_like(q)

    lower = q < plow
    upper = q > 1.0 - plow
    mid = ~(lower | upper)

    if np.any(mid):
        p = q[mid] - 0.5
        r = p * p
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r) + 1.0
        x[mid] = p * num / den
    if np.any(lower):
        r = np.sqrt(-2.0 * np.log(q[lower]))
        num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
        den = ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r) + 1.0
        x[lower] = num / den
    if np.any(upper):
        r = np.sqrt(-2.0 * np.log(1.0 - q[upper]))
        num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
        den = ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r) + 1.0
        x[upper] = -num / den
    return x


def probit(q):
    """Inverse normal CDF; absolute error <= 1e-9 on q in [1e-12, 1 - 1e-12]."""
    arr = np.asarray(q, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ConfigError("probit requires 0 < q < 1")
    q1 = np.atleast_1d(arr)
    # work on the lower tail (1 - q is exact for q >= 0.5) where erfc keeps
    # full relative precision, then mirror back
    flip = q1 > 0.5
    p = np.where(flip, 1.0 - q1, q1)
    x = _probit_rational(p.copy())
    # two Halley refinements against the erf-based CDF
    for _ in range(2):
        e = normal_cdf(x) - p
        u = e * _SQRT_2PI * np.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    x = np.where(flip, -x, x).reshape(arr.shape)
    return float(x) if arr.ndim == 0 else x


@dataclass(slots=True)
class FusionWeights:
    """alpha weighs the user side, beta the video side; alpha + beta > 0.

    policy "support_proportional" sets the weights from the cohort sample
    counts of the record being fused (done by the caller via per-record
    alpha/beta arrays); "equal" is the deployment default.
    """

    alpha: float = 1.0
    beta: float = 1.0
    policy: str = "equal"

    def __post_init__(self):
        if self.policy not in ("equal", "support_proportional"):
            raise ConfigError(f"unknown fusion policy: {self.policy}")
        if np.any(np.asarray(self.alpha) < 0) or np.any(np.asarray(self.beta) < 0):
            raise ConfigError("fusion weights must be non-negative")
        if np.all(np.asarray(self.alpha) + np.asarray(self.beta) <= 0):
            raise ConfigError("alpha + beta must be positive")


@dataclass(slots=True)
class FusedQuantile:
    z_user: float
    z_video: float
    z_fused: float
    q_fused: float


def fuse(q_user, q_video, weights: FusionWeights | None = None) -> FusedQuantile:
    """Fuse two quantiles: z_fused = (a*z_u + b*z_v) / sqrt(a^2 + b^2)."""
    w = weights or FusionWeights()
    z_u = probit(q_user)
    z_v = probit(q_video)
    z_f = fuse_z(z_u, z_v, w.alpha, w.beta)
    return FusedQuantile(
        z_user=z_u, z_video=z_v, z_fused=z_f, q_fused=normal_cdf(z_f)
    )


def fuse_z(z_user, z_video, alpha=1.0, beta=1.0):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    denom = np.sqrt(alpha**2 + beta**2)
    if np.any(denom == 0):
        raise ConfigError("alpha and beta cannot both be zero")
    out = (alpha * np.asarray(z_user) + beta * np.asarray(z_video)) / denom
    return float(out) if out.ndim == 0 else out


def fuse_arrays(q_user, q_video, alpha=1.0, beta=1.0):
    """Vectorized fusion; returns the fused quantile array."""
    z = fuse_z(probit(q_user), probit(q_video), alpha, beta)
    return normal_cdf(z)
