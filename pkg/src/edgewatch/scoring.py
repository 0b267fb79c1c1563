"""Score formulas and the statistical decision procedure.

All scoring functions are total on non-negative finite inputs: the
singular cases (first tick, zero history) are defined as score 0, since
a key with no history carries no evidence of deviation.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

from .errors import ParameterError


def _saturate(gap: float, total: float, tick: int, scale: float) -> float:
    # Intermediate overflow: recompute with the magnitude spread across
    # factors, saturating at the float maximum if even that overflows.
    spread = gap / math.sqrt(total) / math.sqrt(tick - 1.0) * scale
    value = spread * spread
    return value if math.isfinite(value) else sys.float_info.max


def midas_score(current: float, total: float, tick: int) -> float:
    """Chi-squared deviation of the live-tick count from its expected share.

    ``current`` is the key's count within the live tick, ``total`` its
    accumulated count including the live tick.  Under the hypothesis
    that the mean level is unchanged, the expected live-tick count is
    ``total / tick``; the returned statistic grows with the squared gap.
    """
    if tick <= 1 or total <= 0.0:
        return 0.0
    gap = current - total / tick
    value = gap * gap * tick * tick / (total * (tick - 1))
    if math.isfinite(value):
        return value
    return _saturate(gap, total, tick, float(tick))


def midasf_score(current: float, total: float, tick: int) -> float:
    """Live-tick-only variant of the statistic.

    Here ``total`` excludes the live tick (history is folded in only at
    tick boundaries), so the expected level is ``total / (tick - 1)``.
    Algebraically: ``(current + total - current*tick)^2 / (total*(tick-1))``.
    """
    if tick <= 1 or total <= 0.0:
        return 0.0
    gap = current + total - current * tick
    value = gap * gap / (total * (tick - 1))
    if math.isfinite(value):
        return value
    return _saturate(gap, total, tick, 1.0)


def adjusted_statistic(
    current: float, total: float, tick: int, nu: float, tick_mass: float
) -> float:
    """Test statistic with the sketch overestimation bound subtracted.

    ``tick_mass`` is the total number of edges recorded in the live-tick
    sketch.  The adjusted count ``current - nu * tick_mass`` is not
    clamped at zero; a negative value squares harmlessly.
    """
    if tick <= 1 or total <= 0.0:
        return 0.0
    adjusted = current - nu * tick_mass
    gap = adjusted - total / tick
    value = gap * gap * tick * tick / (total * (tick - 1))
    if math.isfinite(value):
        return value
    return _saturate(gap, total, tick, float(tick))


# Rational minimax approximation of the standard normal quantile
# (Wichura's PPND16).  Absolute error well below 1e-10 over (0, 1).
_A = (
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3,
)
_B = (
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3,
)
_C = (
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
)
_D = (
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9,
)
_E = (
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
)
_F = (
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15,
)


def _poly(coeffs: tuple[float, ...], x: float) -> float:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _normal_quantile(p: float) -> float:
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        value = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        value = _poly(_E, r) / _poly(_F, r)
    return -value if q < 0.0 else value


def chi2_quantile_1dof(p: float) -> float:
    """Quantile of the chi-squared distribution with one degree of freedom.

    Uses the identity ``q = z((1+p)/2)^2`` with ``z`` the standard
    normal quantile.
    """
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"quantile level must be in [0, 1), got {p}")
    if p == 0.0:
        return 0.0
    z = _normal_quantile((1.0 + p) / 2.0)
    return z * z


@dataclass(frozen=True)
class GuaranteeParams:
    """False-positive budget ``eps``, sketch error ``nu`` and the cached
    decision threshold (the ``1 - eps/2`` chi-squared quantile)."""

    eps: float
    nu: float
    threshold: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ParameterError(f"eps must be in (0, 1), got {self.eps}")
        if self.nu <= 0.0:
            raise ParameterError(f"nu must be > 0, got {self.nu}")
        object.__setattr__(self, "threshold", chi2_quantile_1dof(1.0 - self.eps / 2.0))


def decide(statistic: float, params: GuaranteeParams) -> bool:
    """True iff the adjusted statistic exceeds the cached threshold."""
    return statistic > params.threshold
