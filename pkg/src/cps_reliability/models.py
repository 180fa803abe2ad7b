"""Parametric failure models for single components.

All times are in hours. Three model families are supported:

* ``ConstantRate``: exponential survival ``exp(-lam * t)``.
* ``PowerLaw``: Weibull-type survival ``exp(-scale * t**shape)``. Used both
  for wear-out hardware and for software/hardware interaction failures.
* ``SrgmNhpp``: Goel-Okumoto NHPP software reliability growth model with
  mean value function ``m(t) = a * (1 - exp(-b t))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


class DomainError(ValueError):
    """Raised when an argument falls outside a model's valid domain."""


class SingularityError(DomainError):
    """Raised when an intensity is evaluated at a pole (t = 0, shape < 1)."""


INFINITE_MTBF = math.inf


def _check_time(value: float, name: str) -> float:
    value = float(value)
    if math.isnan(value) or value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return value


@dataclass(frozen=True)
class ConstantRate:
    lam: float

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"constant failure rate must be finite and >= 0, got {self.lam!r}")

    def cumulative_hazard(self, t: float) -> float:
        return self.lam * t


@dataclass(frozen=True)
class PowerLaw:
    """Power-law cumulative hazard ``scale * t**shape``.

    ``shape == 1`` degenerates to :class:`ConstantRate` with ``lam = scale``.
    """

    scale: float
    shape: float

    def __post_init__(self):
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise DomainError(f"power-law scale must be finite and >= 0, got {self.scale!r}")
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise DomainError(f"power-law shape must be finite and > 0, got {self.shape!r}")

    def cumulative_hazard(self, t: float) -> float:
        if t == 0:
            return 0.0
        return self.scale * t**self.shape


@dataclass(frozen=True)
class SrgmNhpp:
    """Goel-Okumoto NHPP model after ``t_test`` hours of accumulated testing."""

    a: float
    b: float
    t_test: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError(f"SRGM fault content a must be > 0, got {self.a!r}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise DomainError(f"SRGM detection rate b must be > 0, got {self.b!r}")
        if not (self.t_test >= 0 and math.isfinite(self.t_test)):
            raise DomainError(f"SRGM test time must be >= 0, got {self.t_test!r}")

    def cumulative_hazard(self, t: float) -> float:
        # expected faults surfacing in (t_test, t_test + t]
        return _srgm_increment(self.a, self.b, self.t_test, t)


FailureModel = Union[ConstantRate, PowerLaw, SrgmNhpp]


def _srgm_increment(a: float, b: float, start: float, width: float) -> float:
    # m(start + width) - m(start) = a e^{-b start} (1 - e^{-b width}), written to
    # avoid cancellation when both terms are close to a.
    return a * math.exp(-b * start) * -math.expm1(-b * width)


def _window_hazard(model: FailureModel, t_start: float, x: float) -> float:
    if isinstance(model, ConstantRate):
        return model.lam * x
    if isinstance(model, PowerLaw):
        if x == 0:
            return 0.0
        return model.cumulative_hazard(t_start + x) - model.cumulative_hazard(t_start)
    if isinstance(model, SrgmNhpp):
        return _srgm_increment(model.a, model.b, model.t_test + t_start, x)
    raise TypeError(f"unsupported failure model {model!r}")


def reliability_at(model: FailureModel, mission: float) -> float:
    """Probability of surviving a fresh mission of ``mission`` hours.

    For :class:`SrgmNhpp` the mission starts at the end of the model's test
    period, i.e. ``exp(-(m(t_test + mission) - m(t_test)))``.
    """
    mission = _check_time(mission, "mission")
    return windowed_reliability(model, 0.0, mission)


def windowed_reliability(model: FailureModel, t_start: float, x: float) -> float:
    """Survival over the window ``(t_start, t_start + x]``.

    The counting process restarts nowhere: for the power-law model the
    probability depends on ``t_start`` (ageing), for the constant-rate model
    it does not.
    """
    t_start = _check_time(t_start, "t_start")
    x = _check_time(x, "x")
    hazard = _window_hazard(model, t_start, x)
    # clamp tiny negative rounding from the power-law difference
    return min(1.0, math.exp(-max(hazard, 0.0)))


def mtbf(model: ConstantRate | float) -> float:
    """Mean time between failures ``1 / lam``.

    Returns :data:`INFINITE_MTBF` (``math.inf``) for a zero rate.
    """
    lam = model.lam if isinstance(model, ConstantRate) else ConstantRate(float(model)).lam
    if lam == 0:
        return INFINITE_MTBF
    return 1.0 / lam


def _check_srgm(a: float, b: float, t: float) -> None:
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a!r}")
    if not b > 0:
        raise DomainError(f"b must be > 0, got {b!r}")
    _check_time(t, "t")


def srgm_mean_value(a: float, b: float, t: float) -> float:
    """Expected cumulative fault count ``a (1 - exp(-b t))``."""
    _check_srgm(a, b, t)
    return a * -math.expm1(-b * t)


def srgm_intensity(a: float, b: float, t: float) -> float:
    """Failure intensity ``a b exp(-b t)``, the derivative of the mean value."""
    _check_srgm(a, b, t)
    return a * b * math.exp(-b * t)


def srgm_count_pmf(a: float, b: float, t: float, n: int) -> float:
    """Poisson probability of exactly ``n`` faults observed by time ``t``."""
    _check_srgm(a, b, t)
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    m = srgm_mean_value(a, b, t)
    if m == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(m) - m - math.lgamma(n + 1))


def srgm_count_pmf_table(a: float, b: float, t: float, tol: float = 1e-16) -> list[float]:
    """Poisson pmf values ``P(N(t) = 0), P(N(t) = 1), ...`` truncated adaptively.

    Terms are generated until past the mode and the remaining tail mass is
    below ``tol`` (bounded by a geometric series on the ratio of terms).
    """
    m = srgm_mean_value(a, b, t)
    terms = []
    n = 0
    while True:
        p = srgm_count_pmf(a, b, t, n)
        terms.append(p)
        ratio = m / (n + 1)
        if ratio < 1 and p * ratio / (1 - ratio) < tol:
            return terms
        n += 1


def sh_intensity(scale: float, shape: float, t: float) -> float:
    """Power-law interaction failure intensity ``scale * shape * t**(shape - 1)``."""
    PowerLaw(scale, shape)
    t = _check_time(t, "t")
    if t == 0:
        if shape < 1:
            raise SingularityError("interaction intensity is unbounded at t = 0 when shape < 1")
        if shape > 1:
            return 0.0
    return scale * shape * t ** (shape - 1)
