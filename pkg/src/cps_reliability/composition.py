"""Reliability block composition and whole-system assembly.

Blocks form a finite tree of series, parallel and k-out-of-n groups over
leaf components. Every leaf carries its own failure model and mission
window; the tree evaluates to a probability through the usual independent
combination rules.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence, Union

from .models import (
    ConstantRate,
    DomainError,
    FailureModel,
    SrgmNhpp,
    reliability_at,
    windowed_reliability,
)


class ComponentKind(enum.Enum):
    SENSOR = "Sensor"
    ACTUATOR = "Actuator"
    NETWORK = "Network"
    COMPUTE_HARDWARE = "ComputeHardware"
    COMPUTE_SOFTWARE = "ComputeSoftware"
    COMPUTE_INTERACTION = "ComputeInteraction"
    OTHER = "Other"

    @classmethod
    def parse(cls, text: str) -> "ComponentKind":
        for kind in cls:
            if kind.value.lower() == str(text).strip().lower():
                return kind
        raise DomainError(f"unknown component kind {text!r}")


@dataclass(frozen=True)
class FreshStart:
    """Mission starts from a new (age zero) component."""


@dataclass(frozen=True)
class TestWindow:
    """Mission is the window ``(t_start, t_start + mission]`` of the counting process."""

    t_start: float

    def __post_init__(self):
        if not (self.t_start >= 0 and math.isfinite(self.t_start)):
            raise DomainError(f"window start must be >= 0, got {self.t_start!r}")


Window = Union[FreshStart, TestWindow]


@dataclass(frozen=True)
class Component:
    id: str
    model: FailureModel
    kind: ComponentKind = ComponentKind.OTHER
    name: str = ""
    window: Window = field(default_factory=FreshStart)

    def __post_init__(self):
        if not self.id:
            raise DomainError("component id must be a non-empty string")
        if self.kind is ComponentKind.COMPUTE_SOFTWARE and not isinstance(
            self.model, (SrgmNhpp, ConstantRate)
        ):
            raise DomainError(
                f"component {self.id!r}: software components need an SRGM or constant-rate model"
            )

    def reliability(self, mission: float) -> float:
        if isinstance(self.window, TestWindow):
            return windowed_reliability(self.model, self.window.t_start, mission)
        return reliability_at(self.model, mission)


@dataclass(frozen=True)
class Leaf:
    component: Component


@dataclass(frozen=True)
class Series:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise DomainError("series block needs at least one child")


@dataclass(frozen=True)
class Parallel:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise DomainError("parallel block needs at least one child")


@dataclass(frozen=True)
class KofN:
    k: int
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if isinstance(self.k, bool) or int(self.k) != self.k:
            raise DomainError(f"k must be an integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if not 1 <= self.k <= len(self.children):
            raise DomainError(f"k-of-n block needs 1 <= k <= n, got k={self.k}, n={len(self.children)}")


Block = Union[Leaf, Series, Parallel, KofN]


def iter_leaves(block: Block) -> Iterator[Component]:
    """Yield leaf components in declaration (depth-first) order."""
    if isinstance(block, Leaf):
        yield block.component
        return
    for child in block.children:
        yield from iter_leaves(child)


def validate_block(block: Block) -> None:
    """Check leaf id uniqueness across the tree."""
    seen: set[str] = set()
    for comp in iter_leaves(block):
        if comp.id in seen:
            raise DomainError(f"component id {comp.id!r} appears more than once")
        seen.add(comp.id)


def _check_parts(parts: Sequence[float]) -> list[float]:
    values = [float(p) for p in parts]
    if not values:
        raise DomainError("at least one reliability value is required")
    for p in values:
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"reliability values must lie in [0, 1], got {p!r}")
    return values


def series_reliability(parts: Sequence[float]) -> float:
    result = 1.0
    for p in _check_parts(parts):
        result *= p
    return result


def parallel_reliability(parts: Sequence[float]) -> float:
    unreliability = 1.0
    for p in _check_parts(parts):
        unreliability *= 1.0 - p
    return 1.0 - unreliability


def k_of_n_reliability(k: int, parts: Sequence[float]) -> float:
    """Probability that at least ``k`` of the independent ``parts`` work.

    Uses the exact convolution over "exactly j working" probabilities,
    truncated at ``k`` (the top state accumulates "k or more"), so parts may
    be heterogeneous. O(n*k).
    """
    values = _check_parts(parts)
    n = len(values)
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise DomainError(f"k must be an integer in [1, {n}], got {k!r}")
    k = int(k)
    # dist[j] = P(exactly j working) for j < k; dist[k] = P(at least k working)
    dist = [1.0] + [0.0] * k
    for p in values:
        q = 1.0 - p
        dist[k] = dist[k] + dist[k - 1] * p
        for j in range(k - 1, 0, -1):
            dist[j] = dist[j] * q + dist[j - 1] * p
        dist[0] *= q
    return min(1.0, max(0.0, dist[k]))


def evaluate_block(block: Block, mission: float) -> float:
    """Reliability of ``block`` over a mission of ``mission`` hours.

    Model domain errors are re-raised with the offending component id.
    """
    if isinstance(block, Leaf):
        comp = block.component
        try:
            return comp.reliability(mission)
        except DomainError as exc:
            raise DomainError(f"component {comp.id!r}: {exc}") from exc
    values = [evaluate_block(child, mission) for child in block.children]
    if isinstance(block, Series):
        return series_reliability(values)
    if isinstance(block, Parallel):
        return parallel_reliability(values)
    if isinstance(block, KofN):
        return k_of_n_reliability(block.k, values)
    raise TypeError(f"not a block: {block!r}")


# -- combiners ---------------------------------------------------------------


@dataclass(frozen=True)
class Product:
    pass


@dataclass(frozen=True)
class LiteralSum:
    pass


@dataclass(frozen=True)
class NormalizedMean:
    weights: tuple | None = None

    def __post_init__(self):
        if self.weights is None:
            return
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if any(w < 0 or not math.isfinite(w) for w in weights):
            raise DomainError(f"weights must be non-negative, got {weights}")
        if not weights or abs(math.fsum(weights) - 1.0) > 1e-9:
            raise DomainError(f"weights must sum to 1, got {weights}")

    def resolved(self, n: int) -> tuple:
        if self.weights is None:
            return (1.0 / n,) * n
        if len(self.weights) != n:
            raise DomainError(f"expected {n} weights, got {len(self.weights)}")
        return self.weights


CombinerMode = Union[Product, LiteralSum, NormalizedMean]


class CombinedValue(NamedTuple):
    """Result of a combiner. ``literal`` marks raw sums that may exceed 1."""

    value: float
    literal: bool

    @property
    def exceeds_unity(self) -> bool:
        return self.value > 1.0


def combine(values: Sequence[float], mode: CombinerMode) -> CombinedValue:
    values = _check_parts(values)
    if isinstance(mode, Product):
        return CombinedValue(series_reliability(values), False)
    if isinstance(mode, LiteralSum):
        return CombinedValue(math.fsum(values), True)
    if isinstance(mode, NormalizedMean):
        weights = mode.resolved(len(values))
        value = math.fsum(w * v for w, v in zip(weights, values))
        return CombinedValue(min(1.0, value), False)
    raise TypeError(f"unknown combiner mode {mode!r}")


def cc_reliability(sw: float, hw: float, sh: float, mode: CombinerMode = Product()) -> CombinedValue:
    """Combine software, hardware and interaction reliabilities of the compute module."""
    return combine([sw, hw, sh], mode)


# -- whole system ------------------------------------------------------------


class LiteralSumRefused(DomainError):
    """A raw literal sum was about to be used as a probability."""


MODULE_NAMES = ("sensors", "actuators", "network", "cc_software", "cc_hardware", "cc_interaction")


@dataclass(frozen=True)
class CpsArchitecture:
    """Four-module system layout.

    The compute-and-control module is either three sub-blocks combined by
    ``cc_mode`` or, when ``cc_unit`` is given, a single block covering whole
    redundant compute units (the three sub-blocks must then be ``None``).
    """

    sensors: Block
    actuators: Block
    network: Block
    cc_software: Block | None = None
    cc_hardware: Block | None = None
    cc_interaction: Block | None = None
    cc_mode: CombinerMode = Product()
    mission: float = 0.0
    data_reliability: float | None = None
    cc_unit: Block | None = None

    def __post_init__(self):
        if not (self.mission >= 0 and math.isfinite(self.mission)):
            raise DomainError(f"mission must be >= 0, got {self.mission!r}")
        if self.data_reliability is not None and not (
            self.data_reliability >= 0 and math.isfinite(self.data_reliability)
        ):
            raise DomainError(f"data reliability must be >= 0, got {self.data_reliability!r}")
        subs = (self.cc_software, self.cc_hardware, self.cc_interaction)
        if self.cc_unit is None:
            if any(b is None for b in subs):
                raise DomainError("cc_software, cc_hardware and cc_interaction are all required without cc_unit")
        elif any(b is not None for b in subs):
            raise DomainError("cc_unit excludes cc_software/cc_hardware/cc_interaction")
        seen: set[str] = set()
        for _, block in self.blocks():
            for comp in iter_leaves(block):
                if comp.id in seen:
                    raise DomainError(f"component id {comp.id!r} appears more than once")
                seen.add(comp.id)

    def blocks(self) -> list[tuple[str, Block]]:
        names = ("sensors", "actuators", "network")
        names += ("cc_unit",) if self.cc_unit is not None else MODULE_NAMES[3:]
        return [(name, getattr(self, name)) for name in names]


@dataclass(frozen=True)
class CpsBreakdown:
    modules: dict
    cc: CombinedValue
    without_data: float
    with_data: float | None

    @property
    def value(self) -> float:
        return self.without_data if self.with_data is None else self.with_data


def cps_breakdown(arch: CpsArchitecture, allow_literal_sum: bool = False) -> CpsBreakdown:
    """Per-module reliabilities plus the system value with and without the data term."""
    modules = {name: evaluate_block(block, arch.mission) for name, block in arch.blocks()}
    if arch.cc_unit is not None:
        cc = CombinedValue(modules["cc_unit"], False)
    else:
        cc = cc_reliability(modules["cc_software"], modules["cc_hardware"], modules["cc_interaction"], arch.cc_mode)
    if cc.literal and not allow_literal_sum:
        raise LiteralSumRefused(
            f"literal-sum compute reliability {cc.value:.12g} is a raw sum of three probabilities "
            "and may exceed 1; refusing to use it as a probability without an explicit override"
        )
    without = cc.value * modules["actuators"] * modules["sensors"] * modules["network"]
    with_data = None
    if arch.data_reliability is not None:
        if arch.data_reliability > 1 and not allow_literal_sum:
            raise LiteralSumRefused(
                f"data reliability {arch.data_reliability:.12g} exceeds 1 (literal-sum score); "
                "refusing without an explicit override"
            )
        with_data = without * arch.data_reliability
    return CpsBreakdown(modules, cc, without, with_data)


def cps_reliability(arch: CpsArchitecture, allow_literal_sum: bool = False) -> float:
    """Whole-system reliability, including the data term when present."""
    return cps_breakdown(arch, allow_literal_sum).value
