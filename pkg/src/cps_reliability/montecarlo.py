"""Monte Carlo estimation of block and system reliability.

Each sample draws one uniform per leaf component; the component is up when
the draw falls below its analytical mission reliability. The system state
follows from the block structure function.

Uniforms come from a single Philox stream keyed by the seed: the draw for
(sample ``i``, component ``j``) sits at position ``i * n_components + j``.
Chunks jump straight to their offset, so the result does not depend on how
samples are split across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .composition import (
    Block,
    Component,
    CpsArchitecture,
    DomainError,
    KofN,
    Leaf,
    Parallel,
    Product,
    Series,
    iter_leaves,
    validate_block,
)
from .models import ConstantRate

CHUNK_SAMPLES = 4096
Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimulationConfig:
    samples: int
    seed: int
    mission: float | None = None

    def __post_init__(self):
        if isinstance(self.samples, bool) or int(self.samples) != self.samples or self.samples < 1:
            raise DomainError(f"samples must be an integer >= 1, got {self.samples!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.mission is not None and not (self.mission >= 0 and math.isfinite(self.mission)):
            raise DomainError(f"mission must be >= 0, got {self.mission!r}")


@dataclass(frozen=True)
class SimulationEstimate:
    p_hat: float
    std_error: float
    ci95: tuple
    samples: int
    seed: int
    successes: int
    # normal approximation unreliable (fewer than 5 successes or failures)
    degenerate: bool

    def sigma_distance(self, reference: float) -> float:
        """Distance of ``p_hat`` from ``reference`` in binomial standard errors.

        The error is taken at ``reference`` itself, so an estimate that saw no
        failures (or no successes) is still judged sensibly near 0 or 1.
        """
        diff = abs(self.p_hat - reference)
        sigma = math.sqrt(max(reference * (1.0 - reference), 0.0) / self.samples)
        if sigma == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / sigma


def sample_component_up(component: Component, mission: float, draw: float) -> bool:
    """Bernoulli trial: up iff ``draw`` is below the component's mission reliability."""
    if not 0.0 < draw < 1.0:
        raise DomainError(f"draw must lie in (0, 1), got {draw!r}")
    return draw < component.reliability(mission)


def structure_up(block: Block, states: Mapping[str, bool]) -> bool:
    """Boolean structure function of ``block`` for the given component states."""
    if isinstance(block, Leaf):
        try:
            return bool(states[block.component.id])
        except KeyError:
            raise KeyError(f"no state given for component {block.component.id!r}") from None
    ups = [structure_up(child, states) for child in block.children]
    if isinstance(block, Series):
        return all(ups)
    if isinstance(block, Parallel):
        return any(ups)
    if isinstance(block, KofN):
        return sum(ups) >= block.k
    raise TypeError(f"not a block: {block!r}")


def _vector_structure(block: Block, index: Mapping[str, int], up: np.ndarray) -> np.ndarray:
    if isinstance(block, Leaf):
        return up[:, index[block.component.id]]
    cols = [_vector_structure(child, index, up) for child in block.children]
    if isinstance(block, Series):
        return np.logical_and.reduce(cols)
    if isinstance(block, Parallel):
        return np.logical_or.reduce(cols)
    if isinstance(block, KofN):
        return np.add.reduce([c.astype(np.int32) for c in cols]) >= block.k
    raise TypeError(f"not a block: {block!r}")


_DATA_LEAF_ID = "\x00data"

Target = Union[Block, CpsArchitecture]


def _compile(target: Target, mission: float | None):
    """Flatten a target into (structure block, leaf ids, leaf probabilities)."""
    extra: dict[str, float] = {}
    if isinstance(target, CpsArchitecture):
        if target.cc_unit is None and not isinstance(target.cc_mode, Product):
            raise DomainError("only product-mode compute modules have a structure function to simulate")
        children = [block for _, block in target.blocks()]
        if target.data_reliability is not None:
            if target.data_reliability > 1:
                raise DomainError("data reliability above 1 cannot be sampled")
            children.append(Leaf(Component(_DATA_LEAF_ID, ConstantRate(0.0))))
            extra[_DATA_LEAF_ID] = target.data_reliability
        block = Series(children)
        if mission is None:
            mission = target.mission
    else:
        block = target
        validate_block(block)
        if mission is None:
            raise DomainError("a mission time is required to simulate a bare block")
    ids, probs = [], []
    for comp in iter_leaves(block):
        ids.append(comp.id)
        if comp.id in extra:
            probs.append(extra[comp.id])
        else:
            try:
                probs.append(comp.reliability(mission))
            except DomainError as exc:
                raise DomainError(f"component {comp.id!r}: {exc}") from exc
    return block, ids, np.asarray(probs, dtype=float)


def _count_chunk(block, index, probs, seed: int, start: int, stop: int) -> int:
    n_comp = len(probs)
    bitgen = np.random.Philox(key=seed)
    # Philox yields four 64-bit words per counter step; CHUNK_SAMPLES is a
    # multiple of 4 so every chunk offset is step-aligned.
    bitgen.advance(start * n_comp // 4)
    draws = np.random.Generator(bitgen).random((stop - start, n_comp))
    up = draws < probs
    return int(np.count_nonzero(_vector_structure(block, index, up)))


def simulate(target: Target, config: SimulationConfig, workers: int | None = None) -> SimulationEstimate:
    """Estimate the reliability of a block or architecture by sampling.

    ``config.mission`` overrides an architecture's own mission and is
    required for bare blocks. ``workers`` only affects speed.
    """
    block, ids, probs = _compile(target, config.mission)
    index = {cid: i for i, cid in enumerate(ids)}
    n = int(config.samples)
    bounds = [(s, min(s + CHUNK_SAMPLES, n)) for s in range(0, n, CHUNK_SAMPLES)]
    if workers is None:
        workers = min(len(bounds), os.cpu_count() or 1)
    if workers <= 1:
        counts = [_count_chunk(block, index, probs, config.seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda ab: _count_chunk(block, index, probs, config.seed, *ab), bounds))
    successes = sum(counts)
    p_hat = successes / n
    std_error = math.sqrt(p_hat * (1.0 - p_hat) / n)
    half = Z95 * std_error
    ci = (max(0.0, p_hat - half), min(1.0, p_hat + half))
    degenerate = min(successes, n - successes) < 5
    return SimulationEstimate(p_hat, std_error, ci, n, int(config.seed), successes, degenerate)
