"""Off-the-shelf component catalogs and highest-reliability selection.

Catalog files are comma-separated with the header::

    component_id,module_kind,model_type,p1,p2,p3,source

``constant`` rows give the failure rate in failures per 10^6 hours (the
OREDA convention) in ``p1``; it is converted to per-hour on load.
``powerlaw`` rows give ``scale`` (per hour**shape) and ``shape``.
``srgm`` rows give ``a``, ``b`` (per hour) and the accumulated test time
``t_test`` in hours.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .composition import (
    Block,
    Component,
    ComponentKind,
    CpsArchitecture,
    Leaf,
    Parallel,
    Product,
    Series,
    cps_breakdown,
)
from .models import ConstantRate, DomainError, FailureModel, PowerLaw, SrgmNhpp, reliability_at

CATALOG_HEADER = ("component_id", "module_kind", "model_type", "p1", "p2", "p3", "source")
PER_MILLION_HOURS = 1e6

# catalog kinds that must be present, keyed by the module they feed
REQUIRED_KINDS = {
    "sensors": ComponentKind.SENSOR,
    "actuators": ComponentKind.ACTUATOR,
    "network": ComponentKind.NETWORK,
    "cc": ComponentKind.COMPUTE_HARDWARE,
}
OPTIONAL_CC_KINDS = (ComponentKind.COMPUTE_SOFTWARE, ComponentKind.COMPUTE_INTERACTION)

# five sensor and three actuator positions, every module duplicated
DEFAULT_POSITIONS = {"sensors": 5, "actuators": 3, "network": 1, "cc": 1}
DEFAULT_COPIES = {"sensors": 2, "actuators": 2, "network": 2, "cc": 2}


class CatalogError(DomainError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    component_id: str
    module_kind: ComponentKind
    model_type: str
    model: FailureModel
    source: str = ""

    def reliability(self, mission: float) -> float:
        return reliability_at(self.model, mission)

    def component(self, component_id: str | None = None) -> Component:
        return Component(component_id or self.component_id, self.model, self.module_kind, name=self.component_id)


def _number(text: str | None, what: str) -> float | None:
    if text is None or text.strip() == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{what} is not a number: {text!r}") from None


def entry_from_row(row: Sequence[str]) -> CatalogEntry:
    """Build an entry from one data row (already split into the seven columns)."""
    if len(row) != len(CATALOG_HEADER):
        raise ValueError(f"expected {len(CATALOG_HEADER)} columns, got {len(row)}")
    cid, kind, model_type, p1, p2, p3, source = (c.strip() for c in row)
    if not cid:
        raise ValueError("empty component_id")
    kind_ = ComponentKind.parse(kind)
    p1_, p2_, p3_ = (_number(p, name) for p, name in ((p1, "p1"), (p2, "p2"), (p3, "p3")))
    model_type = model_type.lower()
    try:
        if model_type == "constant":
            if p1_ is None:
                raise ValueError("constant model needs p1 (failures per 10^6 h)")
            model: FailureModel = ConstantRate(p1_ / PER_MILLION_HOURS)
        elif model_type == "powerlaw":
            if p1_ is None or p2_ is None:
                raise ValueError("powerlaw model needs p1 (scale) and p2 (shape)")
            model = PowerLaw(p1_, p2_)
        elif model_type == "srgm":
            if p1_ is None or p2_ is None:
                raise ValueError("srgm model needs p1 (a) and p2 (b)")
            model = SrgmNhpp(p1_, p2_, p3_ or 0.0)
        else:
            raise ValueError(f"unknown model_type {model_type!r}")
        entry = CatalogEntry(cid, kind_, model_type, model, source)
        entry.component()
    except DomainError as exc:
        raise CatalogError(f"entry {cid!r}: {exc}") from exc
    return entry


def load_catalog(path: str | Path) -> list[CatalogEntry]:
    """Parse and validate a catalog file. A header-only file is an empty catalog."""
    entries: list[CatalogEntry] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return entries
        if tuple(h.strip() for h in header) != CATALOG_HEADER:
            raise CatalogError(f"{path}:1: header must be {','.join(CATALOG_HEADER)}")
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            try:
                entry = entry_from_row(row)
            except CatalogError as exc:
                raise CatalogError(f"{path}:{lineno}: {exc}") from exc
            except ValueError as exc:
                raise CatalogError(f"{path}:{lineno}: {exc}") from exc
            if entry.component_id in seen:
                raise CatalogError(f"{path}:{lineno}: duplicate component_id {entry.component_id!r}")
            seen.add(entry.component_id)
            entries.append(entry)
    return entries


@dataclass(frozen=True)
class RankedCandidate:
    entry: CatalogEntry
    reliability: float


def rank_module(entries: Sequence[CatalogEntry], mission: float) -> list[RankedCandidate]:
    """Candidates by mission reliability, best first; ties go to the smaller id."""
    if not entries:
        raise CatalogError("no candidates to rank")
    kinds = {e.module_kind for e in entries}
    if len(kinds) > 1:
        raise CatalogError(f"rank_module needs one module kind, got {sorted(k.value for k in kinds)}")
    ranked = [RankedCandidate(e, e.reliability(mission)) for e in entries]
    ranked.sort(key=lambda c: (-c.reliability, c.entry.component_id))
    return ranked


def build_redundant_block(chosen: CatalogEntry, copies: int, tag: str | None = None) -> Block:
    """``copies`` independent instances of ``chosen`` in parallel.

    Leaf ids are ``<id>-1 .. <id>-n`` (``<id>.<tag>-k`` when a tag is
    given). A single copy is returned as a bare leaf.
    """
    if isinstance(copies, bool) or int(copies) != copies or copies < 1:
        raise DomainError(f"copies must be an integer >= 1, got {copies!r}")
    base = chosen.component_id if tag is None else f"{chosen.component_id}.{tag}"
    leaves = [Leaf(chosen.component(f"{base}-{i}")) for i in range(1, int(copies) + 1)]
    return leaves[0] if len(leaves) == 1 else Parallel(leaves)


@dataclass(frozen=True)
class RedundancyPlan:
    """Replicas per position (``copies``) and positions in series per module."""

    copies: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_COPIES))
    positions: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_POSITIONS))

    def __post_init__(self):
        for label, table in (("copies", self.copies), ("positions", self.positions)):
            for module, count in table.items():
                if module not in DEFAULT_COPIES:
                    raise DomainError(f"unknown module {module!r} in {label}; expected one of {list(DEFAULT_COPIES)}")
                if isinstance(count, bool) or int(count) != count or count < 1:
                    raise DomainError(f"{label} for {module} must be an integer >= 1, got {count!r}")
        object.__setattr__(self, "copies", {**DEFAULT_COPIES, **self.copies})
        object.__setattr__(self, "positions", {**DEFAULT_POSITIONS, **self.positions})

    @staticmethod
    def parse_counts(text: str) -> dict:
        """Parse ``"sensors=2,actuators=2"`` into a dict."""
        counts = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, sep, value = part.partition("=")
            if not sep:
                raise DomainError(f"expected module=count, got {part!r}")
            try:
                counts[key.strip()] = int(value)
            except ValueError:
                raise DomainError(f"count for {key.strip()!r} is not an integer: {value!r}") from None
        return counts


@dataclass(frozen=True)
class ModuleSelection:
    kind: ComponentKind
    ranked: list
    block: Block | None = None

    @property
    def chosen(self) -> CatalogEntry:
        return self.ranked[0].entry

    @property
    def tie(self) -> bool:
        return len(self.ranked) > 1 and self.ranked[0].reliability == self.ranked[1].reliability


@dataclass(frozen=True)
class SelectionReport:
    mission: float
    selections: dict
    architecture: CpsArchitecture
    modules: dict
    r_cps: float


def _positions_block(entry: CatalogEntry, positions: int, copies: int) -> Block:
    if positions == 1:
        return build_redundant_block(entry, copies)
    return Series([build_redundant_block(entry, copies, tag=f"p{p}") for p in range(1, positions + 1)])


def _cc_block(hw: CatalogEntry, extras: list[CatalogEntry], positions: int, copies: int) -> Block:
    if not extras:
        return _positions_block(hw, positions, copies)

    def unit(tag: str) -> Block:
        return Series([Leaf(e.component(f"{e.component_id}.{tag}")) for e in [hw, *extras]])

    def group(prefix: str) -> Block:
        units = [unit(f"{prefix}u{u}") for u in range(1, copies + 1)]
        return units[0] if copies == 1 else Parallel(units)

    if positions == 1:
        return group("")
    return Series([group(f"p{p}") for p in range(1, positions + 1)])


def assemble_architecture(
    catalog: Iterable[CatalogEntry],
    mission: float,
    plan: RedundancyPlan | None = None,
) -> SelectionReport:
    """Pick the most reliable candidate per module and build the redundant system.

    Compute-and-control units combine the best hardware entry with the best
    software and interaction entries when the catalog has them; units are
    made redundant as whole units.
    """
    plan = plan or RedundancyPlan()
    by_kind: dict[ComponentKind, list[CatalogEntry]] = {}
    for entry in catalog:
        by_kind.setdefault(entry.module_kind, []).append(entry)
    absent = [f"{module} ({kind.value})" for module, kind in REQUIRED_KINDS.items() if kind not in by_kind]
    if absent:
        raise CatalogError(f"catalog has no candidates for: {', '.join(absent)}")

    selections = {kind: ModuleSelection(kind, rank_module(entries, mission)) for kind, entries in by_kind.items()}
    blocks = {}
    for module in ("sensors", "actuators", "network"):
        kind = REQUIRED_KINDS[module]
        blocks[module] = _positions_block(selections[kind].chosen, plan.positions[module], plan.copies[module])
    extras = [selections[k].chosen for k in OPTIONAL_CC_KINDS if k in selections]
    hw = selections[ComponentKind.COMPUTE_HARDWARE].chosen
    blocks["cc_unit"] = _cc_block(hw, extras, plan.positions["cc"], plan.copies["cc"])

    arch = CpsArchitecture(
        sensors=blocks["sensors"],
        actuators=blocks["actuators"],
        network=blocks["network"],
        cc_unit=blocks["cc_unit"],
        cc_mode=Product(),
        mission=float(mission),
    )
    kind_block = {REQUIRED_KINDS[m]: b for m, b in blocks.items() if m != "cc_unit"}
    kind_block[ComponentKind.COMPUTE_HARDWARE] = blocks["cc_unit"]
    selections = {
        kind: ModuleSelection(sel.kind, sel.ranked, kind_block.get(kind))
        for kind, sel in sorted(selections.items(), key=lambda kv: list(ComponentKind).index(kv[0]))
    }
    breakdown = cps_breakdown(arch)
    return SelectionReport(float(mission), selections, arch, breakdown.modules, breakdown.without_data)
