"""JSON architecture documents and report rendering.

Architecture documents look like::

    {
      "mission_hours": 1000,
      "cc_mode": "product",
      "modules": {
        "sensors": {"type": "parallel", "children": [
            {"type": "leaf", "id": "S1-1", "kind": "Sensor",
             "model": {"type": "constant", "lambda": 1.25e-05}}, ...]},
        "actuators": ..., "network": ...,
        "cc_software": ..., "cc_hardware": ..., "cc_interaction": ...
      },
      "data_reliability": 0.98
    }

Rates inside documents are per hour. ``cc_mode`` may also be an object
``{"mode": "normalized_mean", "weights": [...]}``; ``modules.cc_unit``
replaces the three ``cc_*`` sub-blocks with one block of whole compute units.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .composition import (
    Block,
    Component,
    ComponentKind,
    CombinerMode,
    CpsArchitecture,
    CpsBreakdown,
    FreshStart,
    KofN,
    Leaf,
    LiteralSum,
    NormalizedMean,
    Parallel,
    Product,
    Series,
    TestWindow,
)
from .models import ConstantRate, DomainError, FailureModel, PowerLaw, SrgmNhpp

SIG_DIGITS = 12


class DocumentError(DomainError):
    """Invalid document content, with a JSON path to the offending node."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def fmt(value: float | None) -> str:
    """Human rendering with 12 significant digits."""
    if value is None:
        return "-"
    if math.isinf(value):
        return "inf"
    return f"{value:.{SIG_DIGITS}g}"


# -- parsing -----------------------------------------------------------------


def _get(node: Any, key: str, path: str, kind=None):
    if not isinstance(node, dict):
        raise DocumentError(path, "expected an object")
    if key not in node:
        raise DocumentError(f"{path}.{key}", "missing")
    value = node[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool)):
        raise DocumentError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    return value


def _num(node, key, path, default=None) -> float:
    if default is not None and key not in node:
        return default
    return float(_get(node, key, path, (int, float)))


def parse_model(node: Any, path: str = "$") -> FailureModel:
    type_ = _get(node, "type", path, str)
    try:
        if type_ == "constant":
            return ConstantRate(_num(node, "lambda", path))
        if type_ == "powerlaw":
            return PowerLaw(_num(node, "scale", path), _num(node, "shape", path))
        if type_ == "srgm":
            return SrgmNhpp(_num(node, "a", path), _num(node, "b", path), _num(node, "t_test", path, 0.0))
    except DocumentError:
        raise
    except DomainError as exc:
        raise DocumentError(path, str(exc)) from exc
    raise DocumentError(f"{path}.type", f"unknown model type {type_!r}")


def parse_block(node: Any, path: str = "$") -> Block:
    type_ = _get(node, "type", path, str)
    try:
        if type_ == "leaf":
            cid = _get(node, "id", path, str)
            kind = ComponentKind.parse(node.get("kind", "Other"))
            window = node.get("window")
            if window is None:
                win = FreshStart()
            else:
                win = TestWindow(_num(window, "t_start", f"{path}.window"))
            model = parse_model(_get(node, "model", path, dict), f"{path}.model")
            return Leaf(Component(cid, model, kind, name=str(node.get("name", "")), window=win))
        if type_ in ("series", "parallel", "k_of_n"):
            children = _get(node, "children", path, list)
            parsed = [parse_block(c, f"{path}.children[{i}]") for i, c in enumerate(children)]
            if type_ == "series":
                return Series(parsed)
            if type_ == "parallel":
                return Parallel(parsed)
            return KofN(_get(node, "k", path, int), parsed)
    except DocumentError:
        raise
    except DomainError as exc:
        raise DocumentError(path, str(exc)) from exc
    raise DocumentError(f"{path}.type", f"unknown block type {type_!r}")


def parse_mode(node: Any, path: str = "$.cc_mode") -> CombinerMode:
    weights = None
    name = node
    if isinstance(node, dict):
        name = _get(node, "mode", path, str)
        weights = node.get("weights")
    if name == "product":
        return Product()
    if name == "literal_sum":
        return LiteralSum()
    if name == "normalized_mean":
        try:
            return NormalizedMean(tuple(weights) if weights is not None else None)
        except (DomainError, TypeError) as exc:
            raise DocumentError(f"{path}.weights", str(exc)) from exc
    raise DocumentError(path, f"unknown combiner mode {name!r}")


def parse_architecture(doc: Any) -> CpsArchitecture:
    modules = _get(doc, "modules", "$", dict)
    mission = _num(doc, "mission_hours", "$")
    mode = parse_mode(doc.get("cc_mode", "product"))
    known = {"sensors", "actuators", "network", "cc_software", "cc_hardware", "cc_interaction", "cc_unit"}
    unknown = sorted(set(modules) - known)
    if unknown:
        raise DocumentError("$.modules", f"unknown modules {unknown}")
    blocks = {name: parse_block(node, f"$.modules.{name}") for name, node in modules.items()}
    data = doc.get("data_reliability")
    if data is not None and (isinstance(data, bool) or not isinstance(data, (int, float))):
        raise DocumentError("$.data_reliability", f"expected a number, got {data!r}")
    for name in ("sensors", "actuators", "network"):
        if name not in blocks:
            raise DocumentError(f"$.modules.{name}", "missing")
    try:
        return CpsArchitecture(cc_mode=mode, mission=mission, data_reliability=data, **blocks)
    except DomainError as exc:
        raise DocumentError("$", str(exc)) from exc


def load_architecture(path: str | Path) -> CpsArchitecture:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"not valid JSON: {exc}") from exc
    return parse_architecture(doc)


# -- emitting ----------------------------------------------------------------


def model_to_dict(model: FailureModel) -> dict:
    if isinstance(model, ConstantRate):
        return {"type": "constant", "lambda": model.lam}
    if isinstance(model, PowerLaw):
        return {"type": "powerlaw", "scale": model.scale, "shape": model.shape}
    if isinstance(model, SrgmNhpp):
        return {"type": "srgm", "a": model.a, "b": model.b, "t_test": model.t_test}
    raise TypeError(model)


def block_to_dict(block: Block) -> dict:
    if isinstance(block, Leaf):
        comp = block.component
        node = {"type": "leaf", "id": comp.id, "kind": comp.kind.value}
        if comp.name:
            node["name"] = comp.name
        node["model"] = model_to_dict(comp.model)
        if isinstance(comp.window, TestWindow):
            node["window"] = {"t_start": comp.window.t_start}
        return node
    children = [block_to_dict(c) for c in block.children]
    if isinstance(block, Series):
        return {"type": "series", "children": children}
    if isinstance(block, Parallel):
        return {"type": "parallel", "children": children}
    return {"type": "k_of_n", "k": block.k, "children": children}


def mode_to_doc(mode: CombinerMode):
    if isinstance(mode, Product):
        return "product"
    if isinstance(mode, LiteralSum):
        return "literal_sum"
    if mode.weights is None:
        return "normalized_mean"
    return {"mode": "normalized_mean", "weights": list(mode.weights)}


def architecture_to_dict(arch: CpsArchitecture) -> dict:
    doc: dict[str, Any] = {
        "mission_hours": arch.mission,
        "cc_mode": mode_to_doc(arch.cc_mode),
        "modules": {name: block_to_dict(block) for name, block in arch.blocks()},
    }
    if arch.data_reliability is not None:
        doc["data_reliability"] = arch.data_reliability
    return doc


def dump_json(doc: Any) -> str:
    # json writes floats with repr(), which round-trips exactly
    return json.dumps(doc, indent=2) + "\n"


# -- reports -----------------------------------------------------------------


def breakdown_to_dict(bd: CpsBreakdown, mission: float) -> dict:
    return {
        "mission_hours": mission,
        "modules": dict(bd.modules),
        "r_cc": bd.cc.value,
        "r_cps": bd.without_data,
        "r_cps_with_data": bd.with_data,
        "flags": {"cc_literal_sum": bd.cc.literal, "cc_exceeds_unity": bd.cc.exceeds_unity},
    }


def render_breakdown(report: dict) -> str:
    lines = [f"mission_hours  {fmt(report['mission_hours'])}"]
    for name, value in report["modules"].items():
        lines.append(f"R[{name}]  {fmt(value)}")
    lines.append(f"R_CC  {fmt(report['r_cc'])}")
    lines.append(f"R_CPS  {fmt(report['r_cps'])}")
    if report["r_cps_with_data"] is not None:
        lines.append(f"R_CPS_with_data  {fmt(report['r_cps_with_data'])}")
    flags = [k for k, v in report["flags"].items() if v]
    if flags:
        lines.append("flags  " + ",".join(flags))
    return "\n".join(lines) + "\n"
