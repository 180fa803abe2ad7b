import itertools
import math
import random

import pytest

from cps_reliability.catalog import (
    CatalogError,
    RedundancyPlan,
    assemble_architecture,
    build_redundant_block,
    entry_from_row,
    load_catalog,
    rank_module,
)
from cps_reliability.composition import ComponentKind, Leaf, Parallel, Series, evaluate_block, iter_leaves
from cps_reliability.models import ConstantRate, DomainError
from cps_reliability.montecarlo import SimulationConfig, simulate

HEADER = "component_id,module_kind,model_type,p1,p2,p3,source\n"


def write(tmp_path, body, name="cat.csv"):
    path = tmp_path / name
    path.write_text(HEADER + body, encoding="utf-8")
    return path


def row(text):
    return entry_from_row(text.split(","))


class TestLoad:
    def test_unit_conversion(self, tmp_path):
        [entry] = load_catalog(write(tmp_path, "S1,Sensor,constant,12.5,,,oreda\n"))
        assert entry.model == ConstantRate(12.5 / 1e6)
        assert entry.model.lam == pytest.approx(1.25e-5, rel=1e-15)
        assert entry.module_kind is ComponentKind.SENSOR
        assert entry.source == "oreda"

    def test_negative_rate_reports_line(self, tmp_path):
        path = write(tmp_path, "S1,Sensor,constant,12.5,,,x\nS2,Sensor,constant,-3,,,x\n")
        with pytest.raises(CatalogError, match=r":3:.*S2"):
            load_catalog(path)

    def test_header_only(self, tmp_path):
        assert load_catalog(write(tmp_path, "")) == []

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert load_catalog(path) == []

    @pytest.mark.parametrize(
        "body",
        [
            "S1,Sensor,constant,abc,,,x\n",
            "S1,Sensor,weibull,1,,,x\n",
            "S1,Gizmo,constant,1,,,x\n",
            "S1,Sensor,constant,1\n",
            "S1,Sensor,powerlaw,1e-5,,,x\n",
            "W,ComputeSoftware,powerlaw,1e-5,1.2,,x\n",
            "S1,Sensor,constant,1,,,x\nS1,Sensor,constant,2,,,x\n",
        ],
    )
    def test_malformed_rows(self, tmp_path, body):
        with pytest.raises(CatalogError, match=r"cat.csv:\d+"):
            load_catalog(write(tmp_path, body))

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,kind\nS1,Sensor\n")
        with pytest.raises(CatalogError, match=":1:"):
            load_catalog(path)

    def test_model_types(self):
        assert row("H,ComputeHardware,powerlaw,2e-6,1.3,,x").model.shape == 1.3
        sw = row("W,ComputeSoftware,srgm,30,0.002,3000,x").model
        assert (sw.a, sw.b, sw.t_test) == (30, 0.002, 3000)

    def test_demo_catalog(self, fixtures):
        entries = load_catalog(fixtures / "demo_catalog.csv")
        assert len(entries) == 16
        assert {e.module_kind for e in entries} == set(ComponentKind) - {ComponentKind.OTHER}


class TestRank:
    def test_order_by_reliability(self):
        a = row("A,Sensor,constant,10,,,x")  # 1e-5 /h
        b = row("B,Sensor,constant,20,,,x")
        ranked = rank_module([b, a], 1000)
        assert [c.entry.component_id for c in ranked] == ["A", "B"]
        assert ranked[0].reliability == pytest.approx(math.exp(-0.01), rel=1e-14)
        assert ranked[0].reliability > ranked[1].reliability

    def test_tie_by_id(self):
        ranked = rank_module([row("A2,Actuator,constant,5,,,x"), row("A1,Actuator,constant,5,,,x")], 100)
        assert [c.entry.component_id for c in ranked] == ["A1", "A2"]

    def test_single(self):
        e = row("N,Network,constant,5,,,x")
        assert rank_module([e], 10)[0].entry is e

    def test_empty(self):
        with pytest.raises(CatalogError):
            rank_module([], 10)

    def test_mixed_kinds_rejected(self):
        with pytest.raises(CatalogError):
            rank_module([row("A,Sensor,constant,1,,,x"), row("B,Network,constant,1,,,x")], 10)

    def test_cross_model_ranking_depends_on_mission(self):
        const = row("H2,ComputeHardware,constant,10,,,x")
        wear = row("H1,ComputeHardware,powerlaw,2e-6,1.3,,x")
        assert rank_module([const, wear], 100)[0].entry.component_id == "H1"
        assert rank_module([const, wear], 2000)[0].entry.component_id == "H2"


class TestRedundantBlock:
    def entry(self, r=0.9):
        # rate in per-1e6-h so that R(1 h) = r
        return row(f"X,Sensor,constant,{-math.log(r) * 1e6!r},,,x")

    def test_single_copy_is_leaf(self):
        block = build_redundant_block(self.entry(), 1)
        assert isinstance(block, Leaf)
        assert block.component.id == "X-1"

    def test_two_copies(self):
        block = build_redundant_block(self.entry(0.9), 2)
        assert isinstance(block, Parallel)
        assert [c.id for c in iter_leaves(block)] == ["X-1", "X-2"]
        assert evaluate_block(block, 1.0) == pytest.approx(0.99, rel=1e-12)

    def test_more_copies_never_worse(self):
        e = self.entry(0.37)
        values = [evaluate_block(build_redundant_block(e, n), 1.0) for n in range(1, 8)]
        assert values == sorted(values)

    def test_zero_copies(self):
        with pytest.raises(DomainError):
            build_redundant_block(self.entry(), 0)


class TestPlan:
    def test_parse(self):
        assert RedundancyPlan.parse_counts("sensors=2,actuators=2,network=2,cc=2") == dict(
            sensors=2, actuators=2, network=2, cc=2
        )

    @pytest.mark.parametrize("text", ["sensors", "sensors=x"])
    def test_parse_errors(self, text):
        with pytest.raises(DomainError):
            RedundancyPlan.parse_counts(text)

    def test_validation(self):
        with pytest.raises(DomainError):
            RedundancyPlan(copies={"gizmos": 2})
        with pytest.raises(DomainError):
            RedundancyPlan(copies={"sensors": 0})

    def test_defaults(self):
        plan = RedundancyPlan(copies={"sensors": 3})
        assert plan.copies == {"sensors": 3, "actuators": 2, "network": 2, "cc": 2}
        assert plan.positions == {"sensors": 5, "actuators": 3, "network": 1, "cc": 1}


class TestAssemble:
    def test_redundant_shape(self, fixtures):
        report = assemble_architecture(load_catalog(fixtures / "demo_catalog.csv"), 2000)
        arch = report.architecture
        sensors = list(iter_leaves(arch.sensors))
        actuators = list(iter_leaves(arch.actuators))
        assert len(sensors) == 10 and len(actuators) == 6
        assert len(list(iter_leaves(arch.network))) == 2
        assert isinstance(arch.sensors, Series) and len(arch.sensors.children) == 5
        assert all(isinstance(c, Parallel) and len(c.children) == 2 for c in arch.sensors.children)
        assert isinstance(arch.cc_unit, Parallel) and len(arch.cc_unit.children) == 2
        assert all(isinstance(u, Series) and len(u.children) == 3 for u in arch.cc_unit.children)
        chosen = {k.value: s.chosen.component_id for k, s in report.selections.items()}
        assert chosen == {
            "Sensor": "S3",
            "Actuator": "A2",
            "Network": "N1",
            "ComputeHardware": "H2",
            "ComputeSoftware": "SW1",
            "ComputeInteraction": "SH1",
        }

    def test_r_cps_by_hand(self, fixtures):
        report = assemble_architecture(load_catalog(fixtures / "demo_catalog.csv"), 2000)
        m = 2000
        r = {e.component_id: e.reliability(m) for e in load_catalog(fixtures / "demo_catalog.csv")}
        par = lambda x: 1 - (1 - x) ** 2  # noqa: E731
        expected = par(r["S3"]) ** 5 * par(r["A2"]) ** 3 * par(r["N1"]) * par(r["H2"] * r["SW1"] * r["SH1"])
        assert report.r_cps == pytest.approx(expected, rel=1e-13)

    def test_hardware_only_cc(self, tmp_path):
        path = write(
            tmp_path,
            "S,Sensor,constant,1,,,x\nA,Actuator,constant,1,,,x\nN,Network,constant,1,,,x\nH,ComputeHardware,constant,1,,,x\n",
        )
        report = assemble_architecture(load_catalog(path), 1000)
        assert [c.id for c in iter_leaves(report.architecture.cc_unit)] == ["H-1", "H-2"]

    def test_all_perfect(self, tmp_path):
        path = write(
            tmp_path,
            "S,Sensor,constant,0,,,x\nA,Actuator,constant,0,,,x\nN,Network,constant,0,,,x\nH,ComputeHardware,constant,0,,,x\n",
        )
        assert assemble_architecture(load_catalog(path), 1e4).r_cps == 1.0

    def test_missing_kinds(self, tmp_path):
        path = write(tmp_path, "S,Sensor,constant,1,,,x\n")
        with pytest.raises(CatalogError, match="actuators.*network.*cc"):
            assemble_architecture(load_catalog(path), 100)

    def test_permuted_catalog_same_choice(self, fixtures):
        entries = load_catalog(fixtures / "demo_catalog.csv")
        base = assemble_architecture(entries, 2000)
        rng = random.Random(4)
        for _ in range(10):
            shuffled = list(entries)
            rng.shuffle(shuffled)
            other = assemble_architecture(shuffled, 2000)
            assert {k: s.chosen for k, s in other.selections.items()} == {k: s.chosen for k, s in base.selections.items()}
            assert other.r_cps == base.r_cps

    def test_swapping_choice_never_helps(self, fixtures):
        entries = load_catalog(fixtures / "demo_catalog.csv")
        best = assemble_architecture(entries, 2000)
        by_kind = {}
        for e in entries:
            by_kind.setdefault(e.module_kind, []).append(e)
        for kind, candidates in by_kind.items():
            for alt in candidates:
                others = [e for e in entries if e.module_kind is not kind] + [alt]
                assert assemble_architecture(others, 2000).r_cps <= best.r_cps

    def test_exhaustive_swap_small_catalogs(self):
        rng = random.Random(13)
        kinds = ["Sensor", "Actuator", "Network", "ComputeHardware"]
        for _ in range(20):
            rows = [f"{k[0]}{i},{k},constant,{rng.uniform(1, 80):.3f},,,x" for k in kinds for i in range(3)]
            entries = [row(r) for r in rows]
            best = assemble_architecture(entries, 3000).r_cps
            groups = [[e for e in entries if e.module_kind.value == k] for k in kinds]
            for combo in itertools.product(*groups):
                assert assemble_architecture(list(combo), 3000).r_cps <= best

    def test_constant_rate_choice_is_mission_invariant(self, fixtures):
        entries = [e for e in load_catalog(fixtures / "demo_catalog.csv") if e.model_type == "constant"]
        entries += [row("SW,ComputeSoftware,constant,1,,,x")]
        choices = {
            m: {k: s.chosen.component_id for k, s in assemble_architecture(entries, m).selections.items()}
            for m in (1, 100, 1e4, 1e5)
        }
        assert len({tuple(sorted(c.items(), key=lambda kv: kv[0].value)) for c in choices.values()}) == 1

    def test_agrees_with_monte_carlo(self, fixtures):
        report = assemble_architecture(load_catalog(fixtures / "demo_catalog.csv"), 2000)
        est = simulate(report.architecture, SimulationConfig(samples=100_000, seed=2024))
        assert est.sigma_distance(report.r_cps) <= 3
