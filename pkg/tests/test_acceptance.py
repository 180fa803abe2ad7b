"""Exit criteria. Each test records a one-line verdict printed after the run."""

import io
import itertools
import json
import math
import random
import time

import pytest

from cps_reliability.catalog import assemble_architecture, load_catalog
from cps_reliability.cli import main
from cps_reliability.composition import (
    Component,
    ComponentKind,
    CpsArchitecture,
    Leaf,
    Parallel,
    cps_breakdown,
    cps_reliability,
    evaluate_block,
    iter_leaves,
    k_of_n_reliability,
)
from cps_reliability.data_quality import QualitySchema, data_reliability, load_records, score_batch
from cps_reliability.models import (
    ConstantRate,
    PowerLaw,
    SrgmNhpp,
    reliability_at,
    srgm_count_pmf_table,
    srgm_intensity,
    srgm_mean_value,
)
from cps_reliability.montecarlo import SimulationConfig, simulate

from conftest import ACCEPTANCE, random_tree

SAMPLES = 100_000
CATALOG_MISSION = 2000.0


def record(name, ok, detail):
    ACCEPTANCE[name] = (bool(ok), detail)
    assert ok, f"{name}: {detail}"


def brute_k_of_n(k, parts):
    total = 0.0
    for states in itertools.product((0, 1), repeat=len(parts)):
        if sum(states) >= k:
            total += math.prod(r if up else 1.0 - r for up, r in zip(states, parts))
    return total


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue()


def test_catalog_architecture_against_oracle(fixtures):
    start = time.perf_counter()
    report = assemble_architecture(load_catalog(fixtures / "demo_catalog.csv"), CATALOG_MISSION)
    arch = report.architecture
    shape = (
        len(list(iter_leaves(arch.sensors))),
        len(list(iter_leaves(arch.actuators))),
        len(list(iter_leaves(arch.network))),
        len(arch.cc_unit.children),
    )
    passes = 0
    for seed in range(30):
        est = simulate(arch, SimulationConfig(samples=SAMPLES, seed=seed))
        passes += est.sigma_distance(report.r_cps) <= 3
    elapsed = time.perf_counter() - start
    record(
        "redundant catalog architecture vs Monte Carlo",
        shape == (10, 6, 2, 2) and passes >= 29 and elapsed < 10,
        f"shape sensors/actuators/networks/cc-units={shape}, R_CPS={report.r_cps:.6f}, "
        f"{passes}/30 seeds within 3 sigma, {elapsed:.2f} s",
    )


def test_oracle_equivalence_random_trees():
    rng = random.Random(20240501)
    passes = plug_in = 0
    for i in range(50):
        block = random_tree(rng, max_depth=4, max_leaves=20)
        analytic = evaluate_block(block, 1000.0)
        est = simulate(block, SimulationConfig(samples=SAMPLES, seed=1000 + i, mission=1000.0))
        passes += est.sigma_distance(analytic) <= 3
        plug_in += abs(est.p_hat - analytic) <= 3 * est.std_error
    record(
        "oracle equivalence (50 random trees)",
        passes >= 48,
        f"{passes}/50 within 3 sigma ({plug_in}/50 using the plug-in error, which is 0 when no trial fails)",
    )


def test_k_of_n_exactness():
    rng = random.Random(99)
    worst = 0.0
    for _ in range(200):
        n = rng.randint(1, 12)
        parts = [rng.random() for _ in range(n)]
        k = rng.randint(1, n)
        worst = max(worst, abs(k_of_n_reliability(k, parts) - brute_k_of_n(k, parts)))
    record("k-of-n exactness", worst <= 1e-12, f"max |convolution - enumeration| = {worst:.2e} over 200 instances")


def test_model_collapse():
    rng = random.Random(5)
    grid = [1e5 * i / 99 for i in range(100)]
    worst = 0.0
    for _ in range(100):
        scale = 10 ** rng.uniform(-9, -3)
        for t in grid:
            worst = max(worst, abs(reliability_at(PowerLaw(scale, 1.0), t) - reliability_at(ConstantRate(scale), t)))
    record("power law shape 1 == constant rate", worst <= 1e-12, f"max difference {worst:.2e}")


def test_srgm_calculus():
    rng = random.Random(7)
    worst_fd = 0.0
    worst_sum = 0.0
    h = 1e-3
    for _ in range(100):
        a = 10 ** rng.uniform(0, 3)
        b = 10 ** rng.uniform(-4, math.log10(5e-3))
        for t in (1, 10, 100, 1000):
            fd = (srgm_mean_value(a, b, t + h) - srgm_mean_value(a, b, t - h)) / (2 * h)
            worst_fd = max(worst_fd, abs(fd / srgm_intensity(a, b, t) - 1))
            worst_sum = max(worst_sum, abs(math.fsum(srgm_count_pmf_table(a, b, t)) - 1))
    record(
        "SRGM intensity/pmf calculus",
        worst_fd <= 1e-6 and worst_sum <= 1e-12,
        f"max finite-difference rel. error {worst_fd:.2e}, max |sum pmf - 1| {worst_sum:.2e}",
    )


def test_redundancy_monotonicity():
    rng = random.Random(11)
    failures = 0
    for case in range(10_000):
        mission = rng.uniform(0, 5000)
        children = [random_tree(random.Random(rng.random()), max_depth=2, max_leaves=4) for _ in range(rng.randint(1, 4))]
        # relabel so children do not share ids
        children = [_relabel(c, f"g{j}.") for j, c in enumerate(children)]
        copy = _relabel(rng.choice(children), "copy.")
        before = evaluate_block(Parallel(children), mission)
        after = evaluate_block(Parallel(children + [copy]), mission)
        failures += after < before
    record("adding a redundant copy never hurts", failures == 0, f"{failures} decreases in 10000 cases")


def _relabel(block, prefix):
    if isinstance(block, Leaf):
        c = block.component
        return Leaf(Component(prefix + c.id, c.model, c.kind, c.name, c.window))
    children = [_relabel(ch, prefix) for ch in block.children]
    return type(block)(*([block.k] if hasattr(block, "k") else []), children)


def test_data_term_factorization():
    rng = random.Random(15)
    worst = 0.0
    for i in range(1000):
        modules = {
            name: _relabel(random_tree(rng, max_depth=2, max_leaves=5), f"{name}.")
            for name in ("sensors", "actuators", "network", "cc_hardware", "cc_interaction")
        }
        sw = Leaf(Component("sw", SrgmNhpp(rng.uniform(1, 50), rng.uniform(1e-4, 5e-3), rng.uniform(0, 3000)),
                            ComponentKind.COMPUTE_SOFTWARE))
        r_data = rng.random()
        arch = CpsArchitecture(cc_software=sw, mission=rng.uniform(0, 3000), data_reliability=r_data, **modules)
        bd = cps_breakdown(arch)
        worst = max(worst, abs(cps_reliability(arch) - bd.without_data * r_data))
    record("data term factorization", worst <= 1e-15, f"max deviation {worst:.2e} over 1000 architectures")


def test_data_scoring_fixture(fixtures):
    schema = QualitySchema.from_dict(json.loads((fixtures / "quality_schema.json").read_text()))
    scores = score_batch(load_records(fixtures / "quality_batch.csv", schema), schema)
    r_data = data_reliability(scores).value
    ok = scores.as_tuple() == (0.99, 0.9, 0.95, 0.8) and r_data == pytest.approx(0.885, abs=1e-12)
    record("data scoring fixture", ok, f"factors {scores.as_tuple()}, equal-weight R_Data {r_data!r} (expected 0.885)")


def test_determinism(fixtures, tmp_path):
    a = run_cli("simulate", fixtures / "example_cps.json", "--seed", 42)
    b = run_cli("simulate", fixtures / "example_cps.json", "--seed", 42)
    lines = (fixtures / "demo_catalog.csv").read_text().splitlines()
    body = lines[1:]
    random.Random(1).shuffle(body)
    permuted = tmp_path / "permuted.csv"
    permuted.write_text("\n".join([lines[0], *body]) + "\n")
    sel_a = json.loads(run_cli("select", fixtures / "demo_catalog.csv", "--mission", CATALOG_MISSION, "--format", "json")[1])
    sel_b = json.loads(run_cli("select", permuted, "--mission", CATALOG_MISSION, "--format", "json")[1])
    choices_a = [s["chosen"] for s in sel_a["selections"]]
    choices_b = [s["chosen"] for s in sel_b["selections"]]
    record(
        "determinism",
        a[0] == 0 and a == b and choices_a == choices_b,
        f"simulate reports identical: {a == b}; select choices {choices_a} vs permuted {choices_b}",
    )


def test_select_eval_round_trip(fixtures, tmp_path):
    model = tmp_path / "model.json"
    code1, out1 = run_cli(
        "select", fixtures / "demo_catalog.csv", "--mission", CATALOG_MISSION,
        "--redundancy", "sensors=2,actuators=2,network=2,cc=2", "--emit-model", model, "--format", "json",
    )
    code2, out2 = run_cli("eval", model, "--format", "json")
    printed, again = json.loads(out1)["r_cps"], json.loads(out2)["r_cps"]
    record(
        "select/eval round trip",
        code1 == code2 == 0 and abs(printed - again) <= 1e-12,
        f"select R_CPS {printed!r}, eval R_CPS {again!r}",
    )
