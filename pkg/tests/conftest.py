import random
from pathlib import Path

import pytest

from cps_reliability.composition import Component, ComponentKind, KofN, Leaf, Parallel, Series, TestWindow
from cps_reliability.models import ConstantRate, PowerLaw, SrgmNhpp

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def random_model(rng: random.Random):
    """Models whose reliability over ~1000 h stays mostly inside (0.3, 1)."""
    choice = rng.randrange(3)
    if choice == 0:
        return ConstantRate(rng.uniform(0.0, 5e-4))
    if choice == 1:
        return PowerLaw(rng.uniform(0.0, 1e-4), rng.uniform(0.5, 2.0))
    return SrgmNhpp(rng.uniform(1.0, 50.0), rng.uniform(1e-4, 5e-3), rng.uniform(0.0, 3000.0))


def random_tree(rng: random.Random, max_depth: int = 4, max_leaves: int = 20):
    """Random mixed series/parallel/k-of-n tree with unique leaf ids."""
    budget = [rng.randint(1, max_leaves)]
    counter = [0]

    def make_leaf():
        counter[0] += 1
        budget[0] -= 1
        window = TestWindow(rng.uniform(0, 500)) if rng.random() < 0.2 else None
        kwargs = {"window": window} if window is not None else {}
        return Leaf(Component(f"c{counter[0]}", random_model(rng), ComponentKind.OTHER, **kwargs))

    def make(depth):
        if depth >= max_depth or budget[0] <= 1 or rng.random() < 0.3:
            return make_leaf()
        n = rng.randint(2, 4)
        children = []
        for _ in range(n):
            if budget[0] <= 0:
                break
            children.append(make(depth + 1))
        if len(children) == 1:
            return children[0]
        kind = rng.randrange(3)
        if kind == 0:
            return Series(children)
        if kind == 1:
            return Parallel(children)
        return KofN(rng.randint(1, len(children)), children)

    return make(0)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
