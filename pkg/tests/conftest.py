import random

import pytest

from euler_gauss.lattice import CoefficientSequence, named_profile


def random_support(rng: random.Random, pairs: int, box: int = 3, name: str = "") -> CoefficientSequence:
    """Symmetric sequence on ``pairs`` random mirror pairs inside [-box, box]^2."""
    half = {}
    while len(half) < pairs:
        n = (rng.randint(-box, box), rng.randint(-box, box))
        if n == (0, 0) or (-n[0], -n[1]) in half or n in half:
            continue
        half[n] = rng.uniform(0.2, 1.5)
    entries = {}
    for n, v in half.items():
        entries[n] = v
        entries[(-n[0], -n[1])] = v
    radius = max(int((n[0] ** 2 + n[1] ** 2) ** 0.5) + 1 for n in entries)
    return CoefficientSequence(entries, radius, name=name)


@pytest.fixture(scope="session")
def lemma61():
    return named_profile("lemma61")


@pytest.fixture(scope="session")
def corpus():
    return [
        named_profile("lemma61"),
        named_profile("powerlog", 4),
        named_profile("line"),
        named_profile("circle25"),
        random_support(random.Random(20261019), 3, name="random6"),
    ]


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; asserts afterwards."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE[number] = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        print(_ACCEPTANCE[number])
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
