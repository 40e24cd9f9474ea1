import random

import pytest

from qwqram.memory import MemoryBank, all_addresses
from qwqram.walker import QueryTerm


@pytest.fixture
def rng():
    return random.Random(12345)


def random_terms(n: int, rng: random.Random, max_terms: int | None = None) -> list[QueryTerm]:
    addrs = all_addresses(n)
    k = rng.randint(1, min(len(addrs), max_terms or len(addrs)))
    chosen = rng.sample(addrs, k)
    amps = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in chosen]
    norm = sum(abs(a) ** 2 for a in amps) ** 0.5
    return [QueryTerm(a, x / norm) for a, x in zip(chosen, amps)]


def bank_from_bits(n: int, m: int, bits: str) -> MemoryBank:
    return MemoryBank(n, m, {a: bits[i * m:(i + 1) * m] for i, a in enumerate(all_addresses(n))})


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(ok), detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
