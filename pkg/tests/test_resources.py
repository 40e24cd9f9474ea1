import math

import pytest

from qwqram.errors import UsageError
from qwqram.gates import SCATTER, U_block, U_in, U_level
from qwqram.memory import MemoryBank
from qwqram.protocol import CopyMode, backup, run_query, standard
from qwqram.resources import (
    REFERENCE_SCALINGS, ResourceLedger, gate_cost, hardware_footprint, measure, scaling_fit,
)
from qwqram.walker import AB, QueryTerm, Variant


def ledger(cfg, address):
    return measure(run_query(cfg, MemoryBank.zeros(cfg.n, cfg.m), address, snapshots="none")[1])


def test_gate_costs():
    cfg = standard(4, 2)
    assert gate_cost(U_level(1), cfg) == (5, 5)
    assert gate_cost(U_level(4), cfg) == (2, 2)
    assert gate_cost(U_in(1), cfg) == (1, 1)
    assert gate_cost(U_block(AB(2)), cfg) == (1, 1)
    assert gate_cost(SCATTER, cfg) == (0, 0)


def test_classical_counts_small():
    led = ledger(standard(2, 1), "10")
    assert (led.walker_count, led.two_body_ops, led.depth) == (4, 7, 7)
    assert [(c.stage, c.level) for c in led.per_level] == [
        ("forward", 1), ("forward", 2), ("copy", None), ("backward", 2), ("backward", 1)]


def test_depth_closed_form_standard():
    for n in range(1, 7):
        for m in (1, 2, 3):
            led = ledger(standard(n, m), "1" * n)
            assert led.depth == 2 * sum(n + m - d for d in range(1, n + 1)) + 1


def test_switch_mode_adds_two_toggles():
    a = ledger(standard(3, 2), "101")
    b = ledger(standard(3, 2, CopyMode.SWITCH), "101")
    assert b.depth == a.depth + 2 and b.two_body_ops == a.two_body_ops + 2


def test_backup_walker_count():
    for n in range(1, 8):
        for m in range(1, 5):
            assert ledger(backup(n, m), "0" * n).walker_count == 2 * (n + m) - 1


def test_node_ops_grow_with_superposition():
    cfg = standard(3, 1)
    bank = MemoryBank.zeros(3, 1)
    one = measure(run_query(cfg, bank, "000", snapshots="none")[1]).node_ops
    terms = [QueryTerm(a, 0.5) for a in ("000", "011", "101", "110")]
    many = measure(run_query(cfg, bank, terms, snapshots="none")[1]).node_ops
    assert many > one > 0


def test_ledger_add_and_serialise():
    a = ledger(standard(2, 1), "00")
    b = ledger(standard(2, 1), "11")
    s = a + b
    assert s.depth == a.depth + b.depth and s.walker_count == 4
    doc = s.to_dict()
    assert doc["two_body_ops"] == a.two_body_ops + b.two_body_ops
    csv_text = a.to_csv()
    assert csv_text.splitlines()[0] == "stage,level,two_body_ops,node_ops,depth"
    assert csv_text.splitlines()[-1].startswith("total,,")
    with pytest.raises(ValueError):
        ResourceLedger(depth=-1)


def test_footprint_formula():
    fp = hardware_footprint(3, 2)
    assert fp.two_body_gates == 1 * 4 + 2 * 3 + 4 * 2
    assert fp.nodes == 7 and fp.walkers == 6
    assert hardware_footprint(3, 2, Variant.BACKUP).two_body_gates == 1 * 5 + 2 * 4 + 4 * 3
    with pytest.raises(UsageError):
        hardware_footprint(0, 1)


def test_scaling_fit_classes():
    ns = [2, 3, 4, 5, 6]
    assert scaling_fit([(n, 7) for n in ns]).classification == "constant"
    assert scaling_fit([(n, 3 * n + 1) for n in ns]).classification == "linear"
    assert scaling_fit([(n, n * n + 2 * n) for n in ns]).classification == "quadratic"
    assert scaling_fit([(n, 2 ** n) for n in ns]).classification == "doubling"
    assert scaling_fit([(n, math.factorial(n)) for n in ns]).classification == "unclassified"
    with pytest.raises(UsageError):
        scaling_fit([(1, 1), (2, 2)])


def test_scaling_fit_reads_attribute():
    series = [(n, ledger(standard(n, 1), "1" * n)) for n in range(2, 7)]
    rep = scaling_fit(series, "depth")
    assert rep.fits_quadratic and rep.to_dict()["classification"] == "quadratic"


def test_reference_rows():
    assert [r.model for r in REFERENCE_SCALINGS] == ["BB", "ASY", "quantum walker"]
    assert all(r.circuit_depth == "O(n^2+nm)" for r in REFERENCE_SCALINGS)
