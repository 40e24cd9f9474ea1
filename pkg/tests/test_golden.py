import dataclasses

import pytest

from qwqram.golden import CASES, CLASSICAL, ENTANGLED, LABELS, diff_case, trace_kets
from qwqram.protocol import run_query


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_case_reproduced_exactly(case):
    assert diff_case(case) == []


def test_every_label_present():
    for case in CASES:
        assert [label for label, _ in case.snapshots] == list(LABELS)


def test_classical_ket_at_copy():
    _, trace = run_query(CLASSICAL.config, CLASSICAL.bank, list(CLASSICAL.terms))
    assert trace_kets(trace)[5] == {"10": "R@(3,1)·A1 ∅@3·A2 R@(3,3)·D0 R@(3,3)·D1"}


def test_entangled_copy_clears_only_the_zero_cell():
    q = dict(ENTANGLED.snapshots)["Q"]
    assert q["00"].endswith("R@(3,1)·D1")
    assert q["11"].endswith("∅@3·D1")


def test_diff_detects_tampering():
    label, kets = CLASSICAL.snapshots[3]
    bad = dict(kets)
    bad["10"] = bad["10"].replace("D0", "D9")
    tampered = dataclasses.replace(CLASSICAL, snapshots=CLASSICAL.snapshots[:3] + ((label, bad),)
                                   + CLASSICAL.snapshots[4:])
    problems = diff_case(tampered)
    assert len(problems) == 1 and "psi_3" in problems[0]


def test_diff_detects_wrong_output():
    tampered = dataclasses.replace(CLASSICAL, output=(("10", "0", 1.0 + 0j),))
    assert any("decoded" in p for p in diff_case(tampered))
