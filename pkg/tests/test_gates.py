import numpy as np
import pytest

from qwqram.errors import CoherenceFaultError, ConfigurationError, ProtocolOrderError, UsageError
from qwqram.gates import (
    COPY_GLOBAL, SCATTER, Direction, GateDescriptor, GateName, U_block, U_in, U_level, apply_copy_global,
    apply_gate, apply_S, apply_S_dagger, apply_switch_toggle, apply_U_block, apply_U_in, apply_U_level,
    block_controls, block_targets, level_backup_gates, switch_toggle,
)
from qwqram.memory import MemoryBank
from qwqram.walker import (
    A, AB, COLOR, D, DB, BasisConfig, InternalState, Layout, Phase, QState, QueryTerm, Variant,
    encode_query, make_entry, retag,
)

R, B, E = InternalState.RED, InternalState.BLUE, InternalState.EMPTY


def single(lay, spec, depth=1, phase=Phase.FORWARD, switches=frozenset()):
    """spec: list of (state, branch) in injection order."""
    entries = tuple(make_entry(sid, st, depth, br, phase) for sid, (st, br) in zip(lay.subsystems, spec))
    return QState.from_terms(lay, [(BasisConfig(entries, switches), 1.0)])


def colors(state):
    return [InternalState(c) for c in state.walkers[0, :, COLOR]]


def test_descriptor_str_and_roundtrip():
    gates = [U_level(2, Direction.FORWARD), SCATTER, U_in(1), U_block(AB(2)), switch_toggle(D(0)), COPY_GLOBAL]
    assert str(gates[0]) == "ULevel(2,Forward)"
    assert str(gates[3]) == "UBlock(~A2)"
    for g in gates:
        assert GateDescriptor.from_dict(g.to_dict()) == g
    assert COPY_GLOBAL.needs_bank and not SCATTER.needs_bank


def test_descriptor_from_bad_dict():
    with pytest.raises(UsageError):
        GateDescriptor.from_dict({"name": "Nope"})


def test_U_level_negates_later_walkers_when_red():
    lay = Layout(2, 1)
    s = single(lay, [(R, 1), (R, 1), (R, 1), (R, 1)])
    assert colors(apply_U_level(s, 1)) == [R, B, B, B]
    assert colors(apply_U_level(s, 2)) == [R, R, B, B]


def test_U_level_identity_when_control_empty():
    lay = Layout(2, 1)
    s = single(lay, [(E, None), (R, 1), (R, 1), (R, 1)])
    assert colors(apply_U_level(s, 1)) == colors(s)


def test_U_level_is_involution():
    lay = Layout(3, 2)
    s = encode_query([QueryTerm(a, 0.5) for a in ("101", "111", "000", "010")], lay)
    for d in (1, 2, 3):
        twice = apply_U_level(apply_U_level(s, d), d)
        assert np.array_equal(twice.walkers, s.walkers)


def test_U_level_bad_level():
    s = encode_query([QueryTerm("1", 1.0)], Layout(1, 1))
    with pytest.raises(UsageError):
        apply_U_level(s, 2)


def test_scatter_routing():
    lay = Layout(2, 1)
    s = single(lay, [(R, 1), (B, 1), (E, None), (B, 1)])
    out = apply_S(s)
    cfg = next(iter(out.terms))
    assert cfg.render() == "R@(2,1)·A1 R@(2,2)·A2 ∅@2·D0 R@(2,2)·D1"


def test_scatter_inverse_mirrors():
    lay = Layout(2, 1)
    s = single(lay, [(R, 1), (R, 2), (E, None), (R, 2)], depth=2, phase=Phase.BACKWARD)
    cfg = next(iter(apply_S_dagger(s).terms))
    assert cfg.render() == "R@(1',1)·A1 B@(1',1)·A2 ∅@1'·D0 B@(1',1)·D1"


def test_scatter_then_inverse_is_identity_up_to_phase():
    lay = Layout(3, 1)
    s = single(lay, [(R, 1), (B, 1), (E, None), (R, 1), (B, 1)])
    back = apply_S_dagger(retag(apply_S(s), Phase.BACKWARD))
    assert np.array_equal(retag(back, Phase.FORWARD).walkers, s.walkers)


def test_scatter_inverse_rejects_blue_and_forward():
    lay = Layout(1, 1)
    with pytest.raises(ProtocolOrderError):
        apply_S_dagger(single(lay, [(B, 1), (R, 1), (R, 1)], depth=2, phase=Phase.BACKWARD))
    with pytest.raises(ProtocolOrderError):
        apply_S_dagger(single(lay, [(R, 1), (R, 1), (R, 1)], depth=2, phase=Phase.FORWARD))


def test_scatter_beyond_leaves():
    lay = Layout(1, 1)
    with pytest.raises(ProtocolOrderError):
        apply_S(single(lay, [(R, 1), (R, 1), (R, 1)], depth=2))


def test_global_copy_writes_zero_bits():
    lay = Layout(1, 2)
    bank = MemoryBank(1, 2, {"0": "10", "1": "01"})
    s = single(lay, [(E, None), (R, 2), (R, 2), (R, 2)], depth=2, phase=Phase.AT_CELL)
    out = apply_copy_global(s, bank)
    # branch 2 is cell "1", which holds "01": D1 is cleared, D2 stays
    assert colors(out) == [E, R, E, R]


def test_global_copy_is_involution(rng):
    lay = Layout(1, 2)
    bank = MemoryBank.random(1, 2, rng)
    s = single(lay, [(R, 1), (R, 1), (E, None), (R, 1)], depth=2, phase=Phase.AT_CELL)
    twice = apply_copy_global(apply_copy_global(s, bank), bank)
    assert np.array_equal(twice.walkers, s.walkers)


def test_copy_needs_bank_and_phase():
    lay = Layout(1, 1)
    s = single(lay, [(R, 1), (R, 1), (R, 1)])
    with pytest.raises(UsageError):
        apply_gate(s, COPY_GLOBAL, None)
    with pytest.raises(ProtocolOrderError):
        apply_copy_global(s, MemoryBank.zeros(1, 1))
    with pytest.raises(ConfigurationError):
        apply_copy_global(s, MemoryBank.zeros(2, 1))


def test_switch_toggle_and_multi_switch_fault():
    lay = Layout(1, 1, terminator=True)
    s = single(lay, [(R, 1), (R, 1), (R, 1), (R, 1)], depth=2, phase=Phase.AT_CELL)
    on, _ = apply_switch_toggle(s, None, D(0))
    assert on.switches[0].tolist() == [1, 0]
    off, _ = apply_switch_toggle(on, None, D(2))
    assert off.switches[0].tolist() == [0, 0]
    both = single(lay, [(R, 1), (R, 1), (R, 1), (R, 1)], depth=2, phase=Phase.AT_CELL, switches=frozenset({0, 1}))
    with pytest.raises(CoherenceFaultError):
        apply_gate(both, GateDescriptor(GateName.COPY_SWITCH), MemoryBank.zeros(1, 1))


def test_switch_toggle_requires_switch_layout():
    s = single(Layout(1, 1), [(R, 1), (R, 1), (R, 1)], depth=2, phase=Phase.AT_CELL)
    with pytest.raises(ConfigurationError):
        apply_switch_toggle(s, None, D(0))


def test_block_chain_structure():
    lay = Layout(3, 2, Variant.BACKUP)
    assert block_controls(lay, 1) == [AB(1), AB(2), AB(3), DB(1)]
    assert len(block_controls(lay, 2)) == 3 + 2 - 2
    assert block_targets(lay, DB(1)) == [lay.index(D(2))]
    assert block_targets(lay, AB(1)) == [lay.index(A(2)), lay.index(AB(2))]
    fwd = level_backup_gates(lay, 2, Direction.FORWARD)
    assert fwd[0] == U_in(2)
    assert level_backup_gates(lay, 2, Direction.BACKWARD) == fwd[::-1]


def test_backup_chain_reproduces_level_gate():
    """U_in plus the block chain equals U_level on states with red backups."""
    std = Layout(2, 2)
    bk = Layout(2, 2, Variant.BACKUP)
    for a1 in (R, E):
        for a2 in (R, B, E):
            spec_b = [(a1, 1 if a1 is not E else None), (R, 1), (a2, 1 if a2 is not E else None), (R, 1),
                      (R, 1), (R, 1), (R, 1)]
            s = single(bk, spec_b)
            for g in level_backup_gates(bk, 1, Direction.FORWARD):
                s = apply_gate(s, g)
            got = [c for sid, c in zip(bk.subsystems, colors(s)) if not sid.is_backup]
            spec_s = [spec_b[0], spec_b[2], (R, 1), spec_b[4], spec_b[6]]
            ref = colors(apply_U_level(single(std, spec_s), 1))
            assert got == [ref[0], ref[1], ref[3], ref[4]]


def test_U_in_and_block_need_backup_layout():
    s = encode_query([QueryTerm("1", 1.0)], Layout(1, 1))
    with pytest.raises(ConfigurationError):
        apply_U_in(s, 1)
    with pytest.raises(ConfigurationError):
        apply_U_block(s, AB(1))


def test_node_check_flags_split_train():
    lay = Layout(2, 1)
    entries = (make_entry(A(1), R, 2, 1), make_entry(A(2), R, 2, 2), make_entry(D(0), R, 2, 2),
               make_entry(D(1), R, 2, 2))
    s = QState.from_terms(lay, [(BasisConfig(entries), 1.0)])
    with pytest.raises(CoherenceFaultError):
        apply_U_level(s, 1, check_nodes=True)
    apply_U_level(s, 2, check_nodes=True)
