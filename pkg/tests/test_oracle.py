import random

import numpy as np
import pytest
import scipy.sparse as sp

from qwqram import oracle
from qwqram.errors import SpaceLimitError, UsageError
from qwqram.gates import SCATTER
from qwqram.protocol import CopyMode, Encoding, backup, standard

from conftest import bank_from_bits

CONFIGS = {
    "global": standard(2, 1),
    "switch": standard(2, 1, CopyMode.SWITCH),
    "backup": backup(2, 1),
}


@pytest.fixture(scope="module", params=sorted(CONFIGS))
def space(request):
    return oracle.enumerate_reachable(CONFIGS[request.param])


def test_single_walker_scatter_is_eight_state_permutation():
    for inverse in (False, True):
        mat, basis = oracle.single_walker_matrix(2, 1, 3, inverse)
        assert len(basis) == 8
        assert np.array_equal(mat.T @ mat, np.eye(8))
        assert np.array_equal(mat.sum(axis=0), np.ones(8))


def test_scatter_and_inverse_are_mutual_inverses():
    _, basis = oracle.single_walker_matrix(1, 1, 2)
    for w in basis:
        if w[3] == oracle.FORWARD and w[1] == 1:
            down = oracle.scatter_walker(w, 1, 2)
            back = oracle.scatter_inverse_walker(down[:3] + (oracle.BACKWARD,), 1, 2)
            assert back[:3] == w[:3]


def test_protocol_trajectories_in_space(space):
    assert space.protocol_configs <= set(space.index)
    assert len(space) >= len(space.protocol_configs)


def test_every_gate_is_a_permutation(space):
    bank = bank_from_bits(2, 1, "1001")
    for item in oracle.gate_set(space.config):
        res = oracle.check_unitary(oracle.dense_build(item, space, bank))
        assert res.is_permutation and res.unitary and res.max_error == 0.0, res.gate


def test_composed_query(space):
    for bits in ("0000", "1111", "0110"):
        bank = bank_from_bits(2, 1, bits)
        assert oracle.check_unitary(oracle.composed_matrix(space, bank)).unitary
        assert oracle.check_query_action(space, bank) == []


def test_copy_skipped_composition_is_identity_on_inputs(space):
    bank = bank_from_bits(2, 1, "0101")
    total = oracle.composed_matrix(space, bank, skip_copy=True).tocsc()
    layout = space.config.layout
    for a in ("00", "01", "10", "11"):
        from qwqram.walker import encode_address
        j = space.index[oracle.from_basis(encode_address(a, layout), layout)]
        out = oracle.to_basis(space.configs[total[:, j].indices[0]], layout)
        assert [e.state for e in out.entries] == [e.state for e in encode_address(a, layout).entries]


def test_sparse_and_dense_agree(space):
    rng = random.Random(7)
    inputs = oracle.random_superpositions(space, 20, rng, space.banks)
    report = oracle.cross_check(space, inputs)
    assert report.ok and report.max_deviation <= 1e-12 and report.runs == 20


def test_cross_check_catches_a_wrong_engine(space):
    from qwqram.gates import apply_gate

    def broken(state, gate, bank):
        if gate == SCATTER:
            return state.evolve(np.array(state.walkers))
        return apply_gate(state, gate, bank)

    inputs = oracle.random_superpositions(space, 2, random.Random(1), space.banks)
    report = oracle.cross_check(space, inputs, apply=broken)
    assert not report.ok


def test_backup_decomposition_matches_level_gate():
    sp_ = oracle.enumerate_reachable(backup(2, 1))
    assert oracle.compare_level_decompositions(sp_) == []


def test_non_permutation_detected():
    m = sp.csr_matrix(np.array([[1.0, 1.0], [0.0, 0.0]]))
    assert not oracle.check_unitary(m).is_permutation


def test_limits():
    with pytest.raises(UsageError):
        oracle.enumerate_reachable(standard(4, 1))
    with pytest.raises(UsageError):
        oracle.enumerate_reachable(standard(2, 1, encoding=Encoding.QUDIT))
    with pytest.raises(SpaceLimitError):
        oracle.enumerate_reachable(standard(2, 1), cap=50)


def test_uniform_banks():
    banks = oracle.uniform_banks(2, 2)
    assert len(banks) == 4 and all(len(set(b.cells.values())) == 1 for b in banks)
