"""Brute-force verification backend.

Everything here is written against plain tuples and does not use the
compiled or numpy kernels, so it serves as an independent reference.

An oracle configuration is ``(walkers, switches)`` where ``walkers`` is a
tuple of ``(color, depth, branch, phase)`` per subsystem in injection order
and ``switches`` is a sorted tuple of cells whose switch is on.

The scattering gates are implemented with their full eight-term single-walker
action, including the completion terms that never fire during the protocol
but make each gate a permutation of the whole single-walker space.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import SpaceLimitError, UsageError
from .gates import Direction, GateDescriptor, GateName
from .memory import MemoryBank, all_addresses
from .protocol import Encoding, ProtocolConfig, ScheduledGate, Stage, schedule
from .walker import (
    A, AB, D, DB, BasisConfig, Layout, QState, SubsystemId, encode_address, pack_config, unpack_row,
)

EMPTY, RED, BLUE = 0, 1, 2
FORWARD, AT_CELL, BACKWARD = 0, 1, 2

Walker = tuple  # (color, depth, branch, phase)
OConfig = tuple  # (tuple[Walker, ...], tuple[int, ...])

DEFAULT_CAP = 250_000


# --------------------------------------------------------------------------
# conversion

def from_basis(config: BasisConfig, layout: Layout) -> OConfig:
    row, sw = pack_config(config, layout)
    return tuple(tuple(int(v) for v in r) for r in row), tuple(int(c) for c in np.flatnonzero(sw))


def to_basis(cfg: OConfig, layout: Layout) -> BasisConfig:
    row = np.array(cfg[0], dtype=np.int64).reshape(layout.width, 4)
    sw = np.zeros(layout.n_cells if layout.terminator else 0, dtype=np.uint8)
    for c in cfg[1]:
        sw[c] = 1
    return unpack_row(layout, row, sw)


def state_to_vector(state: QState, space: "ReachableSpace") -> np.ndarray:
    vec = np.zeros(len(space), dtype=np.complex128)
    for k in range(len(state)):
        key = (tuple(tuple(int(v) for v in r) for r in state.walkers[k]),
               tuple(int(c) for c in np.flatnonzero(state.switches[k])))
        try:
            vec[space.index[key]] = state.amps[k]
        except KeyError:
            raise UsageError(f"component {k} lies outside the enumerated space") from None
    return vec


# --------------------------------------------------------------------------
# single-walker actions

def _in_phase(depth: int, n: int, backward: bool) -> int:
    if depth == n + 1:
        return AT_CELL
    return BACKWARD if backward else FORWARD


def scatter_walker(w: Walker, d: int, n: int) -> Walker:
    """Full forward scattering at level d on one walker; identity outside its window."""
    c, dep, br, ph = w
    if ph == BACKWARD:
        return w
    if dep == d and ph == FORWARD:
        p = _in_phase(d + 1, n, False)
        if c == EMPTY:
            return (EMPTY, d + 1, 0, p)
        if c == RED:
            return (RED, d + 1, 2 * br - 1, p)
        return (RED, d + 1, 2 * br, p)
    if dep == d + 1 and ph == _in_phase(d + 1, n, False):
        if c == EMPTY:
            return (EMPTY, d, 0, FORWARD)
        parent = (br + 1) // 2
        if br % 2:  # left child 2l-1
            return (BLUE, d + 1, br + 1, ph) if c == RED else (BLUE, d, parent, FORWARD)
        return (BLUE, d + 1, br - 1, ph) if c == RED else (RED, d, parent, FORWARD)
    return w


def scatter_inverse_walker(w: Walker, d: int, n: int) -> Walker:
    """Full inverse scattering from depth d+1 to d' on one walker."""
    c, dep, br, ph = w
    top = _in_phase(d + 1, n, True)
    if dep == d + 1 and ph == top:
        if c == EMPTY:
            return (EMPTY, d, 0, BACKWARD)
        p = (br + 1) // 2
        if br % 2 == 0:
            return (BLUE, d, p, BACKWARD) if c == RED else (RED, d + 1, br - 1, ph)
        return (RED, d, p, BACKWARD) if c == RED else (RED, d + 1, br + 1, ph)
    if dep == d and ph == BACKWARD:
        if c == EMPTY:
            return (EMPTY, d + 1, 0, top)
        return (BLUE, d + 1, 2 * br, top) if c == RED else (BLUE, d + 1, 2 * br - 1, top)
    return w


def single_walker_basis(d: int, l: int, n: int, inverse: bool = False) -> list[Walker]:
    """The eight states the scattering gate mixes at node (d, l)."""
    if inverse:
        top = _in_phase(d + 1, n, True)
        return [(RED, d + 1, 2 * l, top), (RED, d + 1, 2 * l - 1, top), (EMPTY, d + 1, 0, top),
                (BLUE, d + 1, 2 * l, top), (BLUE, d + 1, 2 * l - 1, top),
                (RED, d, l, BACKWARD), (BLUE, d, l, BACKWARD), (EMPTY, d, 0, BACKWARD)]
    low = _in_phase(d + 1, n, False)
    return [(RED, d, l, FORWARD), (BLUE, d, l, FORWARD), (EMPTY, d, 0, FORWARD),
            (RED, d + 1, 2 * l - 1, low), (RED, d + 1, 2 * l, low),
            (BLUE, d + 1, 2 * l - 1, low), (BLUE, d + 1, 2 * l, low), (EMPTY, d + 1, 0, low)]


def single_walker_matrix(d: int, l: int, n: int, inverse: bool = False) -> tuple[np.ndarray, list[Walker]]:
    basis = single_walker_basis(d, l, n, inverse)
    index = {b: i for i, b in enumerate(basis)}
    fn = scatter_inverse_walker if inverse else scatter_walker
    mat = np.zeros((8, 8))
    for j, b in enumerate(basis):
        mat[index[fn(b, d, n)], j] = 1.0
    return mat, basis


def permutation_order(mat: np.ndarray) -> int:
    perm = np.argmax(mat, axis=0)
    seen, order = set(), 1
    for start in range(len(perm)):
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = perm[x]
            length += 1
        order = np.lcm(order, length)
    return int(order)


# --------------------------------------------------------------------------
# reference gates on whole configurations

def _negate(ws: list, ctrl: int, targets: Iterable[int], active: int) -> None:
    if ws[ctrl][0] != active:
        return
    for t in targets:
        c, d, b, p = ws[t]
        if c != EMPTY:
            ws[t] = (3 - c, d, b, p)


def _local_copy(ws: list, t: int, cell: int, bit: int, n: int) -> None:
    if bit:
        return
    c, d, b, p = ws[t]
    if p != AT_CELL:
        return
    if c == RED and b == cell + 1:
        ws[t] = (EMPTY, d, 0, p)
    elif c == EMPTY:
        ws[t] = (RED, d, cell + 1, p)


class ReferenceEngine:
    """Tuple-level implementation of every protocol gate."""

    def __init__(self, layout: Layout):
        self.layout = layout
        self.n = layout.n
        self.m = layout.m

    def _i(self, sid: SubsystemId) -> int:
        return self.layout.index(sid)

    def in_phase(self, cfg: OConfig, gate: GateDescriptor, level: int | None, stage: Stage | None) -> bool:
        """Whether the gate's phase precondition holds; out of phase it acts as the identity."""
        ws, n, name = cfg[0], self.n, gate.name
        if name in (GateName.U_LEVEL, GateName.U_IN, GateName.U_BLOCK):
            if name is GateName.U_LEVEL:
                backward = gate.direction is Direction.BACKWARD
            else:
                backward = stage is Stage.BACKWARD
            d = gate.level if level is None else level
            want = BACKWARD if backward else FORWARD
            return all(w[1] == d and w[3] == want for w in ws)
        if name is GateName.SCATTER:
            low = _in_phase(level + 1, n, False)
            return all((w[1] == level and w[3] == FORWARD) or (w[1] == level + 1 and w[3] == low) for w in ws)
        if name is GateName.SCATTER_INVERSE:
            top = _in_phase(level + 1, n, True)
            return all((w[1] == level + 1 and w[3] == top) or (w[1] == level and w[3] == BACKWARD) for w in ws)
        return all(w[3] == AT_CELL for w in ws)

    def apply(self, cfg: OConfig, gate: GateDescriptor, level: int | None, bank: MemoryBank | None,
              stage: Stage | None = None) -> OConfig:
        if not self.in_phase(cfg, gate, level, stage):
            return cfg
        ws, sw = list(cfg[0]), cfg[1]
        name, lay, n = gate.name, self.layout, self.n
        if name is GateName.U_LEVEL:
            c = self._i(A(gate.level))
            _negate(ws, c, range(c + 1, lay.width), RED)
        elif name is GateName.U_IN:
            _negate(ws, self._i(A(gate.level)), [self._i(AB(gate.level))], RED)
        elif name is GateName.U_BLOCK:
            c = self._i(gate.subsystem)
            targets = [c + 1] if lay.subsystems[c + 1] == D(self.m) else [c + 1, c + 2]
            _negate(ws, c, targets, BLUE)
        elif name is GateName.SCATTER:
            ws = [scatter_walker(w, level, n) for w in ws]
        elif name is GateName.SCATTER_INVERSE:
            ws = [scatter_inverse_walker(w, level, n) for w in ws]
        elif name is GateName.COPY_GLOBAL:
            self._controlled_copy(ws, [self._i(D(0))] * self.m, bank)
        elif name is GateName.COPY_BACKUP:
            ctrls = [self._i(AB(n))] + [self._i(DB(j)) for j in range(1, self.m)]
            self._controlled_copy(ws, ctrls, bank)
        elif name is GateName.SWITCH_TOGGLE:
            c, _, b, p = ws[self._i(gate.subsystem)]
            if c == RED and p == AT_CELL:
                sw = tuple(sorted(set(sw) ^ {b - 1}))
        elif name is GateName.COPY_SWITCH:
            if len(sw) == 1:
                cell = sw[0]
                for j in range(1, self.m + 1):
                    _local_copy(ws, self._i(D(j)), cell, int(bank.bits[cell, j - 1]), n)
        else:  # pragma: no cover
            raise UsageError(f"no reference action for {gate}")
        return tuple(ws), sw

    def _controlled_copy(self, ws: list, ctrls: Sequence[int], bank: MemoryBank) -> None:
        for j, c in enumerate(ctrls, start=1):
            col, _, b, p = ws[c]
            if col == RED and p == AT_CELL:
                cell = b - 1
                _local_copy(ws, self._i(D(j)), cell, int(bank.bits[cell, j - 1]), self.n)


# --------------------------------------------------------------------------
# reachable space

def uniform_banks(n: int, m: int) -> list[MemoryBank]:
    """One bank per m-bit pattern, every cell holding that pattern."""
    return [MemoryBank.from_function(n, m, lambda a, p="".join(bits): p)
            for bits in itertools.product("01", repeat=m)]


@dataclass
class ReachableSpace:
    config: ProtocolConfig
    banks: list[MemoryBank]
    configs: list[OConfig] = field(default_factory=list)
    index: dict = field(default_factory=dict)
    protocol_configs: set = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.configs)

    def add(self, cfg: OConfig) -> bool:
        if cfg in self.index:
            return False
        self.index[cfg] = len(self.configs)
        self.configs.append(cfg)
        return True

    def __contains__(self, item) -> bool:
        if isinstance(item, BasisConfig):
            item = from_basis(item, self.config.layout)
        return item in self.index


def gate_set(config: ProtocolConfig) -> list[ScheduledGate]:
    """Distinct scheduled gates of the protocol (copy gates included)."""
    out, seen = [], set()
    for item in schedule(config):
        key = (item.gate, item.level, item.stage)
        if key not in seen:
            seen.add(key)
            out.append(item)
    return out


def enumerate_reachable(config: ProtocolConfig, banks: Sequence[MemoryBank] | None = None,
                        cap: int = DEFAULT_CAP) -> ReachableSpace:
    """Breadth-first closure from every classical input under all protocol gates."""
    if config.encoding is not Encoding.BASE:
        raise UsageError("the dense oracle works in the base encoding")
    if config.n > 3 or config.m > 2:
        raise UsageError("the dense oracle is limited to n <= 3 and m <= 2")
    layout = config.layout
    banks = list(banks) if banks is not None else uniform_banks(config.n, config.m)
    eng = ReferenceEngine(layout)
    space = ReachableSpace(config, banks)
    plan = schedule(config)

    # protocol trajectories first, so they get low indices
    for addr in all_addresses(config.n):
        start = from_basis(encode_address(addr, layout), layout)
        for bank in banks:
            cur = start
            space.add(cur)
            space.protocol_configs.add(cur)
            for item in plan:
                cur = eng.apply(cur, item.gate, item.level, bank, item.stage)
                space.add(cur)
                space.protocol_configs.add(cur)

    gates = gate_set(config)
    frontier = list(space.configs)
    while frontier:
        nxt = []
        for cfg in frontier:
            for item in gates:
                for bank in (banks if item.gate.needs_bank else banks[:1]):
                    out = eng.apply(cfg, item.gate, item.level, bank, item.stage)
                    if space.add(out):
                        nxt.append(out)
                        if len(space) > cap:
                            raise SpaceLimitError(f"reachable space exceeds {cap} configurations")
        frontier = nxt
    return space


# --------------------------------------------------------------------------
# dense matrices

@dataclass
class DenseGate:
    gate: GateDescriptor
    level: int | None
    matrix: sp.csr_matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def dense_build(item: ScheduledGate | GateDescriptor, space: ReachableSpace,
                bank: MemoryBank | None = None, level: int | None = None) -> DenseGate:
    if isinstance(item, ScheduledGate):
        gate, level, stage = item.gate, item.level, item.stage
    else:
        gate, stage = item, None
        if gate.name in (GateName.U_IN, GateName.U_BLOCK):
            raise UsageError(f"{gate} needs its schedule entry (level and stage) for a dense build")
    if gate.needs_bank and bank is None:
        bank = space.banks[0]
    eng = ReferenceEngine(space.config.layout)
    size = len(space)
    rows = np.empty(size, dtype=np.int64)
    for j, cfg in enumerate(space.configs):
        out = eng.apply(cfg, gate, level, bank, stage)
        try:
            rows[j] = space.index[out]
        except KeyError:
            raise SpaceLimitError(f"{gate} leaves the enumerated space") from None
    mat = sp.csr_matrix((np.ones(size, dtype=np.complex128), (rows, np.arange(size))), shape=(size, size))
    return DenseGate(gate, level, mat)


@dataclass(frozen=True)
class UnitarityResult:
    gate: str
    is_permutation: bool
    unitary: bool
    max_error: float


def check_unitary(dense: DenseGate | sp.spmatrix, name: str | None = None) -> UnitarityResult:
    mat = dense.matrix if isinstance(dense, DenseGate) else dense
    label = name or (str(dense.gate) if isinstance(dense, DenseGate) else "matrix")
    rows, cols = mat.shape
    if rows != cols:
        return UnitarityResult(label, False, False, float("inf"))
    m = sp.csr_matrix(mat)
    m.eliminate_zeros()
    entries_ok = bool(np.all(m.data == 1.0))
    per_row = np.diff(m.indptr)
    per_col = np.bincount(m.indices, minlength=cols)
    is_perm = entries_ok and bool(np.all(per_row == 1) and np.all(per_col == 1))
    gram = (m.conj().T @ m - sp.identity(rows, dtype=np.complex128, format="csr")).tocsr()
    gram.eliminate_zeros()
    err = float(np.abs(gram.data).max()) if gram.nnz else 0.0
    return UnitarityResult(label, is_perm, err <= 1e-12, err)


def composed_matrix(space: ReachableSpace, bank: MemoryBank, skip_copy: bool = False) -> sp.csr_matrix:
    total = sp.identity(len(space), dtype=np.complex128, format="csr")
    for item in schedule(space.config, skip_copy):
        total = dense_build(item, space, bank).matrix @ total
    return total.tocsr()


def expected_output(address: str, bank: MemoryBank, layout: Layout) -> OConfig:
    """Configuration the full query must produce for a classical address."""
    message = bank.cells[address]
    ws = []
    for sid in layout.subsystems:
        if sid.kind.value == "A":
            on = address[sid.index - 1] == "1"
        elif sid.kind.value == "D" and 1 <= sid.index <= layout.m:
            on = message[sid.index - 1] == "1"
        else:
            on = True
        ws.append((RED, 1, 1, BACKWARD) if on else (EMPTY, 1, 0, BACKWARD))
    return tuple(ws), ()


def check_query_action(space: ReachableSpace, bank: MemoryBank) -> list[str]:
    """Columns of the composed query matrix for encoded inputs; returns addresses that misbehave."""
    layout = space.config.layout
    total = composed_matrix(space, bank).tocsc()
    bad = []
    for addr in all_addresses(space.config.n):
        j = space.index[from_basis(encode_address(addr, layout), layout)]
        col = total[:, j]
        want = space.index.get(expected_output(addr, bank, layout))
        if want is None or col.nnz != 1 or col.indices[0] != want or col.data[0] != 1:
            bad.append(addr)
    return bad


# --------------------------------------------------------------------------
# sparse vs dense

@dataclass
class CrossCheckReport:
    max_deviation: float = 0.0
    runs: int = 0
    first_divergence: tuple[int, int, str] | None = None  # (run, step, gate)

    @property
    def ok(self) -> bool:
        return self.first_divergence is None


def cross_check(space: ReachableSpace, inputs: Iterable[tuple[QState, MemoryBank]],
                plan: Sequence[ScheduledGate] | None = None, tol: float = 1e-12,
                apply: Callable | None = None) -> CrossCheckReport:
    """Run each gate of ``plan`` through the sparse engine and the dense matrices side by side."""
    from .gates import apply_gate

    apply = apply or apply_gate
    plan = list(schedule(space.config)) if plan is None else list(plan)
    report = CrossCheckReport()
    cache: dict = {}
    for run, (state, bank) in enumerate(inputs):
        report.runs += 1
        vec = state_to_vector(state, space)
        for step, item in enumerate(plan):
            key = (item.gate, item.level, item.stage, bank if item.gate.needs_bank else None)
            if key not in cache:
                cache[key] = dense_build(item, space, bank).matrix
            vec = cache[key] @ vec
            state = apply(state, item.gate, bank)
            try:
                dev = float(np.max(np.abs(state_to_vector(state, space) - vec), initial=0.0))
            except UsageError:
                dev = float("inf")
            report.max_deviation = max(report.max_deviation, dev)
            if dev > tol:
                if report.first_divergence is None:
                    report.first_divergence = (run, step, str(item.gate))
                break  # later gates would act on a wrong state
    return report


def random_superpositions(space: ReachableSpace, count: int, rng: random.Random,
                          bank_choices: Sequence[MemoryBank] | None = None) -> list[tuple[QState, MemoryBank]]:
    """Random normalised superpositions over the encoded classical inputs, each with a random bank."""
    layout = space.config.layout
    addrs = all_addresses(space.config.n)
    out = []
    for _ in range(count):
        k = rng.randint(1, len(addrs))
        chosen = rng.sample(addrs, k)
        amps = np.array([complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in chosen])
        amps /= np.linalg.norm(amps)
        state = QState.from_terms(layout, [(encode_address(a, layout), amp) for a, amp in zip(chosen, amps)])
        bank = rng.choice(bank_choices) if bank_choices else MemoryBank.random(layout.n, layout.m, rng)
        out.append((state, bank))
    return out


# --------------------------------------------------------------------------
# level decomposition

def compare_level_decompositions(space: ReachableSpace) -> list[tuple[int, str]]:
    """Backup chain against the many-body level gate on every member of a backup space.

    Only members whose backups are all red and whose walkers sit at one
    depth in one phase are compared (the states the chain is built for).
    Returns (level, rendered config) pairs that disagree.
    """
    layout = space.config.layout
    if not layout.is_backup:
        raise UsageError("needs a backup-variant space")
    from .gates import level_backup_gates, U_level

    eng = ReferenceEngine(layout)
    backups = [i for i, s in enumerate(layout.subsystems) if s.is_backup]
    bad = []
    for cfg in space.configs:
        ws = cfg[0]
        depths = {w[1] for w in ws}
        phases = {w[3] for w in ws}
        if len(depths) != 1 or len(phases) != 1:
            continue
        d = depths.pop()
        ph = phases.pop()
        if d > layout.n or ph == AT_CELL:
            continue
        direction = Direction.FORWARD if ph == FORWARD else Direction.BACKWARD
        stage = Stage.FORWARD if direction is Direction.FORWARD else Stage.BACKWARD
        want = eng.apply(cfg, U_level(d, direction), d, None, stage)
        # forward chains start from red backups; backward chains end on them
        anchor = cfg if direction is Direction.FORWARD else want
        if any(anchor[0][i][0] != RED for i in backups):
            continue
        got = cfg
        for g in level_backup_gates(layout, d, direction):
            got = eng.apply(got, g, d, None, stage)
        if got != want:
            bad.append((d, to_basis(cfg, layout).render()))
    return bad
