"""Four-level qudit and dual-rail encodings of the walker registers.

A subsystem is a pair (rail, colour): rail 1 carries the walker that the
base encoding calls present, rail 0 replaces the empty state.  Translation
from the base encoding is

    empty -> (0, R),   red -> (1, R),   blue -> (1, B)

and (0, B) appears only inside a level step.  In the packed arrays the
colour column holds a qudit code chosen so that the three base states keep
their numeric value: 0 = (0,R), 1 = (1,R), 2 = (1,B), 3 = (0,B).

Rail-0 particles occupy real tree positions.  Their branch is fixed by the
routing rules below, so translation fills it in from the address bits:

* at level i, A_i and every earlier address walker go to child 2l-1 when
  their own bit is 1 and to 2l otherwise;
* every subsystem after A_i follows the train, which goes to 2l when
  a_i = 1 and to 2l-1 otherwise.

Routing rules: (1,R) -> 2l-1, (1,B) -> 2l as (1,R), (0,R) -> 2l,
(0,B) -> 2l-1 as (0,R).  With these children the qudit engine reproduces
the base engine's routed cells.

Dual-rail is the same engine read as two parallel trees: the rail bit
names the tree, the colour steers the walker inside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import gates as base
from .errors import ConfigurationError, EncodingError, ProtocolOrderError, UsageError
from .gates import Direction, GateDescriptor, GateName
from .memory import MemoryBank
from .walker import (
    BRANCH, COLOR, DEPTH, PHASE, A, BasisConfig, Entry, InternalState, Kind, Layout, Phase,
    Position, QState, SubsystemId, Variant, pack_config,
)

Q0R, Q1R, Q1B, Q0B = 0, 1, 2, 3


class QuditState(NamedTuple):
    """One of the four basis states (rail, colour) of a subsystem."""

    rail: int
    color: InternalState

    @classmethod
    def from_code(cls, code: int) -> "QuditState":
        return _CODE_TO_QUDIT[code]

    @property
    def code(self) -> int:
        return _QUDIT_TO_CODE[self]

    def __str__(self) -> str:
        return f"{self.rail}{self.color.symbol}"


_CODE_TO_QUDIT = {
    Q0R: QuditState(0, InternalState.RED),
    Q1R: QuditState(1, InternalState.RED),
    Q1B: QuditState(1, InternalState.BLUE),
    Q0B: QuditState(0, InternalState.BLUE),
}
_QUDIT_TO_CODE = {v: k for k, v in _CODE_TO_QUDIT.items()}


def qudit_of(state: InternalState) -> QuditState:
    return _CODE_TO_QUDIT[int(state)]


def base_of(q: QuditState) -> InternalState:
    if q.code == Q0B:
        raise EncodingError("(0,B) has no base-encoding counterpart")
    return InternalState(q.code)


class QuditEntry(NamedTuple):
    sid: SubsystemId
    qudit: QuditState
    position: Position

    def render(self) -> str:
        return f"{self.qudit}@{self.position}·{self.sid.label}"


class DualRailEntry(NamedTuple):
    sid: SubsystemId
    rail: int
    color: InternalState
    position: Position

    def render(self) -> str:
        return f"{self.color.symbol}@rail{self.rail}{self.position}·{self.sid.label}"


@dataclass(frozen=True)
class QuditConfig:
    entries: tuple[QuditEntry, ...]
    switches_on: frozenset[int] = frozenset()

    def render(self) -> str:
        return " ".join(e.render() for e in self.entries)


@dataclass(frozen=True)
class DualRailConfig:
    entries: tuple[DualRailEntry, ...]
    switches_on: frozenset[int] = frozenset()

    def render(self) -> str:
        return " ".join(e.render() for e in self.entries)


# --------------------------------------------------------------------------
# array-level translation

def shadow_branches(walkers: np.ndarray, layout: Layout) -> np.ndarray:
    """Branch each subsystem would occupy on rail 0, for every component, shape (K, W)."""
    k, w = walkers.shape[:2]
    a_idx = [layout.index(A(i)) for i in range(1, layout.n + 1)]
    bits = (walkers[:, a_idx, COLOR] % 3 != 0).astype(np.int64)  # rail bit of each address subsystem
    depth = walkers[:, :, DEPTH]
    out = np.ones((k, w), dtype=np.int64)
    for col, sid in enumerate(layout.subsystems):
        own = sid.index if sid.kind is Kind.ADDRESS else None
        for i in range(1, layout.n + 1):
            active = depth[:, col] > i
            if not active.any():
                break
            if own is not None and own <= i:
                left = bits[:, own - 1] == 1
            else:
                left = bits[:, i - 1] == 0
            child = np.where(left, 2 * out[:, col] - 1, 2 * out[:, col])
            out[:, col] = np.where(active, child, out[:, col])
    return out


def _require_standard(layout: Layout) -> None:
    if layout.variant is not Variant.STANDARD:
        raise ConfigurationError("qudit and dual-rail encodings are implemented for the standard variant only")


class QuditQState(QState):
    """QState whose colour column holds qudit codes."""

    __slots__ = ()

    @property
    def terms(self) -> dict[QuditConfig, complex]:
        if self._terms is None:
            out = {}
            for k in range(len(self.amps)):
                out[_unpack_qudit(self.layout, self.walkers[k], self.switches[k])] = complex(self.amps[k])
            self._terms = out
        return self._terms

    def render(self) -> list[str]:
        return [f"{a:.6g} |{c.render()}>" for c, a in self.terms.items()]


class DualRailQState(QuditQState):
    __slots__ = ()

    @property
    def terms(self) -> dict[DualRailConfig, complex]:
        if self._terms is None:
            out = {}
            for k in range(len(self.amps)):
                q = _unpack_qudit(self.layout, self.walkers[k], self.switches[k])
                out[_qudit_to_dualrail(q)] = complex(self.amps[k])
            self._terms = out
        return self._terms


def _unpack_qudit(layout: Layout, row: np.ndarray, sw: np.ndarray) -> QuditConfig:
    entries = tuple(
        QuditEntry(sid, QuditState.from_code(c), Position(d, b, Phase(p)))
        for sid, (c, d, b, p) in zip(layout.subsystems, row.tolist())
    )
    on = frozenset(int(i) for i in np.flatnonzero(sw)) if sw.size else frozenset()
    return QuditConfig(entries, on)


def _qudit_to_dualrail(q: QuditConfig) -> DualRailConfig:
    return DualRailConfig(
        tuple(DualRailEntry(e.sid, e.qudit.rail, e.qudit.color, e.position) for e in q.entries), q.switches_on)


def _dualrail_to_qudit(c: DualRailConfig) -> QuditConfig:
    return QuditConfig(
        tuple(QuditEntry(e.sid, QuditState(e.rail, e.color), e.position) for e in c.entries), c.switches_on)


def _to_qudit_arrays(walkers: np.ndarray, layout: Layout) -> np.ndarray:
    w = np.array(walkers)
    empty = w[:, :, COLOR] == Q0R
    w[:, :, BRANCH] = np.where(empty, shadow_branches(w, layout), w[:, :, BRANCH])
    return w


def _from_qudit_arrays(walkers: np.ndarray) -> np.ndarray:
    w = np.array(walkers)
    if np.any(w[:, :, COLOR] == Q0B):
        raise EncodingError("(0,B) present at a translation boundary")
    w[:, :, BRANCH] = np.where(w[:, :, COLOR] == Q0R, 0, w[:, :, BRANCH])
    return w


def to_qudit_state(state: QState, dual_rail: bool = False) -> QuditQState:
    if isinstance(state, QuditQState):
        raise EncodingError("state is already qudit-encoded")
    _require_standard(state.layout)
    cls = DualRailQState if dual_rail else QuditQState
    return cls(state.layout, _to_qudit_arrays(state.walkers, state.layout), state.switches, state.amps)


def from_qudit_state(state: QuditQState) -> QState:
    if not isinstance(state, QuditQState):
        raise EncodingError("state is not qudit-encoded")
    return QState(state.layout, _from_qudit_arrays(state.walkers), state.switches, state.amps)


def to_dualrail_state(state: QState) -> DualRailQState:
    return to_qudit_state(state, dual_rail=True)


from_dualrail_state = from_qudit_state


# --------------------------------------------------------------------------
# configuration-level translation

def _infer_layout(entries) -> Layout:
    sids = [e.sid for e in entries]
    n = sum(1 for s in sids if s.kind is Kind.ADDRESS)
    m = max(s.index for s in sids if s.kind is Kind.DATA)
    if any(s.is_backup for s in sids):
        return Layout(n, m, Variant.BACKUP)
    return Layout(n, m, Variant.STANDARD)


def to_qudit(config: BasisConfig, layout: Layout | None = None) -> QuditConfig:
    layout = layout or _infer_layout(config.entries)
    _require_standard(layout)
    row, sw = pack_config(config, layout)
    q = _to_qudit_arrays(row[None], layout)[0]
    return _unpack_qudit(layout, q, sw)


def from_qudit(config: QuditConfig) -> BasisConfig:
    entries = []
    for e in config.entries:
        state = base_of(e.qudit)
        pos = e.position if state is not InternalState.EMPTY else Position(e.position.depth, None, e.position.phase)
        entries.append(Entry(e.sid, state, pos))
    return BasisConfig(tuple(entries), config.switches_on)


def to_dualrail(config: BasisConfig, layout: Layout | None = None) -> DualRailConfig:
    return _qudit_to_dualrail(to_qudit(config, layout))


def from_dualrail(config: DualRailConfig) -> BasisConfig:
    return from_qudit(_dualrail_to_qudit(config))


# --------------------------------------------------------------------------
# qudit gates

def apply_U_qudit(state: QuditQState, d: int, direction: Direction = Direction.FORWARD) -> QuditQState:
    """Control (1,R) flips rail-1 targets R<->B; control (0,R) flips rail-0 targets."""
    layout = state.layout
    if not 1 <= d <= layout.n:
        raise UsageError(f"level {d!r} out of range 1..{layout.n}")
    ctrl = layout.index(A(d))
    w = np.array(state.walkers)
    c = w[:, ctrl, COLOR][:, None]
    t = w[:, ctrl + 1:, COLOR]
    rail1 = (c == Q1R) & ((t == Q1R) | (t == Q1B))
    rail0 = (c == Q0R) & ((t == Q0R) | (t == Q0B))
    w[:, ctrl + 1:, COLOR] = np.where(rail1, 3 - t, np.where(rail0, 3 - t, t))
    return state.evolve(w)


def apply_S_qudit(state: QuditQState) -> QuditQState:
    n = state.layout.n
    w = np.array(state.walkers)
    if np.any(w[:, :, PHASE] != int(Phase.FORWARD)):
        raise ProtocolOrderError("qudit Scatter needs forward-phase walkers")
    depth = w[:, :, DEPTH].copy()
    if np.any(depth > n):
        raise ProtocolOrderError("qudit Scatter applied beyond the leaves")
    code = w[:, :, COLOR].copy()
    br = w[:, :, BRANCH].copy()
    odd_child = (code == Q1R) | (code == Q0B)
    w[:, :, BRANCH] = np.where(odd_child, 2 * br - 1, 2 * br)
    w[:, :, COLOR] = np.where(code == Q1B, Q1R, np.where(code == Q0B, Q0R, code))
    w[:, :, DEPTH] = depth + 1
    w[:, :, PHASE] = np.where(depth + 1 == n + 1, int(Phase.AT_CELL), int(Phase.FORWARD))
    return state.evolve(w)


def apply_S_dagger_qudit(state: QuditQState) -> QuditQState:
    w = np.array(state.walkers)
    if np.any(w[:, :, PHASE] == int(Phase.FORWARD)):
        raise ProtocolOrderError("qudit ScatterInverse needs backward-phase walkers")
    if np.any(w[:, :, DEPTH] < 2):
        raise ProtocolOrderError("qudit ScatterInverse applied above the root")
    code = w[:, :, COLOR].copy()
    if np.any((code == Q1B) | (code == Q0B)):
        raise ProtocolOrderError("blue-coloured qudit at an input port of ScatterInverse")
    br = w[:, :, BRANCH].copy()
    even = br % 2 == 0
    w[:, :, COLOR] = np.where((code == Q1R) & even, Q1B, np.where((code == Q0R) & ~even, Q0B, code))
    w[:, :, BRANCH] = (br + 1) // 2
    w[:, :, DEPTH] -= 1
    w[:, :, PHASE] = int(Phase.BACKWARD)
    return state.evolve(w)


def apply_gate_qudit(state: QuditQState, gate: GateDescriptor, bank: MemoryBank | None = None) -> QuditQState:
    """Qudit counterpart of :func:`qwqram.gates.apply_gate`.

    Copy-stage gates act through translation to the base encoding.
    """
    name = gate.name
    if name is GateName.U_LEVEL:
        return apply_U_qudit(state, gate.level, gate.direction or Direction.FORWARD)
    if name is GateName.SCATTER:
        return apply_S_qudit(state)
    if name is GateName.SCATTER_INVERSE:
        return apply_S_dagger_qudit(state)
    if name in (GateName.COPY_GLOBAL, GateName.COPY_SWITCH, GateName.SWITCH_TOGGLE):
        out = base.apply_gate(from_qudit_state(state), gate, bank)
        return to_qudit_state(out, dual_rail=isinstance(state, DualRailQState))
    raise ConfigurationError(f"{gate} has no qudit counterpart")


# --------------------------------------------------------------------------
# commutation with translation

def commutation_failures(config, bank: MemoryBank, terms, dual_rail: bool = False) -> list[str]:
    """Run base and qudit engines side by side and compare after every gate.

    A (0,B) qudit has no base counterpart, so a snapshot holding one is
    skipped; it must be resolved by the very next gate.
    """
    from .protocol import Encoding, ProtocolConfig, _as_terms, apply_step, initial_state, schedule

    terms = _as_terms(terms)

    base_cfg = ProtocolConfig(config.n, config.m, config.variant, config.copy_mode)
    q_cfg = ProtocolConfig(config.n, config.m, config.variant, config.copy_mode,
                           Encoding.DUAL_RAIL if dual_rail else Encoding.QUDIT)
    b_state = initial_state(base_cfg, terms)
    q_state = initial_state(q_cfg, terms)
    problems = []
    pending = None
    for item in schedule(base_cfg):
        b_state = apply_step(base_cfg, b_state, item.gate, bank, False)
        q_state = apply_step(q_cfg, q_state, item.gate, bank, False)
        if np.any(q_state.walkers[:, :, COLOR] == Q0B):
            if pending is not None:
                problems.append(f"(0,B) survives {pending} and {item.gate}")
            pending = item.gate
            continue
        pending = None
        want = to_qudit_state(b_state, dual_rail)
        if not (np.array_equal(want.walkers, q_state.walkers) and np.array_equal(want.switches, q_state.switches)
                and np.array_equal(want.amps, q_state.amps)):
            problems.append(f"{item.stage.value} {item.gate}: qudit state differs from translated base state")
    if pending is not None:
        problems.append(f"(0,B) left after {pending}")
    return problems
