"""Protocol gates as exact permutations of basis configurations.

Each ``apply_*`` function takes an immutable :class:`QState` and returns a new
one.  Amplitudes are carried along untouched; only the packed configuration
arrays change, through the kernels selected in :mod:`qwqram._core`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _core
from ._core import kernels
from .errors import ConfigurationError, ProtocolOrderError, QRAMError, UsageError, CoherenceFaultError
from .memory import MemoryBank
from .walker import (
    BRANCH, COLOR, DEPTH, PHASE, A, AB, D, DB, InternalState, Layout, QState, SubsystemId,
)


class GateName(enum.Enum):
    U_LEVEL = "ULevel"
    SCATTER = "Scatter"
    SCATTER_INVERSE = "ScatterInverse"
    COPY_GLOBAL = "CopyGlobal"
    SWITCH_TOGGLE = "SwitchToggle"
    COPY_SWITCH = "CopySwitch"
    U_IN = "UIn"
    U_BLOCK = "UBlock"
    COPY_BACKUP = "CopyBackup"


class Direction(enum.Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"


@dataclass(frozen=True)
class GateDescriptor:
    name: GateName
    level: int | None = None
    direction: Direction | None = None
    subsystem: SubsystemId | None = None

    def __str__(self) -> str:
        args = []
        if self.level is not None:
            args.append(str(self.level))
        if self.subsystem is not None:
            args.append(self.subsystem.label)
        if self.direction is not None:
            args.append(self.direction.value)
        return f"{self.name.value}({','.join(args)})" if args else self.name.value

    def to_dict(self) -> dict:
        return {
            "name": self.name.value,
            "level": self.level,
            "direction": None if self.direction is None else self.direction.value,
            "subsystem": None if self.subsystem is None else self.subsystem.label,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GateDescriptor":
        try:
            return cls(
                GateName(doc["name"]),
                doc.get("level"),
                None if doc.get("direction") is None else Direction(doc["direction"]),
                None if doc.get("subsystem") is None else SubsystemId.parse(doc["subsystem"]),
            )
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad gate descriptor {doc!r}: {exc}") from None

    @property
    def needs_bank(self) -> bool:
        return self.name in (GateName.COPY_GLOBAL, GateName.COPY_SWITCH, GateName.COPY_BACKUP)


def U_level(d: int, direction: Direction = Direction.FORWARD) -> GateDescriptor:
    return GateDescriptor(GateName.U_LEVEL, d, direction)


SCATTER = GateDescriptor(GateName.SCATTER)
SCATTER_INVERSE = GateDescriptor(GateName.SCATTER_INVERSE)
COPY_GLOBAL = GateDescriptor(GateName.COPY_GLOBAL)
COPY_SWITCH = GateDescriptor(GateName.COPY_SWITCH)
COPY_BACKUP = GateDescriptor(GateName.COPY_BACKUP)


def U_in(d: int) -> GateDescriptor:
    return GateDescriptor(GateName.U_IN, d)


def U_block(control: SubsystemId) -> GateDescriptor:
    return GateDescriptor(GateName.U_BLOCK, subsystem=control)


def switch_toggle(trigger: SubsystemId) -> GateDescriptor:
    return GateDescriptor(GateName.SWITCH_TOGGLE, subsystem=trigger)


# --------------------------------------------------------------------------
# helpers

_STATUS_MESSAGES = {
    _core.ERR_PHASE: "walker in the wrong routing phase for {gate}",
    _core.ERR_DEPTH: "walker depth out of range for {gate}",
    _core.ERR_BLUE_INPUT: "blue walker at an input port of {gate}",
    _core.ERR_MULTI_SWITCH: "more than one memory cell switch is on in a component during {gate}",
}


def _raise_status(status: int, gate: str) -> None:
    if status == _core.OK:
        return
    msg = _STATUS_MESSAGES.get(status, "kernel failure in {gate}").format(gate=gate)
    if status == _core.ERR_MULTI_SWITCH:
        raise CoherenceFaultError(msg)
    raise ProtocolOrderError(msg)


def _idx(values: Sequence[int]) -> np.ndarray:
    return np.ascontiguousarray(values, dtype=np.int64)


def _check_level(layout: Layout, d: int) -> None:
    if not isinstance(d, (int, np.integer)) or not 1 <= d <= layout.n:
        raise UsageError(f"level {d!r} out of range 1..{layout.n}")


def _check_coincidence(walkers: np.ndarray, ctrl: int, targets: np.ndarray, active: int, gate: str) -> None:
    """Every flipped walker must sit on the control's node."""
    hit = walkers[:, ctrl, COLOR] == active
    if not hit.any() or targets.size == 0:
        return
    sub = walkers[hit]
    tgt = sub[:, targets, :]
    present = tgt[:, :, COLOR] != InternalState.EMPTY
    same = (tgt[:, :, DEPTH] == sub[:, None, ctrl, DEPTH]) & (tgt[:, :, BRANCH] == sub[:, None, ctrl, BRANCH]) \
        & (tgt[:, :, PHASE] == sub[:, None, ctrl, PHASE])
    if np.any(present & ~same):
        raise CoherenceFaultError(f"{gate}: a target walker is not on the control's node")


def _negate(state: QState, ctrl: int, targets: Sequence[int], active: InternalState, gate: str,
            check_nodes: bool) -> QState:
    t = _idx(targets)
    w = np.array(state.walkers)
    if check_nodes:
        _check_coincidence(w, ctrl, t, int(active), gate)
    kernels.controlled_negate(w, ctrl, t, int(active))
    return state.evolve(w)


# --------------------------------------------------------------------------
# level gates

def apply_U_level(state: QState, d: int, direction: Direction = Direction.FORWARD, *,
                  check_nodes: bool = False) -> QState:
    """Red A_d negates every later subsystem in injection order; an involution."""
    layout = state.layout
    _check_level(layout, d)
    ctrl = layout.index(A(d))
    return _negate(state, ctrl, range(ctrl + 1, layout.width), InternalState.RED,
                   str(U_level(d, direction)), check_nodes)


def _require_backup(layout: Layout) -> None:
    if not layout.is_backup:
        raise ConfigurationError("backup gates need the backup register layout")


def apply_U_in(state: QState, d: int, *, check_nodes: bool = False) -> QState:
    layout = state.layout
    _require_backup(layout)
    _check_level(layout, d)
    return _negate(state, layout.index(A(d)), [layout.index(AB(d))], InternalState.RED,
                   str(U_in(d)), check_nodes)


def block_targets(layout: Layout, control: SubsystemId) -> list[int]:
    if not control.is_backup:
        raise UsageError(f"block control must be a backup walker, got {control.label}")
    c = layout.index(control)
    nxt = layout.subsystems[c + 1] if c + 1 < layout.width else None
    if nxt is None:
        raise UsageError(f"no subsystem follows {control.label}")
    if nxt == D(layout.m):
        return [c + 1]
    return [c + 1, c + 2]


def apply_U_block(state: QState, control: SubsystemId, *, check_nodes: bool = False) -> QState:
    """Blue backup negates the next subsystem and its backup (only D_m at the end of the chain)."""
    layout = state.layout
    _require_backup(layout)
    targets = block_targets(layout, control)
    return _negate(state, layout.index(control), targets, InternalState.BLUE,
                   str(U_block(control)), check_nodes)


def block_controls(layout: Layout, d: int) -> list[SubsystemId]:
    """Controls of the block chain at level d, in injection order: n + m - d blocks."""
    return [AB(i) for i in range(d, layout.n + 1)] + [DB(j) for j in range(1, layout.m)]


def level_backup_gates(layout: Layout, d: int, direction: Direction) -> list[GateDescriptor]:
    _require_backup(layout)
    _check_level(layout, d)
    chain = [U_in(d)] + [U_block(c) for c in block_controls(layout, d)]
    return chain if direction is Direction.FORWARD else chain[::-1]


def apply_level_backup(state: QState, d: int, direction: Direction = Direction.FORWARD, *,
                       check_nodes: bool = False) -> QState:
    for g in level_backup_gates(state.layout, d, direction):
        state = apply_gate(state, g, check_nodes=check_nodes)
    return state


# --------------------------------------------------------------------------
# routing

def apply_S(state: QState) -> QState:
    w = np.array(state.walkers)
    _raise_status(kernels.scatter(w, state.layout.n), "Scatter")
    return state.evolve(w)


def apply_S_dagger(state: QState) -> QState:
    w = np.array(state.walkers)
    _raise_status(kernels.scatter_inverse(w, state.layout.n), "ScatterInverse")
    return state.evolve(w)


# --------------------------------------------------------------------------
# copy stage

def _check_bank(layout: Layout, bank: MemoryBank) -> None:
    if bank is None:
        raise UsageError("copy gates need a memory bank")
    if (bank.n, bank.m) != (layout.n, layout.m):
        raise ConfigurationError(f"bank is {bank.n}x{bank.m}, layout needs {layout.n}x{layout.m}")


def _data_targets(layout: Layout) -> np.ndarray:
    return _idx([layout.index(D(j)) for j in range(1, layout.m + 1)])


def apply_copy_global(state: QState, bank: MemoryBank) -> QState:
    """Red flag D0 at cell a applies the local copies of b^(a) into D1..Dm."""
    layout = state.layout
    _check_bank(layout, bank)
    if D(0) not in layout:
        raise ConfigurationError("global copy needs the flag walker D0")
    ctrls = _idx([layout.index(D(0))] * layout.m)
    w = np.array(state.walkers)
    _raise_status(kernels.controlled_copy(w, ctrls, _data_targets(layout), bank.bits, layout.n), "CopyGlobal")
    return state.evolve(w)


def apply_copy_backup(state: QState, bank: MemoryBank) -> QState:
    """~A_n controls the copy into D1 and ~D_{j-1} the copy into D_j."""
    layout = state.layout
    _require_backup(layout)
    _check_bank(layout, bank)
    ctrls = _idx([layout.index(AB(layout.n))] + [layout.index(DB(j)) for j in range(1, layout.m)])
    w = np.array(state.walkers)
    _raise_status(kernels.controlled_copy(w, ctrls, _data_targets(layout), bank.bits, layout.n), "CopyBackup")
    return state.evolve(w)


def apply_switch_toggle(state: QState, bank: MemoryBank | None, trigger: SubsystemId) -> tuple[QState, MemoryBank | None]:
    """Flip the switch of the cell where a red trigger walker sits.

    Switch states live in each component's annotation, so the bank is
    returned unchanged.
    """
    layout = state.layout
    if trigger not in layout or not layout.terminator:
        raise ConfigurationError(f"trigger {trigger.label} is not part of a switch-mode layout")
    if trigger not in (D(0), D(layout.m + 1)):
        raise UsageError(f"only D0 or D{layout.m + 1} can toggle switches, got {trigger.label}")
    w = np.array(state.walkers)
    sw = np.array(state.switches)
    _raise_status(kernels.switch_toggle(w, sw, layout.index(trigger)), str(switch_toggle(trigger)))
    return state.evolve(w, sw), bank


def apply_copy_switch(state: QState, bank: MemoryBank) -> QState:
    """Writer gate: local copies at whichever cell has its switch on."""
    layout = state.layout
    _check_bank(layout, bank)
    if not layout.terminator:
        raise ConfigurationError("the writer gate needs a switch-mode layout")
    w = np.array(state.walkers)
    _raise_status(kernels.switch_copy(w, np.ascontiguousarray(state.switches), _data_targets(layout), bank.bits),
                  "CopySwitch")
    return state.evolve(w)


# --------------------------------------------------------------------------

def apply_gate(state: QState, gate: GateDescriptor, bank: MemoryBank | None = None, *,
               check_nodes: bool = False) -> QState:
    name = gate.name
    if name is GateName.U_LEVEL:
        return apply_U_level(state, gate.level, gate.direction or Direction.FORWARD, check_nodes=check_nodes)
    if name is GateName.SCATTER:
        return apply_S(state)
    if name is GateName.SCATTER_INVERSE:
        return apply_S_dagger(state)
    if name is GateName.U_IN:
        return apply_U_in(state, gate.level, check_nodes=check_nodes)
    if name is GateName.U_BLOCK:
        return apply_U_block(state, gate.subsystem, check_nodes=check_nodes)
    if name is GateName.COPY_GLOBAL:
        return apply_copy_global(state, bank)
    if name is GateName.COPY_BACKUP:
        return apply_copy_backup(state, bank)
    if name is GateName.COPY_SWITCH:
        return apply_copy_switch(state, bank)
    if name is GateName.SWITCH_TOGGLE:
        return apply_switch_toggle(state, bank, gate.subsystem)[0]
    raise QRAMError(f"unhandled gate {gate}")  # pragma: no cover
