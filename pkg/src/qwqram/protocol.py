"""Full query orchestration: encode, route forward, copy, route back, decode."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import encodings as enc
from .errors import ConfigurationError, UsageError
from .gates import (
    COPY_BACKUP, COPY_GLOBAL, COPY_SWITCH, SCATTER, SCATTER_INVERSE, Direction, GateDescriptor,
    GateName, U_level, apply_gate, level_backup_gates, switch_toggle,
)
from .memory import MemoryBank
from .walker import (
    BRANCH, COLOR, DEPTH, A, D, DecodedTerm, InternalState, Layout, QState,
    QueryTerm, Variant, decode_output, encode_query,
)


class CopyMode(enum.Enum):
    GLOBAL = "global"
    SWITCH = "switch"
    BACKUP_CONTROLLED = "backup"


class Encoding(enum.Enum):
    BASE = "base"
    QUDIT = "qudit"
    DUAL_RAIL = "dualrail"


class Stage(enum.Enum):
    ENCODE = "encode"
    FORWARD = "forward"
    COPY = "copy"
    BACKWARD = "backward"


COMPATIBLE = {
    (Variant.STANDARD, CopyMode.GLOBAL),
    (Variant.STANDARD, CopyMode.SWITCH),
    (Variant.BACKUP, CopyMode.BACKUP_CONTROLLED),
}


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    m: int
    variant: Variant = Variant.STANDARD
    copy_mode: CopyMode = CopyMode.GLOBAL
    encoding: Encoding = Encoding.BASE

    def __post_init__(self) -> None:
        for name in ("n", "m"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {v!r}")
        if (self.variant, self.copy_mode) not in COMPATIBLE:
            raise ConfigurationError(
                f"copy mode {self.copy_mode.value!r} is incompatible with the {self.variant.value} variant")
        if self.encoding is not Encoding.BASE and self.variant is not Variant.STANDARD:
            raise ConfigurationError(f"the {self.encoding.value} encoding needs the standard variant")

    @property
    def layout(self) -> Layout:
        return Layout(self.n, self.m, self.variant, terminator=self.copy_mode is CopyMode.SWITCH)

    @property
    def n_cells(self) -> int:
        return 1 << self.n

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "variant": self.variant.value,
                "copy_mode": self.copy_mode.value, "encoding": self.encoding.value}

    @classmethod
    def from_dict(cls, doc: dict) -> "ProtocolConfig":
        try:
            return cls(doc["n"], doc["m"], Variant(doc["variant"]), CopyMode(doc["copy_mode"]),
                       Encoding(doc.get("encoding", "base")))
        except (KeyError, ValueError) as exc:
            raise ConfigurationError(f"bad protocol config {doc!r}: {exc}") from None


def standard(n: int, m: int, copy_mode: CopyMode = CopyMode.GLOBAL, encoding: Encoding = Encoding.BASE) -> ProtocolConfig:
    return ProtocolConfig(n, m, Variant.STANDARD, copy_mode, encoding)


def backup(n: int, m: int) -> ProtocolConfig:
    return ProtocolConfig(n, m, Variant.BACKUP, CopyMode.BACKUP_CONTROLLED)


@dataclass(frozen=True)
class ScheduledGate:
    stage: Stage
    level: int | None
    gate: GateDescriptor


def level_gates(config: ProtocolConfig, d: int, direction: Direction) -> list[GateDescriptor]:
    if config.variant is Variant.BACKUP:
        return level_backup_gates(config.layout, d, direction)
    return [U_level(d, direction)]


def copy_gates(config: ProtocolConfig) -> list[GateDescriptor]:
    if config.copy_mode is CopyMode.GLOBAL:
        return [COPY_GLOBAL]
    if config.copy_mode is CopyMode.SWITCH:
        return [switch_toggle(D(0)), COPY_SWITCH, switch_toggle(D(config.m + 1))]
    return [COPY_BACKUP]


def forward_schedule(config: ProtocolConfig) -> list[ScheduledGate]:
    out = []
    for d in range(1, config.n + 1):
        out += [ScheduledGate(Stage.FORWARD, d, g) for g in level_gates(config, d, Direction.FORWARD)]
        out.append(ScheduledGate(Stage.FORWARD, d, SCATTER))
    return out


def copy_schedule(config: ProtocolConfig) -> list[ScheduledGate]:
    return [ScheduledGate(Stage.COPY, None, g) for g in copy_gates(config)]


def backward_schedule(config: ProtocolConfig) -> list[ScheduledGate]:
    out = []
    for d in range(config.n, 0, -1):
        out.append(ScheduledGate(Stage.BACKWARD, d, SCATTER_INVERSE))
        out += [ScheduledGate(Stage.BACKWARD, d, g) for g in level_gates(config, d, Direction.BACKWARD)]
    return out


def schedule(config: ProtocolConfig, skip_copy: bool = False) -> list[ScheduledGate]:
    copy = [] if skip_copy else copy_schedule(config)
    return forward_schedule(config) + copy + backward_schedule(config)


# --------------------------------------------------------------------------
# traces

@dataclass
class TraceStep:
    stage: Stage
    level: int | None
    gate: GateDescriptor | None
    state: QState | None
    node_ops: int = 0

    @property
    def label(self) -> str:
        if self.stage is Stage.ENCODE:
            return "in"
        if self.stage is Stage.COPY:
            return "copy"
        return f"{self.level}'" if self.stage is Stage.BACKWARD else str(self.level)


SNAPSHOT_MODES = ("gate", "level", "none")


@dataclass
class Trace:
    """Ordered record of every gate applied during one query.

    ``steps[0]`` carries the encoded input (no gate); every later step is
    exactly one gate application.  With ``snapshots="level"`` only the last
    state of each level group is kept, with ``"none"`` only the endpoints.
    """

    config: ProtocolConfig
    bank: MemoryBank | None
    terms: list[QueryTerm]
    snapshots: str = "gate"
    steps: list[TraceStep] = field(default_factory=list)

    @property
    def gates(self) -> list[GateDescriptor]:
        return [s.gate for s in self.steps if s.gate is not None]

    @property
    def input_state(self) -> QState:
        return self.steps[0].state

    @property
    def output_state(self) -> QState:
        return self.steps[-1].state

    def snapshot_states(self) -> list[tuple[TraceStep, QState]]:
        return [(s, s.state) for s in self.steps if s.state is not None]

    def __add__(self, other: "Trace") -> "Trace":
        if other.config != self.config:
            raise UsageError("cannot concatenate traces of different configurations")
        return Trace(self.config, self.bank, self.terms, self.snapshots, self.steps + other.steps[1:])


def _node_ops(state: QState) -> int:
    """Distinct (subsystem, node) pairs occupied by present walkers."""
    w = state.walkers
    if len(state) == 0:
        return 0
    present = w[:, :, COLOR] != InternalState.EMPTY
    if isinstance(state, enc.QuditQState):
        present = np.ones_like(present)  # both rails carry a particle
    if not present.any():
        return 0
    keys = (np.arange(w.shape[1], dtype=np.int64) << 40) + w[:, :, BRANCH]
    return len(set(keys[present].tolist()))


def initial_state(config: ProtocolConfig, terms) -> QState:
    state = encode_query(terms, config.layout)
    if config.encoding is Encoding.QUDIT:
        return enc.to_qudit_state(state)
    if config.encoding is Encoding.DUAL_RAIL:
        return enc.to_dualrail_state(state)
    return state


def apply_step(config: ProtocolConfig, state: QState, gate: GateDescriptor, bank, check_nodes: bool) -> QState:
    if config.encoding is Encoding.BASE:
        return apply_gate(state, gate, bank, check_nodes=check_nodes)
    return enc.apply_gate_qudit(state, gate, bank)


def final_state(state: QState) -> QState:
    return enc.from_qudit_state(state) if isinstance(state, enc.QuditQState) else state


def execute(config: ProtocolConfig, state: QState, plan: Sequence[ScheduledGate], bank: MemoryBank | None = None,
            trace: Trace | None = None, check_nodes: bool = False) -> QState:
    keep_all = trace is not None and trace.snapshots == "gate"
    for i, item in enumerate(plan):
        node_ops = _node_ops(state) if item.gate.name in (GateName.SCATTER, GateName.SCATTER_INVERSE) else 0
        state = apply_step(config, state, item.gate, bank, check_nodes)
        if trace is not None:
            last = i == len(plan) - 1
            keep = keep_all or last
            if not keep and trace.snapshots == "level":
                nxt = plan[i + 1]
                keep = (nxt.stage, nxt.level) != (item.stage, item.level)
            trace.steps.append(TraceStep(item.stage, item.level, item.gate, state if keep else None, node_ops))
    return state


def forward_route(state: QState, config: ProtocolConfig, trace: Trace | None = None) -> QState:
    return execute(config, state, forward_schedule(config), trace=trace)


def copy_phase(state: QState, config: ProtocolConfig, bank: MemoryBank, trace: Trace | None = None) -> QState:
    _check_bank(config, bank)
    return execute(config, state, copy_schedule(config), bank, trace=trace)


def backward_route(state: QState, config: ProtocolConfig, trace: Trace | None = None) -> QState:
    return execute(config, state, backward_schedule(config), trace=trace)


def _check_bank(config: ProtocolConfig, bank: MemoryBank) -> None:
    if bank is None or (bank.n, bank.m) != (config.n, config.m):
        got = "none" if bank is None else f"{bank.n}x{bank.m}"
        raise ConfigurationError(f"bank shape {got} does not match n={config.n}, m={config.m}")


def _as_terms(terms) -> list[QueryTerm]:
    if isinstance(terms, str):
        return [QueryTerm(terms, 1.0)]
    return [t if isinstance(t, QueryTerm) else QueryTerm(t[0], complex(t[1])) for t in terms]


def run_query(config: ProtocolConfig, bank: MemoryBank, terms: Iterable[QueryTerm] | str, *,
              snapshots: str = "gate", skip_copy: bool = False,
              check_nodes: bool = False) -> tuple[list[DecodedTerm], Trace]:
    """Run one query end to end and return the decoded output with its trace.

    ``terms`` may be a single address string (unit amplitude) or a list of
    :class:`QueryTerm` / ``(address, amplitude)`` pairs.
    """
    if snapshots not in SNAPSHOT_MODES:
        raise UsageError(f"snapshot granularity must be one of {SNAPSHOT_MODES}")
    if not skip_copy:
        _check_bank(config, bank)
    terms = _as_terms(terms)
    state = initial_state(config, terms)
    trace = Trace(config, bank, terms, snapshots)
    trace.steps.append(TraceStep(Stage.ENCODE, None, None, state))
    state = execute(config, state, schedule(config, skip_copy), bank, trace, check_nodes)
    return decode_output(final_state(state)), trace


# --------------------------------------------------------------------------
# recollection

@dataclass(frozen=True)
class Dispersal:
    component: int
    address: str
    subsystem: str
    start: str
    end: str | None


@dataclass(frozen=True)
class RecollectionViolation:
    component: int
    address: str
    level: int
    subsystem: str
    strays: tuple[str, ...]


@dataclass
class RecollectionReport:
    violations: list[RecollectionViolation] = field(default_factory=list)
    dispersals: list[Dispersal] = field(default_factory=list)
    checked: int = 0

    @property
    def clean(self) -> bool:
        return not self.violations


def _strays(w: np.ndarray, layout: Layout, ctrl: int) -> np.ndarray:
    """(K, W) mask of present downstream walkers not on the control's node."""
    present = w[:, :, COLOR] != InternalState.EMPTY
    downstream = np.zeros(layout.width, dtype=bool)
    downstream[ctrl + 1:] = True
    same = (w[:, :, DEPTH] == w[:, ctrl, None, DEPTH]) & (w[:, :, BRANCH] == w[:, ctrl, None, BRANCH])
    return present & downstream[None, :] & ~same & present[:, ctrl, None]


def verify_recollection(trace: Trace) -> RecollectionReport:
    """Check that each red address walker rejoins the data train before its backward level gate.

    Needs a gate-granularity trace in the base encoding.
    """
    config = trace.config
    if config.encoding is not Encoding.BASE:
        raise UsageError("recollection is checked on base-encoded traces")
    if trace.snapshots != "gate":
        raise UsageError("recollection needs a trace with per-gate snapshots")
    layout = config.layout
    report = RecollectionReport()
    addresses = [t.address for t in trace.terms]
    steps = trace.steps
    for i, step in enumerate(steps):
        if step.stage is Stage.BACKWARD and step.gate.name is GateName.SCATTER_INVERSE:
            d = step.level
            w = step.state.walkers
            ctrl = layout.index(A(d))
            bad = _strays(w, layout, ctrl)
            report.checked += len(step.state)
            for k in np.flatnonzero(bad.any(axis=1)):
                names = tuple(layout.subsystems[j].label for j in np.flatnonzero(bad[k]))
                report.violations.append(RecollectionViolation(int(k), addresses[k], d, f"A{d}", names))

    # dispersal intervals: follow every address walker across the snapshots
    for i in range(1, layout.n + 1):
        ctrl = layout.index(A(i))
        open_at: dict[int, str] = {}
        for step in steps:
            if step.gate is None or step.gate.name not in (GateName.SCATTER, GateName.SCATTER_INVERSE):
                continue
            apart = _strays(step.state.walkers, layout, ctrl).any(axis=1)
            for k in range(len(apart)):
                if apart[k] and k not in open_at:
                    open_at[k] = step.label
                elif not apart[k] and k in open_at:
                    report.dispersals.append(Dispersal(k, addresses[k], f"A{i}", open_at.pop(k), step.label))
        for k, start in open_at.items():
            report.dispersals.append(Dispersal(k, addresses[k], f"A{i}", start, None))
    report.dispersals.sort(key=lambda x: (x.component, x.subsystem))
    return report
