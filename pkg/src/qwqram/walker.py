"""Walker identities, basis configurations and the sparse state container.

A basis configuration lists, for every subsystem in injection order, its
internal state (empty, red or blue) and its position on the tree.  The
quantum state is a sparse map from configurations to complex amplitudes,
stored as packed integer arrays so the gate kernels can run over all
components at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    CoherenceFaultError,
    ConfigurationError,
    IncompleteProtocolError,
    ValidationError,
)

# Column layout of the packed walker array ``walkers[k, w, :]``.
COLOR, DEPTH, BRANCH, PHASE = range(4)

NORM_TOL = 1e-12
QUERY_NORM_TOL = 1e-9
DROP_TOL = 1e-15


class InternalState(enum.IntEnum):
    EMPTY = 0
    RED = 1
    BLUE = 2

    def negate(self) -> "InternalState":
        if self is InternalState.RED:
            return InternalState.BLUE
        if self is InternalState.BLUE:
            return InternalState.RED
        return self

    @property
    def symbol(self) -> str:
        return _STATE_SYMBOLS[self]


_STATE_SYMBOLS = {InternalState.EMPTY: "∅", InternalState.RED: "R", InternalState.BLUE: "B"}


class Phase(enum.IntEnum):
    FORWARD = 0
    AT_CELL = 1
    BACKWARD = 2


class Kind(enum.Enum):
    ADDRESS = "A"
    ADDRESS_BACKUP = "~A"
    DATA = "D"
    DATA_BACKUP = "~D"


class SubsystemId(NamedTuple):
    kind: Kind
    index: int

    @property
    def label(self) -> str:
        return f"{self.kind.value}{self.index}"

    @property
    def is_backup(self) -> bool:
        return self.kind in (Kind.ADDRESS_BACKUP, Kind.DATA_BACKUP)

    @classmethod
    def parse(cls, label: str) -> "SubsystemId":
        for kind in (Kind.ADDRESS_BACKUP, Kind.DATA_BACKUP, Kind.ADDRESS, Kind.DATA):
            if label.startswith(kind.value) and label[len(kind.value):].isdigit():
                return cls(kind, int(label[len(kind.value):]))
        raise ValidationError(f"unknown subsystem label {label!r}")

    def __str__(self) -> str:
        return self.label


def A(i: int) -> SubsystemId:
    return SubsystemId(Kind.ADDRESS, i)


def AB(i: int) -> SubsystemId:
    return SubsystemId(Kind.ADDRESS_BACKUP, i)


def D(j: int) -> SubsystemId:
    return SubsystemId(Kind.DATA, j)


def DB(j: int) -> SubsystemId:
    return SubsystemId(Kind.DATA_BACKUP, j)


class Variant(enum.Enum):
    STANDARD = "standard"
    BACKUP = "backup"


@dataclass(frozen=True)
class Layout:
    """Register layout: which subsystems exist and in which order they enter the tree."""

    n: int
    m: int
    variant: Variant = Variant.STANDARD
    terminator: bool = False
    subsystems: tuple[SubsystemId, ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ConfigurationError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        backup = self.variant is Variant.BACKUP
        if backup and self.terminator:
            raise ConfigurationError("the terminator walker exists only in the standard variant")
        order: list[SubsystemId] = []
        for i in range(1, self.n + 1):
            order.append(A(i))
            if backup:
                order.append(AB(i))
        if not backup:
            order.append(D(0))
        for j in range(1, self.m + 1):
            order.append(D(j))
            if backup and j < self.m:
                order.append(DB(j))
        if self.terminator:
            order.append(D(self.m + 1))
        object.__setattr__(self, "subsystems", tuple(order))
        object.__setattr__(self, "_index", {sid: k for k, sid in enumerate(order)})

    @property
    def width(self) -> int:
        return len(self.subsystems)

    @property
    def n_cells(self) -> int:
        return 1 << self.n

    @property
    def is_backup(self) -> bool:
        return self.variant is Variant.BACKUP

    def index(self, sid: SubsystemId) -> int:
        try:
            return self._index[sid]
        except KeyError:
            raise ConfigurationError(f"subsystem {sid.label} is not part of {self}") from None

    def __contains__(self, sid: object) -> bool:
        return sid in self._index

    def ancillas(self) -> list[SubsystemId]:
        """Subsystems that must leave the protocol red: backups, flag and terminator."""
        return [
            sid for sid in self.subsystems
            if sid.is_backup or (sid.kind is Kind.DATA and (sid.index == 0 or sid.index == self.m + 1))
        ]


@dataclass(frozen=True)
class Position:
    depth: int
    branch: int | None
    phase: Phase

    def __str__(self) -> str:
        d = f"{self.depth}'" if self.phase is Phase.BACKWARD else str(self.depth)
        return d if self.branch is None else f"({d},{self.branch})"


class Entry(NamedTuple):
    sid: SubsystemId
    state: InternalState
    position: Position

    def render(self) -> str:
        return f"{self.state.symbol}@{self.position}·{self.sid.label}"


@dataclass(frozen=True)
class BasisConfig:
    """One classical configuration of every subsystem, plus the set of cells whose switch is on."""

    entries: tuple[Entry, ...]
    switches_on: frozenset[int] = frozenset()

    def __getitem__(self, sid: SubsystemId) -> Entry:
        for e in self.entries:
            if e.sid == sid:
                return e
        raise KeyError(sid)

    def render(self) -> str:
        body = " ".join(e.render() for e in self.entries)
        if self.switches_on:
            body += " | on:" + ",".join(str(c) for c in sorted(self.switches_on))
        return body

    def replace(self, sid: SubsystemId, state: InternalState | None = None,
                position: Position | None = None) -> "BasisConfig":
        out = []
        for e in self.entries:
            if e.sid == sid:
                e = Entry(sid, e.state if state is None else state,
                          e.position if position is None else position)
            out.append(e)
        return BasisConfig(tuple(out), self.switches_on)


def make_entry(sid: SubsystemId, state: InternalState, depth: int, branch: int | None,
               phase: Phase = Phase.FORWARD) -> Entry:
    if state is InternalState.EMPTY:
        branch = None
    elif branch is None:
        raise ValidationError(f"{sid.label}: a walker that is present needs a branch index")
    return Entry(sid, state, Position(depth, branch, phase))


# --------------------------------------------------------------------------
# packing

def pack_config(config: BasisConfig, layout: Layout) -> tuple[np.ndarray, np.ndarray]:
    if len(config.entries) != layout.width:
        raise ConfigurationError("configuration does not match the layout")
    row = np.zeros((layout.width, 4), dtype=np.int64)
    for k, e in enumerate(config.entries):
        if e.sid != layout.subsystems[k]:
            raise ConfigurationError(f"entry {k} is {e.sid.label}, expected {layout.subsystems[k].label}")
        row[k] = (int(e.state), e.position.depth, e.position.branch or 0, int(e.position.phase))
    sw = np.zeros(layout.n_cells if layout.terminator else 0, dtype=np.uint8)
    for c in config.switches_on:
        if not layout.terminator:
            raise ConfigurationError("switch annotations exist only in switch copy mode")
        sw[c] = 1
    return row, sw


def unpack_row(layout: Layout, row: np.ndarray, sw: np.ndarray) -> BasisConfig:
    entries = []
    for sid, (c, d, b, p) in zip(layout.subsystems, row.tolist()):
        state = InternalState(c)
        entries.append(Entry(sid, state, Position(d, None if state is InternalState.EMPTY else b, Phase(p))))
    on = frozenset(int(i) for i in np.flatnonzero(sw)) if sw.size else frozenset()
    return BasisConfig(tuple(entries), on)


class QState:
    """Sparse superposition of basis configurations.

    ``walkers`` has shape (K, W, 4) holding colour, depth, branch and phase of
    each of the W subsystems in each of the K components; ``switches`` has
    shape (K, 2**n) in switch copy mode and (K, 0) otherwise.  Instances are
    treated as immutable: the arrays are flagged read-only.
    """

    __slots__ = ("layout", "walkers", "switches", "amps", "_terms")

    def __init__(self, layout: Layout, walkers: np.ndarray, switches: np.ndarray, amps: np.ndarray):
        self.layout = layout
        self.walkers = walkers
        self.switches = switches
        self.amps = amps
        for arr in (walkers, switches, amps):
            arr.flags.writeable = False
        self._terms = None

    @classmethod
    def from_terms(cls, layout: Layout, terms: Mapping[BasisConfig, complex] | Iterable[tuple[BasisConfig, complex]],
                   check_norm: bool = True) -> "QState":
        items = list(terms.items()) if isinstance(terms, Mapping) else list(terms)
        items = [(c, complex(a)) for c, a in items if abs(a) >= DROP_TOL]
        if len({c for c, _ in items}) != len(items):
            raise ValidationError("duplicate basis configuration in state")
        k = len(items)
        walkers = np.zeros((k, layout.width, 4), dtype=np.int64)
        switches = np.zeros((k, layout.n_cells if layout.terminator else 0), dtype=np.uint8)
        amps = np.zeros(k, dtype=np.complex128)
        for i, (c, a) in enumerate(items):
            walkers[i], switches[i] = pack_config(c, layout)
            amps[i] = a
        state = cls(layout, walkers, switches, amps)
        if check_norm and abs(norm(state) - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm(state)!r} differs from 1")
        return state

    def evolve(self, walkers: np.ndarray, switches: np.ndarray | None = None) -> "QState":
        """Same amplitudes, new configurations (gates are basis permutations)."""
        return type(self)(self.layout, walkers, self.switches if switches is None else switches, self.amps)

    @property
    def terms(self) -> dict[BasisConfig, complex]:
        if self._terms is None:
            out: dict[BasisConfig, complex] = {}
            for i in range(len(self.amps)):
                cfg = unpack_row(self.layout, self.walkers[i], self.switches[i])
                if cfg in out:
                    raise AssertionError("two components collapsed onto one configuration")
                out[cfg] = complex(self.amps[i])
            self._terms = out
        return self._terms

    def __len__(self) -> int:
        return len(self.amps)

    def __iter__(self) -> Iterator[tuple[BasisConfig, complex]]:
        return iter(self.terms.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QState):
            return NotImplemented
        return self.layout == other.layout and self.terms == other.terms

    def __repr__(self) -> str:
        return f"QState({len(self)} components, {self.layout})"

    def render(self) -> list[str]:
        return [f"{a:.6g} |{c.render()}>" for c, a in sorted(self.terms.items(), key=lambda t: _sort_key(t[0]))]


def _sort_key(config: BasisConfig) -> tuple:
    return (tuple((int(e.state), e.position.depth, e.position.branch or 0, int(e.position.phase))
                  for e in config.entries), tuple(sorted(config.switches_on)))


def sorted_terms(state: QState) -> list[tuple[BasisConfig, complex]]:
    return sorted(state.terms.items(), key=lambda t: _sort_key(t[0]))


# --------------------------------------------------------------------------
# algebra

def norm(state: QState) -> float:
    return math.sqrt(float(np.sum(np.abs(state.amps) ** 2)))


def inner_product(s1: QState, s2: QState) -> complex:
    """<s1|s2>, conjugating the first argument."""
    t2 = s2.terms
    return sum((a.conjugate() * t2.get(c, 0.0) for c, a in s1.terms.items()), 0j)


def config_lookup(state: QState, config: BasisConfig) -> complex:
    return state.terms.get(config, 0j)


def retag(state: QState, phase: Phase) -> QState:
    """Relabel every walker's phase, e.g. to decode an unrouted state."""
    w = state.walkers.copy()
    w[:, :, PHASE] = int(phase)
    return state.evolve(w)


# --------------------------------------------------------------------------
# encoding / decoding

@dataclass(frozen=True)
class QueryTerm:
    address: str
    amplitude: complex = 1.0


def _check_bits(bits: str, length: int, what: str) -> None:
    if len(bits) != length:
        raise ConfigurationError(f"{what} {bits!r} has length {len(bits)}, expected {length}")
    if any(ch not in "01" for ch in bits):
        raise ValidationError(f"{what} {bits!r} is not a bit string")


def encode_address(bits: str, layout: Layout) -> BasisConfig:
    """Initial configuration at the root: address bit 1 is a red walker, 0 is no walker."""
    _check_bits(bits, layout.n, "address")
    entries = []
    for sid in layout.subsystems:
        if sid.kind is Kind.ADDRESS:
            st = InternalState.RED if bits[sid.index - 1] == "1" else InternalState.EMPTY
        else:
            st = InternalState.RED
        entries.append(make_entry(sid, st, 1, 1))
    return BasisConfig(tuple(entries))


def encode_query(terms: Sequence[QueryTerm | tuple[str, complex]], layout: Layout) -> QState:
    terms = [t if isinstance(t, QueryTerm) else QueryTerm(t[0], complex(t[1])) for t in terms]
    if not terms:
        raise ValidationError("empty query")
    seen = set()
    for t in terms:
        if t.address in seen:
            raise ValidationError(f"duplicate address {t.address!r} in query")
        seen.add(t.address)
    total = math.sqrt(sum(abs(t.amplitude) ** 2 for t in terms))
    if abs(total - 1.0) > QUERY_NORM_TOL:
        raise ValidationError(f"query is not normalized (norm {total!r})")
    for t in terms:
        _check_bits(t.address, layout.n, "address")
    terms = [t for t in terms if abs(t.amplitude) >= DROP_TOL]
    a_cols = [layout.index(A(i)) for i in range(1, layout.n + 1)]
    k = len(terms)
    walkers = np.zeros((k, layout.width, 4), dtype=np.int64)
    walkers[:, :, COLOR] = int(InternalState.RED)
    walkers[:, :, DEPTH] = 1
    walkers[:, :, BRANCH] = 1
    walkers[:, :, PHASE] = int(Phase.FORWARD)
    for row, t in enumerate(terms):
        for col, bit in zip(a_cols, t.address):
            if bit == "0":
                walkers[row, col, COLOR] = int(InternalState.EMPTY)
                walkers[row, col, BRANCH] = 0
    switches = np.zeros((k, layout.n_cells if layout.terminator else 0), dtype=np.uint8)
    amps = np.array([complex(t.amplitude) for t in terms], dtype=np.complex128)
    return QState(layout, walkers, switches, amps)


class DecodedTerm(NamedTuple):
    address: str
    message: str
    amplitude: complex


def decode_output(state: QState, layout: Layout | None = None) -> list[DecodedTerm]:
    """Read address and message bits from a state that has left the tree."""
    if layout is not None and layout != state.layout:
        raise ConfigurationError("state was built for a different layout")
    layout = state.layout
    w = state.walkers
    if len(state) == 0:
        return []
    if np.any(w[:, :, DEPTH] != 1) or np.any(w[:, :, PHASE] != int(Phase.BACKWARD)):
        raise IncompleteProtocolError("walkers have not all reached the output port (depth 1')")
    colors = w[:, :, COLOR]
    if np.any(colors == int(InternalState.BLUE)):
        raise CoherenceFaultError("blue walker at the output port")
    for sid in layout.ancillas():
        if np.any(colors[:, layout.index(sid)] != int(InternalState.RED)):
            raise CoherenceFaultError(f"ancilla {sid.label} did not return red")
    if state.switches.size and np.any(state.switches):
        raise CoherenceFaultError("a memory cell switch was left on")
    a_idx = [layout.index(A(i)) for i in range(1, layout.n + 1)]
    d_idx = [layout.index(D(j)) for j in range(1, layout.m + 1)]
    red = colors == int(InternalState.RED)
    bits = np.where(red, "1", "0")
    out = [DecodedTerm("".join(bits[k, a_idx]), "".join(bits[k, d_idx]), complex(state.amps[k]))
           for k in range(len(state))]
    out.sort(key=lambda t: t.address)
    return out
