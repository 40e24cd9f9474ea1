"""Reference step sequences for two small worked queries.

Both use n=2, m=1, the standard variant and global copy.  Kets list the
subsystems in injection order (A1, A2, D0, D1); a primed depth marks the
return path.  Snapshots are keyed by component address.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .memory import MemoryBank
from .protocol import ProtocolConfig, Trace, run_query
from .walker import QueryTerm

LABELS = ("in", "1", "2", "3", "4", "Q", "5", "6", "7", "out")


@dataclass(frozen=True)
class GoldenCase:
    name: str
    config: ProtocolConfig
    cells: dict
    terms: tuple[QueryTerm, ...]
    snapshots: tuple[tuple[str, dict], ...]
    output: tuple[tuple[str, str, complex], ...]

    @property
    def bank(self) -> MemoryBank:
        return MemoryBank(self.config.n, self.config.m, self.cells)


def _steps(*rows: dict) -> tuple[tuple[str, dict], ...]:
    return tuple(zip(LABELS, rows))


CLASSICAL = GoldenCase(
    name="classical",
    config=ProtocolConfig(2, 1),
    cells={"00": "0", "01": "0", "10": "1", "11": "0"},
    terms=(QueryTerm("10", 1.0),),
    snapshots=_steps(
        {"10": "R@(1,1)·A1 ∅@1·A2 R@(1,1)·D0 R@(1,1)·D1"},
        {"10": "R@(1,1)·A1 ∅@1·A2 B@(1,1)·D0 B@(1,1)·D1"},
        {"10": "R@(2,1)·A1 ∅@2·A2 R@(2,2)·D0 R@(2,2)·D1"},
        {"10": "R@(2,1)·A1 ∅@2·A2 R@(2,2)·D0 R@(2,2)·D1"},
        {"10": "R@(3,1)·A1 ∅@3·A2 R@(3,3)·D0 R@(3,3)·D1"},
        {"10": "R@(3,1)·A1 ∅@3·A2 R@(3,3)·D0 R@(3,3)·D1"},
        {"10": "R@(2',1)·A1 ∅@2'·A2 R@(2',2)·D0 R@(2',2)·D1"},
        {"10": "R@(2',1)·A1 ∅@2'·A2 R@(2',2)·D0 R@(2',2)·D1"},
        {"10": "R@(1',1)·A1 ∅@1'·A2 B@(1',1)·D0 B@(1',1)·D1"},
        {"10": "R@(1',1)·A1 ∅@1'·A2 R@(1',1)·D0 R@(1',1)·D1"},
    ),
    output=(("10", "1", 1.0 + 0j),),
)

_H = 1 / math.sqrt(2)

ENTANGLED = GoldenCase(
    name="entangled",
    config=ProtocolConfig(2, 1),
    cells={"00": "1", "01": "0", "10": "0", "11": "0"},
    terms=(QueryTerm("00", _H), QueryTerm("11", _H)),
    snapshots=_steps(
        {"00": "∅@1·A1 ∅@1·A2 R@(1,1)·D0 R@(1,1)·D1",
         "11": "R@(1,1)·A1 R@(1,1)·A2 R@(1,1)·D0 R@(1,1)·D1"},
        {"00": "∅@1·A1 ∅@1·A2 R@(1,1)·D0 R@(1,1)·D1",
         "11": "R@(1,1)·A1 B@(1,1)·A2 B@(1,1)·D0 B@(1,1)·D1"},
        {"00": "∅@2·A1 ∅@2·A2 R@(2,1)·D0 R@(2,1)·D1",
         "11": "R@(2,1)·A1 R@(2,2)·A2 R@(2,2)·D0 R@(2,2)·D1"},
        {"00": "∅@2·A1 ∅@2·A2 R@(2,1)·D0 R@(2,1)·D1",
         "11": "R@(2,1)·A1 R@(2,2)·A2 B@(2,2)·D0 B@(2,2)·D1"},
        {"00": "∅@3·A1 ∅@3·A2 R@(3,1)·D0 R@(3,1)·D1",
         "11": "R@(3,1)·A1 R@(3,3)·A2 R@(3,4)·D0 R@(3,4)·D1"},
        {"00": "∅@3·A1 ∅@3·A2 R@(3,1)·D0 R@(3,1)·D1",
         "11": "R@(3,1)·A1 R@(3,3)·A2 R@(3,4)·D0 ∅@3·D1"},
        {"00": "∅@2'·A1 ∅@2'·A2 R@(2',1)·D0 R@(2',1)·D1",
         "11": "R@(2',1)·A1 R@(2',2)·A2 B@(2',2)·D0 ∅@2'·D1"},
        {"00": "∅@2'·A1 ∅@2'·A2 R@(2',1)·D0 R@(2',1)·D1",
         "11": "R@(2',1)·A1 R@(2',2)·A2 R@(2',2)·D0 ∅@2'·D1"},
        {"00": "∅@1'·A1 ∅@1'·A2 R@(1',1)·D0 R@(1',1)·D1",
         "11": "R@(1',1)·A1 B@(1',1)·A2 B@(1',1)·D0 ∅@1'·D1"},
        {"00": "∅@1'·A1 ∅@1'·A2 R@(1',1)·D0 R@(1',1)·D1",
         "11": "R@(1',1)·A1 R@(1',1)·A2 R@(1',1)·D0 ∅@1'·D1"},
    ),
    output=(("00", "1", _H + 0j), ("11", "0", _H + 0j)),
)

CASES = (CLASSICAL, ENTANGLED)


def trace_kets(trace: Trace) -> list[dict[str, str]]:
    """Per snapshot, component address -> rendered ket (components keep input order)."""
    addresses = [t.address for t in trace.terms]
    out = []
    for step in trace.steps:
        state = step.state
        out.append({addresses[k]: cfg.render() for k, cfg in enumerate(state.terms)})
    return out


def diff_case(case: GoldenCase, tol: float = 1e-12) -> list[str]:
    """Replay a case and list every mismatch; empty means exact agreement."""
    decoded, trace = run_query(case.config, case.bank, list(case.terms), snapshots="gate")
    problems = []
    kets = trace_kets(trace)
    if len(kets) != len(case.snapshots):
        problems.append(f"{case.name}: {len(kets)} snapshots, expected {len(case.snapshots)}")
    amps = {t.address: t.amplitude for t in case.terms}
    for (label, want), got, step in zip(case.snapshots, kets, trace.steps):
        if got != want:
            problems.append(f"{case.name} psi_{label}: got {got}, expected {want}")
        for k, a in enumerate(step.state.amps):
            if abs(a - amps[case.terms[k].address]) > tol:
                problems.append(f"{case.name} psi_{label}: amplitude drift in component {k}")
    got_out = [(d.address, d.message, d.amplitude) for d in decoded]
    if len(got_out) != len(case.output) or any(
            g[:2] != w[:2] or abs(g[2] - w[2]) > tol for g, w in zip(got_out, case.output)):
        problems.append(f"{case.name}: decoded {got_out}, expected {list(case.output)}")
    return problems
