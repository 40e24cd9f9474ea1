"""Gate, node and depth accounting for executed queries, plus full-tree footprints.

Counting convention
-------------------
* standard level gate at level d: n + m - d two-body operations, executed
  sequentially (depth n + m - d);
* backup chain: the input gate and every block count one operation and one
  unit of depth each;
* copy stage: m local copies (two-body) in parallel, depth 1; each switch
  toggle is one further operation and one unit of depth;
* scattering: one node operation per distinct (subsystem, node) pair that
  holds a walker when the gate fires.  Scattering adds no depth.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import UsageError
from .gates import GateDescriptor, GateName
from .protocol import ProtocolConfig, Trace
from .walker import Layout, Variant


@dataclass(frozen=True)
class LevelCost:
    stage: str
    level: int | None
    two_body_ops: int
    node_ops: int
    depth: int


@dataclass(frozen=True)
class ResourceLedger:
    walker_count: int = 0
    two_body_ops: int = 0
    node_ops: int = 0
    depth: int = 0
    per_level: tuple[LevelCost, ...] = ()

    def __post_init__(self) -> None:
        for name in ("walker_count", "two_body_ops", "node_ops", "depth"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def __add__(self, other: "ResourceLedger") -> "ResourceLedger":
        if not isinstance(other, ResourceLedger):
            return NotImplemented
        return ResourceLedger(
            max(self.walker_count, other.walker_count),
            self.two_body_ops + other.two_body_ops,
            self.node_ops + other.node_ops,
            self.depth + other.depth,
            self.per_level + other.per_level,
        )

    def to_dict(self) -> dict:
        return {
            "walker_count": self.walker_count,
            "two_body_ops": self.two_body_ops,
            "node_ops": self.node_ops,
            "depth": self.depth,
            "per_level": [
                {"stage": c.stage, "level": c.level, "two_body_ops": c.two_body_ops,
                 "node_ops": c.node_ops, "depth": c.depth}
                for c in self.per_level
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "level", "two_body_ops", "node_ops", "depth"])
        for c in self.per_level:
            w.writerow([c.stage, "" if c.level is None else c.level, c.two_body_ops, c.node_ops, c.depth])
        w.writerow(["total", "", self.two_body_ops, self.node_ops, self.depth])
        return buf.getvalue()


def gate_cost(gate: GateDescriptor, config: ProtocolConfig) -> tuple[int, int]:
    """(two-body operations, depth) charged for one gate application."""
    name = gate.name
    if name is GateName.U_LEVEL:
        c = config.n + config.m - gate.level
        return c, c
    if name in (GateName.U_IN, GateName.U_BLOCK, GateName.SWITCH_TOGGLE):
        return 1, 1
    if name in (GateName.COPY_GLOBAL, GateName.COPY_SWITCH, GateName.COPY_BACKUP):
        return config.m, 1
    return 0, 0


def measure(trace: Trace, config: ProtocolConfig | None = None) -> ResourceLedger:
    config = config or trace.config
    groups: list[list] = []
    for step in trace.steps:
        if step.gate is None:
            continue
        key = (step.stage.value, step.level)
        if groups and groups[-1][0] == key:
            groups[-1][1].append(step)
        else:
            groups.append([key, [step]])
    per_level = []
    for (stage, level), steps in groups:
        ops = dep = nodes = 0
        for s in steps:
            o, d = gate_cost(s.gate, config)
            ops += o
            dep += d
            nodes += s.node_ops
        per_level.append(LevelCost(stage, level, ops, nodes, dep))
    return ResourceLedger(
        config.layout.width,
        sum(c.two_body_ops for c in per_level),
        sum(c.node_ops for c in per_level),
        sum(c.depth for c in per_level),
        tuple(per_level),
    )


def chain_length(n: int, m: int, d: int, variant: Variant) -> int:
    """Two-body operations in one level gate at level d."""
    return n + m - d + (1 if variant is Variant.BACKUP else 0)


@dataclass(frozen=True)
class Footprint:
    n: int
    m: int
    variant: Variant
    two_body_gates: int
    nodes: int
    walkers: int


def hardware_footprint(n: int, m: int, variant: Variant = Variant.STANDARD) -> Footprint:
    """Level-gate hardware summed over every node of one routing direction."""
    if n < 1 or m < 1:
        raise UsageError("n and m must be positive")
    gates = sum((1 << (d - 1)) * chain_length(n, m, d, variant) for d in range(1, n + 1))
    return Footprint(n, m, variant, gates, (1 << n) - 1, Layout(n, m, variant).width)


# --------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class ScalingReport:
    ns: tuple[int, ...]
    values: tuple[float, ...]
    classification: str
    quadratic_coeffs: tuple[float, float, float]
    quadratic_residual: float
    linear_residual: float
    log2_ratios: tuple[float, ...]
    fits_quadratic: bool
    doubles: bool

    def to_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "values": list(self.values),
            "classification": self.classification,
            "quadratic_coeffs": list(self.quadratic_coeffs),
            "quadratic_residual": self.quadratic_residual,
            "linear_residual": self.linear_residual,
            "log2_ratios": list(self.log2_ratios),
            "fits_quadratic": self.fits_quadratic,
            "doubles": self.doubles,
        }


def _relative_residual(x: np.ndarray, y: np.ndarray, deg: int) -> tuple[np.ndarray, float]:
    coeffs = np.polyfit(x, y, deg)
    scale = float(np.max(np.abs(y))) or 1.0
    return coeffs, float(np.max(np.abs(np.polyval(coeffs, x) - y)) / scale)


def scaling_fit(series: Iterable[tuple[int, object]], attribute: str = "depth",
                residual_tol: float = 0.01, ratio_tol: float = 0.1) -> ScalingReport:
    """Classify growth of a series of (n, value) points.

    Values may be numbers or objects with the named attribute (ledgers,
    footprints).
    """
    pts = sorted(series, key=lambda p: p[0])
    if len(pts) < 4:
        raise UsageError(f"scaling fit needs at least 4 points, got {len(pts)}")
    ns = np.array([p[0] for p in pts], dtype=float)
    vals = np.array([float(v if isinstance(v, (int, float)) else getattr(v, attribute)) for _, v in pts])
    qc, qres = _relative_residual(ns, vals, 2)
    _, lres = _relative_residual(ns, vals, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tuple(float(math.log2(b / a)) if a > 0 and b > 0 else float("nan")
                       for a, b in zip(vals[:-1], vals[1:]))
    doubles = all(abs(r - 1.0) <= ratio_tol for r in ratios)
    spread = float(vals.max() - vals.min())
    if spread <= 1e-12 * max(1.0, float(np.abs(vals).max())):
        kind = "constant"
    elif lres < residual_tol:
        kind = "linear"
    elif doubles:
        kind = "doubling"
    elif qres < residual_tol:
        kind = "quadratic"
    else:
        kind = "unclassified"
    return ScalingReport(
        tuple(int(n) for n in ns), tuple(float(v) for v in vals), kind,
        tuple(float(c) for c in qc), qres, lres, ratios, qres < residual_tol, doubles,
    )


# --------------------------------------------------------------------------
# published reference rows (big-O only, carried as metadata)

@dataclass(frozen=True)
class ReferenceRow:
    model: str
    particles: str
    circuit_depth: str
    binary_trees: str
    two_qubit_gates_classical: str
    two_qubit_gates_superposition: str
    node_ops_classical: str
    node_ops_superposition: str


REFERENCE_SCALINGS: tuple[ReferenceRow, ...] = (
    ReferenceRow("BB", "2^n-1 qutrits, n+m qubits", "O(n^2+nm)", "1",
                 "O(n^2+nm)", "O((n+m)2^n)", "\\", "\\"),
    ReferenceRow("ASY", "n+m qubits", "O(n^2+nm)", "2(n+m)",
                 "O(n^2+nm)", "O((n+m)2^n)", "O(n^2+nm)", "O((n+m)2^n)"),
    ReferenceRow("quantum walker", "O(n+m) qubits", "O(n^2+nm)", "1",
                 "O(n^2+nm)", "O((n+m)2^n)", "O(n^2+nm)", "O((n+m)2^n)"),
)
