"""Command-line entry point: ``run``, ``verify``, ``resources`` and ``replay``.

Exit codes: 0 success, 1 invalid input or usage, 2 a verified property
failed, 3 internal fault.
"""

from __future__ import annotations

import argparse
import itertools
import random
import sys
from pathlib import Path

from . import documents as docs
from .errors import BankFormatError, ConfigurationError, QRAMError, UsageError, ValidationError
from .memory import MemoryBank, all_addresses, load_bank
from .protocol import CopyMode, Encoding, ProtocolConfig, run_query, verify_recollection
from .walker import QueryTerm, Variant

EXIT_OK, EXIT_INVALID, EXIT_PROPERTY, EXIT_INTERNAL = 0, 1, 2, 3

_INVALID = (ValidationError, ConfigurationError, UsageError, BankFormatError)


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (QRAMError, OSError) as exc:
        raise StageError(name, exc) from exc


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, _INVALID) or isinstance(exc, OSError):
        return EXIT_INVALID
    return EXIT_INTERNAL


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        docs.write_atomic(path, text)


# --------------------------------------------------------------------------
# run

def _config_from_args(args) -> ProtocolConfig:
    variant = Variant(args.variant)
    mode = args.copy_mode
    if mode is None:
        mode = "backup" if variant is Variant.BACKUP else "global"
    return ProtocolConfig(args.n, args.m, variant, CopyMode(mode), Encoding(args.encoding))


def cmd_run(args) -> int:
    bank = _stage("load bank", load_bank, args.db)
    args.n, args.m = bank.n, bank.m
    config = _stage("configure", _config_from_args, args)
    if args.address is not None:
        terms = [QueryTerm(args.address, 1.0)]
    else:
        terms = _stage("load query", docs.load_query, args.query)
    snapshots = args.snapshots if args.trace else "none"
    decoded, trace = _stage("simulate", run_query, config, bank, terms, snapshots=snapshots)
    _emit(docs.dumps(docs.output_doc(config, decoded)), args.output)
    if args.trace:
        _stage("write trace", docs.write_atomic, args.trace, docs.dumps(docs.trace_doc(trace)))
    if args.ledger:
        from .resources import measure

        ledger = measure(trace)
        text = ledger.to_csv() if args.ledger_format == "csv" else docs.dumps(ledger.to_dict())
        _stage("write ledger", docs.write_atomic, args.ledger, text)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify

class _Checklist:
    def __init__(self):
        self.results: list[tuple[str, bool, str]] = []

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.results.append((name, bool(ok), detail))
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}" + (f": {detail}" if detail else ""))

    @property
    def ok(self) -> bool:
        return all(r[1] for r in self.results)


def _verify_golden(check: _Checklist, args) -> None:
    from .golden import CASES, diff_case

    for case in CASES:
        problems = diff_case(case)
        check.add(f"golden {case.name} query", not problems, "; ".join(problems[:3]))


def _verify_unitarity(check: _Checklist, args) -> None:
    from . import oracle
    from .protocol import backup as backup_cfg, standard

    configs = [standard(args.n, args.m), standard(args.n, args.m, CopyMode.SWITCH), backup_cfg(args.n, args.m)]
    rng = random.Random(args.seed)
    for cfg in configs:
        tag = f"{cfg.variant.value}/{cfg.copy_mode.value} n={cfg.n} m={cfg.m}"
        bank = MemoryBank.random(cfg.n, cfg.m, rng)
        space = oracle.enumerate_reachable(cfg, banks=oracle.uniform_banks(cfg.n, cfg.m) + [bank])
        results = [oracle.check_unitary(oracle.dense_build(item, space, bank)) for item in oracle.gate_set(cfg)]
        bad = [r.gate for r in results if not (r.is_permutation and r.unitary)]
        check.add(f"{tag}: every gate is a permutation ({len(results)} gates, space {len(space)})", not bad,
                  ", ".join(bad))
        full = oracle.check_unitary(oracle.composed_matrix(space, bank), "full query")
        check.add(f"{tag}: composed query is unitary", full.unitary and full.is_permutation)
        wrong = oracle.check_query_action(space, bank)
        check.add(f"{tag}: composed query maps |a> to |a>|b(a)>", not wrong, ", ".join(wrong))


def _banks_for(n: int, m: int, rng: random.Random, limit: int = 4096, sample: int = 200):
    total = 1 << ((1 << n) * m)
    if total <= limit:
        for bits in itertools.product("01", repeat=(1 << n) * m):
            s = "".join(bits)
            yield MemoryBank(n, m, {a: s[i * m:(i + 1) * m] for i, a in enumerate(all_addresses(n))})
    else:
        for _ in range(sample):
            yield MemoryBank.random(n, m, rng)


def _verify_equivalence(check: _Checklist, args) -> None:
    from .protocol import backup as backup_cfg, standard

    rng = random.Random(args.seed)
    variants = [standard(args.n, args.m), standard(args.n, args.m, CopyMode.SWITCH), backup_cfg(args.n, args.m)]
    encodings = [standard(args.n, args.m, encoding=Encoding.QUDIT), standard(args.n, args.m, encoding=Encoding.DUAL_RAIL)]
    mismatches = enc_mismatch = runs = 0
    for bank in _banks_for(args.n, args.m, rng):
        for addr in all_addresses(args.n):
            runs += 1
            ref = run_query(variants[0], bank, addr, snapshots="none")[0]
            if ref[0].message != bank.cells[addr]:
                mismatches += 1
            for cfg in variants[1:]:
                if run_query(cfg, bank, addr, snapshots="none")[0] != ref:
                    mismatches += 1
            for cfg in encodings:
                if run_query(cfg, bank, addr, snapshots="none")[0] != ref:
                    enc_mismatch += 1
    check.add(f"standard/global == standard/switch == backup over {runs} (bank, address) pairs", mismatches == 0,
              f"{mismatches} mismatches" if mismatches else "")
    check.add(f"qudit and dual-rail decode like base over {runs} pairs", enc_mismatch == 0,
              f"{enc_mismatch} mismatches" if enc_mismatch else "")

    from .encodings import commutation_failures

    failures, runs = [], 0
    for bank in _banks_for(args.n, args.m, rng, limit=256, sample=20):
        for addr in all_addresses(args.n):
            for cfg in variants[:2]:
                for dual in (False, True):
                    runs += 1
                    failures += commutation_failures(cfg, bank, addr, dual)
    check.add(f"qudit gates commute with translation over {runs} runs", not failures, "; ".join(failures[:3]))


def _verify_recollection(check: _Checklist, args) -> None:
    from .protocol import backup as backup_cfg, standard

    rng = random.Random(args.seed)
    for cfg in (standard(args.n, args.m), backup_cfg(args.n, args.m)):
        violations = 0
        for _ in range(args.samples):
            bank = MemoryBank.random(cfg.n, cfg.m, rng)
            terms = random_query(cfg.n, rng)
            _, trace = run_query(cfg, bank, terms)
            violations += len(verify_recollection(trace).violations)
        check.add(f"{cfg.variant.value}: recollection over {args.samples} random queries", violations == 0,
                  f"{violations} violations" if violations else "")


def random_query(n: int, rng: random.Random, max_terms: int | None = None) -> list[QueryTerm]:
    addrs = all_addresses(n)
    k = rng.randint(1, min(len(addrs), max_terms or len(addrs)))
    chosen = rng.sample(addrs, k)
    amps = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in chosen]
    norm = sum(abs(a) ** 2 for a in amps) ** 0.5
    return [QueryTerm(a, amp / norm) for a, amp in zip(chosen, amps)]


_SCOPES = {
    "golden": _verify_golden,
    "unitarity": _verify_unitarity,
    "equivalence": _verify_equivalence,
    "recollection": _verify_recollection,
}


def cmd_verify(args) -> int:
    if args.scope in ("unitarity", "equivalence") and (args.n > 3 or args.m > 2):
        raise UsageError("oracle scopes are limited to n <= 3 and m <= 2")
    check = _Checklist()
    _SCOPES[args.scope](check, args)
    return EXIT_OK if check.ok else EXIT_PROPERTY


# --------------------------------------------------------------------------
# resources

def parse_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad range {text!r}; use N or LO..HI") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"empty or invalid range {text!r}")
    return list(range(lo, hi + 1))


def resources_report(ns: list[int], m: int, variant: Variant) -> dict:
    from .protocol import backup as backup_cfg, standard
    from .resources import REFERENCE_SCALINGS, hardware_footprint, measure, scaling_fit

    rows = []
    ledgers, prints = [], []
    for n in ns:
        cfg = backup_cfg(n, m) if variant is Variant.BACKUP else standard(n, m)
        bank = MemoryBank.zeros(n, m)
        _, trace = run_query(cfg, bank, "1" * n, snapshots="none")
        led = measure(trace)
        fp = hardware_footprint(n, m, variant)
        ledgers.append((n, led))
        prints.append((n, fp.two_body_gates))
        rows.append({"n": n, "m": m, "variant": variant.value, "walkers": led.walker_count,
                     "two_body_ops": led.two_body_ops, "node_ops": led.node_ops, "depth": led.depth,
                     "footprint_two_body_gates": fp.two_body_gates, "tree_nodes": fp.nodes})
    verdicts = {}
    if len(ns) >= 4:
        verdicts["depth"] = scaling_fit(ledgers, "depth").to_dict()
        verdicts["two_body_ops"] = scaling_fit(ledgers, "two_body_ops").to_dict()
        verdicts["footprint"] = scaling_fit(prints).to_dict()
    reference = [vars(r) for r in REFERENCE_SCALINGS]
    return {"rows": rows, "verdicts": verdicts, "reference": reference}


def report_csv(report: dict) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["n", "m", "variant", "walkers", "two_body_ops", "node_ops", "depth", "footprint_two_body_gates", "tree_nodes"]
    w.writerow(cols)
    for r in report["rows"]:
        w.writerow([r[c] for c in cols])
    if report["verdicts"]:
        w.writerow([])
        w.writerow(["series", "classification", "quadratic_residual", "log2_ratios"])
        for name, v in sorted(report["verdicts"].items()):
            w.writerow([name, v["classification"], format(v["quadratic_residual"], ".6g"),
                        " ".join(format(r, ".4f") for r in v["log2_ratios"])])
    w.writerow([])
    ref_cols = list(report["reference"][0])
    w.writerow(["reference"] + ref_cols[1:])
    for r in report["reference"]:
        w.writerow([r[c] for c in ref_cols])
    return buf.getvalue()


def cmd_resources(args) -> int:
    ns = parse_range(args.n)
    if args.m < 1:
        raise UsageError("m must be positive")
    report = resources_report(ns, args.m, Variant(args.variant))
    text = report_csv(report) if args.format == "csv" else docs.dumps(report)
    _emit(text, args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# replay

def cmd_replay(args) -> int:
    text = _stage("load trace", Path(args.trace).read_text, encoding="utf-8")
    doc = _stage("parse trace", docs.parse_trace_doc, text)
    problems = _stage("replay", docs.replay, doc)
    for p in problems:
        print(f"[FAIL] {p}")
    if problems:
        return EXIT_PROPERTY
    print(f"[PASS] {sum(1 for s in doc['steps'] if s['components'] is not None)} snapshots reproduced")
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qwqram", description="Quantum-walker qRAM simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one query against a memory bank")
    r.add_argument("--db", required=True, help="bank document (JSON)")
    q = r.add_mutually_exclusive_group(required=True)
    q.add_argument("--address", help="classical address bits, a1 first")
    q.add_argument("--query", help="query document with a superposition of addresses")
    r.add_argument("--variant", choices=[v.value for v in Variant], default="standard")
    r.add_argument("--copy-mode", choices=[c.value for c in CopyMode], default=None,
                   help="default: global for standard, backup for backup")
    r.add_argument("--encoding", choices=[e.value for e in Encoding], default="base")
    r.add_argument("--output", "-o", help="output document path (default stdout)")
    r.add_argument("--trace", help="write the step-by-step trace here")
    r.add_argument("--snapshots", choices=["gate", "level"], default="gate")
    r.add_argument("--ledger", help="write the resource ledger here")
    r.add_argument("--ledger-format", choices=["csv", "json"], default="csv")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("scope", choices=sorted(_SCOPES))
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=100, help="random queries for the recollection scope")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("resources", help="measure resource counts over a range of n")
    s.add_argument("--n", required=True, help="N or LO..HI")
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--variant", choices=[v.value for v in Variant], default="standard")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_resources)

    y = sub.add_parser("replay", help="re-apply a recorded trace and diff every snapshot")
    y.add_argument("trace")
    y.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except StageError as err:
        print(f"qwqram: {err.stage} failed: {err.exc}", file=sys.stderr)
        return _exit_code(err.exc)
    except _INVALID as exc:
        print(f"qwqram: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QRAMError as exc:
        print(f"qwqram: internal fault: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover
        print(f"qwqram: internal fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
