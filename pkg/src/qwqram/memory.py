"""Classical memory bank: 2**n cells of m bits each."""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import random as _random
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import BankFormatError, MissingCellError, ValidationError
from .walker import InternalState


def all_addresses(n: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=n)]


@dataclass(frozen=True)
class MemoryBank:
    n: int
    m: int
    cells: Mapping[str, str]
    # (2**n, m) uint8 table indexed by the integer value of the address
    bits: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _validate(self.n, self.m, self.cells)
        object.__setattr__(self, "cells", MappingProxyType(dict(sorted(self.cells.items()))))
        table = np.array([[int(ch) for ch in self.cells[a]] for a in all_addresses(self.n)], dtype=np.uint8)
        table.flags.writeable = False
        object.__setattr__(self, "bits", table)

    def __hash__(self) -> int:
        return hash((self.n, self.m, tuple(self.cells.items())))

    @classmethod
    def from_function(cls, n: int, m: int, fn) -> "MemoryBank":
        return cls(n, m, {a: fn(a) for a in all_addresses(n)})

    @classmethod
    def zeros(cls, n: int, m: int) -> "MemoryBank":
        return cls.from_function(n, m, lambda a: "0" * m)

    @classmethod
    def random(cls, n: int, m: int, rng: _random.Random) -> "MemoryBank":
        return cls.from_function(n, m, lambda a: "".join(rng.choice("01") for _ in range(m)))

    def checksum(self) -> str:
        return hashlib.sha256(store_bank(self).encode()).hexdigest()


def _validate(n, m, cells) -> None:
    for name, v in (("n", n), ("m", m)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise BankFormatError(f"{name} must be a positive integer, got {v!r}")
    if not isinstance(cells, Mapping):
        raise BankFormatError("cells must be a table of address -> bits")
    expected = all_addresses(n)
    extra = sorted(set(cells) - set(expected))
    if extra:
        raise BankFormatError(f"unexpected cell address {extra[0]!r} for n={n}")
    for a in expected:
        if a not in cells:
            raise MissingCellError(a)
        b = cells[a]
        if not isinstance(b, str) or len(b) != m or any(ch not in "01" for ch in b):
            raise BankFormatError(f"cell {a!r} must hold {m} bits, got {b!r}")


def cell_lookup(bank: MemoryBank, address: str) -> str:
    try:
        return bank.cells[address]
    except KeyError:
        raise ValidationError(f"unknown address {address!r}") from None


def memory_walker_state(bit: int | str) -> InternalState:
    """Bit 1 is a memory walker present (red); bit 0 is no walker."""
    if bit in (1, "1"):
        return InternalState.RED
    if bit in (0, "0"):
        return InternalState.EMPTY
    raise ValidationError(f"not a bit: {bit!r}")


def store_bank(bank: MemoryBank) -> str:
    doc = {"n": bank.n, "m": bank.m, "cells": dict(bank.cells)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_bank(text: str) -> MemoryBank:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BankFormatError(f"bank document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise BankFormatError("bank document must be an object")
    keys = set(doc)
    if keys != {"n", "m", "cells"}:
        missing = {"n", "m", "cells"} - keys
        raise BankFormatError(f"bank document keys must be n, m, cells "
                              f"({'missing ' + ', '.join(sorted(missing)) if missing else 'extra ' + ', '.join(sorted(keys - {'n', 'm', 'cells'}))})")
    return MemoryBank(doc["n"], doc["m"], doc["cells"])


def load_bank(source: str | os.PathLike) -> MemoryBank:
    """Load from a path, or parse directly when given the document text."""
    if isinstance(source, str) and source.lstrip().startswith("{"):
        return parse_bank(source)
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise BankFormatError(f"cannot read bank {source}: {exc.strerror}") from None
    return parse_bank(text)
