"""Exact simulator of the quantum-walker qRAM protocol."""

from ._core import BACKEND
from .errors import (
    BankFormatError, CoherenceFaultError, ConfigurationError, EncodingError, IncompleteProtocolError,
    MissingCellError, ProtocolOrderError, QRAMError, SpaceLimitError, UsageError, ValidationError,
)
from .memory import MemoryBank, cell_lookup, load_bank, memory_walker_state, store_bank
from .protocol import CopyMode, Encoding, ProtocolConfig, run_query, verify_recollection
from .walker import (
    InternalState, Layout, Phase, QState, QueryTerm, Variant, decode_output, encode_address,
    encode_query, inner_product, norm,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BankFormatError", "CoherenceFaultError", "ConfigurationError", "CopyMode", "Encoding",
    "EncodingError", "IncompleteProtocolError", "InternalState", "Layout", "MemoryBank", "MissingCellError",
    "Phase", "ProtocolConfig", "ProtocolOrderError", "QRAMError", "QState", "QueryTerm", "SpaceLimitError",
    "UsageError", "ValidationError", "Variant", "cell_lookup", "decode_output", "encode_address",
    "encode_query", "inner_product", "load_bank", "memory_walker_state", "norm", "run_query", "store_bank",
    "verify_recollection",
]
