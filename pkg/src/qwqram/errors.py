"""Exception hierarchy for the simulator."""


class QRAMError(Exception):
    """Base class for every error raised by qwqram."""


class ConfigurationError(QRAMError):
    """Layout or protocol configuration is inconsistent."""


class ValidationError(QRAMError):
    """User-supplied data (query, bank, document) failed validation."""


class UsageError(QRAMError):
    """An operation was called with arguments outside its contract."""


class ProtocolOrderError(QRAMError):
    """A gate was applied to a state that is not at the matching protocol stage."""


class IncompleteProtocolError(QRAMError):
    """Decoding was attempted before every walker reached the output port."""


class CoherenceFaultError(QRAMError):
    """The output state carries a walker or ancilla in a forbidden state."""


class EncodingError(QRAMError):
    """A qudit or dual-rail configuration cannot be translated."""


class BankFormatError(ValidationError):
    """A memory bank document is malformed."""


class MissingCellError(BankFormatError):
    """A memory bank document lacks one of the 2**n cells."""

    def __init__(self, address: str):
        super().__init__(f"missing cell {address!r}")
        self.address = address


class SpaceLimitError(QRAMError):
    """Reachable-space enumeration exceeded its size cap."""
