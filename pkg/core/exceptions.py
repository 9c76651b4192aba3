class PecError(Exception):
    "Base class for all errors raised by the compression toolkit."


class ConfigurationError(PecError, ValueError):
    "Widths, keys or parameters that do not fit together."


class ConstructionError(PecError):
    "A parity-check matrix could not be built from the requested degree sequence."


class FormatError(PecError):
    "Malformed alist, container, key or distribution file."


class DecodeFailure(PecError):
    """
    A frame could not be decoded.

    Carries the index of the failing block (chain order, 0 = IV where applicable)
    and the last hard decision the decoder produced.
    """

    def __init__(self, message: str, block_index: int | None = None, last_estimate=None):
        super().__init__(message)
        self.block_index = block_index
        self.last_estimate = last_estimate
