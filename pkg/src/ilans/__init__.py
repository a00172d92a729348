"""Interleaved rANS codec toolkit.

Modules:
    ans         generic streaming coder framework (any code/decode pair)
    rans        rANS over quantized order-0 tables, byte8/word16 renorm
    interleave  N-way interleaving into a single container, raw-bit bypass
    lanes       lane-parallel decode/encode with ballot/packed semantics
    mux         coder-agnostic multiplexing of independent streams
    cli         command line front end (ilans encode/decode/verify/bench/inspect)
"""

from . import ans, backend, interleave, lanes, mux, rans
from .errors import (
    CodecError,
    FormatError,
    NotBUniqueError,
    ScheduleError,
    TrailingGarbageWarning,
    TruncatedStreamError,
    UnencodableSymbolError,
    UnsupportedVariantError,
)
from .interleave import Container, decode_interleaved, encode_interleaved
from .rans import BYTE8, WORD16, RenormVariant, SymbolTable, quantize

__version__ = "0.1.0"
