"""N-way interleaved coding into a single digit stream, plus the container.

N lane states share one payload: symbol i belongs to lane i mod N. The
encoder walks the message backwards (so the highest index goes first) and
pushes spilled digits onto a stack; reversing that stack once yields the
payload in decoder read order. Nothing about the lane structure is stored
per digit - the decoder re-derives who reads next purely from its own
renormalization checks, which is what keeps the payload free of metadata.

Container layout (all integers little-endian):

    offset  size    field
    0       4       magic "IEC1"
    4       1       version, currently 1
    5       1       variant: 0 = byte8, 1 = word16
    6       2       lane_count N (u16)
    8       8       message_length (u64)
    16      3+2n    symbol table: scale_bits u8, n u16, n x u16 freqs
    -       4*N     final lane states, one u32 per lane
    -       rest    payload digits (u8 each for byte8, u16 LE for word16)

The raw-bit bypass shares the digit stream: the encoder appends one digit
immediately before encoding the value's governing symbol (in its backward
pass), the decoder reads it immediately after decoding that symbol. Lane
states are never touched, so bypass digits can be spliced into any lane
schedule.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from . import backend as backend_mod
from . import rans
from .ans import DigitReader
from .errors import (
    FormatError,
    TrailingGarbageWarning,
    TruncatedStreamError,
    UnencodableSymbolError,
)
from .rans import BYTE8, WORD16, RenormVariant, SymbolTable

MAGIC = b"IEC1"
VERSION = 1

_WIRE_TO_VARIANT = {0: BYTE8, 1: WORD16}
_VARIANT_TO_WIRE = {BYTE8.tag: 0, WORD16.tag: 1}

__all__ = [
    "Container",
    "encode_interleaved",
    "decode_interleaved",
    "decode_interleaved_steps",
    "encode_raw_bits",
    "decode_raw_bits",
    "MAGIC",
]


@dataclass
class Container:
    """One interleaved stream: coding parameters, final states, payload."""

    variant: RenormVariant
    lane_count: int
    message_length: int
    table: SymbolTable
    final_states: tuple[int, ...]
    payload: np.ndarray  # uint8 digits (byte8/custom) or uint16 (word16)

    @property
    def payload_nbytes(self) -> int:
        return len(self.payload) * (2 if self.variant.digit_bits > 8 else 1)

    @property
    def header_nbytes(self) -> int:
        return 16 + 3 + 2 * self.table.alphabet_size + 4 * self.lane_count

    def to_bytes(self) -> bytes:
        if self.variant.tag not in _VARIANT_TO_WIRE:
            raise FormatError(
                f"variant {self.variant.tag!r} has no wire encoding; "
                "only byte8 and word16 containers can be serialized"
            )
        head = MAGIC + struct.pack(
            "<BBHQ",
            VERSION,
            _VARIANT_TO_WIRE[self.variant.tag],
            self.lane_count,
            self.message_length,
        )
        states = struct.pack(f"<{self.lane_count}I", *self.final_states)
        if self.variant.digit_bits > 8:
            payload = np.ascontiguousarray(self.payload, dtype="<u2").tobytes()
        else:
            payload = np.ascontiguousarray(self.payload, dtype=np.uint8).tobytes()
        return head + rans.serialize_table(self.table) + states + payload

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Container":
        if len(raw) < 16:
            raise TruncatedStreamError("container shorter than fixed header")
        if raw[:4] != MAGIC:
            raise FormatError("bad magic; not an ilans container")
        version, wire_variant, lane_count, message_length = struct.unpack_from(
            "<BBHQ", raw, 4
        )
        if version != VERSION:
            raise FormatError(f"unsupported container version {version}")
        if wire_variant not in _WIRE_TO_VARIANT:
            raise FormatError(f"unknown variant byte {wire_variant}")
        variant = _WIRE_TO_VARIANT[wire_variant]
        if lane_count < 1:
            raise FormatError("lane_count must be >= 1")
        table, offset = rans.parse_table(raw, 16)
        if len(raw) < offset + 4 * lane_count:
            raise TruncatedStreamError("final states truncated")
        final_states = struct.unpack_from(f"<{lane_count}I", raw, offset)
        offset += 4 * lane_count
        for x in final_states:
            if not variant.lower_bound <= x < variant.state_limit:
                raise FormatError(f"lane state {x} outside the coder interval")
        tail = raw[offset:]
        if variant.digit_bits > 8:
            if len(tail) % 2:
                raise FormatError("word16 payload has odd byte length")
            payload = np.frombuffer(tail, dtype="<u2").astype(np.uint16)
        else:
            payload = np.frombuffer(tail, dtype=np.uint8).copy()
        return cls(variant, lane_count, message_length, table, tuple(final_states), payload)


def _as_symbols(message, table: SymbolTable) -> np.ndarray:
    arr = np.frombuffer(message, dtype=np.uint8) if isinstance(
        message, (bytes, bytearray)
    ) else np.asarray(message, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("message must be one-dimensional")
    if len(arr) and int(arr.max()) >= table.alphabet_size:
        raise UnencodableSymbolError(
            f"symbol {int(arr.max())} outside table alphabet of {table.alphabet_size}"
        )
    return arr


def _digit_dtype(variant: RenormVariant):
    return np.uint16 if variant.digit_bits > 8 else np.uint8


def _encode_scalar(msg: np.ndarray, table, lane_count, variant, stats):
    states = [variant.lower_bound] * lane_count
    stack: list[int] = []
    msg_l = msg.tolist()
    for i in range(len(msg_l) - 1, -1, -1):
        lane = i % lane_count
        states[lane] = rans.encode_symbol_renorm(
            states[lane], msg_l[i], table, variant, stack, stats
        )
    payload = np.array(stack[::-1], dtype=_digit_dtype(variant))
    return payload, states


def _decode_scalar(container: Container, stats):
    table, variant = container.table, container.variant
    states = list(container.final_states)
    reader = DigitReader(container.payload)
    n = container.lane_count
    out = [0] * container.message_length
    for i in range(container.message_length):
        lane = i % n
        out[i], states[lane] = rans.decode_symbol_renorm(
            states[lane], table, variant, reader, stats
        )
    return np.array(out, dtype=np.uint8), reader.position


def encode_interleaved(
    message,
    table: SymbolTable,
    lane_count: int = 1,
    variant: RenormVariant = WORD16,
    *,
    backend=None,
    stats: rans.RenormStats | None = None,
) -> Container:
    """Encode a message into a Container with ``lane_count`` interleaved states.

    The word16 variant runs on the selected kernel backend unless ``stats``
    instrumentation is requested; everything else takes the generic scalar
    path. Payload bytes are independent of the backend.
    """
    if lane_count < 1:
        raise ValueError("lane_count must be >= 1")
    if lane_count > 0xFFFF:
        raise ValueError("lane_count must fit in 16 bits")
    variant.check_table(table)
    msg = _as_symbols(message, table)
    if variant == WORD16 and stats is None:
        kern = backend_mod.get(backend)
        payload, states = kern.encode_interleaved_u16(
            msg, table.freq_u32, table.cum_u32, table.scale_bits, lane_count
        )
        final_states = tuple(int(x) for x in states)
    else:
        payload, states = _encode_scalar(msg, table, lane_count, variant, stats)
        final_states = tuple(states)
    return Container(variant, lane_count, len(msg), table, final_states, payload)


def decode_interleaved(
    container: Container,
    *,
    backend=None,
    stats: rans.RenormStats | None = None,
) -> np.ndarray:
    """Decode a Container back to its message (uint8 array).

    Warns with TrailingGarbageWarning when payload digits remain unread.
    """
    if container.lane_count < 1:
        raise FormatError("lane_count must be >= 1")
    table, variant = container.table, container.variant
    if variant == WORD16 and stats is None:
        kern = backend_mod.get(backend)
        msg, consumed = kern.decode_interleaved_u16(
            container.payload,
            np.asarray(container.final_states, dtype=np.uint32),
            table.slot_u8,
            table.freq_u32,
            table.cum_u32,
            table.scale_bits,
            container.message_length,
            container.lane_count,
        )
    else:
        msg, consumed = _decode_scalar(container, stats)
    if consumed != len(container.payload):
        warnings.warn(
            f"{len(container.payload) - consumed} unread digits after decode",
            TrailingGarbageWarning,
            stacklevel=2,
        )
    return msg


def decode_interleaved_steps(container: Container):
    """Instrumented serial decode: yields (symbols, states, digits_read) after
    every lane group. Used to check other decoders stay in lockstep."""
    table, variant = container.table, container.variant
    states = list(container.final_states)
    reader = DigitReader(container.payload)
    n = container.lane_count
    done = 0
    while done < container.message_length:
        active = min(n, container.message_length - done)
        symbols = []
        for lane in range(active):
            s, states[lane] = rans.decode_symbol_renorm(
                states[lane], table, variant, reader
            )
            symbols.append(s)
        done += active
        yield tuple(symbols), tuple(states), reader.position


def encode_raw_bits(value: int, width: int, sink: list, variant: RenormVariant = WORD16) -> None:
    """Append one uncompressed ``width``-bit value as a single digit.

    Call during the encoder's backward pass, immediately *before* encoding
    the symbol that governs the value; width 0 writes nothing.
    """
    if not 0 <= width <= variant.digit_bits:
        raise ValueError(f"width must be in [0, {variant.digit_bits}]")
    if width == 0:
        return
    if not 0 <= value < 1 << width:
        raise ValueError(f"value {value} does not fit in {width} bits")
    sink.append(value)


def decode_raw_bits(width: int, source, variant: RenormVariant = WORD16) -> int:
    """Read back one raw value; the mirror of encode_raw_bits.

    Call immediately *after* decoding the governing symbol.
    """
    if not 0 <= width <= variant.digit_bits:
        raise ValueError(f"width must be in [0, {variant.digit_bits}]")
    if width == 0:
        return 0
    digit = source.read()
    if digit >= 1 << width:
        raise FormatError(f"raw digit {digit} exceeds declared width {width}")
    return digit
