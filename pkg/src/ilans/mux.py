"""Coder-agnostic multiplexing of independently coded streams.

The core trick: the byte order the *decoder* will consume is discovered by
actually running one. Each stream is encoded into its own buffer, then
instrumented decoders replay the decode schedule and every chunk they read
is teed into the output. The muxed payload is therefore exactly the
concatenation the receiver asks for - no framing, no per-chunk metadata,
len(muxed) == sum of per-stream buffer lengths.

Stream coders are duck-typed: anything with

    encode_segment(symbols) -> (state_bytes, payload_bytes)
    new_decoder() -> decoder with load_state(read) and decode_symbol(read)

plugs in, where ``read(n)`` returns exactly n bytes. Two are provided:
RansStreamCodec (rANS, byte-multiple digit widths) and RawStreamCodec
(fixed-width little-endian values, zero coding state).

Bounded buffering: mux_with_flush segments every stream at global epoch
boundaries (epoch = schedule step // flush_interval). Segment 0's start
state travels in the stream's preamble header; later segments carry their
state inline in the payload, where the replay/demux decoders know to expect
them because they recompute the same epoch boundaries from (schedule, F).
Flushing every epoch lets the replay drain everything submitted so far, so
encoder-side buffering stays at O(flush_interval * stream_count) bytes
instead of O(total).
"""

from __future__ import annotations

import struct
import warnings
from collections import Counter
from dataclasses import dataclass

from . import rans
from .errors import (
    FormatError,
    ScheduleError,
    TrailingGarbageWarning,
    TruncatedStreamError,
)
from .rans import WORD16, RenormVariant, SymbolTable

MUX_MAGIC = b"IEM1"
MUX_VERSION = 1

__all__ = [
    "RansStreamCodec",
    "RawStreamCodec",
    "StreamBuffer",
    "MuxedContainer",
    "MuxBudget",
    "round_robin_schedule",
    "encode_multistream",
    "mux",
    "mux_with_flush",
    "demux_decode",
    "MUX_MAGIC",
]


class _Cursor:
    """Byte reader over one buffer; read(n) returns exactly n bytes."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def read(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise TruncatedStreamError("byte stream exhausted mid-decode")
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def exhausted(self) -> bool:
        return self.pos >= len(self.data)


class RansStreamCodec:
    """rANS stream coder for the mux; one instance per stream."""

    def __init__(self, table: SymbolTable, variant: RenormVariant = WORD16):
        if variant.digit_bits % 8 != 0:
            raise ValueError("mux streams need byte-multiple digit widths")
        variant.check_table(table)
        self.table = table
        self.variant = variant
        self.digit_nbytes = variant.digit_bits // 8

    def encode_segment(self, symbols) -> tuple[bytes, bytes]:
        """Encode one segment from a fresh state; returns (state, payload)."""
        state = self.variant.lower_bound
        digits: list[int] = []
        for s in reversed(symbols):
            state = rans.encode_symbol_renorm(state, s, self.table, self.variant, digits)
        nb = self.digit_nbytes
        payload = b"".join(d.to_bytes(nb, "little") for d in reversed(digits))
        return state.to_bytes(4, "little"), payload

    def new_decoder(self):
        return _RansStreamDecoder(self)


class _RansStreamDecoder:
    def __init__(self, codec: RansStreamCodec):
        self._codec = codec
        self._state = None

    def load_state(self, read) -> None:
        state = int.from_bytes(read(4), "little")
        v = self._codec.variant
        if not v.lower_bound <= state < v.state_limit:
            raise FormatError(f"stream state {state} outside the coder interval")
        self._state = state

    def decode_symbol(self, read) -> int:
        codec = self._codec
        low = codec.variant.lower_bound
        bits = codec.variant.digit_bits
        nb = codec.digit_nbytes
        symbol, state = rans.pop_symbol(codec.table, self._state)
        while state < low:
            state = (state << bits) | int.from_bytes(read(nb), "little")
        self._state = state
        return symbol


class RawStreamCodec:
    """Uncompressed fixed-width values; no coding state at all."""

    def __init__(self, width_bits: int):
        if not 1 <= width_bits <= 32:
            raise ValueError("width_bits must be in [1, 32]")
        self.width_bits = width_bits
        self.value_nbytes = (width_bits + 7) // 8

    def encode_segment(self, values) -> tuple[bytes, bytes]:
        limit = 1 << self.width_bits
        out = bytearray()
        for v in values:
            v = int(v)
            if not 0 <= v < limit:
                raise ValueError(f"value {v} does not fit in {self.width_bits} bits")
            out += v.to_bytes(self.value_nbytes, "little")
        return b"", bytes(out)

    def new_decoder(self):
        return _RawStreamDecoder(self.value_nbytes)


class _RawStreamDecoder:
    def __init__(self, nbytes: int):
        self._nbytes = nbytes

    def load_state(self, read) -> None:
        pass  # stateless: reloading at a segment boundary costs nothing

    def decode_symbol(self, read) -> int:
        return int.from_bytes(read(self._nbytes), "little")


@dataclass
class StreamBuffer:
    """One stream encoded on its own: preamble header + private payload."""

    header: bytes
    payload: bytes
    symbol_count: int


@dataclass
class MuxedContainer:
    """Muxed payload plus the per-stream preamble (lengths and headers)."""

    flush_interval: int | None
    stream_lengths: list[int]
    stream_headers: list[bytes]
    payload: bytes

    def to_bytes(self) -> bytes:
        out = bytearray(MUX_MAGIC)
        out += struct.pack(
            "<BIH",
            MUX_VERSION,
            0 if self.flush_interval is None else self.flush_interval,
            len(self.stream_lengths),
        )
        for length, header in zip(self.stream_lengths, self.stream_headers):
            out += struct.pack("<QH", length, len(header))
            out += header
        out += struct.pack("<Q", len(self.payload))
        out += self.payload
        return bytes(out)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "MuxedContainer":
        if len(raw) < 11:
            raise TruncatedStreamError("mux container shorter than fixed header")
        if raw[:4] != MUX_MAGIC:
            raise FormatError("bad magic; not an ilans mux container")
        version, flush, count = struct.unpack_from("<BIH", raw, 4)
        if version != MUX_VERSION:
            raise FormatError(f"unsupported mux container version {version}")
        offset = 11
        lengths, headers = [], []
        for _ in range(count):
            if len(raw) < offset + 10:
                raise TruncatedStreamError("stream preamble truncated")
            length, hlen = struct.unpack_from("<QH", raw, offset)
            offset += 10
            if len(raw) < offset + hlen:
                raise TruncatedStreamError("stream header truncated")
            headers.append(raw[offset : offset + hlen])
            lengths.append(length)
            offset += hlen
        if len(raw) < offset + 8:
            raise TruncatedStreamError("payload length truncated")
        (plen,) = struct.unpack_from("<Q", raw, offset)
        offset += 8
        if len(raw) < offset + plen:
            raise TruncatedStreamError("muxed payload truncated")
        if len(raw) > offset + plen:
            warnings.warn(
                f"{len(raw) - offset - plen} bytes after muxed payload",
                TrailingGarbageWarning,
                stacklevel=2,
            )
        return cls(flush or None, lengths, headers, raw[offset : offset + plen])


@dataclass
class MuxBudget:
    """Encoder-side buffering report from mux_with_flush."""

    flush_interval: int | None
    max_buffered: int
    segment_count: int
    payload_bytes: int


def round_robin_schedule(lengths) -> list[int]:
    """Default schedule: cycle over streams, skipping exhausted ones."""
    remaining = [int(n) for n in lengths]
    out = []
    while True:
        progressed = False
        for j, left in enumerate(remaining):
            if left > 0:
                out.append(j)
                remaining[j] -= 1
                progressed = True
        if not progressed:
            return out


def _validate_schedule(schedule, lengths) -> None:
    counts = Counter(schedule)
    for sid in counts:
        if not 0 <= sid < len(lengths):
            raise ScheduleError(f"schedule references unknown stream {sid}")
    for j, n in enumerate(lengths):
        if counts.get(j, 0) != n:
            raise ScheduleError(
                f"schedule has {counts.get(j, 0)} steps for stream {j}, "
                f"which holds {n} symbols"
            )


def encode_multistream(messages, coders) -> list[StreamBuffer]:
    """Encode every stream independently (single segment each)."""
    if len(messages) != len(coders):
        raise ValueError("one coder per message")
    buffers = []
    for msg, coder in zip(messages, coders):
        header, payload = coder.encode_segment(msg)
        buffers.append(StreamBuffer(header, payload, len(msg)))
    return buffers


def mux(buffers, coders, schedule) -> bytes:
    """Merge pre-encoded single-segment buffers by decoder replay.

    Returns the bare muxed payload: exactly sum(len(b.payload)) bytes.
    """
    if len(buffers) != len(coders):
        raise ValueError("one coder per buffer")
    _validate_schedule(schedule, [b.symbol_count for b in buffers])
    out = bytearray()
    cursors = [_Cursor(b.payload) for b in buffers]
    decoders = []
    for coder, buf in zip(coders, buffers):
        dec = coder.new_decoder()
        dec.load_state(_Cursor(buf.header).read)  # header is preamble, not teed
        decoders.append(dec)

    def teed_read(sid):
        def read(n):
            chunk = cursors[sid].read(n)
            out.extend(chunk)
            return chunk

        return read

    reads = [teed_read(j) for j in range(len(buffers))]
    for sid in schedule:
        decoders[sid].decode_symbol(reads[sid])
    for j, cur in enumerate(cursors):
        if not cur.exhausted():
            raise ScheduleError(f"stream {j} payload not fully consumed by schedule")
    return bytes(out)


def _epoch_runs(schedule, lengths, flush_interval):
    """Per-stream segmentation: list of (epoch, symbol_count) runs, plus the
    symbols each run covers (FIFO from the stream's message order)."""
    runs = [[] for _ in lengths]
    for t, sid in enumerate(schedule):
        epoch = 0 if flush_interval is None else t // flush_interval
        if runs[sid] and runs[sid][-1][0] == epoch:
            runs[sid][-1][1] += 1
        else:
            runs[sid].append([epoch, 1])
    return runs


def mux_with_flush(
    messages,
    coders,
    schedule=None,
    flush_interval: int | None = None,
) -> tuple[MuxedContainer, MuxBudget]:
    """Full pipeline: segment, encode, replay-merge; reports buffering.

    With flush_interval=None (or >= len(schedule)) the output payload is
    byte-identical to mux(encode_multistream(...)). max_buffered counts
    encoded-but-not-yet-replayed bytes, measured at every flush point.
    """
    if len(messages) != len(coders):
        raise ValueError("one coder per message")
    lengths = [len(m) for m in messages]
    if schedule is None:
        schedule = round_robin_schedule(lengths)
    _validate_schedule(schedule, lengths)
    if flush_interval is not None and flush_interval < 1:
        raise ValueError("flush_interval must be >= 1")

    runs = _epoch_runs(schedule, lengths, flush_interval)
    segments = [[] for _ in messages]  # (epoch, chunk_bytes) per stream
    headers = []
    segment_count = 0
    for j, (msg, coder) in enumerate(zip(messages, coders)):
        taken = 0
        header = None
        for idx, (epoch, count) in enumerate(runs[j]):
            state, payload = coder.encode_segment(msg[taken : taken + count])
            taken += count
            if idx == 0:
                header = state  # travels in the preamble
                segments[j].append((epoch, payload))
            else:
                segments[j].append((epoch, state + payload))  # state goes inline
            segment_count += 1
        if header is None:
            header, _ = coder.encode_segment(msg[0:0])  # empty stream
        headers.append(header)

    # replay: flush epoch by epoch, drain everything flushed so far
    stream_bytes = [b"".join(chunk for _, chunk in segs) for segs in segments]
    flushed = [0] * len(messages)
    consumed = [0] * len(messages)
    out = bytearray()
    decoders = []
    for coder, header in zip(coders, headers):
        dec = coder.new_decoder()
        dec.load_state(_Cursor(header).read)
        decoders.append(dec)

    def teed_read(sid):
        def read(n):
            end = consumed[sid] + n
            if end > flushed[sid]:
                raise ScheduleError(
                    f"decoder for stream {sid} read past its flushed bytes"
                )
            chunk = stream_bytes[sid][consumed[sid] : end]
            consumed[sid] = end
            out.extend(chunk)
            return chunk

        return read

    reads = [teed_read(j) for j in range(len(messages))]
    seg_cursor = [0] * len(messages)  # next segment index to flush
    current = [None] * len(messages)  # epoch of each stream's active segment
    max_buffered = 0
    step = 0
    last_epoch = (
        0
        if flush_interval is None or not schedule
        else (len(schedule) - 1) // flush_interval
    )
    for epoch in range(last_epoch + 1):
        for j in range(len(messages)):
            while (
                seg_cursor[j] < len(segments[j])
                and segments[j][seg_cursor[j]][0] == epoch
            ):
                flushed[j] += len(segments[j][seg_cursor[j]][1])
                seg_cursor[j] += 1
        # peak: everything this epoch flushed, before the replay drains it
        max_buffered = max(max_buffered, sum(flushed) - sum(consumed))
        boundary = (
            len(schedule) if flush_interval is None else (epoch + 1) * flush_interval
        )
        while step < min(boundary, len(schedule)):
            sid = schedule[step]
            e = 0 if flush_interval is None else step // flush_interval
            if current[sid] is None:
                current[sid] = e  # first segment: state came from the preamble
            elif e > current[sid]:
                decoders[sid].load_state(reads[sid])  # inline segment state
                current[sid] = e
            decoders[sid].decode_symbol(reads[sid])
            step += 1
    if sum(consumed) != sum(len(b) for b in stream_bytes):
        raise ScheduleError("replay did not consume every stream byte")

    container = MuxedContainer(flush_interval, lengths, headers, bytes(out))
    budget = MuxBudget(flush_interval, max_buffered, segment_count, len(out))
    return container, budget


def demux_decode(muxed, coders, schedule=None) -> list[list[int]]:
    """Decode every stream back out of a muxed container.

    ``muxed`` is a MuxedContainer or its serialized bytes. The schedule must
    be the one the mux was built with (default: round-robin).
    """
    container = (
        muxed if isinstance(muxed, MuxedContainer) else MuxedContainer.from_bytes(muxed)
    )
    if len(container.stream_lengths) != len(coders):
        raise ValueError("one coder per stream")
    lengths = container.stream_lengths
    if schedule is None:
        schedule = round_robin_schedule(lengths)
    _validate_schedule(schedule, lengths)
    flush_interval = container.flush_interval

    cursor = _Cursor(container.payload)
    decoders = []
    for coder, header in zip(coders, container.stream_headers):
        dec = coder.new_decoder()
        dec.load_state(_Cursor(header).read)
        decoders.append(dec)
    out: list[list[int]] = [[] for _ in coders]
    current = [None] * len(coders)
    for step, sid in enumerate(schedule):
        e = 0 if flush_interval is None else step // flush_interval
        if current[sid] is None:
            current[sid] = e
        elif e > current[sid]:
            decoders[sid].load_state(cursor.read)
            current[sid] = e
        out[sid].append(decoders[sid].decode_symbol(cursor.read))
    if not cursor.exhausted():
        warnings.warn(
            f"{len(container.payload) - cursor.pos} unread bytes after demux",
            TrailingGarbageWarning,
            stacklevel=2,
        )
    return out
