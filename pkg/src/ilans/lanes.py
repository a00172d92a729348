"""Lane-parallel decoding (and encoding) in the SIMD execution model.

The serial interleaved decoder renormalizes lanes one at a time; here a
whole group of N lane states advances per step: pop every lane, ballot the
"state dropped below 2^16" flags into a mask, then service all flagged lanes
with one packed load that hands lane i the digit at
read_pos + popcount(mask below i). Because word16 coding refills at most one
digit per symbol, those reads are exactly the digits the serial decoder
would have consumed in the same order - so outputs match byte for byte.

Everything here assumes the word16 variant and at most 32 lanes (the mask
is a machine word). The number of payload accesses per step is a pure
function of the mask: unmasked lanes never touch the stream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import backend as backend_mod
from . import rans
from .errors import (
    TrailingGarbageWarning,
    TruncatedStreamError,
    UnencodableSymbolError,
    UnsupportedVariantError,
)
from .interleave import Container, _as_symbols
from .rans import WORD16, SymbolTable

MAX_LANES = 32
_LOW = WORD16.lower_bound

__all__ = [
    "MAX_LANES",
    "LaneSet",
    "ballot",
    "ballot_shared",
    "lane_offset",
    "packed_load",
    "packed_store",
    "decode_step",
    "encode_step",
    "decode_lanes_full",
    "decode_lanes_steps",
    "encode_lanes_full",
]


@dataclass
class LaneSet:
    """N lane states plus the shared read cursor (decode direction only)."""

    states: list[int]
    payload: object = None  # indexable sequence of 16-bit digits
    read_pos: int = 0

    def __post_init__(self):
        if not 1 <= len(self.states) <= MAX_LANES:
            raise ValueError(f"lane count must be in [1, {MAX_LANES}]")

    @property
    def lane_count(self) -> int:
        return len(self.states)


def ballot(lane_set: LaneSet, predicate, active: int | None = None) -> int:
    """Mask with bit i set iff predicate(state of lane i) holds."""
    n = lane_set.lane_count if active is None else active
    mask = 0
    for lane in range(n):
        if predicate(lane_set.states[lane]):
            mask |= 1 << lane
    return mask


def ballot_shared(
    lane_set: LaneSet,
    predicate,
    active: int | None = None,
    initial_mask: int = 0,
    order=None,
) -> int:
    """Shared-memory fallback for ballot: every lane sets or clears its own
    bit, in any visitation order, over an arbitrary initial mask. Must agree
    with ballot() for any order and any garbage in initial_mask."""
    n = lane_set.lane_count if active is None else active
    lanes = list(range(n)) if order is None else list(order)
    if sorted(lanes) != list(range(n)):
        raise ValueError("order must be a permutation of the active lanes")
    mask = initial_mask & ((1 << n) - 1)
    for lane in lanes:
        if predicate(lane_set.states[lane]):
            mask |= 1 << lane
        else:
            mask &= ~(1 << lane)
    return mask


def lane_offset(mask: int, lane: int) -> int:
    """Number of set bits strictly below ``lane``: the lane's slot within the
    packed access. Only meaningful for lanes whose own bit is set."""
    return (mask & ((1 << lane) - 1)).bit_count()


def packed_load(source, pos: int, mask: int, lane_count: int) -> list[int]:
    """Hand each masked lane one digit from ``source``, consecutive from
    ``pos`` in ascending lane order; unmasked lanes get 0 and the stream is
    not touched for them (exactly popcount(mask) accesses)."""
    out = [0] * lane_count
    limit = len(source)
    for lane in range(lane_count):
        if mask >> lane & 1:
            idx = pos + lane_offset(mask, lane)
            if idx >= limit:
                raise TruncatedStreamError("payload exhausted mid-decode")
            out[lane] = int(source[idx])
    return out


def packed_store(stack: list, values, mask: int, lane_count: int) -> None:
    """Dual of packed_load for the encoder's emission stack.

    Lane i's digit lands popcount-of-masked-lanes-above-i slots past the old
    top, so once the stack is reversed into read order the group's digits
    come out in ascending lane order - the order packed_load expects.
    """
    base = len(stack)
    stack.extend([0] * mask.bit_count())
    for lane in range(lane_count):
        if mask >> lane & 1:
            stack[base + (mask >> (lane + 1)).bit_count()] = values[lane]


def decode_step(lane_set: LaneSet, table: SymbolTable, active: int | None = None) -> list[int]:
    """Advance every active lane by one symbol; returns the symbols."""
    n = lane_set.lane_count if active is None else active
    states = lane_set.states
    symbols = [0] * n
    for lane in range(n):
        symbols[lane], states[lane] = rans.pop_symbol(table, states[lane])
    mask = ballot(lane_set, lambda x: x < _LOW, n)
    vals = packed_load(lane_set.payload, lane_set.read_pos, mask, n)
    for lane in range(n):
        if mask >> lane & 1:
            states[lane] = (states[lane] << 16) | vals[lane]
    lane_set.read_pos += mask.bit_count()
    return symbols


def encode_step(
    lane_set: LaneSet,
    symbols,
    table: SymbolTable,
    stack: list,
    active: int | None = None,
) -> int:
    """Encode one symbol per active lane (called while walking the message
    backwards, so the last group goes first). Returns the spill mask."""
    n = len(symbols) if active is None else active
    if n != len(symbols) or n > lane_set.lane_count:
        raise ValueError("one symbol per active lane")
    states = lane_set.states
    shift = 32 - table.scale_bits
    mask = 0
    for lane in range(n):
        f = table.freq[symbols[lane]]
        if f == 0:
            raise UnencodableSymbolError(f"symbol {symbols[lane]} has frequency 0")
        if states[lane] >= f << shift:
            mask |= 1 << lane
    vals = [states[lane] & 0xFFFF if mask >> lane & 1 else 0 for lane in range(n)]
    packed_store(stack, vals, mask, n)
    for lane in range(n):
        if mask >> lane & 1:
            states[lane] >>= 16
        states[lane] = rans.push_symbol(table, symbols[lane], states[lane])
    return mask


def _check_lane_decodable(container: Container) -> None:
    if container.variant != WORD16:
        raise UnsupportedVariantError(
            f"variant {container.variant.tag!r} unsupported by lane decoder"
        )
    if container.lane_count > MAX_LANES:
        raise UnsupportedVariantError(
            f"lane decoder supports at most {MAX_LANES} lanes, "
            f"container has {container.lane_count}"
        )


def decode_lanes_full(container: Container, *, backend=None) -> np.ndarray:
    """Decode a word16 container group-at-a-time. Byte-identical output to
    decode_interleaved on the same container."""
    _check_lane_decodable(container)
    table = container.table
    kern = backend_mod.get(backend)
    msg, consumed = kern.decode_lanes_u16(
        container.payload,
        np.asarray(container.final_states, dtype=np.uint32),
        table.slot_u8,
        table.freq_u32,
        table.cum_u32,
        table.scale_bits,
        container.message_length,
        container.lane_count,
    )
    if consumed != len(container.payload):
        warnings.warn(
            f"{len(container.payload) - consumed} unread digits after decode",
            TrailingGarbageWarning,
            stacklevel=2,
        )
    return msg


def decode_lanes_steps(container: Container):
    """Instrumented lane decode: yields (symbols, states, digits_read) after
    every group, in the same shape as interleave.decode_interleaved_steps."""
    _check_lane_decodable(container)
    lane_set = LaneSet(list(container.final_states), container.payload)
    table = container.table
    done = 0
    while done < container.message_length:
        active = min(lane_set.lane_count, container.message_length - done)
        symbols = decode_step(lane_set, table, active)
        done += active
        yield tuple(symbols), tuple(lane_set.states), lane_set.read_pos


def encode_lanes_full(message, table: SymbolTable, lane_count: int) -> Container:
    """Encode with the step machinery; must match encode_interleaved bit for
    bit (same container bytes) on every input."""
    if not 1 <= lane_count <= MAX_LANES:
        raise ValueError(f"lane count must be in [1, {MAX_LANES}]")
    WORD16.check_table(table)
    msg = _as_symbols(message, table).tolist()
    lane_set = LaneSet([_LOW] * lane_count)
    stack: list[int] = []
    full_groups, tail = divmod(len(msg), lane_count)
    if tail:
        base = full_groups * lane_count
        encode_step(lane_set, msg[base : base + tail], table, stack, active=tail)
    for group in range(full_groups - 1, -1, -1):
        base = group * lane_count
        encode_step(lane_set, msg[base : base + lane_count], table, stack)
    payload = np.array(stack[::-1], dtype=np.uint16)
    return Container(WORD16, lane_count, len(msg), table, tuple(lane_set.states), payload)
