"""rANS coding over quantized order-0 frequency tables.

Pushing symbol s maps the state as x -> (x // f_s) * m + cum_s + (x % f_s),
so x mod m lands inside [cum_s, cum_s + f_s) and the decoder recovers s with
a slot lookup. Renormalization keeps x inside [L, radix * L) by spilling or
refilling fixed-width digits. The encoder spills *before* pushing, while the
state still exceeds f_s * radix * L / m; that threshold is exactly the top of
the symbol's precursor interval, which is what makes the coder b-unique.

With 16-bit digits (word16: L = 2^16) and m <= 2^16, one spill or refill per
symbol always suffices; byte8 (L = 2^23) may loop up to three times.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FormatError, TruncatedStreamError, UnencodableSymbolError

MAX_ALPHABET = 256
MAX_SCALE_BITS = 16

__all__ = [
    "RenormVariant",
    "BYTE8",
    "WORD16",
    "SymbolTable",
    "quantize",
    "push_symbol",
    "pop_symbol",
    "encode_symbol_renorm",
    "decode_symbol_renorm",
    "encode_threshold",
    "RenormStats",
    "rans_coder",
    "serialize_table",
    "parse_table",
]


@dataclass(frozen=True)
class RenormVariant:
    """Digit width plus the lower bound of the normalized state interval.

    States are kept below radix * lower_bound, which must fit in 32 bits.
    Custom instances (e.g. bit digits with lower_bound=16) are accepted by
    the scalar and generic interleaved paths but cannot be serialized.
    """

    tag: str
    digit_bits: int
    lower_bound: int

    def __post_init__(self):
        if not 1 <= self.digit_bits <= 16:
            raise ValueError("digit_bits must be in [1, 16]")
        if self.lower_bound < 1:
            raise ValueError("lower_bound must be >= 1")
        if self.radix * self.lower_bound > 1 << 32:
            raise ValueError("radix * lower_bound must fit in 32 bits")

    @property
    def radix(self) -> int:
        return 1 << self.digit_bits

    @property
    def digit_mask(self) -> int:
        return self.radix - 1

    @property
    def state_limit(self) -> int:
        return self.radix * self.lower_bound

    def check_table(self, table: "SymbolTable") -> None:
        if self.lower_bound % table.total != 0:
            raise ValueError(
                f"lower_bound {self.lower_bound} is not a multiple of the "
                f"table total {table.total}; renormalized coding would not be b-unique"
            )


BYTE8 = RenormVariant("byte8", 8, 1 << 23)
WORD16 = RenormVariant("word16", 16, 1 << 16)

_VARIANT_BY_TAG = {"byte8": BYTE8, "word16": WORD16}


def variant_by_tag(tag: str) -> RenormVariant:
    try:
        return _VARIANT_BY_TAG[tag]
    except KeyError:
        raise ValueError(f"unknown renorm variant {tag!r}") from None


class SymbolTable:
    """Quantized frequencies plus cumulative offsets and slot lookup."""

    def __init__(self, freqs, scale_bits: int):
        if not 1 <= scale_bits <= MAX_SCALE_BITS:
            raise ValueError(f"scale_bits must be in [1, {MAX_SCALE_BITS}]")
        freqs = [int(f) for f in freqs]
        if not 1 <= len(freqs) <= MAX_ALPHABET:
            raise ValueError(f"alphabet size must be in [1, {MAX_ALPHABET}]")
        if any(f < 0 for f in freqs):
            raise ValueError("frequencies must be non-negative")
        total = 1 << scale_bits
        if sum(freqs) != total:
            raise ValueError(f"frequencies must sum to {total}, got {sum(freqs)}")
        self.scale_bits = scale_bits
        self.freq = freqs
        cum = [0]
        for f in freqs:
            cum.append(cum[-1] + f)
        self.cum = cum
        slots = np.repeat(np.arange(len(freqs), dtype=np.uint8), freqs)
        self.slot_to_symbol = slots.tolist()
        self._slot_u8 = slots

    @property
    def total(self) -> int:
        return 1 << self.scale_bits

    @property
    def alphabet_size(self) -> int:
        return len(self.freq)

    @classmethod
    def from_counts(cls, counts, scale_bits: int = 14) -> "SymbolTable":
        return cls(quantize(counts, scale_bits), scale_bits)

    # contiguous views for the kernels
    @cached_property
    def freq_u32(self) -> np.ndarray:
        return np.asarray(self.freq, dtype=np.uint32)

    @cached_property
    def cum_u32(self) -> np.ndarray:
        return np.asarray(self.cum, dtype=np.uint32)

    @property
    def slot_u8(self) -> np.ndarray:
        return self._slot_u8

    def model_entropy_bits(self) -> float:
        """Entropy of the quantized distribution, bits per symbol."""
        p = self.freq_u32[self.freq_u32 > 0].astype(np.float64) / self.total
        return float(-(p * np.log2(p)).sum())

    def ideal_bits(self, symbols) -> float:
        """Sum of -log2(f_s / m) over a message: its ideal coded size."""
        f = self.freq_u32[np.asarray(symbols, dtype=np.uint8)].astype(np.float64)
        if (f == 0).any():
            raise UnencodableSymbolError("message contains zero-frequency symbols")
        return float((self.scale_bits - np.log2(f)).sum())

    def __eq__(self, other):
        return (
            isinstance(other, SymbolTable)
            and self.scale_bits == other.scale_bits
            and self.freq == other.freq
        )

    def __repr__(self):
        return f"SymbolTable(n={self.alphabet_size}, scale_bits={self.scale_bits})"


def quantize(counts, scale_bits: int) -> list[int]:
    """Round observed counts to integer frequencies summing to 2**scale_bits.

    Largest-remainder style: start from floor(count * m / total) with a floor
    of 1 on every present symbol, then settle the difference one unit at a
    time on the symbol whose allocation sits farthest from its exact target.
    Comparisons are done with cross-multiplied integers, so results are exact
    and ties break deterministically toward the lowest symbol index.
    """
    if not 1 <= scale_bits <= MAX_SCALE_BITS:
        raise ValueError(f"scale_bits must be in [1, {MAX_SCALE_BITS}]")
    counts = [int(c) for c in counts]
    if len(counts) > MAX_ALPHABET:
        raise ValueError(f"alphabet size must be <= {MAX_ALPHABET}")
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise ValueError("at least one count must be positive")
    m = 1 << scale_bits
    present = [i for i, c in enumerate(counts) if c > 0]
    if len(present) > m:
        raise ValueError(
            f"alphabet too large for scale: {len(present)} present symbols, "
            f"only {m} slots"
        )
    freqs = [0] * len(counts)
    for i in present:
        freqs[i] = max(1, counts[i] * m // total)
    diff = m - sum(freqs)
    while diff > 0:
        # most under-allocated first; error terms share the denominator `total`
        best = max(present, key=lambda i: (counts[i] * m - freqs[i] * total, -i))
        freqs[best] += 1
        diff -= 1
    while diff < 0:
        shrinkable = [i for i in present if freqs[i] > 1]
        best = max(shrinkable, key=lambda i: (freqs[i] * total - counts[i] * m, -i))
        freqs[best] -= 1
        diff += 1
    return freqs


def push_symbol(table: SymbolTable, symbol: int, state: int) -> int:
    """Bare rANS push, no renormalization."""
    f = table.freq[symbol]
    if f == 0:
        raise UnencodableSymbolError(f"symbol {symbol} has frequency 0")
    return (state // f << table.scale_bits) + table.cum[symbol] + state % f


def pop_symbol(table: SymbolTable, state: int) -> tuple[int, int]:
    """Bare rANS pop, no renormalization."""
    slot = state & (table.total - 1)
    symbol = table.slot_to_symbol[slot]
    return symbol, table.freq[symbol] * (state >> table.scale_bits) + slot - table.cum[symbol]


def encode_threshold(table: SymbolTable, variant: RenormVariant, symbol: int) -> int:
    """Exclusive upper state bound before pushing ``symbol``: the top of its
    precursor interval, f_s * radix * L / m."""
    return table.freq[symbol] * (variant.state_limit >> table.scale_bits)


class RenormStats:
    """Spill/refill counters; proves the one-digit-per-symbol property."""

    def __init__(self):
        self.encode_symbols = 0
        self.encode_digits = 0
        self.max_encode_digits = 0
        self.decode_symbols = 0
        self.decode_digits = 0
        self.max_decode_digits = 0

    def note_encode(self, digits: int) -> None:
        self.encode_symbols += 1
        self.encode_digits += digits
        if digits > self.max_encode_digits:
            self.max_encode_digits = digits

    def note_decode(self, digits: int) -> None:
        self.decode_symbols += 1
        self.decode_digits += digits
        if digits > self.max_decode_digits:
            self.max_decode_digits = digits

    def __repr__(self):
        return (
            f"RenormStats(enc {self.encode_symbols} syms / {self.encode_digits} digits, "
            f"max {self.max_encode_digits}; dec {self.decode_symbols} syms / "
            f"{self.decode_digits} digits, max {self.max_decode_digits})"
        )


def encode_symbol_renorm(
    state: int,
    symbol: int,
    table: SymbolTable,
    variant: RenormVariant,
    sink: list,
    stats: RenormStats | None = None,
) -> int:
    """Spill digits until ``state`` drops into the symbol's precursor
    interval, then push. Digits land on ``sink`` in emission order."""
    f = table.freq[symbol]
    if f == 0:
        raise UnencodableSymbolError(f"symbol {symbol} has frequency 0")
    threshold = f * (variant.state_limit >> table.scale_bits)
    bits = variant.digit_bits
    mask = variant.digit_mask
    spilled = 0
    while state >= threshold:
        sink.append(state & mask)
        state >>= bits
        spilled += 1
    if stats is not None:
        stats.note_encode(spilled)
    return (state // f << table.scale_bits) + table.cum[symbol] + state % f


def decode_symbol_renorm(
    state: int,
    table: SymbolTable,
    variant: RenormVariant,
    source,
    stats: RenormStats | None = None,
) -> tuple[int, int]:
    """Pop one symbol, then refill digits from ``source`` (a DigitReader or
    anything with .read()) until the state is normalized again."""
    symbol, state = pop_symbol(table, state)
    low = variant.lower_bound
    bits = variant.digit_bits
    refills = 0
    limit = (low.bit_length() + bits - 1) // bits + 2
    while state < low:
        state = (state << bits) | source.read()
        refills += 1
        if refills > limit:
            # only reachable on corrupt input: a valid pop never lands on 0
            raise FormatError("renormalization does not terminate; corrupt stream")
    if stats is not None:
        stats.note_decode(refills)
    return symbol, state


def rans_coder(table: SymbolTable, variant: RenormVariant):
    """Adapt a table + variant into an ans.Coder, so the generic framework
    tools (precursor_set, encode_message, ...) apply to rANS instances."""
    from .ans import Coder

    variant.check_table(table)
    return Coder(
        alphabet_size=table.alphabet_size,
        code=lambda s, x: push_symbol(table, s, x),
        decode=lambda x: pop_symbol(table, x),
        lower_bound=variant.lower_bound,
        radix=variant.radix,
    )


def serialize_table(table: SymbolTable) -> bytes:
    """scale_bits (u8), alphabet size (u16 LE), then one u16 LE per frequency."""
    if any(f > 0xFFFF for f in table.freq):
        raise FormatError("frequency 65536 does not fit the u16 table field")
    return struct.pack("<BH", table.scale_bits, table.alphabet_size) + struct.pack(
        f"<{table.alphabet_size}H", *table.freq
    )


def parse_table(buf: bytes, offset: int = 0) -> tuple[SymbolTable, int]:
    """Inverse of serialize_table; returns (table, offset past the table)."""
    if len(buf) < offset + 3:
        raise TruncatedStreamError("table header truncated")
    scale_bits, n = struct.unpack_from("<BH", buf, offset)
    offset += 3
    if len(buf) < offset + 2 * n:
        raise TruncatedStreamError("frequency table truncated")
    freqs = struct.unpack_from(f"<{n}H", buf, offset)
    offset += 2 * n
    try:
        table = SymbolTable(freqs, scale_bits)
    except ValueError as exc:
        raise FormatError(f"invalid frequency table: {exc}") from exc
    return table, offset
