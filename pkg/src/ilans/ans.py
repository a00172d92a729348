"""Generic streaming ANS framework.

A coder is a pair of mutually inverse integer maps: ``code`` pushes a symbol
onto a state, ``decode`` pops it back off. Keeping the state inside a fixed
interval [L, radix*L) by spilling/refilling base-``radix`` digits turns the
pair into a streaming entropy coder. The encoder walks the message backwards
and emits digits back-to-front; the decoder walks forwards and visits the
exact same states in reverse order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import (
    NotBUniqueError,
    TrailingGarbageWarning,
    TruncatedStreamError,
    UnencodableSymbolError,
)

__all__ = [
    "Coder",
    "DigitReader",
    "encode_symbol",
    "decode_symbol",
    "encode_message",
    "decode_message",
    "precursor_set",
    "check_b_unique",
    "toy_coder",
    "TOY_A",
    "TOY_B",
]


@dataclass(frozen=True)
class Coder:
    """A code/decode function pair plus its normalization interval.

    ``code(symbol, state)`` must be strictly increasing in ``state`` for every
    symbol, and ``decode`` must invert it. States are normalized to
    [lower_bound, radix * lower_bound).
    """

    alphabet_size: int
    code: Callable[[int, int], int]
    decode: Callable[[int], tuple[int, int]]
    lower_bound: int
    radix: int

    def __post_init__(self):
        if self.radix < 2:
            raise ValueError("radix must be >= 2")
        if self.lower_bound < 1:
            raise ValueError("lower_bound must be >= 1")
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")

    def in_interval(self, state: int) -> bool:
        return self.lower_bound <= state < self.radix * self.lower_bound

    @property
    def max_digits_per_symbol(self) -> int:
        # Any normalized state reaches 0 after this many divisions by radix,
        # so a correct encoder can never spill more digits for one symbol.
        return math.ceil(math.log(self.radix * self.lower_bound, self.radix)) + 1


class DigitReader:
    """Forward cursor over a digit sequence in decoder read order."""

    def __init__(self, digits: Sequence[int]):
        self._digits = digits
        self.position = 0

    def read(self) -> int:
        if self.position >= len(self._digits):
            raise TruncatedStreamError("digit stream exhausted mid-decode")
        digit = int(self._digits[self.position])
        self.position += 1
        return digit

    def exhausted(self) -> bool:
        return self.position >= len(self._digits)

    def __len__(self) -> int:
        return len(self._digits)


def encode_symbol(coder: Coder, symbol: int, state: int, sink: list) -> int:
    """Push one symbol onto ``state``, spilling digits to ``sink`` until the
    coded state lands back in the interval. Returns the new state."""
    if not 0 <= symbol < coder.alphabet_size:
        raise ValueError(f"symbol {symbol} outside alphabet")
    spilled = 0
    while not coder.in_interval(coder.code(symbol, state)):
        if spilled >= coder.max_digits_per_symbol:
            raise NotBUniqueError(
                f"coding symbol {symbol} never renormalizes; coder is not b-unique"
            )
        sink.append(state % coder.radix)
        state //= coder.radix
        spilled += 1
    return coder.code(symbol, state)


def decode_symbol(coder: Coder, state: int, source: DigitReader) -> tuple[int, int]:
    """Pop one symbol off ``state``, refilling digits from ``source``."""
    symbol, state = coder.decode(state)
    while state < coder.lower_bound:
        state = state * coder.radix + source.read()
    if not coder.in_interval(state):
        raise NotBUniqueError("decoded state overshoots the interval")
    return symbol, state


def encode_message(
    coder: Coder,
    message: Sequence[int],
    initial_state: int | None = None,
    trace: list | None = None,
) -> tuple[int, list[int]]:
    """Encode a whole message, last symbol first.

    Returns (final_state, digits) with digits already reversed into decoder
    read order. ``trace``, if given, collects the state after every step
    (starting with the initial state).
    """
    state = coder.lower_bound if initial_state is None else initial_state
    if not coder.in_interval(state):
        raise ValueError("initial state outside the coder interval")
    if trace is not None:
        trace.append(state)
    emitted: list[int] = []
    for symbol in reversed(message):
        state = encode_symbol(coder, symbol, state, emitted)
        if trace is not None:
            trace.append(state)
    return state, emitted[::-1]


def decode_message(
    coder: Coder,
    final_state: int,
    digits: Sequence[int],
    count: int,
    trace: list | None = None,
) -> list[int]:
    """Decode ``count`` symbols starting from the encoder's final state.

    Warns (TrailingGarbageWarning) if digits remain unread afterwards.
    """
    if not coder.in_interval(final_state):
        raise ValueError("final state outside the coder interval")
    source = DigitReader(digits)
    state = final_state
    if trace is not None:
        trace.append(state)
    out = []
    for _ in range(count):
        symbol, state = decode_symbol(coder, state, source)
        out.append(symbol)
        if trace is not None:
            trace.append(state)
    if not source.exhausted():
        warnings.warn(
            f"{len(digits) - source.position} unread digits after decode",
            TrailingGarbageWarning,
            stacklevel=2,
        )
    return out


def _bisect_first(fn: Callable[[int], bool], lo: int, hi: int) -> int:
    """Smallest x in [lo, hi) with fn(x) true; hi if none. fn must be monotone."""
    while lo < hi:
        mid = (lo + hi) // 2
        if fn(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def precursor_set(coder: Coder, symbol: int) -> tuple[int, int]:
    """Inclusive range (lo, hi) of states from which coding ``symbol`` lands
    in the interval.

    Relies on code() being strictly increasing in the state, so both
    endpoints are found by bisection over [0, radix * lower_bound).
    """
    low, high = coder.lower_bound, coder.radix * coder.lower_bound
    first = _bisect_first(lambda x: coder.code(symbol, x) >= low, 0, high)
    last = _bisect_first(lambda x: coder.code(symbol, x) >= high, first, high) - 1
    if first > last or first >= high or not coder.in_interval(coder.code(symbol, first)):
        raise UnencodableSymbolError(f"symbol {symbol} has an empty precursor set")
    return first, last


def check_b_unique(interval: tuple[int, int], radix: int) -> bool:
    """True iff the inclusive interval has the shape {k, ..., radix*k - 1}, k >= 1."""
    lo, hi = interval
    return lo >= 1 and hi == radix * lo - 1


TOY_A = 0
TOY_B = 1


def toy_coder() -> Coder:
    """Hand-built two-symbol coder (p(A)=1/4, p(B)=3/4) over bit digits.

    A lands on multiples of 4, B on everything else; interval [16, 32).
    Small enough to trace by hand, so it doubles as the golden reference
    for the framework tests.
    """

    def code(symbol: int, state: int) -> int:
        if symbol == TOY_A:
            return 4 * state
        return 4 * (state // 3) + (state % 3) + 1

    def decode(state: int) -> tuple[int, int]:
        if state % 4 == 0:
            return TOY_A, state // 4
        return TOY_B, 3 * (state // 4) + (state % 4) - 1

    return Coder(2, code, decode, lower_bound=16, radix=2)
