"""rANS layer tests: quantization, bare push/pop, renormalized coding,
variant contracts, table serialization.

The two-symbol table [1, 3] at scale_bits=2 with bit digits and lower
bound 16 reproduces the hand-traced reference coder from test_ans, so the
golden literals carry over unchanged.
"""

from fractions import Fraction

import numpy as np
import pytest

from ilans import ans, rans
from ilans.errors import FormatError, TruncatedStreamError, UnencodableSymbolError
from ilans.rans import BYTE8, WORD16, RenormStats, RenormVariant, SymbolTable

TOY = RenormVariant("toy-bit", 1, 16)


def toy_table():
    return SymbolTable([1, 3], scale_bits=2)


def random_table(rng, max_n=256, max_scale=16):
    n = int(rng.integers(1, max_n + 1))
    scale_bits = int(rng.integers(max(1, (n - 1).bit_length()), max_scale + 1))
    counts = rng.integers(0, 1000, size=n)
    counts[int(rng.integers(0, n))] += 1  # at least one present symbol
    return SymbolTable.from_counts(counts.tolist(), scale_bits)


def quantize_oracle(counts, scale_bits):
    """Independent largest-remainder reference using Fraction arithmetic."""
    m = 1 << scale_bits
    total = sum(counts)
    ideal = [Fraction(c * m, total) for c in counts]
    f = [max(1, int(ideal[i])) if counts[i] > 0 else 0 for i in range(len(counts))]
    while sum(f) < m:
        _, best = min((f[i] - ideal[i], i) for i in range(len(counts)) if counts[i] > 0)
        f[best] += 1
    while sum(f) > m:
        _, best = min((ideal[i] - f[i], i) for i in range(len(counts)) if f[i] > 1)
        f[best] -= 1
    return f


class TestQuantize:
    def test_exact_fit(self):
        assert rans.quantize([1, 3], 2) == [1, 3]

    def test_uniform(self):
        assert rans.quantize([1, 1, 1, 1], 2) == [1, 1, 1, 1]
        assert rans.quantize([9, 9, 9, 9], 2) == [1, 1, 1, 1]

    def test_rare_symbol_keeps_a_slot(self):
        # the floor wins over proportional rounding, deficit lands up top
        assert rans.quantize([10**6, 1], 14) == [16383, 1]

    def test_forced_uniform_when_slots_scarce(self):
        assert rans.quantize([1, 1, 1, 10**6], 2) == [1, 1, 1, 1]

    def test_zero_counts_get_zero_freq(self):
        f = rans.quantize([5, 0, 5, 0], 4)
        assert f[1] == 0 and f[3] == 0
        assert sum(f) == 16

    def test_alphabet_too_large_for_scale(self):
        with pytest.raises(ValueError, match="alphabet too large for scale"):
            rans.quantize([1, 1, 1, 1, 1], 2)

    def test_all_zero_counts_rejected(self):
        with pytest.raises(ValueError):
            rans.quantize([0, 0], 4)

    def test_matches_fraction_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            n = int(rng.integers(1, 40))
            scale_bits = int(rng.integers((n - 1).bit_length() or 1, 13))
            counts = rng.integers(0, 10000, size=n)
            counts[int(rng.integers(0, n))] += 1
            counts = counts.tolist()
            got = rans.quantize(counts, scale_bits)
            assert got == quantize_oracle(counts, scale_bits)
            assert sum(got) == 1 << scale_bits
            assert all(f >= 1 for f, c in zip(got, counts) if c > 0)


class TestBarePushPop:
    def test_push_value(self):
        assert rans.push_symbol(toy_table(), 1, 16) == 22

    def test_pop_value(self):
        assert rans.pop_symbol(toy_table(), 19) == (1, 14)

    def test_pop_inverts_push(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            table = random_table(rng, max_n=64, max_scale=12)
            for _ in range(50):
                state = int(rng.integers(0, 1 << 40))
                symbol = int(rng.integers(0, table.alphabet_size))
                if table.freq[symbol] == 0:
                    with pytest.raises(UnencodableSymbolError):
                        rans.push_symbol(table, symbol, state)
                    continue
                assert rans.pop_symbol(table, rans.push_symbol(table, symbol, state)) == (
                    symbol,
                    state,
                )

    def test_slot_layout(self):
        table = toy_table()
        assert table.slot_to_symbol == [0, 1, 1, 1]
        assert table.cum == [0, 1, 4]


class TestRenormCoding:
    def test_golden_encode_step(self):
        # threshold for b is 3 * (32 >> 2) = 24: state 28 spills one bit first
        sink = []
        state = rans.encode_symbol_renorm(28, 1, toy_table(), TOY, sink)
        assert state == 19
        assert sink == [0]

    def test_golden_decode_step(self):
        reader = ans.DigitReader([0])
        symbol, state = rans.decode_symbol_renorm(19, toy_table(), TOY, reader)
        assert (symbol, state) == (1, 28)

    def test_matches_framework_golden_trace(self):
        # the recast coder must reproduce test_ans's golden trace exactly
        coder = rans.rans_coder(toy_table(), TOY)
        final, digits = ans.encode_message(coder, [1, 0, 1, 1, 0], initial_state=16)
        assert (final, digits) == (19, [0, 1, 0, 0, 0])
        assert ans.decode_message(coder, final, digits, 5) == [1, 0, 1, 1, 0]

    def test_word16_single_spill_at_extremes(self):
        table = SymbolTable([1] + [0] * 254 + [(1 << 14) - 1], 14)
        sink = []
        state = rans.encode_symbol_renorm((1 << 32) - 1, 0, table, WORD16, sink)
        assert sink == [0xFFFF]  # exactly one 16-bit digit
        assert WORD16.lower_bound <= state < WORD16.state_limit

    def test_round_trip_both_variants(self):
        rng = np.random.default_rng(11)
        for variant, max_spill in ((WORD16, 1), (BYTE8, 3)):
            for _ in range(20):
                table = random_table(rng, max_n=100, max_scale=14)
                probs = table.freq_u32 / table.total
                msg = rng.choice(table.alphabet_size, size=500, p=probs).tolist()
                stats = RenormStats()
                state = variant.lower_bound
                sink = []
                for s in reversed(msg):
                    state = rans.encode_symbol_renorm(state, s, table, variant, sink, stats)
                reader = ans.DigitReader(sink[::-1])
                out = []
                for _ in range(len(msg)):
                    s, state = rans.decode_symbol_renorm(state, table, variant, reader, stats)
                    out.append(s)
                assert out == msg
                assert state == variant.lower_bound  # decoder unwinds to x0
                assert reader.exhausted()
                assert stats.max_encode_digits <= max_spill
                assert stats.max_decode_digits <= max_spill

    def test_truncated_refill(self):
        with pytest.raises(TruncatedStreamError):
            rans.decode_symbol_renorm(19, toy_table(), TOY, ans.DigitReader([]))


class TestPrecursorIntervals:
    def test_recast_toy_intervals(self):
        coder = rans.rans_coder(toy_table(), TOY)
        assert ans.precursor_set(coder, 0) == (4, 7)
        assert ans.precursor_set(coder, 1) == (12, 23)

    def test_threshold_is_precursor_top(self):
        rng = np.random.default_rng(5)
        for variant in (WORD16, BYTE8):
            for _ in range(10):
                table = random_table(rng, max_n=32, max_scale=10)
                coder = rans.rans_coder(table, variant)
                for s in range(table.alphabet_size):
                    f = table.freq[s]
                    if f == 0:
                        continue
                    lo, hi = ans.precursor_set(coder, s)
                    assert lo == f * variant.lower_bound // table.total
                    assert hi + 1 == rans.encode_threshold(table, variant, s)
                    assert ans.check_b_unique((lo, hi), variant.radix)


class TestVariants:
    def test_canonical_parameters(self):
        assert BYTE8.digit_bits == 8 and BYTE8.lower_bound == 1 << 23
        assert WORD16.digit_bits == 16 and WORD16.lower_bound == 1 << 16
        assert BYTE8.state_limit == 1 << 31
        assert WORD16.state_limit == 1 << 32

    def test_variant_validation(self):
        with pytest.raises(ValueError):
            RenormVariant("bad", 0, 16)
        with pytest.raises(ValueError):
            RenormVariant("bad", 17, 16)
        with pytest.raises(ValueError):
            RenormVariant("bad", 16, 1 << 17)  # states would exceed 32 bits

    def test_table_compatibility(self):
        misaligned = RenormVariant("odd", 1, 10)  # 10 is not a multiple of m=4
        with pytest.raises(ValueError):
            misaligned.check_table(toy_table())
        WORD16.check_table(toy_table())

    def test_tag_lookup(self):
        assert rans.variant_by_tag("byte8") is BYTE8
        assert rans.variant_by_tag("word16") is WORD16
        with pytest.raises(ValueError):
            rans.variant_by_tag("word32")


class TestTableSerialization:
    def test_golden_bytes(self):
        # scale_bits=2, n=2 (u16 LE), freqs 1 and 3 (u16 LE each)
        assert rans.serialize_table(toy_table()) == b"\x02\x02\x00\x01\x00\x03\x00"

    def test_round_trip(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            table = random_table(rng)
            blob = rans.serialize_table(table) + b"tail"
            parsed, offset = rans.parse_table(blob)
            assert parsed == table
            assert blob[offset:] == b"tail"

    def test_degenerate_full_scale_table_rejected(self):
        # a lone symbol at scale 16 needs f=65536, one more than u16 holds
        with pytest.raises(FormatError):
            rans.serialize_table(SymbolTable([1 << 16], 16))

    def test_parse_truncated(self):
        blob = rans.serialize_table(toy_table())
        with pytest.raises(TruncatedStreamError):
            rans.parse_table(blob[:-1])
        with pytest.raises(TruncatedStreamError):
            rans.parse_table(b"\x02")

    def test_parse_bad_sum(self):
        with pytest.raises(FormatError):
            rans.parse_table(b"\x02\x02\x00\x01\x00\x01\x00")  # sums to 2, not 4


class TestSymbolTable:
    def test_validation(self):
        with pytest.raises(ValueError):
            SymbolTable([], 2)
        with pytest.raises(ValueError):
            SymbolTable([1, 1], 0)
        with pytest.raises(ValueError):
            SymbolTable([2, 3], 2)  # wrong sum
        with pytest.raises(ValueError):
            SymbolTable([-1, 5], 2)
        with pytest.raises(ValueError):
            SymbolTable([1] * 257 + [65536 - 257], 16)

    def test_entropy_helpers(self):
        table = toy_table()
        expected = -(0.25 * np.log2(0.25) + 0.75 * np.log2(0.75))
        assert table.model_entropy_bits() == pytest.approx(expected)
        assert table.ideal_bits([0, 1]) == pytest.approx(2 + np.log2(4 / 3))
        with pytest.raises(UnencodableSymbolError):
            SymbolTable([4, 0], 2).ideal_bits([1])
