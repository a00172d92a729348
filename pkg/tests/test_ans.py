"""Framework-level tests against the hand-traced two-symbol reference coder.

Every literal in TestGoldenTrace was computed by hand from the coder
definition (C(a,x) = 4x, C(b,x) = 4*(x//3) + x%3 + 1, interval [16,32),
bit digits) before the implementation existed.
"""

import warnings

import numpy as np
import pytest

from ilans import ans
from ilans.ans import TOY_A as A
from ilans.ans import TOY_B as B
from ilans.errors import (
    NotBUniqueError,
    TrailingGarbageWarning,
    TruncatedStreamError,
    UnencodableSymbolError,
)

BABBA = [B, A, B, B, A]


class TestGoldenTrace:
    def test_encode_babba(self):
        coder = ans.toy_coder()
        trace = []
        final, digits = ans.encode_message(coder, BABBA, initial_state=16, trace=trace)
        assert final == 19
        assert digits == [0, 1, 0, 0, 0]  # decoder read order
        # states after each backward step: a, b, b, a, b
        assert trace == [16, 16, 22, 30, 28, 19]

    def test_decode_babba(self):
        coder = ans.toy_coder()
        trace = []
        out = ans.decode_message(coder, 19, [0, 1, 0, 0, 0], 5, trace=trace)
        assert out == BABBA
        assert trace == [19, 28, 30, 22, 16, 16]

    def test_state_symmetry(self):
        # decoder states are the encoder states in reverse
        coder = ans.toy_coder()
        enc_trace, dec_trace = [], []
        final, digits = ans.encode_message(coder, BABBA, trace=enc_trace)
        ans.decode_message(coder, final, digits, len(BABBA), trace=dec_trace)
        assert dec_trace == enc_trace[::-1]

    def test_single_symbol_message(self):
        coder = ans.toy_coder()
        final, digits = ans.encode_message(coder, [A], initial_state=16)
        assert (final, digits) == (16, [0, 0])
        assert ans.decode_message(coder, final, digits, 1) == [A]

    def test_encode_step_values(self):
        coder = ans.toy_coder()
        sink = []
        # b from 28: spills one digit (28 -> 14), then codes to 19
        assert ans.encode_symbol(coder, B, 28, sink) == 19
        assert sink == [0]

    def test_decode_step_values(self):
        coder = ans.toy_coder()
        source = ans.DigitReader([1, 0])
        symbol, state = ans.decode_symbol(coder, 28, source)
        assert (symbol, state) == (A, 30)
        assert source.exhausted()


class TestPrecursorSets:
    def test_toy_intervals(self):
        coder = ans.toy_coder()
        assert ans.precursor_set(coder, A) == (4, 7)
        assert ans.precursor_set(coder, B) == (12, 23)

    def test_b_uniqueness(self):
        assert ans.check_b_unique((4, 7), 2)
        assert ans.check_b_unique((12, 23), 2)
        # the same B interval is not 4-unique: doubling the radix breaks it
        assert not ans.check_b_unique((12, 23), 4)
        assert not ans.check_b_unique((0, 1), 2)
        assert not ans.check_b_unique((5, 11), 2)

    def test_identity_coder_is_b_unique(self):
        # one-symbol coder C(s,x) = x: precursor set is the whole interval
        coder = ans.Coder(1, lambda s, x: x, lambda x: (0, x), 16, 2)
        interval = ans.precursor_set(coder, 0)
        assert interval == (16, 31)
        assert ans.check_b_unique(interval, 2)

    def test_empty_precursor_set(self):
        # C(s,x) = 64x jumps straight over [16, 32)
        coder = ans.Coder(1, lambda s, x: 64 * x, lambda x: (0, x // 64), 16, 2)
        with pytest.raises(UnencodableSymbolError):
            ans.precursor_set(coder, 0)


class TestProperties:
    def test_round_trip_random(self):
        coder = ans.toy_coder()
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(0, 80))
            msg = rng.integers(0, 2, size=n).tolist()
            x0 = int(rng.integers(16, 32))
            final, digits = ans.encode_message(coder, msg, initial_state=x0)
            assert coder.in_interval(final)
            out = ans.decode_message(coder, final, digits, n)
            assert out == msg

    def test_digit_spill_bound(self):
        # no single symbol may spill more than ceil(log_b(b*L)) + 1 digits
        coder = ans.toy_coder()
        rng = np.random.default_rng(7)
        bound = coder.max_digits_per_symbol
        assert bound == 6
        for _ in range(500):
            sink = []
            state = int(rng.integers(16, 32))
            symbol = int(rng.integers(0, 2))
            ans.encode_symbol(coder, symbol, state, sink)
            assert len(sink) <= bound

    def test_growth_ratio(self):
        # code(s, x) / x tracks 1/p(s) for states in the interval
        coder = ans.toy_coder()
        for x in range(16, 32):
            assert coder.code(A, x) / x == 4.0
            ratio = coder.code(B, x) / x
            assert 4 / 3 < ratio <= 4 / 3 + 1 / 16

    def test_decoder_inverts_coder(self):
        coder = ans.toy_coder()
        for x in range(0, 4096):
            for s in (A, B):
                assert coder.decode(coder.code(s, x)) == (s, x)


class TestErrors:
    def test_truncated_stream(self):
        coder = ans.toy_coder()
        with pytest.raises(TruncatedStreamError):
            ans.decode_message(coder, 16, [0], 1)

    def test_trailing_garbage_warning(self):
        coder = ans.toy_coder()
        with pytest.warns(TrailingGarbageWarning):
            out = ans.decode_message(coder, 16, [0, 0, 1, 1], 1)
        assert out == [A]

    def test_clean_decode_does_not_warn(self):
        coder = ans.toy_coder()
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            ans.decode_message(coder, 19, [0, 1, 0, 0, 0], 5)

    def test_non_b_unique_encode_raises(self):
        coder = ans.Coder(1, lambda s, x: 64 * x, lambda x: (0, x // 64), 16, 2)
        with pytest.raises(NotBUniqueError):
            ans.encode_symbol(coder, 0, 16, [])

    def test_decode_overshoot_raises(self):
        coder = ans.Coder(1, lambda s, x: x, lambda x: (0, 2 * x), 16, 2)
        with pytest.raises(NotBUniqueError):
            ans.decode_symbol(coder, 31, ans.DigitReader([]))

    def test_symbol_out_of_alphabet(self):
        coder = ans.toy_coder()
        with pytest.raises(ValueError):
            ans.encode_symbol(coder, 2, 16, [])

    def test_bad_initial_state(self):
        coder = ans.toy_coder()
        with pytest.raises(ValueError):
            ans.encode_message(coder, [A], initial_state=15)
        with pytest.raises(ValueError):
            ans.decode_message(coder, 32, [], 0)
