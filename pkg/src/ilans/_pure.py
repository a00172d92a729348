"""Pure-Python word16 kernels, signature-compatible with ilans._core.

These are the fallback when the compiled extension is not built and the
baseline side of the backend benchmark. Hot loops run on plain ints and
lists; numpy only at the edges.
"""

import numpy as np

from .errors import TruncatedStreamError, UnencodableSymbolError

_LOW = 1 << 16


def encode_interleaved_u16(msg, freq, cum, scale_bits, n_lanes):
    """Backward interleaved encode. Returns (payload u16 array in decoder
    read order, final lane states u32 array)."""
    msg_l = np.asarray(msg, dtype=np.uint8).tolist()
    freq_l = np.asarray(freq).tolist()
    cum_l = np.asarray(cum).tolist()
    n = len(msg_l)
    shift = 32 - scale_bits
    states = [_LOW] * n_lanes
    buf = [0] * n  # at most one digit per symbol
    pos = n
    for i in range(n - 1, -1, -1):
        s = msg_l[i]
        f = freq_l[s]
        if f == 0:
            raise UnencodableSymbolError(f"symbol {s} has frequency 0")
        lane = i % n_lanes
        x = states[lane]
        if x >= f << shift:
            pos -= 1
            buf[pos] = x & 0xFFFF
            x >>= 16
        states[lane] = (x // f << scale_bits) + cum_l[s] + x % f
    payload = np.array(buf[pos:], dtype=np.uint16)
    return payload, np.array(states, dtype=np.uint32)


def decode_interleaved_u16(payload, states, slot_sym, freq, cum, scale_bits, msg_len, n_lanes):
    """Forward interleaved decode. Returns (message u8 array, words read)."""
    pay_l = np.asarray(payload).tolist()
    states_l = np.asarray(states).tolist()
    slot_l = np.asarray(slot_sym).tolist()
    freq_l = np.asarray(freq).tolist()
    cum_l = np.asarray(cum).tolist()
    mask = (1 << scale_bits) - 1
    pay_len = len(pay_l)
    pos = 0
    out = [0] * msg_len
    for i in range(msg_len):
        lane = i % n_lanes
        x = states_l[lane]
        slot = x & mask
        s = slot_l[slot]
        out[i] = s
        x = freq_l[s] * (x >> scale_bits) + slot - cum_l[s]
        if x < _LOW:
            if pos >= pay_len:
                raise TruncatedStreamError("payload exhausted mid-decode")
            x = (x << 16) | pay_l[pos]
            pos += 1
        states_l[lane] = x
    return np.array(out, dtype=np.uint8), pos


def decode_lanes_u16(payload, states, slot_sym, freq, cum, scale_bits, msg_len, n_lanes):
    """Group-at-a-time lane decode: pop every lane, then service the lanes
    that renormalize with one packed load in ascending lane order. Output is
    byte-identical to decode_interleaved_u16."""
    pay_l = np.asarray(payload).tolist()
    xs = np.asarray(states).tolist()
    slot_l = np.asarray(slot_sym).tolist()
    freq_l = np.asarray(freq).tolist()
    cum_l = np.asarray(cum).tolist()
    mask = (1 << scale_bits) - 1
    pay_len = len(pay_l)
    pos = 0
    out = [0] * msg_len
    base = 0
    while base < msg_len:
        active = min(n_lanes, msg_len - base)
        pending = []
        for lane in range(active):
            x = xs[lane]
            slot = x & mask
            s = slot_l[slot]
            out[base + lane] = s
            x = freq_l[s] * (x >> scale_bits) + slot - cum_l[s]
            xs[lane] = x
            if x < _LOW:
                pending.append(lane)
        if pos + len(pending) > pay_len:
            raise TruncatedStreamError("payload exhausted mid-decode")
        for offset, lane in enumerate(pending):
            xs[lane] = (xs[lane] << 16) | pay_l[pos + offset]
        pos += len(pending)
        base += active
    return np.array(out, dtype=np.uint8), pos
