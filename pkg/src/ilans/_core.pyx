# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled word16 kernels. Same contracts as ilans._pure; see there for the
readable version. Lane counts 1 and 2 get register-resident decode loops."""

import numpy as np

from libc.stdint cimport uint8_t, uint16_t, uint32_t, uint64_t

from ilans.errors import TruncatedStreamError, UnencodableSymbolError

DEF LOW = 65536


def encode_interleaved_u16(msg, freq, cum, int scale_bits, int n_lanes):
    cdef const uint8_t[::1] msg_v = np.ascontiguousarray(msg, dtype=np.uint8)
    cdef const uint32_t[::1] freq_v = np.ascontiguousarray(freq, dtype=np.uint32)
    cdef const uint32_t[::1] cum_v = np.ascontiguousarray(cum, dtype=np.uint32)
    cdef Py_ssize_t n = msg_v.shape[0]
    payload_arr = np.empty(n, dtype=np.uint16)  # at most one digit per symbol
    states_arr = np.empty(n_lanes, dtype=np.uint32)
    cdef uint16_t[::1] buf = payload_arr
    cdef uint32_t[::1] states = states_arr
    cdef Py_ssize_t pos = n
    cdef Py_ssize_t i
    cdef int lane, shift = 32 - scale_bits
    cdef uint32_t s, f, x
    cdef uint64_t coded
    for lane in range(n_lanes):
        states[lane] = LOW
    for i in range(n - 1, -1, -1):
        s = msg_v[i]
        f = freq_v[s]
        if f == 0:
            raise UnencodableSymbolError(f"symbol {s} has frequency 0")
        lane = i % n_lanes
        x = states[lane]
        if x >= (<uint64_t>f) << shift:
            pos -= 1
            buf[pos] = <uint16_t>(x & 0xFFFF)
            x >>= 16
        coded = ((<uint64_t>(x // f)) << scale_bits) + cum_v[s] + x % f
        states[lane] = <uint32_t>coded
    return payload_arr[pos:].copy(), states_arr


def decode_interleaved_u16(payload, states, slot_sym, freq, cum,
                           int scale_bits, Py_ssize_t msg_len, int n_lanes):
    cdef const uint16_t[::1] pay = np.ascontiguousarray(payload, dtype=np.uint16)
    cdef const uint8_t[::1] slot_v = np.ascontiguousarray(slot_sym, dtype=np.uint8)
    cdef const uint32_t[::1] freq_v = np.ascontiguousarray(freq, dtype=np.uint32)
    cdef const uint32_t[::1] cum_v = np.ascontiguousarray(cum, dtype=np.uint32)
    states_l = np.array(states, dtype=np.uint32)
    cdef uint32_t[::1] xs = states_l
    out_arr = np.empty(msg_len, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef Py_ssize_t pay_len = pay.shape[0]
    cdef Py_ssize_t pos = 0, i = 0
    cdef uint32_t mask = (1 << scale_bits) - 1
    cdef uint32_t x, x0, x1, slot, s
    cdef int lane

    if n_lanes == 1:
        x = xs[0]
        for i in range(msg_len):
            slot = x & mask
            s = slot_v[slot]
            out[i] = <uint8_t>s
            x = <uint32_t>((<uint64_t>freq_v[s]) * (x >> scale_bits) + slot - cum_v[s])
            if x < LOW:
                if pos >= pay_len:
                    raise TruncatedStreamError("payload exhausted mid-decode")
                x = (x << 16) | pay[pos]
                pos += 1
        xs[0] = x
        return out_arr, pos

    if n_lanes == 2:
        x0 = xs[0]
        x1 = xs[1]
        while i + 2 <= msg_len:
            slot = x0 & mask
            s = slot_v[slot]
            out[i] = <uint8_t>s
            x0 = <uint32_t>((<uint64_t>freq_v[s]) * (x0 >> scale_bits) + slot - cum_v[s])
            if x0 < LOW:
                if pos >= pay_len:
                    raise TruncatedStreamError("payload exhausted mid-decode")
                x0 = (x0 << 16) | pay[pos]
                pos += 1
            slot = x1 & mask
            s = slot_v[slot]
            out[i + 1] = <uint8_t>s
            x1 = <uint32_t>((<uint64_t>freq_v[s]) * (x1 >> scale_bits) + slot - cum_v[s])
            if x1 < LOW:
                if pos >= pay_len:
                    raise TruncatedStreamError("payload exhausted mid-decode")
                x1 = (x1 << 16) | pay[pos]
                pos += 1
            i += 2
        if i < msg_len:  # odd tail lands on lane 0
            slot = x0 & mask
            s = slot_v[slot]
            out[i] = <uint8_t>s
            x0 = <uint32_t>((<uint64_t>freq_v[s]) * (x0 >> scale_bits) + slot - cum_v[s])
            if x0 < LOW:
                if pos >= pay_len:
                    raise TruncatedStreamError("payload exhausted mid-decode")
                x0 = (x0 << 16) | pay[pos]
                pos += 1
        xs[0] = x0
        xs[1] = x1
        return out_arr, pos

    for i in range(msg_len):
        lane = i % n_lanes
        x = xs[lane]
        slot = x & mask
        s = slot_v[slot]
        out[i] = <uint8_t>s
        x = <uint32_t>((<uint64_t>freq_v[s]) * (x >> scale_bits) + slot - cum_v[s])
        if x < LOW:
            if pos >= pay_len:
                raise TruncatedStreamError("payload exhausted mid-decode")
            x = (x << 16) | pay[pos]
            pos += 1
        xs[lane] = x
    return out_arr, pos


def decode_lanes_u16(payload, states, slot_sym, freq, cum,
                     int scale_bits, Py_ssize_t msg_len, int n_lanes):
    # group-at-a-time: pop all lanes, then one packed load for the group
    cdef const uint16_t[::1] pay = np.ascontiguousarray(payload, dtype=np.uint16)
    cdef const uint8_t[::1] slot_v = np.ascontiguousarray(slot_sym, dtype=np.uint8)
    cdef const uint32_t[::1] freq_v = np.ascontiguousarray(freq, dtype=np.uint32)
    cdef const uint32_t[::1] cum_v = np.ascontiguousarray(cum, dtype=np.uint32)
    cdef uint32_t xs[32]
    cdef int pending[32]
    cdef Py_ssize_t pay_len = pay.shape[0]
    cdef Py_ssize_t pos = 0, base = 0
    cdef uint32_t mask = (1 << scale_bits) - 1
    cdef uint32_t x, slot, s
    cdef int lane, active, cnt, j
    if n_lanes > 32:
        raise ValueError("at most 32 lanes")
    states_arr = np.array(states, dtype=np.uint32)
    for lane in range(n_lanes):
        xs[lane] = states_arr[lane]
    out_arr = np.empty(msg_len, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    while base < msg_len:
        active = n_lanes if msg_len - base >= n_lanes else <int>(msg_len - base)
        cnt = 0
        for lane in range(active):
            x = xs[lane]
            slot = x & mask
            s = slot_v[slot]
            out[base + lane] = <uint8_t>s
            x = <uint32_t>((<uint64_t>freq_v[s]) * (x >> scale_bits) + slot - cum_v[s])
            xs[lane] = x
            if x < LOW:
                pending[cnt] = lane
                cnt += 1
        if pos + cnt > pay_len:
            raise TruncatedStreamError("payload exhausted mid-decode")
        for j in range(cnt):
            lane = pending[j]
            xs[lane] = (xs[lane] << 16) | pay[pos + j]
        pos += cnt
        base += active
    for lane in range(n_lanes):
        states_arr[lane] = xs[lane]
    return out_arr, pos
