"""Decode-throughput measurement behind `ilans bench`.

Each mode encodes its own container (serial N=1, two-way N=2, and an N-way
lane-decoded variant), then times repeated full decodes and keeps the best
wall time. Throughput is raw bytes per second, so ratios across modes are
the decode speed-ups.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import backend as backend_mod
from .errors import CodecError
from .interleave import decode_interleaved, encode_interleaved
from .lanes import decode_lanes_full
from .rans import SymbolTable

TINY_BYTES = 1 << 18  # below this, best-of timing is mostly warmup noise


@dataclass
class BenchRow:
    label: str
    mode: str
    backend: str
    raw_bytes: int
    compressed_bytes: int
    entropy_bits_per_byte: float
    seconds: float
    mib_per_s: float
    speedup: float  # decode speed relative to serial on the same backend


def byte_entropy(msg: np.ndarray) -> float:
    """Order-0 entropy of a byte array, bits per byte."""
    if len(msg) == 0:
        return 0.0
    counts = np.bincount(msg, minlength=256)
    p = counts[counts > 0].astype(np.float64) / len(msg)
    return float(-(p * np.log2(p)).sum())


def _table_for(msg: np.ndarray, scale_bits: int) -> SymbolTable:
    if len(msg) == 0:
        return SymbolTable.from_counts([1, 1], scale_bits)
    counts = np.bincount(msg, minlength=int(msg.max()) + 1)
    return SymbolTable.from_counts(counts.tolist(), scale_bits)


def _best_time(fn, repeats: int) -> float:
    fn()  # warmup
    best = float("inf")
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_data(
    data: bytes,
    label: str = "data",
    lanes: int = 8,
    repeats: int = 5,
    backends=None,
    scale_bits: int = 14,
) -> list[BenchRow]:
    msg = np.frombuffer(data, dtype=np.uint8)
    table = _table_for(msg, scale_bits)
    entropy = byte_entropy(msg)
    if backends is None:
        backends = [backend_mod.ACTIVE.name]
    modes = [
        ("serial", 1, False),
        ("2way", 2, False),
        (f"{lanes}way-lanes", lanes, True),
    ]
    rows = []
    for backend in backends:
        serial_seconds = None
        for mode, n, use_lanes in modes:
            container = encode_interleaved(msg, table, n, backend=backend)
            compressed = len(container.to_bytes())
            if use_lanes:
                decode = lambda: decode_lanes_full(container, backend=backend)
            else:
                decode = lambda: decode_interleaved(container, backend=backend)
            if not np.array_equal(decode(), msg):
                raise CodecError(f"bench round-trip mismatch in mode {mode}")
            seconds = _best_time(decode, repeats)
            if mode == "serial":
                serial_seconds = seconds
            mib = len(msg) / (1 << 20) / seconds if seconds > 0 else 0.0
            rows.append(
                BenchRow(
                    label=label,
                    mode=mode,
                    backend=backend,
                    raw_bytes=len(msg),
                    compressed_bytes=compressed,
                    entropy_bits_per_byte=entropy,
                    seconds=seconds,
                    mib_per_s=mib,
                    speedup=serial_seconds / seconds if seconds > 0 else 0.0,
                )
            )
    return rows


def format_table(rows: list[BenchRow]) -> str:
    header = (
        f"{'file':<20} {'mode':<12} {'backend':<8} {'raw':>10} {'comp':>10} "
        f"{'H(bpb)':>7} {'MiB/s':>9} {'vs serial':>9}"
    )
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.label:<20.20} {r.mode:<12} {r.backend:<8} {r.raw_bytes:>10} "
            f"{r.compressed_bytes:>10} {r.entropy_bits_per_byte:>7.3f} "
            f"{r.mib_per_s:>9.1f} {r.speedup:>8.2f}x"
        )
    if any(r.raw_bytes < TINY_BYTES for r in rows):
        lines.append("note: tiny input(s); timings dominated by warmup noise")
    return "\n".join(lines)


def machine_lines(rows: list[BenchRow]) -> list[str]:
    """Stable tab-separated rows for scripts (prefixed, one per row)."""
    out = ["#bench\tlabel\tmode\tbackend\traw_bytes\tcompressed_bytes\tentropy_bpb\tseconds\tmib_per_s\tspeedup"]
    for r in rows:
        out.append(
            "bench\t%s\t%s\t%s\t%d\t%d\t%.6f\t%.9f\t%.3f\t%.4f"
            % (
                r.label,
                r.mode,
                r.backend,
                r.raw_bytes,
                r.compressed_bytes,
                r.entropy_bits_per_byte,
                r.seconds,
                r.mib_per_s,
                r.speedup,
            )
        )
    return out
