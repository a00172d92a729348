"""Command line front end: encode/decode/verify/bench/inspect.

Exit codes: 0 success, 1 verification failure, 2 malformed input or bad
arguments, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import backend as backend_mod
from . import bench as bench_mod
from .errors import CodecError
from .interleave import (
    MAGIC,
    Container,
    decode_interleaved,
    decode_interleaved_steps,
    encode_interleaved,
)
from .lanes import MAX_LANES, decode_lanes_full, decode_lanes_steps
from .rans import SymbolTable, variant_by_tag

VERIFY_LANE_COUNTS = (1, 2, 4, 8)


def _build_table(data: bytes, scale_bits: int) -> SymbolTable:
    if not data:
        # nothing to model; any valid table decodes an empty message
        return SymbolTable.from_counts([1, 1], scale_bits)
    msg = np.frombuffer(data, dtype=np.uint8)
    counts = np.bincount(msg, minlength=int(msg.max()) + 1)
    return SymbolTable.from_counts(counts.tolist(), scale_bits)


def cmd_encode(args) -> int:
    data = Path(args.input).read_bytes()
    table = _build_table(data, args.scale_bits)
    variant = variant_by_tag(args.variant)
    container = encode_interleaved(data, table, args.lanes, variant)
    blob = container.to_bytes()
    Path(args.output).write_bytes(blob)
    bpb = 8 * len(blob) / len(data) if data else 0.0
    print(
        f"{args.input}: {len(data)} -> {len(blob)} bytes "
        f"({bpb:.3f} bits/byte, {args.variant}, {args.lanes} lanes)"
    )
    return 0


def cmd_decode(args) -> int:
    container = Container.from_bytes(Path(args.input).read_bytes())
    if args.mode == "lanes":
        msg = decode_lanes_full(container)
    else:
        msg = decode_interleaved(container)
    Path(args.output).write_bytes(msg.tobytes())
    print(f"{args.input}: decoded {len(msg)} bytes ({args.mode})")
    return 0


def _verify_container(raw: bytes) -> list[tuple[str, bool, str]]:
    checks = []
    try:
        container = Container.from_bytes(raw)
    except CodecError as exc:
        return [("parse", False, str(exc))]
    checks.append(("parse", True, f"{container.variant.tag}, {container.lane_count} lanes"))
    try:
        serial = decode_interleaved(container)
        ok = len(serial) == container.message_length
        checks.append(("serial-decode", ok, f"{len(serial)} symbols"))
    except CodecError as exc:
        checks.append(("serial-decode", False, str(exc)))
        return checks
    if container.variant.tag == "word16" and container.lane_count <= MAX_LANES:
        try:
            laned = decode_lanes_full(container)
            ok = bool(np.array_equal(serial, laned))
            checks.append(("lane-decode", ok, "matches serial" if ok else "MISMATCH"))
        except CodecError as exc:
            checks.append(("lane-decode", False, str(exc)))
    return checks


def _verify_raw(data: bytes) -> list[tuple[str, bool, str]]:
    checks = []
    for n in VERIFY_LANE_COUNTS:
        table = _build_table(data, 14)
        container = encode_interleaved(data, table, n)
        serial = decode_interleaved(container)
        checks.append(
            ("round-trip[word16 N=%d]" % n, serial.tobytes() == data, f"{len(data)} bytes")
        )
        laned = decode_lanes_full(container)
        checks.append(
            ("lane-round-trip[N=%d]" % n, laned.tobytes() == data, f"{len(data)} bytes")
        )
        lock = all(
            a == b
            for a, b in zip(
                decode_interleaved_steps(container), decode_lanes_steps(container)
            )
        )
        checks.append(("lockstep[N=%d]" % n, lock, "states+reads per group"))
    byte8 = encode_interleaved(data, _build_table(data, 14), 2, variant_by_tag("byte8"))
    checks.append(
        ("round-trip[byte8 N=2]", decode_interleaved(byte8).tobytes() == data, "")
    )
    return checks


def cmd_verify(args) -> int:
    raw = Path(args.input).read_bytes()
    if raw[:4] == MAGIC:
        checks = _verify_container(raw)
    else:
        checks = _verify_raw(raw)
    failed = 0
    for name, ok, detail in checks:
        status = "ok  " if ok else "FAIL"
        print(f"{status} {name}" + (f": {detail}" if detail else ""))
        failed += not ok
    if failed:
        print(f"{failed}/{len(checks)} checks failed")
        return 1
    print(f"all {len(checks)} checks passed")
    return 0


def cmd_inspect(args) -> int:
    container = Container.from_bytes(Path(args.input).read_bytes())
    table = container.table
    nonzero = sum(1 for f in table.freq if f > 0)
    print(f"container:        {args.input}")
    print(f"variant:          {container.variant.tag}")
    print(f"lane count:       {container.lane_count}")
    print(f"message length:   {container.message_length}")
    print(f"scale bits:       {table.scale_bits}")
    print(f"alphabet:         {table.alphabet_size} symbols ({nonzero} with f > 0)")
    print(f"header bytes:     {container.header_nbytes}")
    print(f"payload bytes:    {container.payload_nbytes}")
    print(f"entropy estimate: {table.model_entropy_bits():.4f} bits/symbol")
    return 0


def cmd_bench(args) -> int:
    if args.backend == "both":
        backends = backend_mod.available()
        if len(backends) < 2:
            print("note: compiled backend not built; benching pure only")
    elif args.backend == "auto":
        backends = [backend_mod.ACTIVE.name]
    else:
        backends = [backend_mod.get(args.backend).name]
    all_rows = []
    for path in args.inputs:
        data = Path(path).read_bytes()
        all_rows.extend(
            bench_mod.bench_data(
                data,
                label=Path(path).name,
                lanes=args.lanes,
                repeats=args.repeats,
                backends=backends,
            )
        )
    print(bench_mod.format_table(all_rows))
    for line in bench_mod.machine_lines(all_rows):
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ilans", description="interleaved rANS codec toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="compress a file into a container")
    enc.add_argument("input")
    enc.add_argument("output")
    enc.add_argument("--lanes", type=int, default=8, help="interleaved lane count")
    enc.add_argument(
        "--variant", choices=["byte8", "word16"], default="word16",
        help="renormalization variant",
    )
    enc.add_argument(
        "--scale-bits", type=int, default=14, dest="scale_bits",
        help="frequency table precision (1..16)",
    )
    enc.set_defaults(fn=cmd_encode)

    dec = sub.add_parser("decode", help="decompress a container")
    dec.add_argument("input")
    dec.add_argument("output")
    dec.add_argument(
        "--mode", choices=["serial", "lanes"], default="serial",
        help="serial interleaved decoder or lane-parallel decoder",
    )
    dec.set_defaults(fn=cmd_decode)

    ver = sub.add_parser(
        "verify", help="self-check a raw file (or integrity-check a container)"
    )
    ver.add_argument("input")
    ver.set_defaults(fn=cmd_verify)

    ins = sub.add_parser("inspect", help="print container parameters")
    ins.add_argument("input")
    ins.set_defaults(fn=cmd_inspect)

    ben = sub.add_parser("bench", help="measure decode throughput")
    ben.add_argument("inputs", nargs="+")
    ben.add_argument("--lanes", type=int, default=8, help="lane-decoder width")
    ben.add_argument("--repeats", type=int, default=5, help="timing repetitions")
    ben.add_argument(
        "--backend", choices=["auto", "pure", "ext", "both"], default="auto"
    )
    ben.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CodecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
