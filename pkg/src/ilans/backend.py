"""Kernel selection: compiled extension when built, pure Python otherwise.

Set ILANS_BACKEND=pure (or =ext) to override the default choice. The active
backend only covers the word16 hot paths; everything else is plain Python
regardless.
"""

import os
import warnings
from dataclasses import dataclass
from typing import Callable

from . import _pure


@dataclass(frozen=True)
class Backend:
    name: str
    encode_interleaved_u16: Callable
    decode_interleaved_u16: Callable
    decode_lanes_u16: Callable


PURE = Backend(
    "pure",
    _pure.encode_interleaved_u16,
    _pure.decode_interleaved_u16,
    _pure.decode_lanes_u16,
)

try:
    from . import _core
except ImportError:
    EXT = None
else:
    EXT = Backend(
        "ext",
        _core.encode_interleaved_u16,
        _core.decode_interleaved_u16,
        _core.decode_lanes_u16,
    )


def _pick_default() -> Backend:
    forced = os.environ.get("ILANS_BACKEND", "").strip().lower()
    if forced == "pure":
        return PURE
    if forced == "ext":
        if EXT is None:
            warnings.warn(
                "ILANS_BACKEND=ext but ilans._core is not built; using pure backend",
                RuntimeWarning,
            )
            return PURE
        return EXT
    if forced:
        warnings.warn(f"unknown ILANS_BACKEND={forced!r}; using default", RuntimeWarning)
    return EXT if EXT is not None else PURE


ACTIVE = _pick_default()


def get(name: str | None = None) -> Backend:
    """Resolve a backend by name; None means the import-time default."""
    if name is None or name == "auto":
        return ACTIVE
    if name == "pure":
        return PURE
    if name == "ext":
        if EXT is None:
            raise ValueError("compiled backend requested but ilans._core is not built")
        return EXT
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    return ["pure", "ext"] if EXT is not None else ["pure"]
