"""JSON encodings with decimal-string numerics.

Binary floats are never written raw: every real number is a decimal string
carrying the full precision of the value, so files round-trip exactly at the
stated ``precision_bits``.  Keys are sorted and index lists are ordered
lexicographically, so equal inputs give byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

from .fiducial_search import Fiducial, SymmetryType
from .overlaps import OverlapTable
from .wh_group import DisplacementIndex, make_context

__all__ = [
    "FORMAT_VERSION",
    "FormatError",
    "decimal_digits",
    "to_decimal",
    "dumps",
    "load_json",
    "fiducial_to_dict",
    "fiducial_from_dict",
    "overlaps_to_dict",
    "overlaps_from_dict",
    "sha256_hex",
]

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed or incompatible JSON input."""


def decimal_digits(bits: int) -> int:
    """Significant digits that round-trip a ``bits``-bit mantissa."""
    return int(math.ceil(bits * math.log10(2))) + 2


def to_decimal(x, bits: int) -> str:
    import mpmath

    return mpmath.nstr(x, decimal_digits(bits), strip_zeros=False, min_fixed=1, max_fixed=0)


def _pair(z, bits: int) -> list[str]:
    return [to_decimal(z.real, bits), to_decimal(z.imag, bits)]


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode()
    return hashlib.sha256(data).hexdigest()


def load_json(path: str | Path) -> dict:
    """Read a JSON file, turning syntax errors into :class:`FormatError` with line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _check_version(data: dict) -> None:
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FormatError(f"file format version {version} is not supported (expected {FORMAT_VERSION})")


def _require(data: dict, *keys):
    missing = [k for k in keys if k not in data]
    if missing:
        raise FormatError(f"missing keys: {', '.join(missing)}")


def fiducial_to_dict(f: Fiducial) -> dict:
    bits = f.precision_bits
    return {
        "format_version": FORMAT_VERSION,
        "d": f.dimension,
        "precision_bits": bits,
        "vector": [_pair(z, bits) for z in f.vector],
        "residual": to_decimal(f.residual, bits),
        "seed": f.seed,
        "symmetry_type": SymmetryType(f.symmetry_type).value,
        "converged": bool(f.converged),
    }


def fiducial_from_dict(data: dict) -> Fiducial:
    _check_version(data)
    _require(data, "d", "precision_bits", "vector", "residual", "seed", "symmetry_type")
    d, bits = int(data["d"]), int(data["precision_bits"])
    ctx = make_context(d, bits)
    mp = ctx.mp
    try:
        vector = tuple(mp.mpc(mp.mpf(re), mp.mpf(im)) for re, im in data["vector"])
        residual = mp.mpf(data["residual"])
        kind = SymmetryType(data["symmetry_type"])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad fiducial field: {exc}") from None
    if len(vector) != d:
        raise FormatError(f"vector has {len(vector)} entries, expected {d}")
    return Fiducial(vector, d, residual, int(data["seed"]), kind, bits, bool(data.get("converged", True)))


def overlaps_to_dict(t: OverlapTable) -> dict:
    bits = t.ctx.precision_bits
    return {
        "format_version": FORMAT_VERSION,
        "d": t.d,
        "precision_bits": bits,
        "residual": to_decimal(t.residual, bits),
        "entries": [
            {"p": [p.p1, p.p2], "overlap": _pair(t.entries[p], bits), "phase": _pair(t.phases[p], bits)}
            for p in t.indices()
        ],
    }


def overlaps_from_dict(data: dict) -> OverlapTable:
    _check_version(data)
    _require(data, "d", "entries")
    d = int(data["d"])
    bits = int(data.get("precision_bits", 53))
    ctx = make_context(d, bits)
    mp = ctx.mp
    entries = {}
    try:
        for item in data["entries"]:
            p = DisplacementIndex.of(item["p"], ctx.d_prime)
            re, im = item["overlap"]
            entries[p] = mp.mpc(mp.mpf(re), mp.mpf(im))
        residual = mp.mpf(data.get("residual", "0"))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad overlap entry: {exc}") from None
    return OverlapTable(ctx, entries, residual)
