"""Command-line front end.

Each subcommand parses its inputs, calls one library operation and writes
JSON.  Exit codes: 0 success, 1 invalid input or domain error, 2 an honest
negative result (unconverged search, failed verification, uncertified
recognition).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .fiducial_search import POLISH_ENTRY_RESIDUAL, PolishError, SearchConfig, SymmetryType, search, sic_residual
from .number_theory import dimension_sequence, dimension_towers, sic_discriminant
from .overlaps import (
    CONVERGENCE_THRESHOLD,
    compute_overlaps,
    overlap_orbit_partition,
    stability_group,
)
from .recognition import RecognitionConfig, default_max_degree, recognize_overlap_phases
from .serialization import (
    FormatError,
    dumps,
    fiducial_from_dict,
    fiducial_to_dict,
    load_json,
    overlaps_from_dict,
    overlaps_to_dict,
    sha256_hex,
    to_decimal,
)
from .wh_group import fa_matrix, make_context, zauner_matrix

PRECISION_ENV = "SICNUM_PRECISION_BITS"
FALLBACK_BITS = 256

EXIT_OK, EXIT_DOMAIN, EXIT_NEGATIVE = 0, 1, 2


class NegativeResult(Exception):
    """Carries a report that completed but did not meet its target."""

    def __init__(self, payload: dict, message: str):
        super().__init__(message)
        self.payload = payload


@dataclass
class RunManifest:
    """Provenance of one CLI invocation.

    ``run_id`` hashes the deterministic fields only, so repeated runs share
    it. Input files count by content, not location; timestamps, paths and
    output digests live in the sidecar file.
    """

    command: list
    config: dict
    seed: int | None
    tool_version: str
    input_digests: dict = field(default_factory=dict)
    output_digests: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""

    @property
    def run_id(self) -> str:
        core = {
            # inputs enter by content, so relocating files keeps the id
            "command": [self.input_digests.get(a, a) for a in _without_out(self.command)],
            "config": self.config,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "input_digests": sorted(self.input_digests.values()),
        }
        return sha256_hex(dumps(core))[:16]


def _without_out(argv: list) -> list:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            out.append(a)
    return out


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def default_bits() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return FALLBACK_BITS
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None


def _emit(payload: dict, manifest: RunManifest, out: str | None) -> None:
    payload = dict(payload, manifest_digest=manifest.run_id, tool_version=manifest.tool_version)
    text = dumps(payload)
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    manifest.output_digests[str(out)] = sha256_hex(text)
    manifest.finished = _now()
    Path(str(out) + ".manifest.json").write_text(dumps(asdict(manifest) | {"manifest_digest": manifest.run_id}))


def _read(path: str, manifest: RunManifest) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{path}: no such file")
    manifest.input_digests[str(path)] = sha256_hex(p.read_bytes())
    return load_json(p)


# ---------------------------------------------------------------------------
# subcommands


def cmd_search(args, manifest: RunManifest) -> dict:
    bits = args.bits or default_bits()
    restrict = args.eigenspace != "none"
    cfg = SearchConfig(
        max_restarts=args.max_restarts,
        rng_seed=args.seed,
        target_residual=args.target_residual,
        polish_precision_bits=max(53, bits),
        eigenspace_restriction=restrict,
        symmetry=SymmetryType(args.eigenspace) if restrict else SymmetryType.UNKNOWN,
    )
    manifest.config = {k: (v.value if isinstance(v, SymmetryType) else v) for k, v in asdict(cfg).items()}
    try:
        f = search(make_context(args.d, max(53, bits)), cfg)
    except PolishError as exc:
        raise NegativeResult({"d": args.d, "converged": False, "error": str(exc)}, str(exc)) from None
    payload = fiducial_to_dict(f)
    if not f.converged:
        raise NegativeResult(payload, f"search did not reach {args.target_residual:g}")
    return payload


def cmd_verify(args, manifest: RunManifest) -> dict:
    f = fiducial_from_dict(_read(args.file, manifest))
    ctx = f.context()
    recomputed = sic_residual(ctx, list(f.vector))
    threshold = args.threshold
    consistent = abs(recomputed - f.residual) <= max(ctx.tolerance, abs(f.residual))
    payload = {
        "d": f.dimension,
        "precision_bits": f.precision_bits,
        "stored_residual": to_decimal(f.residual, f.precision_bits),
        "recomputed_residual": to_decimal(recomputed, f.precision_bits),
        "threshold": threshold,
        "stored_matches": bool(consistent),
        "ok": bool(consistent and recomputed < threshold),
    }
    if not payload["ok"]:
        raise NegativeResult(payload, f"residual {float(recomputed):.3e} fails verification")
    return payload


def cmd_overlaps(args, manifest: RunManifest) -> dict:
    f = fiducial_from_dict(_read(args.file, manifest))
    return overlaps_to_dict(compute_overlaps(f.context(), f))


def _matrix_json(F) -> list:
    return [list(r) for r in F.rows]


def cmd_stabilizer(args, manifest: RunManifest) -> dict:
    f = fiducial_from_dict(_read(args.file, manifest))
    ctx = f.context()
    report = stability_group(ctx, f)
    table = compute_overlaps(ctx, f, threshold=POLISH_ENTRY_RESIDUAL)
    partition = overlap_orbit_partition(ctx, table)
    key = lambda F: (F.a, F.b, F.c, F.e)  # noqa: E731
    return {
        "d": ctx.d,
        "d_prime": ctx.d_prime,
        "elements": [{"F": _matrix_json(el.matrix), "shift": list(el.shift)} for el in report.elements],
        "symplectic_stabilizers": [_matrix_json(F) for F in sorted(report.symplectic_stabilizers, key=key)],
        "overlap_stabilizers": [_matrix_json(F) for F in sorted(report.overlap_stabilizers, key=key)],
        "order": report.order,
        "operator_order": report.operator_order,
        "centred": report.centred,
        "canonical_order3_present": report.canonical_order3_present,
        "closed": report.is_closed(),
        "cyclic": report.is_cyclic(),
        "partition_parts": len(partition.parts),
        "partition_violations": len(partition.violations),
    }


def _tower_table(D: int, seq, towers) -> str:
    lines = [f"D = {D}, d1 = {seq.d1}", f"{'j':>3}  {'d_j':>24}  {'m_j':>24}"]
    for j, (d, m) in enumerate(zip(seq.terms, seq.m_values), start=1):
        lines.append(f"{j:>3}  {d:>24}  {m:>24}")
    lines.append("towers:")
    lines.extend("  " + " | ".join(str(x) for x in t.chain) for t in towers)
    return "\n".join(lines) + "\n"


def cmd_tower(args, manifest: RunManifest) -> dict:
    D = args.D if args.D is not None else sic_discriminant(args.d).D
    seq = dimension_sequence(D, args.count)
    towers = dimension_towers(seq, args.max_len)
    payload = {
        "D": D,
        "d1": seq.d1,
        "terms": list(seq.terms),
        "m": list(seq.m_values),
        "towers": [list(t.chain) for t in towers],
    }
    if args.use_dprime:
        payload["towers_dprime"] = [list(t.chain) for t in dimension_towers(seq, args.max_len, use_dprime=True)]
    table = _tower_table(D, seq, towers)
    (sys.stdout if args.out else sys.stderr).write(table)
    return payload


def cmd_recognize(args, manifest: RunManifest) -> dict:
    table = overlaps_from_dict(_read(args.input, manifest))
    reference = overlaps_from_dict(_read(args.reference, manifest)) if args.reference else None
    bits = args.bits or default_bits()
    max_degree = args.max_degree or default_max_degree(table.ctx.d_prime)
    cfg = RecognitionConfig(max_degree=max_degree, precision_bits=bits)
    manifest.config = asdict(cfg)
    report = recognize_overlap_phases(table.ctx, table, cfg, reference=reference)
    per_phase = []
    for e in report.entries:
        poly = e.polynomial
        per_phase.append({
            "p": list(e.p),
            "coeffs": list(poly.coefficients) if poly else None,
            "residual": to_decimal(poly.residual, bits) if poly else None,
            "recheck_residual": to_decimal(poly.recheck_residual, bits) if poly and poly.rechecked else None,
            "monic": bool(poly and poly.certified_monic),
            "unit": bool(poly and poly.certified_unit),
            "note": e.failure,
        })
    payload = {"d": report.d, "precision_bits": bits, "max_degree": max_degree,
               "per_phase": per_phase, "summary": report.summary}
    s = report.summary
    if s["failures"] or s["certified"] < s["total"]:
        raise NegativeResult(payload, f"{s['certified']} of {s['total']} phases certified")
    return payload


def cmd_info(args, manifest: RunManifest) -> dict:
    ctx = make_context(args.d, 64)
    payload = {"d": ctx.d, "d_prime": ctx.d_prime, "F_z": _matrix_json(zauner_matrix(ctx))}
    payload["D"] = sic_discriminant(ctx.d).D if ctx.d >= 4 else None
    if ctx.d % 3 == 0:
        payload["F_a"] = _matrix_json(fa_matrix(ctx))
    return payload


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sicnum", description="Numerical SIC fiducials and their arithmetic.")
    parser.add_argument("--version", action="version", version=f"sicnum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def out_flag(p):
        p.add_argument("--out", help="write JSON here (plus a .manifest.json sidecar) instead of stdout")

    p = sub.add_parser("search", help="find a fiducial in dimension d")
    p.add_argument("d", type=int)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--bits", type=int, help=f"working precision (default ${PRECISION_ENV} or {FALLBACK_BITS})")
    p.add_argument("--max-restarts", type=int, default=SearchConfig.max_restarts)
    p.add_argument("--target-residual", type=float, default=SearchConfig.target_residual)
    p.add_argument("--eigenspace", choices=["z", "a", "none"], default="z")
    out_flag(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="recompute the residual of a fiducial file")
    p.add_argument("file")
    p.add_argument("--threshold", type=float, default=CONVERGENCE_THRESHOLD)
    out_flag(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("overlaps", help="overlap table of a fiducial file")
    p.add_argument("file")
    out_flag(p)
    p.set_defaults(func=cmd_overlaps)

    p = sub.add_parser("stabilizer", help="stability group of a fiducial file")
    p.add_argument("file")
    out_flag(p)
    p.set_defaults(func=cmd_stabilizer)

    p = sub.add_parser("tower", help="dimension sequence and towers for a discriminant")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--D", type=int)
    group.add_argument("--d", type=int, help="take D from this dimension")
    p.add_argument("--count", type=int, default=12)
    p.add_argument("--max-len", type=int)
    p.add_argument("--use-dprime", action="store_true", help="also chain the d' values")
    out_flag(p)
    p.set_defaults(func=cmd_tower)

    p = sub.add_parser("recognize", help="recognise overlap phases as algebraic numbers")
    p.add_argument("--input", required=True)
    p.add_argument("--reference", help="same table at >= twice the precision, for certification")
    p.add_argument("--max-degree", type=int)
    p.add_argument("--bits", type=int)
    out_flag(p)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("info", help="d', D, F_z and F_a for a dimension")
    p.add_argument("d", type=int)
    out_flag(p)
    p.set_defaults(func=cmd_info)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    manifest = RunManifest(
        command=argv,
        config={},
        seed=getattr(args, "seed", None),
        tool_version=__version__,
        started=_now(),
    )
    out = getattr(args, "out", None)
    try:
        payload = args.func(args, manifest)
    except NegativeResult as neg:
        _emit(neg.payload, manifest, out)
        print(f"sicnum: {neg}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (FormatError, FileNotFoundError, ValueError, ArithmeticError) as exc:
        print(f"sicnum: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _emit(payload, manifest, out)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
