"""Overlap tables, stability groups and centring of fiducials.

The overlap of a fiducial ``v`` at label ``p`` is ``<v|D_p|v>``.  Stability
is read off the overlap table without forming any Clifford matrix: the
element ``D_s U_F`` fixes the fiducial projector exactly when

    o(F p) = chi_s(F p) * o'(p)    for every p,

where ``o' = o`` for ``det F = 1``, ``o' = conj(o)`` for ``det F = -1`` and
``chi_s(q) = omega**(q2 s1 - q1 s2)``.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .fiducial_search import Fiducial, _Kernel, _as_vector, _norm2, normalize_phase, sic_residual
from .wh_group import (
    DimensionContext,
    DisplacementIndex,
    SymplecticMatrix,
    displacement,
    is_canonical_order3,
    make_context,
)

__all__ = [
    "OverlapTable",
    "StabilityReport",
    "StabilizerElement",
    "CentringResult",
    "PartitionReport",
    "UnconvergedFiducialError",
    "CapabilityError",
    "CONVERGENCE_THRESHOLD",
    "compute_overlaps",
    "overlap_table_from_vector",
    "stability_group",
    "stability_group_from_table",
    "is_closed",
    "is_cyclic",
    "trivial_pairs",
    "centre_fiducial",
    "translate_fiducial",
    "overlap_orbit_partition",
]

CONVERGENCE_THRESHOLD = 1e-10
DEFAULT_STABILITY_BOUND = 16


class UnconvergedFiducialError(ValueError):
    """The fiducial's residual is too large for its overlaps to be meaningful."""


class CapabilityError(RuntimeError):
    """The requested computation exceeds a configured size bound."""


@dataclass(frozen=True)
class OverlapTable:
    """Overlaps ``<v|D_p|v>`` for every ``p`` mod d' that is nonzero mod d.

    Attributes
    ----------
    ctx : DimensionContext
    entries : dict
        ``DisplacementIndex -> mpc`` overlap.
    residual : mpmath.mpf
        SIC residual of the vector the table came from.
    """

    ctx: DimensionContext
    entries: dict
    residual: object
    phases: dict = field(init=False, repr=False)

    def __post_init__(self):
        root = self.ctx.mp.sqrt(self.ctx.d + 1)
        object.__setattr__(self, "phases", {p: z * root for p, z in self.entries.items()})

    @property
    def d(self) -> int:
        return self.ctx.d

    def indices(self) -> list[DisplacementIndex]:
        return sorted(self.entries)

    def overlap(self, p):
        """Overlap at any label; ``p = 0 mod d`` gives ``(+-1)``."""
        q = DisplacementIndex.of(p, self.ctx.d_prime)
        if q in self.entries:
            return self.entries[q]
        # D_{d v} = tau**(d^2 v1 v2) I
        return self.ctx.tau_pow(q.p1 * q.p2)

    def phase(self, p):
        return self.phases[DisplacementIndex.of(p, self.ctx.d_prime)]

    def phase_array(self) -> np.ndarray:
        """Phases on the full ``d' x d'`` grid in complex128, scaled overlaps at ``p = 0 mod d``."""
        n = self.ctx.d_prime
        root = np.sqrt(self.ctx.d + 1)
        out = np.empty((n, n), dtype=complex)
        for p1 in range(n):
            for p2 in range(n):
                q = DisplacementIndex(p1, p2)
                out[p1, p2] = complex(self.phases[q]) if q in self.phases else complex(self.overlap(q)) * root
        return out

    def max_magnitude_error(self):
        """Max of ``| |o_p|**2 - 1/(d+1) |`` over the table."""
        target = self.ctx.mp.mpf(1) / (self.ctx.d + 1)
        return max(abs(abs(z) ** 2 - target) for z in self.entries.values())


def _labels(ctx: DimensionContext):
    n, d = ctx.d_prime, ctx.d
    for p1, p2 in itertools.product(range(n), range(n)):
        if p1 % d or p2 % d:
            yield DisplacementIndex(p1, p2)


def overlap_table_from_vector(ctx: DimensionContext, v, residual=None) -> OverlapTable:
    """Overlap table of an arbitrary nonzero vector, normalised first."""
    v = _as_vector(ctx, v)
    v = v / ctx.mp.sqrt(_norm2(ctx, v))
    d = ctx.d
    h = _Kernel.exact(ctx).overlaps(v).reshape(d, d)
    entries = {p: ctx.tau_pow(p.p1 * p.p2) * h[p.p1 % d, p.p2 % d] for p in _labels(ctx)}
    if residual is None:
        residual = sic_residual(ctx, v)
    return OverlapTable(ctx, entries, residual)


def compute_overlaps(ctx: DimensionContext, f: Fiducial, threshold: float = CONVERGENCE_THRESHOLD) -> OverlapTable:
    """Overlap table of a converged fiducial at the precision of ``ctx``.

    Raises
    ------
    UnconvergedFiducialError
        If ``f.residual`` is not below ``threshold``.
    """
    if f.dimension != ctx.d:
        raise ValueError(f"fiducial has d={f.dimension}, context has d={ctx.d}")
    if not f.residual < threshold:
        raise UnconvergedFiducialError(
            f"fiducial residual {float(f.residual):.3e} is not below {threshold:.1e}; polish or search again"
        )
    return overlap_table_from_vector(ctx, list(f.vector))


# ---------------------------------------------------------------------------
# stability


@dataclass(frozen=True)
class StabilizerElement:
    """``D_s U_F`` (anti-unitary when ``det F = -1``) fixing the fiducial projector.

    ``shift`` is only meaningful mod d.
    """

    matrix: SymplecticMatrix = field(compare=False)
    shift: tuple
    key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (self.matrix.a, self.matrix.b, self.matrix.c, self.matrix.e))

    def __lt__(self, other):
        return (self.key, self.shift) < (other.key, other.shift)


@dataclass(frozen=True)
class StabilityReport:
    """Stabilizer of a fiducial projector inside the extended Clifford group.

    Attributes
    ----------
    elements : list of StabilizerElement
    symplectic_stabilizers : frozenset of SymplecticMatrix
        Every ``F`` for which some ``D_s U_F`` fixes the projector.
    overlap_stabilizers : frozenset of SymplecticMatrix
        ``{(det F) F}``; the overlaps are constant on orbits of this group
        when the fiducial is centred.
    centred : bool
        True when every stabilizing operator has a representative with
        ``shift = 0``.
    canonical_order3_present : bool
    trivial : tuple of StabilizerElement
        Pairs ``(K, t)`` with ``D_t U_K`` proportional to the identity.  Only
        ``K = I`` for odd d; eight pairs for even d.
    """

    ctx: DimensionContext
    elements: tuple
    symplectic_stabilizers: frozenset
    overlap_stabilizers: frozenset
    centred: bool
    canonical_order3_present: bool
    trivial: tuple = ()

    @property
    def order(self) -> int:
        return len(self.symplectic_stabilizers)

    def is_closed(self) -> bool:
        return is_closed(self.symplectic_stabilizers) and is_closed(self.overlap_stabilizers)

    def is_cyclic(self) -> bool:
        return is_cyclic(self.symplectic_stabilizers, self.ctx)

    @property
    def operator_order(self) -> int:
        """Number of distinct stabilizing operators up to phase."""
        return len(self.elements) // max(1, len(self.trivial))


def _esl_arrays(n: int):
    r = np.arange(n)
    a, b, c, e = (x.ravel() for x in np.meshgrid(r, r, r, r, indexing="ij"))
    det = (a * e - b * c) % n
    keep = (det == 1 % n) | (det == (n - 1) % n)
    return a[keep], b[keep], c[keep], e[keep], np.where(det[keep] == 1 % n, 1, -1)


def _root_exponent(ratio: np.ndarray, d: int):
    """Nearest exponent k with ``ratio ~ omega**k`` and the distance to it."""
    k = np.rint(np.angle(ratio) * d / (2 * np.pi)).astype(int) % d
    return k, np.abs(ratio - np.exp(2j * np.pi * k / d))


def stability_group_from_table(ctx: DimensionContext, table: OverlapTable, tol=None,
                               bound: int = DEFAULT_STABILITY_BOUND) -> StabilityReport:
    """Sweep ESL(2, Z/d') for Clifford elements fixing the table's projector.

    A vectorised double-precision screen on two labels prunes the sweep;
    surviving candidates are confirmed on every label at the table's
    precision with tolerance ``tol`` on the phases.
    """
    d, n = ctx.d, ctx.d_prime
    if d > bound:
        raise CapabilityError(f"stability sweep is limited to d <= {bound}, got d={d}")
    mp = table.ctx.mp
    if tol is None:
        tol = max(mp.mpf(1000) * table.residual, table.ctx.tolerance)
    grid = table.phase_array()
    a, b, c, e, det = _esl_arrays(n)
    # F^-1 e1 = det (e, -c), F^-1 e2 = det (-b, a)
    src1 = ((det * e) % n, (-det * c) % n)
    src2 = ((-det * b) % n, (det * a) % n)
    tw1 = np.where(det == 1, grid[src1], np.conj(grid[src1]))
    tw2 = np.where(det == 1, grid[src2], np.conj(grid[src2]))
    k1, err1 = _root_exponent(grid[1, 0] / tw1, d)
    k2, err2 = _root_exponent(grid[0, 1] / tw2, d)
    screen = max(1e-6, 1e3 * float(tol))
    survivors = np.nonzero((err1 < screen) & (err2 < screen))[0]

    labels = table.indices()
    elements = []
    for i in survivors:
        F = SymplecticMatrix(int(a[i]), int(b[i]), int(c[i]), int(e[i]), n)
        # chi_s(e1) = omega**(-s2), chi_s(e2) = omega**(s1)
        s = (int(k2[i]) % d, int(-k1[i]) % d)
        if _confirm(table, F, s, tol, labels):
            elements.append(StabilizerElement(F, s))
    elements.sort()
    symp = frozenset(el.matrix for el in elements)
    overlap_group = frozenset(F.scaled(F.det_sign) for F in symp)
    trivial = trivial_pairs(ctx)
    return StabilityReport(
        ctx=ctx,
        elements=tuple(elements),
        symplectic_stabilizers=symp,
        overlap_stabilizers=overlap_group,
        centred=all(_has_plain_representative(el, trivial, d) for el in elements),
        canonical_order3_present=any(is_canonical_order3(F, ctx) for F in symp),
        trivial=trivial,
    )


def _confirm(table: OverlapTable, F: SymplecticMatrix, s, tol, labels) -> bool:
    ctx = table.ctx
    anti = F.det_sign == -1
    for p in labels:
        q = F.apply(p)
        src = table.phases[p]
        if anti:
            src = src.conjugate()
        chi = ctx.omega_pow(q.p2 * s[0] - q.p1 * s[1])
        if abs(table.phase(q) - chi * src) > tol:
            return False
    return True


def stability_group(ctx: DimensionContext, f: Fiducial, tol=None,
                    bound: int = DEFAULT_STABILITY_BOUND) -> StabilityReport:
    """Stability report of the projector onto ``f.vector``.

    Raises
    ------
    CapabilityError
        If ``d`` exceeds ``bound``.
    """
    if ctx.d > bound:
        raise CapabilityError(f"stability sweep is limited to d <= {bound}, got d={ctx.d}")
    table = overlap_table_from_vector(ctx, list(f.vector))
    return stability_group_from_table(ctx, table, tol, bound)


def is_closed(group) -> bool:
    """Closure of a finite set of matrices under products and inverses."""
    group = set(group)
    if not group:
        return False
    return all(F.inverse() in group for F in group) and all(F @ G in group for F in group for G in group)


@functools.lru_cache(maxsize=64)
def trivial_pairs(ctx: DimensionContext) -> tuple:
    """All ``(K, t)`` in ESL(2, Z/d') x (Z/d)^2 with ``D_t U_K`` a multiple of the identity.

    Such ``K`` are congruent to ``I`` mod d and have determinant 1.  For
    ``q = K p = p (mod d)`` one has ``D_q = tau**(q1 q2 - p1 p2) D_p``, and
    conjugation by ``D_t`` contributes ``omega**(q2 t1 - q1 t2)``; both are
    tracked as exponents of ``tau``.
    """
    d, n = ctx.d, ctx.d_prime
    lifts = range(0, n, d)
    out = []
    for da, db, dc, de in itertools.product(lifts, repeat=4):
        a, b, c, e = 1 + da, db, dc, 1 + de
        if (a * e - b * c) % n != 1 % n:
            continue
        K = SymplecticMatrix(a, b, c, e, n)
        for t in itertools.product(range(d), repeat=2):
            if all(_trivial_exponent(K, t, p, d) == 0 for p in itertools.product(range(n), repeat=2)):
                out.append(StabilizerElement(K, t))
    return tuple(sorted(out))


def _trivial_exponent(K: SymplecticMatrix, t, p, d: int) -> int:
    q = K.apply(p)
    return (q.p1 * q.p2 - p[0] * p[1] + 2 * (q.p2 * t[0] - q.p1 * t[1])) % (2 * d)


def _kernel(ctx: DimensionContext) -> set:
    return {el.matrix for el in trivial_pairs(ctx)}


def _has_plain_representative(el: StabilizerElement, trivial, d: int) -> bool:
    # (F, s)(K, t) = (F K, s + F t)
    for k in trivial:
        Ft = el.matrix.apply(k.shift)
        if (el.shift[0] + Ft.p1) % d == 0 and (el.shift[1] + Ft.p2) % d == 0:
            return True
    return False


def is_cyclic(group, ctx: DimensionContext) -> bool:
    """Whether the group is cyclic modulo matrices that act trivially on operators.

    For even d eight matrices congruent to ``I`` mod d induce, together with a
    suitable displacement, the identity operation.  Cyclicity is decided in
    the quotient by them.
    """
    group = set(group)
    ker = _kernel(ctx) & group
    target = len(group) // len(ker)
    for F in group:
        k, power = 1, F
        while power not in ker:
            power = power @ F
            k += 1
            if k > target:
                break
        if k == target:
            return True
    return False


# ---------------------------------------------------------------------------
# centring


@dataclass(frozen=True)
class CentringResult:
    fiducial: Fiducial
    shift: tuple
    found: bool


def translate_fiducial(ctx: DimensionContext, f: Fiducial, q) -> Fiducial:
    """``D_q f`` with the phase convention of the search and a recomputed residual."""
    work = make_context(f.dimension, f.precision_bits)
    v = displacement(work, q).apply(list(f.vector))
    v = normalize_phase(v)
    return Fiducial(
        vector=tuple(v),
        dimension=f.dimension,
        residual=sic_residual(work, v),
        seed=f.seed,
        symmetry_type=f.symmetry_type,
        precision_bits=f.precision_bits,
        converged=f.converged,
    )


def centre_fiducial(ctx: DimensionContext, f: Fiducial, report: StabilityReport | None = None) -> CentringResult:
    """Find a translate ``D_q f`` whose stabilizer has no displacement parts.

    Translating by ``q`` turns ``(F, s)`` into ``(F, s + q - F q)``, so the
    search solves that congruence for every stabilizer element at once and
    then re-verifies the winner from scratch.
    """
    report = report or stability_group(ctx, f)
    if report.centred:
        return CentringResult(f, (0, 0), True)
    d = ctx.d
    for q in itertools.product(range(d), range(d)):
        moved_elements = []
        for el in report.elements:
            Fq = el.matrix.apply(q)
            shift = ((el.shift[0] + q[0] - Fq.p1) % d, (el.shift[1] + q[1] - Fq.p2) % d)
            moved_elements.append(StabilizerElement(el.matrix, shift))
        if all(_has_plain_representative(el, report.trivial, d) for el in moved_elements):
            moved = translate_fiducial(ctx, f, q)
            if stability_group(ctx, moved).centred:
                return CentringResult(moved, q, True)
    return CentringResult(f, (0, 0), False)


# ---------------------------------------------------------------------------
# overlap orbits


@dataclass(frozen=True)
class PartitionReport:
    """Classes of approximately equal overlaps and orbit-consistency violations.

    ``violations`` lists ``(G, p)`` with ``o(G p)`` outside the class of ``o(p)``.
    """

    parts: tuple
    violations: tuple
    tolerance: object

    @property
    def consistent(self) -> bool:
        return not self.violations


def overlap_orbit_partition(ctx: DimensionContext, t: OverlapTable, tol=None, group=None) -> PartitionReport:
    """Group labels by equal overlaps and check invariance under ``group``.

    ``group`` defaults to ``{(det F) F}`` over the stabilizer elements without
    displacement part, the overlap stability group of a centred fiducial,
    detected at the same ``tol``.
    Classes are connected components of the graph joining overlaps closer
    than ``tol`` (single linkage), with ``tol`` defaulting to ``1000``
    times the table residual.
    """
    mp = t.ctx.mp
    if tol is None:
        tol = max(mp.mpf(1000) * t.residual, mp.ldexp(mp.mpf(1), -t.ctx.precision_bits // 2))
    if group is None:
        report = stability_group_from_table(ctx, t, tol=tol)
        group = {el.matrix.scaled(el.matrix.det_sign) for el in report.elements if el.shift == (0, 0)}
    labels = t.indices()
    vals = [t.entries[p] for p in labels]
    m = len(labels)
    rows, cols = [], []
    for i in range(m):
        for j in range(i + 1, m):
            if abs(vals[i] - vals[j]) <= tol:
                rows.append(i)
                cols.append(j)
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    _, comp = connected_components(adj, directed=False)
    part_of = {p: int(comp[i]) for i, p in enumerate(labels)}
    groups: dict[int, list] = {}
    for p in labels:
        groups.setdefault(part_of[p], []).append(p)
    parts = tuple(sorted(tuple(ps) for ps in groups.values()))
    violations = []
    for G in sorted(group, key=lambda F: (F.a, F.b, F.c, F.e)):
        for p in labels:
            q = G.apply(p)
            if part_of.get(q) != part_of[p]:
                violations.append((G, p))
    return PartitionReport(parts, tuple(violations), tol)
