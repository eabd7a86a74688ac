"""Recognition of algebraic numbers by integer-relation lattice reduction.

For a candidate degree ``n`` the lattice has one row per power ``x**k``:

    [ e_k | round(N Re x**k), round(N Im x**k) ]

with ``N = 10**lattice_scale_exponent`` (the imaginary column is dropped for
real ``x``).  Short vectors of the LLL-reduced basis carry the coefficients
of integer polynomials nearly vanishing at ``x``.  A hit is factored exactly
and the irreducible factor vanishing at ``x`` is kept.  Certification
re-evaluates that factor at an independent value of ``x`` computed with
twice the working precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import flint
import mpmath

__all__ = [
    "RecognitionConfig",
    "MinimalPolynomial",
    "RecognitionError",
    "PhaseRecognition",
    "PhaseReport",
    "RelationRank",
    "recognize_algebraic",
    "certify_algebraic_integer",
    "certify_unit",
    "recognize_overlap_phases",
    "phase_relation_rank",
    "default_max_degree",
    "degree_schedule",
]


class RecognitionError(ArithmeticError):
    """No polynomial up to the degree bound passed the residual tests."""


@dataclass(frozen=True)
class RecognitionConfig:
    """Settings for :func:`recognize_algebraic`.

    Attributes
    ----------
    max_degree : int
    precision_bits : int
        Precision the input is rounded to; must be at least ``16 * max_degree``.
    lattice_scale_exponent : int, optional
        Decimal exponent of the lattice scale ``N``.  Defaults to 60% of the
        decimal digits carried by ``precision_bits``.
    certify_threshold : float, optional
        Candidate threshold on the normalised residual, by default
        ``2**(-0.15 * precision_bits)``.
    recheck_exponent : float
        A certificate needs the residual at the doubled-precision value below
        ``2**(-recheck_exponent * precision_bits)``.
    """

    max_degree: int = 16
    precision_bits: int = 256
    lattice_scale_exponent: int | None = None
    certify_threshold: float | None = None
    recheck_exponent: float = 1.5

    def __post_init__(self):
        if self.max_degree < 1:
            raise ValueError("max_degree must be >= 1")
        if self.precision_bits < 16 * self.max_degree:
            raise ValueError(
                f"precision_bits={self.precision_bits} is below 16 * max_degree = {16 * self.max_degree}"
            )
        if self.lattice_scale_exponent is None:
            digits = self.precision_bits * math.log10(2)
            object.__setattr__(self, "lattice_scale_exponent", int(0.6 * digits))
        if self.lattice_scale_exponent < 1:
            raise ValueError("lattice_scale_exponent must be positive")
        if self.certify_threshold is None:
            object.__setattr__(self, "certify_threshold", 2.0 ** (-0.15 * self.precision_bits))

    @property
    def consistency_threshold(self):
        # a genuine relation vanishes to the working precision; lattice noise sits near 10**-exponent
        return mpmath.mpf(2) ** (-0.8 * self.precision_bits)

    @property
    def recheck_threshold(self):
        return mpmath.mpf(2) ** (-self.recheck_exponent * self.precision_bits)


def default_max_degree(d_prime: int, cap: int = 64) -> int:
    """``2 d' phi(d')`` capped at ``cap``."""
    phi = sum(1 for k in range(1, d_prime + 1) if math.gcd(k, d_prime) == 1)
    return min(cap, 2 * d_prime * phi)


def degree_schedule(max_degree: int) -> list[int]:
    """``1, 2, 4, ...`` below ``max_degree``, then ``max_degree`` itself."""
    out, n = [], 1
    while n < max_degree:
        out.append(n)
        n *= 2
    out.append(max_degree)
    return out


@dataclass(frozen=True)
class MinimalPolynomial:
    """Integer polynomial recognised at a given value.

    ``coefficients`` run from the constant term upwards and are primitive
    with a positive leading coefficient.  ``irreducible`` records exact
    factorisation over the integers; minimality is otherwise only claimed
    among certified candidates up to the degree bound.
    """

    coefficients: tuple
    residual: object
    recheck_residual: object = None
    irreducible: bool = False
    certified_monic: bool = False
    certified_unit: bool = False
    rechecked: bool = field(default=False)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> int:
        return self.coefficients[-1]

    @property
    def constant(self) -> int:
        return self.coefficients[0]

    def evaluate(self, x):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def is_palindromic_up_to_sign(self) -> bool:
        c = self.coefficients
        return c == c[::-1] or c == tuple(-a for a in c[::-1])

    def __str__(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            a = self.coefficients[k]
            if a:
                terms.append(f"{a:+d}" + (f"*x^{k}" if k > 1 else "*x" if k == 1 else ""))
        return " ".join(terms) if terms else "0"


def _normalise(coeffs) -> tuple:
    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)  # drop factors of x; inputs are nonzero
    if not coeffs:
        return ()
    g = 0
    for c in coeffs:
        g = math.gcd(g, c)
    coeffs = [c // g for c in coeffs]
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return tuple(coeffs)


def _relative_residual(ctx, coeffs, x):
    ax = abs(x)
    num = abs(_horner(coeffs, x))
    den = ctx.fsum(abs(c) * ax**k for k, c in enumerate(coeffs))
    return num / den if den else ctx.inf


def _horner(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def algebraic_integer_flags(coeffs: tuple) -> tuple[bool, bool]:
    monic = bool(coeffs) and coeffs[-1] == 1
    return monic, monic and coeffs[0] in (1, -1)


def _candidates(ctx, x, n: int, exponent: int, real: bool):
    scale = ctx.mpf(10) ** exponent
    powers = [ctx.mpc(1)]
    for _ in range(n):
        powers.append(powers[-1] * x)
    rows = []
    for k in range(n + 1):
        row = [1 if j == k else 0 for j in range(n + 1)]
        row.append(int(ctx.nint(scale * powers[k].real)))
        if not real:
            row.append(int(ctx.nint(scale * powers[k].imag)))
        rows.append(row)
    reduced = flint.fmpz_mat(rows).lll(delta=0.99)
    for i in range(min(n + 1, 4)):
        yield [int(reduced[i, j]) for j in range(n + 1)]


def _best_factor(ctx, coeffs, x):
    """Irreducible factor of ``coeffs`` with the smallest residual at ``x``."""
    _, factors = flint.fmpz_poly(list(coeffs)).factor()
    best = None
    for fac, _ in factors:
        c = _normalise(int(a) for a in fac.coeffs())
        if len(c) < 2:
            continue
        res = _relative_residual(ctx, c, x)
        if best is None or res < best[1]:
            best = (c, res)
    return best


def recognize_algebraic(x, cfg: RecognitionConfig | None = None, reference=None) -> MinimalPolynomial:
    """Find the lowest-degree integer polynomial vanishing at ``x``.

    Parameters
    ----------
    x : number
        Real or complex value carrying at least ``cfg.precision_bits`` bits.
    cfg : RecognitionConfig
    reference : number, optional
        The same quantity computed independently at twice the precision.
        Only a polynomial that also vanishes there to
        ``cfg.recheck_threshold`` is certified.

    Raises
    ------
    RecognitionError
        If no degree up to ``cfg.max_degree`` yields a polynomial passing
        both the candidate threshold and the precision-consistency test.

    Examples
    --------
    >>> import mpmath
    >>> recognize_algebraic(mpmath.sqrt(2), RecognitionConfig(max_degree=4, precision_bits=64)).coefficients
    (-2, 0, 1)
    """
    cfg = cfg or RecognitionConfig()
    ctx = mpmath.MPContext()
    ctx.prec = cfg.precision_bits
    value = ctx.mpc(x)
    if value == 0:
        return MinimalPolynomial((0, 1), ctx.mpf(0), irreducible=True)
    real = value.imag == 0
    threshold = min(ctx.mpf(cfg.certify_threshold), cfg.consistency_threshold)

    ref_ctx = None
    if reference is not None:
        ref_ctx = mpmath.MPContext()
        ref_ctx.prec = 2 * cfg.precision_bits
        reference = ref_ctx.mpc(reference)

    seen = set()
    for n in degree_schedule(cfg.max_degree):
        for row in _candidates(ctx, value, n, cfg.lattice_scale_exponent, real):
            coeffs = _normalise(row)
            if len(coeffs) < 2 or coeffs in seen:
                continue
            seen.add(coeffs)
            if _relative_residual(ctx, coeffs, value) >= threshold:
                continue
            hit = _best_factor(ctx, coeffs, value)
            if hit is None or hit[1] >= threshold:
                continue
            poly, residual = hit
            if ref_ctx is None:
                return MinimalPolynomial(poly, residual, irreducible=True)
            recheck = _relative_residual(ref_ctx, poly, reference)
            if recheck < cfg.recheck_threshold:
                monic, unit = algebraic_integer_flags(poly)
                return MinimalPolynomial(poly, residual, recheck, True, monic, unit, rechecked=True)
    raise RecognitionError(f"no integer polynomial of degree <= {cfg.max_degree} passed at {cfg.precision_bits} bits")


def certify_algebraic_integer(p: MinimalPolynomial) -> bool:
    """Leading coefficient 1 after normalisation."""
    return p.leading == 1


def certify_unit(p: MinimalPolynomial) -> bool:
    """Monic with constant term ``+1`` or ``-1``."""
    return certify_algebraic_integer(p) and p.constant in (1, -1)


# ---------------------------------------------------------------------------
# overlap phases


@dataclass(frozen=True)
class PhaseRecognition:
    p: tuple
    polynomial: MinimalPolynomial | None
    failure: str | None = None

    @property
    def certified(self) -> bool:
        return self.polynomial is not None and self.polynomial.rechecked

    @property
    def unit(self) -> bool:
        return self.certified and self.polynomial.certified_unit


@dataclass(frozen=True)
class PhaseReport:
    d: int
    precision_bits: int
    max_degree: int
    entries: tuple
    recheck_available: bool

    @property
    def summary(self) -> dict:
        total = len(self.entries)
        recognised = [e for e in self.entries if e.polynomial is not None]
        certified = [e for e in recognised if e.certified]
        integers = [e for e in certified if e.polynomial.certified_monic]
        units = [e for e in certified if e.polynomial.certified_unit]
        distinct = {e.polynomial.coefficients for e in recognised}
        return {
            "total": total,
            "recognized": len(recognised),
            "certified": len(certified),
            "certified_integer": len(integers),
            "certified_unit": len(units),
            "certified_non_unit": len(certified) - len(units),
            "failures": total - len(recognised),
            "coverage": len(certified) / total if total else 0.0,
            "distinct_polynomials": len(distinct),
            "degrees": sorted({len(c) - 1 for c in distinct}),
            "recheck_available": self.recheck_available,
        }


def _phase_key(z, bits: int):
    scale = 2 ** (bits // 2)
    return int(mpmath.nint(z.real * scale)), int(mpmath.nint(z.imag * scale))


def recognize_overlap_phases(ctx, t, cfg: RecognitionConfig | None = None, reference=None) -> PhaseReport:
    """Recognise every phase of an overlap table.

    Parameters
    ----------
    ctx : DimensionContext
    t : OverlapTable
    cfg : RecognitionConfig
    reference : OverlapTable, optional
        Table of the same fiducial at ``>= 2 * cfg.precision_bits``.  When
        omitted, ``t`` itself serves if it is precise enough; otherwise no
        phase can be certified.

    A unit certificate additionally requires the polynomial of a unit-modulus
    phase to be palindromic up to sign, since ``1/x = conj(x)`` is a root too.
    """
    cfg = cfg or RecognitionConfig(max_degree=min(32, default_max_degree(ctx.d_prime)), precision_bits=512)
    if reference is None and t.ctx.precision_bits >= 2 * cfg.precision_bits:
        reference = t
    if reference is not None and reference.ctx.precision_bits < 2 * cfg.precision_bits:
        raise ValueError("reference table must carry at least twice the recognition precision")
    cache: dict = {}
    out = []
    for p in t.indices():
        x = t.phases[p]
        ref = reference.phases[p] if reference is not None else None
        key = _phase_key(x, cfg.precision_bits)
        try:
            if key in cache:
                poly = _reuse(cache[key], x, ref, cfg)
            else:
                poly = recognize_algebraic(x, cfg, ref)
                cache[key] = poly
        except RecognitionError as exc:
            out.append(PhaseRecognition(tuple(p), None, str(exc)))
            continue
        if poly.certified_unit and not poly.is_palindromic_up_to_sign():
            poly = MinimalPolynomial(poly.coefficients, poly.residual, poly.recheck_residual,
                                     poly.irreducible, poly.certified_monic, False, poly.rechecked)
            out.append(PhaseRecognition(tuple(p), poly, "unit certificate refused: not palindromic"))
            continue
        out.append(PhaseRecognition(tuple(p), poly))
    return PhaseReport(ctx.d, cfg.precision_bits, cfg.max_degree, tuple(out), reference is not None)


def _reuse(poly: MinimalPolynomial, x, ref, cfg: RecognitionConfig) -> MinimalPolynomial:
    ctx = mpmath.MPContext()
    ctx.prec = cfg.precision_bits
    residual = _relative_residual(ctx, poly.coefficients, ctx.mpc(x))
    if residual >= min(ctx.mpf(cfg.certify_threshold), cfg.consistency_threshold):
        return recognize_algebraic(x, cfg, ref)
    if ref is None:
        return MinimalPolynomial(poly.coefficients, residual, irreducible=poly.irreducible)
    ref_ctx = mpmath.MPContext()
    ref_ctx.prec = 2 * cfg.precision_bits
    recheck = _relative_residual(ref_ctx, poly.coefficients, ref_ctx.mpc(ref))
    if recheck >= cfg.recheck_threshold:
        return recognize_algebraic(x, cfg, ref)
    monic, unit = algebraic_integer_flags(poly.coefficients)
    return MinimalPolynomial(poly.coefficients, residual, recheck, poly.irreducible, monic, unit, rechecked=True)


# ---------------------------------------------------------------------------
# multiplicative relations


@dataclass(frozen=True)
class RelationRank:
    """Estimated rank of the group generated by a set of phases modulo torsion.

    ``confident`` is set when relation vectors and the remaining reduced
    vectors are separated by a wide margin.  The estimate is never certified.
    """

    rank: int
    generators: int
    relations: int
    confident: bool


def phase_relation_rank(phases, cfg: RecognitionConfig | None = None) -> RelationRank:
    """Rank of ``<phases>`` in the circle group modulo torsion.

    Integer relations ``sum n_i theta_i / 2 pi + k = 0`` are sought by lattice
    reduction; the rank is the number of distinct phases minus the number of
    independent relations found.  ``phases`` may be an overlap table or a
    sequence of unit complex numbers.
    """
    cfg = cfg or RecognitionConfig(max_degree=1, precision_bits=256)
    ctx = mpmath.MPContext()
    ctx.prec = cfg.precision_bits
    values = list(phases.phases.values()) if hasattr(phases, "phases") else list(phases)
    tol = ctx.mpf(2) ** (-cfg.precision_bits // 2)
    distinct = []
    for z in values:
        z = ctx.mpc(z)
        if all(abs(z - w) > tol for w in distinct):
            distinct.append(z)
    m = len(distinct)
    if m == 0:
        return RelationRank(0, 0, 0, True)
    thetas = [ctx.arg(z) / (2 * ctx.pi) for z in distinct]
    scale = ctx.mpf(10) ** cfg.lattice_scale_exponent
    rows = []
    for i, th in enumerate(thetas + [ctx.mpf(1)]):
        row = [1 if j == i else 0 for j in range(m + 1)]
        row.append(int(ctx.nint(scale * th)))
        rows.append(row)
    reduced = flint.fmpz_mat(rows).lll(delta=0.99)
    small, large = [], []
    for i in range(m + 1):
        coeffs = [int(reduced[i, j]) for j in range(m + 1)]
        value = abs(ctx.fsum(c * th for c, th in zip(coeffs, thetas + [ctx.mpf(1)])))
        norm = max(1, max(abs(c) for c in coeffs))
        (small if value < cfg.consistency_threshold * norm else large).append(value / norm)
    relations = len(small)
    bits = cfg.precision_bits
    confident = (not large or min(large) > ctx.mpf(2) ** (-0.7 * bits)) and (
        not small or max(small) < ctx.mpf(2) ** (-0.9 * bits)
    )
    return RelationRank(m - relations, m, relations, bool(confident))
