"""Weyl-Heisenberg displacement operators and symplectic arithmetic mod d'.

Operators are dense ``numpy`` object arrays whose entries are ``mpmath``
complex numbers owned by the :class:`DimensionContext` that built them.
Each context carries its own ``mpmath.MPContext`` so working precision is
never shared through mpmath's global state.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import mpmath
import numpy as np

__all__ = [
    "InvalidDimensionError",
    "InvariantViolationError",
    "DimensionContext",
    "DisplacementIndex",
    "SymplecticMatrix",
    "UnitaryOperator",
    "make_context",
    "dprime",
    "displacement",
    "displacement_product_exponent",
    "verify_displacement_orthogonality",
    "zauner_matrix",
    "fa_matrix",
    "symplectic_mul",
    "symplectic_order",
    "is_canonical_order3",
    "esl_elements",
]

DEFAULT_PRECISION = 256


class InvalidDimensionError(ValueError):
    """Raised for a Hilbert-space dimension below 2."""


class InvariantViolationError(ValueError):
    """Raised when a symplectic matrix is not invertible mod d'."""


def dprime(d: int) -> int:
    """Return ``d`` for odd ``d`` and ``2 d`` for even ``d``."""
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    return d if d % 2 else 2 * d


@dataclass(frozen=True)
class DimensionContext:
    """Dimension, modulus and roots of unity at a fixed binary precision.

    Attributes
    ----------
    d : int
        Hilbert-space dimension.
    precision_bits : int
        Working precision of every complex number produced by this context.
    d_prime : int
        Modulus for displacement indices and symplectic matrices.
    omega, tau : mpmath.mpc
        ``exp(2 pi i / d)`` and ``-exp(pi i / d)``; ``tau**2 == omega``.
    """

    d: int
    precision_bits: int = DEFAULT_PRECISION
    d_prime: int = field(init=False)
    mp: mpmath.ctx_mp.MPContext = field(init=False, repr=False, compare=False)
    tau_powers: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 2:
            raise InvalidDimensionError(f"dimension must be >= 2, got {self.d}")
        if self.precision_bits < 53:
            raise ValueError("precision_bits must be >= 53")
        mp = mpmath.MPContext()
        mp.prec = self.precision_bits
        d = self.d
        # tau**k = exp(i pi k (d+1) / d), exact rational argument for expjpi
        powers = tuple(mp.expjpi(mp.mpf(k * (d + 1) % (2 * d)) / d) for k in range(2 * d))
        object.__setattr__(self, "d_prime", dprime(d))
        object.__setattr__(self, "mp", mp)
        object.__setattr__(self, "tau_powers", powers)

    @property
    def tau(self):
        return self.tau_powers[1]

    @property
    def omega(self):
        return self.tau_powers[2 % (2 * self.d)]

    @property
    def tolerance(self):
        """Default numerical tolerance ``2**(-precision_bits / 4)``."""
        return self.mp.ldexp(self.mp.mpf(1), -(self.precision_bits // 4))

    def tau_pow(self, k: int):
        return self.tau_powers[k % (2 * self.d)]

    def omega_pow(self, k: int):
        return self.tau_powers[(2 * k) % (2 * self.d)]

    def zero(self):
        return self.mp.mpc(0)

    def identity(self) -> np.ndarray:
        m = np.full((self.d, self.d), self.mp.mpc(0), dtype=object)
        for r in range(self.d):
            m[r, r] = self.mp.mpc(1)
        return m

    def convert(self, values) -> np.ndarray:
        """Convert an array-like of numbers to an object array at this precision."""
        arr = np.asarray(values, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, x in np.ndenumerate(arr):
            if isinstance(x, (complex, np.complexfloating)):
                out[idx] = self.mp.mpc(x.real, x.imag)
            else:
                out[idx] = self.mp.mpc(x)
        return out


def make_context(d: int, precision_bits: int = DEFAULT_PRECISION) -> DimensionContext:
    """Build a :class:`DimensionContext` for dimension ``d``."""
    return DimensionContext(d, precision_bits)


class DisplacementIndex(NamedTuple):
    """Displacement label ``p = (p1, p2)``; use :meth:`of` to reduce mod d'."""

    p1: int
    p2: int

    @classmethod
    def of(cls, p, modulus: int) -> "DisplacementIndex":
        return cls(p[0] % modulus, p[1] % modulus)


def _index(ctx: DimensionContext, p) -> DisplacementIndex:
    return DisplacementIndex.of(p, ctx.d_prime)


@dataclass(frozen=True)
class SymplecticMatrix:
    """2x2 integer matrix ``[[a, b], [c, e]]`` mod ``modulus`` with det = +-1."""

    a: int
    b: int
    c: int
    e: int
    modulus: int

    def __post_init__(self):
        n = self.modulus
        for name in ("a", "b", "c", "e"):
            object.__setattr__(self, name, getattr(self, name) % n)
        if self.det not in (1 % n, (-1) % n):
            raise InvariantViolationError(
                f"determinant {self.det} is not +-1 mod {n} for {self.rows}"
            )

    @classmethod
    def from_rows(cls, rows, modulus: int) -> "SymplecticMatrix":
        (a, b), (c, e) = rows
        return cls(a, b, c, e, modulus)

    @classmethod
    def identity(cls, modulus: int) -> "SymplecticMatrix":
        return cls(1, 0, 0, 1, modulus)

    @property
    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.e))

    @property
    def det(self) -> int:
        return (self.a * self.e - self.b * self.c) % self.modulus

    @property
    def det_sign(self) -> int:
        """+1 or -1 (for modulus 2 the two coincide and +1 is returned)."""
        return 1 if self.det == 1 % self.modulus else -1

    @property
    def trace(self) -> int:
        return (self.a + self.e) % self.modulus

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if other.modulus != self.modulus:
            raise ValueError("moduli differ")
        return SymplecticMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.e,
            self.c * other.a + self.e * other.c,
            self.c * other.b + self.e * other.e,
            self.modulus,
        )

    def __pow__(self, k: int) -> "SymplecticMatrix":
        if k < 0:
            return self.inverse() ** (-k)
        result, base = SymplecticMatrix.identity(self.modulus), self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def scaled(self, s: int) -> "SymplecticMatrix":
        return SymplecticMatrix(s * self.a, s * self.b, s * self.c, s * self.e, self.modulus)

    def inverse(self) -> "SymplecticMatrix":
        # det is its own inverse when det = +-1
        s = self.det
        return SymplecticMatrix(s * self.e, -s * self.b, -s * self.c, s * self.a, self.modulus)

    def apply(self, p) -> DisplacementIndex:
        n = self.modulus
        return DisplacementIndex((self.a * p[0] + self.b * p[1]) % n, (self.c * p[0] + self.e * p[1]) % n)

    def is_identity(self) -> bool:
        return self.rows == ((1 % self.modulus, 0), (0, 1 % self.modulus))

    def __str__(self) -> str:
        return f"[[{self.a}, {self.b}], [{self.c}, {self.e}]] mod {self.modulus}"


def zauner_matrix(ctx: DimensionContext) -> SymplecticMatrix:
    d = ctx.d
    return SymplecticMatrix(0, d - 1, d + 1, d - 1, ctx.d_prime)


def fa_matrix(ctx: DimensionContext) -> SymplecticMatrix:
    """Canonical order-3 matrix labelling type-a orbits; needs 3 | d.

    The commonly quoted form ``[[1, d+3], [4d/3, d-2]]`` has determinant
    ``-2 mod d`` for every ``d > 3``.  Lowering the bottom-left entry to
    ``4d/3 - 1`` restores ``det = 1`` and keeps the matrix outside the
    conjugacy class of the Zauner matrix.  For ``d = 3`` the quoted form is
    already symplectic and is used as is.
    """
    d = ctx.d
    if d % 3:
        raise ValueError(f"F_a is defined only for d divisible by 3, got d={d}")
    n = ctx.d_prime
    if ((d - 2) - (d + 3) * (4 * d // 3)) % n == 1 % n:
        return SymplecticMatrix(1, d + 3, 4 * d // 3, d - 2, n)
    return SymplecticMatrix(1, d + 3, 4 * d // 3 - 1, d - 2, n)


def symplectic_mul(F: SymplecticMatrix, G: SymplecticMatrix, ctx: DimensionContext) -> SymplecticMatrix:
    _check_modulus(F, ctx)
    _check_modulus(G, ctx)
    return F @ G


def symplectic_order(F: SymplecticMatrix, ctx: DimensionContext) -> int:
    """Multiplicative order of ``F`` in ESL(2, Z/d'Z)."""
    _check_modulus(F, ctx)
    G, k = F, 1
    # |GL(2, Z/nZ)| < n**4 bounds the search
    while not G.is_identity():
        G = G @ F
        k += 1
        if k > ctx.d_prime**4:
            raise InvariantViolationError("order search did not terminate")
    return k


def is_canonical_order3(F: SymplecticMatrix, ctx: DimensionContext) -> bool:
    """True for det F = 1, Tr F = -1 mod d and F != I.

    Determinant -1 matrices are excluded: they label anti-unitaries, which
    cannot have order 3.
    """
    _check_modulus(F, ctx)
    return F.det == 1 % ctx.d_prime and F.trace % ctx.d == (-1) % ctx.d and not F.is_identity()


def _check_modulus(F: SymplecticMatrix, ctx: DimensionContext) -> None:
    if F.modulus != ctx.d_prime:
        raise InvariantViolationError(f"matrix modulus {F.modulus} != d' = {ctx.d_prime}")


def esl_elements(ctx: DimensionContext) -> Iterator[SymplecticMatrix]:
    """Enumerate ESL(2, Z/d'Z) in lexicographic order of ``(a, b, c, e)``."""
    n = ctx.d_prime
    dets = {1 % n, (-1) % n}
    rng = range(n)
    for a, b, c, e in itertools.product(rng, rng, rng, rng):
        if (a * e - b * c) % n in dets:
            yield SymplecticMatrix(a, b, c, e, n)


@dataclass(frozen=True)
class UnitaryOperator:
    """A d x d matrix ``M``, optionally followed by complex conjugation.

    With ``antiunitary`` set the operator acts as ``v -> M @ conj(v)``.
    """

    entries: np.ndarray
    antiunitary: bool = False

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: "UnitaryOperator") -> "UnitaryOperator":
        # (A K^a)(B K^b) = A conj^a(B) K^(a+b)
        right = _conj(other.entries) if self.antiunitary else other.entries
        return UnitaryOperator(self.entries.dot(right), self.antiunitary != other.antiunitary)

    def inverse(self) -> "UnitaryOperator":
        # (M K)^-1 = K M^dagger = conj(M^dagger) K = M^T K
        if self.antiunitary:
            return UnitaryOperator(self.entries.T.copy(), True)
        return UnitaryOperator(_dagger(self.entries), False)

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=object)
        return self.entries.dot(_conj(v) if self.antiunitary else v)

    def conjugate(self, A: np.ndarray) -> np.ndarray:
        """Return ``U A U^{-1}`` for a matrix ``A``."""
        inner = _conj(A) if self.antiunitary else A
        return self.entries.dot(inner).dot(_dagger(self.entries))

    def scaled(self, c) -> "UnitaryOperator":
        return UnitaryOperator(self.entries * c, self.antiunitary)

    def unitarity_error(self):
        """Max entry of ``|M^dagger M - I|``."""
        prod = _dagger(self.entries).dot(self.entries)
        n = prod.shape[0]
        return max(abs(prod[i, j] - (1 if i == j else 0)) for i in range(n) for j in range(n))


def _conj(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = x.conjugate()
    return out


def _dagger(a: np.ndarray) -> np.ndarray:
    return _conj(a).T


def displacement(ctx: DimensionContext, p) -> UnitaryOperator:
    """``D_p = tau**(p1 p2) X**p1 Z**p2`` with ``X|r> = |r+1>``, ``Z|r> = omega**r |r>``."""
    p = _index(ctx, p)
    return UnitaryOperator(_displacement_matrix(ctx, p.p1, p.p2).copy())


@functools.lru_cache(maxsize=4096)
def _displacement_matrix(ctx: DimensionContext, p1: int, p2: int) -> np.ndarray:
    d = ctx.d
    m = np.full((d, d), ctx.mp.mpc(0), dtype=object)
    for r in range(d):
        # column r: tau**(p1 p2) omega**(r p2) at row r + p1
        m[(r + p1) % d, r] = ctx.tau_pow(p1 * p2 + 2 * r * p2)
    return m


def displacement_product_exponent(ctx: DimensionContext, p, q) -> int:
    """Exponent ``k`` with ``D_p D_q = tau**k D_{p+q}``, namely ``p2 q1 - p1 q2``.

    Reducing ``p + q`` mod d' changes nothing because ``tau**d' = 1``.
    """
    return (p[1] * q[0] - p[0] * q[1]) % (2 * ctx.d)


def verify_displacement_orthogonality(ctx: DimensionContext):
    """Max over p, q in (Z/dZ)^2 of ``|Tr(D_p D_q^dagger) - d delta_{p,q}|``."""
    d = ctx.d
    labels = [(p1, p2) for p1 in range(d) for p2 in range(d)]
    mats = {p: _displacement_matrix(ctx, *p) for p in labels}
    worst = ctx.mp.mpf(0)
    for p in labels:
        A = mats[p]
        for q in labels:
            B = mats[q]
            tr = ctx.mp.fsum(A[i, j] * B[i, j].conjugate() for i in range(d) for j in range(d))
            err = abs(tr - (d if p == q else 0))
            if err > worst:
                worst = err
    return worst
