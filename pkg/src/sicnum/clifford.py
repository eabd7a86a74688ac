"""Projective Clifford representation ``F -> U_F`` over ESL(2, Z/d'Z)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .wh_group import (
    DimensionContext,
    DisplacementIndex,
    InvariantViolationError,
    SymplecticMatrix,
    UnitaryOperator,
    _check_modulus,
    displacement,
)

__all__ = [
    "OrderUndeterminedError",
    "CliffordElement",
    "clifford_unitary",
    "clifford_element",
    "covariance_error",
    "projective_order",
    "phase_aligned_distance",
    "exact_covariance_error",
    "identity_operator",
    "as_operator",
]


class OrderUndeterminedError(RuntimeError):
    """No power up to the search bound is proportional to the identity."""


@dataclass(frozen=True)
class CliffordElement:
    """``D_p U_F`` together with its symplectic and displacement labels."""

    symplectic_part: SymplecticMatrix
    displacement_part: DisplacementIndex
    operator: UnitaryOperator


def clifford_unitary(ctx: DimensionContext, F: SymplecticMatrix) -> UnitaryOperator:
    """Return ``U_F`` with ``U_F D_p U_F^{-1} = D_{Fp}`` for every ``p``.

    For ``det F = -1`` the result is anti-unitary: ``U_{FJ}`` followed by
    complex conjugation, where ``J = diag(1, -1)`` is the action of
    conjugation on displacement labels.
    """
    _check_modulus(F, ctx)
    if F.det_sign == -1:
        J = SymplecticMatrix(1, 0, 0, -1, ctx.d_prime)
        M = _unitary_part(ctx, F @ J)
        return UnitaryOperator(M, antiunitary=True)
    return UnitaryOperator(_unitary_part(ctx, F))


def clifford_element(ctx: DimensionContext, F: SymplecticMatrix, p=(0, 0)) -> CliffordElement:
    U = clifford_unitary(ctx, F)
    Dp = displacement(ctx, p)
    return CliffordElement(F, DisplacementIndex.of(p, ctx.d_prime), Dp @ U)


def _unitary_part(ctx: DimensionContext, F: SymplecticMatrix) -> np.ndarray:
    n = ctx.d_prime
    if math.gcd(F.b, n) == 1:
        return _gauss_sum_unitary(ctx, F)
    # F = [[0, -1], [1, x]] @ [[c + x a, e + x b], [-a, -b]]; smallest x making e + x b a unit
    for x in range(n):
        if math.gcd(F.e + x * F.b, n) == 1:
            break
    else:  # gcd(b, e) = 1 guarantees some x works
        raise InvariantViolationError(f"no factorisation found for {F}")
    F1 = SymplecticMatrix(0, -1, 1, x, n)
    F2 = SymplecticMatrix(F.c + x * F.a, F.e + x * F.b, -F.a, -F.b, n)
    return _gauss_sum_unitary(ctx, F1).dot(_gauss_sum_unitary(ctx, F2))


def _gauss_sum_unitary(ctx: DimensionContext, F: SymplecticMatrix) -> np.ndarray:
    # entries tau**(b^-1 (e j^2 - 2 j k + a k^2)) / sqrt(d), b invertible mod d'
    d, n = ctx.d, ctx.d_prime
    binv = pow(F.b, -1, n)
    scale = 1 / ctx.mp.sqrt(d)
    m = np.empty((d, d), dtype=object)
    for j in range(d):
        for k in range(d):
            m[j, k] = ctx.tau_pow(binv * (F.e * j * j - 2 * j * k + F.a * k * k)) * scale
    return m


def phase_aligned_distance(ctx: DimensionContext, A: np.ndarray, B: np.ndarray):
    """``min_theta ||A - e^{i theta} B||_F / sqrt(d)``.

    The phase comes from the Hilbert-Schmidt inner product ``<B, A>``.
    """
    mp = ctx.mp
    z = mp.fsum(b.conjugate() * a for a, b in zip(A.flat, B.flat))
    c = z / abs(z) if z != 0 else mp.mpc(1)
    dist2 = mp.fsum(abs(a - c * b) ** 2 for a, b in zip(A.flat, B.flat))
    return mp.sqrt(dist2 / A.shape[0])


def _monomial(ctx: DimensionContext, p1: int, p2: int, conjugate: bool = False):
    # D_p sends basis vector r to t_r |r + p1>
    phases = [ctx.tau_pow(p1 * p2 + 2 * r * p2) for r in range(ctx.d)]
    if conjugate:
        phases = [z.conjugate() for z in phases]
    return p1 % ctx.d, phases


def _right_times_displacement(ctx, M: np.ndarray, p1: int, p2: int, conjugate: bool) -> np.ndarray:
    shift, t = _monomial(ctx, p1, p2, conjugate)
    d = ctx.d
    out = np.empty_like(M)
    for r in range(d):
        out[:, r] = M[:, (r + shift) % d] * t[r]
    return out


def _left_times_displacement(ctx, M: np.ndarray, q1: int, q2: int) -> np.ndarray:
    shift, t = _monomial(ctx, q1, q2)
    d = ctx.d
    out = np.empty_like(M)
    for s in range(d):
        out[(s + shift) % d, :] = M[s, :] * t[s]
    return out


def _covariance_pairs(ctx: DimensionContext, U: UnitaryOperator, F: SymplecticMatrix, skip_zero: bool):
    _check_modulus(F, ctx)
    n = ctx.d_prime
    M = U.entries
    for p1 in range(n):
        for p2 in range(n):
            if skip_zero and p1 == 0 and p2 == 0:
                continue
            q = F.apply((p1, p2))
            yield (
                _right_times_displacement(ctx, M, p1, p2, U.antiunitary),
                _left_times_displacement(ctx, M, q.p1, q.p2),
            )


def covariance_error(ctx: DimensionContext, U: UnitaryOperator, F: SymplecticMatrix):
    """Max over nonzero ``p`` mod d' of the phase-aligned distance between
    ``U D_p U^{-1}`` and ``D_{Fp}``.

    Evaluated as the distance between ``U D_p`` and ``D_{Fp} U``, which is
    the same number for unitary ``U``.  Displacements are monomial, so each
    label costs O(d^2).
    """
    worst = ctx.mp.mpf(0)
    for left, right in _covariance_pairs(ctx, U, F, skip_zero=True):
        worst = max(worst, phase_aligned_distance(ctx, left, right))
    return worst


def exact_covariance_error(ctx: DimensionContext, U: UnitaryOperator, F: SymplecticMatrix):
    """Like :func:`covariance_error` but without phase alignment."""
    mp = ctx.mp
    worst = mp.mpf(0)
    for left, right in _covariance_pairs(ctx, U, F, skip_zero=False):
        err = mp.sqrt(mp.fsum(abs(x) ** 2 for x in (left - right).flat) / ctx.d)
        worst = max(worst, err)
    return worst


def _scalar_multiple_error(ctx: DimensionContext, A: np.ndarray):
    """Distance of ``A`` from the nearest multiple of the identity, relative to its scale."""
    d = A.shape[0]
    c = ctx.mp.fsum(A[i, i] for i in range(d)) / d
    scale = abs(c)
    if scale == 0:
        return ctx.mp.inf
    off = ctx.mp.fsum(abs(A[i, j] - (c if i == j else 0)) ** 2 for i in range(d) for j in range(d))
    return ctx.mp.sqrt(off / d) / scale


def projective_order(ctx: DimensionContext, U: UnitaryOperator, bound: int = 24, tol=None) -> int:
    """Smallest ``k >= 1`` with ``U**k`` proportional to the identity."""
    tol = ctx.tolerance if tol is None else tol
    power = U
    for k in range(1, bound + 1):
        if not power.antiunitary and _scalar_multiple_error(ctx, power.entries) < tol:
            return k
        power = power @ U
    raise OrderUndeterminedError(f"no power up to {bound} is a multiple of the identity")


def as_operator(ctx: DimensionContext, matrix) -> UnitaryOperator:
    return UnitaryOperator(ctx.convert(matrix))


def identity_operator(ctx: DimensionContext) -> UnitaryOperator:
    return UnitaryOperator(ctx.identity())
