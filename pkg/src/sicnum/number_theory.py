"""Integer arithmetic behind SIC dimension sequences.

Dimensions ``d`` sharing the square-free part ``D`` of ``(d-3)(d+1)`` are
the solutions of ``(d-1)**2 - m**2 D = 4``.  They are generated from the
smallest solution by a Chebyshev-type integer recurrence, and divisibility
chains among them are extracted as towers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .wh_group import dprime

__all__ = [
    "FactorizationBoundError",
    "DiscriminantRecord",
    "DimensionSequence",
    "Tower",
    "TRIAL_DIVISION_BOUND",
    "squarefree_part",
    "is_squarefree",
    "sic_discriminant",
    "pell_fundamental",
    "pell_scan",
    "dimension_sequence",
    "dimension_towers",
    "dprime",
]

TRIAL_DIVISION_BOUND = 2**32


class FactorizationBoundError(ValueError):
    """Trial division would have to pass ``TRIAL_DIVISION_BOUND``."""


def _factor(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        if p > TRIAL_DIVISION_BOUND:
            raise FactorizationBoundError(f"{n} has no factor below {TRIAL_DIVISION_BOUND}")
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def squarefree_part(n: int) -> int:
    """Square-free ``D`` with ``n / D`` a perfect square.

    >>> squarefree_part(45)
    5
    """
    if n == 0:
        raise ValueError("0 has no square-free part")
    D = 1
    for p, k in _factor(n).items():
        if k % 2:
            D *= p
    return D


def is_squarefree(n: int) -> bool:
    return n >= 1 and all(k == 1 for k in _factor(n).values())


@dataclass(frozen=True)
class DiscriminantRecord:
    d: int
    D: int
    d_prime: int


def sic_discriminant(d: int) -> DiscriminantRecord:
    """Square-free part of ``(d - 3)(d + 1)`` for ``d >= 4``."""
    if d < 4:
        raise ValueError(f"discriminant is defined for d >= 4, got d={d}")
    return DiscriminantRecord(d, squarefree_part((d - 3) * (d + 1)), dprime(d))


def _check_D(D: int) -> None:
    if D <= 1 or not is_squarefree(D):
        raise ValueError(f"D must be a square-free integer > 1, got {D}")


def pell_fundamental(D: int) -> tuple[int, int]:
    """Smallest ``(d, m)`` with ``d > 3``, ``m > 0`` and ``(d-1)**2 - m**2 D = 4``.

    Uses the continued fraction of ``(P0 + sqrt(D)) / Q0`` with
    ``(P0, Q0) = (1, 2)`` when ``D = 1 mod 4`` and ``(0, 1)`` otherwise.  At
    the end of the first period the convergent gives the fundamental unit
    ``(x + y sqrt(D)) / 2`` of norm ``+-1``, which is squared when its norm
    is ``-1``.  Then ``d = x + 1`` and ``m = y``.
    """
    _check_D(D)
    P0, Q0 = (1, 2) if D % 4 == 1 else (0, 1)
    r = math.isqrt(D)
    P, Q = P0, Q0
    A_prev, A = 1, (P + r) // Q
    B_prev, B = 0, 1
    a = A
    steps = 1
    while True:
        P = a * Q - P
        Q = (D - P * P) // Q
        if Q == Q0:
            break
        a = (P + r) // Q
        A_prev, A = A, a * A + A_prev
        B_prev, B = B, a * B + B_prev
        steps += 1
    G = Q0 * A - P0 * B
    x, y = (G, B) if Q0 == 2 else (2 * G, 2 * B)
    if x * x - D * y * y == -4:
        x, y = (x * x + D * y * y) // 2, x * y
    if x * x - D * y * y != 4:  # pragma: no cover - guarded by the period identity
        raise ArithmeticError(f"continued fraction for D={D} gave a non-solution")
    return x + 1, y


def pell_scan(D: int, m_limit: int) -> tuple[int, int] | None:
    """Brute-force search over ``m = 1..m_limit`` for the smallest solution, or ``None``."""
    _check_D(D)
    block = 1 << 20
    for start in range(1, m_limit + 1, block):
        stop = min(m_limit, start + block - 1)
        # int64 holds t exactly below 2**62, and the float square root of a
        # perfect square rounds to its exact root well beyond 2**53
        if stop * stop * D < 2**62:
            m = np.arange(start, stop + 1, dtype=np.int64)
            t = 4 + m * m * D
            root = np.rint(np.sqrt(t.astype(np.float64))).astype(np.int64)
            hits = np.nonzero(root * root == t)[0]
            for i in hits:
                return int(root[i]) + 1, int(m[i])
        else:
            for m in range(start, stop + 1):
                t = 4 + m * m * D
                x = math.isqrt(t)
                if x * x == t:
                    return x + 1, m
    return None


@dataclass(frozen=True)
class DimensionSequence:
    """Dimensions ``d_j = 1 + s_j`` for ``j = 1..count`` with their Pell companions."""

    D: int
    d1: int
    terms: tuple
    m_values: tuple

    def __post_init__(self):
        for d, m in zip(self.terms, self.m_values):
            if (d - 1) ** 2 - m * m * self.D != 4:
                raise ArithmeticError(f"term {d} violates the Pell equation for D={self.D}")
        if any(b <= a for a, b in zip(self.terms, self.terms[1:])):
            raise ArithmeticError("terms must be strictly increasing")


def dimension_sequence(D: int, count: int) -> DimensionSequence:
    """First ``count`` dimensions sharing ``D``.

    ``s_0 = 2``, ``s_1 = d_1 - 1``, ``s_{j+1} = (d_1 - 1) s_j - s_{j-1}`` and
    ``d_j = 1 + s_j``; the companions ``m_j`` obey the same recurrence from
    ``m_0 = 0``.

    >>> dimension_sequence(5, 5).terms
    (4, 8, 19, 48, 124)
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    d1, m1 = pell_fundamental(D)
    k = d1 - 1
    s_prev, s = 2, k
    m_prev, m = 0, m1
    terms, ms = [], []
    for _ in range(count):
        terms.append(1 + s)
        ms.append(m)
        s_prev, s = s, k * s - s_prev
        m_prev, m = m, k * m - m_prev
    return DimensionSequence(D, d1, tuple(terms), tuple(ms))


@dataclass(frozen=True)
class Tower:
    chain: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if any(b % a for a, b in zip(self.chain, self.chain[1:])):
            raise ValueError(f"{self.chain} is not a divisibility chain")

    def __len__(self) -> int:
        return len(self.chain)


def _maximal_chains(values: Sequence[int]) -> list[tuple[int, ...]]:
    vals = sorted(set(values))
    # covering relation of the divisibility order restricted to vals
    up = {a: [b for b in vals if b > a and b % a == 0] for a in vals}
    cover = {a: [b for b in up[a] if not any(b % c == 0 for c in up[a] if c < b)] for a in vals}
    has_below = {b for a in vals for b in cover[a]}
    chains: list[tuple[int, ...]] = []

    def walk(path):
        nxt = cover[path[-1]]
        if not nxt:
            chains.append(tuple(path))
        for b in nxt:
            walk(path + [b])

    for a in vals:
        if a not in has_below:
            walk([a])
    return chains


def dimension_towers(seq: DimensionSequence, max_len: int | None = None, use_dprime: bool = False) -> list[Tower]:
    """Maximal divisibility chains among the sequence terms.

    With ``use_dprime`` the chains are formed from the ``d'`` values instead.
    Chains longer than ``max_len`` are cut to their first ``max_len`` terms.
    Sorted by first element, then length, then lexicographically.
    """
    values = [dprime(d) for d in seq.terms] if use_dprime else list(seq.terms)
    chains = _maximal_chains(values)
    if max_len is not None:
        chains = list(dict.fromkeys(c[:max_len] for c in chains))
    chains.sort(key=lambda c: (c[0], len(c), c))
    return [Tower(c) for c in chains]
