"""Numerical search for SIC fiducial vectors.

A fiducial is a unit vector ``v`` whose displacement overlaps all satisfy
``|<v|D_p|v>|**2 = 1/(d+1)`` for ``p != 0``.  The search minimises the
normalised frame potential over a Clifford eigenspace in IEEE double
precision, refines the best candidate with Gauss-Newton steps on the overlap
conditions, and can then polish it at arbitrary binary precision.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .clifford import OrderUndeterminedError, clifford_unitary, projective_order
from .wh_group import (
    DimensionContext,
    SymplecticMatrix,
    fa_matrix,
    make_context,
    zauner_matrix,
)

__all__ = [
    "SymmetryType",
    "Fiducial",
    "SearchConfig",
    "Eigenspace",
    "PolishError",
    "sic_residual",
    "frame_potential",
    "frame_potential_gradient",
    "zauner_eigenspaces",
    "zauner_eigenspace_basis",
    "search",
    "polish",
    "normalize_phase",
    "POLISH_ENTRY_RESIDUAL",
]

POLISH_ENTRY_RESIDUAL = 1e-6
COARSE_BITS = 53


class SymmetryType(str, enum.Enum):
    TYPE_Z = "z"
    TYPE_A = "a"
    UNKNOWN = "unknown"


class PolishError(RuntimeError):
    """High-precision refinement was refused or did not converge."""


@dataclass(frozen=True)
class Fiducial:
    """Candidate fiducial vector with its SIC defect.

    Attributes
    ----------
    vector : tuple of mpmath.mpc
        Unit vector, phase-normalised by :func:`normalize_phase`.
    dimension : int
    residual : mpmath.mpf
        ``sic_residual`` of ``vector`` at ``precision_bits``.
    seed : int
        Sub-seed of the restart that produced the vector.
    symmetry_type : SymmetryType
        Eigenspace the vector was searched in, if any.
    precision_bits : int
    converged : bool
        Whether the residual met the target of the run that produced it.
    """

    vector: tuple
    dimension: int
    residual: object
    seed: int
    symmetry_type: SymmetryType = SymmetryType.UNKNOWN
    precision_bits: int = COARSE_BITS
    converged: bool = False

    def context(self) -> DimensionContext:
        return make_context(self.dimension, self.precision_bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.vector, dtype=object)

    def as_complex(self) -> np.ndarray:
        return np.array([complex(z) for z in self.vector])


@dataclass(frozen=True)
class SearchConfig:
    """Settings for :func:`search`.

    The coarse stage always runs in IEEE double precision, so
    ``coarse_precision_bits`` must be 53.  When ``polish_precision_bits``
    exceeds it, converged candidates are passed to :func:`polish`.
    """

    max_restarts: int = 40
    inner_iterations: int = 3000
    coarse_precision_bits: int = COARSE_BITS
    polish_precision_bits: int = COARSE_BITS
    eigenspace_restriction: bool = True
    rng_seed: int = 1
    target_residual: float = 1e-13
    symmetry: SymmetryType = SymmetryType.TYPE_Z

    def __post_init__(self):
        if self.max_restarts < 1 or self.inner_iterations < 1:
            raise ValueError("max_restarts and inner_iterations must be positive")
        if self.coarse_precision_bits != COARSE_BITS:
            raise ValueError("the coarse stage runs in IEEE double precision (53 bits)")
        if self.polish_precision_bits < self.coarse_precision_bits:
            raise ValueError("polish precision must be >= coarse precision")
        if not self.target_residual > 0:
            raise ValueError("target_residual must be positive")
        object.__setattr__(self, "symmetry", SymmetryType(self.symmetry))
        if self.symmetry is SymmetryType.UNKNOWN and self.eigenspace_restriction:
            raise ValueError("eigenspace restriction needs symmetry 'z' or 'a'")


# ---------------------------------------------------------------------------
# overlap kernel, shared by complex128 arrays and mpc object arrays


@dataclass
class _Kernel:
    d: int
    W: np.ndarray  # W[r, k] = omega**(r k)
    shift_fwd: np.ndarray = field(init=False)  # (s + p1) % d
    shift_back: np.ndarray = field(init=False)  # (s - p1) % d

    def __post_init__(self):
        s = np.arange(self.d)
        self.shift_fwd = (s[None, :] + s[:, None]) % self.d
        self.shift_back = (s[None, :] - s[:, None]) % self.d

    @classmethod
    def double(cls, d: int) -> "_Kernel":
        r = np.arange(d)
        return cls(d, np.exp(2j * np.pi * np.outer(r, r) / d))

    @classmethod
    def exact(cls, ctx: DimensionContext) -> "_Kernel":
        d = ctx.d
        W = np.empty((d, d), dtype=object)
        for r in range(d):
            for k in range(d):
                W[r, k] = ctx.omega_pow(r * k)
        return cls(d, W)

    def left_rows(self, v: np.ndarray) -> np.ndarray:
        # L[p, s] with <v|D'_p|v> = L[p] @ v, D'_p = X**p1 Z**p2, p flattened as p1 d + p2
        d = self.d
        L = np.conj(v)[self.shift_fwd][:, None, :] * self.W.T[None, :, :]
        return L.reshape(d * d, d)

    def applied(self, v: np.ndarray) -> np.ndarray:
        # rows X**p1 Z**p2 v
        d = self.d
        T = self.W[self.shift_back] * v[self.shift_back][:, :, None]
        return T.transpose(0, 2, 1).reshape(d * d, d)

    def overlaps(self, v: np.ndarray) -> np.ndarray:
        return self.left_rows(v) @ v

    def jacobian(self, B: np.ndarray, c: np.ndarray):
        """Overlaps ``h`` of ``v = B c`` and the real Jacobian of ``|h|**2``.

        Columns are ordered (Re c, Im c).
        """
        v = B @ c
        L = self.left_rows(v)
        h = L @ v
        a = self.applied(v) @ np.conj(B)
        b = L @ B
        hb = np.conj(h)[:, None]
        jx = 2 * _real(hb * (a + b))
        jy = -2 * _imag(hb * (b - a))
        return h, np.concatenate([jx, jy], axis=1)


_RE = np.frompyfunc(lambda z: z.real, 1, 1)
_IM = np.frompyfunc(lambda z: z.imag, 1, 1)


def _real(a: np.ndarray) -> np.ndarray:
    return _RE(a) if a.dtype == object else a.real


def _imag(a: np.ndarray) -> np.ndarray:
    return _IM(a) if a.dtype == object else a.imag


def _as_vector(ctx: DimensionContext, v) -> np.ndarray:
    arr = ctx.convert(v).reshape(-1)
    if arr.shape[0] != ctx.d:
        raise ValueError(f"vector length {arr.shape[0]} does not match d={ctx.d}")
    return arr


def _norm2(ctx: DimensionContext, v: np.ndarray):
    return ctx.mp.fsum(abs(z) ** 2 for z in v)


def _squared_overlaps(ctx: DimensionContext, v):
    v = _as_vector(ctx, v)
    n2 = _norm2(ctx, v)
    if n2 == 0:
        raise ValueError("zero vector has no overlaps")
    h = _Kernel.exact(ctx).overlaps(v)
    return [abs(z) ** 2 / n2**2 for z in h]


def sic_residual(ctx: DimensionContext, v):
    """Max over nonzero ``p`` of ``| |<v|D_p|v>|**2 - 1/(d+1) |`` for unit ``v``.

    The vector is normalised first, so any nonzero ``v`` is accepted.
    """
    sq = _squared_overlaps(ctx, v)
    target = ctx.mp.mpf(1) / (ctx.d + 1)
    return max(abs(x - target) for x in sq[1:])


def frame_potential(ctx: DimensionContext, v):
    """``sum_p |<v|D_p|v>|**4`` over all ``p`` in ``(Z/d)**2``.

    Bounded below by ``2 d / (d + 1)`` with equality exactly at fiducials.
    """
    return ctx.mp.fsum(x**2 for x in _squared_overlaps(ctx, v))


def _potential_and_gradient(kernel: _Kernel, B: np.ndarray, x: np.ndarray):
    m = B.shape[1]
    c = x[:m] + 1j * x[m:]
    h, J = kernel.jacobian(B, c)
    g2 = (h * h.conj()).real
    F = float(np.sum(g2**2))
    N = float(np.sum(x**2))
    grad_F = 2 * J.T @ g2
    f = F / N**4
    grad = grad_F / N**4 - 8 * F / N**5 * x
    return f, grad


def frame_potential_gradient(v: np.ndarray):
    """Value and real gradient of ``sum_p |<v|D_p|v>|**4 / ||v||**8`` in double.

    The gradient is taken with respect to ``(Re v, Im v)``.
    """
    v = np.asarray(v, dtype=complex)
    d = v.shape[0]
    x = np.concatenate([v.real, v.imag])
    return _potential_and_gradient(_Kernel.double(d), np.eye(d, dtype=complex), x)


# ---------------------------------------------------------------------------
# Clifford eigenspaces


@dataclass(frozen=True)
class Eigenspace:
    """Eigenspace of a phase-normalised order-3 Clifford unitary.

    ``eigen_index`` k labels the eigenvalue ``exp(2 pi i k / 3)``.
    """

    eigen_index: int
    basis: np.ndarray

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


def _column_span(ctx: DimensionContext, P: np.ndarray, rank: int) -> np.ndarray:
    # pivoted Gram-Schmidt on the columns of a projector
    mp = ctx.mp
    d = P.shape[0]
    cols = [P[:, j].copy() for j in range(d)]
    basis = []
    for _ in range(rank):
        norms = [mp.sqrt(_norm2(ctx, col)) for col in cols]
        j = max(range(d), key=lambda k: norms[k])
        q = cols[j] / norms[j]
        basis.append(q)
        for k in range(d):
            cols[k] = cols[k] - q * mp.fsum(qi.conjugate() * ck for qi, ck in zip(q, cols[k]))
    out = np.empty((d, rank), dtype=object)
    for j, q in enumerate(basis):
        out[:, j] = q
    return out


def zauner_eigenspaces(ctx: DimensionContext, F: SymplecticMatrix) -> list[Eigenspace]:
    """All nonzero eigenspaces of ``U_F`` for an order-3 ``F``.

    ``U_F`` is rescaled so that its cube is the identity, using the principal
    cube root of the scalar ``U_F**3``.  The list is sorted by decreasing
    dimension, then by eigen index, so eigenvalue 1 wins ties.
    """
    U = clifford_unitary(ctx, F)
    if U.antiunitary:
        raise ValueError("an anti-unitary has no complex eigenspaces")
    try:
        order = projective_order(ctx, U, bound=3)
    except OrderUndeterminedError:
        order = None
    if order != 3:
        raise ValueError(f"U_F must have projective order 3, got {order}")
    mp = ctx.mp
    d = ctx.d
    cube = (U @ U @ U).entries
    scalar = mp.fsum(cube[i, i] for i in range(d)) / d
    V = U.entries / mp.root(scalar, 3)
    V2 = V.dot(V)
    eye = ctx.identity()
    spaces = []
    for k in range(3):
        lam = mp.expjpi(mp.mpf(-2 * k) / 3)  # conjugate eigenvalue
        P = (eye + V * lam + V2 * lam**2) / 3
        rank = int(mp.nint(mp.re(mp.fsum(P[i, i] for i in range(d)))))
        if rank:
            spaces.append(Eigenspace(k, _column_span(ctx, P, rank)))
    spaces.sort(key=lambda s: (-s.dimension, s.eigen_index))
    return spaces


def zauner_eigenspace_basis(ctx: DimensionContext, F: SymplecticMatrix) -> np.ndarray:
    """Orthonormal basis (as columns) of the largest eigenspace of ``U_F``."""
    return zauner_eigenspaces(ctx, F)[0].basis


def _symmetry_matrix(ctx: DimensionContext, kind: SymmetryType) -> SymplecticMatrix:
    return fa_matrix(ctx) if kind is SymmetryType.TYPE_A else zauner_matrix(ctx)


# ---------------------------------------------------------------------------
# search


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its first component of modulus above half the maximum is real positive."""
    mags = [abs(z) for z in v]
    top = max(mags)
    for z, m in zip(v, mags):
        if m > top / 2:
            return v * (z.conjugate() / m)
    return v


def _gauss_newton_double(kernel: _Kernel, B: np.ndarray, c: np.ndarray, sweeps: int = 30) -> np.ndarray:
    m = B.shape[1]
    best, best_res = c, _double_residual(kernel, B @ c)
    for _ in range(sweeps):
        r, J = _residual_system(kernel, B, c, lambda z: z.real)
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        c = c + step[:m] + 1j * step[m:]
        c = c / np.linalg.norm(c)
        res = _double_residual(kernel, B @ c)
        if res < best_res:
            best, best_res = c, res
        elif res > 0.5 * best_res:
            break
    return best


def _residual_system(kernel: _Kernel, B, c, real):
    """Residuals ``|h_p|**2 - N**2/(d+1)`` for ``p != 0`` plus ``N - 1``, with Jacobian."""
    d = kernel.d
    h, J = kernel.jacobian(B, c)
    N = sum(real(z * z.conjugate()) for z in c)
    g2 = np.array([real(z * z.conjugate()) for z in h[1:]], dtype=J.dtype)
    r = g2 - N**2 / (d + 1)
    grad_N = np.concatenate([_real(c) * 2, _imag(c) * 2])
    rows = J[1:] - (2 * N / (d + 1)) * grad_N[None, :]
    r_full = np.concatenate([r, np.array([N - 1], dtype=J.dtype)])
    J_full = np.concatenate([rows, grad_N[None, :]], axis=0)
    return r_full, J_full


def _double_residual(kernel: _Kernel, v: np.ndarray) -> float:
    h = kernel.overlaps(v)
    g2 = (h * h.conj()).real / np.vdot(v, v).real ** 2
    return float(np.max(np.abs(g2[1:] - 1 / (kernel.d + 1))))


def _coarse_restart(kernel: _Kernel, B: np.ndarray, rng: np.random.Generator, iterations: int):
    m = B.shape[1]
    x0 = rng.standard_normal(2 * m)
    opt = minimize(
        lambda x: _potential_and_gradient(kernel, B, x),
        x0,
        jac=True,
        method="CG",
        options={"maxiter": iterations, "gtol": 1e-12},
    )
    c = opt.x[:m] + 1j * opt.x[m:]
    c = c / np.linalg.norm(c)
    c = _gauss_newton_double(kernel, B, c)
    v = B @ c
    return v, _double_residual(kernel, v)


def _complex_basis(basis: np.ndarray) -> np.ndarray:
    return np.array([[complex(z) for z in row] for row in basis])


def search(ctx: DimensionContext, cfg: SearchConfig | None = None) -> Fiducial:
    """Look for a fiducial by restarted frame-potential minimisation.

    Each restart draws its starting point from a sub-seed spawned from
    ``cfg.rng_seed``.  With eigenspace restriction on, restarts cycle through
    the eigenspaces of maximal dimension, starting with eigenvalue 1.  The
    first restart reaching ``cfg.target_residual`` is returned; otherwise the
    candidate with the smallest residual, earliest restart first on ties, is
    returned unconverged.

    Examples
    --------
    >>> f = search(make_context(3), SearchConfig(rng_seed=1))
    >>> f.converged
    True
    """
    cfg = cfg or SearchConfig()
    d = ctx.d
    kernel = _Kernel.double(d)
    if cfg.eigenspace_restriction:
        spaces = zauner_eigenspaces(make_context(d, 128), _symmetry_matrix(make_context(d, 128), cfg.symmetry))
        top = [s for s in spaces if s.dimension == spaces[0].dimension]
        bases = [_complex_basis(s.basis) for s in top]
        kind = cfg.symmetry
    else:
        bases = [np.eye(d, dtype=complex)]
        kind = SymmetryType.UNKNOWN
    children = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.max_restarts)
    best = None
    for i, child in enumerate(children):
        B = bases[i % len(bases)]
        v, res = _coarse_restart(kernel, B, np.random.default_rng(child), cfg.inner_iterations)
        if best is None or res < best[1]:
            best = (v, res, i)
        if res <= cfg.target_residual:
            break
    v, res, i = best
    vec = normalize_phase(ctx.convert(v / np.linalg.norm(v)))
    residual = sic_residual(ctx, vec)
    fid = Fiducial(
        vector=tuple(vec),
        dimension=d,
        residual=residual,
        seed=i,
        symmetry_type=kind,
        precision_bits=ctx.precision_bits,
        converged=bool(res <= cfg.target_residual),
    )
    if fid.converged and cfg.polish_precision_bits > cfg.coarse_precision_bits:
        fid = polish(ctx, fid, cfg.polish_precision_bits)
    return fid


# ---------------------------------------------------------------------------
# high-precision refinement


def _solve_damped(mp, J: np.ndarray, r: np.ndarray, damping):
    n = J.shape[1]
    JT = J.T
    A = mp.matrix(n, n)
    g = mp.matrix(n, 1)
    for i in range(n):
        col_i = JT[i]
        g[i] = -mp.fsum(a * b for a, b in zip(col_i, r))
        for j in range(i, n):
            A[i, j] = A[j, i] = mp.fsum(a * b for a, b in zip(col_i, JT[j]))
    scale = max(abs(A[i, i]) for i in range(n))
    for i in range(n):
        A[i, i] += damping * scale
    step = mp.lu_solve(A, g)
    return np.array([step[i] for i in range(n)], dtype=object)


def _pick_basis(ctx: DimensionContext, f: Fiducial, v: np.ndarray) -> np.ndarray:
    if f.symmetry_type is SymmetryType.UNKNOWN:
        return ctx.identity()
    try:
        spaces = zauner_eigenspaces(ctx, _symmetry_matrix(ctx, f.symmetry_type))
    except ValueError:
        return ctx.identity()
    mp = ctx.mp

    def weight(space: Eigenspace):
        proj = space.basis.T.dot(np.conj(v))
        return mp.fsum(abs(z) ** 2 for z in proj)

    best = max(spaces, key=weight)
    # fall back to the full space if the vector is not inside the eigenspace
    if 1 - weight(best) > mp.sqrt(mp.mpf(f.residual)) + mp.mpf(10) ** -12:
        return ctx.identity()
    return best.basis


def polish(ctx: DimensionContext, f: Fiducial, bits: int, max_steps: int = 80) -> Fiducial:
    """Refine a fiducial at ``bits`` binary precision.

    Damped Gauss-Newton iterations on the conditions
    ``|<v|D_p|v>|**2 = ||v||**4 / (d+1)`` with ``||v|| = 1`` are run inside
    the eigenspace the fiducial came from.  Convergence is quadratic, so
    the residual roughly squares at each step until it reaches the
    working precision.

    Raises
    ------
    PolishError
        If ``f.residual`` is not below ``POLISH_ENTRY_RESIDUAL``, or the
        residual fails to decrease on five consecutive steps while still
        above both the input residual and ``10**(-0.2 bits)``.
    """
    if not f.residual < POLISH_ENTRY_RESIDUAL:
        raise PolishError(f"residual {float(f.residual):.3e} too large to polish")
    if f.dimension != ctx.d:
        raise ValueError("fiducial dimension does not match the context")
    hi = make_context(ctx.d, bits)
    mp = hi.mp
    kernel = _Kernel.exact(hi)
    v0 = hi.convert(list(f.vector))
    B = _pick_basis(hi, f, v0)
    c = B.T.dot(np.conj(v0)).conj()
    c = c / mp.sqrt(_norm2(hi, c))
    floor = mp.ldexp(mp.mpf(1), -bits + 2 * max(1, ctx.d.bit_length()) + 4)
    damping = mp.ldexp(mp.mpf(1), -(bits // 2))
    target = mp.mpf(10) ** (-0.2 * bits)

    def measure(coeffs):
        return sic_residual(hi, B.dot(coeffs))

    res = measure(c)
    failures = 0
    for _ in range(max_steps):
        if res <= floor:
            break
        r, J = _residual_system(kernel, B, c, mp.re)
        step = _solve_damped(mp, J, r, damping)
        m = B.shape[1]
        delta = step[:m] + step[m:] * mp.mpc(0, 1)
        # the doubled step restores fast convergence at multiplicity-two zeros
        candidates = []
        for factor in (1, 2):
            trial = c + delta * factor
            trial = trial / mp.sqrt(_norm2(hi, trial))
            candidates.append((measure(trial), factor, trial))
        new, _, trial = min(candidates, key=lambda t: (t[0], t[1]))
        if new < res:
            c, res, failures = trial, new, 0
            damping = max(damping / 16, mp.ldexp(mp.mpf(1), -bits))
        else:
            failures += 1
            damping *= 256
            if failures >= 5:
                # a stall is only a failure short of the 10**(-0.2 bits) target
                if res < f.residual or res <= target:
                    break
                raise PolishError("residual failed to decrease on five consecutive steps")
    v = normalize_phase(B.dot(c))
    start = normalize_phase(v0 / mp.sqrt(_norm2(hi, v0)))
    start_res = sic_residual(hi, start)
    if start_res <= res:
        v, res = start, start_res
    return Fiducial(
        vector=tuple(v),
        dimension=f.dimension,
        residual=res,
        seed=f.seed,
        symmetry_type=f.symmetry_type,
        precision_bits=bits,
        converged=bool(res < POLISH_ENTRY_RESIDUAL),
    )
