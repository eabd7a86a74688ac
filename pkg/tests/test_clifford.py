import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sicnum.clifford import (
    OrderUndeterminedError,
    clifford_element,
    clifford_unitary,
    covariance_error,
    exact_covariance_error,
    identity_operator,
    phase_aligned_distance,
    projective_order,
)
from sicnum.wh_group import (
    InvariantViolationError,
    SymplecticMatrix,
    UnitaryOperator,
    esl_elements,
    fa_matrix,
    make_context,
    zauner_matrix,
)

from .oracles import dense_displacement


def dense(op):
    return np.array(op.entries, dtype=complex)


def aligned(A, B):
    z = np.vdot(B, A)
    return np.linalg.norm(A - z / abs(z) * B) / np.sqrt(A.shape[0])


def test_identity_matrix_gives_identity():
    ctx = make_context(5, 128)
    U = clifford_unitary(ctx, SymplecticMatrix.identity(5))
    assert phase_aligned_distance(ctx, U.entries, ctx.identity()) < 1e-30


def test_zauner_cube_is_scalar_for_qutrit():
    ctx = make_context(3, 128)
    U = clifford_unitary(ctx, zauner_matrix(ctx))
    assert projective_order(ctx, U) == 3


def test_fourier_matrix_for_d5():
    ctx = make_context(5, 128)
    U = dense(clifford_unitary(ctx, SymplecticMatrix(0, -1, 1, 0, 5)))
    w = np.exp(2j * np.pi / 5)
    j, k = np.meshgrid(range(5), range(5), indexing="ij")
    assert aligned(U, w ** (j * k) / np.sqrt(5)) < 1e-12 or aligned(U, w ** (-j * k) / np.sqrt(5)) < 1e-12
    X, Z = dense_displacement(5, 1, 0), dense_displacement(5, 0, 1)
    assert aligned(U @ X @ U.conj().T, Z) < 1e-12
    assert aligned(U @ Z @ U.conj().T, np.linalg.inv(X)) < 1e-12


@pytest.mark.parametrize("d", range(2, 9))
def test_covariance_every_dimension(d):
    ctx = make_context(d, 256)
    rng = np.random.default_rng(d)
    elements = list(esl_elements(ctx))
    for i in rng.choice(len(elements), size=4, replace=False):
        F = elements[i]
        assert covariance_error(ctx, clifford_unitary(ctx, F), F) < 1e-30


@pytest.mark.parametrize("d", [3, 4, 6])
def test_antiunitary_covariance_dense(d):
    ctx = make_context(d, 64)
    F = next(F for F in esl_elements(ctx) if F.det_sign == -1 and F.b % 2 == 0)
    U = clifford_unitary(ctx, F)
    assert U.antiunitary
    M = dense(U)
    for p in [(1, 0), (0, 1), (1, 1), (2, 3)]:
        q = F.apply(p)
        lhs = M @ dense_displacement(d, *p).conj() @ M.conj().T
        assert aligned(lhs, dense_displacement(d, q.p1, q.p2)) < 1e-10


def test_identity_fails_zauner_covariance():
    ctx = make_context(3, 128)
    assert covariance_error(ctx, identity_operator(ctx), zauner_matrix(ctx)) >= 1


def test_global_phase_does_not_matter():
    ctx = make_context(4, 128)
    F = zauner_matrix(ctx)
    U = clifford_unitary(ctx, F)
    V = U.scaled(ctx.mp.expjpi(ctx.mp.mpf(1) / 7))
    assert abs(covariance_error(ctx, U, F) - covariance_error(ctx, V, F)) < 1e-35


def test_exact_covariance_is_phase_free():
    ctx = make_context(12, 256)
    F = fa_matrix(ctx)
    assert exact_covariance_error(ctx, clifford_unitary(ctx, F), F) < 1e-60


@pytest.mark.parametrize("d,maker", [(4, zauner_matrix), (12, fa_matrix), (12, zauner_matrix)])
def test_order_three_projectively(d, maker):
    ctx = make_context(d, 128)
    assert projective_order(ctx, clifford_unitary(ctx, maker(ctx))) == 3


def test_identity_order_one():
    ctx = make_context(6, 128)
    assert projective_order(ctx, identity_operator(ctx)) == 1


def test_order_bound():
    ctx = make_context(7, 128)
    U = clifford_unitary(ctx, SymplecticMatrix(1, 1, 0, 1, 7))
    with pytest.raises(OrderUndeterminedError):
        projective_order(ctx, U, bound=3)


def test_invalid_modulus_rejected():
    with pytest.raises(InvariantViolationError):
        SymplecticMatrix(3, 0, 0, 3, 9)


def test_clifford_element_labels():
    ctx = make_context(4, 64)
    el = clifford_element(ctx, zauner_matrix(ctx), (9, 3))
    assert el.displacement_part == (1, 3)
    assert isinstance(el.operator, UnitaryOperator)


@st.composite
def unit_pairs(draw):
    d = draw(st.integers(2, 8))
    ctx = make_context(d, 96)
    elements = [F for F in esl_elements(ctx) if F.det == 1]
    F = elements[draw(st.integers(0, len(elements) - 1))]
    G = elements[draw(st.integers(0, len(elements) - 1))]
    return ctx, F, G


@settings(max_examples=40, deadline=None)
@given(unit_pairs())
def test_projectivity(args):
    ctx, F, G = args
    UF, UG = clifford_unitary(ctx, F), clifford_unitary(ctx, G)
    prod = UF @ UG
    assert phase_aligned_distance(ctx, prod.entries, clifford_unitary(ctx, F @ G).entries) < ctx.tolerance


@settings(max_examples=40, deadline=None)
@given(unit_pairs())
def test_unitarity(args):
    ctx, F, _ = args
    assert clifford_unitary(ctx, F).unitarity_error() < ctx.tolerance
