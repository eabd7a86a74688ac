import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sicnum.clifford import clifford_unitary
from sicnum.fiducial_search import (
    Fiducial,
    PolishError,
    SearchConfig,
    SymmetryType,
    frame_potential,
    frame_potential_gradient,
    normalize_phase,
    polish,
    search,
    sic_residual,
    zauner_eigenspace_basis,
    zauner_eigenspaces,
)
from sicnum.wh_group import SymplecticMatrix, displacement, esl_elements, make_context, zauner_matrix

from .conftest import coarse_fiducial
from .oracles import (
    E0_QUBIT_FRAME_POTENTIAL,
    E0_QUBIT_RESIDUAL,
    QUTRIT_FIDUCIAL,
    QUTRIT_FRAME_POTENTIAL,
    ZAUNER_MULTIPLICITIES,
    dense_residual,
    qubit_tetrahedral_state,
)


def qutrit_fiducial(bits=256):
    ctx = make_context(3, bits)
    v = [ctx.mp.mpf(0), 1 / ctx.mp.sqrt(2), -1 / ctx.mp.sqrt(2)]
    return ctx, Fiducial(tuple(ctx.mp.mpc(z) for z in v), 3, sic_residual(ctx, v), 0, SymmetryType.UNKNOWN, bits, True)


class TestResidual:
    def test_tetrahedral_qubit(self):
        assert sic_residual(make_context(2, 53), qubit_tetrahedral_state()) < 1e-12

    def test_qutrit_fiducial(self):
        assert sic_residual(make_context(3, 53), QUTRIT_FIDUCIAL) < 1e-12

    def test_basis_vector_qubit(self):
        ctx = make_context(2, 128)
        r = sic_residual(ctx, [1, 0])
        assert abs(r - ctx.mp.mpf(E0_QUBIT_RESIDUAL.numerator) / E0_QUBIT_RESIDUAL.denominator) < 1e-35

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            sic_residual(make_context(3, 53), [0, 0, 0])

    @pytest.mark.parametrize("d", range(2, 8))
    def test_agrees_with_dense_reference(self, d):
        v = np.random.default_rng(d).normal(size=d) + 1j * np.random.default_rng(d + 50).normal(size=d)
        assert abs(float(sic_residual(make_context(d, 53), v)) - dense_residual(v)) < 1e-12


class TestFramePotential:
    def test_qutrit_minimum(self):
        assert abs(frame_potential(make_context(3, 53), QUTRIT_FIDUCIAL) - QUTRIT_FRAME_POTENTIAL) < 1e-12

    def test_basis_vector_qubit(self):
        assert abs(frame_potential(make_context(2, 53), [1, 0]) - E0_QUBIT_FRAME_POTENTIAL) < 1e-12

    @pytest.mark.parametrize("d", range(2, 9))
    def test_lower_bound_on_random_vectors(self, d):
        rng = np.random.default_rng(100 + d)
        V = rng.normal(size=(10_000, d)) + 1j * rng.normal(size=(10_000, d))
        bound = 2 * d / (d + 1)
        for v in V[:200]:
            assert frame_potential_gradient(v)[0] >= bound - 1e-12
        assert all(frame_potential_gradient(v)[0] >= bound - 1e-12 for v in V[200:])


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_gradient_matches_central_differences(d, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    f0, g = frame_potential_gradient(v)
    x = np.concatenate([v.real, v.imag])
    h = 1e-6
    num = np.empty_like(x)
    for k in range(2 * d):
        e = np.zeros_like(x)
        e[k] = h
        fp = frame_potential_gradient((x + e)[:d] + 1j * (x + e)[d:])[0]
        fm = frame_potential_gradient((x - e)[:d] + 1j * (x - e)[d:])[0]
        num[k] = (fp - fm) / (2 * h)
    assert np.linalg.norm(num - g) <= 1e-6 * max(1.0, np.linalg.norm(g))


class TestEigenspaces:
    @pytest.mark.parametrize("d", range(2, 9))
    def test_multiplicities(self, d):
        ctx = make_context(d, 128)
        dims = [s.dimension for s in zauner_eigenspaces(ctx, zauner_matrix(ctx))]
        assert dims == ZAUNER_MULTIPLICITIES[d]
        assert sum(dims) == d

    def test_largest_follows_floor_pattern(self):
        for d in range(2, 9):
            assert ZAUNER_MULTIPLICITIES[d][0] == d // 3 + 1

    def test_basis_is_orthonormal_and_invariant(self):
        ctx = make_context(7, 128)
        B = np.array(zauner_eigenspace_basis(ctx, zauner_matrix(ctx)), dtype=complex)
        assert np.allclose(B.conj().T @ B, np.eye(3), atol=1e-12)
        U = np.array(clifford_unitary(ctx, zauner_matrix(ctx)).entries, dtype=complex)
        UB = U @ B
        # U acts on the eigenspace as a single scalar
        ratio = UB[np.abs(B) > 0.1] / B[np.abs(B) > 0.1]
        assert np.allclose(ratio, ratio[0], atol=1e-10)

    def test_rejects_non_order_three(self):
        ctx = make_context(5, 64)
        with pytest.raises(ValueError):
            zauner_eigenspaces(ctx, SymplecticMatrix(1, 1, 0, 1, 5))


class TestSearch:
    @pytest.mark.parametrize("d", range(2, 8))
    def test_converges(self, d):
        f = coarse_fiducial(d)
        ctx = f.context()
        assert f.converged and f.residual < 1e-12
        assert abs(frame_potential(ctx, list(f.vector)) - ctx.mp.mpf(2 * d) / (d + 1)) < 1e-12
        assert abs(sic_residual(ctx, list(f.vector)) - f.residual) < 1e-15

    def test_unit_norm(self):
        f = coarse_fiducial(5)
        assert abs(np.linalg.norm(f.as_complex()) - 1) < 1e-14

    def test_restricted_search_space(self):
        ctx = make_context(4, 53)
        assert zauner_eigenspace_basis(ctx, zauner_matrix(ctx)).shape == (4, 2)

    def test_deterministic(self):
        cfg = SearchConfig(rng_seed=7)
        assert search(make_context(5, 53), cfg) == search(make_context(5, 53), cfg)

    def test_unconverged_is_flagged(self):
        f = search(make_context(6, 53), SearchConfig(max_restarts=1, inner_iterations=1, target_residual=1e-300))
        assert not f.converged

    def test_type_a_restriction(self):
        f = search(make_context(3, 53), SearchConfig(symmetry="a"))
        assert f.symmetry_type is SymmetryType.TYPE_A and f.converged

    def test_unrestricted(self):
        f = search(make_context(3, 53), SearchConfig(eigenspace_restriction=False, symmetry="unknown"))
        assert f.converged

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SearchConfig(polish_precision_bits=40)
        with pytest.raises(ValueError):
            SearchConfig(coarse_precision_bits=64)

    def test_phase_normalisation(self):
        v = normalize_phase(np.array([0.01, 1j, 0.5]))
        assert v[1].real > 0 and abs(v[1].imag) < 1e-15


class TestPolish:
    def test_d5_reaches_forty_digits(self):
        f = coarse_fiducial(5)
        out = polish(make_context(5, 256), f, 256)
        assert out.residual < 1e-40 and out.residual <= f.residual
        assert out.precision_bits == 256

    def test_exact_fiducial_is_fixed(self):
        ctx, f = qutrit_fiducial()
        out = polish(ctx, f, 256)
        assert max(abs(a - b) for a, b in zip(out.vector, f.vector)) < 1e-60

    def test_random_vector_refused(self):
        ctx = make_context(4, 128)
        v = tuple(ctx.mp.mpc(x) for x in (1, 0.3, 0.2, 0.1))
        f = Fiducial(v, 4, sic_residual(ctx, list(v)), 0)
        with pytest.raises(PolishError):
            polish(ctx, f, 128)


@st.composite
def clifford_moves(draw):
    d = draw(st.integers(2, 7))
    ctx = make_context(d, 96)
    elements = list(esl_elements(ctx))
    F = elements[draw(st.integers(0, len(elements) - 1))]
    p = (draw(st.integers(0, ctx.d_prime - 1)), draw(st.integers(0, ctx.d_prime - 1)))
    return ctx, F, p


@settings(max_examples=40, deadline=None)
@given(clifford_moves())
def test_residual_is_clifford_invariant(args):
    ctx, F, p = args
    f = coarse_fiducial(ctx.d)
    v = np.array([ctx.mp.mpc(z) for z in f.vector], dtype=object)
    w = (displacement(ctx, p) @ clifford_unitary(ctx, F)).apply(v)
    assert abs(sic_residual(ctx, list(w)) - sic_residual(ctx, list(v))) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_potential_minimum_iff_sic(d, seed):
    ctx = make_context(d, 53)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    excess = frame_potential(ctx, v) - ctx.mp.mpf(2 * d) / (d + 1)
    assert excess >= -1e-12
    assert (sic_residual(ctx, v) < 1e-6) == (excess < 1e-10)
