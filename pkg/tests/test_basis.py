import numpy as np
import pytest
from hypothesis import given, strategies as st

from inextensible.basis import (BeamBasis, ModeBasis, PlateBasis, clamped_free_roots, free_free_roots,
                                grid1d)

# [DERIVED] roots of cos b cosh b = -1 and = +1, mpmath findroot at 30 digits
CLAMPED_FREE = [1.8751040687119612, 4.6940911329741746, 7.8547574382376126,
                10.995540734875467, 14.137168391046471, 17.278759532088236]
FREE_FREE = [4.730040744862704, 7.8532046240958376, 10.995607838001671]


def test_characteristic_roots_match_oracle():
    np.testing.assert_allclose(clamped_free_roots(6), CLAMPED_FREE, rtol=1e-13)
    np.testing.assert_allclose(free_free_roots(3), FREE_FREE, rtol=1e-13)


@given(n=st.integers(2, 30), degree=st.integers(0, 20), a=st.floats(-2, 0), width=st.floats(0.1, 3))
def test_gauss_rule_exact_to_degree(n, degree, a, width):
    if degree > 2 * n - 1:
        return
    g = grid1d(n, a, a + width)
    b = a + width
    exact = (b ** (degree + 1) - a ** (degree + 1)) / (degree + 1)
    assert g.integrate(g.nodes ** degree) == pytest.approx(exact, rel=1e-12, abs=1e-12)


@given(n=st.integers(3, 24))
def test_cumulative_and_tail_operators(n):
    g = grid1d(n, 0.0, 2.0)
    f = np.cos(g.nodes)
    np.testing.assert_allclose(g.C @ f + g.T @ f, g.integrate(f), atol=1e-13)
    assert np.all(g.tail_rows([2.0]) == 0.0)
    # summation by parts: C^T W = W T
    np.testing.assert_allclose(g.C.T * g.weights, g.weights[:, None] * g.T, atol=1e-14)


@given(n=st.integers(4, 20), degree=st.integers(0, 3))
def test_differentiation_exact_on_polynomials(n, degree):
    g = grid1d(n, 0.0, 1.0)
    p = np.polynomial.Polynomial(np.arange(1.0, degree + 2))
    np.testing.assert_allclose(g.D @ p(g.nodes), p.deriv()(g.nodes), atol=1e-9)


@pytest.mark.parametrize("kind", ["clamped-free", "free-free"])
def test_mode_basis_orthonormal(kind):
    b = ModeBasis(kind, 1.3, 6)
    np.testing.assert_allclose(b.gram(), np.eye(6), atol=1e-12)


def test_clamped_free_boundary_conditions():
    b = ModeBasis("clamped-free", 2.0, 6)
    for d in (0, 1):
        np.testing.assert_allclose(b.evaluate(d, [0.0]), 0.0, atol=1e-12)
    for d in (2, 3):
        scale = np.max(np.abs(b.samples[d]), axis=0)
        np.testing.assert_allclose(b.evaluate(d, [2.0])[0] / scale, 0.0, atol=1e-12)


def test_free_free_rigid_functions():
    b = ModeBasis("free-free", 2.0, 3)
    x = b.grid.nodes
    np.testing.assert_allclose(b.samples[0][:, 0], 1 / np.sqrt(2.0), rtol=1e-14)
    np.testing.assert_allclose(b.samples[0][:, 1], np.sqrt(12 / 8.0) * (x - 1.0), rtol=1e-12)


def test_plate_basis_tensor_structure(rng):
    b = PlateBasis(1.0, 0.5, 3, 2)
    q = rng.normal(size=b.n_coeffs)
    F = b.field(q, 1, 1).reshape(b.shape)
    Q = q.reshape(3, 2)
    np.testing.assert_allclose(F, b.x.samples[1] @ Q @ b.y.samples[1].T, atol=1e-12)
    np.testing.assert_allclose(b.mass(), np.eye(6), atol=1e-12)


def test_beam_basis_evaluate_matches_nodes(rng):
    b = BeamBasis(1.0, 4)
    q = rng.normal(size=4)
    np.testing.assert_allclose(b.evaluate(q, 2, 0, b.x.grid.nodes), b.field(q, 2), atol=1e-10)
