import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diracsobolev.clifford import (
    PAULI,
    apply_matrix,
    dirac_matrices,
    dirac_symbol,
    inverse_symbol,
    vec_p_norm,
)

ALPHA, BETA = dirac_matrices()
GAMMAS = (*ALPHA, BETA)


@pytest.mark.parametrize("j", range(4))
@pytest.mark.parametrize("k", range(4))
def test_anticommutation(j, k):
    a, b = GAMMAS[j], GAMMAS[k]
    expected = 2 * np.eye(4) if j == k else np.zeros((4, 4))
    np.testing.assert_array_equal(a @ b + b @ a, expected)


def test_pauli_relations():
    s1, s2, s3 = PAULI
    np.testing.assert_array_equal(s1 @ s2, 1j * s3)
    for s in PAULI:
        np.testing.assert_array_equal(s @ s, np.eye(2))


@pytest.mark.parametrize("m", GAMMAS)
def test_hermitian_unitary(m):
    np.testing.assert_array_equal(m, m.conj().T)
    np.testing.assert_array_equal(m @ m, np.eye(4))


def test_matrices_read_only():
    with pytest.raises(ValueError):
        ALPHA[0][0, 0] = 1
    assert dirac_matrices() is dirac_matrices()


def test_alpha_1_is_a_permutation():
    # alpha_1 swaps slots (1,4) and (2,3)
    np.testing.assert_array_equal(ALPHA[0] @ np.array([1, 2, 3, 4]), [4, 3, 2, 1])


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, 10])
@pytest.mark.parametrize("j", range(3))
def test_isometry_batch(p, j):
    rng = np.random.default_rng(11)
    a = rng.standard_normal((4, 10_000)) + 1j * rng.standard_normal((4, 10_000))
    before = vec_p_norm(a, p)
    after = vec_p_norm(apply_matrix(ALPHA[j], a), p)
    assert np.max(np.abs(after - before) / before) <= 1e-12


def test_vec_p_norm_values():
    a = np.array([3.0, -4.0, 0.0, 0.0])
    assert vec_p_norm(a, 1) == 7
    assert vec_p_norm(a, 2) == pytest.approx(5, abs=1e-15)


@pytest.mark.parametrize("p", [0.5, np.inf, np.nan])
def test_vec_p_norm_rejects(p):
    with pytest.raises(ValueError):
        vec_p_norm(np.ones(4), p)


def test_symbol_at_zero_is_beta():
    np.testing.assert_array_equal(dirac_symbol((0.0, 0.0, 0.0)), BETA)
    np.testing.assert_array_equal(dirac_symbol((0.0, 0.0, 0.0), mass_term=False), np.zeros((4, 4)))


def test_symbol_broadcast_shape():
    xi = (np.zeros((2, 1, 1)), np.zeros((1, 3, 1)), np.zeros((1, 1, 5)))
    assert dirac_symbol(xi).shape == (4, 4, 2, 3, 5)


def test_symbol_operator_norm():
    # (alpha.xi + beta)^2 = (1 + |xi|^2) I, so all singular values are sqrt(1 + |xi|^2)
    xi = np.array([0.3, -1.2, 2.0])
    s = np.linalg.svd(dirac_symbol(tuple(xi)), compute_uv=False)
    np.testing.assert_allclose(s, np.sqrt(1 + xi @ xi), rtol=1e-14)


finite = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(finite, finite, finite)
def test_inverse_symbol_property(x, y, z):
    prod = dirac_symbol((x, y, z)) @ inverse_symbol((x, y, z))
    np.testing.assert_allclose(prod, np.eye(4), atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(finite, finite, finite)
def test_massless_symbol_squares_to_norm(x, y, z):
    s = dirac_symbol((x, y, z), mass_term=False)
    np.testing.assert_allclose(s @ s, (x * x + y * y + z * z) * np.eye(4), atol=1e-10 * (1 + x * x + y * y + z * z))
