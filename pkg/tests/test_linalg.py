import numpy as np
import pytest

from covbreak.errors import NotPositiveDefiniteError
from covbreak.linalg import (
    SpdMatrix,
    matrix_dim,
    spd_quadratic_form,
    spectral_norm,
    sym_exp,
    sym_exp_series,
    sym_exp_sqrt,
    unvech,
    vech,
    vech_dim,
)

from naive import naive_vech


def random_symmetric(rng, d, scale=1.0):
    m = rng.standard_normal((d, d))
    return scale * (m + m.T) / 2.0


def test_vech_basic_cases():
    a, b, c = 1.5, -2.0, 7.0
    assert np.array_equal(vech(np.array([[a, b], [b, c]])), [a, b, c])
    assert np.array_equal(vech(np.eye(2)), [1.0, 0.0, 1.0])
    ones = vech(np.ones((3, 3)))
    assert ones.shape == (6,)
    assert np.array_equal(ones, np.ones(6))


def test_vech_is_column_major_lower_triangle():
    m = np.array([[11.0, 21.0, 31.0], [21.0, 22.0, 32.0], [31.0, 32.0, 33.0]])
    assert np.array_equal(vech(m), [11, 21, 31, 22, 32, 33])
    rng = np.random.default_rng(0)
    for _ in range(20):
        d = rng.integers(1, 7)
        m = random_symmetric(rng, d)
        assert np.array_equal(vech(m), naive_vech(m))


def test_unvech_basic_cases():
    assert np.array_equal(unvech(np.array([1.0, 0.0, 1.0]), dim=2), np.eye(2))
    a, b, c = 0.3, -1.0, 2.0
    assert np.array_equal(unvech(np.array([a, b, c])), [[a, b], [b, c]])


def test_vech_unvech_round_trip_exact():
    rng = np.random.default_rng(1)
    for d in (1, 2, 5, 8):
        m = random_symmetric(rng, d)
        assert np.array_equal(unvech(vech(m)), m)
        v = rng.standard_normal(vech_dim(d))
        assert np.array_equal(vech(unvech(v)), v)


def test_unvech_rejects_bad_lengths():
    with pytest.raises(ValueError):
        unvech(np.zeros(4))
    with pytest.raises(ValueError):
        unvech(np.zeros(3), dim=3)
    with pytest.raises(ValueError):
        matrix_dim(5)


def test_spectral_norm_cases():
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0)
    assert spectral_norm(np.diag([2.0, -3.0])) == pytest.approx(3.0)
    assert spectral_norm(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        spectral_norm(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_spectral_norm_submultiplicative():
    rng = np.random.default_rng(2)
    for _ in range(200):
        d = rng.integers(1, 6)
        m = rng.standard_normal((d, d))
        n = rng.standard_normal((d, d))
        assert spectral_norm(m @ n) <= spectral_norm(m) * spectral_norm(n) * (1 + 1e-12)


def test_spectral_norm_power_iteration_path():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((90, 90))
    assert spectral_norm(m) == pytest.approx(float(np.linalg.norm(m, 2)), rel=1e-9)


def test_sym_exp_cases():
    assert np.allclose(sym_exp(np.zeros((3, 3))).matrix, np.eye(3))
    e = sym_exp(np.diag([1.0, -2.0])).matrix
    assert np.allclose(e, np.diag([np.e, np.exp(-2.0)]))


def test_sym_exp_inverse_identity():
    rng = np.random.default_rng(4)
    for _ in range(50):
        d = rng.integers(1, 6)
        m = random_symmetric(rng, d)
        norm = spectral_norm(m)
        if norm > 5.0:
            m *= 5.0 / norm
        prod = sym_exp(m).matrix @ sym_exp(-m).matrix
        assert np.allclose(prod, np.eye(d), atol=1e-10)


def test_sym_exp_sqrt_squares_to_exp():
    assert np.allclose(sym_exp_sqrt(np.zeros((2, 2))).matrix, np.eye(2))
    assert sym_exp_sqrt(np.array([[2.0 * np.log(2.0)]])).matrix[0, 0] == pytest.approx(2.0)
    rng = np.random.default_rng(5)
    for _ in range(30):
        m = random_symmetric(rng, 4)
        root = sym_exp_sqrt(m).matrix
        assert np.allclose(root @ root, sym_exp(m).matrix, atol=1e-10)


def test_sym_exp_results_are_positive_definite():
    rng = np.random.default_rng(6)
    for _ in range(50):
        m = random_symmetric(rng, rng.integers(1, 7), scale=2.0)
        SpdMatrix(sym_exp(m).matrix)  # construction is the check


def test_sym_exp_series_agrees_with_eigendecomposition():
    rng = np.random.default_rng(7)
    for _ in range(30):
        m = random_symmetric(rng, rng.integers(1, 6), scale=1.5)
        assert np.allclose(sym_exp_series(m), sym_exp(m).matrix, rtol=1e-10, atol=1e-12)


def test_spd_quadratic_form_cases():
    assert spd_quadratic_form(np.eye(2), np.array([3.0, 4.0])) == pytest.approx(25.0)
    assert spd_quadratic_form(np.diag([4.0, 4.0]), np.array([2.0, 2.0])) == pytest.approx(2.0)


def test_spd_quadratic_form_explicit_inverse_oracle():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = rng.standard_normal((6, 6))
        m = a @ a.T + 6 * np.eye(6)
        v = rng.standard_normal(6)
        expected = float(v @ np.linalg.inv(m) @ v)
        assert spd_quadratic_form(m, v) == pytest.approx(expected, rel=1e-10)


def test_spd_quadratic_form_positive_for_nonzero():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((5, 5))
    m = SpdMatrix(a @ a.T + 5 * np.eye(5))
    for _ in range(50):
        v = rng.standard_normal(5)
        assert m.quadratic_form(v) > 0.0
    assert m.quadratic_form(np.zeros(5)) == 0.0


def test_spd_rejects_indefinite_with_minor_index():
    with pytest.raises(NotPositiveDefiniteError) as exc:
        SpdMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert exc.value.minor == 2
    with pytest.raises(ValueError):
        SpdMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))  # not symmetric


def test_vech_norm_bounds_spectral_norm():
    # |M|_E <= sqrt(2) |vech M| for symmetric M
    rng = np.random.default_rng(10)
    for _ in range(1000):
        d = rng.integers(1, 8)
        m = random_symmetric(rng, d, scale=rng.uniform(0.1, 10.0))
        assert spectral_norm(m) <= np.sqrt(2.0) * np.linalg.norm(vech(m)) * (1 + 1e-12)
