import numpy as np
import pytest

from covbreak.cusum import TestConfig, cusum_path, estimate_theta, run_test
from covbreak.cusum import test_statistics as path_statistics
from covbreak.errors import DataError
from covbreak.linalg import SpdMatrix
from covbreak.longrun import LongRunCov
from covbreak.panel import TimeSeriesPanel

from naive import naive_argmax_k, naive_cusum_path, naive_statistics


def identity_sigma(vdim):
    return LongRunCov(vdim=vdim, matrix=SpdMatrix(np.eye(vdim)), window_used=0, n_used=0)


def test_hand_case_path_and_statistics():
    panel = TimeSeriesPanel(np.array([[1.0], [0.0], [0.0], [1.0]]))
    path = cusum_path(panel, center=False)
    assert np.allclose(path.points.ravel(), [0.25, 0.0, -0.25, 0.0])
    lam, om = path_statistics(path, identity_sigma(1))
    assert lam == pytest.approx(0.0625)
    assert om == pytest.approx(0.03125)


def test_constant_panel_gives_zero_path():
    panel = TimeSeriesPanel(np.tile([1.0, 0.0], (30, 1)))
    path = cusum_path(panel, center=False)
    assert np.allclose(path.points, 0.0, atol=1e-14)


def test_final_point_is_zero():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n, d = int(rng.integers(2, 60)), int(rng.integers(1, 4))
        panel = TimeSeriesPanel(rng.standard_normal((n, d)) * 10)
        for center in (False, True):
            path = cusum_path(panel, center)
            scale = np.abs(path.points).max() + 1.0
            assert np.all(np.abs(path.points[-1]) <= 1e-10 * scale)


def test_path_and_statistics_match_naive_oracle():
    rng = np.random.default_rng(1)
    for _ in range(25):
        n, d = int(rng.integers(5, 51)), int(rng.integers(1, 4))
        y = rng.standard_normal((n, d))
        panel = TimeSeriesPanel(y)
        for center in (False, True):
            path = cusum_path(panel, center)
            ref = naive_cusum_path(y, center)
            assert np.allclose(path.points, ref, rtol=1e-10, atol=1e-12)
            vdim = path.vdim
            a = rng.standard_normal((vdim, vdim))
            sig = SpdMatrix(a @ a.T + vdim * np.eye(vdim))
            cov = LongRunCov(vdim=vdim, matrix=sig, window_used=0, n_used=n)
            lam, om = path_statistics(path, cov)
            ref_lam, ref_om = naive_statistics(ref, np.linalg.inv(sig.matrix))
            assert lam == pytest.approx(ref_lam, rel=1e-10)
            assert om == pytest.approx(ref_om, rel=1e-10)
            _, k_hat = estimate_theta(path, cov)
            assert k_hat == naive_argmax_k(ref, np.linalg.inv(sig.matrix))


def test_statistics_ordering_and_zero_path():
    rng = np.random.default_rng(2)
    panel = TimeSeriesPanel(rng.standard_normal((40, 2)))
    path = cusum_path(panel, True)
    lam, om = path_statistics(path, identity_sigma(3))
    assert 0.0 <= om <= lam
    # n = 32 keeps (k/n) * total exact in binary floating point
    zero = cusum_path(TimeSeriesPanel(np.tile([2.0], (32, 1))), center=False)
    assert path_statistics(zero, identity_sigma(1)) == (0.0, 0.0)


def test_dimension_mismatch_rejected():
    panel = TimeSeriesPanel(np.random.default_rng(3).standard_normal((30, 2)))
    path = cusum_path(panel, True)
    with pytest.raises(ValueError):
        path_statistics(path, identity_sigma(2))


def test_estimate_theta_step_change():
    v = np.zeros((100, 1))
    v[50:] = 1.0
    panel = TimeSeriesPanel(np.sqrt(v))  # vech outer products are exactly v
    path = cusum_path(panel, center=False)
    theta, k_hat = estimate_theta(path, identity_sigma(1))
    assert k_hat == 50
    assert theta == pytest.approx(0.5)


def test_estimate_theta_tie_breaks_to_first():
    panel = TimeSeriesPanel(np.array([[1.0], [0.0], [0.0], [1.0]]))
    path = cusum_path(panel, center=False)
    _, k_hat = estimate_theta(path, identity_sigma(1))
    assert k_hat == 1  # quadratic forms tie at k=1 and k=3


def test_run_test_input_floors():
    rng = np.random.default_rng(4)
    with pytest.raises(DataError):
        run_test(TimeSeriesPanel(rng.standard_normal((19, 1))))
    with pytest.raises(DataError):
        run_test(TimeSeriesPanel(rng.standard_normal((21, 6))))  # vdim 21 >= n


def test_run_test_report_consistency():
    rng = np.random.default_rng(5)
    y = rng.standard_normal((300, 2))
    y[150:] *= 2.0
    report = run_test(TimeSeriesPanel(y), TestConfig(statistic="omega", level=0.05))
    assert report.reject == (report.value > report.critical_value)
    assert report.k_hat == round(report.theta_hat * report.n)
    assert 0.0 < report.theta_hat <= 1.0
    assert 0.0 <= report.p_value <= 1.0
    assert report.vdim == 3 and report.d == 2
    assert report.reject  # variance doubling at n/2 is a large break


def test_run_test_lambda_statistic():
    from covbreak.limits import LambdaLaw

    rng = np.random.default_rng(6)
    y = rng.standard_normal((200, 1))
    law = LambdaLaw(1, grid_points=513, replications=5000, seed=9)
    report = run_test(TimeSeriesPanel(y), TestConfig(statistic="lambda", lambda_law=law))
    assert report.statistic == "lambda"
    assert report.p_value_se is not None
    omega_report = run_test(TimeSeriesPanel(y), TestConfig(statistic="omega"))
    assert omega_report.value <= report.value  # integral <= supremum


def test_scalar_scaling_invariance():
    rng = np.random.default_rng(7)
    y = rng.standard_normal((120, 2))
    base = run_test(TimeSeriesPanel(y))
    scaled = run_test(TimeSeriesPanel(7.3 * y))
    assert scaled.value == pytest.approx(base.value, rel=1e-8)
    assert scaled.k_hat == base.k_hat
    assert scaled.theta_hat == base.theta_hat


def test_coordinate_permutation_invariance():
    rng = np.random.default_rng(8)
    y = rng.standard_normal((150, 3))
    perm = np.array([1, 2, 0])
    a = run_test(TimeSeriesPanel(y))
    b = run_test(TimeSeriesPanel(y[:, perm]))
    assert b.value == pytest.approx(a.value, rel=1e-10)


def test_centered_equals_uncentered_for_zero_mean_columns():
    rng = np.random.default_rng(9)
    half = rng.standard_normal((60, 2))
    y = np.vstack([half, -half])  # column sums exactly zero
    a = run_test(TimeSeriesPanel(y), TestConfig(center=True))
    b = run_test(TimeSeriesPanel(y), TestConfig(center=False))
    assert a.value == b.value


def test_fractional_transform_plumbs_through():
    rng = np.random.default_rng(10)
    y = rng.standard_normal((100, 2))
    direct = run_test(TimeSeriesPanel(np.abs(y) ** 0.5))
    via_config = run_test(TimeSeriesPanel(y), TestConfig(transform_delta=0.5))
    assert via_config.value == pytest.approx(direct.value, rel=1e-12)
    assert via_config.transform_delta == 0.5


def test_empirical_level_iid_panel():
    # d=4 iid normal panels, nominal level 0.05
    rng = np.random.default_rng(11)
    config = TestConfig(statistic="omega", level=0.05)
    rejections = 0
    runs = 500
    for _ in range(runs):
        panel = TimeSeriesPanel(rng.standard_normal((1000, 4)))
        rejections += run_test(panel, config).reject
    assert 0.015 <= rejections / runs <= 0.075


def test_power_variance_doubling():
    rng = np.random.default_rng(12)
    config = TestConfig(statistic="omega", level=0.05)
    rejections = 0
    runs = 200
    for _ in range(runs):
        y = rng.standard_normal((1000, 2))
        y[500:] *= 2.0
        rejections += run_test(TimeSeriesPanel(y), config).reject
    assert rejections / runs >= 0.95


def test_theta_error_shrinks_with_sample_size():
    rng = np.random.default_rng(13)
    errors = {200: [], 1000: []}
    for n in errors:
        for _ in range(300):
            y = rng.standard_normal((n, 1))
            y[n // 2 :] *= 2.0
            report = run_test(TimeSeriesPanel(y))
            errors[n].append(abs(report.theta_hat - 0.5))
    assert np.mean(errors[1000]) <= np.mean(errors[200])
