import numpy as np
import pytest

from mrsbo.kernels import (
    Kernel,
    KernelFamily,
    kernel_eval,
    matern52,
    rational_quadratic,
    rbf,
)


def test_stationary_at_zero_lag():
    x = np.array([[0.3, 0.7]])
    for kernel in (rbf(0.2), matern52(0.5), rational_quadratic(0.1, alpha=2.0)):
        assert kernel_eval(kernel, x, x)[0, 0] == pytest.approx(1.0)
    scaled = rbf(0.2, signal_variance=3.5)
    assert kernel_eval(scaled, x, x)[0, 0] == pytest.approx(3.5)


def test_rbf_hand_value():
    # exp(-d^2 / (2 l^2)) at d = l = 0.1 is exp(-0.5)
    k = kernel_eval(rbf(0.1), np.array([[0.0]]), np.array([[0.1]]))
    assert k[0, 0] == pytest.approx(0.6065306597126334, abs=1e-12)


def test_rational_quadratic_hand_value():
    # (1 + d^2 / (2 alpha l^2))^-alpha at d = l = 0.1, alpha = 1 is 2/3
    k = kernel_eval(
        rational_quadratic(0.1, alpha=1.0), np.array([[0.0]]), np.array([[0.1]])
    )
    assert k[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_matern52_hand_value():
    # (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r) at scaled distance r = 1
    r = 1.0
    expected = (1 + np.sqrt(5) * r + 5 * r**2 / 3) * np.exp(-np.sqrt(5) * r)
    k = kernel_eval(matern52(0.25), np.array([[0.0]]), np.array([[0.25]]))
    assert k[0, 0] == pytest.approx(expected, abs=1e-12)


def test_anisotropic_length_scales():
    kernel = rbf([0.1, 1.0])
    a = np.array([[0.0, 0.0]])
    # a 0.1 offset in the first dimension equals a 1.0 offset in the second
    k1 = kernel_eval(kernel, a, np.array([[0.1, 0.0]]))[0, 0]
    k2 = kernel_eval(kernel, a, np.array([[0.0, 1.0]]))[0, 0]
    assert k1 == pytest.approx(k2, rel=1e-12)
    assert k1 == pytest.approx(np.exp(-0.5))


def test_dimension_mismatch_raises():
    kernel = rbf([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        kernel_eval(kernel, np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        kernel_eval(rbf(0.5), np.zeros((2, 2)), np.zeros((2, 3)))


def test_invalid_hyperparameters_raise():
    with pytest.raises(ValueError):
        Kernel(KernelFamily.RBF, np.array([-0.1]))
    with pytest.raises(ValueError):
        Kernel(KernelFamily.RBF, np.array([0.1]), signal_variance=0.0)
    with pytest.raises(ValueError):
        Kernel(KernelFamily.RATIONAL_QUADRATIC, np.array([0.1]), alpha=-1.0)


@pytest.mark.parametrize(
    "kernel",
    [rbf(0.15), matern52([0.3, 0.8]), rational_quadratic(0.2, alpha=0.7)],
    ids=["rbf", "matern52-aniso", "rq"],
)
def test_gram_symmetric_psd(kernel):
    rng = np.random.default_rng(3)
    dim = kernel.length_scales.size if kernel.length_scales.size > 1 else 2
    X = rng.random((40, dim))
    K = kernel_eval(kernel, X, X)
    assert np.allclose(K, K.T, atol=1e-12)
    assert np.all(K <= kernel.signal_variance + 1e-12)
    eigmin = np.linalg.eigvalsh(K).min()
    assert eigmin > -1e-6 * np.mean(np.diag(K))
