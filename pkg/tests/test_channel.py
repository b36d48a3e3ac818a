"""Channel sampling and RNG substream contract checks."""

import numpy as np
import pytest

from relaysim import channel
from relaysim.correlation import exponential_correlation


def test_substream_reproducible():
    a = channel.substream(42, "rate-trial", 7).standard_normal(16)
    b = channel.substream(42, "rate-trial", 7).standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_substream_tag_sensitivity():
    base = channel.substream(42, "rate-trial", 7).standard_normal(16)
    for other in (channel.substream(43, "rate-trial", 7),
                  channel.substream(42, "rate-trial", 8),
                  channel.substream(42, "amplification", 7),
                  channel.substream(42, 7)):
        assert not np.array_equal(base, other.standard_normal(16))


def test_complex_normal_moments():
    rng = channel.substream(3, "moment-check")
    draws = channel.complex_normal(rng, 200000, variance=2.5)
    assert abs(draws.mean()) < 0.02
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(2.5, rel=0.02)
    # real and imaginary parts carry half the variance each
    assert draws.real.var() == pytest.approx(1.25, rel=0.03)
    assert draws.imag.var() == pytest.approx(1.25, rel=0.03)


def test_complex_normal_vector_variance():
    rng = channel.substream(4, "vector-variance")
    var = np.array([0.5, 1.0, 4.0])
    draws = channel.complex_normal(rng, (30000, 3), variance=var[None, :])
    measured = np.mean(np.abs(draws) ** 2, axis=0)
    np.testing.assert_allclose(measured, var, rtol=0.05)


def test_path_loss_values():
    assert channel.path_loss(100.0, 100.0, 3.8) == 1.0
    assert channel.path_loss(100.0, 200.0, 2.0) == pytest.approx(0.25)
    gains = channel.large_scale_gains(100.0, [100.0, 200.0], 2.0)
    np.testing.assert_allclose(gains, [1.0, 0.25])
    with pytest.raises(ValueError):
        channel.path_loss(100.0, -5.0, 2.0)
    with pytest.raises(ValueError):
        channel.path_loss(0.0, 5.0, 2.0)


def test_first_hop_column_covariance():
    n, k, draws = 8, 3, 4000
    recv = exponential_correlation(0.7, n)
    gains = np.array([1.0, 0.4, 2.2])
    rng = channel.substream(9, "first-hop-cov")
    acc = np.zeros((k, n, n), dtype=np.complex128)
    for _ in range(draws):
        f = channel.draw_first_hop(recv, gains, rng)
        for col in range(k):
            acc[col] += np.outer(f[:, col], f[:, col].conj())
    acc /= draws
    tol = 5.0 / np.sqrt(draws)   # elementwise standard error scale
    for col in range(k):
        np.testing.assert_allclose(acc[col], gains[col] * recv,
                                   atol=tol * max(1.0, gains[col]))


def test_second_hop_gram_means():
    m, k, draws = 10, 4, 4000
    eta = 0.6
    recv = exponential_correlation(0.5, m)
    tx = exponential_correlation(0.8, k)
    rng = channel.substream(10, "second-hop-cov")
    left = np.zeros((m, m), dtype=np.complex128)
    right = np.zeros((k, k), dtype=np.complex128)
    for _ in range(draws):
        g = channel.draw_second_hop(eta, recv, tx, rng)
        left += g @ g.conj().T
        right += g.conj().T @ g
    left /= draws
    right /= draws
    tol = 5.0 * eta * np.sqrt(m * k) / np.sqrt(draws)
    np.testing.assert_allclose(left, eta * k * recv, atol=tol)
    np.testing.assert_allclose(right, eta * m * tx, atol=tol)


def test_draw_guards():
    recv = exponential_correlation(0.5, 4)
    rng = channel.substream(11, "guards")
    with pytest.raises(ValueError):
        channel.draw_first_hop(recv, [-1.0, 0.5], rng)
    with pytest.raises(ValueError):
        channel.draw_second_hop(-0.1, recv, np.eye(2), rng)
