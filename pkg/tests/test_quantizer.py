"""Quantizer model checks: distortion table, AQNM statistics, Lloyd-Max."""

import numpy as np
import pytest

from relaysim import quantizer as qz
from relaysim.channel import substream


def test_distortion_table_entries():
    assert qz.distortion_factor(1) == pytest.approx(0.3634, abs=1e-6)
    assert qz.distortion_factor(2) == pytest.approx(0.1175, abs=1e-6)
    assert qz.distortion_factor(3) == pytest.approx(0.03454, abs=1e-7)
    assert qz.distortion_factor(4) == pytest.approx(0.009497, abs=1e-8)
    assert qz.distortion_factor(5) == pytest.approx(0.002499, abs=1e-8)
    assert qz.distortion_factor(qz.IDEAL) == 0.0


def test_high_resolution_formula():
    # beyond the tabulated range the distortion falls as 4^-q
    for bits in (6, 8, 12):
        expected = (np.sqrt(3.0) * np.pi / 2.0) * 2.0 ** (-2 * bits)
        assert qz.distortion_factor(bits) == pytest.approx(expected, rel=1e-12)
    assert qz.distortion_factor(7) == pytest.approx(qz.distortion_factor(6) / 4)


def test_distortion_monotone_and_continuous_at_transition():
    values = [qz.distortion_factor(b) for b in range(1, 11)]
    assert all(a > b for a, b in zip(values, values[1:]))
    # the asymptotic formula at q=6 should sit near a quarter of the q=5 entry
    ratio = qz.distortion_factor(6) / qz.distortion_factor(5)
    assert 0.25 * 0.65 < ratio < 0.25 * 1.35


def test_adc_spec():
    adc = qz.AdcSpec.from_bits(2)
    assert adc.bits == 2
    assert adc.rho == pytest.approx(0.1175)
    assert adc.alpha == pytest.approx(0.8825)
    assert not adc.is_ideal
    ideal = qz.AdcSpec.from_bits(qz.IDEAL)
    assert ideal.is_ideal and ideal.alpha == 1.0 and ideal.rho == 0.0
    with pytest.raises(ValueError):
        qz.AdcSpec.from_bits(0)


def test_aqnm_noise_variance():
    adc = qz.AdcSpec.from_bits(1)
    rng = substream(21, "aqnm-noise")
    n = 200000
    var = 3.0
    y = np.sqrt(var / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    out = qz.aqnm_quantize(y, adc, var, rng)
    noise = out - adc.alpha * y
    measured = np.mean(np.abs(noise) ** 2)
    assert measured == pytest.approx(adc.alpha * adc.rho * var, rel=0.02)
    # quantizer output power alpha^2 var + alpha rho var = alpha var
    assert np.mean(np.abs(out) ** 2) == pytest.approx(adc.alpha * var, rel=0.02)


def test_aqnm_per_element_variances():
    adc = qz.AdcSpec.from_bits(2)
    rng = substream(22, "aqnm-vector")
    var = np.array([0.5, 2.0, 8.0])
    y = np.zeros((30000, 3), dtype=np.complex128)
    out = qz.aqnm_quantize(y, adc, var[None, :], rng)
    measured = np.mean(np.abs(out) ** 2, axis=0)
    np.testing.assert_allclose(measured, adc.alpha * adc.rho * var, rtol=0.05)


def test_aqnm_ideal_passthrough():
    adc = qz.AdcSpec.from_bits(qz.IDEAL)
    rng = substream(23, "aqnm-ideal")
    y = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    out = qz.aqnm_quantize(y, adc, np.ones(64), rng)
    np.testing.assert_array_equal(out, y)


def test_lloyd_max_one_bit_analytic():
    # the optimal 1-bit quantizer of a standard normal has distortion 1 - 2/pi
    assert qz.lloyd_max_distortion(1) == pytest.approx(1.0 - 2.0 / np.pi, abs=1e-9)


def test_lloyd_max_tracks_table():
    for bits in (2, 4):
        assert qz.lloyd_max_distortion(bits) == pytest.approx(
            qz.DISTORTION_TABLE[bits], abs=1e-3)
