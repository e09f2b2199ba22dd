"""Uplink observation model and downlink AWGN link tests."""

import numpy as np
import pytest

from pnclab.channel import (DELTA_EPS, ChannelParams, downlink_observe,
                            uplink_observe, uplink_observe_sync)
from pnclab.modem import demodulate_qpsk, modulate_qpsk

ROOT_HALF = 1.0 / np.sqrt(2.0)


def test_noise_free_overlap_sampling():
    # One symbol pair, half-symbol offset: first window sees x1 alone, the
    # middle window the full sum, the tail window x2 alone.
    params = ChannelParams(delta=0.5, phi=0.0, power=1.0, n0=1.0)
    x = modulate_qpsk([0, 0])
    obs = uplink_observe(x, x, params, noiseless=True)
    expected = np.array([
        ROOT_HALF + 1j * ROOT_HALF,
        2 * ROOT_HALF + 2j * ROOT_HALF,
        ROOT_HALF + 1j * ROOT_HALF,
    ])
    assert np.abs(obs.samples - expected).max() < 1e-12


def test_noise_free_closed_form_general():
    rng = np.random.default_rng(3)
    b1, b2 = rng.integers(0, 2, 16), rng.integers(0, 2, 16)
    x1, x2 = modulate_qpsk(b1), modulate_qpsk(b2)
    delta, phi = 0.3, 1.1
    params = ChannelParams(delta, phi, 1.0, 1.0)
    obs = uplink_observe(x1, x2, params, noiseless=True)
    rot = np.exp(1j * phi)
    n = len(x1)
    for k in range(1, n + 1):
        prev = x2[k - 2] if k >= 2 else 0.0
        assert abs(obs.samples[2 * k - 2] - (x1[k - 1] + prev * rot)) < 1e-12
        assert abs(obs.samples[2 * k - 1] - (x1[k - 1] + x2[k - 1] * rot)) < 1e-12
    assert abs(obs.samples[2 * n] - x2[-1] * rot) < 1e-12


def test_variance_schedule_half_offset():
    params = ChannelParams(delta=0.5, phi=0.0, power=1.0, n0=1.0)
    x = modulate_qpsk([0, 0, 1, 1])
    obs = uplink_observe(x, x, params, noiseless=True)
    assert np.abs(obs.variances - 1.0).max() < 1e-12


def test_variance_schedule_asymmetric():
    params = ChannelParams(delta=0.25, phi=0.0, power=2.0, n0=0.5)
    x = modulate_qpsk([0, 0, 1, 1])
    obs = uplink_observe(x, x, params, noiseless=True)
    short = 0.5 / (2 * 2.0 * 0.25)
    long = 0.5 / (2 * 2.0 * 0.75)
    assert obs.variances[0] == pytest.approx(short)
    assert obs.variances[1] == pytest.approx(long)
    assert obs.variances[-1] == pytest.approx(short)


def test_empirical_noise_variance_matches_model():
    # Monte Carlo moment estimate over >1e5 draws per sample position.
    params = ChannelParams(delta=0.3, phi=0.5, power=2.0, n0=0.8)
    rng = np.random.default_rng(0)
    x = modulate_qpsk(rng.integers(0, 2, 4))
    clean = uplink_observe(x, x, params, noiseless=True).samples
    draws = np.stack(
        [uplink_observe(x, x, params, rng=rng).samples for _ in range(120000 // 5)]
    )
    noise = draws - clean
    expected = uplink_observe(x, x, params, noiseless=True).variances
    for component in (noise.real, noise.imag):
        assert np.abs(component.var(axis=0) / expected - 1.0).max() < 0.03


def test_seed_determinism():
    params = ChannelParams(delta=0.5, phi=0.7, power=1.0, n0=1.0, seed=42)
    x = modulate_qpsk(np.random.default_rng(5).integers(0, 2, 64))
    a = uplink_observe(x, x, params)
    b = uplink_observe(x, x, params)
    assert np.array_equal(a.samples, b.samples)


def test_sync_sum():
    params = ChannelParams(delta=0.0, phi=0.0, power=1.0, n0=1.0)
    x = modulate_qpsk([0, 0])
    obs = uplink_observe_sync(x, x, params, noiseless=True)
    assert obs.samples[0] == pytest.approx(2 * ROOT_HALF + 2j * ROOT_HALF, abs=1e-12)
    assert obs.variances[0] == pytest.approx(0.5)
    assert obs.synchronous


def test_sync_phase_pi_cancels():
    params = ChannelParams(delta=0.0, phi=np.pi, power=1.0, n0=1.0)
    x = modulate_qpsk([0, 1, 1, 0])
    obs = uplink_observe_sync(x, x, params, noiseless=True)
    assert np.abs(obs.samples).max() < 1e-12


def test_below_delta_eps_is_rejected():
    params = ChannelParams(delta=0.0, phi=0.0, power=1.0, n0=1.0)
    x = modulate_qpsk([0, 0])
    with pytest.raises(ValueError, match="uplink_observe_sync"):
        uplink_observe(x, x, params)


def test_param_validation():
    with pytest.raises(ValueError):
        ChannelParams(delta=1.0, phi=0.0, power=1.0, n0=1.0)
    with pytest.raises(ValueError):
        ChannelParams(delta=0.0, phi=0.0, power=0.0, n0=1.0)
    with pytest.raises(ValueError):
        ChannelParams(delta=0.0, phi=0.0, power=1.0, n0=0.0)


def test_downlink_noiseless_identity():
    x = modulate_qpsk([0, 1, 1, 0])
    assert np.array_equal(downlink_observe(x, 10.0, noiseless=True), x)


def test_downlink_variance_definition():
    rng = np.random.default_rng(1)
    x = modulate_qpsk([0, 0])
    draws = np.stack([downlink_observe(x, 1.0, rng=rng) for _ in range(60000)])
    noise = draws - x
    assert noise.real.var() == pytest.approx(0.5, rel=0.03)
    assert noise.imag.var() == pytest.approx(0.5, rel=0.03)


def test_downlink_qpsk_ber_at_9p6_db():
    # Classical point-to-point QPSK reference point: BER ~ 1e-5 at
    # Eb/N0 = 9.6 dB.  10^7 bits keeps the Poisson error well inside 2x.
    ebn0 = 10 ** (9.6 / 10)
    snr = 2 * ebn0  # two bits per symbol
    rng = np.random.default_rng(7)
    nbits = 10_000_000
    bits = rng.integers(0, 2, nbits)
    y = downlink_observe(modulate_qpsk(bits), snr, rng=rng)
    ber = np.count_nonzero(demodulate_qpsk(y) != bits) / nbits
    assert 0.5e-5 < ber < 2e-5
