"""TWRC uplink and point-to-point downlink observation models.

The uplink superposes the two end nodes' QPSK streams with a fractional
symbol offset ``delta`` and a packet-constant phase offset ``phi``, then
matched-filters each overlap window.  With ``delta >= DELTA_EPS`` the relay
sees 2N+1 samples; per-component noise variances alternate between
``n0 / (2 * power * delta)`` on the short windows (odd samples and the final
boundary sample) and ``n0 / (2 * power * (1 - delta))`` on the long windows.
The synchronous model collapses to N samples of variance ``n0 / (2 * power)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Below this offset the short matched-filter window degenerates (its
#: 1/delta normalisation diverges); callers must use the synchronous model.
DELTA_EPS = 1e-9

#: Pseudorandom generator family used for every noise draw, recorded in
#: harness output metadata so runs are reproducible.
GENERATOR_NAME = "pcg64"


@dataclass(frozen=True)
class ChannelParams:
    """Uplink parameters: symbol offset, phase offset, power, noise level."""

    delta: float
    phi: float
    power: float
    n0: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.delta < 1.0):
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.power <= 0.0:
            raise ValueError(f"power must be positive, got {self.power}")
        if self.n0 <= 0.0:
            raise ValueError(f"n0 must be positive, got {self.n0}")


@dataclass(frozen=True)
class ObservationSequence:
    """Relay-side samples with their per-component noise variances."""

    samples: np.ndarray
    variances: np.ndarray
    delta: float
    phi: float

    def __post_init__(self):
        if len(self.samples) != len(self.variances):
            raise ValueError("samples and variances must have equal length")

    @property
    def synchronous(self) -> bool:
        return self.delta < DELTA_EPS

    @property
    def n_symbols(self) -> int:
        if self.synchronous:
            return len(self.samples)
        return (len(self.samples) - 1) // 2


def _rng_for(params: ChannelParams, rng) -> np.random.Generator:
    if rng is None:
        return np.random.default_rng(params.seed)
    return rng


def _complex_noise(rng, variances: np.ndarray) -> np.ndarray:
    sigma = np.sqrt(variances)
    return sigma * rng.standard_normal(len(variances)) + 1j * (
        sigma * rng.standard_normal(len(variances))
    )


def _check_inputs(x1, x2) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x1, dtype=np.complex128)
    b = np.asarray(x2, dtype=np.complex128)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("x1 and x2 must be 1-D arrays of equal length")
    if a.size < 1:
        raise ValueError("need at least one symbol")
    return a, b


def uplink_observe(x1, x2, params: ChannelParams, rng=None, noiseless=False) -> ObservationSequence:
    """Sample the misaligned superposition of two packets at the relay.

    Returns 2N+1 samples: sample 2n-1 sees (x1[n], x2[n-1]) with x2[0] = 0,
    sample 2n sees (x1[n], x2[n]), and sample 2N+1 sees x2[N] alone.
    Deterministic for a given (params.seed, rng) choice.
    """
    a, b = _check_inputs(x1, x2)
    if params.delta < DELTA_EPS:
        raise ValueError(
            f"delta={params.delta} is below DELTA_EPS={DELTA_EPS}; "
            "use uplink_observe_sync for the synchronous model"
        )
    n = a.size
    rot = np.exp(1j * params.phi)
    samples = np.empty(2 * n + 1, dtype=np.complex128)
    samples[0:2 * n:2] = a                      # odd samples 2n-1
    samples[2:2 * n:2] += b[:-1] * rot          # x2[n-1] term, x2[0] = 0
    samples[1:2 * n:2] = a + b * rot            # even samples 2n
    samples[2 * n] = b[-1] * rot                # boundary sample 2N+1

    var_short = params.n0 / (2.0 * params.power * params.delta)
    var_long = params.n0 / (2.0 * params.power * (1.0 - params.delta))
    variances = np.empty(2 * n + 1)
    variances[0::2] = var_short
    variances[1::2] = var_long
    variances[2 * n] = var_short

    if not noiseless:
        samples = samples + _complex_noise(_rng_for(params, rng), variances)
    return ObservationSequence(samples, variances, params.delta, params.phi)


def uplink_observe_sync(x1, x2, params: ChannelParams, rng=None, noiseless=False) -> ObservationSequence:
    """Symbol-aligned superposition: N samples y[n] = x1[n] + x2[n] e^{j phi} + w."""
    a, b = _check_inputs(x1, x2)
    samples = a + b * np.exp(1j * params.phi)
    variances = np.full(a.size, params.n0 / (2.0 * params.power))
    if not noiseless:
        samples = samples + _complex_noise(_rng_for(params, rng), variances)
    return ObservationSequence(samples, variances, 0.0, params.phi)


def downlink_observe(x, snr_per_symbol: float, rng=None, noiseless=False) -> np.ndarray:
    """Point-to-point AWGN link for unit-energy symbols.

    Per-component noise variance is 1 / (2 * snr_per_symbol).
    """
    if snr_per_symbol <= 0.0:
        raise ValueError(f"snr must be positive, got {snr_per_symbol}")
    sym = np.asarray(x, dtype=np.complex128)
    if noiseless:
        return sym.copy()
    if rng is None:
        rng = np.random.default_rng()
    variances = np.full(sym.size, 1.0 / (2.0 * snr_per_symbol))
    return sym + _complex_noise(rng, variances)
