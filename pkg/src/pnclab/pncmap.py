"""Per-sample probabilistic PNC mapping for the QPSK joint-symbol alphabet.

A joint symbol is the pair (x1, x2) of simultaneously arriving QPSK symbols,
indexed canonically by the 4-bit integer (I1, Q1, I2, Q2); equivalently
``4 * b1 + b2`` where ``b_i = 2*I_i + Q_i`` is the 2-bit index of symbol i.
The XOR symbol index is then simply ``b1 ^ b2``.
"""

from __future__ import annotations

import numpy as np

from .modem import QPSK_POINTS

PAIR_CARDINALITY = 16
XOR_CARDINALITY = 4

#: XOR class of each joint-symbol index: (b1, b2) -> b1 ^ b2.
XOR_OF_PAIR = np.array([(i >> 2) ^ (i & 3) for i in range(PAIR_CARDINALITY)])

_SUPPORTS = ("pair", "x1", "x2")


def pair_index(b1: int, b2: int) -> int:
    """Canonical joint-symbol index from the two 2-bit symbol values."""
    return 4 * b1 + b2


def pair_means(phi: float) -> np.ndarray:
    """Noiseless composite value x1 + x2 e^{j phi} for each joint index."""
    rot = np.exp(1j * phi)
    return (QPSK_POINTS[:, None] + rot * QPSK_POINTS[None, :]).ravel()


def _normalise_loglik(loglik: np.ndarray) -> np.ndarray:
    # Max subtraction before exponentiation; var << 1 underflows otherwise.
    shifted = loglik - loglik.max(axis=-1, keepdims=True)
    probs = np.exp(shifted)
    return probs / probs.sum(axis=-1, keepdims=True)


def joint_posterior(y: complex, phi: float, var: float, support: str = "pair") -> np.ndarray:
    """Posterior over the 16 joint symbols for one relay sample.

    ``support`` selects which constituent the sample carries: "pair" for a
    full overlap window, "x1" or "x2" for the boundary windows where the
    other stream contributes nothing (its marginal stays uniform).
    """
    if not (np.isfinite(y) and np.isfinite(var)) or var <= 0.0:
        raise ValueError(f"need finite y and positive finite var, got y={y}, var={var}")
    if support not in _SUPPORTS:
        raise ValueError(f"unknown support {support!r}; expected one of {_SUPPORTS}")
    if support == "pair":
        mean = pair_means(phi)
    elif support == "x1":
        mean = np.repeat(QPSK_POINTS, 4)
    else:
        mean = np.tile(np.exp(1j * phi) * QPSK_POINTS, 4)
    loglik = -np.abs(y - mean) ** 2 / (2.0 * var)
    return _normalise_loglik(loglik)


def joint_posteriors_batch(y: np.ndarray, phi: float, var, support: str = "pair") -> np.ndarray:
    """Vectorised :func:`joint_posterior` over a sample array.

    ``var`` may be a scalar or a per-sample array.
    """
    y = np.asarray(y, dtype=np.complex128)
    var = np.broadcast_to(np.asarray(var, dtype=float), y.shape)
    if not (np.isfinite(y).all() and np.isfinite(var).all() and (var > 0).all()):
        raise ValueError("need finite samples and positive finite variances")
    if support == "pair":
        mean = pair_means(phi)
    elif support == "x1":
        mean = np.repeat(QPSK_POINTS, 4)
    elif support == "x2":
        mean = np.tile(np.exp(1j * phi) * QPSK_POINTS, 4)
    else:
        raise ValueError(f"unknown support {support!r}; expected one of {_SUPPORTS}")
    loglik = -np.abs(y[..., None] - mean) ** 2 / (2.0 * var[..., None])
    return _normalise_loglik(loglik)


def collapse_xor(joint: np.ndarray) -> np.ndarray:
    """Sum joint-symbol mass into the 4 XOR classes; total mass is preserved."""
    joint = np.asarray(joint, dtype=float)
    return np.bincount(XOR_OF_PAIR, weights=joint, minlength=XOR_CARDINALITY)


def xor_map_hard(y_component: float, tolerance: float = 1e-6) -> int:
    """Noiseless lookup for one rail of a synchronous, phase-aligned sum.

    The composite rail value of two unit-energy QPSK symbols lies in
    {-sqrt(2), 0, +sqrt(2)}: zero means the bits differ (-1), the extremes
    mean they agree (+1).  Values outside ``tolerance`` of that support are
    rejected; noisy detection belongs to the posterior path.
    """
    root2 = np.sqrt(2.0)
    if abs(y_component) <= tolerance:
        return -1
    if abs(abs(y_component) - root2) <= tolerance:
        return 1
    raise ValueError(
        f"{y_component} is not within {tolerance} of the noiseless support "
        "{-sqrt(2), 0, +sqrt(2)}"
    )
