"""Unit-energy QPSK mapping between bit packets and complex symbols.

Bit convention: a 0 bit maps to amplitude +1/sqrt(2), a 1 bit to -1/sqrt(2),
on both the in-phase and quadrature rails.  Symbol n carries bit 2n on the
in-phase rail and bit 2n+1 on the quadrature rail.
"""

from __future__ import annotations

import numpy as np

SQRT_HALF = 1.0 / np.sqrt(2.0)

# Constellation indexed by the 2-bit symbol value 2*I + Q.
QPSK_POINTS = np.array(
    [
        SQRT_HALF * (+1 + 1j),  # bits (0, 0)
        SQRT_HALF * (+1 - 1j),  # bits (0, 1)
        SQRT_HALF * (-1 + 1j),  # bits (1, 0)
        SQRT_HALF * (-1 - 1j),  # bits (1, 1)
    ],
    dtype=np.complex128,
)


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError("bit packet must be one-dimensional")
    if arr.size == 0:
        raise ValueError("bit packet must be non-empty")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("bit packet may contain only 0s and 1s")
    return arr.astype(np.int64)


def bits_to_symbol_indices(bits) -> np.ndarray:
    """Pack an even-length bit sequence into per-symbol 2-bit indices."""
    arr = _as_bits(bits)
    if arr.size % 2 != 0:
        raise ValueError(f"QPSK needs an even number of bits, got {arr.size}")
    return 2 * arr[0::2] + arr[1::2]


def symbol_indices_to_bits(indices: np.ndarray) -> np.ndarray:
    out = np.empty(2 * len(indices), dtype=np.int64)
    out[0::2] = np.asarray(indices) >> 1
    out[1::2] = np.asarray(indices) & 1
    return out


def modulate_qpsk(bits) -> np.ndarray:
    """Map 2N bits to N unit-energy QPSK symbols (bit 0 -> +1/sqrt(2))."""
    return QPSK_POINTS[bits_to_symbol_indices(bits)]


def demodulate_qpsk(symbols) -> np.ndarray:
    """Per-rail sign threshold: negative -> bit 1, zero or positive -> bit 0."""
    sym = np.asarray(symbols, dtype=np.complex128)
    bits = np.empty(2 * sym.size, dtype=np.int64)
    bits[0::2] = sym.real < 0
    bits[1::2] = sym.imag < 0
    return bits
