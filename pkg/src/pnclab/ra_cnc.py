"""Repeat-accumulate coding and the relay decoder designs for coded PNC.

Each end node encodes its in-phase and quadrature bit streams with the same
rate-1/q repeat-accumulate code and the same interleaver, then QPSK-modulates
the coded bit pairs.  Sharing one interleaver across streams and nodes is
what makes the relay-side joint-symbol accumulator well defined: the 16-ary
chain over (x1, x2) pairs is the product of the four underlying binary
accumulators, with XOR acting component-wise on the constituent bits.

Three relay designs are provided:

* ``xor_cd_decode``: collapse each coded joint symbol to its XOR first, then
  run the ordinary point-to-point binary decoder per stream.  Cheap, but the
  collapse discards the joint-symbol structure.
* ``joint_cnc_decode``: loopy sum-product over the full joint Tanner graph,
  reading out the MAP XOR of each source joint symbol.
* ``mud_xor_decode``: same graph and same belief run, but the argmax is taken
  over the 16-ary joint belief first and XORed afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import async_uncoded, pncmap
from .channel import ObservationSequence
from .factorgraph import FactorGraph, sum_product
from .modem import modulate_qpsk, symbol_indices_to_bits

#: (e, p, c) -> 1 iff c = e xor p, with xor acting bitwise on the joint index.
ACC_TABLE_16 = np.zeros((16, 16, 16))
for _e in range(16):
    for _p in range(16):
        ACC_TABLE_16[_e, _p, _e ^ _p] = 1.0

ACC_TABLE_2 = np.zeros((2, 2, 2))
for _e in range(2):
    for _p in range(2):
        ACC_TABLE_2[_e, _p, _e ^ _p] = 1.0

EYE_16 = np.eye(16)
EYE_2 = np.eye(2)


@dataclass(frozen=True)
class RaConfig:
    """Repeat factor, per-stream source length, and the shared interleaver."""

    m: int
    q: int = 3
    seed: int = 0
    interleaver: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m < 1 or self.q < 1:
            raise ValueError("m and q must be positive")
        if self.interleaver is None:
            perm = np.random.default_rng(self.seed).permutation(self.n)
            object.__setattr__(self, "interleaver", perm)
        else:
            perm = np.asarray(self.interleaver)
            if sorted(perm.tolist()) != list(range(self.n)):
                raise ValueError("interleaver must be a permutation of 0..q*m-1")
            object.__setattr__(self, "interleaver", perm)

    @property
    def n(self) -> int:
        return self.q * self.m

    @property
    def source_of(self) -> np.ndarray:
        """Source bit index feeding each coded position."""
        return self.interleaver // self.q

    @property
    def rate(self) -> float:
        return 1.0 / self.q


def ra_encode(bits, config: RaConfig) -> np.ndarray:
    """Repeat q times, interleave, then run the XOR accumulator (state 0)."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (config.m,):
        raise ValueError(f"expected {config.m} source bits, got shape {bits.shape}")
    repeated = np.repeat(bits, config.q)
    permuted = repeated[config.interleaver]
    return np.bitwise_xor.accumulate(permuted)


def encode_node(source_bits, config: RaConfig) -> tuple[np.ndarray, np.ndarray]:
    """Encode one node's 2M source bits (interleaved I/Q) to coded bits + symbols."""
    source_bits = np.asarray(source_bits, dtype=np.int64)
    if source_bits.shape != (2 * config.m,):
        raise ValueError(f"expected {2 * config.m} source bits")
    coded_i = ra_encode(source_bits[0::2], config)
    coded_q = ra_encode(source_bits[1::2], config)
    coded = np.empty(2 * config.n, dtype=np.int64)
    coded[0::2] = coded_i
    coded[1::2] = coded_q
    return coded, modulate_qpsk(coded)


def _coded_joint_variable(k: int) -> str:
    return f"x({k},{k})"


def build_coded_joint_graph(obs: ObservationSequence, config: RaConfig) -> FactorGraph:
    """Tanner graph tying sample evidence to the source joint symbols.

    Variables: source joint symbols s1..sM, repeated/interleaved joint
    symbols e1..eN, and the coded joint symbols; under symbol misalignment
    the coded layer is the full chain of build_async_graph, otherwise one
    coded joint variable per sample.  Accumulator checks enforce
    x(k,k) = x(k-1,k-1) xor e(k) component-wise on the four constituent bits.
    """
    n, m = config.n, config.m
    if obs.n_symbols != n:
        raise ValueError(
            f"observation covers {obs.n_symbols} symbols, config expects {n}"
        )
    g = FactorGraph()
    for i in range(1, m + 1):
        g.add_variable(f"s{i}", 16)
    for k in range(1, n + 1):
        g.add_variable(f"e{k}", 16)

    if obs.synchronous:
        for k in range(1, n + 1):
            g.add_variable(_coded_joint_variable(k), 16)
        evidence = pncmap.joint_posteriors_batch(obs.samples, obs.phi, obs.variances)
        for k in range(1, n + 1):
            g.add_factor(f"ev{k}", (_coded_joint_variable(k),), evidence[k - 1])
    else:
        names = async_uncoded.joint_variable_names(n)
        tabs = async_uncoded.evidence_tables(obs)
        for name in names:
            g.add_variable(name, 16)
        for k, (name, tab) in enumerate(zip(names, tabs)):
            g.add_factor(f"ev{k + 1}", (name,), tab)
        for k in range(2 * n):
            shared_x1 = k % 2 == 0
            table = async_uncoded.PSI_X1_SHARED if shared_x1 else async_uncoded.PSI_X2_SHARED
            g.add_factor(f"psi{k + 1}", (names[k], names[k + 1]), table)

    source_of = config.source_of
    for k in range(1, n + 1):
        g.add_factor(f"rep{k}", (f"s{source_of[k - 1] + 1}", f"e{k}"), EYE_16)
    g.add_factor("acc1", ("e1", _coded_joint_variable(1)), EYE_16)
    for k in range(2, n + 1):
        g.add_factor(
            f"acc{k}",
            (f"e{k}", _coded_joint_variable(k - 1), _coded_joint_variable(k)),
            ACC_TABLE_16,
        )
    return g


@dataclass(frozen=True)
class SourceBeliefs:
    """Joint posteriors over the M source symbol pairs after one BP run."""

    beliefs: np.ndarray
    converged: bool
    iterations: int


def decode_source_beliefs(obs: ObservationSequence, config: RaConfig,
                          max_iter: int = 50, tol: float = 1e-6,
                          damping: float = 0.0) -> SourceBeliefs:
    """Run loopy BP once; Joint CNC and MUD-XOR are readouts of this."""
    graph = build_coded_joint_graph(obs, config)
    result = sum_product(graph, mode="loopy", max_iter=max_iter, tol=tol,
                         damping=damping)
    beliefs = np.stack([result.marginals[f"s{i}"] for i in range(1, config.m + 1)])
    return SourceBeliefs(beliefs, result.converged, result.iterations)


def xor_bits_from_beliefs(beliefs: np.ndarray) -> np.ndarray:
    """MAP XOR readout: collapse each joint belief, then argmax (lowest wins ties)."""
    collapsed = np.stack([pncmap.collapse_xor(row) for row in beliefs])
    return symbol_indices_to_bits(np.argmax(collapsed, axis=1))


def mud_bits_from_beliefs(beliefs: np.ndarray) -> np.ndarray:
    """Joint-ML readout: argmax the 16-ary belief first, XOR the winning pair."""
    best = np.argmax(beliefs, axis=1)
    return symbol_indices_to_bits((best >> 2) ^ (best & 3))


def joint_cnc_decode(obs: ObservationSequence, config: RaConfig,
                     max_iter: int = 50) -> np.ndarray:
    """XOR source packet (2M bits) by approximate MAP decoding of each XOR symbol."""
    return xor_bits_from_beliefs(decode_source_beliefs(obs, config, max_iter).beliefs)


def mud_xor_decode(obs: ObservationSequence, config: RaConfig,
                   max_iter: int = 50) -> np.ndarray:
    """XOR of the jointly most likely source pair; same BP run as joint CNC."""
    return mud_bits_from_beliefs(decode_source_beliefs(obs, config, max_iter).beliefs)


def build_ra_binary_graph(bit_posteriors: np.ndarray, config: RaConfig) -> FactorGraph:
    """Point-to-point RA decoding graph over one bit stream."""
    post = np.asarray(bit_posteriors, dtype=float)
    if post.shape != (config.n, 2):
        raise ValueError(f"expected ({config.n}, 2) bit posteriors, got {post.shape}")
    g = FactorGraph()
    for i in range(1, config.m + 1):
        g.add_variable(f"u{i}", 2)
    for k in range(1, config.n + 1):
        g.add_variable(f"c{k}", 2)
        g.add_factor(f"ev{k}", (f"c{k}",), post[k - 1])
    source_of = config.source_of
    g.add_factor("chk1", (f"u{source_of[0] + 1}", "c1"), EYE_2)
    for k in range(2, config.n + 1):
        g.add_factor(
            f"chk{k}", (f"u{source_of[k - 1] + 1}", f"c{k - 1}", f"c{k}"), ACC_TABLE_2
        )
    return g


def ra_decode_p2p(bit_posteriors, config: RaConfig,
                  max_iter: int = 50) -> tuple[np.ndarray, bool]:
    """Binary BP decode of one RA stream; ties resolve to bit 0."""
    graph = build_ra_binary_graph(bit_posteriors, config)
    result = sum_product(graph, mode="loopy", max_iter=max_iter)
    bits = np.fromiter(
        (int(result.marginals[f"u{i}"][1] > result.marginals[f"u{i}"][0])
         for i in range(1, config.m + 1)),
        dtype=np.int64,
        count=config.m,
    )
    return bits, result.converged


def xor_cd_decode(obs: ObservationSequence, config: RaConfig,
                  max_iter: int = 50) -> np.ndarray:
    """Symbol-wise XOR collapse, then two independent binary stream decodes.

    The collapse to per-stream bit posteriors drops the I/Q and joint-symbol
    correlations, which is this design's inherent weakness.
    """
    if obs.synchronous:
        xor_dists = async_uncoded.xor_posteriors_sync(obs)
    else:
        xor_dists = async_uncoded.xor_posteriors(obs)
    if xor_dists.shape[0] != config.n:
        raise ValueError("observation length does not match the code")
    p1_i = xor_dists[:, 2] + xor_dists[:, 3]
    p1_q = xor_dists[:, 1] + xor_dists[:, 3]
    post_i = np.column_stack([1.0 - p1_i, p1_i])
    post_q = np.column_stack([1.0 - p1_q, p1_q])
    bits_i, _ = ra_decode_p2p(post_i, config, max_iter)
    bits_q, _ = ra_decode_p2p(post_q, config, max_iter)
    out = np.empty(2 * config.m, dtype=np.int64)
    out[0::2] = bits_i
    out[1::2] = bits_q
    return out
