"""MAP XOR decoding of unchannel-coded PNC uplinks.

With a fractional symbol offset the relay's 2N+1 samples couple adjacent
joint symbols (x1[i], x2[j]), i = j or j+1, into a chain: sample evidence
sits on each 16-ary joint variable and 0/1 compatibility factors tie the
shared constituent symbol of neighbouring joint variables.  The chain is a
tree, so one sum-product sweep yields exact joint posteriors.  Beliefs stay
16-ary end to end; collapsing to the 4-ary XOR alphabet happens only at
readout, which is what lets certainty spread through shared constituents.
"""

from __future__ import annotations

import numpy as np

from . import pncmap
from .channel import ObservationSequence
from .factorgraph import FactorGraph, sum_product
from .modem import symbol_indices_to_bits

#: x1 occupies the high two bits of the canonical joint index.
PSI_X1_SHARED = np.equal.outer(np.arange(16) >> 2, np.arange(16) >> 2).astype(float)
#: x2 occupies the low two bits.
PSI_X2_SHARED = np.equal.outer(np.arange(16) & 3, np.arange(16) & 3).astype(float)


def _require_async(obs: ObservationSequence) -> int:
    if obs.synchronous:
        raise ValueError(
            "observation is synchronous (N samples); use decode_xor_sync"
        )
    return obs.n_symbols


def evidence_tables(obs: ObservationSequence) -> list[np.ndarray]:
    """Per-sample joint posteriors, ordered as the samples are.

    Sample 1 carries x1[1] alone (x2[0] = 0) and sample 2N+1 carries x2[N]
    alone; the missing constituent keeps a uniform marginal.
    """
    n = _require_async(obs)
    tabs = np.empty((2 * n + 1, 16))
    odd = pncmap.joint_posteriors_batch(
        obs.samples[2:2 * n:2], obs.phi, obs.variances[2:2 * n:2]
    )
    even = pncmap.joint_posteriors_batch(
        obs.samples[1:2 * n:2], obs.phi, obs.variances[1:2 * n:2]
    )
    tabs[2:2 * n:2] = odd
    tabs[1:2 * n:2] = even
    tabs[0] = pncmap.joint_posterior(
        obs.samples[0], obs.phi, obs.variances[0], support="x1"
    )
    tabs[2 * n] = pncmap.joint_posterior(
        obs.samples[2 * n], obs.phi, obs.variances[2 * n], support="x2"
    )
    return list(tabs)


def joint_variable_names(n: int) -> list[str]:
    """Chain order: x(1,0), x(1,1), x(2,1), x(2,2), ..., x(N+1,N)."""
    names = []
    for k in range(1, n + 1):
        names.append(f"x({k},{k - 1})")
        names.append(f"x({k},{k})")
    names.append(f"x({n + 1},{n})")
    return names


def build_async_graph(obs: ObservationSequence) -> FactorGraph:
    """Assemble the joint-symbol chain graph for one misaligned packet."""
    n = _require_async(obs)
    names = joint_variable_names(n)
    tabs = evidence_tables(obs)
    g = FactorGraph()
    for name in names:
        g.add_variable(name, 16)
    for k, (name, tab) in enumerate(zip(names, tabs)):
        g.add_factor(f"ev{k + 1}", (name,), tab)
    for k in range(2 * n):
        shared_x1 = k % 2 == 0  # x(n,n-1) -- x(n,n) agree on x1[n]
        table = PSI_X1_SHARED if shared_x1 else PSI_X2_SHARED
        g.add_factor(f"psi{k + 1}", (names[k], names[k + 1]), table)
    return g


def xor_posteriors(obs: ObservationSequence) -> np.ndarray:
    """Exact per-symbol XOR posteriors P(x1[n] xor x2[n] | all samples)."""
    n = _require_async(obs)
    graph = build_async_graph(obs)
    result = sum_product(graph, mode="tree")
    out = np.empty((n, 4))
    for i in range(n):
        belief = result.marginals[f"x({i + 1},{i + 1})"]
        out[i] = pncmap.collapse_xor(belief)
    return out


def decode_xor_uncoded(obs: ObservationSequence) -> np.ndarray:
    """MAP XOR packet (2N bits) from a misaligned observation sequence."""
    post = xor_posteriors(obs)
    return symbol_indices_to_bits(np.argmax(post, axis=1))


def xor_posteriors_sync(obs: ObservationSequence) -> np.ndarray:
    """Per-symbol XOR posteriors for the aligned case; samples decouple."""
    if not obs.synchronous:
        raise ValueError("observation is asynchronous; use xor_posteriors")
    joint = pncmap.joint_posteriors_batch(obs.samples, obs.phi, obs.variances)
    return _collapse_rows(joint)


def _collapse_rows(joint: np.ndarray) -> np.ndarray:
    out = np.empty((joint.shape[0], 4))
    for a in range(4):
        out[:, a] = joint[:, pncmap.XOR_OF_PAIR == a].sum(axis=1)
    return out


def decode_xor_sync(obs: ObservationSequence) -> np.ndarray:
    """Symbol-wise MAP XOR packet for the synchronous uplink."""
    post = xor_posteriors_sync(obs)
    return symbol_indices_to_bits(np.argmax(post, axis=1))
