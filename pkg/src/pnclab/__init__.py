"""Two-way relay channel PNC workbench.

Link-level simulation of physical-layer network coding with belief
propagation decoders, information-theoretic rate and energy calculators,
and 1-D flow-packing schedule construction.
"""

from .channel import DELTA_EPS, ChannelParams, ObservationSequence
from .factorgraph import FactorGraph, SumProductResult, sum_product
from .harness import BerPoint, ExperimentConfig, run_ber_sweep
from .modem import demodulate_qpsk, modulate_qpsk
from .netsched import Flow, FrameSchedule, build_frame, validate_schedule
from .ra_cnc import RaConfig, joint_cnc_decode, mud_xor_decode, ra_encode, xor_cd_decode
from .rates import LinkCapacities, capacity_awgn, e2e_ber, symmetric_rate

__version__ = "0.1.0"

__all__ = [
    "BerPoint",
    "ChannelParams",
    "DELTA_EPS",
    "ExperimentConfig",
    "FactorGraph",
    "Flow",
    "FrameSchedule",
    "LinkCapacities",
    "ObservationSequence",
    "RaConfig",
    "SumProductResult",
    "build_frame",
    "capacity_awgn",
    "demodulate_qpsk",
    "e2e_ber",
    "joint_cnc_decode",
    "modulate_qpsk",
    "mud_xor_decode",
    "ra_encode",
    "run_ber_sweep",
    "sum_product",
    "symmetric_rate",
    "validate_schedule",
    "xor_cd_decode",
]
