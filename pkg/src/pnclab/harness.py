"""Experiment orchestration: reproducible BER sweeps, tables, loci, CSV.

Every random draw comes from a per-packet substream derived as
``default_rng(SeedSequence(entropy=seed, spawn_key=(point_index,
packet_index)))``, so results are identical no matter how packets are
distributed over workers, and a (config, seed) pair fully determines every
output byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import async_uncoded, ra_cnc, rates
from .channel import (DELTA_EPS, GENERATOR_NAME, ChannelParams, uplink_observe,
                      uplink_observe_sync)
from .modem import modulate_qpsk
from .netsched import build_frame, build_packings, match_dual, random_instance

VERSION = "0.1.0"

EXPERIMENT_KINDS = (
    "ber-uncoded", "ber-coded", "rates-table3", "energy-table4",
    "region-locus", "netsched",
)
CODED_SCHEMES = ("joint-cnc", "mud-xor", "xor-cd")


class UsageError(Exception):
    """Bad configuration or command line; maps to exit code 2."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "ber-uncoded"
    scheme: str = "uncoded"
    delta: float = 0.0
    phi: float = 0.0
    ebn0_grid: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    packets: int = 200
    source_bits: int | None = None
    max_iter: int = 50
    seed: int = 1
    noiseless: bool = False
    out: str | None = None

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise UsageError(f"unknown experiment kind {self.kind!r}")
        if not self.ebn0_grid:
            raise UsageError("ebn0 grid must be nonempty")
        if not all(math.isfinite(x) for x in self.ebn0_grid):
            raise UsageError("ebn0 grid values must be finite")
        if self.packets < 1:
            raise UsageError("packets must be >= 1")
        if self.kind == "ber-coded" and self.scheme not in CODED_SCHEMES:
            raise UsageError(
                f"coded scheme must be one of {CODED_SCHEMES}, got {self.scheme!r}"
            )

    @property
    def bits_per_packet(self) -> int:
        if self.source_bits is not None:
            return self.source_bits
        return 2048 if self.kind == "ber-uncoded" else 4096


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    errors: int
    bits: int
    ber: float
    ci_low: float
    ci_high: float


def wilson_interval(errors: int, bits: int, z: float = 1.959964) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if bits <= 0:
        raise ValueError("need at least one trial")
    p = errors / bits
    zz = z * z / bits
    centre = (p + zz / 2.0) / (1.0 + zz)
    half = z * math.sqrt(p * (1.0 - p) / bits + zz / (4.0 * bits)) / (1.0 + zz)
    return max(0.0, centre - half), min(1.0, centre + half)


def packet_rng(seed: int, point_index: int, packet_index: int) -> np.random.Generator:
    """Independent substream for one (grid point, packet) cell."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(point_index, packet_index))
    )


def noise_density(ebn0_db: float, coded: bool, q: int = 3) -> float:
    """N0 for unit-energy QPSK at the given Eb/N0.

    Uncoded sweeps count energy per channel bit (half a symbol); coded
    sweeps count energy per source bit, i.e. q channel bits' worth.
    """
    rho = 10.0 ** (ebn0_db / 10.0)
    per_bit = 0.5  # symbol energy per carried bit
    eb = per_bit * (q if coded else 1)
    return eb / rho


def _observe(x1, x2, params: ChannelParams, rng, noiseless: bool):
    if params.delta < DELTA_EPS:
        sync_params = ChannelParams(0.0, params.phi, params.power, params.n0)
        return uplink_observe_sync(x1, x2, sync_params, rng=rng, noiseless=noiseless)
    return uplink_observe(x1, x2, params, rng=rng, noiseless=noiseless)


def simulate_uncoded_packet(config: ExperimentConfig, n0: float, rng) -> tuple[int, int]:
    """One uplink packet; returns (xor-bit errors, bits counted)."""
    nbits = config.bits_per_packet
    b1 = rng.integers(0, 2, nbits)
    b2 = rng.integers(0, 2, nbits)
    params = ChannelParams(config.delta, config.phi, 1.0, n0)
    obs = _observe(modulate_qpsk(b1), modulate_qpsk(b2), params, rng,
                   config.noiseless)
    if obs.synchronous:
        decoded = async_uncoded.decode_xor_sync(obs)
    else:
        decoded = async_uncoded.decode_xor_uncoded(obs)
    truth = b1 ^ b2
    return int(np.count_nonzero(decoded != truth)), truth.size


def simulate_coded_packet(config: ExperimentConfig, ra: ra_cnc.RaConfig,
                          n0: float, rng) -> tuple[int, int]:
    nbits = config.bits_per_packet
    s1 = rng.integers(0, 2, nbits)
    s2 = rng.integers(0, 2, nbits)
    _, x1 = ra_cnc.encode_node(s1, ra)
    _, x2 = ra_cnc.encode_node(s2, ra)
    params = ChannelParams(config.delta, config.phi, 1.0, n0)
    obs = _observe(x1, x2, params, rng, config.noiseless)
    if config.scheme == "joint-cnc":
        decoded = ra_cnc.joint_cnc_decode(obs, ra, config.max_iter)
    elif config.scheme == "mud-xor":
        decoded = ra_cnc.mud_xor_decode(obs, ra, config.max_iter)
    else:
        decoded = ra_cnc.xor_cd_decode(obs, ra, config.max_iter)
    truth = s1 ^ s2
    return int(np.count_nonzero(decoded != truth)), truth.size


def run_ber_sweep(config: ExperimentConfig) -> list[BerPoint]:
    """Monte Carlo BER at every grid point, with Wilson 95% intervals."""
    if config.kind not in ("ber-uncoded", "ber-coded"):
        raise UsageError(f"run_ber_sweep cannot run kind {config.kind!r}")
    coded = config.kind == "ber-coded"
    ra = None
    if coded:
        if config.bits_per_packet % 2:
            raise UsageError("coded source bits must be even (I/Q split)")
        ra = ra_cnc.RaConfig(m=config.bits_per_packet // 2, q=3, seed=config.seed)
    points = []
    for p_i, ebn0 in enumerate(config.ebn0_grid):
        n0 = 1e-9 if config.noiseless else noise_density(ebn0, coded)
        errors = 0
        bits = 0
        for k in range(config.packets):
            rng = packet_rng(config.seed, p_i, k)
            if coded:
                e, b = simulate_coded_packet(config, ra, n0, rng)
            else:
                e, b = simulate_uncoded_packet(config, n0, rng)
            errors += e
            bits += b
        lo, hi = wilson_interval(errors, bits)
        points.append(BerPoint(float(ebn0), errors, bits, errors / bits, lo, hi))
    return points


# -- delimited output ---------------------------------------------------

def _meta_line(seed) -> str:
    return f"# pnc-lab v{VERSION} seed={seed} generator={GENERATOR_NAME}"


def write_ber_csv(path, points, config: ExperimentConfig) -> None:
    with open(path, "w") as fh:
        fh.write(_meta_line(config.seed) + "\n")
        fh.write("ebn0_db,errors,bits,ber,ci_low,ci_high,scheme,delta,phi,seed\n")
        for p in points:
            fh.write(
                f"{p.ebn0_db!r},{p.errors},{p.bits},{p.ber!r},{p.ci_low!r},"
                f"{p.ci_high!r},{config.scheme},{config.delta!r},"
                f"{config.phi!r},{config.seed}\n"
            )


def run_table3(p_db_list=None) -> list[dict]:
    rows = rates.table3(p_db_list if p_db_list else (0, 2, 4, 6, 8, 10))
    return rows


def write_table3_csv(path, rows, seed="-") -> None:
    cols = ["p_db"] + list(rates.TABLE3_SCHEMES) + ["CUTSET"] + [
        f"gap_{s}" for s in rates.TABLE3_SCHEMES
    ]
    with open(path, "w") as fh:
        fh.write(_meta_line(seed) + "\n")
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(f"{row[c]:.6f}" if c != "p_db" else f"{row[c]}"
                              for c in cols) + "\n")


def run_table4(p_db_list=None) -> list[dict]:
    return rates.table4(p_db_list if p_db_list else (0, 2, 4, 6, 8, 10))


def write_table4_csv(path, rows, seed="-") -> None:
    cols = ["p_snc_db", "rate"] + [f"E_{s}_db" for s in rates.TABLE4_SCHEMES]
    with open(path, "w") as fh:
        fh.write(_meta_line(seed) + "\n")
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(f"{row[c]:.6f}" if c != "p_snc_db" else f"{row[c]}"
                              for c in cols) + "\n")


def run_locus(caps: rates.LinkCapacities, steps: int) -> list[dict]:
    """Cut-set and lattice-coded rate loci over a uniform time-split grid."""
    if steps < 2:
        raise UsageError("locus needs at least 2 steps")
    rows = []
    for t in np.linspace(0.0, 1.0, steps):
        u12, u21 = rates.cutset_locus(caps, float(t))
        r12, r21 = rates.pnc_lc_locus(caps, float(t))
        rows.append({"t_u": float(t), "U12": u12, "U21": u21,
                     "R12_LC": r12, "R21_LC": r21})
    return rows


def write_locus_csv(path, rows, seed="-") -> None:
    cols = ["t_u", "U12", "U21", "R12_LC", "R21_LC"]
    with open(path, "w") as fh:
        fh.write(_meta_line(seed) + "\n")
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(f"{row[c]:.9f}" for c in cols) + "\n")


def run_netsched(n: int, trials: int, seed: int) -> list[dict]:
    """Random full-load instances: frame length and per-flow throughput."""
    rng = np.random.default_rng(seed)
    rows = []
    for t in range(trials):
        flows = random_instance(n, rng)
        rights = build_packings(flows, "right")
        lefts = build_packings(flows, "left")
        duals, _ = match_dual(rights, lefts, flows)
        schedule = build_frame(flows, n)
        lam = schedule.per_flow_throughput
        rows.append({
            "N": n, "seed": seed, "flows": len(flows), "M_dual": len(duals),
            "F": schedule.frame_length, "lambda": lam,
            "lambdaN_over_4": lam * n / 4.0,
        })
    return rows


def write_netsched_csv(path, rows, seed) -> None:
    cols = ["N", "seed", "flows", "M_dual", "F", "lambda", "lambdaN_over_4"]
    with open(path, "w") as fh:
        fh.write(_meta_line(seed) + "\n")
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(f"{row[c]!r}" if isinstance(row[c], float)
                              else str(row[c]) for c in cols) + "\n")


# -- config file --------------------------------------------------------

_CONFIG_KEYS = ({f.name for f in fields(ExperimentConfig)} - {"ebn0_grid"}) | {"ebn0"}


def parse_ebn0(text: str) -> tuple:
    """Grid syntax: 'start:step:stop' (inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad ebn0 range {text!r}; expected start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise UsageError("ebn0 range step must be positive")
        count = int(round((stop - start) / step)) + 1
        return tuple(start + i * step for i in range(max(count, 1)))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise UsageError(f"bad ebn0 list {text!r}") from exc


def parse_phi(text: str) -> float:
    """Accepts plain radians or simple multiples of pi like 'pi/4', '3*pi/8'."""
    text = text.strip().lower()
    try:
        return float(text)
    except ValueError:
        pass
    if "pi" not in text:
        raise UsageError(f"cannot parse phase {text!r}")
    num, _, den = text.partition("/")
    num = num.strip()
    mult = 1.0
    if num != "pi":
        head, _, tail = num.partition("*")
        if tail.strip() != "pi":
            raise UsageError(f"cannot parse phase {text!r}")
        mult = float(head)
    try:
        div = float(den) if den else 1.0
    except ValueError as exc:
        raise UsageError(f"cannot parse phase {text!r}") from exc
    return mult * math.pi / div


def load_config_file(path) -> dict:
    """Line-oriented ``key = value`` file; unknown keys are errors."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def config_from_values(values: dict) -> ExperimentConfig:
    kwargs = {}
    for key, value in values.items():
        if key == "ebn0":
            kwargs["ebn0_grid"] = parse_ebn0(value)
        elif key in ("packets", "max_iter", "seed", "source_bits"):
            kwargs[key] = int(value)
        elif key == "delta":
            kwargs[key] = float(value)
        elif key == "phi":
            kwargs[key] = parse_phi(value) if isinstance(value, str) else value
        elif key == "noiseless":
            kwargs[key] = str(value).lower() in ("1", "true", "yes")
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)
