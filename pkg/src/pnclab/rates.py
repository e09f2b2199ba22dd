"""Closed-form and numeric exchange-rate and energy calculators for the TWRC.

All SNRs, powers, and energies are linear with noise power normalised to one;
dB conversion happens only at I/O boundaries.  Schemes:

* ``PNC_LC``: lattice-coded uplink with rate [log2(P/(2P) + P)]/2 per
  direction, downlink at capacity; within half a bit of the cut-set bound.
* ``PNC_MUD``: multiuser-detection uplink at the sum-capacity split.
* ``SNC``: three equal slots, each a point-to-point link at capacity.
* ``ANC``: amplify-and-forward with a fixed half/half time split.
* ``TS``: four store-and-forward transmissions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SCHEMES = ("PNC_LC", "PNC_MUD", "SNC", "ANC", "TS", "CUTSET")

_MAX_EXPONENT = 500.0  # caps 2**x in the energy solvers to avoid overflow


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError(f"cannot convert non-positive value {x} to dB")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class LinkCapacities:
    """Per-hop AWGN capacities, retaining the powers they came from."""

    p1r: float
    p2r: float
    pr1: float
    pr2: float

    def __post_init__(self):
        for p in (self.p1r, self.p2r, self.pr1, self.pr2):
            if p < 0:
                raise ValueError("powers must be nonnegative")

    @property
    def c1r(self) -> float:
        return capacity_awgn(self.p1r)

    @property
    def c2r(self) -> float:
        return capacity_awgn(self.p2r)

    @property
    def cr1(self) -> float:
        return capacity_awgn(self.pr1)

    @property
    def cr2(self) -> float:
        return capacity_awgn(self.pr2)

    @classmethod
    def symmetric(cls, p: float) -> "LinkCapacities":
        return cls(p, p, p, p)


@dataclass(frozen=True)
class RateOperatingPoint:
    scheme: str
    p: float
    t_u: float
    r12: float
    r21: float

    @property
    def symmetric_rate(self) -> float:
        return min(self.r12, self.r21)


@dataclass(frozen=True)
class EnergySolution:
    scheme: str
    rate: float
    energy: float
    t_u: float
    p_uplink: float
    p_downlink: float

    @property
    def energy_db(self) -> float:
        return linear_to_db(self.energy)


def capacity_awgn(p: float) -> float:
    """AWGN capacity log2(1 + p) / 2 in bits per channel use."""
    if p < 0:
        raise ValueError(f"SNR must be nonnegative, got {p}")
    return 0.5 * math.log2(1.0 + p)


def cutset_locus(caps: LinkCapacities, t_u: float) -> tuple[float, float]:
    """Upper bounds (U12, U21) for one uplink/downlink time split."""
    if not (0.0 <= t_u <= 1.0):
        raise ValueError(f"t_u must lie in [0, 1], got {t_u}")
    u12 = min(t_u * caps.c1r, (1.0 - t_u) * caps.cr2)
    u21 = min(t_u * caps.c2r, (1.0 - t_u) * caps.cr1)
    return u12, u21


def cutset_region_check(caps: LinkCapacities, r12: float, r21: float) -> bool:
    """Whether (r12, r21) lies inside the closed cut-set outer region.

    The two harmonic constraints are evaluated in product form so zero rates
    and zero capacities need no special-casing; the orientation of the third
    (negative-slope) constraint depends on which direction saturates first.
    """
    if r12 < 0 or r21 < 0:
        return False
    if r21 * (caps.c2r + caps.cr1) > caps.c2r * caps.cr1:
        return False
    if r12 * (caps.c1r + caps.cr2) > caps.c1r * caps.cr2:
        return False
    tol = 1e-12
    if caps.c2r * caps.cr2 >= caps.c1r * caps.cr1:  # c2r/cr1 >= c1r/cr2
        if caps.cr1 == 0 or caps.c1r == 0:
            return r21 <= 0 if caps.cr1 == 0 else r12 <= 0
        return r21 / caps.cr1 + r12 / caps.c1r <= 1.0 + tol
    if caps.c2r == 0 or caps.cr2 == 0:
        return r21 <= 0 if caps.c2r == 0 else r12 <= 0
    return r21 / caps.c2r + r12 / caps.cr2 <= 1.0 + tol


def pnc_lc_uplink_rates(p1r: float, p2r: float) -> tuple[float, float]:
    """Lattice-coded uplink rates, clamped at zero; within 1/2 bit of capacity."""
    if p1r <= 0 or p2r <= 0:
        raise ValueError("powers must be positive")
    r1 = 0.5 * math.log2(p1r / (p1r + p2r) + p1r)
    r2 = 0.5 * math.log2(p2r / (p1r + p2r) + p2r)
    return max(0.0, r1), max(0.0, r2)


def pnc_lc_locus(caps: LinkCapacities, t_u: float) -> tuple[float, float]:
    """Achievable (R12, R21) of the lattice-coded scheme at one time split."""
    r1r, r2r = pnc_lc_uplink_rates(caps.p1r, caps.p2r)
    r12 = min(t_u * r1r, (1.0 - t_u) * caps.cr2)
    r21 = min(t_u * r2r, (1.0 - t_u) * caps.cr1)
    return r12, r21


def symmetric_rate(scheme: str, p: float) -> RateOperatingPoint:
    """Best symmetric exchange rate under equal powers p on all four hops."""
    if p <= 0:
        raise ValueError(f"SNR must be positive, got {p}")
    if scheme == "PNC_LC":
        up = math.log2(0.5 + p)
        down = math.log2(1.0 + p)
        if up <= 0.0:  # uplink rate clamps to zero below p = 1/2
            return RateOperatingPoint(scheme, p, 0.5, 0.0, 0.0)
        t_u = down / (down + up)
        rate = 0.5 * down * up / (down + up)
    elif scheme == "PNC_MUD":
        up = math.log2(1.0 + 2.0 * p)
        down = math.log2(1.0 + p)
        t_u = down / (down + 0.5 * up)
        rate = 0.25 * down * up / (down + 0.5 * up)
    elif scheme == "SNC":
        t_u = 2.0 / 3.0
        rate = math.log2(1.0 + p) / 6.0
    elif scheme == "ANC":
        t_u = 0.5
        rate = 0.25 * math.log2(1.0 + p * p / (3.0 * p + 1.0))
    elif scheme == "TS":
        t_u = 0.5
        rate = math.log2(1.0 + p) / 8.0
    elif scheme == "CUTSET":
        t_u = 0.5
        rate = 0.25 * math.log2(1.0 + p)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return RateOperatingPoint(scheme, p, t_u, rate, rate)


TABLE3_SCHEMES = ("PNC_LC", "PNC_MUD", "SNC", "ANC", "TS")


def table3(p_db_list) -> list[dict]:
    """Symmetric exchange rates, the half-time cut-set bound, and the gaps."""
    p_db_list = list(p_db_list)
    if not p_db_list:
        raise ValueError("power grid must be nonempty")
    rows = []
    for p_db in p_db_list:
        p = db_to_linear(p_db)
        row = {"p_db": p_db}
        bound = symmetric_rate("CUTSET", p).symmetric_rate
        for scheme in TABLE3_SCHEMES:
            row[scheme] = symmetric_rate(scheme, p).symmetric_rate
        row["CUTSET"] = bound
        for scheme in TABLE3_SCHEMES:
            row[f"gap_{scheme}"] = bound - row[scheme]
        rows.append(row)
    return rows


def _bisect(f, lo: float, hi: float, *, tol: float = 1e-12, max_iter: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(
            f"bisection bracket does not straddle a root: f({lo})={flo}, f({hi})={fhi}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or hi - lo < tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _pow2(x: float) -> float:
    return 2.0 ** min(x, _MAX_EXPONENT)


def energy_for_rate(scheme: str, r_target: float) -> EnergySolution:
    """Per-node transmit energy achieving a symmetric rate under equal energies.

    SNC, PNC_MUD, and ANC invert in closed form.  PNC_LC and TS solve the
    node/relay energy-balance condition by bisection on the time split, with
    the per-split powers recovered from the rate equations.
    """
    r = float(r_target)
    if r <= 0:
        raise ValueError(f"target rate must be positive, got {r}")
    if scheme in ("SNC", "PNC_MUD"):
        energy = (_pow2(6.0 * r) - 1.0) / 3.0
        if scheme == "SNC":
            return EnergySolution(scheme, r, energy, 2.0 / 3.0, 3.0 * energy, 3.0 * energy)
        return EnergySolution(scheme, r, energy, 2.0 / 3.0, 1.5 * energy, 3.0 * energy)
    if scheme == "ANC":
        v = _pow2(4.0 * r) - 1.0
        energy = (3.0 * v + math.sqrt(9.0 * v * v + 4.0 * v)) / 4.0
        return EnergySolution(scheme, r, energy, 0.5, 2.0 * energy, 2.0 * energy)
    if scheme == "PNC_LC":
        def imbalance(t):
            e_node = t * (_pow2(2.0 * r / t) - 0.5)
            e_relay = (1.0 - t) * (_pow2(2.0 * r / (1.0 - t)) - 1.0)
            return e_node - e_relay

        t_u = _bisect(imbalance, max(1e-9, 2.0 * r / _MAX_EXPONENT),
                      1.0 - max(1e-9, 2.0 * r / _MAX_EXPONENT))
        p_up = _pow2(2.0 * r / t_u) - 0.5
        p_down = _pow2(2.0 * r / (1.0 - t_u)) - 1.0
        return EnergySolution(scheme, r, t_u * p_up, t_u, p_up, p_down)
    if scheme == "TS":
        def imbalance(t):
            e_node = 0.5 * t * (_pow2(4.0 * r / t) - 1.0)
            e_relay = (1.0 - t) * (_pow2(4.0 * r / (1.0 - t)) - 1.0)
            return e_node - e_relay

        t_u = _bisect(imbalance, max(1e-9, 4.0 * r / _MAX_EXPONENT),
                      1.0 - max(1e-9, 4.0 * r / _MAX_EXPONENT))
        p_up = _pow2(4.0 * r / t_u) - 1.0
        p_down = _pow2(4.0 * r / (1.0 - t_u)) - 1.0
        return EnergySolution(scheme, r, 0.5 * t_u * p_up, t_u, p_up, p_down)
    raise ValueError(f"unknown scheme {scheme!r}")


TABLE4_SCHEMES = ("SNC", "PNC_MUD", "PNC_LC", "ANC", "TS")


def table4(p_snc_db_list) -> list[dict]:
    """Energies (dB) matching each scheme to the SNC rate at the given powers."""
    p_snc_db_list = list(p_snc_db_list)
    if not p_snc_db_list:
        raise ValueError("power grid must be nonempty")
    rows = []
    for p_db in p_snc_db_list:
        p = db_to_linear(p_db)
        rate = math.log2(1.0 + p) / 6.0
        row = {"p_snc_db": p_db, "rate": rate}
        for scheme in TABLE4_SCHEMES:
            row[f"E_{scheme}_db"] = energy_for_rate(scheme, rate).energy_db
        rows.append(row)
    return rows


def e2e_ber(scheme: str, pe: float) -> float:
    """End-to-end BER from a one-hop BER for the uncoded exchange schemes.

    TS and PNC relay one detection per hop (error iff exactly one hop errs);
    SNC additionally XORs two independently detected uplink packets.
    """
    if not (0.0 <= pe <= 0.5):
        raise ValueError(f"one-hop BER must lie in [0, 0.5], got {pe}")
    if scheme in ("TS", "PNC"):
        return 2.0 * (1.0 - pe) * pe
    if scheme == "SNC":
        return 3.0 * pe - 6.0 * pe ** 2 + 4.0 * pe ** 3
    raise ValueError(f"unknown scheme {scheme!r}; expected TS, PNC, or SNC")
