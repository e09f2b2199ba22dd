"""Flow packing and PNC frame scheduling on a regular 1-D node line.

Opposing flows are aggregated greedily into right and left packings of
non-overlapping flows; pairing a right packing with a left packing forms a
dual packing whose overlap runs become PNC units.  A frame gives every dual
packing two slots in which all of its units run the alternating relay
pipeline concurrently, then carries the residual unidirectional traffic by
store-and-forward hops packed greedily under half-duplex and
adjacent-listener constraints.

``validate_schedule`` replays a frame cyclically at the packet level.  Every
signal a node hears is the XOR of all adjacent transmitters' contents, each
node keeps a GF(2) basis of everything it has heard plus its own packets,
and a delivery or relay handoff only counts if the packet really lies in the
span of the node's knowledge.  The replay therefore catches half-duplex
clashes, cross-lane contamination, causality bugs, and undecodable relaying
in one pass.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Flow:
    """Directed unicast demand between two distinct nodes of the line."""

    src: int
    dst: int

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("flow source and destination must differ")
        if self.src < 1 or self.dst < 1:
            raise ValueError("node indices are 1-based")

    @property
    def direction(self) -> str:
        return "right" if self.dst > self.src else "left"

    @property
    def lo(self) -> int:
        return min(self.src, self.dst)

    @property
    def hi(self) -> int:
        return max(self.src, self.dst)

    @property
    def n_hops(self) -> int:
        return self.hi - self.lo


@dataclass(frozen=True)
class Packing:
    """Non-overlapping same-direction flows, in sweep order."""

    direction: str
    flows: tuple


@dataclass(frozen=True)
class PncUnit:
    """Maximal bidirectional run shared by one right flow and one left flow."""

    lo: int
    hi: int
    right_flow: Flow
    left_flow: Flow

    @property
    def nodes(self) -> range:
        return range(self.lo, self.hi + 1)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class Segment:
    """Residual unidirectional span of one flow, traversed start -> end."""

    flow_index: int
    start: int
    end: int
    lane: tuple

    @property
    def n_hops(self) -> int:
        return abs(self.end - self.start)

    def path(self) -> list[int]:
        step = 1 if self.end > self.start else -1
        return list(range(self.start, self.end + step, step))


@dataclass(frozen=True)
class DualPacking:
    right: Packing
    left: Packing
    common_nodes: frozenset
    pnc_units: tuple
    unidirectional_segments: tuple


@dataclass(frozen=True)
class Transmission:
    node: int
    packet: tuple
    receivers: frozenset


@dataclass(frozen=True)
class FrameSchedule:
    slots: tuple
    n_nodes: int
    flows: tuple
    duals: tuple
    plan: dict = field(repr=False, hash=False, compare=False)

    @property
    def frame_length(self) -> int:
        return len(self.slots)

    @property
    def per_flow_throughput(self) -> float:
        return 1.0 / len(self.slots) if self.slots else float("inf")


def build_packings(flows, direction: str) -> list[Packing]:
    """Greedy directional sweep; repeats over leftovers until all flows pack."""
    if direction not in ("right", "left"):
        raise ValueError(f"direction must be 'right' or 'left', got {direction!r}")
    pool = [f for f in flows if f.direction == direction]
    if direction == "right":
        pool.sort(key=lambda f: (f.src, f.dst))
    else:
        pool.sort(key=lambda f: (-f.src, -f.dst))
    packings = []
    while pool:
        taken, leftover = [], []
        cursor = None
        for f in pool:
            fits = cursor is None or (
                f.src >= cursor if direction == "right" else f.src <= cursor
            )
            if fits:
                taken.append(f)
                cursor = f.dst
            else:
                leftover.append(f)
        packings.append(Packing(direction, tuple(taken)))
        pool = leftover
    return packings


def _pair_units(right: Packing, left: Packing) -> list[PncUnit]:
    units = []
    for r in right.flows:
        for l in left.flows:
            lo = max(r.src, l.dst)
            hi = min(r.dst, l.src)
            if hi > lo:
                units.append(PncUnit(lo, hi, r, l))
    units.sort(key=lambda u: u.lo)
    return units


def _residual_segments(packing: Packing, units, lane, flow_index) -> list[Segment]:
    segments = []
    for f in packing.flows:
        mine = [u for u in units if (u.right_flow is f or u.left_flow is f)]
        fi = flow_index[id(f)]
        if f.direction == "right":
            mine.sort(key=lambda u: u.lo)
            pos = f.src
            for u in mine:
                if u.lo > pos:
                    segments.append(Segment(fi, pos, u.lo, lane))
                pos = u.hi
            if pos < f.dst:
                segments.append(Segment(fi, pos, f.dst, lane))
        else:
            mine.sort(key=lambda u: -u.hi)
            pos = f.src
            for u in mine:
                if u.hi < pos:
                    segments.append(Segment(fi, pos, u.hi, lane))
                pos = u.lo
            if pos > f.dst:
                segments.append(Segment(fi, pos, f.dst, lane))
    return segments


def match_dual(rights, lefts, flows=None) -> tuple[list[DualPacking], list[Packing]]:
    """Pair packings in construction order; min(R, L) duals, rest unmatched."""
    if flows is None:
        flows = [f for p in list(rights) + list(lefts) for f in p.flows]
    flow_index = {id(f): i for i, f in enumerate(flows)}
    m = min(len(rights), len(lefts))
    duals = []
    for d in range(m):
        units = _pair_units(rights[d], lefts[d])
        common = set()
        for u in units:
            common.update(u.nodes)
        segs = _residual_segments(rights[d], units, ("dual", d, "right"), flow_index)
        segs += _residual_segments(lefts[d], units, ("dual", d, "left"), flow_index)
        duals.append(
            DualPacking(rights[d], lefts[d], frozenset(common), tuple(units), tuple(segs))
        )
    unmatched = list(rights[m:]) + list(lefts[m:])
    return duals, unmatched


def _unit_groups(units) -> list[list[int]]:
    """Split a dual's units into groups whose members share no node.

    Units only share a node when flow endpoints coincide inside the other
    direction's span; with distinct sources and sinks this never happens and
    there is a single group.
    """
    groups: list[list[int]] = []
    group_nodes: list[set] = []
    for u_i, u in enumerate(units):
        placed = False
        for g_i, nodes in enumerate(group_nodes):
            if nodes.isdisjoint(u.nodes):
                groups[g_i].append(u_i)
                nodes.update(u.nodes)
                placed = True
                break
        if not placed:
            groups.append([u_i])
            group_nodes.append(set(u.nodes))
    return groups


def _group_parity(units, group) -> dict[int, int]:
    """Alternating transmit parity, aligned so adjacent units never clash.

    Within a unit, neighbours alternate.  When the next unit starts right
    next to the previous one, its first node transmits in the same slot as
    the previous unit's last node, so neither hears the other mid-reception.
    """
    parity: dict[int, int] = {}
    prev_hi = None
    for u_i in group:
        u = units[u_i]
        if prev_hi is not None and u.lo - prev_hi == 1:
            start = parity[prev_hi]
        else:
            start = 0
        for n in u.nodes:
            parity[n] = (start + (n - u.lo)) % 2
        prev_hi = max(prev_hi, u.hi) if prev_hi is not None else u.hi
    return parity


def build_frame(flows, n_nodes: int | None = None) -> FrameSchedule:
    """Construct one frame delivering a packet per flow at rate 1/F.

    Interval 1 gives each dual packing two slots in which all of its PNC
    units run the alternating pipeline; interval 2 carries residual
    unidirectional segments store-and-forward with greedy slot packing
    under half-duplex and adjacency constraints.
    """
    flows = list(flows)
    if n_nodes is None:
        n_nodes = max((f.hi for f in flows), default=0)
    for f in flows:
        if f.hi > n_nodes:
            raise ValueError(f"flow {f} exceeds the {n_nodes}-node line")
    rights = build_packings(flows, "right")
    lefts = build_packings(flows, "left")
    duals, unmatched = match_dual(rights, lefts, flows)
    flow_index = {id(f): i for i, f in enumerate(flows)}

    slots: list[list[Transmission]] = []
    unit_meta = {}

    # Interval 1: alternating pipeline slots, two per dual packing per group.
    for d_i, dual in enumerate(duals):
        if not dual.pnc_units:
            continue
        for group in _unit_groups(dual.pnc_units):
            parity = _group_parity(dual.pnc_units, group)
            for p in (0, 1):
                entries = []
                for u_i in group:
                    u = dual.pnc_units[u_i]
                    for n in u.nodes:
                        if parity[n] != p:
                            continue
                        receivers = frozenset(
                            w for w in (n - 1, n + 1)
                            if u.lo <= w <= u.hi and parity[w] != p
                        )
                        entries.append(
                            Transmission(n, ("unit", d_i, u_i, n), receivers)
                        )
                slots.append(entries)
            for u_i in group:
                u = dual.pnc_units[u_i]
                unit_meta[(d_i, u_i)] = {
                    "unit": u,
                    "right_flow_index": flow_index[id(u.right_flow)],
                    "left_flow_index": flow_index[id(u.left_flow)],
                }

    # Interval 2: residual unidirectional traffic, store-and-forward.
    segments: list[Segment] = []
    for dual in duals:
        segments.extend(dual.unidirectional_segments)
    for p_i, packing in enumerate(unmatched):
        for f in packing.flows:
            segments.append(
                Segment(flow_index[id(f)], f.src, f.dst, ("unmatched", p_i))
            )

    first_sf_slot = len(slots)
    tx_at: dict[int, set] = {}
    rx_at: dict[int, set] = {}
    seg_slots: dict[int, list[int]] = {}

    # Hops may share a slot whenever no node transmits twice, no node both
    # transmits and receives, and no listener sits next to a foreign
    # transmitter.  Hops of one segment are placed independently: a packet
    # simply waits at an intermediate node until its next hop's slot comes
    # round again, pipelining across frames exactly like the PNC units.
    # Demanding consecutive slots per segment would make interval 2 at
    # least as long as the longest residual span.
    def hop_ok(t, u, v):
        if u in tx_at.get(t, ()) or u in rx_at.get(t, ()):
            return False
        if v in tx_at.get(t, ()) or v in rx_at.get(t, ()):
            return False
        for w in (v - 1, v + 1):
            if w != u and w in tx_at.get(t, ()):
                return False
        for w in (u - 1, u + 1):
            if w != v and w in rx_at.get(t, ()):
                return False
        return True

    for seg in segments:
        path = seg.path()
        placed = []
        for h in range(seg.n_hops):
            t = 0
            while not hop_ok(t, path[h], path[h + 1]):
                t += 1
            tx_at.setdefault(t, set()).add(path[h])
            rx_at.setdefault(t, set()).add(path[h + 1])
            placed.append(first_sf_slot + t)
        seg_slots[id(seg)] = placed

    n_sf_slots = max(tx_at, default=-1) + 1
    sf_entries: list[list[Transmission]] = [[] for _ in range(n_sf_slots)]
    for seg in segments:
        placed = seg_slots[id(seg)]
        path = seg.path()
        for h, abs_slot in enumerate(placed):
            sf_entries[abs_slot - first_sf_slot].append(
                Transmission(
                    path[h],
                    ("seg", seg.flow_index, id(seg), h),
                    frozenset({path[h + 1]}),
                )
            )
    slots.extend(sf_entries)

    routes = _build_routes(flows, duals, segments, unit_meta)
    plan = {
        "unit_meta": unit_meta,
        "segments": {id(seg): seg for seg in segments},
        "routes": routes,
        "unmatched": tuple(unmatched),
    }
    return FrameSchedule(
        tuple(tuple(e) for e in slots), n_nodes, tuple(flows), tuple(duals), plan
    )


def _build_routes(flows, duals, segments, unit_meta):
    """Per-flow ordered stage list: ('seg', seg id) / ('unit', dual, unit)."""
    stages_of = {i: [] for i in range(len(flows))}
    for seg in segments:
        stages_of[seg.flow_index].append(("seg", id(seg), seg.start, seg))
    for (d_i, u_i), meta in unit_meta.items():
        u = meta["unit"]
        stages_of[meta["right_flow_index"]].append(("unit", (d_i, u_i), u.lo, u))
        stages_of[meta["left_flow_index"]].append(("unit", (d_i, u_i), u.hi, u))
    routes = {}
    for f_i, items in stages_of.items():
        f = flows[f_i]
        items.sort(key=lambda it: it[2], reverse=(f.direction == "left"))
        routes[f_i] = [(kind, key) for kind, key, _pos, _obj in items]
    return routes


class _Span:
    """GF(2) row basis over packet atoms, pivoted on the highest set bit."""

    def __init__(self):
        self.pivots: dict[int, int] = {}

    def reduce(self, vec: int) -> int:
        while vec:
            row = self.pivots.get(vec.bit_length())
            if row is None:
                return vec
            vec ^= row
        return vec

    def insert(self, vec: int) -> None:
        vec = self.reduce(vec)
        if vec:
            self.pivots[vec.bit_length()] = vec

    def contains(self, vec: int) -> bool:
        return self.reduce(vec) == 0


@dataclass
class ValidationReport:
    violations: list
    delivered: dict
    frames_run: int

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def all_delivered(self) -> bool:
        return all(v > 0 for v in self.delivered.values())


def validate_schedule(flows, schedule: FrameSchedule, max_frames: int | None = None) -> ValidationReport:
    """Replay the frame cyclically and verify it actually works.

    Checks, per slot: no node both transmits and receives, and every
    prescribed transmission is information the transmitter can construct
    from what it has heard.  Packets advance through each flow's stages
    (segments hop once per slot; PNC units advance two hops per frame via
    the pipeline), and a delivery only counts when the destination can
    solve for the packet from its received signals plus self information.
    """
    flows = list(flows)
    violations: list[str] = []
    delivered = {i: 0 for i in range(len(flows))}
    if max_frames is None:
        max_frames = 2 * schedule.n_nodes + 8

    # Structural half-duplex pass over the prescription itself.
    for s_i, entries in enumerate(schedule.slots):
        tx_nodes = [e.node for e in entries]
        if len(set(tx_nodes)) != len(tx_nodes):
            violations.append(f"slot {s_i}: a node transmits twice")
        rx = set()
        for e in entries:
            rx.update(e.receivers)
        for n in set(tx_nodes) & rx:
            violations.append(f"slot {s_i}: node {n} both transmits and receives")
    if violations:
        return ValidationReport(violations, delivered, 0)

    plan = schedule.plan
    routes = plan["routes"]
    seg_table = plan["segments"]
    unit_meta = plan["unit_meta"]

    spans = {n: _Span() for n in range(1, schedule.n_nodes + 1)}
    atom = {i: 1 << i for i in range(len(flows))}
    for i, f in enumerate(flows):
        spans[f.src].insert(atom[i])

    inbox: dict[tuple, deque] = {}
    for f_i in range(len(flows)):
        if not routes[f_i]:
            violations.append(f"flow {f_i} has no route stages")
            continue
        inbox[(f_i, 0)] = deque([atom[f_i]])
        for st in range(1, len(routes[f_i])):
            inbox[(f_i, st)] = deque()
    if violations:
        return ValidationReport(violations, delivered, 0)
    stage_of = {
        (kind, key): (f_i, st)
        for f_i, stages in routes.items()
        for st, (kind, key) in enumerate(stages)
    }

    unit_state = {
        uid: {"R": dict.fromkeys(meta["unit"].nodes, 0),
              "L": dict.fromkeys(meta["unit"].nodes, 0)}
        for uid, meta in unit_meta.items()
    }
    # Per-segment packet in flight: [current hop index, packet mask].
    seg_state: dict[int, list | None] = {}

    def advance(f_i: int, st: int, node: int, mask: int, frame: int, s_i: int):
        """Hand a decoded packet to the next stage or count the delivery."""
        if not spans[node].contains(mask):
            violations.append(
                f"frame {frame} slot {s_i}: node {node} cannot decode flow {f_i}"
            )
            return
        if st + 1 < len(routes[f_i]):
            inbox[(f_i, st + 1)].append(mask)
        else:
            if node != flows[f_i].dst:
                violations.append(
                    f"frame {frame} slot {s_i}: flow {f_i} route ends at "
                    f"{node}, not its destination"
                )
            delivered[f_i] += 1

    # Precompile each slot's entries into ops with direct references, so the
    # frame loop does no key lookups.  Unit op hand specs: ("adv", f, st)
    # when the next node is the lane's end, ("store", next_node) otherwise,
    # None at the lane's own end.
    compiled = []
    for entries in schedule.slots:
        ops = []
        for e in entries:
            if e.packet[0] == "unit":
                _, d_i, u_i, node = e.packet
                uid = (d_i, u_i)
                meta = unit_meta[uid]
                u = meta["unit"]
                st8 = unit_state[uid]
                r_f, r_st = _unit_stage(routes, meta, uid, "right")
                l_f, l_st = _unit_stage(routes, meta, uid, "left")
                rin = inbox[(r_f, r_st)] if node == u.lo else None
                lin = inbox[(l_f, l_st)] if node == u.hi else None
                if node == u.hi:
                    hand_r = None
                elif node + 1 == u.hi:
                    hand_r = ("adv", r_f, r_st, node + 1)
                else:
                    hand_r = ("store", node + 1)
                if node == u.lo:
                    hand_l = None
                elif node - 1 == u.lo:
                    hand_l = ("adv", l_f, l_st, node - 1)
                else:
                    hand_l = ("store", node - 1)
                ops.append(("u", node, st8["R"], st8["L"], rin, lin, hand_r, hand_l))
            else:
                _, f_i, seg_id, hop = e.packet
                f_s, st = stage_of[("seg", seg_id)]
                seg = seg_table[seg_id]
                ops.append(
                    ("s", e.node, seg_id, hop, f_s, st, inbox[(f_s, st)],
                     seg.path()[hop + 1], hop + 1 == seg.n_hops)
                )
        compiled.append(ops)

    n_nodes = schedule.n_nodes
    frames = 0
    for frame in range(max_frames):
        frames = frame + 1
        for s_i, ops in enumerate(compiled):
            emissions = {}
            for op in ops:
                if op[0] == "u":
                    _, node, r_d, l_d, rin, lin, _, _ = op
                    if rin is not None and not r_d[node] and rin:
                        r_d[node] = rin.popleft()
                    if lin is not None and not l_d[node] and lin:
                        l_d[node] = lin.popleft()
                    content = r_d[node] ^ l_d[node]
                else:
                    seg_id, hop = op[2], op[3]
                    state = seg_state.get(seg_id)
                    if state is None and op[6]:
                        state = [0, op[6].popleft()]
                        seg_state[seg_id] = state
                    content = state[1] if state is not None and state[0] == hop else 0
                if content:
                    node = op[1]
                    if not spans[node].contains(content):
                        violations.append(
                            f"frame {frame} slot {s_i}: node {node} transmits "
                            f"information it does not have"
                        )
                    emissions[node] = content
                else:
                    emissions[op[1]] = 0

            # Physical reception: adjacent emissions superpose (XOR), so a
            # listener flanked by two transmitters gets one combined signal.
            heard = {}
            for n, c in emissions.items():
                if not c:
                    continue
                for w in (n - 1, n + 1):
                    if 1 <= w <= n_nodes and w not in emissions:
                        heard[w] = heard.get(w, 0) ^ c
            for w, y in heard.items():
                if y:
                    spans[w].insert(y)

            # Post-slot state movement.
            for op in ops:
                if op[0] == "u":
                    _, node, r_d, l_d, _, _, hand_r, hand_l = op
                    r_mask = r_d[node]
                    if r_mask:
                        r_d[node] = 0
                        if hand_r is None:
                            pass
                        elif hand_r[0] == "adv":
                            advance(hand_r[1], hand_r[2], hand_r[3], r_mask,
                                    frame, s_i)
                        else:
                            nxt = hand_r[1]
                            if r_d[nxt]:
                                violations.append(
                                    f"frame {frame} slot {s_i}: pipeline "
                                    f"overwrite at node {nxt}"
                                )
                            r_d[nxt] = r_mask
                    l_mask = l_d[node]
                    if l_mask:
                        l_d[node] = 0
                        if hand_l is None:
                            pass
                        elif hand_l[0] == "adv":
                            advance(hand_l[1], hand_l[2], hand_l[3], l_mask,
                                    frame, s_i)
                        else:
                            nxt = hand_l[1]
                            if l_d[nxt]:
                                violations.append(
                                    f"frame {frame} slot {s_i}: pipeline "
                                    f"overwrite at node {nxt}"
                                )
                            l_d[nxt] = l_mask
                else:
                    _, node, seg_id, hop, f_s, st, _, receiver, is_last = op
                    state = seg_state.get(seg_id)
                    if state is None or state[0] != hop:
                        continue
                    if is_last:
                        advance(f_s, st, receiver, state[1], frame, s_i)
                        seg_state[seg_id] = None
                    else:
                        state[0] = hop + 1
        if all(v > 0 for v in delivered.values()):
            break

    for f_i, count in delivered.items():
        if count == 0:
            violations.append(
                f"flow {f_i} ({flows[f_i].src}->{flows[f_i].dst}) undelivered "
                f"after {frames} frames"
            )
    return ValidationReport(violations, delivered, frames)


def _unit_stage(routes, meta, uid, side: str) -> tuple[int, int]:
    f_i = meta["right_flow_index"] if side == "right" else meta["left_flow_index"]
    for st, (kind, key) in enumerate(routes[f_i]):
        if kind == "unit" and key == uid:
            return f_i, st
    raise KeyError(f"unit {uid} missing from route of flow {f_i}")


def random_instance(n: int, rng) -> list[Flow]:
    """Random half/half source-sink split with a random matching."""
    if n < 2 or n % 2:
        raise ValueError("need an even number of nodes, at least 2")
    nodes = rng.permutation(np.arange(1, n + 1))
    sources = nodes[: n // 2]
    sinks = nodes[n // 2:]
    order = rng.permutation(n // 2)
    return [Flow(int(s), int(t)) for s, t in zip(sources, sinks[order])]


def throughput_vs_bound(n: int, seed: int, trials: int) -> dict:
    """Mean per-flow throughput of random full-load instances vs the 4/N bound."""
    if n < 4 or n % 2:
        raise ValueError("need an even node count of at least 4")
    rng = np.random.default_rng(seed)
    records = []
    for t in range(trials):
        flows = random_instance(n, rng)
        schedule = build_frame(flows, n)
        lam = schedule.per_flow_throughput
        records.append(
            {"trial": t, "n_flows": len(flows), "frame_length": schedule.frame_length,
             "lambda": lam, "lambda_n_over_4": lam * n / 4.0}
        )
    mean_lambda = float(np.mean([r["lambda"] for r in records]))
    return {
        "n": n,
        "seed": seed,
        "trials": trials,
        "records": records,
        "mean_lambda": mean_lambda,
        "mean_lambda_n_over_4": mean_lambda * n / 4.0,
    }
