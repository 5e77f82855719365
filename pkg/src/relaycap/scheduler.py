"""Divide-and-conquer level assignment, time expansion, half-duplex
scheduling and bit-exact schedule simulation.

The inductive construction serves one bit (pair) per step:

* bidirectional step -- both users of a pair transmit on the highest
  uplink relay level they share (``l_u = min`` of their uplink gains) and
  the relay forwards the XOR on the lowest downlink level they share
  (``l_d = min`` of their downlink gains);
* one-way step -- the source transmits on its highest reachable uplink
  level (``l_u`` = its uplink gain) and the relay forwards the bit on the
  destination's lowest reachable downlink level (``l_d`` = the
  destination's downlink gain).

After a step, every uplink gain >= l_u and every downlink gain >= l_d
drops by one (the removed level disappears from the frame), and the
reduced rate tuple provably stays inside the reduced network's cut-set
region; that invariant is re-checked at runtime on every step.

Steps are recorded in the coordinates of the network current at that
step; `_replay` translates them back to original-network levels by
undoing the removals in reverse order.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cutset import Membership, Rate, in_det_cutset
from .detnet import (
    FULL_DUPLEX,
    DetNetwork,
    HalfDuplex,
    LevelVector,
    NodeId,
    ShapeError,
    node_downlink_receive,
    relay_uplink_receive,
)

XOR = "xor"
SOLO = "solo"


class NotInRegionError(ValueError):
    """Requested rates lie outside the cut-set region."""

    def __init__(self, membership: Membership):
        self.violations = membership.violations
        cuts = ", ".join(
            f"{v.cut.describe()}: {v.rate_sum} > {v.bound}" for v in membership.violations
        )
        super().__init__(f"rate tuple outside the cut-set region; violated cuts: {cuts}")


class InductionInvariantError(RuntimeError):
    """A reduction step left the reduced region -- provably impossible, so
    reaching this means a bug, not bad input."""


class ScheduleInvalidError(ValueError):
    """A schedule violates a level bound or reuses a level within a slot."""


@dataclass(frozen=True)
class LevelAssignment:
    """One relay level pair serving one session in one (listen, transmit)
    slot combination.  ``uplink_level`` is bottom-up, ``downlink_level``
    top-down, both in original-network coordinates."""

    pair: int
    kind: str  # XOR or SOLO
    side: str | None  # transmitting side for SOLO, None for XOR
    uplink_slot: int
    uplink_level: int
    downlink_slot: int
    downlink_level: int

    def __post_init__(self) -> None:
        if self.kind not in (XOR, SOLO):
            raise ValueError(f"unknown assignment kind {self.kind!r}")
        if (self.side is None) != (self.kind == XOR):
            raise ValueError("XOR assignments carry no side; SOLO assignments need one")


@dataclass(frozen=True)
class Schedule:
    net: DetNetwork
    slots: int
    assignments: tuple[LevelAssignment, ...]
    listen_slots: int | None = None  # half-duplex: slots [0, listen_slots) listen

    def bit_budgets(self) -> dict[NodeId, int]:
        """Directed message bits carried per (pair, source side)."""
        budgets = {(i, s): 0 for i in range(self.net.pairs) for s in ("A", "B")}
        for a in self.assignments:
            if a.kind == XOR:
                budgets[(a.pair, "A")] += 1
                budgets[(a.pair, "B")] += 1
            else:
                budgets[(a.pair, a.side)] += 1
        return budgets


def _reduce_gains(net: DetNetwork, l_u: int, l_d: int) -> DetNetwork:
    """Remove uplink level l_u and downlink level l_d: every gain at or
    above the removed level drops by one."""
    return DetNetwork(
        tuple(n - (n >= l_u) for n in net.n_ar),
        tuple(n - (n >= l_u) for n in net.n_br),
        tuple(n - (n >= l_d) for n in net.n_ra),
        tuple(n - (n >= l_d) for n in net.n_rb),
    )


def reduce_pair_bidirectional(net: DetNetwork, pair: int) -> tuple[DetNetwork, int, int]:
    """Serve one XOR bit of ``pair``: returns the reduced network and the
    removed levels (l_u, l_d)."""
    gains = (net.n_ar[pair], net.n_br[pair], net.n_ra[pair], net.n_rb[pair])
    if min(gains) < 1:
        raise ValueError(
            f"pair {pair} has a zero gain {gains}; bidirectional step needs all four links"
        )
    l_u = min(net.n_ar[pair], net.n_br[pair])
    l_d = min(net.n_ra[pair], net.n_rb[pair])
    return _reduce_gains(net, l_u, l_d), l_u, l_d


def reduce_pair_oneway(net: DetNetwork, pair: int, source: str) -> tuple[DetNetwork, int, int]:
    """Serve one bit from ``source`` of ``pair`` to the opposite side."""
    if source not in ("A", "B"):
        raise ValueError(f"source side must be 'A' or 'B', got {source!r}")
    l_u = net.uplink_gain(pair, source)
    dest = "B" if source == "A" else "A"
    l_d = net.downlink_gain(pair, dest)
    if l_u < 1 or l_d < 1:
        raise ValueError(
            f"one-way step {source}{pair + 1} needs positive gains, have l_u={l_u}, l_d={l_d}"
        )
    return _reduce_gains(net, l_u, l_d), l_u, l_d


def expand_time(net: DetNetwork, q: int) -> DetNetwork:
    """Q channel uses of a network are one use of the network with all
    gains multiplied by Q."""
    if q < 1:
        raise ValueError("expansion factor must be >= 1")
    return DetNetwork(
        tuple(n * q for n in net.n_ar),
        tuple(n * q for n in net.n_br),
        tuple(n * q for n in net.n_ra),
        tuple(n * q for n in net.n_rb),
    )


@dataclass
class _Step:
    pair: int
    kind: str
    side: str | None
    l_u: int
    l_d: int


def _next_step(rates: list[int]) -> tuple[int, str, str | None]:
    """Deterministic induction order: lowest-index pair with both rates
    nonzero first; otherwise lowest-index nonzero directed rate, A before B."""
    m = len(rates) // 2
    for i in range(m):
        if rates[2 * i] > 0 and rates[2 * i + 1] > 0:
            return i, XOR, None
    for i in range(m):
        if rates[2 * i] > 0:
            return i, SOLO, "A"
        if rates[2 * i + 1] > 0:
            return i, SOLO, "B"
    raise AssertionError("no step requested from the zero tuple")


def _run_induction(net: DetNetwork, rates: Sequence[int]) -> list[_Step]:
    current = net
    remaining = list(rates)
    steps: list[_Step] = []
    while any(remaining):
        pair, kind, side = _next_step(remaining)
        if kind == XOR:
            current, l_u, l_d = reduce_pair_bidirectional(current, pair)
            remaining[2 * pair] -= 1
            remaining[2 * pair + 1] -= 1
        else:
            current, l_u, l_d = reduce_pair_oneway(current, pair, side)
            remaining[2 * pair + (0 if side == "A" else 1)] -= 1
        steps.append(_Step(pair, kind, side, l_u, l_d))
        check = in_det_cutset(current, remaining, FULL_DUPLEX)
        if not check.member:
            raise InductionInvariantError(
                f"reduced tuple {tuple(remaining)} left the reduced region after "
                f"step {len(steps)} ({kind} pair {pair}); this contradicts the "
                f"induction safety proof"
            )
    return steps


def _replay(steps: list[_Step]) -> list[tuple[_Step, int, int]]:
    """Map each step's (l_u, l_d) from its reduced coordinates back to
    original-network levels.  Removing level r renumbers levels above it
    down by one, so undoing removal j bumps any level >= r_j back up."""
    out = []
    for k, step in enumerate(steps):
        l_u, l_d = step.l_u, step.l_d
        for j in range(k - 1, -1, -1):
            if l_u >= steps[j].l_u:
                l_u += 1
            if l_d >= steps[j].l_d:
                l_d += 1
        out.append((step, l_u, l_d))
    return out


def _integral_rates(rates: Sequence[Rate]) -> list[int]:
    out = []
    for r in rates:
        f = Fraction(r)
        if f.denominator != 1:
            raise ValueError(f"expected integral rates, got component {r}")
        out.append(int(f))
    return out


def divide_and_conquer(net: DetNetwork, rates: Sequence[Rate]) -> Schedule:
    """Single-use schedule achieving an integral in-region rate tuple."""
    ints = _integral_rates(rates)
    membership = in_det_cutset(net, ints, FULL_DUPLEX)
    if not membership.member:
        raise NotInRegionError(membership)
    steps = _run_induction(net, ints)
    assignments = tuple(
        LevelAssignment(s.pair, s.kind, s.side, 0, l_u, 0, l_d)
        for s, l_u, l_d in _replay(steps)
    )
    return Schedule(net=net, slots=1, assignments=assignments)


def _interleaved(level: int, lanes: int) -> tuple[int, int]:
    """Expanded level -> (slot, per-use level) under the block interleaving
    that identifies Q uses with the gains-times-Q network."""
    return (level - 1) % lanes, (level + lanes - 1) // lanes


def schedule_fractional(net: DetNetwork, rates: Sequence[Rate]) -> Schedule:
    """Schedule a rational in-region tuple over Q uses, Q = lcm of the rate
    denominators."""
    fracs = [Fraction(r) for r in rates]
    membership = in_det_cutset(net, fracs, FULL_DUPLEX)
    if not membership.member:
        raise NotInRegionError(membership)
    q = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    expanded = expand_time(net, q)
    steps = _run_induction(expanded, [int(f * q) for f in fracs])
    assignments = []
    for s, l_u, l_d in _replay(steps):
        up_slot, up_level = _interleaved(l_u, q)
        down_slot, down_level = _interleaved(l_d, q)
        assignments.append(
            LevelAssignment(s.pair, s.kind, s.side, up_slot, up_level, down_slot, down_level)
        )
    return Schedule(net=net, slots=q, assignments=tuple(assignments))


def schedule_half_duplex(
    net: DetNetwork, delta: Fraction, rates: Sequence[Rate]
) -> Schedule:
    """Schedule under a half-duplex relay listening a ``delta`` fraction of
    the time: the first Q*delta of Q slots listen, the rest transmit."""
    delta = Fraction(delta)
    mode = HalfDuplex(delta)
    fracs = [Fraction(r) for r in rates]
    membership = in_det_cutset(net, fracs, mode)
    if not membership.member:
        raise NotInRegionError(membership)
    q = math.lcm(delta.denominator, *(f.denominator for f in fracs))
    listen = int(delta * q)
    transmit = q - listen
    # Q uses of the half-duplex network concatenate into one full-duplex use
    # with uplink gains scaled by the listen count and downlink gains by the
    # transmit count.
    combined = DetNetwork(
        tuple(n * listen for n in net.n_ar),
        tuple(n * listen for n in net.n_br),
        tuple(n * transmit for n in net.n_ra),
        tuple(n * transmit for n in net.n_rb),
    )
    steps = _run_induction(combined, [int(f * q) for f in fracs])
    assignments = []
    for s, l_u, l_d in _replay(steps):
        up_slot, up_level = _interleaved(l_u, listen)
        down_slot, down_level = _interleaved(l_d, transmit)
        assignments.append(
            LevelAssignment(
                s.pair, s.kind, s.side, up_slot, up_level, listen + down_slot, down_level
            )
        )
    return Schedule(net=net, slots=q, assignments=tuple(assignments), listen_slots=listen)


# --- chunked variant -------------------------------------------------------


@dataclass
class _Chunk:
    pair: int
    kind: str
    side: str | None
    size: int
    cap_up: int
    cap_down: int
    up_levels: list[int] = field(default_factory=list)
    down_levels: list[int] = field(default_factory=list)


def chunk_schedule(net: DetNetwork, rates: Sequence[Rate]) -> Schedule:
    """Schedule with per-(pair, kind) levels in one contiguous run.

    Builds one XOR chunk of size min(R_A, R_B) and one SOLO chunk of size
    |R_A - R_B| per pair and packs chunks bottom-up in order of their
    reachability cap (earliest deadline first).  Dense stacking keeps every
    chunk contiguous, and the cut-set bounds imply the deadline condition,
    so the packing succeeds exactly on in-region tuples.
    """
    ints = _integral_rates(rates)
    membership = in_det_cutset(net, ints, FULL_DUPLEX)
    if not membership.member:
        raise NotInRegionError(membership)

    chunks: list[_Chunk] = []
    for i in range(net.pairs):
        ra, rb = ints[2 * i], ints[2 * i + 1]
        both = min(ra, rb)
        if both:
            chunks.append(
                _Chunk(
                    i, XOR, None, both,
                    min(net.n_ar[i], net.n_br[i]),
                    min(net.n_ra[i], net.n_rb[i]),
                )
            )
        if ra != rb:
            src = "A" if ra > rb else "B"
            dst = "B" if src == "A" else "A"
            chunks.append(
                _Chunk(
                    i, SOLO, src, abs(ra - rb),
                    net.uplink_gain(i, src),
                    net.downlink_gain(i, dst),
                )
            )

    for direction in ("up", "down"):
        key = (lambda c: (c.cap_up, c.pair, c.kind)) if direction == "up" else (
            lambda c: (c.cap_down, c.pair, c.kind)
        )
        next_free = 1
        for chunk in sorted(chunks, key=key):
            levels = list(range(next_free, next_free + chunk.size))
            next_free += chunk.size
            cap = chunk.cap_up if direction == "up" else chunk.cap_down
            if levels and levels[-1] > cap:
                raise InductionInvariantError(
                    f"chunk packing ran past its reachability cap ({direction}link "
                    f"pair {chunk.pair} {chunk.kind}: need level {levels[-1]}, cap {cap}); "
                    f"in-region tuples cannot do this"
                )
            if direction == "up":
                chunk.up_levels = levels
            else:
                chunk.down_levels = levels

    assignments = []
    for chunk in chunks:
        for l_u, l_d in zip(chunk.up_levels, chunk.down_levels):
            assignments.append(
                LevelAssignment(chunk.pair, chunk.kind, chunk.side, 0, l_u, 0, l_d)
            )
    return Schedule(net=net, slots=1, assignments=tuple(assignments))


# --- simulation ------------------------------------------------------------


def validate_schedule(sched: Schedule) -> None:
    """Check level bounds per assignment and per-slot orthogonality."""
    net = sched.net
    used_up: set[tuple[int, int]] = set()
    used_down: set[tuple[int, int]] = set()
    for a in sched.assignments:
        if not 0 <= a.pair < net.pairs:
            raise ScheduleInvalidError(f"assignment names pair {a.pair} of {net.pairs}")
        if a.uplink_slot < 0 or a.uplink_slot >= sched.slots:
            raise ScheduleInvalidError(f"uplink slot {a.uplink_slot} outside 0..{sched.slots - 1}")
        if a.downlink_slot < 0 or a.downlink_slot >= sched.slots:
            raise ScheduleInvalidError(f"downlink slot {a.downlink_slot} out of range")
        if sched.listen_slots is not None:
            if a.uplink_slot >= sched.listen_slots:
                raise ScheduleInvalidError("uplink use scheduled in a transmit slot")
            if a.downlink_slot < sched.listen_slots:
                raise ScheduleInvalidError("downlink use scheduled in a listen slot")
        if a.kind == XOR:
            up_cap = min(net.n_ar[a.pair], net.n_br[a.pair])
            down_cap = min(net.n_ra[a.pair], net.n_rb[a.pair])
        else:
            dst = "B" if a.side == "A" else "A"
            up_cap = net.uplink_gain(a.pair, a.side)
            down_cap = net.downlink_gain(a.pair, dst)
        if not 1 <= a.uplink_level <= up_cap:
            raise ScheduleInvalidError(
                f"uplink level {a.uplink_level} unreachable for {a.kind} of pair "
                f"{a.pair} (cap {up_cap})"
            )
        if not 1 <= a.downlink_level <= down_cap:
            raise ScheduleInvalidError(
                f"downlink level {a.downlink_level} unreachable for {a.kind} of pair "
                f"{a.pair} (cap {down_cap})"
            )
        up_key = (a.uplink_slot, a.uplink_level)
        down_key = (a.downlink_slot, a.downlink_level)
        if up_key in used_up:
            raise ScheduleInvalidError(f"uplink level reused in one slot: {up_key}")
        if down_key in used_down:
            raise ScheduleInvalidError(f"downlink level reused in one slot: {down_key}")
        used_up.add(up_key)
        used_down.add(down_key)


@dataclass(frozen=True)
class SimulationResult:
    ok: bool
    decoded: dict[NodeId, tuple[int, ...]]


def _ordered(assignments: Sequence[LevelAssignment]) -> list[LevelAssignment]:
    # Message bits are consumed listen-slot by listen-slot, most significant
    # relay level first, on both the encode and decode side.
    return sorted(assignments, key=lambda a: (a.uplink_slot, -a.uplink_level))


def simulate_schedule(
    sched: Schedule, messages: Mapping[NodeId, Sequence[int]]
) -> SimulationResult:
    """Push message bits through the deterministic channel end to end.

    Transmit frames are built from the schedule, the relay receive/permute/
    forward chain runs through the channel-model primitives, every node
    decodes from what it actually hears (XOR entries combined with the
    node's own transmitted bit, SOLO entries read directly), and the
    verdict compares decoded messages with the inputs.
    """
    validate_schedule(sched)
    net = sched.net
    budgets = sched.bit_budgets()
    msgs: dict[NodeId, tuple[int, ...]] = {}
    for node, need in budgets.items():
        got = tuple(int(b) for b in messages.get(node, ()))
        if any(b not in (0, 1) for b in got):
            raise ValueError(f"message for {node} must be bits")
        if len(got) != need:
            raise ShapeError(f"message for {node} has {len(got)} bits, schedule carries {need}")
        msgs[node] = got

    order = _ordered(sched.assignments)
    cursor: Counter = Counter()
    sent: dict[LevelAssignment, dict[str, int]] = {}
    for a in order:
        if a.kind == XOR:
            sent[a] = {
                "A": msgs[(a.pair, "A")][cursor[(a.pair, "A")]],
                "B": msgs[(a.pair, "B")][cursor[(a.pair, "B")]],
            }
            cursor[(a.pair, "A")] += 1
            cursor[(a.pair, "B")] += 1
        else:
            sent[a] = {a.side: msgs[(a.pair, a.side)][cursor[(a.pair, a.side)]]}
            cursor[(a.pair, a.side)] += 1

    # Uplink phase: per listen slot, build node frames and receive at relay.
    q_up, q_down = net.q_up, net.q_down
    by_up_slot: dict[int, list[LevelAssignment]] = defaultdict(list)
    for a in sched.assignments:
        by_up_slot[a.uplink_slot].append(a)
    relay_bits: dict[LevelAssignment, int] = {}
    for slot, members in sorted(by_up_slot.items()):
        tx: dict[NodeId, list[int]] = defaultdict(lambda: [0] * q_up)
        for a in members:
            for side, bit in sent[a].items():
                gain = net.uplink_gain(a.pair, side)
                # relay level l (bottom-up) sits at the node's own top-down
                # frame index gain - l
                tx[(a.pair, side)][gain - a.uplink_level] = bit
        frames = {node: LevelVector(tuple(bits)) for node, bits in tx.items()}
        received = relay_uplink_receive(net, frames)
        for a in members:
            relay_bits[a] = received.bits[q_up - a.uplink_level]

    # Downlink phase: per transmit slot, relay broadcasts the permuted bits
    # and every destination decodes from its own observation.
    by_down_slot: dict[int, list[LevelAssignment]] = defaultdict(list)
    for a in sched.assignments:
        by_down_slot[a.downlink_slot].append(a)
    decoded_bits: dict[LevelAssignment, dict[str, int]] = {}
    for slot, members in sorted(by_down_slot.items()):
        frame = [0] * q_down
        for a in members:
            frame[a.downlink_level - 1] = relay_bits[a]
        relay_frame = LevelVector(tuple(frame))
        for a in members:
            targets = ("A", "B") if a.kind == XOR else (("B",) if a.side == "A" else ("A",))
            decoded_bits[a] = {}
            for dst in targets:
                gain = net.downlink_gain(a.pair, dst)
                observed = node_downlink_receive(net, relay_frame, a.pair, dst)
                bit = observed.bits[q_down - gain + a.downlink_level - 1]
                if a.kind == XOR:
                    bit ^= sent[a][dst]  # own bit cancels out of the XOR
                decoded_bits[a][dst] = bit

    # Reassemble directed messages in the same consumption order.
    out: dict[NodeId, list[int]] = {node: [] for node in budgets}
    for a in order:
        if a.kind == XOR:
            out[(a.pair, "A")].append(decoded_bits[a]["B"])  # B heard A's bit
            out[(a.pair, "B")].append(decoded_bits[a]["A"])
        else:
            dst = "B" if a.side == "A" else "A"
            out[(a.pair, a.side)].append(decoded_bits[a][dst])

    decoded = {node: tuple(bits) for node, bits in out.items()}
    ok = all(decoded[node] == msgs[node] for node in budgets)
    return SimulationResult(ok=ok, decoded=decoded)


def random_messages(sched: Schedule, rng) -> dict[NodeId, tuple[int, ...]]:
    """Random payload matching the schedule's bit budgets."""
    return {
        node: tuple(int(b) for b in rng.integers(0, 2, size=need))
        for node, need in sched.bit_budgets().items()
    }
