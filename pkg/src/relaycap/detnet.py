"""Linear shift deterministic channel model over GF(2).

Every node transmits a length-q binary frame per channel use (most
significant level first).  A link of gain n delivers the transmitter's n
most significant levels to the bottom n levels of the receiver's frame,
and simultaneous arrivals on a level add bit-wise mod 2.  Zero-gain links
are legal and simply contribute nothing.

Level-index conventions, used consistently by the scheduler and the
simulator:

* Uplink relay levels are counted bottom-up: level 1 is the least
  significant received level.  A node with uplink gain n reaches relay
  levels 1..n and its most significant transmitted bit lands on level n,
  so the highest level shared by both users of pair i is
  ``min(n_ar[i], n_br[i])``.
* Downlink relay levels are counted top-down: level 1 is the relay's most
  significant transmitted level.  A node with downlink gain n hears relay
  levels 1..n, so the lowest level shared by both users of pair i is
  ``min(n_ra[i], n_rb[i])``.

All values here are immutable; every operation is a pure function.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Side = str  # "A" or "B"
NodeId = tuple[int, Side]  # (pair index, side)

SIDES = ("A", "B")


class InvalidGainError(ValueError):
    """A channel gain is negative or exceeds the frame length."""


class ShapeError(ValueError):
    """A frame has the wrong length for the direction it is used in."""


@dataclass(frozen=True)
class LevelVector:
    """A binary frame, most significant level first."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"frame bits must be 0/1, got {self.bits}")

    def __len__(self) -> int:
        return len(self.bits)

    def __xor__(self, other: "LevelVector") -> "LevelVector":
        if len(other) != len(self):
            raise ShapeError(f"cannot xor frames of lengths {len(self)} and {len(other)}")
        return LevelVector(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    @staticmethod
    def zeros(q: int) -> "LevelVector":
        return LevelVector((0,) * q)


@dataclass(frozen=True)
class FullDuplex:
    """Relay listens and transmits in every channel use."""


@dataclass(frozen=True)
class HalfDuplex:
    """Relay listens a fixed rational fraction ``delta`` of the time."""

    delta: Fraction

    def __post_init__(self) -> None:
        delta = Fraction(self.delta)
        object.__setattr__(self, "delta", delta)
        if not 0 < delta < 1:
            raise ValueError(f"listen fraction must lie strictly in (0,1), got {delta}")


DuplexMode = Union[FullDuplex, HalfDuplex]

FULL_DUPLEX = FullDuplex()


@dataclass(frozen=True)
class DetNetwork:
    """Integer channel gains of an M-pair bidirectional relay network.

    ``n_ar[i]``/``n_br[i]`` are the uplink gains of A_i/B_i towards the
    relay; ``n_ra[i]``/``n_rb[i]`` are the downlink gains from the relay
    towards A_i/B_i.
    """

    n_ar: tuple[int, ...]
    n_br: tuple[int, ...]
    n_ra: tuple[int, ...]
    n_rb: tuple[int, ...]

    def __post_init__(self) -> None:
        m = len(self.n_ar)
        if m < 1:
            raise ValueError("network needs at least one pair")
        if any(len(getattr(self, name)) != m for name in ("n_br", "n_ra", "n_rb")):
            raise ValueError("gain arrays must all have one entry per pair")
        for name in ("n_ar", "n_br", "n_ra", "n_rb"):
            raw = tuple(getattr(self, name))
            try:
                vals = tuple(operator.index(v) for v in raw)
            except TypeError as exc:
                raise InvalidGainError(f"{name} must be integers, got {raw}") from exc
            if any(isinstance(v, bool) for v in raw) or any(v < 0 for v in vals):
                raise InvalidGainError(f"{name} must be non-negative integers, got {raw}")
            object.__setattr__(self, name, vals)

    @property
    def pairs(self) -> int:
        return len(self.n_ar)

    @property
    def q_up(self) -> int:
        """Uplink frame length: the largest uplink gain (0 when all are 0)."""
        return max((*self.n_ar, *self.n_br), default=0)

    @property
    def q_down(self) -> int:
        return max((*self.n_ra, *self.n_rb), default=0)

    @property
    def q(self) -> int:
        """The single frame length of the channel law (max over all gains)."""
        return max(self.q_up, self.q_down)

    def uplink_gain(self, pair: int, side: Side) -> int:
        self._check_node(pair, side)
        return self.n_ar[pair] if side == "A" else self.n_br[pair]

    def downlink_gain(self, pair: int, side: Side) -> int:
        """Gain of the relay-to-node link, i.e. how much of the relay frame the node hears."""
        self._check_node(pair, side)
        return self.n_ra[pair] if side == "A" else self.n_rb[pair]

    def nodes(self) -> Iterable[NodeId]:
        for i in range(self.pairs):
            for side in SIDES:
                yield (i, side)

    def _check_node(self, pair: int, side: Side) -> None:
        if not 0 <= pair < self.pairs or side not in SIDES:
            raise LookupError(f"no node ({pair}, {side!r}) in an {self.pairs}-pair network")


def shifted_contribution(x: LevelVector, gain: int) -> LevelVector:
    """What a receiver sees from one transmitter: the top ``gain`` levels of
    ``x`` shifted to the bottom of the frame, zeros above."""
    q = len(x)
    if not 0 <= gain <= q:
        raise InvalidGainError(f"gain {gain} outside [0, {q}]")
    shift = q - gain
    return LevelVector((0,) * shift + x.bits[:gain])


def relay_uplink_receive(net: DetNetwork, frames: Mapping[NodeId, LevelVector]) -> LevelVector:
    """Relay frame received in one use: mod-2 sum of every node's shifted
    contribution.  Nodes absent from ``frames`` are silent."""
    q = net.q_up
    acc = LevelVector.zeros(q)
    for (pair, side), frame in frames.items():
        gain = net.uplink_gain(pair, side)
        if len(frame) != q:
            raise ShapeError(f"frame of node ({pair},{side}) has length {len(frame)}, expected {q}")
        acc = acc ^ shifted_contribution(frame, gain)
    return acc


def node_downlink_receive(
    net: DetNetwork, relay_frame: LevelVector, pair: int, side: Side
) -> LevelVector:
    """What node (pair, side) hears when the relay broadcasts ``relay_frame``."""
    if len(relay_frame) != net.q_down:
        raise ShapeError(
            f"relay frame has length {len(relay_frame)}, expected {net.q_down}"
        )
    return shifted_contribution(relay_frame, net.downlink_gain(pair, side))
