"""Cut-set bounds, region membership and brute-force region enumeration.

All arithmetic on this side of the package is exact: integer gains,
integer or `Fraction` rates, `Fraction` listen fractions.  Floats are
deliberately kept out so that boundary tuples classify deterministically.

A cut picks a nonempty subset U of pairs and an orientation bit per
member: orientation 1 puts A_i on the transmitting side of the cut
(counting R_{A_i}), orientation 0 picks B_i.  The bound is

    sum over U of the oriented rates
      <= min( max over U of the oriented uplink gains,
              max over U of the oriented downlink gains )

with the uplink term scaled by delta and the downlink term by (1 - delta)
when the relay is half-duplex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .detnet import FULL_DUPLEX, DetNetwork, DuplexMode, FullDuplex, HalfDuplex

Rate = Union[int, Fraction]
RateTuple = tuple[Rate, ...]


class RegionSizeError(RuntimeError):
    """The enumeration box exceeds the configured cell budget."""


@dataclass(frozen=True)
class Cut:
    members: tuple[int, ...]  # sorted pair indices, nonempty
    orientation: tuple[int, ...]  # one bit per member, 1 = A side transmits

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("a cut needs a nonempty pair subset")
        if tuple(sorted(set(self.members))) != self.members:
            raise ValueError("cut members must be sorted and unique")
        if len(self.orientation) != len(self.members):
            raise ValueError("one orientation bit per member required")
        if any(b not in (0, 1) for b in self.orientation):
            raise ValueError("orientation bits must be 0/1")

    def describe(self) -> str:
        parts = [f"{'A' if b else 'B'}{i + 1}" for i, b in zip(self.members, self.orientation)]
        return "{" + ",".join(parts) + "}->relay"


@dataclass(frozen=True)
class CutViolation:
    cut: Cut
    rate_sum: Fraction
    bound: Fraction


@dataclass(frozen=True)
class Membership:
    member: bool
    violations: tuple[CutViolation, ...]

    def __bool__(self) -> bool:
        return self.member


@lru_cache(maxsize=None)
def enumerate_cuts(pairs: int) -> tuple[Cut, ...]:
    """All cuts of an M-pair network: sum over k of C(M,k) * 2^k of them."""
    if pairs < 1:
        raise ValueError("need at least one pair")
    cuts = []
    for k in range(1, pairs + 1):
        for members in itertools.combinations(range(pairs), k):
            for orientation in itertools.product((1, 0), repeat=k):
                cuts.append(Cut(members, orientation))
    return tuple(cuts)


def _cut_gains(net: DetNetwork, cut: Cut) -> tuple[int, int]:
    up = max(
        net.n_ar[i] if b else net.n_br[i] for i, b in zip(cut.members, cut.orientation)
    )
    down = max(
        net.n_rb[i] if b else net.n_ra[i] for i, b in zip(cut.members, cut.orientation)
    )
    return up, down


def det_cut_bound(net: DetNetwork, cut: Cut, mode: DuplexMode = FULL_DUPLEX) -> Fraction:
    """Exact value of one cut's rate-sum bound."""
    up, down = _cut_gains(net, cut)
    if isinstance(mode, HalfDuplex):
        return min(mode.delta * up, (1 - mode.delta) * down)
    return Fraction(min(up, down))


def _check_rates(net: DetNetwork, rates: Sequence[Rate]) -> tuple[Fraction, ...]:
    if len(rates) != 2 * net.pairs:
        raise ValueError(f"expected {2 * net.pairs} rate components, got {len(rates)}")
    out = tuple(Fraction(r) for r in rates)
    if any(r < 0 for r in out):
        raise ValueError(f"rates must be non-negative, got {rates}")
    return out


def in_det_cutset(
    net: DetNetwork, rates: Sequence[Rate], mode: DuplexMode = FULL_DUPLEX
) -> Membership:
    """Membership test; on failure reports every violated cut."""
    rs = _check_rates(net, rates)
    violations = []
    for cut in enumerate_cuts(net.pairs):
        lhs = sum(rs[2 * i] if b else rs[2 * i + 1] for i, b in zip(cut.members, cut.orientation))
        bound = det_cut_bound(net, cut, mode)
        if lhs > bound:
            violations.append(CutViolation(cut, Fraction(lhs), bound))
    return Membership(not violations, tuple(violations))


def directed_rate_caps(net: DetNetwork, mode: DuplexMode = FULL_DUPLEX) -> tuple[int, ...]:
    """Largest integral value of each directed rate alone (the singleton cuts)."""
    caps = []
    for i in range(net.pairs):
        for bit in (1, 0):
            bound = det_cut_bound(net, Cut((i,), (bit,)), mode)
            caps.append(int(bound))  # floor: Fraction.__int__ truncates non-negatives
    return tuple(caps)


def enumerate_integral_region(
    net: DetNetwork,
    mode: DuplexMode = FULL_DUPLEX,
    cell_budget: int = 5_000_000,
) -> list[tuple[int, ...]]:
    """Every integral rate tuple inside the cut-set region, in lexicographic
    order.  Brute force over the box of per-direction caps; intended as the
    oracle for desk-scale networks."""
    caps = directed_rate_caps(net, mode)
    cells = 1
    for c in caps:
        cells *= c + 1
    if cells > cell_budget:
        raise RegionSizeError(f"enumeration box has {cells} cells, budget is {cell_budget}")

    dims = tuple(c + 1 for c in caps)
    # row-major unravel keeps the columns in lexicographic order
    points = np.stack(np.unravel_index(np.arange(cells, dtype=np.int64), dims))

    if isinstance(mode, HalfDuplex):
        # delta = num/den: compare den*lhs <= min(num*up, (den-num)*down)
        num, den = mode.delta.numerator, mode.delta.denominator
        up_scale, down_scale = num, den - num
    else:
        num = den = 1
        up_scale = down_scale = 1

    mask = np.ones(points.shape[1], dtype=bool)
    for cut in enumerate_cuts(net.pairs):
        idx = [2 * i if b else 2 * i + 1 for i, b in zip(cut.members, cut.orientation)]
        lhs = points[idx].sum(axis=0)
        up, down = _cut_gains(net, cut)
        bound = min(up_scale * up, down_scale * down)
        mask &= den * lhs <= bound
    region = points[:, mask].T
    return [tuple(int(v) for v in row) for row in region]
