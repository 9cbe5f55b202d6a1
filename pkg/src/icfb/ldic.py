"""Closed-form capacity polytope of the linear deterministic IC with
intermittent feedback, as a function of the gain profile and the feedback
delivery probabilities (p1, p2).

Rates are in bits per channel use with the gains acting directly as bit
counts (no normalization by q).  min{.,.} bounds are emitted as row pairs so
the stored half-planes mirror the printed constraint set.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .channels import ChannelError, LdicParams
from .regions import RateRegion


def _pos(x: int) -> int:
    return max(x, 0)


def capacity_region(p: LdicParams, p1: float, p2: float) -> RateRegion:
    """Capacity polytope for gain profile ``p`` and feedback marginals."""
    if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
        raise ChannelError("feedback probabilities must lie in [0, 1]")
    n11, n12, n21, n22 = p.n11, p.n12, p.n21, p.n22

    r1_caps = (
        max(n11, n12),
        n11 + p2 * _pos(n21 - n11),
    )
    r2_caps = (
        max(n22, n21),
        n22 + p1 * _pos(n12 - n22),
    )
    sum_caps = (
        max(n11, n12) + _pos(n22 - n12),
        max(n22, n21) + _pos(n11 - n21),
        max(n12, _pos(n11 - n21))
        + max(n21, _pos(n22 - n12))
        + p1 * min(n12, _pos(n11 - n21))
        + p2 * min(n21, _pos(n22 - n12)),
    )
    two_r1_r2 = (
        max(n11, n12)
        + max(n21, _pos(n22 - n12))
        + _pos(n11 - n21)
        + p2 * min(n21, _pos(n22 - n12))
    )
    r1_two_r2 = (
        max(n22, n21)
        + max(n12, _pos(n11 - n21))
        + _pos(n22 - n12)
        + p1 * min(n12, _pos(n11 - n21))
    )

    rows: list[tuple[Fraction, Fraction, float]] = []
    rows += [(Fraction(1), Fraction(0), float(c)) for c in r1_caps]
    rows += [(Fraction(0), Fraction(1), float(c)) for c in r2_caps]
    rows += [(Fraction(1), Fraction(1), float(c)) for c in sum_caps]
    rows.append((Fraction(2), Fraction(1), float(two_r1_r2)))
    rows.append((Fraction(1), Fraction(2), float(r1_two_r2)))
    return RateRegion.from_halfplanes(rows)


def capacity_sweep(
    p: LdicParams,
    grid: Iterable[tuple[float, float]],
) -> list[dict]:
    """One capacity evaluation per (p1, p2) grid point, sorted lexicographically.

    Each row carries the grid point, the sum-rate with its argmax vertex, and
    the full vertex list of the polytope.
    """
    points = sorted(set((float(a), float(b)) for a, b in grid))
    if not points:
        raise ChannelError("sweep grid must be nonempty")
    out = []
    for p1, p2 in points:
        region = capacity_region(p, p1, p2)
        sumrate, argmax = region.max_weighted(1.0, 1.0)
        out.append(
            {
                "p1": p1,
                "p2": p2,
                "sumrate": sumrate,
                "argmax": argmax,
                "vertices": region.vertices(),
                "region": region,
            }
        )
    return out


def uniform_grid(step: float) -> list[tuple[float, float]]:
    """Square (p1, p2) grid over [0, 1] with the given step, endpoints included."""
    if not 0 < step <= 1:
        raise ChannelError("sweep step must lie in (0, 1]")
    n = int(round(1.0 / step))
    vals = [min(i * step, 1.0) for i in range(n + 1)]
    if vals[-1] < 1.0:
        vals.append(1.0)
    return [(a, b) for a in vals for b in vals]
