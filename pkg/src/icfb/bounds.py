"""Rate-region bound evaluators.

* Theorem-1 path: compose the chained input factorization with a generic
  IC-GF channel law, evaluate the fourteen mutual-information constants, emit
  the ten-inequality system over (R1, R2, R10, R20), and project.
* Raw-constraint path: the block-Markov scheme's encoding/decoding constraint
  system over (R1, R2, R10, R20, Rhat1, Rhat2); its projection must coincide
  with the Theorem-1 projection (a standing cross-check).
* Theorem-2 path: deterministic channel with intermittent feedback; constants
  are plain conditional entropies of the state-thinned interference joint.
* Search drivers: union of per-distribution regions over grid / random
  families, with witness distributions for the frontier vertices.

min{.,.} bounds are always emitted as row pairs so elimination sees the full
system.  Side constraints R10 <= R1 and R20 <= R2 follow from the rate split
R_k = R_k0 + R_kk with nonnegative private rate; they are flag-controlled so
the unconstrained variant can be compared.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .channels import FeedbackStateSpec, IcGfChannel, InjectiveDetIc, injectivity_check
from .probability import (
    JointPmf,
    Kernel,
    PmfError,
    entropy,
    extend,
    mutual_information,
)
from .regions import LinearRateSystem, RateRegion, project_to_rate_plane

#: Boundedness margin on the implicit per-rate caps.
CAP_MARGIN = 0.25


class BoundsError(ValueError):
    """Incompatible distribution/channel data."""


def _rate_caps(nx1: int, nx2: int) -> tuple[float, float]:
    return (math.log2(nx1) * (1 + CAP_MARGIN) + 1e-9, math.log2(nx2) * (1 + CAP_MARGIN) + 1e-9)


# ---------------------------------------------------------------------------
# Generalized feedback (Theorem-1) machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GfInputDistribution:
    """Free factors of the inner-bound factorization.

    ``u1x1`` has shape (|Q|,|U1|,|X1|): the joint conditional P(u1,x1|q);
    ``v1`` has shape (|Q|,|U1|,|Y1|,|V1|): the compression test channel
    P(v1|u1,y1,q).  Mirrored arrays for user 2.
    """

    q_pmf: np.ndarray
    u1x1: np.ndarray
    u2x2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q_pmf, dtype=float)
        if q.ndim != 1 or np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
            raise BoundsError("q_pmf must be a pmf vector")
        for name, ndim, sum_axes in (
            ("u1x1", 3, (1, 2)),
            ("u2x2", 3, (1, 2)),
            ("v1", 4, (3,)),
            ("v2", 4, (3,)),
        ):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != ndim or arr.shape[0] != q.shape[0]:
                raise BoundsError(f"{name} must have {ndim} axes with |Q| rows")
            sums = arr.sum(axis=sum_axes)
            if np.any(np.abs(sums - 1.0) > 1e-9) or np.any(arr < 0):
                raise BoundsError(f"{name} rows must be pmfs")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        q = q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "q_pmf", q)

    @property
    def nq(self) -> int:
        return self.q_pmf.shape[0]


def gf_joint(d: GfInputDistribution, ch: IcGfChannel) -> JointPmf:
    """Full joint over (Q, U1, X1, U2, X2, Y1..Y4, V1, V2)."""
    nq, nu1, nx1 = d.u1x1.shape
    _, nu2, nx2 = d.u2x2.shape
    if (nx1, nx2) != (ch.nx1, ch.nx2):
        raise BoundsError("input alphabet mismatch between distribution and channel")
    ny1, ny2, _, _ = ch.output_sizes
    if d.v1.shape[1] != nu1 or d.v1.shape[2] != ny1:
        raise BoundsError("v1 factor shape incompatible with (U1, Y1)")
    if d.v2.shape[1] != nu2 or d.v2.shape[2] != ny2:
        raise BoundsError("v2 factor shape incompatible with (U2, Y2)")
    joint = JointPmf.single("Q", d.q_pmf)
    joint = extend(joint, Kernel(inputs=("Q",), outputs=(("U1", nu1), ("X1", nx1)), weights=d.u1x1))
    joint = extend(joint, Kernel(inputs=("Q",), outputs=(("U2", nu2), ("X2", nx2)), weights=d.u2x2))
    joint = extend(joint, ch.kernel())
    joint = extend(
        joint,
        Kernel(inputs=("Q", "U1", "Y1"), outputs=(("V1", d.v1.shape[3]),), weights=d.v1),
    )
    joint = extend(
        joint,
        Kernel(inputs=("Q", "U2", "Y2"), outputs=(("V2", d.v2.shape[3]),), weights=d.v2),
    )
    return joint


@dataclass(frozen=True)
class Theorem1Constants:
    """The fourteen mutual-information constants of the ten-inequality system."""

    a1: float
    b1: float
    c1: float
    d1: float
    e1: float
    f1: float
    g1: float
    a2: float
    b2: float
    c2: float
    d2: float
    e2: float
    f2: float
    g2: float

    def __post_init__(self) -> None:
        for name in ("a1", "b1", "c1", "d1", "e1", "f1", "g1",
                     "a2", "b2", "c2", "d2", "e2", "f2", "g2"):
            v = float(getattr(self, name))
            if v < -1e-9 or not math.isfinite(v):
                raise BoundsError(f"constant {name}={v} invalid")
            object.__setattr__(self, name, max(v, 0.0))


def theorem1_constants(d: GfInputDistribution, ch: IcGfChannel) -> Theorem1Constants:
    joint = gf_joint(d, ch)
    q = ("Q",)

    def user(own_u, own_v, own_x, own_y, own_fb, oth_u, oth_v):
        a = mutual_information(joint, (own_u, own_v, own_x), (own_y, oth_u, oth_v), q)
        b = mutual_information(joint, (own_u, own_v, oth_u, oth_v, own_x), (own_y,), q)
        c = mutual_information(joint, (oth_u, oth_v), (own_u, own_v, own_x), q)
        dd = mutual_information(joint, (oth_u, oth_v, own_x), (own_y,), (own_u, own_v) + q)
        e = mutual_information(joint, (own_u, own_v, own_x), (own_y,), (oth_u, oth_v) + q)
        f = mutual_information(joint, (own_x,), (own_y,), (own_u, own_v, oth_u, oth_v) + q)
        g = mutual_information(joint, (own_v,), (own_fb,), (own_u,) + q)
        return a, b, c, dd, e, f, g

    a1, b1, c1, d1, e1, f1, g1 = user("U1", "V1", "X1", "Y3", "Y1", "U2", "V2")
    a2, b2, c2, d2, e2, f2, g2 = user("U2", "V2", "X2", "Y4", "Y2", "U1", "V1")
    return Theorem1Constants(a1, b1, c1, d1, e1, f1, g1, a2, b2, c2, d2, e2, f2, g2)


_T1_VARS = ("R1", "R2", "R10", "R20")


def _row(vals: dict[str, int | Fraction], variables: Sequence[str], const: float):
    return (tuple(Fraction(vals.get(v, 0)) for v in variables), float(const))


def theorem1_system(c: Theorem1Constants, split_caps: bool = True) -> LinearRateSystem:
    """Ten-inequality system over (R1, R2, R10, R20), mins as row pairs."""
    V = _T1_VARS
    rows = [
        _row({"R1": 1}, V, c.a1 - c.g1),
        _row({"R1": 1, "R20": 1}, V, c.b1 + c.c1 - c.g1 - c.g2),
        _row({"R1": 1, "R10": -1, "R20": 1}, V, c.b1 - c.g1 + c.c1 - c.g2),
        _row({"R1": 1, "R10": -1, "R20": 1}, V, c.d1 + c.c1 - c.g2),
        _row({"R1": 1, "R10": -1}, V, c.e1 + c.c1 - c.g1 - c.g2),
        _row({"R1": 1, "R10": -1}, V, c.d1 + c.c1 - c.g1 - c.g2),
        _row({"R1": 1, "R10": -1}, V, c.f1 + c.c1),
        _row({"R2": 1}, V, c.a2 - c.g2),
        _row({"R2": 1, "R10": 1}, V, c.b2 + c.c2 - c.g1 - c.g2),
        _row({"R2": 1, "R20": -1, "R10": 1}, V, c.b2 - c.g2 + c.c2 - c.g1),
        _row({"R2": 1, "R20": -1, "R10": 1}, V, c.d2 + c.c2 - c.g1),
        _row({"R2": 1, "R20": -1}, V, c.e2 + c.c2 - c.g1 - c.g2),
        _row({"R2": 1, "R20": -1}, V, c.d2 + c.c2 - c.g1 - c.g2),
        _row({"R2": 1, "R20": -1}, V, c.f2 + c.c2),
        _row({"R10": -1}, V, 0.0),
        _row({"R20": -1}, V, 0.0),
    ]
    if split_caps:
        rows.append(_row({"R10": 1, "R1": -1}, V, 0.0))
        rows.append(_row({"R20": 1, "R2": -1}, V, 0.0))
    return LinearRateSystem(variables=V, rows=tuple(rows))


_SCHEME_VARS = ("R1", "R2", "R10", "R20", "Rhat1", "Rhat2")


def schemeV_system(c: Theorem1Constants) -> LinearRateSystem:
    """Raw encoding/decoding constraints of the block-Markov scheme.

    Variables are (R1, R2, R10, R20, Rhat1, Rhat2) with the private rates
    substituted out via R_kk = R_k - R_k0.  Strict encoding inequalities are
    kept as closures (Rhat_k >= compression cost).
    """
    V = _SCHEME_VARS
    rows = [
        # compression covering costs
        _row({"Rhat1": -1}, V, -c.g1),
        _row({"Rhat2": -1}, V, -c.g2),
        # decoder 1, message-rate group
        _row({"R1": 1, "Rhat1": 1}, V, c.a1),
        _row({"R1": 1, "Rhat1": 1, "Rhat2": 1}, V, c.b1 + c.c1),
        _row({"R1": 1, "R20": 1, "Rhat1": 1, "Rhat2": 1}, V, c.b1 + c.c1),
        # decoder 1, private-rate group
        _row({"R1": 1, "R10": -1}, V, c.f1 + c.c1),
        _row({"R1": 1, "R10": -1, "R20": 1, "Rhat2": 1}, V, c.d1 + c.c1),
        _row({"R1": 1, "R10": -1, "Rhat1": 1, "Rhat2": 1}, V, c.e1 + c.c1),
        _row({"R1": 1, "R10": -1, "Rhat1": 1, "Rhat2": 1}, V, c.d1 + c.c1),
        _row({"R1": 1, "R10": -1, "R20": 1, "Rhat1": 1, "Rhat2": 1}, V, c.b1 + c.c1),
        # decoder 2, mirrored
        _row({"R2": 1, "Rhat2": 1}, V, c.a2),
        _row({"R2": 1, "Rhat1": 1, "Rhat2": 1}, V, c.b2 + c.c2),
        _row({"R2": 1, "R10": 1, "Rhat1": 1, "Rhat2": 1}, V, c.b2 + c.c2),
        _row({"R2": 1, "R20": -1}, V, c.f2 + c.c2),
        _row({"R2": 1, "R20": -1, "R10": 1, "Rhat1": 1}, V, c.d2 + c.c2),
        _row({"R2": 1, "R20": -1, "Rhat1": 1, "Rhat2": 1}, V, c.e2 + c.c2),
        _row({"R2": 1, "R20": -1, "Rhat1": 1, "Rhat2": 1}, V, c.d2 + c.c2),
        _row({"R2": 1, "R20": -1, "R10": 1, "Rhat1": 1, "Rhat2": 1}, V, c.b2 + c.c2),
        # nonnegativity: splits, compression rates, private rates
        _row({"R10": -1}, V, 0.0),
        _row({"R20": -1}, V, 0.0),
        _row({"Rhat1": -1}, V, 0.0),
        _row({"Rhat2": -1}, V, 0.0),
        _row({"R10": 1, "R1": -1}, V, 0.0),
        _row({"R20": 1, "R2": -1}, V, 0.0),
    ]
    return LinearRateSystem(variables=V, rows=tuple(rows))


def inner_region_gf(
    d: GfInputDistribution,
    ch: IcGfChannel,
    split_caps: bool = True,
    use_scheme_system: bool = False,
) -> RateRegion:
    """Per-distribution inner-bound region (Theorem-1 or raw-scheme system)."""
    consts = theorem1_constants(d, ch)
    system = schemeV_system(consts) if use_scheme_system else theorem1_system(consts, split_caps)
    return project_to_rate_plane(system, caps=_rate_caps(ch.nx1, ch.nx2))


# ---------------------------------------------------------------------------
# Injective deterministic channel with intermittent feedback (Theorem-2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetIfInputDistribution:
    """Conditionally independent channel inputs: P(q) P(x1|q) P(x2|q)."""

    q_pmf: np.ndarray
    x1: np.ndarray  # (|Q|, |X1|)
    x2: np.ndarray  # (|Q|, |X2|)

    def __post_init__(self) -> None:
        q = np.asarray(self.q_pmf, dtype=float)
        if q.ndim != 1 or np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
            raise BoundsError("q_pmf must be a pmf vector")
        for name in ("x1", "x2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 2 or arr.shape[0] != q.shape[0]:
                raise BoundsError(f"{name} must be (|Q|, alphabet)")
            if np.any(arr < 0) or np.any(np.abs(arr.sum(axis=1) - 1.0) > 1e-9):
                raise BoundsError(f"{name} rows must be pmfs")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        q = q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "q_pmf", q)

    @property
    def nq(self) -> int:
        return self.q_pmf.shape[0]


@dataclass(frozen=True)
class Theorem2Constants:
    """Conditional entropies entering the deterministic-channel system."""

    a1: float  # H(Y3 | T2, ~T1, ~T2, Q)
    a2: float  # H(Y4 | T1, ~T1, ~T2, Q)
    b1: float  # H(~T1 | Q)
    b2: float  # H(~T2 | Q)
    c1: float  # H(Y3 | Q)
    c2: float  # H(Y4 | Q)
    d1: float  # H(Y3 | T1, ~T1, ~T2, Q)
    d2: float  # H(Y4 | T2, ~T1, ~T2, Q)
    f1: float  # H(Y3 | T1, T2, ~T1, ~T2, Q)
    f2: float  # H(Y4 | T1, T2, ~T1, ~T2, Q)


def det_if_joint(
    det: InjectiveDetIc,
    d: DetIfInputDistribution,
    fb: FeedbackStateSpec,
) -> JointPmf:
    """Joint over (Q, T1, T2, Y3, Y4, TT1, TT2); TT are the state-thinned
    interferences with the erasure letter at the top index."""
    if d.x1.shape[1] != det.nx1 or d.x2.shape[1] != det.nx2:
        raise BoundsError("input alphabet mismatch between distribution and channel")
    nq = d.nq
    shape = (nq, det.nt1, det.nt2, det.ny3, det.ny4, det.nt1 + 1, det.nt2 + 1)
    w = np.zeros(shape)
    for iq in range(nq):
        pq = d.q_pmf[iq]
        if pq == 0:
            continue
        for x1 in range(det.nx1):
            p1x = pq * d.x1[iq, x1]
            if p1x == 0:
                continue
            t1 = det.t1[x1]
            for x2 in range(det.nx2):
                p12 = p1x * d.x2[iq, x2]
                if p12 == 0:
                    continue
                t2 = det.t2[x2]
                y3 = det.f3[x1, t2]
                y4 = det.f4[x2, t1]
                for s1 in (0, 1):
                    tt2 = t2 if s1 else det.nt2
                    for s2 in (0, 1):
                        tt1 = t1 if s2 else det.nt1
                        w[iq, t1, t2, y3, y4, tt1, tt2] += p12 * fb.joint[s1, s2]
    variables = (
        ("Q", nq),
        ("T1", det.nt1),
        ("T2", det.nt2),
        ("Y3", det.ny3),
        ("Y4", det.ny4),
        ("TT1", det.nt1 + 1),
        ("TT2", det.nt2 + 1),
    )
    return JointPmf(variables=variables, weights=w)


def theorem2_constants(
    det: InjectiveDetIc,
    d: DetIfInputDistribution,
    fb: FeedbackStateSpec,
) -> Theorem2Constants:
    if not injectivity_check(det):
        raise BoundsError("channel is not injective in the interference variable")
    joint = det_if_joint(det, d, fb)
    return Theorem2Constants(
        a1=entropy(joint, "Y3", ("T2", "TT1", "TT2", "Q")),
        a2=entropy(joint, "Y4", ("T1", "TT1", "TT2", "Q")),
        b1=entropy(joint, "TT1", ("Q",)),
        b2=entropy(joint, "TT2", ("Q",)),
        c1=entropy(joint, "Y3", ("Q",)),
        c2=entropy(joint, "Y4", ("Q",)),
        d1=entropy(joint, "Y3", ("T1", "TT1", "TT2", "Q")),
        d2=entropy(joint, "Y4", ("T2", "TT1", "TT2", "Q")),
        f1=entropy(joint, "Y3", ("T1", "T2", "TT1", "TT2", "Q")),
        f2=entropy(joint, "Y4", ("T1", "T2", "TT1", "TT2", "Q")),
    )


def theorem2_system(c: Theorem2Constants, split_caps: bool = True) -> LinearRateSystem:
    """Ten entropy inequalities over (R1, R2, R10, R20), mins as row pairs."""
    V = _T1_VARS
    rows = [
        _row({"R1": 1}, V, c.a1 + c.b1),
        _row({"R1": 1, "R20": 1}, V, c.c1),
        _row({"R1": 1, "R10": -1, "R20": 1}, V, c.c1),
        _row({"R1": 1, "R10": -1, "R20": 1}, V, c.d1 + c.b2),
        _row({"R1": 1, "R10": -1}, V, c.a1),
        _row({"R1": 1, "R10": -1}, V, c.d1),
        _row({"R1": 1, "R10": -1}, V, c.f1 + c.b1 + c.b2),
        _row({"R2": 1}, V, c.a2 + c.b2),
        _row({"R2": 1, "R10": 1}, V, c.c2),
        _row({"R2": 1, "R20": -1, "R10": 1}, V, c.c2),
        _row({"R2": 1, "R20": -1, "R10": 1}, V, c.d2 + c.b1),
        _row({"R2": 1, "R20": -1}, V, c.a2),
        _row({"R2": 1, "R20": -1}, V, c.d2),
        _row({"R2": 1, "R20": -1}, V, c.f2 + c.b1 + c.b2),
        _row({"R10": -1}, V, 0.0),
        _row({"R20": -1}, V, 0.0),
    ]
    if split_caps:
        rows.append(_row({"R10": 1, "R1": -1}, V, 0.0))
        rows.append(_row({"R20": 1, "R2": -1}, V, 0.0))
    return LinearRateSystem(variables=V, rows=tuple(rows))


def inner_region_det_if(
    det: InjectiveDetIc,
    d: DetIfInputDistribution,
    fb: FeedbackStateSpec,
    split_caps: bool = True,
) -> RateRegion:
    consts = theorem2_constants(det, d, fb)
    system = theorem2_system(consts, split_caps)
    return project_to_rate_plane(system, caps=_rate_caps(det.nx1, det.nx2))


# ---------------------------------------------------------------------------
# Search over input distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Distribution-family search: grid and/or seeded random samples.

    ``family`` is one of "grid", "random", "uniform" (the single uniform-input
    distribution).  ``grid_cap`` truncates combinatorially large grids
    deterministically (lexicographic order).
    """

    family: str = "grid"
    grid_step: float = 0.25
    samples: int = 0
    seed: int = 0
    q_sizes: tuple[int, ...] = (1,)
    grid_cap: int = 4096


class EmptyFamilyError(BoundsError):
    """The configured search family contains no distributions."""


@dataclass(frozen=True)
class SearchResult:
    region: RateRegion
    witnesses: tuple[tuple[object, tuple[float, float]], ...]


def _simplex_grid(size: int, step: float) -> list[tuple[float, ...]]:
    """All pmfs on `size` letters whose entries are multiples of step."""
    n = int(round(1.0 / step))
    out = []

    def rec(prefix: list[int], remaining: int, slots: int):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], n, size)
    return [tuple(k / n for k in row) for row in out]


def det_family(
    det: InjectiveDetIc,
    config: SearchConfig,
) -> list[DetIfInputDistribution]:
    """Candidate product input distributions for the deterministic bound."""
    dists: list[DetIfInputDistribution] = []
    if config.family == "uniform":
        for nq in config.q_sizes:
            dists.append(
                DetIfInputDistribution(
                    q_pmf=np.full(nq, 1.0 / nq),
                    x1=np.full((nq, det.nx1), 1.0 / det.nx1),
                    x2=np.full((nq, det.nx2), 1.0 / det.nx2),
                )
            )
        return dists
    if config.family == "grid":
        for nq in config.q_sizes:
            q_choices = _simplex_grid(nq, config.grid_step) if nq > 1 else [(1.0,)]
            row1 = _simplex_grid(det.nx1, config.grid_step)
            row2 = _simplex_grid(det.nx2, config.grid_step)
            combos = itertools.product(
                q_choices,
                itertools.product(row1, repeat=nq),
                itertools.product(row2, repeat=nq),
            )
            for q_pmf, rows1, rows2 in itertools.islice(combos, config.grid_cap):
                dists.append(
                    DetIfInputDistribution(
                        q_pmf=np.array(q_pmf),
                        x1=np.array(rows1),
                        x2=np.array(rows2),
                    )
                )
        return dists
    if config.family == "random":
        rng = np.random.default_rng(config.seed)
        for _ in range(config.samples):
            nq = int(rng.choice(list(config.q_sizes)))
            dists.append(
                DetIfInputDistribution(
                    q_pmf=rng.dirichlet(np.ones(nq)),
                    x1=rng.dirichlet(np.ones(det.nx1), size=nq),
                    x2=rng.dirichlet(np.ones(det.nx2), size=nq),
                )
            )
        return dists
    raise BoundsError(f"unknown search family {config.family!r}")


def gf_family(
    ch: IcGfChannel,
    config: SearchConfig,
    nu1: int | None = None,
    nu2: int | None = None,
    nv1: int | None = None,
    nv2: int | None = None,
) -> list[GfInputDistribution]:
    """Candidate factorizations for the generalized-feedback bound.

    Auxiliary cardinalities default to |U_k| = |X_k| and |V_k| = |Y_k| + 1.
    The grid family enumerates step-quantized factors in deterministic order
    up to ``grid_cap``; the random family draws Dirichlet(1) factors.
    """
    nu1 = nu1 or ch.nx1
    nu2 = nu2 or ch.nx2
    ny1, ny2, _, _ = ch.output_sizes
    nv1 = nv1 or ny1 + 1
    nv2 = nv2 or ny2 + 1
    dists: list[GfInputDistribution] = []

    def uniform_dist(nq: int) -> GfInputDistribution:
        return GfInputDistribution(
            q_pmf=np.full(nq, 1.0 / nq),
            u1x1=np.full((nq, nu1, ch.nx1), 1.0 / (nu1 * ch.nx1)),
            u2x2=np.full((nq, nu2, ch.nx2), 1.0 / (nu2 * ch.nx2)),
            v1=np.full((nq, nu1, ny1, nv1), 1.0 / nv1),
            v2=np.full((nq, nu2, ny2, nv2), 1.0 / nv2),
        )

    if config.family == "uniform":
        return [uniform_dist(nq) for nq in config.q_sizes]
    if config.family == "grid":
        # grid over the input factors only; compression factors kept at the
        # feedback-copy and constant extremes (the informative corners)
        for nq in config.q_sizes:
            q_choices = _simplex_grid(nq, config.grid_step) if nq > 1 else [(1.0,)]
            in_rows1 = _simplex_grid(nu1 * ch.nx1, config.grid_step)
            in_rows2 = _simplex_grid(nu2 * ch.nx2, config.grid_step)
            v1_copy = _copy_kernel(nq, nu1, ny1, nv1)
            v1_const = np.zeros((nq, nu1, ny1, nv1))
            v1_const[..., 0] = 1.0
            v2_copy = _copy_kernel(nq, nu2, ny2, nv2)
            v2_const = np.zeros((nq, nu2, ny2, nv2))
            v2_const[..., 0] = 1.0
            combos = itertools.product(
                q_choices,
                itertools.product(in_rows1, repeat=nq),
                itertools.product(in_rows2, repeat=nq),
                ((v1_copy, "copy"), (v1_const, "const")),
                ((v2_copy, "copy"), (v2_const, "const")),
            )
            for q_pmf, rows1, rows2, (v1, _), (v2, _) in itertools.islice(combos, config.grid_cap):
                dists.append(
                    GfInputDistribution(
                        q_pmf=np.array(q_pmf),
                        u1x1=np.array(rows1).reshape(nq, nu1, ch.nx1),
                        u2x2=np.array(rows2).reshape(nq, nu2, ch.nx2),
                        v1=v1,
                        v2=v2,
                    )
                )
        return dists
    if config.family == "random":
        rng = np.random.default_rng(config.seed)
        for _ in range(config.samples):
            nq = int(rng.choice(list(config.q_sizes)))
            dists.append(
                GfInputDistribution(
                    q_pmf=rng.dirichlet(np.ones(nq)),
                    u1x1=rng.dirichlet(np.ones(nu1 * ch.nx1), size=nq).reshape(nq, nu1, ch.nx1),
                    u2x2=rng.dirichlet(np.ones(nu2 * ch.nx2), size=nq).reshape(nq, nu2, ch.nx2),
                    v1=rng.dirichlet(np.ones(nv1), size=(nq, nu1, ny1)),
                    v2=rng.dirichlet(np.ones(nv2), size=(nq, nu2, ny2)),
                )
            )
        return dists
    raise BoundsError(f"unknown search family {config.family!r}")


def _copy_kernel(nq: int, nu: int, ny: int, nv: int) -> np.ndarray:
    """V = copy of the feedback output (padded into the V alphabet)."""
    w = np.zeros((nq, nu, ny, nv))
    for y in range(ny):
        w[..., y, min(y, nv - 1)] = 1.0
    return w


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ICFB_WORKERS", "1")))
    except ValueError:
        return 1


def _union_of_regions(
    dists: Sequence[object],
    evaluate: Callable[[object], RateRegion],
    workers: int | None = None,
) -> SearchResult:
    """Union the per-distribution regions; deterministic for any worker count."""
    if not dists:
        raise EmptyFamilyError("distribution family is empty")
    workers = workers if workers is not None else worker_count()
    if workers > 1 and len(dists) > 8:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            regions = list(pool.map(evaluate, dists, chunksize=max(1, len(dists) // (4 * workers))))
    else:
        regions = [evaluate(d) for d in dists]
    points: list[tuple[float, float]] = []
    owners: list[int] = []
    for i, region in enumerate(regions):
        for v in region.vertices():
            points.append(v)
            owners.append(i)
    union = RateRegion.from_vertices(points)
    witnesses = []
    for v in union.vertices():
        best = None
        for p, owner in zip(points, owners):
            dist2 = (p[0] - v[0]) ** 2 + (p[1] - v[1]) ** 2
            if best is None or dist2 < best[0]:
                best = (dist2, owner)
        if best is not None and best[0] <= 1e-12:
            witnesses.append((dists[best[1]], v))
    return SearchResult(region=union, witnesses=tuple(witnesses))


def search_union_det(
    det: InjectiveDetIc,
    fb: FeedbackStateSpec,
    config: SearchConfig,
    split_caps: bool = True,
    workers: int | None = None,
) -> SearchResult:
    dists = det_family(det, config)
    evaluate = partial(_eval_det, det, fb, split_caps)
    return _union_of_regions(dists, evaluate, workers)


def search_union_gf(
    ch: IcGfChannel,
    config: SearchConfig,
    use_scheme_system: bool = False,
    split_caps: bool = True,
    workers: int | None = None,
) -> SearchResult:
    dists = gf_family(ch, config)
    evaluate = partial(_eval_gf, ch, split_caps, use_scheme_system)
    return _union_of_regions(dists, evaluate, workers)


def _eval_det(det, fb, split_caps, d) -> RateRegion:
    return inner_region_det_if(det, d, fb, split_caps)


def _eval_gf(ch, split_caps, use_scheme_system, d) -> RateRegion:
    return inner_region_gf(d, ch, split_caps, use_scheme_system)
