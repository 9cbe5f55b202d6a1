"""Channel representations for the two-user interference channel.

Three levels of description, from generic to concrete:

* ``IcGfChannel`` -- arbitrary conditional law W(y1,y2,y3,y4 | x1,x2), the
  substrate for generalized-feedback bound evaluation.
* ``InjectiveDetIc`` -- deterministic channel Y3=f3(X1,T2), Y4=f4(X2,T1) with
  f3 / f4 one-to-one in the interference variable.
* shift-matrix (linear deterministic) channels over GF(2)^q, built from the
  gain profile (n11, n12, n21, n22).

``FeedbackStateSpec`` holds the joint law of the two binary feedback states;
``det_to_icgf`` composes a deterministic channel with intermittent feedback
into an ``IcGfChannel`` whose feedback outputs carry an explicit erasure
letter (index = base alphabet size), so entropies of the thinned interference
include the erasure mass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .probability import Kernel, PmfError


class ChannelError(ValueError):
    """Invalid channel data or parameters."""


class ConfigError(ValueError):
    """Channel-config file could not be parsed."""


@dataclass(frozen=True)
class IcGfChannel:
    """Generic IC with generalized feedback: W(y1,y2,y3,y4 | x1,x2)."""

    weights: np.ndarray  # shape (|X1|,|X2|,|Y1|,|Y2|,|Y3|,|Y4|)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 6:
            raise ChannelError(f"channel tensor must be 6-dimensional, got {w.ndim}")
        if np.any(w < 0):
            raise ChannelError("negative channel weight")
        rows = w.sum(axis=(2, 3, 4, 5))
        if np.any(np.abs(rows - 1.0) > 1e-9):
            raise ChannelError("channel rows must sum to 1 for every (x1, x2)")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def nx1(self) -> int:
        return self.weights.shape[0]

    @property
    def nx2(self) -> int:
        return self.weights.shape[1]

    @property
    def output_sizes(self) -> tuple[int, int, int, int]:
        return self.weights.shape[2:]

    def kernel(self) -> Kernel:
        ny1, ny2, ny3, ny4 = self.output_sizes
        return Kernel(
            inputs=("X1", "X2"),
            outputs=(("Y1", ny1), ("Y2", ny2), ("Y3", ny3), ("Y4", ny4)),
            weights=self.weights,
        )


@dataclass(frozen=True)
class InjectiveDetIc:
    """Deterministic IC: Y3 = f3(X1, t2(X2)), Y4 = f4(X2, t1(X1))."""

    t1: np.ndarray  # (|X1|,) -> T1 index
    t2: np.ndarray  # (|X2|,) -> T2 index
    f3: np.ndarray  # (|X1|, |T2|) -> Y3 index
    f4: np.ndarray  # (|X2|, |T1|) -> Y4 index
    nt1: int
    nt2: int
    ny3: int
    ny4: int

    def __post_init__(self) -> None:
        for name in ("t1", "t2", "f3", "f4"):
            arr = np.asarray(getattr(self, name), dtype=int)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.f3.shape != (self.t1.shape[0], self.nt2):
            raise ChannelError("f3 table shape mismatch")
        if self.f4.shape != (self.t2.shape[0], self.nt1):
            raise ChannelError("f4 table shape mismatch")
        if self.t1.max(initial=0) >= self.nt1 or self.t2.max(initial=0) >= self.nt2:
            raise ChannelError("interference map exceeds declared alphabet")
        if self.f3.max(initial=0) >= self.ny3 or self.f4.max(initial=0) >= self.ny4:
            raise ChannelError("output map exceeds declared alphabet")

    @property
    def nx1(self) -> int:
        return self.t1.shape[0]

    @property
    def nx2(self) -> int:
        return self.t2.shape[0]


@dataclass(frozen=True)
class FeedbackStateSpec:
    """Joint law of the two binary feedback states; index 1 = link on."""

    joint: np.ndarray  # shape (2, 2), joint[s1, s2]

    def __post_init__(self) -> None:
        j = np.asarray(self.joint, dtype=float)
        if j.shape != (2, 2):
            raise ChannelError("state joint must be 2x2")
        if np.any(j < 0) or abs(float(j.sum()) - 1.0) > 1e-9:
            raise ChannelError("state joint must be a pmf")
        j = j.copy()
        j.setflags(write=False)
        object.__setattr__(self, "joint", j)

    @property
    def p1(self) -> float:
        return float(self.joint[1, :].sum())

    @property
    def p2(self) -> float:
        return float(self.joint[:, 1].sum())

    @classmethod
    def from_marginals(cls, p1: float, p2: float, correlation: float = 0.0) -> "FeedbackStateSpec":
        """Build the joint from marginals and a correlation coefficient.

        ``correlation`` is the Pearson coefficient of the two on/off
        indicators; the feasible range depends on (p1, p2) and violations
        raise ``ChannelError``.
        """
        if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
            raise ChannelError("marginals must lie in [0, 1]")
        sd = math.sqrt(p1 * (1 - p1) * p2 * (1 - p2))
        p11 = p1 * p2 + correlation * sd
        lo, hi = max(0.0, p1 + p2 - 1.0), min(p1, p2)
        if p11 < lo - 1e-12 or p11 > hi + 1e-12:
            raise ChannelError(f"correlation {correlation} infeasible for ({p1}, {p2})")
        p11 = min(max(p11, lo), hi)
        joint = np.array(
            [
                [1.0 - p1 - p2 + p11, p2 - p11],
                [p1 - p11, p11],
            ]
        )
        return cls(joint=joint)


@dataclass(frozen=True)
class LdicParams:
    """Gain profile of the linear deterministic IC over GF(2)^q."""

    q: int
    n11: int
    n12: int
    n21: int
    n22: int

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ChannelError("q must be a positive integer")
        for name in ("n11", "n12", "n21", "n22"):
            n = getattr(self, name)
            if not 0 <= n <= self.q:
                raise ChannelError(f"{name}={n} outside [0, q={self.q}]")


# -- shift-matrix arithmetic (bit vectors stored most-significant-first) -----


def shift_apply(q: int, n: int, x) -> np.ndarray:
    """Apply the gain-n shift matrix: top n bits of x land at the bottom."""
    x = np.asarray(x, dtype=int)
    if x.shape != (q,):
        raise ChannelError(f"expected bit vector of length {q}, got shape {x.shape}")
    if not 0 <= n <= q:
        raise ChannelError(f"shift gain {n} outside [0, {q}]")
    out = np.zeros(q, dtype=int)
    if n:
        out[q - n:] = x[:n]
    return out


def bits_of(index: int, q: int) -> np.ndarray:
    """Bit vector (MSB first) of an alphabet index in {0, ..., 2^q - 1}."""
    return np.array([(index >> (q - 1 - j)) & 1 for j in range(q)], dtype=int)


def index_of(bits) -> int:
    bits = np.asarray(bits, dtype=int)
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def ldic_build(p: LdicParams) -> InjectiveDetIc:
    """Injective deterministic channel realizing the shift-matrix model."""
    q = p.q
    size = 1 << q
    t1 = np.array([index_of(shift_apply(q, p.n21, bits_of(x, q))) for x in range(size)])
    t2 = np.array([index_of(shift_apply(q, p.n12, bits_of(x, q))) for x in range(size)])
    f3 = np.zeros((size, size), dtype=int)
    f4 = np.zeros((size, size), dtype=int)
    for x in range(size):
        own3 = shift_apply(q, p.n11, bits_of(x, q))
        own4 = shift_apply(q, p.n22, bits_of(x, q))
        for t in range(size):
            f3[x, t] = index_of(own3 ^ bits_of(t, q))
            f4[x, t] = index_of(own4 ^ bits_of(t, q))
    det = InjectiveDetIc(t1=t1, t2=t2, f3=f3, f4=f4, nt1=size, nt2=size, ny3=size, ny4=size)
    if not injectivity_check(det):
        raise ChannelError("shift-matrix channel failed injectivity re-check")
    return det


def injectivity_check(c: InjectiveDetIc) -> bool:
    """Exhaustively verify one-to-oneness of f3 in t2 and f4 in t1."""
    for x1 in range(c.nx1):
        if len(set(c.f3[x1, :])) != c.nt2:
            return False
    for x2 in range(c.nx2):
        if len(set(c.f4[x2, :])) != c.nt1:
            return False
    return True


def det_to_icgf(c: InjectiveDetIc, fb: FeedbackStateSpec) -> IcGfChannel:
    """Intermittent-feedback IC-GF view of a deterministic channel.

    Feedback outputs are the state-thinned interference values: Y1 = S1*T2
    and Y2 = S2*T1, with the erasure letter at index |T2| (resp. |T1|).
    """
    if not injectivity_check(c):
        raise ChannelError("channel is not injective in the interference variable")
    ny1 = c.nt2 + 1
    ny2 = c.nt1 + 1
    w = np.zeros((c.nx1, c.nx2, ny1, ny2, c.ny3, c.ny4))
    for x1 in range(c.nx1):
        t1 = c.t1[x1]
        for x2 in range(c.nx2):
            t2 = c.t2[x2]
            y3 = c.f3[x1, t2]
            y4 = c.f4[x2, t1]
            for s1 in (0, 1):
                y1 = t2 if s1 else c.nt2
                for s2 in (0, 1):
                    y2 = t1 if s2 else c.nt1
                    w[x1, x2, y1, y2, y3, y4] += fb.joint[s1, s2]
    return IcGfChannel(weights=w)


# -- channel-config files -----------------------------------------------------


@dataclass(frozen=True)
class ChannelConfig:
    """Parsed channel-config file: either an ldic profile or a raw table."""

    kind: str
    ldic: LdicParams | None = None
    fb: FeedbackStateSpec | None = None
    table: IcGfChannel | None = None


def parse_channel_config(doc: dict) -> ChannelConfig:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("config must be a mapping with a 'kind' field")
    kind = doc["kind"]
    if kind == "ldic":
        try:
            params = LdicParams(
                q=int(doc["q"]),
                n11=int(doc["n11"]),
                n12=int(doc["n12"]),
                n21=int(doc["n21"]),
                n22=int(doc["n22"]),
            )
            fb = FeedbackStateSpec.from_marginals(
                float(doc.get("p1", 1.0)),
                float(doc.get("p2", 1.0)),
                float(doc.get("state_correlation", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"missing ldic field {exc}") from exc
        return ChannelConfig(kind="ldic", ldic=params, fb=fb)
    if kind == "table":
        try:
            sizes = doc["alphabets"]
            shape = tuple(int(sizes[k]) for k in ("x1", "x2", "y1", "y2", "y3", "y4"))
            flat = np.asarray(doc["weights"], dtype=float)
            table = IcGfChannel(weights=flat.reshape(shape))
        except (KeyError, TypeError, ValueError, ChannelError) as exc:
            raise ConfigError(f"bad table config: {exc}") from exc
        return ChannelConfig(kind="table", table=table)
    raise ConfigError(f"unknown channel kind {kind!r}")


def load_channel_config(path: str | Path) -> ChannelConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_channel_config(doc)
