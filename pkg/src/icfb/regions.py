"""Linear rate-inequality systems and 2D rate-region polytopes.

Coefficients on rate variables are exact ``Fraction`` values (the theorem
systems only ever use entries in {-1, 0, 1, 2}), constants are floats carrying
information quantities.  Fourier-Motzkin elimination therefore combines rows
exactly in the coefficients and with plain float arithmetic in the constants.

``RateRegion`` is a bounded polygon in the nonnegative (R1, R2) quadrant.
R1 >= 0 and R2 >= 0 are implicit; every stored region carries finite per-rate
caps among its half-planes, so vertex enumeration always terminates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

FEAS_TOL = 1e-9
_POINT_MERGE_TOL = 1e-9


class RegionError(ValueError):
    """Invalid system or region data."""


Row = tuple[tuple[Fraction, ...], float]


def _normalize_row(coeffs: tuple[Fraction, ...], const: float) -> Row:
    """Scale so the coefficient vector is a primitive integer vector."""
    nonzero = [c for c in coeffs if c != 0]
    if not nonzero:
        return coeffs, const
    denom_lcm = 1
    for c in nonzero:
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    ints = [int(c * denom_lcm) for c in coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    scale = Fraction(denom_lcm, g)
    return tuple(c * scale for c in coeffs), const * float(scale)


def _prune_rows(rows: Iterable[Row], n_vars: int) -> tuple[Row, ...]:
    """Drop vacuous rows, dedupe directions keeping the tightest constant."""
    best: dict[tuple[Fraction, ...], float] = {}
    infeasible: float | None = None
    for coeffs, const in rows:
        coeffs, const = _normalize_row(coeffs, const)
        if all(c == 0 for c in coeffs):
            if const < -FEAS_TOL:
                infeasible = const if infeasible is None else min(infeasible, const)
            continue
        prev = best.get(coeffs)
        if prev is None or const < prev:
            best[coeffs] = const
    out = [(c, v) for c, v in best.items()]
    if infeasible is not None:
        out.append((tuple(Fraction(0) for _ in range(n_vars)), infeasible))
    return tuple(out)


@dataclass(frozen=True)
class LinearRateSystem:
    """Inequality system coeff . vars <= const over labeled rate variables."""

    variables: tuple[str, ...]
    rows: tuple[Row, ...]

    def __post_init__(self) -> None:
        variables = tuple(str(v) for v in self.variables)
        if len(set(variables)) != len(variables):
            raise RegionError(f"duplicate variables {variables}")
        rows = []
        for coeffs, const in self.rows:
            coeffs = tuple(Fraction(c) for c in coeffs)
            if len(coeffs) != len(variables):
                raise RegionError("row length does not match variable count")
            const = float(const)
            if not math.isfinite(const):
                raise RegionError("row constant must be finite")
            rows.append((coeffs, const))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "rows", tuple(rows))

    def var_index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise RegionError(f"unknown variable {var!r}") from None


def fm_eliminate(s: LinearRateSystem, var: str) -> LinearRateSystem:
    """Project out one variable by pairing its lower and upper bounds."""
    j = s.var_index(var)
    keep_vars = s.variables[:j] + s.variables[j + 1:]

    def strip(coeffs: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        return coeffs[:j] + coeffs[j + 1:]

    zero_rows: list[Row] = []
    uppers: list[Row] = []  # coeff on var > 0:  var <= (const - rest)/coeff
    lowers: list[Row] = []  # coeff on var < 0:  var >= (rest - const)/(-coeff)
    for coeffs, const in s.rows:
        c = coeffs[j]
        if c == 0:
            zero_rows.append((strip(coeffs), const))
        elif c > 0:
            uppers.append((strip(tuple(k / c for k in coeffs)), const / float(c)))
        else:
            lowers.append((strip(tuple(k / -c for k in coeffs)), const / float(-c)))
    combined: list[Row] = list(zero_rows)
    for lc, lv in lowers:
        for uc, uv in uppers:
            combined.append((tuple(a + b for a, b in zip(lc, uc)), lv + uv))
    rows = _prune_rows(combined, len(keep_vars))
    return LinearRateSystem(variables=keep_vars, rows=rows)


def eliminate_all_but(s: LinearRateSystem, keep: Sequence[str]) -> LinearRateSystem:
    keep = tuple(keep)
    out = s
    for var in [v for v in s.variables if v not in keep]:
        out = fm_eliminate(out, var)
    return out


# -- 2D rate regions ----------------------------------------------------------

HalfPlane = tuple[Fraction, Fraction, float]  # a*R1 + b*R2 <= c


def _intersect(h1: HalfPlane, h2: HalfPlane) -> tuple[float, float] | None:
    a1, b1, c1 = float(h1[0]), float(h1[1]), h1[2]
    a2, b2, c2 = float(h2[0]), float(h2[1]), h2[2]
    det = a1 * b2 - a2 * b1
    scale = max(abs(a1), abs(b1), 1.0) * max(abs(a2), abs(b2), 1.0)
    if abs(det) <= 1e-12 * scale:
        return None
    x = (c1 * b2 - c2 * b1) / det
    y = (a1 * c2 - a2 * c1) / det
    return (x, y)


def _hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone-chain convex hull, counter-clockwise, degeneracy tolerant."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-15:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-15:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _merge_points(points: Iterable[tuple[float, float]], tol: float) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for p in points:
        for q in out:
            if abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol:
                break
        else:
            out.append(p)
    return out


@dataclass(frozen=True)
class RateRegion:
    """Canonical bounded polygon {R >= 0, a.R1 + b.R2 <= c for stored rows}."""

    halfplanes: tuple[HalfPlane, ...]
    _vertices: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    @classmethod
    def from_halfplanes(
        cls,
        halfplanes: Iterable[tuple[Fraction | int | str, Fraction | int | str, float]],
        caps: tuple[float, float] | None = None,
    ) -> "RateRegion":
        rows: list[HalfPlane] = [
            (Fraction(a), Fraction(b), float(c)) for a, b, c in halfplanes
        ]
        if caps is not None:
            rows.append((Fraction(1), Fraction(0), float(caps[0])))
            rows.append((Fraction(0), Fraction(1), float(caps[1])))
        return cls._canonicalize(rows)

    @classmethod
    def from_vertices(cls, points: Iterable[tuple[float, float]]) -> "RateRegion":
        """Downward-closed region spanned by a vertex cloud (union building)."""
        pts = [(max(float(x), 0.0), max(float(y), 0.0)) for x, y in points]
        if not pts:
            return cls(halfplanes=(), _vertices=())
        pts.append((0.0, 0.0))
        # downward closure: project each point onto both axes
        pts += [(x, 0.0) for x, _ in list(pts)] + [(0.0, y) for _, y in list(pts)]
        hull = _hull(pts)
        rows: list[HalfPlane] = []
        m = len(hull)
        for i in range(m):
            px, py = hull[i]
            qx, qy = hull[(i + 1) % m]
            nx, ny = qy - py, px - qx  # outward normal for CCW orientation
            if nx <= 1e-12 and ny <= 1e-12:
                continue  # implicit axis side
            scale = max(abs(nx), abs(ny))
            a = Fraction(nx / scale).limit_denominator(10**6)
            b = Fraction(ny / scale).limit_denominator(10**6)
            if a == 0 and b == 0:
                continue
            # support value over the whole hull absorbs the rationalization error
            c = max(float(a) * hx + float(b) * hy for hx, hy in hull)
            rows.append(_normalize_halfplane(a, b, c))
        cap = max(max(x for x, _ in pts), max(y for _, y in pts)) + 1.0
        return cls._canonicalize(rows + [
            (Fraction(1), Fraction(0), cap),
            (Fraction(0), Fraction(1), cap),
        ])

    @classmethod
    def _canonicalize(cls, rows: list[HalfPlane]) -> "RateRegion":
        pruned = _prune_rows([((a, b), c) for a, b, c in rows], 2)
        rows = [(cs[0], cs[1], c) for cs, c in pruned]
        infeasible = any(a == 0 and b == 0 and c < -FEAS_TOL for a, b, c in rows)
        rows = [(a, b, c) for a, b, c in rows if not (a == 0 and b == 0)]
        if infeasible:
            return cls(halfplanes=tuple(sorted(rows, key=_hp_sort_key)), _vertices=())
        lines: list[HalfPlane] = rows + [
            (Fraction(-1), Fraction(0), 0.0),
            (Fraction(0), Fraction(-1), 0.0),
        ]
        candidates: list[tuple[float, float]] = []
        for i in range(len(lines)):
            for k in range(i + 1, len(lines)):
                p = _intersect(lines[i], lines[k])
                if p is None:
                    continue
                x, y = p
                if x < -1e-7 or y < -1e-7:
                    continue
                if all(
                    float(a) * x + float(b) * y
                    <= c + 1e-7 * max(1.0, abs(float(a)), abs(float(b)))
                    for a, b, c in rows
                ):
                    candidates.append((max(x, 0.0), max(y, 0.0)))
        candidates = _merge_points(candidates, 1e-7)
        if not candidates:
            # empty region: nothing satisfies the rows in the quadrant
            return cls(halfplanes=tuple(sorted(rows, key=_hp_sort_key)), _vertices=())
        hull = _hull([(round(x, 12), round(y, 12)) for x, y in candidates])
        verts = _order_vertices(hull)
        kept: list[HalfPlane] = []
        for a, b, c in rows:
            scale = max(1.0, abs(float(a)), abs(float(b)))
            tight = [
                v
                for v in verts
                if abs(float(a) * v[0] + float(b) * v[1] - c) <= 1e-7 * scale
            ]
            needed = 2 if len(verts) >= 3 else 1
            if len(tight) >= needed:
                kept.append((a, b, c))
        if not kept:
            kept = rows
        return cls(halfplanes=tuple(sorted(set(kept), key=_hp_sort_key)), _vertices=tuple(verts))

    # -- queries --------------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self._vertices

    def vertices(self) -> tuple[tuple[float, float], ...]:
        """Extreme points, counter-clockwise from the origin side."""
        return self._vertices

    def contains(self, point: tuple[float, float], tol: float = FEAS_TOL) -> bool:
        x, y = point
        if x < -tol or y < -tol:
            return False
        return all(float(a) * x + float(b) * y <= c + tol for a, b, c in self.halfplanes)

    def max_weighted(self, w1: float, w2: float) -> tuple[float, tuple[float, float]]:
        """Maximize w1*R1 + w2*R2; ties broken toward larger R1."""
        if w1 < 0 or w2 < 0 or (w1 == 0 and w2 == 0):
            raise RegionError("weights must be nonnegative and not both zero")
        if self.is_empty:
            raise RegionError("region is empty")
        best = None
        for x, y in self._vertices:
            val = w1 * x + w2 * y
            if best is None or val > best[0] + 1e-12 or (
                abs(val - best[0]) <= 1e-12 and x > best[1][0]
            ):
                best = (val, (x, y))
        return best  # type: ignore[return-value]

    # -- serialization ---------------------------------------------------------

    def to_dict(self, metadata: dict | None = None) -> dict:
        return {
            "halfplanes": [
                {"a": str(a), "b": str(b), "c": _sig9(c)} for a, b, c in self.halfplanes
            ],
            "vertices": [[_sig9(x), _sig9(y)] for x, y in self._vertices],
            "metadata": metadata or {},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RateRegion":
        try:
            rows = [
                (Fraction(h["a"]), Fraction(h["b"]), float(h["c"]))
                for h in doc["halfplanes"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise RegionError(f"bad region document: {exc}") from exc
        return cls._canonicalize(rows)

    def save(self, path: str | Path, metadata: dict | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(metadata), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RateRegion":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise RegionError(f"cannot read region file {path}: {exc}") from exc
        return cls.from_dict(doc)


def _sig9(x: float) -> float:
    return float(f"{x:.9g}")


def _normalize_halfplane(a: Fraction, b: Fraction, c: float) -> HalfPlane:
    coeffs, const = _normalize_row((a, b), c)
    return (coeffs[0], coeffs[1], const)


def _hp_sort_key(h: HalfPlane):
    a, b, c = h
    return (math.atan2(float(b), float(a)), c)


def _order_vertices(hull: list[tuple[float, float]]) -> list[tuple[float, float]]:
    if not hull:
        return []
    hull = [(x + 0.0, y + 0.0) for x, y in hull]  # normalize -0.0
    start = min(range(len(hull)), key=lambda i: hull[i])
    return [hull[(start + i) % len(hull)] for i in range(len(hull))]


def project_to_rate_plane(
    s: LinearRateSystem,
    caps: tuple[float, float],
    rate_vars: tuple[str, str] = ("R1", "R2"),
) -> RateRegion:
    """FM-eliminate everything except the two rate variables and canonicalize."""
    for var in rate_vars:
        if var not in s.variables:
            raise RegionError(f"system lacks rate variable {var!r}")
    reduced = eliminate_all_but(s, rate_vars)
    i1 = reduced.var_index(rate_vars[0])
    i2 = reduced.var_index(rate_vars[1])
    rows = [(coeffs[i1], coeffs[i2], const) for coeffs, const in reduced.rows]
    return RateRegion.from_halfplanes(rows, caps=caps)


def is_subset(a: RateRegion, b: RateRegion, tol: float = FEAS_TOL) -> bool:
    """True iff every vertex of a satisfies every half-plane of b within tol."""
    return all(b.contains(v, tol=tol) for v in a.vertices())


def vertex_deviation(a: RateRegion, b: RateRegion) -> float:
    """Symmetric max-min vertex distance (Hausdorff on the vertex sets)."""
    va, vb = a.vertices(), b.vertices()
    if not va and not vb:
        return 0.0
    if not va or not vb:
        return math.inf

    def one_way(src, dst):
        return max(min(math.hypot(x - u, y - v) for u, v in dst) for x, y in src)

    return max(one_way(va, vb), one_way(vb, va))
