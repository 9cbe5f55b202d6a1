"""Command-line front end.

Subcommands:

* ``capacity`` -- closed-form capacity polytope of an ldic config (single
  point or (p1, p2) sweep).
* ``inner``    -- inner-bound union over a distribution family (Theorem-1
  system, Theorem-2 system, or the raw scheme constraints).
* ``compare``  -- subset verdicts and gap report between two region files.
* ``simulate`` -- state sampling, covering-lemma Monte Carlo, or the toy
  end-to-end scheme.

Exit codes: 0 ok / 1 comparison negative / 2 parse error / 3 semantic error /
4 resource-cap breach.  Every command is deterministic given (config, flags,
seed); numeric output carries 9 significant digits.  Region/sweep outputs get
a rendered PNG figure alongside the structured file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, ldic, plotting, simulator
from .channels import (
    ChannelConfig,
    ChannelError,
    ConfigError,
    det_to_icgf,
    ldic_build,
    load_channel_config,
)
from .probability import CellCapError
from .regions import RateRegion, RegionError, is_subset, vertex_deviation
from .simulator import CapExceededError, SimulatorError

EXIT_OK = 0
EXIT_COMPARE_NEGATIVE = 1
EXIT_PARSE = 2
EXIT_SEMANTIC = 3
EXIT_RESOURCE = 4


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _sig9(x: float) -> float:
    return float(f"{x:.9g}")


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _figure_path(out: Path) -> Path:
    return out.with_suffix(".png")


def _load_config(path: str) -> ChannelConfig:
    try:
        return load_channel_config(path)
    except ConfigError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc


# ---------------------------------------------------------------------------
# capacity
# ---------------------------------------------------------------------------


def cmd_capacity(args) -> int:
    cfg = _load_config(args.config)
    if cfg.kind != "ldic":
        raise CliError(EXIT_SEMANTIC, "capacity requires an ldic config")
    p1 = args.p1 if args.p1 is not None else cfg.fb.p1
    p2 = args.p2 if args.p2 is not None else cfg.fb.p2
    try:
        if args.sweep is not None:
            grid = ldic.uniform_grid(args.sweep)
            rows = ldic.capacity_sweep(cfg.ldic, grid)
            out = Path(args.out) if args.out else None
            lines = _sweep_lines(rows)
            if out:
                out.write_text("".join(lines))
                plotting.render_sweep(rows, _figure_path(out), title="capacity sum-rate sweep")
            else:
                sys.stdout.write("".join(lines))
            return EXIT_OK
        region = ldic.capacity_region(cfg.ldic, p1, p2)
    except ChannelError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from exc
    doc = region.to_dict(
        metadata={
            "kind": "capacity",
            "params": {"q": cfg.ldic.q, "n11": cfg.ldic.n11, "n12": cfg.ldic.n12,
                       "n21": cfg.ldic.n21, "n22": cfg.ldic.n22},
            "p1": _sig9(p1),
            "p2": _sig9(p2),
        }
    )
    if args.out:
        out = Path(args.out)
        _write_json(out, doc)
        plotting.render_regions([("capacity", region)], _figure_path(out))
    else:
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _sweep_lines(rows) -> list[str]:
    lines = ["p1\tp2\tsumrate\tvertices\n"]
    for r in rows:
        verts = ";".join(f"{_fmt(x)},{_fmt(y)}" for x, y in r["vertices"])
        lines.append(f"{_fmt(r['p1'])}\t{_fmt(r['p2'])}\t{_fmt(r['sumrate'])}\t{verts}\n")
    return lines


# ---------------------------------------------------------------------------
# inner
# ---------------------------------------------------------------------------


def _dist_to_doc(dist) -> dict:
    if isinstance(dist, bounds.DetIfInputDistribution):
        return {
            "kind": "det",
            "q_pmf": [_sig9(v) for v in dist.q_pmf],
            "x1": [[_sig9(v) for v in row] for row in dist.x1],
            "x2": [[_sig9(v) for v in row] for row in dist.x2],
        }
    return {
        "kind": "gf",
        "q_pmf": [_sig9(v) for v in dist.q_pmf],
        "u1x1": np.vectorize(_sig9)(dist.u1x1).tolist(),
        "u2x2": np.vectorize(_sig9)(dist.u2x2).tolist(),
        "v1": np.vectorize(_sig9)(dist.v1).tolist(),
        "v2": np.vectorize(_sig9)(dist.v2).tolist(),
    }


def cmd_inner(args) -> int:
    cfg = _load_config(args.config)
    config = bounds.SearchConfig(
        family=args.search,
        grid_step=args.grid_step,
        samples=args.samples,
        seed=args.seed,
        q_sizes=tuple(int(v) for v in args.q_sizes.split(",")),
        grid_cap=args.grid_cap,
    )
    try:
        if args.theorem == "2":
            if cfg.kind != "ldic":
                raise CliError(EXIT_SEMANTIC, "theorem 2 requires an ldic (deterministic) config")
            det = ldic_build(cfg.ldic)
            result = bounds.search_union_det(det, cfg.fb, config)
            label = "theorem-2 inner bound"
        else:
            if cfg.kind != "table":
                raise CliError(EXIT_SEMANTIC, "theorem 1 / schemeV require a table config")
            result = bounds.search_union_gf(
                cfg.table, config, use_scheme_system=(args.theorem == "schemeV")
            )
            label = f"theorem-{args.theorem} inner bound"
    except bounds.EmptyFamilyError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from exc
    except CellCapError as exc:
        raise CliError(EXIT_RESOURCE, str(exc)) from exc
    except bounds.BoundsError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from exc
    doc = result.region.to_dict(
        metadata={
            "kind": "inner",
            "theorem": args.theorem,
            "search": {
                "family": args.search,
                "grid_step": _sig9(args.grid_step),
                "samples": args.samples,
                "seed": args.seed,
            },
        }
    )
    doc["witnesses"] = [
        {"vertex": [_sig9(v[0]), _sig9(v[1])], "distribution": _dist_to_doc(d)}
        for d, v in result.witnesses
    ]
    if args.out:
        out = Path(args.out)
        _write_json(out, doc)
        plotting.render_regions([(label, result.region)], _figure_path(out))
    else:
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def cmd_compare(args) -> int:
    try:
        region_a = RateRegion.load(args.region_a)
        region_b = RateRegion.load(args.region_b)
    except RegionError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    tol = args.tol
    a_in_b = is_subset(region_a, region_b, tol)
    b_in_a = is_subset(region_b, region_a, tol)

    def max_violation(inner: RateRegion, outer: RateRegion) -> float:
        worst = 0.0
        for x, y in inner.vertices():
            for a, b, c in outer.halfplanes:
                worst = max(worst, float(a) * x + float(b) * y - c)
        return worst

    lines = [
        f"A subset of B (tol {_fmt(tol)}): {a_in_b}\n",
        f"B subset of A (tol {_fmt(tol)}): {b_in_a}\n",
        f"max violation A->B: {_fmt(max_violation(region_a, region_b))}\n",
        f"max violation B->A: {_fmt(max_violation(region_b, region_a))}\n",
        f"vertex deviation: {_fmt(vertex_deviation(region_a, region_b))}\n",
    ]
    for w1, w2 in ((1.0, 1.0), (2.0, 1.0), (1.0, 2.0)):
        try:
            va = region_a.max_weighted(w1, w2)[0]
            vb = region_b.max_weighted(w1, w2)[0]
            lines.append(
                f"gap at weights ({w1:g},{w2:g}): B-A = {_fmt(vb - va)}\n"
            )
        except RegionError:
            lines.append(f"gap at weights ({w1:g},{w2:g}): undefined (empty region)\n")
    sys.stdout.write("".join(lines))
    if args.out:
        out = Path(args.out)
        out.write_text("".join(lines))
        plotting.render_regions(
            [("A", region_a), ("B", region_b)], _figure_path(out), title="region comparison"
        )
    return EXIT_OK if a_in_b else EXIT_COMPARE_NEGATIVE


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _covering_family_from(cfg: ChannelConfig) -> simulator.CoveringFamily:
    """Compression family induced by the ldic config: compress the thinned
    interference observed by encoder 1 with a copy test channel."""
    det = ldic_build(cfg.ldic)
    size = det.nx2
    p1 = cfg.fb.p1
    ny = det.nt2 + 1
    p_y = np.zeros((1, ny))
    for x2 in range(size):
        p_y[0, det.t2[x2]] += p1 / size
    p_y[0, det.nt2] += 1.0 - p1
    p_v = np.zeros((1, ny, ny))
    for y in range(ny):
        p_v[0, y, y] = 1.0
    return simulator.CoveringFamily(p_u=np.ones(1), p_y_given_u=p_y, p_v_given_uy=p_v)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if cfg.kind != "ldic":
        raise CliError(EXIT_SEMANTIC, "simulate requires an ldic config")
    out = Path(args.out) if args.out else None
    try:
        if args.mode == "states":
            trace = simulator.sample_states(args.n, cfg.fb, args.seed)
            rows = [("step", "s1", "s2")] + [
                (str(i), str(int(trace.s1[i])), str(int(trace.s2[i]))) for i in range(len(trace))
            ]
            m1 = float(trace.s1.mean())
            m2 = float(trace.s2.mean())
            se1 = math.sqrt(max(m1 * (1 - m1), 1e-12) / len(trace))
            se2 = math.sqrt(max(m2 * (1 - m2), 1e-12) / len(trace))
            summary = (
                f"empirical p1 = {_fmt(m1)} +/- {_fmt(se1)}; "
                f"empirical p2 = {_fmt(m2)} +/- {_fmt(se2)}\n"
            )
        elif args.mode == "covering":
            fam = _covering_family_from(cfg)
            rate = simulator.covering_success_rate(
                fam, n=args.n, rhat=args.rhat, eps=args.eps, trials=args.trials, seed=args.seed
            )
            se = math.sqrt(max(rate * (1 - rate), 1e-12) / args.trials)
            rows = [("n", "rhat", "eps", "trials", "success_rate")] + [
                (str(args.n), _fmt(args.rhat), _fmt(args.eps), str(args.trials), _fmt(rate))
            ]
            summary = f"covering success rate = {_fmt(rate)} +/- {_fmt(se)}\n"
        elif args.mode == "scheme":
            rates = [float(v) for v in args.rates.split(",")]
            if len(rates) != 6:
                raise CliError(
                    EXIT_SEMANTIC, "--rates needs r10,r11,r20,r22,rhat1,rhat2"
                )
            scheme_cfg = simulator.SchemeConfig(
                n=args.n,
                blocks=args.blocks,
                r10=rates[0], r11=rates[1], r20=rates[2],
                r22=rates[3], rhat1=rates[4], rhat2=rates[5],
                eps=args.eps,
                seed=args.seed,
                trials=args.trials,
            )
            result = simulator.simulate_scheme(cfg.ldic, cfg.fb, scheme_cfg)
            rows = [("trial", "w10", "w11", "w20", "w22", "dec1", "dec2", "ok1", "ok2")]
            for rec in result.trials:
                rows.append(
                    (
                        str(rec.trial),
                        *[str(v) for v in rec.true_messages],
                        "*" if rec.decoded_1 is None else f"{rec.decoded_1[0]}/{rec.decoded_1[1]}",
                        "*" if rec.decoded_2 is None else f"{rec.decoded_2[0]}/{rec.decoded_2[1]}",
                        str(int(rec.ok_1)),
                        str(int(rec.ok_2)),
                    )
                )
            p_bar = 1 - (result.error_rate_1 + result.error_rate_2) / 2
            se = math.sqrt(max(p_bar * (1 - p_bar), 1e-12) / scheme_cfg.trials)
            summary = (
                f"error rate user1 = {_fmt(result.error_rate_1)}, "
                f"user2 = {_fmt(result.error_rate_2)} "
                f"(success {_fmt(p_bar)} +/- {_fmt(se)})\n"
            )
        else:  # pragma: no cover - argparse restricts choices
            raise CliError(EXIT_SEMANTIC, f"unknown mode {args.mode}")
    except CapExceededError as exc:
        raise CliError(EXIT_RESOURCE, str(exc)) from exc
    except (SimulatorError, ChannelError) as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from exc
    sys.stdout.write(summary)
    if out:
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerows(rows)
            fh.write("# " + summary)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icfb",
        description="Rate regions for interference channels with generalized/intermittent feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cap = sub.add_parser("capacity", help="closed-form ldic capacity polytope")
    p_cap.add_argument("config")
    p_cap.add_argument("--p1", type=float, default=None)
    p_cap.add_argument("--p2", type=float, default=None)
    p_cap.add_argument("--sweep", type=float, default=None, metavar="STEP",
                       help="sweep (p1, p2) over a square grid with this step")
    p_cap.add_argument("--out", default=None)
    p_cap.set_defaults(func=cmd_capacity)

    p_inner = sub.add_parser("inner", help="inner-bound union over a distribution family")
    p_inner.add_argument("config")
    p_inner.add_argument("--theorem", choices=("1", "2", "schemeV"), default="2")
    p_inner.add_argument("--search", choices=("grid", "random", "uniform"), default="grid")
    p_inner.add_argument("--seed", type=int, default=0)
    p_inner.add_argument("--samples", type=int, default=0)
    p_inner.add_argument("--grid-step", type=float, default=0.25)
    p_inner.add_argument("--grid-cap", type=int, default=4096)
    p_inner.add_argument("--q-sizes", default="1")
    p_inner.add_argument("--out", default=None)
    p_inner.set_defaults(func=cmd_inner)

    p_cmp = sub.add_parser("compare", help="subset verdicts between two region files")
    p_cmp.add_argument("region_a")
    p_cmp.add_argument("region_b")
    p_cmp.add_argument("--tol", type=float, default=1e-9)
    p_cmp.add_argument("--out", default=None)
    p_cmp.set_defaults(func=cmd_compare)

    p_sim = sub.add_parser("simulate", help="state/covering/scheme simulation")
    p_sim.add_argument("config")
    p_sim.add_argument("--mode", choices=("states", "covering", "scheme"), required=True)
    p_sim.add_argument("--n", type=int, default=100)
    p_sim.add_argument("--B", dest="blocks", type=int, default=2)
    p_sim.add_argument("--trials", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--rates", default="0,0,0,0,0,0",
                       help="r10,r11,r20,r22,rhat1,rhat2 (scheme mode)")
    p_sim.add_argument("--rhat", type=float, default=1.0, help="compression rate (covering mode)")
    p_sim.add_argument("--eps", type=float, default=0.2)
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
