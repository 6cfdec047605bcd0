"""Command line interface: ``qdflow {graph,family,motherbody,verify}``.

Complex numbers are given as ``RE,IM``; JSON output stores them as ``[re, im]``.
Exit codes: 0 ok, 1 verification failure, 2 bad parameters, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bessel import FamilyParameter, algebraic_residual, family_quaddiff, overlay_distance
from .errors import DegenerateParameters, QdflowError
from .motherbody import (AlgebraicEquation, branch_at_origin, density_along, masses,
                         to_quaddiff)
from .quaddiff import VERTICAL, QuadDiff, critical_graph, trace
from .quaddiff.trace import DEFAULT_CONFIG
from .render import auto_viewport, render_svg, scene_from_document
from .verify import SUITES

SCHEMA = "qdflow/1"

EXIT_OK, EXIT_VERIFY, EXIT_PARAMS, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("qdflow")


def parse_complex(text: str) -> complex:
    """'RE,IM' -> complex; a bare 'RE' is accepted as a real number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _config(args):
    cfg = DEFAULT_CONFIG
    if getattr(args, "tol", None):
        cfg = replace(cfg, tol=args.tol)
    return cfg


def _foliation(qd: QuadDiff, viewport, n: int, cfg):
    """Non-critical trajectories through an n x n grid, both directions, short budget."""
    center, half = viewport
    budget = 0.75 * half
    small = replace(cfg, max_steps=2000)
    out = []
    ticks = (np.arange(n) + 0.5) / n * 2 - 1
    for y in ticks:
        for x in ticks:
            z = center + half * complex(x, y)
            if abs(z) < 1e-3 * half or min(abs(z - qd.a), abs(z - qd.b)) < 1e-3 * half:
                continue
            halves = [trace(qd, z, th, budget=budget, config=small).points for th in (0.0, math.pi)]
            pts = np.concatenate([halves[1][::-1], halves[0][1:]])
            out.append({"kind": "foliation", "points": [_pair(p) for p in pts]})
    return out


def _finish(doc: dict, args, qd: QuadDiff, cfg) -> None:
    """Optional extras, then write JSON and SVG (the SVG is always built from the JSON)."""
    if getattr(args, "orthogonal", False):
        vg = critical_graph(qd, args.budget, kind=VERTICAL, config=cfg)
        doc["orthogonal"] = [t.to_dict() for t in vg.trajectories]
    if getattr(args, "foliation", 0):
        scene = scene_from_document(doc)
        doc["foliation"] = _foliation(qd, auto_viewport(scene), args.foliation, cfg)
    # a JSON round trip normalises floats exactly as a later re-read would
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.json:
        Path(args.json).write_text(text + "\n")
    if args.svg:
        Path(args.svg).write_bytes(render_svg(scene_from_document(json.loads(text))))


def _summary(graph) -> str:
    g = graph.gate
    lines = [f"gate: exists={g.exists} branch={g.branch} "
             f"v+={g.v_plus:.6g} v-={g.v_minus:.6g}",
             f"short trajectories: {len(graph.short_trajectories)}"]
    for st in graph.short_trajectories:
        lines.append(f"  {st.pair[0]} -> {st.pair[1]}  length {st.path.arc_length:.6g}")
    for w in graph.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def cmd_graph(args) -> int:
    if args.lambda2 is not None:
        qd = QuadDiff.from_lambda2(args.lambda2, args.a, args.b)
    else:
        qd = QuadDiff(args.lam, args.a, args.b)
    cfg = _config(args)
    graph = critical_graph(qd, args.budget, config=cfg)
    doc = {"schema": SCHEMA, "command": "graph"}
    doc.update(graph.to_dict())
    _finish(doc, args, qd, cfg)
    print(_summary(graph))
    return EXIT_OK


def cmd_family(args) -> int:
    A = FamilyParameter(args.A)
    qd = family_quaddiff(A)
    cfg = _config(args)
    graph = critical_graph(qd, args.budget, config=cfg)
    doc = {"schema": SCHEMA, "command": "family", "A": _pair(A.A)}
    doc.update(graph.to_dict())
    doc["title"] = f"family A={A.A.real:g}{A.A.imag:+g}i"
    rc = EXIT_OK
    if args.overlay_n:
        ov = overlay_distance(A, args.overlay_n, graph)
        doc["overlay"] = {"n": args.overlay_n, "zeros": [_pair(z) for z in ov.zeros],
                          "max_dist": ov.max_dist, "mean_dist": ov.mean_dist,
                          "diameter": ov.diameter}
        print(f"overlay n={args.overlay_n}: mean distance {ov.mean_dist:.4g}, "
              f"max {ov.max_dist:.4g} (relative to diameter {ov.diameter:.4g})")
    if args.verify:
        n = args.verify_n
        # sample points well away from the support
        zs = [3.0 * max(abs(qd.a), abs(qd.b)) * complex(math.cos(t), math.sin(t))
              for t in (0.3, 2.4, 4.4)]
        rows = []
        for z in zs:
            r1, r2 = algebraic_residual(A, n, z), algebraic_residual(A, 2 * n, z)
            rows.append({"z": _pair(z), "n": n, "residual_n": r1, "residual_2n": r2,
                         "decreasing": r2 < r1})
            print(f"algebraic residual at z={z:.4g}: n={n}: {r1:.3e}  n={2 * n}: {r2:.3e}")
        doc["verify"] = rows
        if not all(r["decreasing"] for r in rows):
            rc = EXIT_VERIFY
    _finish(doc, args, qd, cfg)
    print(_summary(graph))
    return rc


def cmd_motherbody(args) -> int:
    eq = AlgebraicEquation(args.p, args.q, args.r)
    qd = to_quaddiff(eq)
    m = masses(eq)
    graph = critical_graph(qd, args.budget, config=_config(args))
    dens = []
    for st in graph.short_trajectories:
        d = density_along(eq, st.path)
        root0 = branch_at_origin(eq, st.path)
        dens.append({"pair": list(st.pair), "total_mass": d.total_mass,
                     "imag_fraction": d.imag_fraction, "negative_weights": d.negative_weights,
                     "sqrt_D_at_origin": None if root0 is None else _pair(root0)})
    doc = {
        "schema": SCHEMA, "command": "motherbody",
        "equation": eq.to_dict(),
        "masses": [_pair(m.m_plus), _pair(m.m_minus)],
        "real_mass_exists": m.real_mass_exists,
        "quaddiff": qd.to_dict(),
        "gate": graph.gate.to_dict(),
        "short_trajectories": [st.to_dict(with_points=False) for st in graph.short_trajectories],
        "densities": dens,
    }
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(f"masses: {m.m_plus:.6g}, {m.m_minus:.6g} (real mass exists: {m.real_mass_exists})")
    for d in dens:
        print(f"  {d['pair'][0]} -> {d['pair'][1]}: total mass {d['total_mass']:.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        kw = {"seed": args.seed} if args.seed is not None else {}
        if args.samples is not None:
            kw["samples"] = args.samples
        res = SUITES[name](**kw)
        print(res.table())
        print(f"{name}: {'PASS' if res.passed else 'FAIL'} ({res.seconds:.1f} s)\n")
        ok = ok and res.passed
    return EXIT_OK if ok else EXIT_VERIFY


def _add_output(p):
    p.add_argument("--svg", metavar="PATH", help="write an SVG picture")
    p.add_argument("--json", metavar="PATH", help="write the JSON document")
    p.add_argument("--budget", type=_positive, default=None, help="arc-length budget per trace")
    p.add_argument("--tol", type=_positive, default=None, help="local tolerance of the tracer")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph", help="critical graph of lambda^2 (z-a)(z-b)/z^4 dz^2")
    lam = g.add_mutually_exclusive_group(required=True)
    lam.add_argument("--lambda", dest="lam", type=parse_complex, metavar="RE,IM")
    lam.add_argument("--lambda2", type=parse_complex, metavar="RE,IM")
    g.add_argument("--a", type=parse_complex, required=True, metavar="RE,IM")
    g.add_argument("--b", type=parse_complex, required=True, metavar="RE,IM")
    g.add_argument("--orthogonal", action="store_true", help="add the vertical critical graph")
    g.add_argument("--foliation", type=int, default=0, metavar="N",
                   help="add non-critical trajectories through an N x N grid")
    _add_output(g)
    g.set_defaults(func=cmd_graph)

    f = sub.add_parser("family", help="critical graph of the Bessel family differential")
    f.add_argument("--A", type=parse_complex, required=True, metavar="RE,IM")
    f.add_argument("--overlay-n", type=int, default=0, metavar="N",
                   help="overlay the scaled zeros of B_N with alpha = A N")
    f.add_argument("--verify", action="store_true",
                   help="check the algebraic equation for the zero counting measure")
    f.add_argument("--verify-n", type=int, default=20, metavar="N")
    f.add_argument("--orthogonal", action="store_true")
    f.add_argument("--foliation", type=int, default=0, metavar="N")
    _add_output(f)
    f.set_defaults(func=cmd_family)

    m = sub.add_parser("motherbody", help="z^2 C^2 - (p z + q) C + r = 0")
    for name in "pqr":
        m.add_argument(f"--{name}", type=parse_complex, required=True, metavar="RE,IM")
    m.add_argument("--json", metavar="PATH")
    m.add_argument("--budget", type=_positive, default=None)
    m.add_argument("--tol", type=_positive, default=None)
    m.set_defaults(func=cmd_motherbody)

    v = sub.add_parser("verify", help="randomised invariant suites")
    v.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--samples", type=int, default=None)
    v.set_defaults(func=cmd_verify)
    return ap


_NUMERIC = re.compile(r"^-[0-9.]")


def _attach_negative_values(argv):
    # argparse takes "-2,-1" for an option; glue such values to their flag
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NUMERIC.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_negative_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DegenerateParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (QdflowError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
