"""Command-line entry point.

    hydradiv ball --height 2 --radius 6
    hydradiv divergence --height 1 --rmin 2 --rmax 15 --pairs antipodal --out t.csv
    hydradiv build-detour --height 3 --radius 4 --out path.json
    hydradiv verify --suite acceptance --out-dir results/

Exit status: 0 ok, 1 invalid input, 2 budget exhausted (partial output is
written with certified=false).

``--config FILE`` reads flat ``key = value`` lines whose keys mirror the long
flags (``radius = 5``, ``pairs = corner``); flags given on the command line win.
The cache directory can also be set with the HYDRADIV_CACHE environment
variable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .builder import BuildError, CornerSpec, build_detour, verification_report
from .cayley import CACHE_ENV, BallIndex, BudgetExceeded, EdgeRecord, PathRec, ball
from .checkers import classify
from .divergence import (
    DEFAULT_BUDGET,
    GrowthTable,
    _row,
    detour_distance,
    eval_p,
    eval_q_comb,
    mu_sample,
    origin_ball,
)
from .group import (
    Element,
    InvalidWordError,
    canonicalize,
    encode,
    format_word,
    identity_element,
    parse_word,
)

SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2


class UsageError(ValueError):
    pass


def read_config(path) -> dict:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _element(text: str | None, d: int) -> Element:
    if text is None:
        return identity_element(d)
    return canonicalize(parse_word(text, d), d)


def _cache(args):
    return args.cache or os.environ.get(CACHE_ENV)


def _dump(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_ball(args) -> int:
    d = args.height
    center = _element(args.center, d)
    B = ball(center, args.radius, budget=args.budget, cache=_cache(args))
    _dump({
        "schema": f"hydradiv/ball/{SCHEMA}",
        "height": d,
        "center": format_word(center.word()),
        "radius": args.radius,
        "sphere_sizes": B.sphere_sizes(),
        "ball_size": len(B),
    }, args.out)
    return EXIT_OK


def _parse_edge(text: str, d: int) -> EdgeRecord:
    parts = [x.strip() for x in text.split(",")]
    if len(parts) != 3:
        raise UsageError("--edge expects WORD,i,+1 or WORD,i,-1")
    word, i, s = parts
    i, s = int(i), int(s)
    if s not in (1, -1) or not 0 <= i <= d:
        raise UsageError("edge index or direction out of range")
    return EdgeRecord(_element(word or None, d), i, s)


def cmd_hyperplane(args) -> int:
    from .hyperplane import dual_hyperplane, separates, traces

    d = args.height
    region = ball(identity_element(d), args.radius, budget=args.budget, cache=_cache(args))
    e = _parse_edge(args.edge, d)
    H = dual_hyperplane(e, region)
    smooth, rugged = traces(H)
    first = H.members[0]
    sep = []
    probes = [(first.tail, first.head)]
    if len(H.members) > 1:
        probes.append((first.tail, H.members[-1].tail))
    for u, v in probes:
        rec = {"u": format_word(u.word()), "v": format_word(v.word())}
        for level in range(max(H.height, 1), d + 1):
            rec[f"level{level}"] = separates(H, u, v, region, level)
        sep.append(rec)
    _dump({
        "schema": f"hydradiv/hyperplane/{SCHEMA}",
        "height": H.height,
        "class_size": len(H.members),
        "partial": H.partial,
        "smooth_trace": {"start": format_word(smooth.start.word()), "letters": format_word(smooth.letters)},
        "rugged_trace": {"start": format_word(rugged.start.word()), "letters": format_word(rugged.letters)},
        "separation": sep,
    }, args.out)
    return EXIT_OK


def _parse_pairs(text: str):
    if text in ("corner", "antipodal", "exhaustive"):
        return text, 0
    if text.startswith("sample="):
        n = int(text.split("=", 1)[1])
        if n < 0:
            raise UsageError("sample count must be >= 0")
        return "sample", n
    raise UsageError(f"unknown pair policy {text!r}")


def divergence_table(d: int, rmin: int, rmax: int, pairs: str, budget: int, seed: int) -> GrowthTable:
    policy, n = _parse_pairs(pairs)
    O = identity_element(d)
    table = GrowthTable(d, pairs)
    for r in range(rmin, rmax + 1):
        row, _ = mu_sample(O, r, n, budget=budget, policy=policy, seed=seed)
        row.pair = pairs
        table.add(row)
    return table


def cmd_divergence(args) -> int:
    if args.rmin > args.rmax or args.rmin < 1:
        raise UsageError("empty or invalid r-range")
    if args.budget <= 0:
        raise UsageError("budget must be positive")
    table = divergence_table(args.height, args.rmin, args.rmax, args.pairs, args.budget, args.seed)
    text = table.to_csv()
    if args.out:
        Path(args.out).write_text(text)
        plot = args.plot or str(Path(args.out).with_suffix(".svg"))
        Path(plot).write_text(loglog_svg(table))
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(x.certified for x in table.rows) else EXIT_BUDGET


def cmd_build_detour(args) -> int:
    d = args.height
    O = identity_element(d)
    P = _element(args.p, d) if args.p else None
    Q = _element(args.q, d) if args.q else None
    spec = CornerSpec(O, args.radius, P, Q)
    B = ball(O, args.radius, budget=args.budget, cache=_cache(args))
    path = build_detour(spec, B)
    rep = verification_report(path, spec, B)
    _dump({
        "schema": f"hydradiv/detour/{SCHEMA}",
        "height": d,
        "r": args.radius,
        "P": format_word(spec.P.word()),
        "Q": format_word(spec.Q.word()),
        "letters": format_word(path.letters),
        "vertices": [encode(v).hex() for v in path.vertices()],
        "verification": rep,
    }, args.out)
    return EXIT_OK if rep["avoids_ball"] else EXIT_INVALID


def cmd_classify(args) -> int:
    d = args.height
    O = identity_element(d)
    start = _element(args.start, d)
    p = PathRec(start, parse_word(args.path, d))
    region = ball(O, args.region or 2 * args.radius + len(p) + 1, budget=args.budget, cache=_cache(args))
    c = classify(p, O, args.radius, region)
    out = {"schema": f"hydradiv/classification/{SCHEMA}", "height": d, "r": args.radius,
           "start": format_word(start.word()), "path": format_word(p.letters)}
    out.update(c.to_dict())
    _dump(out, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_acceptance

    if args.suite != "acceptance":
        raise UsageError(f"unknown suite {args.suite!r}")
    results = run_acceptance(args.out_dir, budget=args.budget, log=lambda s: print(s, file=sys.stderr))
    for k, v in results.items():
        print(f"{k}: {'PASS' if v else 'FAIL'}")
    return EXIT_OK if all(results.values()) else EXIT_INVALID


def cmd_export(args) -> int:
    d = args.height
    B = ball(_element(args.center, d), args.radius, budget=args.budget, cache=_cache(args))
    if args.format == "bin":
        Path(args.out).write_bytes(B.to_bytes())
    else:
        lines = ["id,distance,encoding,word"]
        for vid, f in enumerate(B.forms):
            v = Element(d, f)
            lines.append(f"{vid},{int(B.dist[vid])},{encode(v).hex()},{format_word(v.word())}")
        Path(args.out).write_text("\n".join(lines) + "\n")
    return EXIT_OK


# plotting

def loglog_svg(table: GrowthTable, width: int = 480, height: int = 360) -> str:
    """Static log-log plot of measured lengths with the two bound polynomials."""
    rows = [x for x in table.rows if x.r > 0]
    series = {
        "measured": [(x.r, x.length) for x in rows if x.length],
        "p_d": [(x.r, float(x.p_d)) for x in rows if x.p_d > 0],
        "q_d_comb": [(x.r, float(x.q_d_comb)) for x in rows],
    }
    pts = [p for s in series.values() for p in s]
    pad = 50
    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if not pts:
        svg.append("</svg>")
        return "\n".join(svg) + "\n"
    lx = [math.log10(p[0]) for p in pts]
    ly = [math.log10(p[1]) for p in pts]
    x0, x1 = min(lx), max(lx) if max(lx) > min(lx) else min(lx) + 1
    y0, y1 = min(ly), max(ly) if max(ly) > min(ly) else min(ly) + 1

    def sx(v):
        return pad + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * pad)

    svg.append(f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>')
    svg.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>')
    svg.append(f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">r (log)</text>')
    svg.append(f'<text x="14" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 14 {height / 2:.1f})" '
               f'text-anchor="middle">length (log)</text>')
    svg.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">'
               f'd={table.d}, pairs={table.pairs}</text>')
    colours = {"measured": "black", "p_d": "#1f77b4", "q_d_comb": "#d62728"}
    for n, (name, s) in enumerate(series.items()):
        if not s:
            continue
        c = colours[name]
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in s)
        dash = "" if name == "measured" else ' stroke-dasharray="5,3"'
        svg.append(f'<polyline points="{coords}" fill="none" stroke="{c}"{dash}/>')
        if name == "measured":
            for a, b in s:
                svg.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="{c}"/>')
        svg.append(f'<text x="{width - pad - 80}" y="{pad + 14 * n}" font-size="11" fill="{c}">{name}</text>')
    svg.append("</svg>")
    return "\n".join(svg) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hydradiv", description="Divergence experiments on the groups G_d.")
    ap.add_argument("--config", help="flat key = value file; flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, radius=True):
        p.add_argument("--height", type=int, required=False, default=None)
        if radius:
            p.add_argument("--radius", type=int, default=None)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        p.add_argument("--cache", default=None)
        p.add_argument("--out", default=None)

    p = sub.add_parser("ball", help="sphere sizes of a ball")
    common(p)
    p.add_argument("--center", default=None)
    p.set_defaults(func=cmd_ball, need=("height", "radius"))

    p = sub.add_parser("hyperplane", help="dual class of an edge inside a ball")
    common(p)
    p.add_argument("--edge", default=None)
    p.set_defaults(func=cmd_hyperplane, need=("height", "radius", "edge"))

    p = sub.add_parser("divergence", help="detour lengths over a range of radii")
    common(p, radius=False)
    p.add_argument("--rmin", type=int, default=None)
    p.add_argument("--rmax", type=int, default=None)
    p.add_argument("--pairs", default="corner")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_divergence, need=("height", "rmin", "rmax"))

    p = sub.add_parser("build-detour", help="constructed detour path with verification")
    common(p)
    p.add_argument("--p", default=None)
    p.add_argument("--q", default=None)
    p.set_defaults(func=cmd_build_detour, need=("height", "radius"))

    p = sub.add_parser("classify", help="structural flags of a path")
    common(p)
    p.add_argument("--path", default="")
    p.add_argument("--start", default=None)
    p.add_argument("--region", type=int, default=None)
    p.set_defaults(func=cmd_classify, need=("height", "radius"))

    p = sub.add_parser("verify", help="run a fixed experiment grid")
    p.add_argument("--suite", default="acceptance")
    p.add_argument("--out-dir", default="acceptance-results")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_verify, need=())

    p = sub.add_parser("export", help="write a ball as CSV or as a binary cache file")
    common(p)
    p.add_argument("--center", default=None)
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    p.set_defaults(func=cmd_export, need=("height", "radius", "out"))
    return ap


def _apply_config(ap, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    conf = read_config(known.config)
    # defaults go on every subparser; explicit flags still take precedence
    for action in ap._subparsers._group_actions:
        for name, sp in action.choices.items():
            valid = {a.dest: a for a in sp._actions}
            values = {}
            for k, v in conf.items():
                if k in valid and k not in ("func", "need", "help"):
                    conv = valid[k].type or str
                    values[k] = conv(v)
            sp.set_defaults(**values)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
        args = ap.parse_args(argv)
        missing = [k for k in args.need if getattr(args, k, None) is None]
        if missing:
            raise UsageError("missing required options: " + ", ".join("--" + m.replace("_", "-") for m in missing))
        if getattr(args, "height", None) is not None and args.height < 1:
            raise UsageError("--height must be >= 1")
        if getattr(args, "radius", None) is not None and args.radius < 0:
            raise UsageError("--radius must be >= 0")
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc} (reached radius {exc.reached_radius})", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, InvalidWordError, ValueError, BuildError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
