"""Command-line front end.

Subcommands emit the data behind the four figures of interest (indicatrix,
bound curves, Monte Carlo comparison, higher-dimensional sweep) as CSV or
JSON, optionally with a minimal polyline SVG, plus a `verify` subcommand
running the property suites.

Exit codes: 0 success, 1 verification failure, 2 usage error.  The
environment variable QEST_THREADS caps trial parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from . import measurements as ms
from . import simulate as sim
from . import states as st
from . import verify as vf


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_table(header: list, rows: list, out: str | None, fmt: str) -> None:
    """Write a table as CSV (repr-round-trippable floats) or JSON."""
    if fmt == "json":
        doc = [dict(zip(header, row)) for row in rows]
        text = json.dumps(doc, indent=1) + "\n"
    else:
        lines = [",".join(header)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def write_svg(path: str, series: list, xlabel: str, ylabel: str,
              width: int = 640, height: int = 420) -> None:
    """Minimal polyline plot; data files remain the source of truth."""
    margin = 50
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
             f'y2="{height - margin}" stroke="black"/>',
             f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
             f'y2="{height - margin}" stroke="black"/>',
             f'<text x="{width // 2}" y="{height - 10}" font-size="12" '
             f'text-anchor="middle">{xlabel}</text>',
             f'<text x="14" y="{height // 2}" font-size="12" text-anchor="middle" '
             f'transform="rotate(-90 14 {height // 2})">{ylabel}</text>']
    for k, (name, sx, sy) in enumerate(series):
        pts = " ".join(f"{px(float(a)):.2f},{py(float(b)):.2f}" for a, b in zip(sx, sy))
        color = colors[k % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{width - margin + 4}" y="{margin + 14 * k + 10}" '
                     f'font-size="11" fill="{color}">{name}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _parse_vec(text: str, n: int = 3) -> np.ndarray:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
    return np.array(parts)


def _rot_weight_values(kind: str, r: float, f: float, g: float) -> bd.RotWeight:
    if kind == "identity":
        return bd.RotWeight(1.0, 1.0)
    if kind == "qfi":
        return bd.qfi_rot_weight(r)
    return bd.RotWeight(f, g)


def cmd_bounds(args) -> int:
    direction = _parse_vec(args.dir)
    norm = np.linalg.norm(direction)
    if norm == 0:
        print("error: direction must be nonzero", file=sys.stderr)
        return 2
    direction = direction / norm
    if args.weight == "custom" and (args.f is None or args.g is None):
        print("error: --weight custom requires --f and --g", file=sys.stderr)
        return 2
    radii = np.arange(0.0, args.rmax + 1e-12, args.rstep)
    tomo = ms.qubit_tomography_povm()
    rows = []
    worst = 0.0
    for r in radii:
        x = r * direction
        w = _rot_weight_values(args.weight, float(r), args.f or 1.0, args.g or 1.0)
        c = bd.c_opt_closed(w, float(r))
        ct = bd.c_tomo_closed(w, x)
        h = bd.rot_weight_along(w, direction)
        j = st.qubit_qfi(x)
        g_num = bd.classical_fisher(st.qubit_slds(x), tomo)
        disc = max(abs(c - bd.qcr_min_trace(j, h).bound),
                   abs(ct - float(np.trace(h @ np.linalg.inv(g_num)))))
        worst = max(worst, disc)
        rows.append([float(r), float(c), float(ct), float(disc)])
    emit_table(["r", "c", "cT", "discrepancy"], rows, args.out, args.format)
    if args.svg and args.out:
        write_svg(str(Path(args.out).with_suffix(".svg")),
                  [("c", [row[0] for row in rows], [row[1] for row in rows]),
                   ("cT", [row[0] for row in rows], [row[2] for row in rows])],
                  "r", "merit")
    if worst >= 1e-6:
        print(f"error: closed-form/numeric discrepancy {worst:.3e} >= 1e-6", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args) -> int:
    x0 = _parse_vec(args.x0)
    weight = args.weight
    if weight == "custom":
        if not args.weight_matrix:
            print("error: --weight custom requires --weight-matrix", file=sys.stderr)
            return 2
        weight = np.array(json.loads(args.weight_matrix), dtype=float)
    try:
        cfg = sim.RunConfig(x0=x0, weight=weight, m_max=args.m, reps=args.reps,
                            seed=args.seed, adapt_update_every=args.update_every,
                            mle_restarts=args.mle_restarts, eps_ball=args.eps_ball)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    kinds = {"both": ("tomography", "adaptive"), "tomo": ("tomography",),
             "adaptive": ("adaptive",)}[args.estimator]
    results = sim.monte_carlo(cfg, estimators=kinds)
    base = Path(args.out) if args.out else Path("simulate")
    for kind, summary in results.items():
        if args.format == "json":
            path = base.parent / f"{base.stem}_{kind}.json"
            path.write_text(json.dumps(summary.to_json_dict(), indent=1) + "\n")
        else:
            path = base.parent / f"{base.stem}_{kind}.csv"
            path.write_text(summary.to_csv())
        print(f"wrote {path}")
        total_steps = cfg.reps * cfg.m_max
        if kind == "adaptive" and summary.n_opt_failed > 0.01 * total_steps:
            print(f"warning: likelihood maximization failed on "
                  f"{summary.n_opt_failed}/{total_steps} steps", file=sys.stderr)
        if args.svg:
            ms_ax = [int(m) for m in summary.checkpoints]
            write_svg(str(base.parent / f"{base.stem}_{kind}.svg"),
                      [("2mB", ms_ax, list(summary.mean_bures)),
                       ("cOpt", ms_ax, [summary.c_opt] * len(ms_ax)),
                       ("cTomo", ms_ax, [summary.c_tomo] * len(ms_ax))],
                      "m", "2m x Bures")
    return 0


def cmd_indicatrix(args) -> int:
    x = _parse_vec(args.x)
    if float(x @ x) >= 1.0:
        print("error: point must lie strictly inside the unit ball", file=sys.stderr)
        return 2
    h = sim.resolve_weight(args.weight, x)
    try:
        plane_idx = tuple(int(p) - 1 for p in args.plane.split(","))
        pts = bd.indicatrix_points(h, plane=plane_idx, n=args.n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = [[float(a), float(b)] for a, b in pts]
    emit_table(["v1", "v2"], rows, args.out, args.format)
    if args.svg and args.out:
        closed = rows + rows[:1]
        write_svg(str(Path(args.out).with_suffix(".svg")),
                  [("indicatrix", [row[0] for row in closed], [row[1] for row in closed])],
                  "v1", "v2")
    return 0


def cmd_mub(args) -> int:
    try:
        family = ms.mub_bases(args.q)
    except ms.UnsupportedDimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.dump:
        povm = ms.mub_tomography_povm(family)
        doc = {
            "q": family.q,
            "name": family.name,
            "maxOverlapDefect": family.max_overlap_defect(),
            "bases": [[[[float(z.real), float(z.imag)] for z in vec] for vec in basis]
                      for basis in family.bases],
            "tomographyPovm": povm.to_json_dict(),
        }
        text = json.dumps(doc, indent=1) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    # bound sweep along one affine coordinate direction
    q = family.q
    a_idx, i_idx = (int(p) - 1 for p in args.dir.split(","))
    if not (0 <= a_idx <= q) or not (0 <= i_idx <= q - 2):
        print(f"error: direction {args.dir} out of range for q={q}", file=sys.stderr)
        return 2
    tomo = ms.mub_tomography_povm(family)
    rows = []
    for r in np.arange(args.rstep, args.rmax + 1e-12, args.rstep):
        coords = np.zeros((q + 1, q - 1))
        coords[a_idx, i_idx] = r
        try:
            derivs = st.mub_derivatives(coords, family)
        except st.NotPositiveError:
            break
        j = st.model_qfi(derivs)
        g = bd.classical_fisher(derivs, tomo)
        ct = float(np.trace(j @ np.linalg.inv(g)))
        cgm = bd.gm_lower_bound(j, j, q)
        rows.append([float(r), float(cgm), float(ct)])
    emit_table(["r", "cGM", "cT"], rows, args.out, args.format)
    if args.svg and args.out:
        write_svg(str(Path(args.out).with_suffix(".svg")),
                  [("cGM", [row[0] for row in rows], [row[1] for row in rows]),
                   ("cT", [row[0] for row in rows], [row[2] for row in rows])],
                  "r", "merit")
    return 0


def cmd_verify(args) -> int:
    results = vf.run_suite(args.suite, seed=args.seed)
    for res in results:
        print(res.line())
    n_fail = sum(0 if r.passed else 1 for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    if args.out:
        doc = [{"name": r.name, "passed": bool(r.passed), "detail": r.detail} for r in results]
        Path(args.out).write_text(json.dumps(doc, indent=1) + "\n")
    return 1 if n_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qest",
        description="Estimation bounds and Monte Carlo comparison for qubit tomography")
    parser.add_argument("--config", help="JSON file whose keys replace flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--svg", action="store_true",
                       help="also write a minimal polyline SVG next to --out")

    p = sub.add_parser("bounds", help="merit curves c(r) and cT(r) for a rotational weight")
    p.add_argument("--weight", choices=("identity", "qfi", "custom"), default="identity")
    p.add_argument("--f", type=float, help="transverse value for --weight custom")
    p.add_argument("--g", type=float, help="radial value for --weight custom")
    p.add_argument("--dir", default="1,1,1", help="direction, comma separated")
    p.add_argument("--rmax", type=float, default=0.95)
    p.add_argument("--rstep", type=float, default=0.05)
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of tomography vs adaptive")
    p.add_argument("--x0", default="0.55,0.55,0.55")
    p.add_argument("--weight", choices=("identity", "qfi", "tomography", "custom"),
                   default="qfi")
    p.add_argument("--weight-matrix", help="JSON 3x3 matrix for --weight custom")
    p.add_argument("--m", type=int, default=3000)
    p.add_argument("--reps", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=("both", "tomo", "adaptive"), default="both")
    p.add_argument("--update-every", type=int, default=1)
    p.add_argument("--mle-restarts", type=int, default=3)
    p.add_argument("--eps-ball", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("indicatrix", help="unit-merit locus of a weight in a plane")
    p.add_argument("--x", default="0.5,0.5,0")
    p.add_argument("--weight", choices=("identity", "qfi", "tomography"),
                   default="tomography")
    p.add_argument("--plane", default="1,2", help="pair of axis indices, 1-based")
    p.add_argument("--n", type=int, default=360)
    common(p)
    p.set_defaults(func=cmd_indicatrix)

    p = sub.add_parser("mub", help="mutually unbiased bases: dump or bound sweep")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--dump", action="store_true", help="serialize bases and POVM")
    p.add_argument("--bounds", action="store_true", help="sweep cGM and cT along --dir")
    p.add_argument("--dir", default="1,1", help="affine coordinate (basis,vector), 1-based")
    p.add_argument("--rmax", type=float, default=0.9)
    p.add_argument("--rstep", type=float, default=0.05)
    common(p)
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("verify", help="run a property-check suite")
    p.add_argument("--suite", choices=vf.SUITES, default="all")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="also write a JSON report here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # --config values become defaults, explicit flags still win
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            config = json.loads(Path(argv[idx + 1]).read_text())
        except (IndexError, OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        del argv[idx:idx + 2]
        extra = []
        for key, value in config.items():
            if isinstance(value, bool):
                if value:
                    extra.append(f"--{key}")
            else:
                extra.extend([f"--{key}", str(value)])
        if argv:
            argv = [argv[0]] + extra + argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
