"""Command-line interface.

Subcommands::

    dpdmeans test      run one test on two CSV files or a bundled dataset
    dpdmeans curve     DPD p-values over a grid of tuning values (CSV + SVG)
    dpdmeans simulate  Monte Carlo level/power study from a JSON config
    dpdmeans datasets  list or show the bundled datasets

Exit status: 0 success, 2 bad input, 3 estimator did not converge,
4 bad simulation config.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classical import ks_test, pooled_t_test, trimmed_t_test, wilcoxon_test
from .datasets import available, load, without_outliers
from .dpdtest import dpd_test
from .errors import ConvergenceError, DomainError
from .mdpde import Sample
from .simulate import SimulationConfig, run_level_power_study

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_CONFIG = 4

DEFAULT_TUNING = 0.2


class InputError(Exception):
    pass


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def read_sample_csv(path):
    """Read a one-column CSV of decimal values; the first line may be a header."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: cannot read ({exc})") from None
    values = []
    label = path.stem
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        cell = raw.strip()
        if not cell:
            continue
        if "," in cell:
            raise InputError(f"{path}:{lineno}: expected a single column, got {cell!r}")
        try:
            v = float(cell)
        except ValueError:
            if not seen_data and not values:
                label = cell
                seen_data = True
                continue
            raise InputError(f"{path}:{lineno}: not a decimal number: {cell!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: non-finite value {cell!r}")
        seen_data = True
        values.append(v)
    try:
        return Sample(np.array(values), label)
    except DomainError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_pair(args):
    """Return ``(name, x, y, outlier-deleted pair or None)``."""
    if args.dataset:
        if args.x or args.y:
            raise InputError("use either --dataset or --x/--y, not both")
        try:
            d = load(args.dataset)
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
        if len(d.samples) != 2:
            raise InputError(f"dataset {args.dataset!r} has {len(d.samples)} samples; "
                             "choose a two-sample view such as newcomb12 or newcomb13")
        clean = without_outliers(d)
        return d.name, d.sample_x, d.sample_y, (clean.sample_x, clean.sample_y)
    if not (args.x and args.y):
        raise InputError("give --dataset NAME or both --x PATH and --y PATH")
    if getattr(args, "drop_outliers", False):
        raise InputError("--drop-outliers needs a bundled dataset; CSV input carries no outlier flags")
    return f"{args.x} vs {args.y}", read_sample_csv(args.x), read_sample_csv(args.y), None


def _tuning(args):
    beta, gamma = args.beta, args.gamma
    if beta is None and gamma is None:
        beta = gamma = DEFAULT_TUNING
    elif beta is None:
        beta = gamma
    elif gamma is None:
        gamma = beta
    return beta, gamma


def _parse_grid(spec):
    try:
        parts = [float(p) for p in spec.split(":")]
    except ValueError:
        raise InputError(f"cannot parse grid {spec!r}; use start:step:stop or a comma list") from None
    if len(parts) == 3:
        start, step, stop = parts
        if not step > 0:
            raise InputError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = [round(start + i * step, 12) for i in range(count)]
    elif len(parts) == 1:
        grid = parts
    else:
        raise InputError(f"cannot parse grid {spec!r}")
    if any(not 0.0 <= g <= 1.0 for g in grid):
        raise InputError("grid values must lie in [0, 1]")
    return grid


def _grid_arg(spec):
    if "," in spec:
        try:
            grid = [float(p) for p in spec.split(",")]
        except ValueError:
            raise InputError(f"cannot parse grid {spec!r}") from None
        if any(not 0.0 <= g <= 1.0 for g in grid):
            raise InputError("grid values must lie in [0, 1]")
        return grid
    return _parse_grid(spec)


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def run_test(args):
    name, x, y, clean = _load_pair(args)
    if args.drop_outliers:
        x, y = clean
    beta, gamma = _tuning(args)
    method = args.method
    config = {"input": name, "method": method, "drop_outliers": bool(args.drop_outliers)}
    if method == "dpd":
        config.update(beta=beta, gamma=gamma)
        result = dpd_test(x, y, beta, gamma).as_dict()
    elif method == "pooled-t":
        result = pooled_t_test(x, y).as_dict()
    elif method == "trimmed-t":
        config["trim"] = args.trim
        result = trimmed_t_test(x, y, args.trim).as_dict()
    elif method == "wilcoxon":
        result = wilcoxon_test(x, y).as_dict()
    else:
        result = ks_test(x, y).as_dict()
    result.setdefault("n1", len(x))
    result.setdefault("n2", len(y))
    record = {"tool": "dpdmeans", "version": __version__, "config": config, "result": result}
    if args.format == "json":
        text = json.dumps(record, indent=2) + "\n"
    else:
        flat = {f"config.{k}": v for k, v in config.items()}
        for k, v in result.items():
            if isinstance(v, dict):
                flat.update({f"{k}.{kk}": vv for kk, vv in v.items()})
            else:
                flat[k] = v
        flat = {"version": __version__, **flat}
        text = ",".join(flat) + "\n" + ",".join(repr(v) if isinstance(v, float) else str(v)
                                                 for v in flat.values()) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def compute_curve(x, y, grid, clean=None):
    """DPD p-values with beta = gamma over ``grid``; failed points are ``None``."""
    def pvals(a, b):
        out = []
        for g in grid:
            try:
                out.append(dpd_test(a, b, g, g).p_value)
            except (ConvergenceError, DomainError):
                out.append(None)
        return out

    full = pvals(x, y)
    deleted = pvals(*clean) if clean is not None else None
    return full, deleted


def curve_csv(grid, full, deleted, config):
    def fmt(v):
        return "" if v is None else repr(float(v))

    lines = [f"# dpdmeans {__version__}", "# config " + json.dumps(config, sort_keys=True)]
    lines.append("gamma,p_full" + (",p_outlier_deleted" if deleted is not None else ""))
    for i, g in enumerate(grid):
        row = [repr(float(g)), fmt(full[i])]
        if deleted is not None:
            row.append(fmt(deleted[i]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def read_curve_csv(text):
    """Parse :func:`curve_csv` output back into ``(grid, full, deleted)``."""
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = rows[0].split(",")
    cols = [[] for _ in header]
    for ln in rows[1:]:
        for c, cell in zip(cols, ln.split(",")):
            c.append(float(cell) if cell else None)
    return cols[0], cols[1], (cols[2] if len(cols) > 2 else None)


def curve_svg(grid, full, deleted, title=""):
    """Static SVG plot of p-value curves against gamma."""
    width, height = 640, 400
    left, right, top, bottom = 60, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def px(g):
        return left + pw * g

    def py(p):
        return top + ph * (1.0 - p)

    def polyline(values, style):
        pts, segs = [], []
        for g, p in zip(grid, values):
            if p is None:
                if pts:
                    segs.append(pts)
                pts = []
                continue
            pts.append(f"{px(g):.2f},{py(p):.2f}")
        if pts:
            segs.append(pts)
        return "".join(
            f'<polyline fill="none" stroke="black" stroke-width="1.5" {style} points="{" ".join(s)}"/>'
            for s in segs
        )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{_xml(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(6):
        v = i / 5
        parts.append(f'<line x1="{px(v):.2f}" y1="{top + ph}" x2="{px(v):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(v):.2f}" y="{top + ph + 20}" text-anchor="middle" font-size="11">{v:.1f}</text>')
        parts.append(f'<line x1="{left - 5}" y1="{py(v):.2f}" x2="{left}" y2="{py(v):.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{py(v) + 4:.2f}" text-anchor="end" font-size="11">{v:.1f}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle" font-size="12">gamma (= beta)</text>')
    parts.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 15 {top + ph / 2})">p-value</text>')
    parts.append(polyline(full, ""))
    legend = [("full data", "")]
    if deleted is not None:
        parts.append(polyline(deleted, 'stroke-dasharray="6,4"'))
        legend.append(("outliers deleted", 'stroke-dasharray="6,4"'))
    for i, (label, style) in enumerate(legend):
        y0 = top + 12 + 18 * i
        x0 = left + pw - 150
        parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + 30}" y2="{y0}" stroke="black" stroke-width="1.5" {style}/>')
        parts.append(f'<text x="{x0 + 36}" y="{y0 + 4}" font-size="11">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def run_curve(args):
    name, x, y, clean = _load_pair(args)
    grid = _grid_arg(args.grid)
    full, deleted = compute_curve(x, y, grid, clean if args.drop_outliers else None)
    config = {"input": name, "grid": grid, "beta_rule": "equal_to_gamma",
              "drop_outliers": bool(args.drop_outliers)}
    _emit(curve_csv(grid, full, deleted, config), args.out)
    if args.svg:
        Path(args.svg).write_text(curve_svg(grid, full, deleted, name), encoding="utf-8")
    return EXIT_OK


def run_simulate(args):
    try:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{args.config}: cannot read ({exc})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{args.config}: top level must be an object")
    if args.seed is not None:
        data["master_seed"] = args.seed
    try:
        cfg = SimulationConfig.from_dict(data)
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"{args.config}: {exc}") from None
    report = run_level_power_study(cfg, workers=args.workers)
    _emit(report.to_csv(), args.out)
    return EXIT_OK


def run_datasets(args):
    if args.action == "list":
        for name in available():
            d = load(name)
            sizes = "/".join(str(len(s)) for s in d.samples)
            sys.stdout.write(f"{name}\t{sizes}\t{d.provenance}\n")
        return EXIT_OK
    if not args.name:
        raise InputError("datasets show needs a dataset name")
    try:
        d = load(args.name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    if args.drop_outliers:
        d = without_outliers(d)
    record = {
        "name": d.name,
        "provenance": d.provenance,
        "note": d.note,
        "samples": [
            {"label": s.label, "values": list(t), "outliers": list(o)}
            for s, t, o in zip(d.samples, d.texts, d.outliers)
        ],
    }
    sys.stdout.write(json.dumps(record, indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="dpdmeans", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dpdmeans {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("--dataset", help="bundled dataset name (see 'datasets list')")
        p.add_argument("--x", help="CSV file with the first sample")
        p.add_argument("--y", help="CSV file with the second sample")
        p.add_argument("--drop-outliers", action="store_true", help="remove flagged outliers first")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("test", help="run one two-sample test")
    add_input(p)
    p.add_argument("--method", choices=["dpd", "pooled-t", "trimmed-t", "wilcoxon", "ks"], default="dpd")
    p.add_argument("--beta", type=float, help=f"estimator tuning (default: gamma, else {DEFAULT_TUNING})")
    p.add_argument("--gamma", type=float, help=f"divergence tuning (default: beta, else {DEFAULT_TUNING})")
    p.add_argument("--trim", type=float, default=0.2, help="trimming fraction for trimmed-t")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=run_test)

    p = sub.add_parser("curve", help="DPD p-values over a gamma grid with beta = gamma")
    add_input(p)
    p.add_argument("--grid", default="0:0.05:1", help="start:step:stop or comma list (default 0:0.05:1)")
    p.add_argument("--svg", help="also write an SVG plot to this path")
    p.set_defaults(func=run_curve)

    p = sub.add_parser("simulate", help="Monte Carlo level/power study")
    p.add_argument("config", help="JSON configuration file")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("datasets", help="list or show bundled datasets")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.add_argument("--drop-outliers", action="store_true")
    p.set_defaults(func=run_datasets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"dpdmeans: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"dpdmeans: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"dpdmeans: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"dpdmeans: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
