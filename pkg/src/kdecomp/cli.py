"""Command-line interface.

Subcommands: ``density``, ``decompose``, ``test``, ``counts`` and
``export-svg``. Each writes its main CSV (or SVG) to stdout or ``-o``;
``--report`` and ``--figure`` write the secondary table and a matplotlib
figure alongside. Exit status is 0 on success, 1 on bad data and 2 on
bad usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bandwidth import BandwidthRule
from .data import (
    PRESET_BINNINGS,
    DatasetSchema,
    bin_categories,
    category_counts,
    counts_csv,
    load_csv,
    vote_weights,
)
from .density import KERNEL_SCHEMES, decompose, fit, reaggregate
from .errors import KdecompError, ValidationError
from .inference import ShareMatrix, pearson_test, share_matrix
from .svg import COMPOSITE, parse_curves, render_svg

log = logging.getLogger("kdecomp")

DEFAULT_GRID_POINTS = 201
FMT = "{:.15g}".format


def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:count, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:count, got {text!r}") from None
    if n < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"grid needs count >= 1 and lo <= hi, got {text!r}")
    return lo, hi, n


def _bandwidth(text):
    try:
        return BandwidthRule.parse(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _effective_n(text):
    if text.strip().lower() == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"effective-n must be 'auto' or a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("effective-n must be positive")
    return value


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _data_options():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("input data")
    g.add_argument("--value-col", default="value", help="column holding the estimates (default: value)")
    g.add_argument("--paper-col", default="paper", help="column holding paper ids (default: paper)")
    g.add_argument("--label", action="append", default=[], metavar="DIM[=COL]",
                   help="read a category label from a column; repeatable")
    g.add_argument("--positive-col", help="column flagging positive-only estimates")
    g.add_argument("--positive-default", type=_bool, default=True, metavar="BOOL",
                   help="positive-only flag for positive values when there is no flag column (default: true)")
    g.add_argument("--bin", action="append", default=[], metavar="DIM=PRESET[:SOURCE]",
                   help=f"derive DIM from label SOURCE with a preset binning ({', '.join(PRESET_BINNINGS)})")
    g.add_argument("--strict", action="store_true", help="fail on the first malformed row")
    return p


def _fit_options():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("density")
    g.add_argument("--kernel", choices=KERNEL_SCHEMES, default="weibull-gumbel")
    g.add_argument("--bandwidth", type=_bandwidth, default=BandwidthRule.silverman(),
                   metavar="{silverman,sd,fixed=V}")
    g.add_argument("--weights", choices=("estimate", "paper"), default="estimate",
                   help="one vote per estimate or per paper")
    return p


def _output_options(report=False):
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("output")
    g.add_argument("-o", "--output", help="write the main CSV here instead of stdout")
    g.add_argument("--figure", help="also render a matplotlib figure to this file (.png, .pdf, .svg)")
    if report:
        g.add_argument("--report", help="write the secondary report CSV here instead of stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdecomp", description="Composite kernel densities, their decomposition and equality-of-proportions tests."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key=value file of option defaults; command-line flags win")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    data, fitting = _data_options(), _fit_options()

    p = sub.add_parser("density", parents=[data, fitting, _output_options()],
                       help="kernel density curve (x, pdf, cdf)")
    p.add_argument("input")
    p.add_argument("--grid", type=_grid, metavar="LO:HI:COUNT",
                   help="evaluation grid; write --grid=LO:HI:COUNT when LO is negative")

    p = sub.add_parser("decompose", parents=[data, fitting, _output_options(report=True)],
                       help="component curves (component, x, weighted pdf) and weights")
    p.add_argument("input")
    p.add_argument("--by", required=True, metavar="DIM", help="label to decompose by")
    p.add_argument("--component-bandwidth", choices=("global", "per-component"), default="global")
    p.add_argument("--grid", type=_grid, metavar="LO:HI:COUNT")

    p = sub.add_parser("test", parents=[data, fitting, _output_options(report=True)],
                       help="share matrix and Pearson equality-of-proportions test")
    p.add_argument("input", nargs="?")
    p.add_argument("--share-matrix", metavar="FILE", help="test a precomputed share matrix instead of raw data")
    p.add_argument("--by", metavar="DIM")
    p.add_argument("-p", "--quantiles", type=int, default=5)
    p.add_argument("--effective-n", type=_effective_n, default="auto", metavar="{auto,N}")
    p.add_argument("--component-bandwidth", choices=("global", "per-component"), default="global")
    p.add_argument("--orientation", choices=("table", "components"), default="table")

    p = sub.add_parser("counts", parents=[data], help="observation count per category")
    p.add_argument("input")
    p.add_argument("--by", required=True, metavar="DIM")
    p.add_argument("-o", "--output")

    p = sub.add_parser("export-svg", help="render a curve CSV as a standalone SVG chart")
    p.add_argument("curves", help="curve CSV from density or decompose ('-' for stdin)")
    p.add_argument("-o", "--output")
    p.add_argument("--title", default="")
    return parser


def read_config(path) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"{path}:{n}: expected key=value, got {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser, cfg):
    list_keys = {"label", "bin"}
    bool_keys = {"strict", "verbose"}
    defaults = {}
    for key, value in cfg.items():
        if key in list_keys:
            defaults[key] = [v.strip() for v in value.split(",") if v.strip()]
        elif key in bool_keys:
            defaults[key] = _bool(value)
        else:
            defaults[key] = value
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subs.choices.values():
        sp.set_defaults(**defaults)


# ---------------------------------------------------------------------------


def _schema(args, extra_labels=()):
    labels = {}
    for spec in [*args.label, *extra_labels]:
        dim, _, col = spec.partition("=")
        labels[dim.strip()] = (col or dim).strip()
    for b in args.bin:
        dim, _, rest = b.partition("=")
        _, _, source = rest.partition(":")
        src = (source or dim).strip()
        if src not in labels:
            labels[src] = src
    return DatasetSchema(
        value_column=args.value_col,
        paper_id_column=args.paper_col,
        label_columns=labels,
        positive_only_column=args.positive_col,
        require_paper_id=getattr(args, "weights", "estimate") == "paper",
    )


def _load(args, by=None):
    """Load, bin and return (observations, category order for ``by``)."""
    binned = {b.partition("=")[0].strip() for b in args.bin}
    declared = {s.partition("=")[0].strip() for s in args.label}
    extra = [by] if by and by not in binned and by not in declared else []
    errors = []
    obs = load_csv(args.input, _schema(args, extra), strict=args.strict,
                   positive_default=args.positive_default, errors=errors)
    for e in errors:
        print(f"warning: skipped {e}", file=sys.stderr)
    log.info("loaded %d observations from %s", len(obs), args.input)
    order = None
    for b in args.bin:
        dim, _, rest = b.partition("=")
        preset, _, source = rest.partition(":")
        preset = preset.strip()
        if preset not in PRESET_BINNINGS:
            raise ValidationError(f"unknown binning preset {preset!r} (choose from {', '.join(PRESET_BINNINGS)})")
        binning = PRESET_BINNINGS[preset](dimension=dim.strip(), source=(source.strip() or None))
        obs = bin_categories(obs, binning)
        if dim.strip() == by:
            order = list(binning.categories)
    if not obs:
        raise ValidationError(f"no usable observations in {args.input}")
    return obs, order


def _bandwidth_value(args, obs):
    return args.bandwidth([o.value for o in obs], vote_weights(obs, args.weights))


def _auto_grid(density, grid):
    if grid is not None:
        lo, hi, n = grid
        return np.linspace(lo, hi, n)
    lo, hi = density.quantile(0.001), density.quantile(0.999)
    pad = 0.05 * (hi - lo)
    return np.linspace(lo - pad, hi + pad, DEFAULT_GRID_POINTS)


def _emit(text, path):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_density(args):
    obs, _ = _load(args)
    weights = vote_weights(obs, args.weights)
    h = _bandwidth_value(args, obs)
    dens = fit(obs, args.kernel, h, weights)
    x = _auto_grid(dens, args.grid)
    pdf, cdf = dens.pdf(x), dens.cdf(x)
    _emit(_csv([["x", "pdf", "cdf"], *([FMT(a), FMT(b), FMT(c)] for a, b, c in zip(x, pdf, cdf))]), args.output)
    log.info("bandwidth %.6g over %d observations", h, len(obs))
    if args.figure:
        from .plotting import plot_density

        plot_density(x, pdf, args.figure, xlabel=args.value_col)
    return 0


def _decompose(args, obs, order):
    return decompose(
        obs, args.by, args.kernel, args.bandwidth, args.weights,
        per_component=args.component_bandwidth == "per-component", order=order,
    )


def cmd_decompose(args):
    obs, order = _load(args, by=args.by)
    d = _decompose(args, obs, order)
    composite = reaggregate(d)
    x = _auto_grid(composite, args.grid)
    rows = [["component", "x", "pdf"]]
    parts = []
    for j, c in enumerate(d.components):
        y = np.atleast_1d(d.weighted_pdf(j, x))
        parts.append(y)
        rows += [[c.name, FMT(a), FMT(b)] for a, b in zip(x, y)]
    total = np.atleast_1d(composite.pdf(x))
    rows += [[COMPOSITE, FMT(a), FMT(b)] for a, b in zip(x, total)]
    _emit(_csv(rows), args.output)

    report = [["component", "count", "weight", "bandwidth"]]
    report += [[c.name, c.count, FMT(c.weight), FMT(c.bandwidth)] for c in d.components]
    if args.report:
        Path(args.report).write_text(_csv(report), encoding="utf-8")
    else:
        sys.stderr.write(_csv(report))
    if args.figure:
        from .plotting import plot_decomposition

        plot_decomposition(x, d.names, parts, total, args.figure, xlabel=args.value_col)
    return 0


def cmd_test(args):
    if args.share_matrix:
        if args.effective_n is None:
            raise ValidationError("--effective-n must be a number when testing a precomputed share matrix")
        sm = ShareMatrix.read(args.share_matrix, args.effective_n)
    else:
        if not args.input or not args.by:
            raise ValidationError("give an input file with --by, or --share-matrix")
        obs, order = _load(args, by=args.by)
        d = _decompose(args, obs, order)
        sm = share_matrix(d, args.quantiles, args.effective_n)
    result = pearson_test(sm)
    _emit(sm.to_csv(args.orientation), args.output)
    report = [
        ["statistic", "dof", "p_value", "effective_n", "components", "quantiles"],
        [FMT(result.statistic), result.dof, FMT(result.p_value), FMT(result.effective_n), sm.m, sm.p],
    ]
    if args.report:
        Path(args.report).write_text(_csv(report), encoding="utf-8")
    print(result, file=sys.stderr)
    if args.figure:
        from .plotting import plot_shares

        plot_shares(sm, args.figure, title=str(result))
    return 0


def cmd_counts(args):
    obs, order = _load(args, by=args.by)
    _emit(counts_csv(category_counts(obs, args.by, order), args.by), args.output)
    return 0


def cmd_export_svg(args):
    text = sys.stdin.read() if args.curves == "-" else Path(args.curves).read_text(encoding="utf-8")
    _emit(render_svg(parse_curves(text), args.title), args.output)
    return 0


COMMANDS = {
    "density": cmd_density,
    "decompose": cmd_decompose,
    "test": cmd_test,
    "counts": cmd_counts,
    "export-svg": cmd_export_svg,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            _apply_config(parser, read_config(known.config))
        except (OSError, KdecompError, argparse.ArgumentTypeError) as exc:
            parser.error(f"config: {exc}")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (KdecompError, OSError) as exc:
        print(f"kdecomp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
