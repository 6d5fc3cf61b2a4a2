"""
Command line front end.

    gfcalc list-kernels [--json]
    gfcalc check-pair SPEC [--T 5 --step 1/512 --eps-factor 10 --format csv|json --out PATH]
    gfcalc apply {gfi,caputo,rl} --pair SPEC --function NAME [...]
    gfcalc verify [--theorem NAME] [--pair SPEC] [--function NAME] [--all-cases] [...]

Exit codes: 0 pass, 1 fail (or an evaluation error), 2 usage or spec error.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import sys
from argparse import ArgumentParser
from dataclasses import dataclass
from fractions import Fraction
from json import decoder as json_decoder
from json import scanner as json_scanner
from typing import Optional

import numpy as np

from . import kernels
from .algebra import (
    atomic_pair, build_multiset, build_Tn, build_Tnm, build_Tnml, check_pair, conv_expr,
)
from .conv import Grid, ResidualReport
from .operators import RL_PATHS, gfd_caputo, gfd_rl, gfi
from .utils import (
    DEFAULT_EPS_FACTOR, DEFAULT_STEP, DEFAULT_T, DomainError, EvaluationError, SpecError,
    UnsupportedError, format_real, rounded, setup_logging,
)
from .verify import Theorem, all_gating_passed, catalog_function, catalog_suite, \
    default_functions, function_names, run_suite, summarize

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
OPERATORS = ("gfi", "caputo", "rl")
REPORT_FIELDS = [f.name for f in dataclasses.fields(ResidualReport)]


@dataclass(frozen=True)
class RunConfig:
    """Grid and output settings shared by the subcommands."""

    T: float = DEFAULT_T
    step: float = DEFAULT_STEP
    eps_factor: int = DEFAULT_EPS_FACTOR
    fmt: str = "csv"
    out: Optional[str] = None

    def __post_init__(self):
        if int(self.eps_factor) != self.eps_factor or self.eps_factor < 1:
            raise DomainError(f"--eps-factor must be an integer >= 1, got {self.eps_factor}")
        if self.fmt not in FORMATS:
            raise DomainError(f"unknown output format {self.fmt!r}")
        Grid(self.T, self.step)
        if not self.eps < self.T:
            raise DomainError(f"eps = {self.eps} must be below T = {self.T}")

    @property
    def grid(self):
        return Grid(self.T, self.step)

    @property
    def eps(self):
        return self.eps_factor * self.step

    @classmethod
    def from_args(cls, args):
        return cls(args.T, args.step, args.eps_factor, args.format, args.out)


class _Node(dict):
    """JSON object that remembers where it starts in the source text."""

    offset = 0


def _parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
    _, end = s_and_end
    obj, new_end = json_decoder.JSONObject(s_and_end, strict, scan_once, object_hook,
                                           object_pairs_hook, memo)
    node = _Node(obj)
    node.offset = end - 1
    return node, new_end


class _SpecDecoder(json.JSONDecoder):
    def __init__(self):
        super().__init__()
        self.parse_object = _parse_object
        # the C scanner ignores parse_object
        self.scan_once = json_scanner.py_make_scanner(self)


class PairSpecParser:
    """
    Reads a pair spec::

        {"order": 2, "construction": "tn",
         "factors": [{"family": "power", "params": {"alpha": 0.3}},
                     {"family": "tempered", "params": {"alpha": 0.4, "lambda": 1}}]}

    ``construction`` is one of atomic, tn, tnm, tnml or multiset. Factors are
    family pairs or nested pair specs, and ``"swap": true`` exchanges the
    members. An atomic spec may give ``M`` and ``N`` as explicit kernels,
    including ``{"family": "moment", "params": {"k": 2}}``. Parameters may
    also sit directly in the kernel object.
    """

    FAMILIES = {
        "power": ("alpha",),
        "tempered": ("alpha", "lambda"),
        "kummer": ("alpha", "beta", "lambda"),
        "bessel": ("order", "alpha"),
    }
    MOMENT = "moment"
    KERNELS = {"power": ("a",), "moment": ("k",), "tempered": ("a", "lambda")}

    def __init__(self, text, path="<spec>"):
        self.text = text
        self.path = path

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as f:
                return cls(f.read(), path)
        except OSError as exc:
            raise SpecError(f"cannot read spec: {exc.strerror}", path) from exc

    def error(self, message, node=None, key=None):
        offset = 0
        if isinstance(node, _Node):
            offset = node.offset
            if key is not None:
                found = self.text.find(f'"{key}"', offset)
                offset = found if found >= 0 else offset
        line = self.text.count("\n", 0, offset) + 1
        column = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return SpecError(message, self.path, line, column)

    def parse(self):
        try:
            root = _SpecDecoder().decode(self.text)
        except json.JSONDecodeError as exc:
            raise SpecError(exc.msg, self.path, exc.lineno, exc.colno) from exc
        if not isinstance(root, dict):
            raise self.error("a pair spec must be a JSON object")
        if "order" not in root:
            raise self.error("missing required field 'order'", root)
        return self._pair(root)

    def _number(self, node, key, integer=False):
        if key not in node:
            raise self.error(f"missing required field {key!r}", node)
        value = node[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(f"field {key!r} must be a number", node, key)
        if integer and int(value) != value:
            raise self.error(f"field {key!r} must be an integer", node, key)
        return int(value) if integer else float(value)

    def _factors(self, node):
        factors = node.get("factors")
        if not isinstance(factors, list) or not factors:
            raise self.error("'factors' must be a non-empty list", node, "factors")
        return factors

    def _single(self, node):
        factors = self._factors(node)
        if len(factors) != 1:
            raise self.error(f"{node.get('construction')} takes exactly one factor", node, "factors")
        return self._factor(factors[0])

    def _factor(self, item):
        if not isinstance(item, dict):
            raise self.error("a factor must be a JSON object")
        if "construction" in item:
            return self._pair(item)
        if "family" in item:
            return self._family(item)
        raise self.error("a factor needs 'family' or 'construction'", item)

    def _params(self, node):
        if "params" not in node:
            return node
        params = node["params"]
        if not isinstance(params, dict):
            raise self.error("'params' must be a JSON object", node, "params")
        return params

    def _family(self, node):
        name = node.get("family")
        if name == self.MOMENT:
            raise self.error("the moment family has no partner kernel; "
                             "use it as an explicit 'M' or 'N' kernel", node, "family")
        if name not in self.FAMILIES:
            known = ", ".join([*self.FAMILIES, self.MOMENT])
            raise self.error(f"unknown family {name!r}; known: {known}", node, "family")
        params = self._params(node)
        values = [self._number(params, key, integer=(key == "order")) for key in self.FAMILIES[name]]
        try:
            if name == "bessel":
                pair = atomic_pair(*kernels.bessel_pair(*values), order_n=values[0])
            else:
                maker = getattr(kernels, f"sonine_pair_{name}")
                pair = atomic_pair(*maker(*values))
        except DomainError as exc:
            raise self.error(str(exc), node) from exc
        pair = dataclasses.replace(pair, label=f"{name}({','.join(f'{v:g}' for v in values)})")
        return pair.swapped() if node.get("swap") else pair

    def _kernel(self, node):
        if not isinstance(node, dict):
            raise self.error("a kernel must be a JSON object")
        if node.get("family") == self.MOMENT:
            name = self.MOMENT
        elif "family" in node:
            member = node.get("member")
            if member not in ("mu", "nu"):
                raise self.error("a family kernel needs 'member': 'mu' or 'nu'", node)
            pair = self._family(node)
            return pair.M if member == "mu" else pair.N
        else:
            name = node.get("kernel")
            if name not in self.KERNELS:
                raise self.error(f"unknown kernel {name!r}; known: {', '.join(self.KERNELS)}",
                                 node, "kernel")
        params = self._params(node)
        values = [self._number(params, key, integer=(key == "k")) for key in self.KERNELS[name]]
        maker = {"power": kernels.power_kernel, "moment": kernels.moment_kernel,
                 "tempered": kernels.tempered_power_kernel}[name]
        try:
            return maker(*values)
        except DomainError as exc:
            raise self.error(str(exc), node) from exc

    def _kernels(self, node, key):
        spec = node[key]
        items = spec if isinstance(spec, list) else [spec]
        if not items:
            raise self.error(f"{key!r} must name at least one kernel", node, key)
        return conv_expr([self._kernel(item) for item in items])

    def _pair(self, node):
        construction = node.get("construction", "atomic")
        order = self._number(node, "order", integer=True) if "order" in node else None
        try:
            if construction == "atomic":
                if "M" in node or "N" in node:
                    if "M" not in node or "N" not in node:
                        raise self.error("an explicit atomic pair needs both 'M' and 'N'", node)
                    order = self._number(node, "order", integer=True)
                    pair = atomic_pair(self._kernels(node, "M"), self._kernels(node, "N"), order)
                else:
                    pair = self._single(node)
            elif construction == "tn":
                pair = build_Tn([self._factor(f) for f in self._factors(node)])
            elif construction == "tnm":
                pair = build_Tnm(self._single(node), self._number(node, "order", integer=True))
            elif construction == "tnml":
                pair = build_Tnml(self._single(node), self._number(node, "order", integer=True),
                                  self._number(node, "l", integer=True))
            elif construction == "multiset":
                l = self._number(node, "l", integer=True) if "l" in node else None
                pair = build_multiset([self._factor(f) for f in self._factors(node)],
                                      self._number(node, "order", integer=True), l)
            else:
                raise self.error(f"unknown construction {construction!r}", node, "construction")
        except DomainError as exc:
            raise self.error(str(exc), node) from exc
        if order is not None and pair.order_n != order:
            raise self.error(f"declared order {order} but the construction has order {pair.order_n}",
                             node, "order")
        return pair.swapped() if node.get("swap") else pair


def load_pair(path):
    return PairSpecParser.from_file(path).parse()


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_real(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (float, np.floating)):
        return rounded(value)
    return value


def emit(rows, fields, config, single=False):
    """Write rows as CSV with a header, or as JSON; byte-identical for equal input."""
    out = open(config.out, "w", newline="") if config.out else sys.stdout
    try:
        if config.fmt == "csv":
            writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n",
                                    extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(row[k]) for k in fields})
        else:
            payload = [{k: _jsonable(row[k]) for k in fields} for row in rows]
            json.dump(payload[0] if single else payload, out, indent=2)
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_list_kernels(args):
    if args.json:
        print(json.dumps(list(kernels.FAMILY_CATALOG), indent=2))
        return 0
    for entry in kernels.FAMILY_CATALOG:
        params = "; ".join(f"{k}: {v}" for k, v in entry["params"].items())
        order = entry["order"] if entry["order"] is not None else "-"
        print(f"{entry['family']:<9} order={order}  pair={entry['pair']}")
        print(f"    kernels: {entry['kernels']}")
        print(f"    params:  {params}")
    return 0


def cmd_check_pair(args):
    config = RunConfig.from_args(args)
    pair = load_pair(args.spec)
    report = check_pair(pair, config.T, config.step, config.eps)
    emit([report.as_row()], REPORT_FIELDS, config, single=True)
    return 0 if report.passed else 1


def cmd_apply(args):
    config = RunConfig.from_args(args)
    pair = load_pair(args.pair)
    X = catalog_function(args.function)
    grid = config.grid
    if args.op == "gfi":
        result = gfi(pair, X, grid)
    elif args.op == "caputo":
        result = gfd_caputo(pair, X, grid)
    else:
        result = gfd_rl(pair, X, grid, path=args.rl_path)
    mask = grid.window(config.eps)
    rows = [{"t": t, "value": v} for t, v in zip(grid.points[mask], result.values()[mask])]
    emit(rows, ["t", "value"], config)
    return 0


def cmd_verify(args):
    config = RunConfig.from_args(args)
    theorems = [args.theorem] if args.theorem else None
    functions = [args.function] if args.function else None
    if args.pair:
        pair = load_pair(args.pair)
        fns = [catalog_function(args.function)] if args.function else default_functions()
        reports = run_suite([pair], fns, config.grid, theorems, True, config.eps_factor,
                            args.workers)
    else:
        reports = catalog_suite(config.grid, args.all_cases, theorems, config.eps_factor,
                                args.workers, functions=functions)
    emit([r.as_row() for r in reports], REPORT_FIELDS, config)
    logger.info("verify: %s", summarize(reports))
    return 0 if all_gating_passed(reports) else 1


def _real(text):
    """Reals may be given as fractions, e.g. 1/512."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ValueError(text)


def parse_args(argv=None):
    """
    Helper function parsing the command line options
    @retval argparse.Namespace
    """
    verbosity = ArgumentParser(add_help=False)
    verbosity.add_argument("-v", "--verbose", action="count", default=0,
                           help="-v for progress, -vv for debug output")

    common = ArgumentParser(add_help=False, parents=[verbosity])
    common.add_argument("--T", type=_real, default=DEFAULT_T,
                        help="horizon of the grid (default: %(default)s)")
    common.add_argument("--step", type=_real, default=DEFAULT_STEP,
                        help="grid step, e.g. 1/512; must divide T")
    common.add_argument("--eps-factor", type=int, default=DEFAULT_EPS_FACTOR,
                        help="residuals are measured on [eps-factor*step, T]")
    common.add_argument("--format", choices=FORMATS, default="csv", help="output format")
    common.add_argument("--out", type=str, default=None, help="output file, stdout if omitted")

    parser = ArgumentParser(prog="gfcalc", description="General fractional calculus toolkit: "
                            "kernel pairs, operators and fundamental-theorem checks")
    subparsers = parser.add_subparsers(dest="command", required=True)

    lk = subparsers.add_parser("list-kernels", parents=[verbosity], help="print the kernel families")
    lk.add_argument("--json", action="store_true", help="machine-readable catalog")
    lk.set_defaults(func=cmd_list_kernels)

    cp = subparsers.add_parser("check-pair", parents=[common],
                               help="check (M*N)(t) = h_n(t) for a pair spec")
    cp.add_argument("spec", type=str, help="pair spec file (JSON)")
    cp.set_defaults(func=cmd_check_pair)

    ap = subparsers.add_parser("apply", parents=[common],
                               help="apply an operator to a catalog function")
    ap.add_argument("op", choices=OPERATORS)
    ap.add_argument("--pair", type=str, required=True, help="pair spec file (JSON)")
    ap.add_argument("--function", choices=function_names(), required=True)
    ap.add_argument("--rl-path", choices=RL_PATHS, default="auto",
                    help="evaluation path of the RL-type derivative")
    ap.set_defaults(func=cmd_apply)

    vp = subparsers.add_parser("verify", parents=[common],
                               help="run the fundamental-theorem suite")
    vp.add_argument("--theorem", choices=[t.value for t in Theorem], default=None)
    vp.add_argument("--pair", type=str, default=None,
                    help="verify this pair spec instead of the pair catalog")
    vp.add_argument("--function", choices=function_names(), default=None)
    vp.add_argument("--all-cases", action="store_true",
                    help="include the informational (non-gating) cases")
    vp.add_argument("--workers", type=int, default=None, help="suite threads")
    vp.set_defaults(func=cmd_verify)
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except (SpecError, DomainError) as exc:
        print(f"gfcalc: error: {exc}", file=sys.stderr)
        return 2
    except (EvaluationError, UnsupportedError) as exc:
        print(f"gfcalc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
