"""Command line: classify, solve, verify, divisors, demo.

Exit codes: 0 ok, 1 verify failure, 2 config error, 3 precision exhausted,
4 resonant obstruction, 5 residual above tolerance.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import SuiteOptions, parse_selection, run_suite
from .bundle import thm_assumption_check
from .diophantine import (
    distance_sequence,
    exp_bound_scan,
    hs_margin,
    kazama_margin,
    make_super_liouville,
    resonance_search,
    toroidal_test,
)
from .errors import ClosednessError, ConfigError, PrecisionExhausted, RecipeError, ResonanceError, ResonantObstruction
from .group import derive_constants
from .harness.forms import Recipe, TorusGrid
from .harness.pipeline import run_pipeline
from .reals import LiouvilleSum
from .report import RunConfig, canonical_json, csv_text, distances_csv, envelope, load_config, write_outputs
from .small_divisor import divisor_growth, divisor_min_scan

log = logging.getLogger("toroidal_lab")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_PRECISION, EXIT_RESONANT, EXIT_RESIDUAL = 0, 1, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file")
    common.add_argument("--precision", type=int, dest="precision_bits", help="working precision in bits")
    common.add_argument("--N", type=int, dest="N", help="scan depth")
    common.add_argument("--box", type=int, help="index box for margins and divisor tables")
    common.add_argument("--trunc", type=int, help="Fourier modes kept per direction in the solve")
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for randomized fixtures")
    common.add_argument("--format", choices=("json", "csv"), help="what to print on stdout")
    common.add_argument("-v", "--verbose", action="store_true")
    p = _Parser(prog="toroidal-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("classify", parents=[common], help="toroidal test and theta/wild evidence")
    sub.add_parser("solve", parents=[common], help="manufactured dbar round trip")
    v = sub.add_parser("verify", parents=[common], help="acceptance suite")
    v.add_argument("--suite", help='"all", "none" or comma-separated criterion ids')
    sub.add_parser("divisors", parents=[common], help="small-divisor table")
    sub.add_parser("demo", parents=[common], help="short tour with default fixtures")
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    over = {k: getattr(args, k, None) for k in ("precision_bits", "N", "box", "trunc", "tol", "out", "seed", "format")}
    if getattr(args, "suite", None) is not None:
        over["suite"] = args.suite
    try:
        return cfg.with_overrides(**over)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


# -- commands ---------------------------------------------------------------------


def cmd_classify(cfg: RunConfig) -> tuple[int, dict, dict]:
    bits = cfg.precision_bits
    verdict = toroidal_test(cfg.p, cfg.q)
    if verdict.toroidal is None:
        # only decimal approximations leave the verdict open
        raise PrecisionExhausted(f"toroidal test undecided: {verdict.reason}")
    extra = []
    for x in (cfg.p, cfg.q):
        if isinstance(x, LiouvilleSum):
            extra += make_super_liouville(x.depth, x.base).certified_indices
    scans = {}
    seqs = []
    for kind in ("lattice2d", "fiber"):
        N = cfg.scan_depth(kind)
        idx = sorted(set(range(1, N + 1)) | set(extra))
        seq = distance_sequence(kind, cfg.p, cfg.q, cfg.theta2, N, bits, indices=idx)
        seqs.append(seq)
        scans[kind] = exp_bound_scan(seq, cfg.delta0, cfg.window_start)
    tau = cfg.tau
    try:
        kaz = {"value": kazama_margin(tau, cfg.p, cfg.q, cfg.kazama_a, cfg.box)}
    except ResonanceError as exc:
        kaz = {"value": None, "resonance_m": list(exc.index)}
    payload = {
        "toroidal": verdict,
        "theta_wild": scans["lattice2d"],
        "abe_condition": scans["fiber"],
        "hs_margin": {"a": cfg.hs_a, "box": cfg.box, "value": hs_margin(tau, cfg.q, cfg.theta2, cfg.hs_a, cfg.box)},
        "kazama_margin": {"a": cfg.kazama_a, "box": cfg.box, **kaz},
        "resonances": [list(s) for s in resonance_search(tau, cfg.p, cfg.q, cfg.theta1, cfg.theta2, cfg.box)],
        "extra_indices": extra,
    }
    files = {"distances.csv": distances_csv(*seqs)}
    return EXIT_OK, payload, files


def _grid_dump(rep_grid: TorusGrid, values: np.ndarray, tau: complex) -> str:
    """g̃ on the β = 0 slice, thinned to every 4th angle and 8th v-node."""
    rows = []
    for iv in range(0, rep_grid.nv, 8):
        v = float(rep_grid.v[iv])
        for iy in range(0, rep_grid.ky, 4):
            y = float(rep_grid.y[iy])
            for ix in range(0, rep_grid.kx, 4):
                x = float(rep_grid.x[ix])
                z = complex(values[0, iv, iy, ix])
                u = -2 * math.pi * tau.imag * y + 0.0
                alpha = 2 * math.pi * (x + tau.real * y)
                rows.append([u, alpha, v, 0.0, z.real, z.imag])
    return csv_text(["u", "alpha", "v", "beta", "re", "im"], rows)


def cmd_solve(cfg: RunConfig) -> tuple[int, dict, dict]:
    params = cfg.params()
    assumption = thm_assumption_check(params, cfg.theta1, cfg.theta2, cfg.n_box)
    if not assumption.passed:
        n = assumption.witness
        exc = ResonantObstruction((n, 0, 0), math.nan, 0.0, stage="thm_assumption_check")
        return EXIT_RESONANT, {"assumption": assumption, "obstruction": exc}, {}
    grid = TorusGrid(cfg.grid_x, cfg.grid_x, 4, cfg.grid_v)
    study = tuple(t for t in (8, 16, cfg.trunc) if t <= cfg.trunc)
    try:
        rep = run_pipeline(params, cfg.theta1, cfg.theta2, Recipe(cfg.recipe), grid, cfg.trunc, cfg.tol,
                           study=study, n_box=cfg.n_box)
    except RecipeError as exc:
        raise ConfigError(str(exc)) from None
    except ResonantObstruction as exc:
        return EXIT_RESONANT, {"assumption": assumption, "obstruction": exc}, {}
    except ClosednessError as exc:
        return EXIT_RESIDUAL, {"closedness": exc.residual, "tol": exc.tol, "passed": False}, {}
    files = {"grid.csv": _grid_dump(grid, rep.g_tilde(), params.tau)}
    code = EXIT_OK if rep.passed else EXIT_RESIDUAL
    return code, rep.as_dict(), files


def cmd_divisors(cfg: RunConfig) -> tuple[int, dict, dict]:
    c = derive_constants(cfg.params(), cfg.theta2)
    table = divisor_min_scan(c, cfg.box)
    g = divisor_growth(table)
    payload = {"table": table, "m0_row_growth": g if math.isfinite(g) else None, "nu": c.nu}
    return EXIT_OK, payload, {"divisors.csv": table.to_csv()}


def cmd_verify(cfg: RunConfig) -> tuple[int, dict, dict]:
    try:
        ids = parse_selection(cfg.suite)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    opts = SuiteOptions(cfg.seed, cfg.quad_tol, cfg.precision_bits)
    suite = run_suite(ids, opts)
    for r in suite.results:
        log.info(r.line())
    code = EXIT_OK if suite.passed else EXIT_VERIFY
    return code, suite.as_dict(), {}


def cmd_demo(cfg: RunConfig) -> tuple[int, dict, dict]:
    payload, files, worst = {}, {}, EXIT_OK
    for name, fn in (("divisors", cmd_divisors), ("classify", cmd_classify), ("solve", cmd_solve)):
        sub = cfg.with_overrides(N=min(cfg.scan_depth(), 1000), box=min(cfg.box, 10)) if name != "solve" else cfg
        code, part, f = fn(sub)
        payload[name] = {"exit_code": code, "result": part}
        files.update(f)
        worst = max(worst, code)
    return worst, payload, files


COMMANDS = {"classify": cmd_classify, "solve": cmd_solve, "verify": cmd_verify, "divisors": cmd_divisors,
            "demo": cmd_demo}


def _stdout_text(fmt: str, doc: dict, files: dict) -> str:
    if fmt == "json":
        return canonical_json(doc)
    csvs = [name for name in sorted(files) if name.endswith(".csv")]
    if csvs:
        return files[csvs[0]]
    return csv_text(["key", "value"], [["command", doc["command"]], ["exit_code", doc["exit_code"]]])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        cfg = resolve_config(args)
        code, payload, files = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    doc = envelope(args.command, payload, cfg)
    doc["exit_code"] = code
    files = dict(files)
    files["report.json"] = canonical_json(doc)
    write_outputs(Path(cfg.out), files)
    sys.stdout.write(_stdout_text(cfg.format, doc, files))
    if args.command == "verify" and payload.get("vacuous"):
        print("vacuous: no criteria selected", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
