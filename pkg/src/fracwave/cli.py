"""Command-line entry points.

    fracwave bifurcation-points --equation fkdv --P 6.283185307179586 --s 0.5
    fracwave continue --config run.ini --out runs/kdv05
    fracwave continue --resume runs/kdv05/checkpoint.json --max-steps 800
    fracwave diagnose runs/kdv05/final.txt
    fracwave kernel-table --s 0.5 --out tables

Exit codes: 0 ok, 1 diagnostics failed, 2 config error, 3 inadmissible mode,
4 wave-speed bound exceeded, 5 branch did not reach the highest wave.
"""
import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bifurcation import admissibility_boundary, bifurcation_point_fdp, bifurcation_points_fkdv
from .continuation import Termination, continue_branch
from .diagnostics import run_diagnostics
from .errors import CheckpointVersionError, FracwaveError, InadmissibleMode, InvalidParameter
from .kernel import bessel_kernel_values, check_s, singular_coefficient
from .records import (
    BranchWriter,
    check_resume_compatible,
    format_row,
    header_lines,
    load_config,
    read_checkpoint,
    read_snapshot,
    write_checkpoint,
    write_snapshot,
)
from .solvers import FKDV

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_CONFIG = 2
EXIT_INADMISSIBLE = 3
EXIT_MU_BOUND = 4
EXIT_NO_CONVERGENCE = 5

TERMINATION_EXIT = {
    Termination.CREST_GAP_TOL: EXIT_OK,
    Termination.MU_BOUND_EXCEEDED: EXIT_MU_BOUND,
    Termination.NO_CONVERGENCE: EXIT_NO_CONVERGENCE,
    Termination.STEP_LIMIT: EXIT_NO_CONVERGENCE,
    Termination.LEFT_ADMISSIBLE_SET: EXIT_NO_CONVERGENCE,
}

_FLAG_KEYS = ("equation", "s", "P", "kappa", "N", "t0", "gap_tol", "max_steps", "out", "snapshot_stride",
              "checkpoint_every", "mu_max", "newton_tol")


def _add_config_flags(p):
    p.add_argument("--config", help="INI file with [problem], [discretization], [continuation], [solver], [output]")
    p.add_argument("--equation", choices=["fkdv", "fdp"])
    p.add_argument("--s", type=float, help="dispersion order in (0, 1)")
    p.add_argument("--P", type=float, help="period")
    p.add_argument("--kappa", type=float, help="fDP integration constant (nonzero)")
    p.add_argument("--N", type=int, help="grid points (even)")
    p.add_argument("--t0", type=float, help="initial amplitude / step size")
    p.add_argument("--gap-tol", dest="gap_tol", type=float, help="stop when mu - max phi < gap_tol * mu")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--mu-max", dest="mu_max", type=float, help="terminate when the wave speed exceeds this")
    p.add_argument("--newton-tol", dest="newton_tol", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--snapshot-stride", dest="snapshot_stride", type=int, help="profile snapshot every k steps (0: none)")
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, help="checkpoint every M steps (0: final only)")


def _overrides(args):
    return {k: getattr(args, k, None) for k in _FLAG_KEYS}


def build_parser():
    parser = argparse.ArgumentParser(prog="fracwave", description="Periodic traveling waves of fKdV and fDP.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bifurcation-points", help="wave speeds where nonconstant branches start")
    _add_config_flags(p)
    p.add_argument("--k-max", dest="k_max", type=int, default=5, help="fKdV: number of modes to list")
    p.set_defaults(func=cmd_bifurcation_points)

    p = sub.add_parser("continue", help="follow the k = 1 branch toward the highest wave")
    _add_config_flags(p)
    p.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint file")
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("diagnose", help="run the diagnostics battery on a solution snapshot")
    p.add_argument("snapshot")
    p.add_argument("--gap-tol", dest="gap_tol", type=float, default=1e-2)
    p.add_argument("--out", help="report path (default: <snapshot>.report.json)")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("kernel-table", help="tabulate K_s with its singular split")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--x-min", dest="x_min", type=float, default=1e-3)
    p.add_argument("--x-max", dest="x_max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-12, help="absolute quadrature tolerance")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_kernel_table)
    return parser


def _fail(code, msg):
    print(f"fracwave: {msg}", file=sys.stderr)
    return code


def _inadmissible(e):
    if e.boundary is not None:
        return _fail(EXIT_INADMISSIBLE, f"{e}\nadmissibility boundary sqrt(3^(2/s) - 1) = {e.boundary:.10g}")
    return _fail(EXIT_INADMISSIBLE, str(e))


def cmd_bifurcation_points(args):
    config = load_config(args.config, _overrides(args))
    if config.equation == FKDV:
        spec = config.validate()
        if args.k_max < 1:
            raise InvalidParameter("--k-max must be at least 1")
        rows = [(bp.k, bp.mu_star, bp.constant_state) for bp in bifurcation_points_fkdv(spec.P, spec.s, args.k_max)]
        lines = ["k,mu_star,constant_state"] + [f"{k},{m!r},{c!r}" for k, m, c in rows]
        print(f"fKdV  P = {spec.P:.12g}  s = {spec.s:g}")
        print(f"{'k':>3}  {'mu*':>20}")
        for k, m, _ in rows:
            print(f"{k:>3}  {m:20.15f}")
    else:
        bound = admissibility_boundary(config.s)
        xi = 2 * math.pi / config.P
        print(f"fDP  P = {config.P:.12g}  s = {config.s:g}  kappa = {config.kappa:g}")
        print(f"admissibility boundary sqrt(3^(2/s) - 1) = {bound:.10g}; 2 pi / P = {xi:.10g}")
        spec = config.validate()
        bp = bifurcation_point_fdp(spec.P, spec.s, spec.kappa, 1)
        lines = ["k,mu_star,constant_state,boundary", f"1,{bp.mu_star!r},{bp.constant_state!r},{bound!r}"]
        print(f"{'k':>3}  {'mu*':>20}  {'gamma_+(mu*)':>20}")
        print(f"{1:>3}  {bp.mu_star:20.15f}  {bp.constant_state:20.15f}")
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, "bifurcation_points.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(header_lines(config, "fracwave bifurcation points") + lines) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_continue(args):
    ckpt = None
    if args.resume:
        ckpt = read_checkpoint(args.resume)
        if ckpt.version != __version__:
            print(f"fracwave: note: checkpoint written by version {ckpt.version}, running {__version__}",
                  file=sys.stderr)
        base = load_config(args.config) if args.config else ckpt.config
        config = load_config(None, {**base.to_dict(), **{k: v for k, v in _overrides(args).items() if v is not None}})
        check_resume_compatible(config, ckpt.config)
    else:
        config = load_config(args.config, _overrides(args))
    spec = config.validate()
    opts = config.options()
    os.makedirs(config.out, exist_ok=True)

    rows = list(ckpt.rows) if ckpt else []
    steps = list(ckpt.steps) if ckpt else []
    extra = {"resumed_after_step": ckpt.state.step} if ckpt else None
    ckpt_path = os.path.join(config.out, "checkpoint.json")
    writer = BranchWriter(os.path.join(config.out, "branch.csv"), config, rows, extra)
    written = 0
    last_state = ckpt.state if ckpt else None

    def on_point(branch, state):
        nonlocal written, last_state
        for row, point in zip(branch.rows[written:], branch.points[written:]):
            writer.write(row)
            rows.append(format_row(row))
            if config.snapshot_stride and row.step % config.snapshot_stride == 0:
                write_snapshot(os.path.join(config.out, f"snapshot_{row.step:05d}.txt"), point, spec, row.step)
        written = len(branch.rows)
        last_state = state
        if config.checkpoint_every and state.step % config.checkpoint_every == 0:
            write_checkpoint(ckpt_path, config, state, rows, steps + list(branch.steps))

    try:
        branch = continue_branch(spec, opts=opts, resume=ckpt.state if ckpt else None, callback=on_point)
    except KeyboardInterrupt:
        if last_state is not None:
            write_checkpoint(ckpt_path, config, last_state, rows, steps)
        writer.close()
        return _fail(130, f"interrupted; checkpoint at step {last_state.step if last_state else '-'} in {ckpt_path}")
    writer.close()
    if branch.state is not None:
        write_checkpoint(ckpt_path, config, branch.state, rows, steps + list(branch.steps))

    print(f"termination: {branch.termination.value} ({branch.message})")
    print(f"accepted points this run: {len(branch.points)}, total rows: {len(rows)}")
    if branch.points:
        final = branch.points[-1]
        write_snapshot(os.path.join(config.out, "final.txt"), final, spec, branch.rows[-1].step)
        report = run_diagnostics(final, spec, config.gap_tol)
        with open(os.path.join(config.out, "report.json"), "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
        with open(os.path.join(config.out, "report.txt"), "w") as fh:
            fh.write(report.summary() + "\n")
        print(f"final: mu = {final.mu:.12g}, max phi = {final.max_phi:.12g}, crest gap = {final.crest_gap:.3e}")
        print(report.summary())
    return TERMINATION_EXIT[branch.termination]


def cmd_diagnose(args):
    spec, point = read_snapshot(args.snapshot)
    report = run_diagnostics(point, spec, args.gap_tol)
    out = args.out or args.snapshot + ".report.json"
    with open(out, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    print(report.summary())
    print(f"wrote {out}")
    return EXIT_OK if report.passed else EXIT_DIAGNOSTICS


def kernel_table(s, x_min=1e-3, x_max=10.0, points=200, tol=1e-12):
    """Rows (x, K_s(x), error bound, c_s x^{s-1}, H_s(x)) on a log grid.

    H_s = K_s - c_s x^{s-1} is only tabulated for x < 1 (nan beyond).
    """
    s = check_s(s)
    if not (0 < x_min < x_max) or points < 2:
        raise InvalidParameter("need 0 < x_min < x_max and at least 2 points")
    x = np.geomspace(x_min, x_max, points)
    k, err = bessel_kernel_values(x, s, tol=tol)
    sing = singular_coefficient(s) * x ** (s - 1.0)
    reg = np.where(x < 1.0, k - sing, np.nan)
    return np.column_stack([x, k, err, sing, reg])


def cmd_kernel_table(args):
    table = kernel_table(args.s, args.x_min, args.x_max, args.points, args.tol)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"kernel_table_s{args.s:g}.csv")
    stamp_lines = ["# fracwave kernel table", f"# version = {__version__}", f"# s = {args.s!r}",
                   f"# tol = {args.tol!r}"]
    with open(path, "w") as fh:
        fh.write("\n".join(stamp_lines) + "\n")
        fh.write("x,K_s,error_bound,singular_part,regular_part\n")
        for row in table:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {path} ({len(table)} rows)")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InadmissibleMode as e:
        return _inadmissible(e)
    except CheckpointVersionError as e:
        return _fail(EXIT_CONFIG, str(e))
    except (InvalidParameter, FileNotFoundError) as e:
        return _fail(EXIT_CONFIG, str(e))
    except FracwaveError as e:
        return _fail(EXIT_NO_CONVERGENCE, f"{type(e).__name__}: {e}")


if __name__ == "__main__":
    sys.exit(main())
