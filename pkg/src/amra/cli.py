"""Command line interface: ``amra <command> ...``.

Exit codes: 0 success, 1 refutation / certification failure / mismatch,
2 invalid arguments or unreadable input. Data goes to stdout or files,
diagnostics to stderr.
"""

import argparse
import re
import sys

import numpy as np

from . import io
from .analysis import cascade, sum_rule_order
from .bankgen import UncertifiedBankError, seed_bank, shearlet_bank_2d, shearlet_bank_3d, tensor_bank
from .intlat import IntMatrix
from .mask import Mask
from .ops import Signal
from .rotapprox import best_unimodular, best_unimodular_bruteforce, parse_angle
from .tree import TreePlan, UncertifiedPlanError, far, fad
from .uep import check_uep_general

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj):
    sys.stdout.write(io.canonical_json(obj) + "\n")


def _err(msg):
    print(f"amra: {msg}", file=sys.stderr)


def _parse_shears(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"cannot parse shears {text!r}; expected e.g. '0,1,-1'") from None


def _parse_shears3d(text):
    pairs = re.findall(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)", text)
    if not pairs or len(pairs) != text.count("("):
        raise UsageError(f"cannot parse 3-D shears {text!r}; expected e.g. '(0,0);(1,1)'")
    return [(int(a), int(b)) for a, b in pairs]


def _parse_levels(text, parse):
    """Per-level selections separated by '|'; a single selection applies to every level."""
    return [parse(part) for part in text.split("|")]


def _parse_matrix(text):
    try:
        rows = [[int(x) for x in r.split(",")] for r in text.split(";")]
        return IntMatrix(rows)
    except (ValueError, TypeError):
        raise UsageError(f"cannot parse matrix {text!r}; expected e.g. '2' or '2,0;0,2'") from None


def _parse_mask(text, offset):
    try:
        rows = [[float(x) for x in r.split(",")] for r in text.split(";")]
    except ValueError:
        raise UsageError(f"cannot parse mask {text!r}") from None
    data = np.array(rows[0] if len(rows) == 1 else rows, dtype=np.float64)
    if offset is None:
        off = (0,) * data.ndim
    else:
        off = tuple(int(x) for x in offset.split(","))
        if len(off) != data.ndim:
            raise UsageError("mask offset length does not match mask dimension")
    return Mask(data, off)


def _build_bank(kind, args, shears):
    try:
        if kind == "shearlet2d":
            return shearlet_bank_2d(shears, args.seed)
        if kind == "shearlet3d":
            return shearlet_bank_3d(shears, args.seed)
        return tensor_bank(args.dim, args.seed, args.dilation)
    except UncertifiedBankError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _shear_arg(args, kind):
    if kind == "shearlet2d":
        if args.shears is None:
            raise UsageError("--shears is required for shearlet2d")
        return _parse_levels(args.shears, _parse_shears)
    if kind == "shearlet3d":
        if args.shears3d is None:
            raise UsageError("--shears3d is required for shearlet3d")
        return _parse_levels(args.shears3d, _parse_shears3d)
    return [None]


# ---------------------------------------------------------------- commands


def cmd_check_uep(args):
    bank = io.load_bank(args.bank)
    report = check_uep_general(bank, args.tol)
    _emit(report.to_dict())
    return EXIT_OK if report.certified else EXIT_FAIL


def cmd_design_bank(args):
    sel = _shear_arg(args, args.kind)
    if len(sel) != 1:
        raise UsageError("design-bank takes a single shear selection")
    bank = _build_bank(args.kind, args, sel[0])
    report = check_uep_general(bank)
    if not report.certified:
        _err(f"constructed bank failed certification (worst {report.worst_violation:.3g})")
        return EXIT_FAIL
    io.save_bank(args.output, bank)
    _emit({"certified": True, "filters": len(bank), "output": str(args.output), "separator": bank.separator})
    return EXIT_OK


def cmd_design_plan(args):
    sel = _shear_arg(args, args.kind)
    if len(sel) == 1:
        sel = sel * args.depth
    if len(sel) != args.depth:
        raise UsageError(f"{len(sel)} shear selections given for depth {args.depth}")
    levels = [_build_bank(args.kind, args, s) for s in sel]
    plan = TreePlan(levels[0].dim if levels else args.dim, args.depth, levels)
    report = plan.validate()
    if not report.certified:
        _err("constructed plan failed certification")
        return EXIT_FAIL
    io.save_plan(args.output, plan)
    low, high = plan.leaves()
    _emit({"digest": plan.digest(), "high_leaves": len(high), "low_leaves": len(low), "output": str(args.output)})
    return EXIT_OK


def cmd_decompose(args):
    plan = io.load_plan(args.plan)
    if plan.dim != 2:
        raise UsageError("decompose reads 2-D images; the plan must have dim 2")
    pixels, maxval = io.read_pgm(args.input)
    v = Signal(pixels.astype(np.float64) / maxval, (0, 0))
    pyr = fad(plan, v, force=args.force, workers=args.workers)
    box = {"maxval": maxval, "offset": [0, 0], "shape": list(pixels.shape)}
    io.save_pyramid(args.output, plan, pyr, box)
    _emit({"digest": pyr.digest, "leaves": len(pyr.low) + len(pyr.high), "output": str(args.output)})
    return EXIT_OK


def cmd_reconstruct(args):
    plan = io.load_plan(args.plan)
    try:
        pyr, manifest = io.load_pyramid(args.pyramid, plan)
    except io.FormatError as exc:
        _err(str(exc))
        return EXIT_FAIL
    v = far(plan, pyr, force=args.force, workers=args.workers)
    if args.crop_to_input:
        box = manifest.get("input")
        if box is None or len(box["shape"]) != 2:
            _err("pyramid manifest records no 2-D input raster; cannot crop")
            return EXIT_FAIL
        maxval = box.get("maxval", 255)
        crop = v.embed(tuple(box["offset"]), tuple(box["shape"]), np.float64) if not v.is_empty else np.zeros(box["shape"])
        io.write_pgm(args.output, io.quantize(np.real(crop), maxval), maxval)
    else:
        io.write_f64(args.output, Signal(np.real(v.data), v.offset), {"digest": pyr.digest})
    return EXIT_OK


def cmd_rotation_approx(args):
    try:
        theta = parse_angle(args.theta)
    except ValueError:
        raise UsageError(f"cannot parse angle {args.theta!r}") from None
    if args.brute_force:
        if args.radius < 1:
            raise UsageError("--radius must be at least 1")
        sol = best_unimodular_bruteforce(theta, args.radius)
    else:
        sol = best_unimodular(theta)
    _emit(sol.to_dict())
    return EXIT_OK


def cmd_sum_rules(args):
    a = _parse_mask(args.mask, args.offset)
    m0 = _parse_matrix(args.dilation)
    if m0.dim != a.dim:
        raise UsageError("mask and dilation dimensions differ")
    if m0.det == 0:
        raise UsageError("dilation matrix is singular")
    _emit({"dilation": m0.tolist(), "tau": sum_rule_order(a, m0, args.tol)})
    return EXIT_OK


def cmd_cascade(args):
    if args.mask is not None:
        a = _parse_mask(args.mask, args.offset)
    else:
        a = seed_bank(args.seed, 2).filters[0]
    m0 = _parse_matrix(args.dilation) if args.dilation else IntMatrix.identity(a.dim) * 2
    if args.levels < 0:
        raise UsageError("--levels must be nonnegative")
    try:
        gf = cascade(a, m0, args.levels)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    io.write_f64(args.output, gf.samples, gf.to_metadata())
    _emit({"output": str(args.output), **gf.to_metadata()})
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser():
    p = argparse.ArgumentParser(prog="amra", description="Adaptive multiresolution filter banks and tree transforms.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check-uep", help="certify a bank file")
    c.add_argument("--bank", required=True)
    c.add_argument("--tol", type=float, default=1e-10)
    c.set_defaults(func=cmd_check_uep)

    def design_args(c):
        c.add_argument("--kind", choices=["shearlet2d", "shearlet3d", "tensor"], required=True)
        c.add_argument("--shears", help="e.g. '0,1,-1'; per level separated by '|'")
        c.add_argument("--shears3d", help="e.g. '(0,0);(1,1)'; per level separated by '|'")
        c.add_argument("--seed", choices=["haar", "linear_spline"], default="haar")
        c.add_argument("--dim", type=int, default=2, help="dimension for --kind tensor")
        c.add_argument("--dilation", type=int, default=2, help="dilation for --kind tensor")
        c.add_argument("-o", "--output", required=True)

    c = sub.add_parser("design-bank", help="construct and save a certified bank")
    design_args(c)
    c.set_defaults(func=cmd_design_bank)

    c = sub.add_parser("design-plan", help="construct and save a certified per-level plan")
    design_args(c)
    c.add_argument("--depth", type=int, required=True)
    c.set_defaults(func=cmd_design_plan)

    c = sub.add_parser("decompose", help="decompose a P5 PGM image into a pyramid directory")
    c.add_argument("--plan", required=True)
    c.add_argument("--input", required=True)
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--force", action="store_true", help="run an uncertified plan")
    c.set_defaults(func=cmd_decompose)

    c = sub.add_parser("reconstruct", help="reconstruct from a pyramid directory")
    c.add_argument("--plan", required=True)
    c.add_argument("--pyramid", required=True)
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--crop-to-input", action="store_true", help="crop to the input raster and write a PGM")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--force", action="store_true")
    c.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("rotation-approx", help="closest unimodular matrix to a rotation")
    c.add_argument("--theta", required=True, help="radians, '36deg' or '2pi/5'")
    c.add_argument("--brute-force", action="store_true")
    c.add_argument("--radius", type=int, default=3)
    c.set_defaults(func=cmd_rotation_approx)

    c = sub.add_parser("sum-rules", help="sum rule order of a mask")
    c.add_argument("--mask", required=True, help="'0.25,0.5,0.25'; 2-D rows separated by ';'")
    c.add_argument("--offset", help="lowest support corner, e.g. '-1'")
    c.add_argument("--dilation", default="2", help="'2' or '2,0;0,2'")
    c.add_argument("--tol", type=float, default=1e-10)
    c.set_defaults(func=cmd_sum_rules)

    c = sub.add_parser("cascade", help="cascade samples of a refinable function")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--seed", choices=["haar", "linear_spline"], default="haar")
    g.add_argument("--mask")
    c.add_argument("--offset")
    c.add_argument("--dilation")
    c.add_argument("--levels", type=int, required=True)
    c.add_argument("-o", "--output", default="cascade.f64")
    c.set_defaults(func=cmd_cascade)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, io.FormatError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (UncertifiedBankError, UncertifiedPlanError) as exc:
        _err(str(exc))
        return EXIT_FAIL
    except KeyError as exc:
        _err(f"pyramid mismatch: {exc}")
        return EXIT_FAIL
    except OSError as exc:
        _err(f"{exc.filename or ''}: {exc.strerror}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
