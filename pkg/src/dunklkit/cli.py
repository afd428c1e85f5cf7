"""Command-line front end: ``dunklkit <subcommand> ...``.

Every subcommand is deterministic.  JSON documents carry ``schema_version``
"1"; CSV output has one header row and floats written with ``repr`` so they
re-parse exactly.  The exit status is 0 when every internal cross-check
passes and otherwise the code of the first failed check:

    2  A_k closed form against the quadrature F(1)
    3  two total-variation routes disagree
    4  total variation above A_k
    5  Gaussian transform against exp(-xi^2/2)
    6  exact product support against the root-system region
    7  probe mass outside the dilated region
    8  region cells outside the shell
    9  bisection gauge against its linear-programming oracle
    10 fitted decay rate outside [0.95, 1] times the gauge
    11 polynomially weighted transform not bounded
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import pwverify, rootgeom
from .dunkl1d import Grid1D, SampledFunction, dunkl_inverse, dunkl_transform
from .errors import DomainError
from .productnd import (
    MollifierSpec,
    ProductMultiplicity,
    gamma_eps_probe,
    product_support_indicator,
    region_indicator,
)
from .quadrature import QuadratureRule
from .translate1d import (
    kernel_scan,
    sharp_constant,
    total_variation,
    total_variation_theta,
    translate,
)

SCHEMA_VERSION = "1"

EXIT_AK = 2
EXIT_TV_ROUTES = 3
EXIT_TV_BOUND = 4
EXIT_GAUSSIAN = 5
EXIT_REGION = 6
EXIT_PROBE_MASS = 7
EXIT_SHELL = 8
EXIT_GAUGE = 9
EXIT_RATE = 10
EXIT_POLY = 11


# -- parsing helpers -----------------------------------------------------------


def _vector(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc


def _grid(text: str) -> Grid1D:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid is start,stop,count")
    return Grid1D(float(parts[0]), float(parts[1]), int(parts[2]))


def _grid_doc(g: Grid1D) -> dict:
    return {"start": g.start, "stop": g.stop, "count": g.count}


def _rule(args, base: QuadratureRule | None = None) -> QuadratureRule | None:
    if args.rel_tol is None and args.abs_tol is None:
        return base
    base = base or QuadratureRule()
    return base.with_tolerances(abs_tol=args.abs_tol, rel_tol=args.rel_tol)


def _emit_text(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _emit_json(doc: dict, path=None) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    _emit_text(json.dumps(doc, indent=2) + "\n", path)


def _gaussian(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2 / 2.0)


def _input_function(args) -> tuple[SampledFunction, list[str] | None]:
    """The input of translate/transform, plus the raw node strings of a CSV input."""
    if args.input is not None:
        text = Path(args.input).read_text() if args.input != "-" else sys.stdin.read()
        rows = list(csv.DictReader(io.StringIO(text)))
        f = SampledFunction.from_csv(io.StringIO(text), declared_support_radius=args.radius)
        return f, [r["x"] for r in rows]
    grid = args.grid
    if args.function == "gaussian":
        grid = grid or Grid1D(-10.0, 10.0, 401)
        return SampledFunction.from_callable(_gaussian, grid, args.radius), None
    R = args.radius or 1.0
    grid = grid or Grid1D(-R, R, 201)
    return pwverify.bump_function(R, grid), None


# -- subcommands ------------------------------------------------------------------


def cmd_ak(args) -> int:
    rule = _rule(args)
    if args.sweep is not None:
        kmin, kmax, n = float(args.sweep[0]), float(args.sweep[1]), int(args.sweep[2])
        ks = np.linspace(kmin, kmax, n)
    else:
        ks = np.array([args.k])
    rows, status = [], 0
    for k in ks:
        a = sharp_constant(k)
        f1 = total_variation_theta(k, 1.0, rule) if k > 0 else 1.0
        diff = abs(a - f1) / a
        if diff > args.check_tol:
            status = EXIT_AK
        rows.append({"k": float(k), "A_k": a, "F_at_1": f1, "rel_diff": diff,
                     "sqrt2_gap": math.sqrt(2.0) - a})
    if args.sweep is not None and args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([repr(v) for v in r.values()])
        _emit_text(buf.getvalue(), args.out)
    elif args.sweep is not None:
        _emit_json({"rows": rows, "check_tol": args.check_tol}, args.out)
    else:
        _emit_json({**rows[0], "check_tol": args.check_tol}, args.out)
    return status


def cmd_tv(args) -> int:
    rule = _rule(args)
    k, x, y = args.k, args.x, args.y
    theta = total_variation(k, x, y, "theta", rule)
    direct = total_variation(k, x, y, "direct", rule)
    a = sharp_constant(k)
    agree = abs(theta - direct) <= args.check_tol * max(1.0, abs(theta))
    bound_ok = theta <= a + 1e-9 and direct <= a + 1e-9
    _emit_json({"k": k, "x": x, "y": y, "A_k": a, "tv_at(x,y)": theta, "tv_direct": direct,
                "routes_agree": agree, "bound_ok": bound_ok, "check_tol": args.check_tol}, args.out)
    if not agree:
        return EXIT_TV_ROUTES
    return 0 if bound_ok else EXIT_TV_BOUND


def cmd_kernel(args) -> int:
    span = abs(args.x) + abs(args.y)
    grid = args.grid or Grid1D(-span, span, 2000)
    scan = kernel_scan(args.k, args.x, args.y, grid)
    if args.format == "csv":
        _emit_text(scan.to_csv(), args.out)
        return 0
    ok = np.isfinite(scan.weighted_gamma)
    mass = float(np.trapezoid(scan.weighted_gamma[ok], scan.z[ok])) if hasattr(np, "trapezoid") \
        else float(np.trapz(scan.weighted_gamma[ok], scan.z[ok]))
    _emit_json({"k": args.k, "x": args.x, "y": args.y, "grid": _grid_doc(grid),
                "trapezoid_mass": mass, "singular_nodes": int((~ok).sum()),
                "samples": [{"z": float(z), "gamma": float(g), "weighted_gamma": float(w)}
                            for z, g, w in zip(scan.z, scan.gamma, scan.weighted_gamma)]},
               args.out)
    return 0


def _sampled_csv(f: SampledFunction, nodes: list[str] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "re", "im"])
    xs = nodes if nodes is not None else [repr(float(v)) for v in f.nodes]
    for x, v in zip(xs, f.values):
        writer.writerow([x, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def cmd_translate(args) -> int:
    f, raw_nodes = _input_function(args)
    out_grid = args.y_grid or f.grid
    g = translate(args.k, args.x, f, out_grid, _rule(args))
    nodes = raw_nodes if (raw_nodes is not None and out_grid == f.grid) else None
    if args.format == "csv":
        _emit_text(_sampled_csv(g, nodes), args.out)
    else:
        _emit_json({"k": args.k, "x": args.x, "grid": _grid_doc(out_grid),
                    "samples": g.to_records()}, args.out)
    return 0


def cmd_transform(args) -> int:
    f, _ = _input_function(args)
    xi_grid = args.xi_grid or Grid1D(-10.0, 10.0, 201)
    op = dunkl_inverse if args.inverse else dunkl_transform
    h = op(args.k, f, xi_grid, _rule(args))
    status, deviation = 0, None
    if args.function == "gaussian" and args.input is None:
        deviation = float(np.max(np.abs(h.values - _gaussian(h.nodes))))
        if deviation > args.check_tol:
            status = EXIT_GAUSSIAN
    if args.format == "csv":
        _emit_text(_sampled_csv(h), args.out)
    else:
        doc = {"k": args.k, "inverse": args.inverse, "grid": _grid_doc(xi_grid),
               "samples": h.to_records()}
        if deviation is not None:
            doc["gaussian_max_deviation"] = deviation
        _emit_json(doc, args.out)
    if deviation is not None:
        print(f"gaussian max deviation {deviation:.3e}", file=sys.stderr)
    return status


def cmd_support2d(args) -> int:
    rs = rootgeom.root_system(args.root)
    if rs.dimension != 2 or rs.order != 4:
        raise DomainError("support2d runs the product case A1xA1 only")
    x, y = args.x, args.y
    reach = max(abs(x[j]) + abs(y[j]) for j in range(2))
    span = args.span or 1.2 * reach
    status = 0

    # indicator grids: exact tensor support against the root-system region
    zi = Grid1D(-span, span, args.indicator_grid).nodes
    exact = product_support_indicator(x, y, zi, zi)
    region = region_indicator(x, y, zi, zi, args.root)
    diff = exact ^ region
    boundary = _boundary_cells(exact)
    unexplained = int((diff & ~boundary).sum())
    if unexplained:
        status = status or EXIT_REGION

    shell_ok = True
    if args.shell:
        shell_ok = all(rootgeom.support_shell_contains(x, y, (a, b))
                       for a, b in zip(*(zi[i] for i in np.nonzero(region))))
        if not shell_ok:
            status = status or EXIT_SHELL

    doc = {"root": args.root, "x": list(x), "y": list(y),
           "indicator_grid": {"start": -span, "stop": span, "count": args.indicator_grid},
           "indicator_mismatch_cells": int(diff.sum()),
           "indicator_mismatch_off_boundary": unexplained}
    if args.shell:
        doc["shell_contains_region"] = shell_ok

    if args.eps is not None:
        pk = ProductMultiplicity(args.k)
        spec = MollifierSpec(args.eps, args.mollifier_radius, pk, args.profile)
        g = Grid1D(-span, span, args.grid)
        probe = gamma_eps_probe(pk, spec, x, y, (g, g))
        if probe.outside_fraction >= args.outside_limit:
            status = status or EXIT_PROBE_MASS
        if args.csv:
            probe.to_csv(args.csv)
        doc.update(probe.sidecar())
        doc.update({"probe_grid": _grid_doc(g), "profile": args.profile,
                    "mollifier_radius": args.mollifier_radius,
                    "outside_limit": args.outside_limit})
    _emit_json(doc, args.out)
    return status


def _boundary_cells(mask: np.ndarray) -> np.ndarray:
    # cells within one step of a change in the mask
    edge = np.zeros_like(mask)
    for axis in (0, 1):
        change = np.diff(mask.astype(np.int8), axis=axis) != 0
        lo = [slice(None)] * 2
        hi = [slice(None)] * 2
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        edge[tuple(lo)] |= change
        edge[tuple(hi)] |= change
    return edge


def cmd_rootinfo(args) -> int:
    rs = rootgeom.root_system(args.root)
    if args.lam is None:
        # half the sum of the positive roots is regular, hence admissible
        lam = 0.5 * rs.positive_roots.sum(axis=0)
    else:
        lam = np.asarray(args.lam, dtype=float)
    g0 = rootgeom.longest_element(rs)
    admissible = rootgeom.is_admissible(rs, lam)
    status = 0
    samples = []
    if admissible:
        for j in range(args.directions):
            ang = 2.0 * math.pi * j / args.directions
            xi = np.zeros(rs.dimension)
            xi[0] = math.cos(ang)
            if rs.dimension > 1:
                xi[1] = math.sin(ang)
            chi = rootgeom.gauge(rs, lam, xi)
            chi_lp = rootgeom.polar_support_lp(rs, lam, xi)
            pol = rootgeom.polar_gauge(rs, lam, xi)
            pol_sf = rootgeom.support_function(rs, lam, xi)
            if abs(chi - chi_lp) > 1e-6 or abs(pol - pol_sf) > 1e-6:
                status = EXIT_GAUGE
            samples.append({"xi": xi.tolist(), "gauge": chi, "gauge_lp": chi_lp,
                            "polar_gauge": pol, "support_function": pol_sf})
    lam_plus, _ = rootgeom.dominant_rep(rs, lam)
    _emit_json({
        "root": args.root,
        "order": rs.order,
        "crystallographic": rs.crystallographic,
        "simple_roots": rs.simple_roots.tolist(),
        "positive_roots": rs.positive_roots.tolist(),
        "longest_element": g0.matrix.tolist(),
        "longest_is_minus_identity": bool(np.allclose(g0.matrix, -np.eye(rs.dimension))),
        "lambda": lam.tolist(),
        "lambda_dominant": lam_plus.tolist(),
        "admissible": admissible,
        "gauge_samples": samples,
        "orbit_vertices": rootgeom.orbit(rs, lam).tolist(),
    }, args.out)
    return status


def cmd_pw(args) -> int:
    status = 0
    if args.radii is not None:
        v = np.asarray(args.direction or (1.0, 0.0), dtype=float)
        v = v / np.linalg.norm(v)
        ks = args.product_k or (args.k, args.k)
        report = pwverify.gauge_decay_check_2d(ks, args.radii, v, rule=_rule(args))
    else:
        f = pwverify.bump_function(args.radius)
        report = pwverify.transform_on_vertical_line(args.k, f, rule=_rule(args))
    if not (args.rate_low <= report.ratio <= args.rate_high):
        status = EXIT_RATE
    doc = report.to_dict()
    doc.update({"rate_window": [args.rate_low, args.rate_high],
                "t_range": [report.t_samples[0], report.t_samples[-1]],
                "t_count": len(report.t_samples)})
    if args.poly is not None:
        R = args.radius if args.radii is None else 1.0
        poly = pwverify.real_axis_decay(args.k, pwverify.bump_function(R), M=args.poly)
        report.polynomial_order_checked = args.poly
        doc["polynomial_order_checked"] = args.poly
        doc["real_axis"] = poly
        if not poly["bounded"]:
            status = status or EXIT_POLY
    _emit_json(doc, args.out)
    return status


# -- parser -----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # usage errors exit with 1 so that 2 stays reserved for the A_k check
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rel-tol", type=float, default=None, help="quadrature relative tolerance")
    common.add_argument("--abs-tol", type=float, default=None, help="quadrature absolute tolerance")
    common.add_argument("--out", default=None, help="output path (default: standard output)")

    p = _Parser(prog="dunklkit", description=__doc__.split("\n")[0],
                epilog="grids are start,stop,count; write --grid=-1,1,11 when start is negative")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ak", parents=[common], help="sharp constant A_k with its quadrature check")
    s.add_argument("--k", type=float, default=1.0)
    s.add_argument("--sweep", nargs=3, metavar=("KMIN", "KMAX", "N"), default=None)
    s.add_argument("--format", choices=("csv", "json"), default="json")
    s.add_argument("--check-tol", type=float, default=1e-6)
    s.set_defaults(func=cmd_ak)

    s = sub.add_parser("tv", parents=[common], help="total variation of the translation measure")
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--check-tol", type=float, default=1e-7)
    s.set_defaults(func=cmd_tv)

    s = sub.add_parser("kernel", parents=[common],
                       help="density scan; default grid 2000 nodes on [-(|x|+|y|), |x|+|y|]")
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--grid", type=_grid, default=None, help="start,stop,count")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_kernel)

    for name, func, helptext in (
        ("translate", cmd_translate, "generalized translation of a sampled function"),
        ("transform", cmd_transform, "Dunkl transform (default xi-grid -10,10,201)"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--k", type=float, required=True)
        s.add_argument("--input", default=None, help="CSV with header x,re,im ('-' for stdin)")
        s.add_argument("--function", choices=("gaussian", "bump"), default="gaussian",
                       help="built-in input: gaussian on -10,10,401 or bump on -R,R,201")
        s.add_argument("--radius", type=float, default=None, help="declared support radius")
        s.add_argument("--grid", type=_grid, default=None, help="grid of the built-in input")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        s.set_defaults(func=func)
        if name == "translate":
            s.add_argument("--x", type=float, required=True)
            s.add_argument("--y-grid", type=_grid, default=None, help="default: the input grid")
        else:
            s.add_argument("--xi-grid", type=_grid, default=None)
            s.add_argument("--inverse", action="store_true")
            s.add_argument("--check-tol", type=float, default=1e-7)

    s = sub.add_parser("support2d", parents=[common],
                       help="product-case support region and the mollified kernel probe")
    s.add_argument("--root", default="A1xA1")
    s.add_argument("--x", type=_vector, required=True)
    s.add_argument("--y", type=_vector, required=True)
    s.add_argument("--k", type=_vector, default=(1.0, 1.0))
    s.add_argument("--eps", type=float, default=None, help="run the probe at this eps")
    s.add_argument("--grid", type=int, default=145, help="probe nodes per axis (default 145)")
    s.add_argument("--indicator-grid", type=int, default=200, help="indicator nodes per axis")
    s.add_argument("--span", type=float, default=None, help="half-width (default 1.2 max(|x_j|+|y_j|))")
    s.add_argument("--profile", choices=("radial", "tensor"), default="radial")
    s.add_argument("--mollifier-radius", type=float, default=0.5)
    s.add_argument("--outside-limit", type=float, default=0.01)
    s.add_argument("--shell", action="store_true", help="check the region against the shell")
    s.add_argument("--csv", default=None, help="write the z1,z2,gamma_eps heatmap here")
    s.set_defaults(func=cmd_support2d)

    s = sub.add_parser("rootinfo", parents=[common], help="group, longest element and gauge samples")
    s.add_argument("--root", required=True)
    s.add_argument("--lambda", dest="lam", type=_vector, default=None,
                   help="spectral parameter (default: half the sum of positive roots)")
    s.add_argument("--directions", type=int, default=8)
    s.set_defaults(func=cmd_rootinfo)

    s = sub.add_parser("pw", parents=[common],
                       help="exponential decay rate along the imaginary axis (t R up to 1500)")
    s.add_argument("--k", type=float, default=0.5)
    s.add_argument("--radius", type=float, default=1.0, help="1D support radius")
    s.add_argument("--radii", type=_vector, default=None, help="rectangle half-widths R1,R2")
    s.add_argument("--product-k", type=_vector, default=None)
    s.add_argument("--direction", type=_vector, default=None)
    s.add_argument("--poly", type=int, default=None, metavar="M",
                   help="also check (1+|xi|)^M |h| on [0, 200]")
    s.add_argument("--rate-low", type=float, default=0.95)
    s.add_argument("--rate-high", type=float, default=1.0)
    s.set_defaults(func=cmd_pw)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"dunklkit: {exc}", file=sys.stderr)
        return 1
