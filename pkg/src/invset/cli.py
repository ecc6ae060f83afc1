"""Command-line interface: configs in, results/exports/plots out.

Problems arrive as JSON configs (schema below), results leave as re-loadable
JSON files. Exit codes discriminate failure modes for CI scripting: 0 ok,
1 bad input, 2 solver stopped short of optimal, 3 verification failed,
4 oracle says non-member. Everything written to files is deterministic: no
wall-clock stamps, fixed sampling seeds (config "seed", overridable through
the INVSET_SEED environment variable), and a bitwise-deterministic solver.
Timings go to stderr only.

Config schema (unknown keys are rejected):
  "A"          row-major number matrix (n x n)
  "B"          row-major number matrix (n x m, or a length-n vector)
  "box"        per-axis [lo, hi] pairs, symmetric about 0
  "template"   {"kind": ..., "degree"?, "m1"?, "m2"?}
  "D_vertices" optional list of planar vertex pairs (default: built-in
               quadrilateral)
  "projection" 1-based pair of state indices spanning the plot plane
  "seed"       optional integer sampling seed (default 0)
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from ._version import __version__
from .conic import export_sdpa
from .geometry import Polytope, polytope_D, sphere_partition
from .polynomials import HomogeneousPolynomial
from .synthesis import (
    SynthesisProblem, TemplateSpec, _assemble, benchmark_gamma_ok,
    benchmark_problem, maximal_polar_contains, maximal_set_contains,
    oracle_boundary_check, oracle_deficit, run_benchmark, shadow_boundary,
    solve,
)
from .systems import ControlSystem, reduce, verify_algebraic_invariance, \
    verify_controlled_invariance
from .templates import (
    EllipsoidTemplate, PiecewiseTemplate, PolysetTemplate, polar_boundary,
    sampled_midpoint_convexity,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3
EXIT_NONMEMBER = 4

_CONFIG_KEYS = {"A", "B", "box", "template", "D_vertices", "projection", "seed"}
_TEMPLATE_KEYS = {"kind", "degree", "m1", "m2"}


class ConfigError(ValueError):
    """Schema violation; the message names the offending key."""


def _fail(key: str, why: str) -> "ConfigError":
    return ConfigError(f"config key {key!r}: {why}")


def _number_matrix(value, key: str) -> list:
    if not isinstance(value, list) or not value:
        raise _fail(key, "expected a non-empty list of rows")
    rows = value if isinstance(value[0], list) else [value]
    width = len(rows[0])
    for r in rows:
        if not isinstance(r, list) or len(r) != width:
            raise _fail(key, "rows are ragged")
        for x in r:
            if not isinstance(x, (int, float)) or isinstance(x, bool):
                raise _fail(key, f"non-numeric entry {x!r}")
    return rows


def parse_config(payload: dict):
    """Validate a ProblemConfig dict into (problem, seed)."""
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(payload) - _CONFIG_KEYS
    if unknown:
        raise _fail(sorted(unknown)[0], "unknown key")
    for required in ("A", "B", "box", "template", "projection"):
        if required not in payload:
            raise _fail(required, "missing")

    A = _number_matrix(payload["A"], "A")
    if len(A) != len(A[0]):
        raise _fail("A", f"must be square, got {len(A)}x{len(A[0])}")
    B = _number_matrix(payload["B"], "B")
    n = len(A)

    box = payload["box"]
    if (not isinstance(box, list) or len(box) != n
            or any(not isinstance(ax, list) or len(ax) != 2 for ax in box)):
        raise _fail("box", f"expected {n} [lo, hi] pairs")

    tpl = payload["template"]
    if not isinstance(tpl, dict):
        raise _fail("template", "expected an object")
    unknown = set(tpl) - _TEMPLATE_KEYS
    if unknown:
        raise _fail(f"template.{sorted(unknown)[0]}", "unknown key")
    if "kind" not in tpl:
        raise _fail("template.kind", "missing")
    try:
        spec = TemplateSpec(tpl["kind"], degree=tpl.get("degree"),
                            m1=tpl.get("m1"), m2=tpl.get("m2"))
    except ValueError as e:
        raise _fail("template", str(e))

    projection = payload["projection"]
    if (not isinstance(projection, list) or len(projection) != 2
            or any(not isinstance(i, int) or isinstance(i, bool)
                   for i in projection)):
        raise _fail("projection", "expected two integer indices")
    if any(i < 1 or i > n for i in projection):
        raise _fail("projection", f"indices are 1-based in 1..{n}")
    dims = tuple(i - 1 for i in projection)

    polytope = polytope_D()
    if "D_vertices" in payload:
        verts = payload["D_vertices"]
        if (not isinstance(verts, list) or not verts
                or any(not isinstance(v, list) or len(v) != 2 for v in verts)):
            raise _fail("D_vertices", "expected a list of [x, y] pairs")
        polytope = Polytope([np.asarray(v, dtype=float) for v in verts])

    seed = payload.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise _fail("seed", "expected an integer")

    try:
        system = ControlSystem(A, B)
        problem = SynthesisProblem(system, spec, safe_box=box,
                                   inner_polytope=polytope,
                                   projection_dims=dims)
    except ValueError as e:
        raise ConfigError(str(e))
    return problem, seed


def load_config(path: str):
    try:
        with open(path) as f:
            payload = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    problem, seed = parse_config(payload)
    return problem, seed, payload


def _effective_seed(config_seed: int) -> int:
    env = os.environ.get("INVSET_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"INVSET_SEED must be an integer, got {env!r}")
    return config_seed


def result_payload(result, config_echo: dict, seed: int) -> dict:
    """Assemble the ResultFile dict (everything deterministic, no clocks)."""
    sol = result.solution
    out = {
        "gamma": result.gamma,
        "template": result.template.to_payload() if result.template else None,
        "solver": {
            "status": result.status,
            "iterations": getattr(sol, "iterations", 0),
            "primal_residual": getattr(sol, "primal_residual", None),
            "dual_residual": getattr(sol, "dual_residual", None),
            "cone_violation": getattr(sol, "cone_violation", None),
        },
        "verification": {
            "verified": result.verified,
            "invariance_max_violation":
                result.invariance.max_violation if result.invariance else None,
            "invariance_passed":
                result.invariance.passed if result.invariance else None,
            "convexity_excess": result.convexity_excess,
            "seed": seed,
        },
        "notes": result.notes,
        "version": __version__,
        "config": config_echo,
    }
    return out


def template_from_payload(payload: dict):
    """Rebuild a support template from its ResultFile payload."""
    if not isinstance(payload, dict) or "kind" not in payload:
        raise ConfigError("result template payload is malformed")
    kind = payload["kind"]
    if kind == "ellipsoid":
        return EllipsoidTemplate(np.asarray(payload["Q"], dtype=float))
    if kind == "polyset":
        degree = int(payload["degree"])
        coeffs = {}
        for key, c in payload["coefficients"].items():
            e = tuple(int(s) for s in key.split(","))
            coeffs[e] = float(c)
        nv = len(next(iter(coeffs))) if coeffs else 0
        p = HomogeneousPolynomial(nv, degree, coeffs)
        return PolysetTemplate(p, degree // 2)
    if kind == "piecewise":
        partition = sphere_partition(int(payload["m1"]), int(payload["m2"]))
        Q_list = [np.asarray(Q, dtype=float) for Q in payload["Q_list"]]
        return PiecewiseTemplate(partition, Q_list,
                                 grid=(payload["m1"], payload["m2"]))
    raise ConfigError(f"unknown template kind {kind!r} in result")


def load_result(path: str) -> dict:
    try:
        with open(path) as f:
            payload = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read result: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"result is not valid JSON: {e}")
    if not isinstance(payload, dict) or "config" not in payload:
        raise ConfigError("result file lacks a config echo")
    return payload


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _is_benchmark_config(problem: SynthesisProblem) -> bool:
    ref = benchmark_problem(problem.template)
    same_sys = (problem.system.A.shape == ref.system.A.shape
                and np.array_equal(problem.system.A, ref.system.A)
                and np.array_equal(problem.system.B, ref.system.B))
    same_box = np.array_equal(problem.safe_box, ref.safe_box)
    same_proj = problem.projection_dims == ref.projection_dims
    verts = problem.inner_polytope.vertices
    ref_verts = ref.inner_polytope.vertices
    same_verts = (len(verts) == len(ref_verts)
                  and all(np.allclose(v, w, atol=1e-12)
                          for v, w in zip(verts, ref_verts)))
    return bool(same_sys and same_box and same_proj and same_verts)


def cmd_synthesize(args) -> int:
    problem, config_seed, echo = load_config(args.config)
    seed = _effective_seed(config_seed)
    options = {}
    if args.eps is not None:
        options["eps"] = args.eps
    if args.backend == "sdpa-file":
        program = _assemble(problem).program
        text = export_sdpa(program)
        with open(args.out, "w") as f:
            f.write(text)
        print(f"wrote SDPA program ({program.num_vars} variables, "
              f"{len(program.rows)} rows) to {args.out}")
        return EXIT_OK
    start = time.perf_counter()
    result = solve(problem, options=options or None)
    elapsed = time.perf_counter() - start
    print(f"solved in {elapsed:.1f}s", file=sys.stderr)
    _write_json(args.out, result_payload(result, echo, seed))
    print(f"gamma = {result.gamma:.6f} (status {result.status}, "
          f"verified {result.verified})")
    if result.status != "optimal":
        return EXIT_SOLVER
    if not result.verified:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args) -> int:
    payload = load_result(args.result)
    problem, config_seed = parse_config(payload["config"])
    seed = _effective_seed(config_seed)
    template = template_from_payload(payload.get("template"))

    if problem.template.kind == "baseline":
        report = verify_controlled_invariance(problem.system, template,
                                              num_samples=args.samples,
                                              tol=args.tol)
    else:
        report = verify_algebraic_invariance(reduce(problem.system), template,
                                             num_samples=args.samples,
                                             tol=args.tol)
    excess = sampled_midpoint_convexity(template, seed=seed)

    box_worst = -math.inf
    n = problem.system.dimension
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        for sgn in (1.0, -1.0):
            box_worst = max(box_worst,
                            template.support(sgn * e) - problem.half_widths[i])

    print(f"invariance max violation {report.max_violation:.3e} "
          f"(tol {args.tol:g}, passed {report.passed})")
    print(f"convexity excess {excess:.3e}")
    print(f"box support excess {box_worst:.3e}")

    oracle_ok = True
    if _is_benchmark_config(problem):
        orc = oracle_boundary_check(template, tol=args.tol,
                                    projection_dims=problem.projection_dims)
        oracle_ok = orc.passed
        print(f"oracle boundary check: {orc.num_outside}/{orc.num_points} "
              f"outside, worst deficit {orc.worst_deficit:.3e}")
    else:
        print("oracle boundary check: skipped (closed form known only for "
              "the bundled benchmark system)")

    ok = (report.passed and excess <= args.tol
          and box_worst <= args.tol and oracle_ok)
    if not ok:
        failing = []
        if not report.passed:
            failing.append("invariance")
        if excess > args.tol:
            failing.append("convexity")
        if box_worst > args.tol:
            failing.append("box")
        if not oracle_ok:
            failing.append("oracle")
        print(f"FAILED: {', '.join(failing)}")
        return EXIT_VERIFY
    print("all checks passed")
    return EXIT_OK


def cmd_plot(args) -> int:
    payload = load_result(args.result)
    problem, _ = parse_config(payload["config"])
    template = template_from_payload(payload.get("template"))
    dims = problem.projection_dims
    num = args.samples

    theta = 2.0 * np.pi * np.arange(num) / num
    primal = shadow_boundary(template, dims, theta)

    n = problem.system.dimension
    lift = np.zeros((num, n))
    lift[:, list(dims)] = np.column_stack([np.cos(theta), np.sin(theta)])
    polar = polar_boundary(template, lift)[:, list(dims)]

    with open(args.csv, "w") as f:
        f.write("space,theta,x1,x2\n")
        for k in range(num):
            f.write(f"primal,{theta[k]:.12g},{primal[k][0]:.12g},"
                    f"{primal[k][1]:.12g}\n")
        for k in range(num):
            f.write(f"polar,{theta[k]:.12g},{polar[k][0]:.12g},"
                    f"{polar[k][1]:.12g}\n")
    print(f"wrote {2 * num} rows to {args.csv}")

    if args.svg:
        _write_svg(args.svg, problem, template, primal,
                   float(payload.get("gamma", 0.0)))
        print(f"wrote figure to {args.svg}")
    return EXIT_OK


def _svg_path(points, close: bool = True) -> str:
    cmds = []
    for k, (x, y) in enumerate(points):
        cmds.append(f"{'M' if k == 0 else 'L'} {x:.4f} {y:.4f}")
    if close:
        cmds.append("Z")
    return " ".join(cmds)


def _write_svg(path: str, problem: SynthesisProblem, template,
               primal: np.ndarray, gamma: float) -> None:
    """Overlay: result boundary (blue), safe box (green), maximal-set
    boundary (yellow), gamma-scaled polytope (red). Plain paths, no deps."""
    dims = problem.projection_dims
    hw = problem.half_widths
    bx, by = hw[dims[0]], hw[dims[1]]
    world = 1.25 * max(bx, by)
    size = 480.0

    def to_px(p):
        return ((p[0] + world) / (2 * world) * size,
                (world - p[1]) / (2 * world) * size)

    # maximal set boundary: support-style sweep of the closed form over a
    # 1000-point angular march, radially bisected
    angles = 2.0 * np.pi * np.arange(1000) / 1000
    oracle_pts = []
    for a in angles:
        u = np.array([np.cos(a), np.sin(a)])
        lo, hi = 0.0, 2.0 * world
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            if oracle_deficit(mid * u) <= 0.0:
                lo = mid
            else:
                hi = mid
        oracle_pts.append(lo * u)

    gD = [gamma * np.asarray(v) for v in problem.inner_polytope.vertices]

    box_pts = [(bx, by), (-bx, by), (-bx, -by), (bx, -by)]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" '
        f'height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>',
        f'<path d="{_svg_path([to_px(p) for p in box_pts])}" fill="none" '
        'stroke="green" stroke-width="1.5"/>',
        f'<path d="{_svg_path([to_px(p) for p in oracle_pts])}" fill="none" '
        'stroke="gold" stroke-width="1.5"/>',
        f'<path d="{_svg_path([to_px(p) for p in primal])}" fill="none" '
        'stroke="blue" stroke-width="1.5"/>',
        f'<path d="{_svg_path([to_px(p) for p in gD])}" fill="none" '
        'stroke="red" stroke-width="1.5"/>',
        "</svg>",
    ]
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


def cmd_benchmark(args) -> int:
    start = time.perf_counter()
    entries = run_benchmark()
    print(f"benchmark finished in {time.perf_counter() - start:.1f}s",
          file=sys.stderr)
    ok, messages = benchmark_gamma_ok(entries)

    rows = []
    for e in entries:
        rows.append({
            "label": e.label,
            "template": e.spec_payload,
            "gamma": e.gamma,
            "status": e.status,
            "verified": e.verified,
            "oracle_outside": e.oracle.num_outside if e.oracle else None,
            "notes": e.notes,
            "error": e.error,
        })
    payload = {"entries": rows, "all_within_tolerance": ok,
               "messages": messages, "version": __version__}
    _write_json(args.out, payload)

    width = max(len(r["label"]) for r in rows)
    lines = [f"{'template':<{width}}  {'gamma':>9}  {'status':<15} verified"]
    for r in rows:
        gamma = "-" if r["gamma"] is None else f"{r['gamma']:9.6f}"
        lines.append(f"{r['label']:<{width}}  {gamma}  {r['status']:<15} "
                     f"{str(r['verified']).lower()}")
    table = "\n".join(lines)
    text_path = os.path.splitext(args.out)[0] + ".txt"
    with open(text_path, "w") as f:
        f.write(table + "\n")
    print(table)
    for m in messages:
        print(m)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_export_sdpa(args) -> int:
    problem, _, _ = load_config(args.config)
    program = _assemble(problem).program
    text = export_sdpa(program)
    with open(args.out, "w") as f:
        f.write(text)
    print(f"wrote {args.out}: {program.num_vars} variables, "
          f"{len(program.rows)} constraints, {len(program.blocks)} blocks")
    print("block legend (SDPA block <- variable block):")
    for k, blk in enumerate(program.blocks):
        if blk.kind == "psd":
            desc = f"psd {blk.side}x{blk.side}"
        elif blk.kind == "nonneg":
            desc = f"nonneg diag {blk.size}"
        else:
            # free variables are split x = x+ - x- across a diagonal block
            desc = f"free {blk.size} (split, diag {2 * blk.size})"
        print(f"  block {k + 1}: {desc}")
    return EXIT_OK


def _parse_point(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected X,Y shape, got {text!r}")
    try:
        return np.array([float(parts[0]), float(parts[1])])
    except ValueError:
        raise ConfigError(f"non-numeric point {text!r}")


def cmd_oracle(args) -> int:
    if (args.point is None) == (args.polar_point is None):
        raise ConfigError("pass exactly one of --point or --polar-point")
    if args.point is not None:
        x = _parse_point(args.point)
        member = maximal_set_contains(x)
        space = "maximal set"
    else:
        x = _parse_point(args.polar_point)
        member = maximal_polar_contains(x)
        space = "maximal-set polar"
    verdict = "member" if member else "non-member"
    print(f"({x[0]:g}, {x[1]:g}) is a {verdict} of the {space}")
    return EXIT_OK if member else EXIT_NONMEMBER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invset",
        description="Synthesize and check controlled invariant convex sets "
                    "for linear systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="solve a config into a result file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=["reference", "sdpa-file"],
                   default="reference",
                   help="reference solves in-process; sdpa-file writes the "
                        "assembled program to --out instead of solving")
    p.add_argument("--eps", type=float, default=None)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="re-check a result file")
    p.add_argument("--result", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="emit boundary CSV (and optional SVG)")
    p.add_argument("--result", required=True)
    p.add_argument("--samples", type=int, default=360)
    p.add_argument("--csv", required=True)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("benchmark", help="run the bundled benchmark table")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("export-sdpa", help="write the assembled program "
                                           "in SDPA sparse format")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_sdpa)

    p = sub.add_parser("oracle", help="closed-form membership for the "
                                      "benchmark's maximal set")
    p.add_argument("--point", default=None, metavar="X,Y")
    p.add_argument("--polar-point", default=None, metavar="X,Y")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
