"""Batch command-line front end.

Every command reads JSON (from a file or inline), validates it against
the schema shipped under deglab/schemas/, runs the matching library
operation and writes a JSON (or SVG/text) report.  Exit codes: 0 on
success, 2 on validation errors, 3 on computation failures.  The
environment variable DEGLAB_THREADS caps internal parallelism.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import jsonschema

from . import analysis, config as cfg, locus as loc, symmetroid as sym
from .exactlin import Mat, Subspace, as_rational, mat_to_json, rational_str
from .pencil import MatrixTuple

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3

COMMANDS = ("locus", "config", "recipe", "symmetroid", "nodes", "dim", "pr-test", "fiber", "plot", "demo")


class ValidationFailure(Exception):
    pass


class ComputationFailure(Exception):
    pass


@dataclass
class JobSpec:
    command: str
    input_path: str | None = None
    seed: int = 0
    tol: float = 1e-8
    trials: int = 3
    m: int | None = None
    r: int | None = None
    kind: str | None = None
    output_path: str | None = None
    fmt: str = "json"


def load_schema(command: str) -> dict:
    name = f"{command}.json"
    path = importlib.resources.files("deglab").joinpath("schemas").joinpath(name)
    return json.loads(path.read_text())


def _load_input(job: JobSpec) -> dict:
    if job.input_path is None:
        raise ValidationFailure(f"command '{job.command}' requires --input")
    text = job.input_path
    if not text.lstrip().startswith("{"):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as e:
            raise ValidationFailure(f"cannot read input file: {e}") from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationFailure(f"malformed JSON: {e}") from e
    _validate(job.command, obj)
    return obj


def _validate(command: str, obj: dict):
    schema = load_schema(command)
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ValidationFailure(f"input does not match the {command} schema at {path}: {e.message}")


def _parse_point(p):
    out = []
    for v in p:
        if isinstance(v, list):  # [re, im]
            out.append(complex(v[0], v[1]))
        elif isinstance(v, float):
            out.append(v)
        else:
            out.append(as_rational(v))
    if any(isinstance(v, (float, complex)) for v in out):
        return [complex(v) if not isinstance(v, complex) else v for v in out]
    return out


def _family_from_json(obj) -> loc.RankOneFamily:
    if "vectors" in obj:
        return loc.RankOneFamily.from_vectors(obj["vectors"])
    return loc.RankOneFamily.from_matrices([Mat(a) for a in obj["E"]])


# ---------------------------------------------------------------------------
# command implementations


def _cmd_locus(job: JobSpec, obj: dict) -> dict:
    if "matrices" in obj:
        t = MatrixTuple.from_json(obj)
        if t.m != 3:
            raise ValidationFailure(
                f"unsupported combination m={t.m}, r={t.r}: the numeric solver needs m=3; "
                "pass a rank-one family for the exact structured path"
            )
        result = loc.solve_locus_p2(t, tol=job.tol)
    else:
        result = loc.structured_locus(_family_from_json(obj))
    return {"command": "locus", "tol": job.tol, **result.to_json()}


def _cmd_config(job: JobSpec, obj: dict) -> dict:
    if "points" in obj:
        pc = cfg.PointConfig.from_points(
            [_parse_point(p) for p in obj["points"]], labels=obj.get("labels"), tol=job.tol
        )
        report = cfg.is_quadrilateral(pc, tol=job.tol)
    else:
        subs = [
            Subspace.from_spanning([[as_rational(v) for v in row] for row in s["basis"]], obj["m"])
            for s in obj["subspaces"]
        ]
        report = cfg.is_generalized_desargues(subs, obj["m"], tol=job.tol)
    return {"command": "config", "tol": job.tol, **report.to_json()}


def _cmd_recipe(job: JobSpec, obj: dict) -> dict:
    pc = cfg.PointConfig.from_points(
        [_parse_point(p) for p in obj["points"]], labels=obj.get("labels"), tol=job.tol
    )
    t = cfg.quadrilateral_to_matrices(pc, tol=job.tol)
    return {"command": "recipe", **t.to_json()}


def _cmd_symmetroid(job: JobSpec, obj: dict) -> dict:
    t = MatrixTuple.from_json(obj)
    s = sym.build_symmetroid(t)
    return {"command": "symmetroid", **s.to_json()}


def _cmd_nodes(job: JobSpec, obj: dict) -> dict:
    if "matrices" in obj:
        t = MatrixTuple.from_json(obj)
        surface = sym.build_symmetroid(t)
        certs = [sym.verify_node(surface, _parse_point(p), tol=job.tol) for p in obj["points"]]
    else:
        fam = _family_from_json(obj)
        if "coefficients" in obj:
            coeffs = loc.SpanCoefficients.from_rows(obj["coefficients"])
        else:
            coeffs = loc.SpanCoefficients.identity(len(fam.E))
        certs = sym.structured_nodes(fam, coeffs)
    return {"command": "nodes", "nodes": [c.to_json() for c in certs]}


def _cmd_dim(job: JobSpec, obj: dict) -> dict:
    kind = obj["kind"]
    m = obj["m"]
    if kind == "symmetroid":
        if obj.get("r") is None:
            raise ValidationFailure("kind 'symmetroid' requires --r")
        p = analysis.Parametrization.symmetroid_coeffs(m, obj["r"])
    elif kind == "span":
        p = analysis.Parametrization.rank_one_span(m)
    else:
        p = analysis.Parametrization.rank_one_span_fixed_kernels(m)
    report = analysis.jacobian_rank(p, trials=obj.get("trials", 3), seed=obj.get("seed", 0))
    return {"command": "dim", **report.to_json()}


def _cmd_pr_test(job: JobSpec, obj: dict) -> dict:
    if "matrices" in obj:
        t = MatrixTuple.from_json(obj)
        verdict = analysis.phase_retrieval_test(t, tol=job.tol)
    else:
        verdict = analysis.phase_retrieval_test(_family_from_json(obj), tol=job.tol)
    return {"command": "pr-test", "tol": job.tol, **verdict.to_json()}


def _cmd_fiber(job: JobSpec, obj: dict) -> dict:
    Q, rank = loc.fiber_system(Mat(obj["A1"]), Mat(obj["A2"]))
    return {"command": "fiber", "Q": mat_to_json(Q), "rank": rank}


def _cmd_plot(job: JobSpec, obj: dict) -> str:
    points = [_parse_point(p) for p in obj["points"]]
    lines = [_parse_point(l) for l in obj.get("lines", [])]
    return cfg.render_svg(points, lines, labels=obj.get("labels"))


# ---------------------------------------------------------------------------
# demo: replay the golden examples


def _demo_cases():
    from .pencil import MultiPoly, build_L, det_pencil, hilbert_burch_swap
    import random

    std_family = loc.RankOneFamily.from_vectors([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])
    cayley = loc.span_tuple(std_family, loc.SpanCoefficients.identity(4))
    std_points = {(1, -1, 0), (1, 0, -1), (0, 1, -1), (1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def six_points():
        return loc.structured_locus(std_family).exact_point_set() == std_points

    def cayley_pencil():
        U = hilbert_burch_swap(build_L(cayley))
        u1, u2, u3, u4 = (MultiPoly.variable(i, 4) for i in range(4))
        rows = U.poly_rows()
        expect = [[u1 + u4, u4, u4], [u4, u2 + u4, u4], [u4, u4, u3 + u4]]
        return all(rows[i][j] == expect[i][j] for i in range(3) for j in range(3))

    def cayley_cubic():
        u1, u2, u3, u4 = (MultiPoly.variable(i, 4) for i in range(4))
        return det_pencil(cayley) == u1 * u2 * u3 + u1 * u2 * u4 + u1 * u3 * u4 + u2 * u3 * u4

    def bilinear_identity():
        rng = random.Random(0)
        L = build_L(cayley)
        U = hilbert_burch_swap(L)
        for _ in range(100):
            x = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3)]
            u = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(4)]
            if L.evaluate(x).matvec(u) != U.evaluate(u).matvec(x):
                return False
        return True

    def second_symmetroid():
        t = MatrixTuple.from_arrays([
            [[-1, 0, 0], [0, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [0, -1, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 0, 0], [0, 0, -1]],
            [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
        ])
        u1, u2, u3, u4 = (MultiPoly.variable(i, 4) for i in range(4))
        expect = 2 * u4**3 + u4**2 * (u1 + u2 + u3) - u1 * u2 * u3
        return det_pencil(t) == expect

    def cubic_image():
        rng = random.Random(1)
        x, y, z = (MultiPoly.variable(i, 3) for i in range(3))
        f0, f1, f2, f3 = x * y * (x + y), x * z * (x + z), y * z * (y + z), x * y * z
        for _ in range(100):
            P = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3)]
            v0, v1, v2, v3 = (f.evaluate(P) for f in (f0, f1, f2, f3))
            if 2 * v3**3 + v3**2 * (v0 + v1 + v2) - v0 * v1 * v2 != 0:
                return False
        return True

    def cayley_nodes():
        certs = sym.structured_nodes(std_family, loc.SpanCoefficients.identity(4))
        pts = {tuple(int(v) for v in c.point) for c in certs}
        coords = {tuple(int(i == j) for i in range(4)) for j in range(4)}
        return pts == coords and all(c.certified for c in certs)

    def fiber_q():
        Q, rank = loc.fiber_system(
            Mat([[3, 5, 6], [7, 2, 4], [5, 2, 8]]), Mat([[1, 4, 3], [5, 3, 2], [5, 1, 7]])
        )
        expect = Mat([[90, 64, -90, -64, 0, 0], [-6, -12, 0, 0, 6, 12], [0, 0, 68, 37, -68, -37]])
        return Q == expect and rank == 3

    def dims():
        want = {
            ("symmetroid", 3, 4): 16,
            ("symmetroid", 4, 5): 35,
            ("span", 3, None): 32,
            ("span", 4, None): 55,
            ("span-fixed", 3, None): 24,
            ("span-fixed", 4, None): 40,
        }
        for (kind, m, r), expect in want.items():
            if kind == "symmetroid":
                p = analysis.Parametrization.symmetroid_coeffs(m, r)
            elif kind == "span":
                p = analysis.Parametrization.rank_one_span(m)
            else:
                p = analysis.Parametrization.rank_one_span_fixed_kernels(m)
            if analysis.jacobian_rank(p, trials=2, seed=0).rank != expect:
                return False
        return True

    def cubic_basis():
        pc = cfg.PointConfig.from_points(sorted(std_points))
        basis = sym.cubic_system_from_points(pc)
        x, y, z = (MultiPoly.variable(i, 3) for i in range(3))
        named = [x * y * (x + y), x * z * (x + z), y * z * (y + z), x * y * z]
        return sym.cubic_span_matrix(basis) == sym.cubic_span_matrix(named)

    def desargues():
        fam = loc.RankOneFamily.from_vectors(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1]]
        )
        res = loc.structured_locus(fam)
        rep = cfg.is_generalized_desargues([c.subspace for c in res.components], 4)
        return (
            rep.verdict is cfg.Verdict.DESARGUES
            and len(rep.hyperplanes) == 5
            and len(rep.intersection_points) == 10
        )

    def sylvester():
        return all(sym.sylvester_derivative_check(m) for m in (2, 3, 4))

    def recipe_round_trip():
        pc = cfg.PointConfig.from_points(sorted(std_points))
        t = cfg.quadrilateral_to_matrices(pc)
        fam = loc.RankOneFamily.from_matrices(list(t.matrices))
        return loc.structured_locus(fam).exact_point_set() == std_points

    return [
        ("six-rational-points", six_points),
        ("cayley-pencil-swap", cayley_pencil),
        ("cayley-cubic-form", cayley_cubic),
        ("bilinear-identity", bilinear_identity),
        ("second-symmetroid-form", second_symmetroid),
        ("cubic-image-on-surface", cubic_image),
        ("cayley-nodes", cayley_nodes),
        ("fiber-system-rank", fiber_q),
        ("jacobian-dimensions", dims),
        ("cubic-basis-span", cubic_basis),
        ("desargues-configuration", desargues),
        ("sylvester-derivative", sylvester),
        ("recipe-round-trip", recipe_round_trip),
    ]


def _cmd_demo(job: JobSpec) -> tuple:
    rows = []
    ok = True
    for name, fn in _demo_cases():
        try:
            passed = bool(fn())
        except Exception as e:  # a crash is a failure, not an abort
            passed = False
            name = f"{name} ({type(e).__name__})"
        ok &= passed
        rows.append((name, passed))
    width = max(len(n) for n, _ in rows)
    lines = [f"{name:<{width}}  {'PASS' if p else 'FAIL'}" for name, p in rows]
    lines.append(f"{sum(p for _, p in rows)}/{len(rows)} golden examples pass")
    return ok, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# dispatch


def run(job: JobSpec) -> tuple:
    """Execute a job; returns (exit code, report text)."""
    try:
        if job.command == "demo":
            ok, text = _cmd_demo(job)
            return (EXIT_OK if ok else EXIT_COMPUTATION), text
        if job.command == "dim":
            obj = {
                "kind": job.kind,
                "m": job.m,
                "r": job.r,
                "trials": job.trials,
                "seed": job.seed,
            }
            if job.kind is None or job.m is None:
                raise ValidationFailure("dim requires --kind and --m")
            _validate("dim", obj)
            report = _cmd_dim(job, obj)
            return EXIT_OK, _render(report, job)
        if job.command == "plot":
            obj = _load_input(job)
            svg = _cmd_plot(job, obj)
            return EXIT_OK, svg
        handler = {
            "locus": _cmd_locus,
            "config": _cmd_config,
            "recipe": _cmd_recipe,
            "symmetroid": _cmd_symmetroid,
            "nodes": _cmd_nodes,
            "pr-test": _cmd_pr_test,
            "fiber": _cmd_fiber,
        }[job.command]
        obj = _load_input(job)
        report = handler(job, obj)
        return EXIT_OK, _render(report, job)
    except ValidationFailure as e:
        return EXIT_VALIDATION, f"validation error: {e}\n"
    except (loc.SolverError, loc.DegenerateFamilyError, loc.DecompositionError) as e:
        return EXIT_COMPUTATION, f"computation failed: {e}\n"
    except (ValueError, TypeError) as e:
        return EXIT_VALIDATION, f"validation error: {e}\n"


def _render(report: dict, job: JobSpec) -> str:
    if job.fmt == "text":
        return _as_text(report) + "\n"
    return json.dumps(report, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return rational_str(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o)}")


def _as_text(report: dict, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in report.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_as_text(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], (dict, list)):
            lines.append(f"{pad}{k}: {json.dumps(v, default=_json_default)}")
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deglab",
        description="Degeneracy loci of matrix tuples: exact configurations, symmetroids, phase retrieval.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} operation")
        p.add_argument("--input", dest="input_path", help="input file path or inline JSON")
        p.add_argument("--output", dest="output_path", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--trials", type=int, default=3)
        p.add_argument("--m", type=int)
        p.add_argument("--r", type=int)
        p.add_argument("--kind", choices=["symmetroid", "span", "span-fixed"])
        p.add_argument("--format", dest="fmt", choices=["json", "svg", "text"], default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = JobSpec(
        command=args.command,
        input_path=args.input_path,
        seed=args.seed,
        tol=args.tol,
        trials=args.trials,
        m=args.m,
        r=args.r,
        kind=args.kind,
        output_path=args.output_path,
        fmt=args.fmt,
    )
    code, text = run(job)
    if job.output_path and code == EXIT_OK:
        with open(job.output_path, "w") as fh:
            fh.write(text)
    else:
        stream = sys.stdout if code == EXIT_OK else sys.stderr
        stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
