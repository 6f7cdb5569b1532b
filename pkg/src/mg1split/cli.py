"""Command line interface: ``mg1split {solve,bench,analyze,gen}``.

Exit codes: 0 success, 1 usage error, 2 invalid model, 3 no convergence.
"""

import argparse
import csv
import io
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import analysis
from .exceptions import GuardExceededError, ParseError, PerronFailure, ValidationError
from .model import drift, ensure_valid
from .problems import gen_example_1a, gen_example_1b, load_matrix, load_model, save_matrix, save_model
from .solvers import METHODS, SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NOCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    return f"{x:.17g}"


def _method_name(token):
    name = token.strip().replace("-", "_")
    if name not in METHODS:
        raise UsageError(f"unknown method {token!r}")
    return name


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _grid(text):
    try:
        lo, hi, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be LO:HI:STEP") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("grid needs STEP > 0 and HI >= LO")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _add_model_source(p):
    src = p.add_argument_group("model source (choose one)")
    src.add_argument("--model", metavar="FILE", help="model file")
    src.add_argument("--example-1a", action="store_true", help="block tridiagonal example")
    src.add_argument("--example-1b", action="store_true", help="five-state geometric example")
    src.add_argument("--n", type=int, default=100, help="block size for --example-1a")
    src.add_argument("--delta", type=float, default=1e-2, help="drift magnitude for --example-1a")
    src.add_argument("--p", type=float, default=0.3, help="decay for --example-1b")
    src.add_argument("--q-trunc", type=int, default=50, help="truncation for --example-1b")
    src.add_argument("--stochastic-tol", type=float, default=1e-8)


def _has_model_source(args):
    return bool(args.model) + bool(args.example_1a) + bool(args.example_1b)


def _load_source(args):
    count = _has_model_source(args)
    if count != 1:
        raise UsageError("give exactly one of --model, --example-1a, --example-1b")
    try:
        if args.model:
            model = load_model(args.model, stochastic_tol=args.stochastic_tol, check=False)
        elif args.example_1a:
            model = gen_example_1a(args.n, args.delta)
        else:
            model = gen_example_1b(args.p, args.q_trunc, stochastic_tol=args.stochastic_tol)
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise UsageError(str(exc)) from None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ensure_valid(model)
    return model


def _start_spec(text):
    if text in ("zero", "uniform"):
        return text
    if text.startswith("file:"):
        return load_matrix(text[5:])
    raise UsageError("--start must be zero, uniform or file:PATH")


def write_trace(trace, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "residual", "omega", "seconds"])
        for k, r, omega, sec in trace:
            w.writerow([k, fmt(r), fmt(omega), fmt(sec)])


def cmd_solve(args):
    model = _load_source(args)
    config = SolverConfig(
        method=_method_name(args.method),
        start=_start_spec(args.start),
        tol=args.tol,
        max_iter=args.max_iter,
        trace_every=args.trace_every,
        omega=args.omega,
        omega_hat=args.omega_hat,
    )
    result = solve(model, config)
    print(f"method={config.method}")
    print(f"iterations={result.iterations}")
    print(f"converged={'true' if result.converged else 'false'}")
    print(f"residual={fmt(result.final_residual)}")
    try:
        print(f"drift={fmt(drift(model).eta)}")
    except PerronFailure as exc:
        print(f"drift=nan  # {exc}")
    if result.trace:
        print(f"elapsed_seconds={result.trace[-1][3]:.6f}")
    if args.trace:
        write_trace(result.trace, args.trace)
    if args.out:
        save_matrix(result.G_approx, args.out, comment=f"G from {config.method}, {result.iterations} iterations")
    return EXIT_OK if result.converged else EXIT_NOCONV


@dataclass
class BenchRow:
    table: str
    method: str
    n: int
    q: int
    param: str
    value: float
    omega: float
    iterations: int
    converged: bool
    final_residual: float
    elapsed_seconds: float
    estimated_ops: float
    error: str = ""


def _bench_cell(cell):
    table, value, method, omega, opts = cell
    if table == "1a":
        param, n, q = "delta", opts["n"], 1
    else:
        param, n, q = "p", 5, opts["q_trunc"]
    row = BenchRow(table, method, n, q, param, value, omega, 0, False, float("nan"), 0.0, 0.0)
    try:
        if table == "1a":
            model = gen_example_1a(n, value)
        else:
            model = gen_example_1b(value, q)
        t0 = time.perf_counter()
        res = solve(
            model,
            method=method,
            omega=omega,
            omega_hat=opts["omega_hat"],
            tol=opts["tol"],
            max_iter=opts["max_iter"],
            trace_every=opts["trace_every"],
        )
        row.elapsed_seconds = time.perf_counter() - t0
        row.iterations = res.iterations
        row.converged = res.converged
        row.final_residual = res.final_residual
        gamma = opts["gamma"] if opts["gamma"] is not None else n
        row.estimated_ops = analysis.cost_per_step(method, n, max(q, 1), gamma) * res.iterations
    except Exception as exc:  # recorded, never aborts the sweep
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _label(row):
    if row.method == "relaxed":
        return f"relaxed({row.omega:g})"
    return row.method


def format_table(rows):
    labels = list(dict.fromkeys(_label(r) for r in rows))
    values = list(dict.fromkeys(r.value for r in rows))
    cell = {(r.value, _label(r)): r for r in rows}
    param = rows[0].param if rows else "param"
    header = [param] + labels
    body = []
    for v in values:
        line = [f"{v:g}"]
        for lab in labels:
            r = cell.get((v, lab))
            if r is None:
                line.append("")
            elif r.error:
                line.append("error")
            else:
                line.append(f"{r.iterations}" + ("" if r.converged else "*"))
        body.append(line)
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    out = [" | ".join(h.rjust(w) for h, w in zip(header, widths))]
    out.append("-+-".join("-" * w for w in widths))
    out.extend(" | ".join(x.rjust(w) for x, w in zip(line, widths)) for line in body)
    return "\n".join(out)


def run_bench(cells, jobs=1):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_bench_cell, cells))
    return [_bench_cell(c) for c in cells]


def cmd_bench(args):
    methods = [_method_name(m) for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise UsageError("--methods must name at least one method")
    if args.table == "1a":
        values = args.deltas or ([1e-2, 1e-4] if args.full else [1e-2])
        tol = args.tol if args.tol is not None else 1e-13
    else:
        values = args.p or ([0.3, 0.48, 0.5, 0.55] if args.full else [0.3, 0.48, 0.55])
        tol = args.tol if args.tol is not None else 1e-8
    opts = {
        "n": args.n,
        "q_trunc": args.q_trunc,
        "omega_hat": args.omega_hat,
        "tol": tol,
        "max_iter": args.max_iter,
        "trace_every": args.trace_every,
        "gamma": args.gamma,
    }
    cells = []
    for value in values:
        for method in methods:
            omegas = args.omegas if method == "relaxed" else [1.0]
            for omega in omegas:
                cells.append((args.table, value, method, omega, opts))
    rows = run_bench(cells, args.jobs)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(asdict(rows[0])))
            w.writeheader()
            for r in rows:
                d = asdict(r)
                for key in ("value", "omega", "final_residual", "elapsed_seconds", "estimated_ops"):
                    d[key] = fmt(d[key])
                w.writerow(d)
    print(format_table(rows))
    return EXIT_OK


def _emit_csv(header, rows, path):
    buf = io.StringIO() if path is None else open(path, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(buf)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
        if path is None:
            sys.stdout.write(buf.getvalue())
    finally:
        buf.close()


def cmd_analyze(args):
    if args.staircase_lambda is not None:
        lam = args.staircase_lambda
        if not 0 < lam < 1:
            raise UsageError("--staircase-lambda must lie in (0, 1)")
        omega_star, rho_star = analysis.optimal_omega(lam)
        print(f"omega_star={fmt(omega_star)}")
        print(f"rho_star={fmt(rho_star)}")
        grid = args.staircase_grid or _grid("1:2:0.01")
        _emit_csv(
            ["omega", "rho_s"],
            [(w, analysis.staircase_rho(lam, w)) for w in grid],
            args.staircase_csv,
        )
        if not _has_model_source(args):
            return EXIT_OK

    model = _load_source(args)
    print(f"drift={fmt(drift(model).eta)}")
    res = solve(model, method="ubased", tol=args.solver_tol, max_iter=args.solver_max_iter)
    if not res.converged:
        print(
            f"mg1split: U-based solve stopped at residual {res.final_residual:.3e} "
            f"after {res.iterations} iterations",
            file=sys.stderr,
        )
        return EXIT_NOCONV
    G = res.G_approx
    summary = analysis.analyze(model, G)
    print(f"qbd={'true' if summary['qbd'] else 'false'}")
    print(f"rho0={fmt(summary['rho0'])}")
    print(f"omega_hat_c1={fmt(summary['omega_hat_c1'])}")
    print(f"sigma_min={fmt(summary['sigma_min'])}")
    print(f"sigma_max={fmt(summary['sigma_max'])}")
    if args.kron:
        try:
            k = analysis.kron_rates(model, G)
            print(f"rho_H0={fmt(k.rho_H0)}")
            print(f"rho_H1={fmt(k.rho_H1)}")
        except GuardExceededError as exc:
            print(f"warning: {exc}", file=sys.stderr)
    if args.omega_grid:
        W = analysis.build_W(model, G)
        rows = []
        for omega in args.omega_grid:
            ra = analysis.rho_bounds(model, G, W, omega)
            rows.append((omega, ra.rho_omega, ra.bound_lo, ra.bound_hi))
        _emit_csv(["omega", "rho_omega", "bound_lo", "bound_hi"], rows, args.csv)
    return EXIT_OK


def cmd_gen(args):
    try:
        if args.kind == "1a":
            model = gen_example_1a(args.n, args.delta)
            note = f"example 1a: n={args.n} delta={args.delta!r}"
        else:
            model = gen_example_1b(args.p, args.q_trunc)
            note = f"example 1b: p={args.p!r} q_trunc={args.q_trunc}"
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_model(model, args.out, comment=note)
    print(f"wrote {args.out} (n={model.n}, q={model.q})")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="mg1split", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one instance")
    _add_model_source(p)
    p.add_argument("--method", default="staircase",
                   help="natural|traditional|ubased|staircase|relaxed|adaptive-zero|adaptive-stochastic")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--omega-hat", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-iter", type=int, default=10_000_000)
    p.add_argument("--start", default="zero", help="zero|uniform|file:PATH")
    p.add_argument("--trace", metavar="PATH", help="write k,residual,omega,seconds CSV")
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--out", metavar="PATH", help="write G in the block text format")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="iteration-count sweeps over the synthetic examples")
    p.add_argument("--table", choices=["1a", "1b"], required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--deltas", type=_float_list)
    p.add_argument("--p", type=_float_list)
    p.add_argument("--q-trunc", type=int, default=50)
    p.add_argument("--methods", default="traditional,ubased,staircase,relaxed,adaptive-zero")
    p.add_argument("--omegas", type=_float_list, default=[1.8, 1.9, 2.0])
    p.add_argument("--omega-hat", type=float, default=10.0)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int, default=10_000_000)
    p.add_argument("--trace-every", type=int, default=100)
    p.add_argument("--gamma", type=float, help="sparsity factor for the cost model (default n)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--full", action="store_true", help="include the long-running rows")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("analyze", help="convergence-rate analysis")
    _add_model_source(p)
    p.add_argument("--solver-tol", type=float, default=1e-13)
    p.add_argument("--solver-max-iter", type=int, default=200_000)
    p.add_argument("--omega-grid", type=_grid, metavar="LO:HI:STEP")
    p.add_argument("--csv", metavar="PATH", help="destination of the omega-grid CSV")
    p.add_argument("--staircase-lambda", type=float, metavar="L")
    p.add_argument("--staircase-grid", type=_grid, metavar="LO:HI:STEP")
    p.add_argument("--staircase-csv", metavar="PATH")
    p.add_argument("--kron", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen", help="write a synthetic model file")
    p.add_argument("kind", choices=["1a", "1b"])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--delta", type=float, default=1e-2)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--q-trunc", type=int, default=50)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mg1split: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ParseError) as exc:
        print(f"mg1split: invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"mg1split: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
