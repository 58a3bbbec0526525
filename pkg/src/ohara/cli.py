"""Command-line entry point: ``ohara <subcommand> ...``.

Exit status is 0 on success, 1 when an input is refused (the message names
the failed precondition) and 2 when an internal invariant breaks.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ohara import __version__
from ohara.cycles import CycleSystem, brute_force_max, max_steps_formula, psi_continuous
from ohara.decomposer import check_against_map, check_decomposition, decompose, euclid_decompose, to_svg
from ohara.engine import Strategy, Trace, psi_naive, psi_speedy
from ohara.equivalence import load_spec, validate
from ohara.errors import DomainError, InvariantError, StepBudgetExceeded
from ohara.fastpath import fast_run, solve_cycle_fast
from ohara.partitions import Partition, fraction_str, rvec
from ohara.verify import verify_spec
from ohara.worstcase import ENGINES, FAMILIES, bench, generate, report_json, report_text

# values a config file may supply; command-line flags win
CONFIG_KEYS = ("spec", "horizon", "budget", "cap", "out", "svg", "trace", "engines", "seed", "strategy", "jobs")
DEFAULTS = {"seed": 0, "strategy": "min_part", "engines": "naive,speedy,fast", "cap": 60, "jobs": 1}


def _vector(text: str) -> tuple:
    try:
        return rvec(x.strip() for x in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad number list {text!r}: {exc}") from exc


def _num(x) -> str:
    return str(x) if isinstance(x, int) else fraction_str(x)


def _positive(name: str, value):
    if value is not None and value <= 0:
        raise DomainError(f"{name} must be positive, got {value}")


def _write(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise DomainError(f"cannot write {path}: {exc}") from exc


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise DomainError("config file must hold a JSON object")
    unknown = sorted(set(obj) - set(CONFIG_KEYS))
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    return obj


def _apply_config(args: argparse.Namespace, config: dict):
    for key in CONFIG_KEYS:
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None:
            value = config.get(key, DEFAULTS.get(key))
            if key == "engines" and isinstance(value, list):
                value = ",".join(value)
            setattr(args, key, value)
    for key in ("horizon", "budget", "cap", "jobs"):
        _positive(key, getattr(args, key, None))
    if getattr(args, "seed", None) is not None and args.seed < 0:
        raise DomainError(f"seed must be nonnegative, got {args.seed}")


def _system(args) -> CycleSystem:
    a, b = _vector(args.a), _vector(args.b)
    if args.i:
        return CycleSystem(_vector(args.i), a, b)
    return CycleSystem.from_sides(a, b)


# --------------------------------------------------------------------------
# subcommands


def cmd_map(args, out) -> int:
    lam = Partition.parse(args.input)
    if args.spec is None:
        raise DomainError("map needs --spec (a JSON file or builtin:<name>)")
    horizon = args.horizon or max(lam.size, max(lam.support, default=1))
    spec = load_spec(args.spec, horizon)
    if args.fast:
        result, steps = fast_run(spec, lam)
        print(result, file=out)
        print(f"steps={steps}", file=out)
        return 0
    strategy = Strategy.parse(args.strategy)
    if strategy.kind == "random" and ":" not in args.strategy:
        strategy = Strategy("random", args.seed)
    runner = psi_speedy if args.speedy else psi_naive
    try:
        result, trace = runner(spec, lam, strategy, budget=args.budget, record=args.trace is not None)
    except StepBudgetExceeded as exc:
        if args.trace and exc.trace is not None:
            _write(args.trace, exc.trace.dumps() + "\n")
        raise
    print(result, file=out)
    print(f"steps={trace.step_count}", file=out)
    if args.speedy:
        print(f"firings={trace.firings}", file=out)
    if args.trace:
        _write(args.trace, trace.dumps() + "\n")
    return 0


def cmd_trace(args, out) -> int:
    try:
        trace = Trace.from_json(json.loads(Path(args.file).read_text()))
    except OSError as exc:
        raise DomainError(f"cannot read trace {args.file}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"trace {args.file} is not valid JSON: {exc}") from exc
    if args.spec is None:
        raise DomainError("trace replay needs --spec")
    horizon = args.horizon or max(trace.initial.size, max(trace.initial.support, default=1))
    spec = load_spec(args.spec, horizon)
    final = trace.replay(spec)
    if trace.final is not None and final != trace.final:
        raise InvariantError(f"replay ends at {final}, trace records {trace.final}")
    if sum(r for _, r in trace.steps) != trace.step_count:
        raise InvariantError("trace step_count disagrees with its steps")
    print(final, file=out)
    print(f"steps={trace.step_count} replay=ok", file=out)
    return 0


def cmd_cycle(args, out) -> int:
    sys_ = _system(args)
    t = _vector(args.t)
    if args.fast:
        if not sys_.is_integer:
            raise DomainError("--fast needs integer sides")
        res = solve_cycle_fast(sys_, t)
    else:
        res = psi_continuous(sys_, t)
    if args.json:
        obj = {"s": [_num(x) for x in res.s], "k": [str(x) for x in res.k], "L": str(res.L)}
        print(json.dumps(obj, sort_keys=True), file=out)
    else:
        print(f"s = {','.join(_num(x) for x in res.s)}", file=out)
        print(f"k = {','.join(str(x) for x in res.k)}", file=out)
        print(f"L = {res.L}", file=out)
    return 0


def cmd_maxsteps(args, out) -> int:
    sys_ = _system(args)
    if not sys_.is_integer:
        lam, sys_ = sys_.scaled()
        print(f"scaled by {lam} to integer sides {','.join(map(str, sys_.a))}", file=out)
    value = max_steps_formula(sys_)
    print(f"formula = {value}", file=out)
    if args.brute:
        best, where = brute_force_max(sys_)
        corner = tuple(x - 1 for x in sys_.a)
        print(f"brute = {best} attained at {len(where)} point(s), corner {'yes' if corner in where else 'no'}", file=out)
        if best != value:
            raise InvariantError(f"brute-force maximum {best} differs from the formula {value}")
    return 0


def cmd_decompose(args, out) -> int:
    sys_ = _system(args)
    d = decompose(sys_, merge=not args.no_merge)
    check_decomposition(d)
    if sys_.is_integer:
        check_against_map(d, sys_)
    print(f"pieces = {len(d)}", file=out)
    if args.out:
        _write(args.out, d.dumps() + "\n")
    else:
        print(d.dumps(), file=out)
    if args.svg:
        _write(args.svg, to_svg(d))
    return 0


def cmd_euclid(args, out) -> int:
    a, b = _vector(args.a)[0], _vector(args.b)[0]
    d = euclid_decompose(a, b)
    check_decomposition(d)
    print(f"pieces = {len(d)}", file=out)
    if args.out:
        _write(args.out, d.dumps() + "\n")
    if args.svg:
        _write(args.svg, to_svg(d))
    return 0


def cmd_bench(args, out) -> int:
    if args.family not in FAMILIES:
        raise DomainError(f"unknown family {args.family!r}; expected one of {', '.join(FAMILIES)}")
    try:
        params = [int(x) for x in args.params.split(",")]
    except ValueError as exc:
        raise DomainError(f"--params must be a comma-separated integer list, got {args.params!r}") from exc
    engines = [e.strip() for e in (args.compare or args.engines).split(",") if e.strip()]
    for e in engines:
        if e not in ENGINES:
            raise DomainError(f"unknown engine {e!r}; expected some of {', '.join(ENGINES)}")
    kw = {"jobs": args.jobs}
    if args.budget:
        kw["budget"] = args.budget
    report = bench(generate(args.family, params), engines, **kw)
    timings = not args.no_timings
    print(report_text(report, timings=timings), end="", file=out)
    if args.out:
        _write(args.out, report_json(report, timings=timings))
    bad = [r["label"] for r in report["rows"] if r.get("matches_prediction") is False or not r["outputs_agree"]]
    if bad:
        raise InvariantError(f"engine disagreement or missed prediction on {', '.join(bad)}")
    return 0


def cmd_verify(args, out) -> int:
    if args.spec is None:
        raise DomainError("verify needs --spec")
    _positive("n", args.n)
    spec = load_spec(args.spec, args.horizon)
    validate(spec).raise_if_invalid()
    print(f"spec {args.spec}: valid up to {spec.horizon}", file=out)
    reports = verify_spec(spec, args.n, seed=args.seed, cap=args.cap, fast=not args.no_fast)
    for rep in reports:
        if args.all or rep.n == args.n or not rep.ok:
            print(rep.line(), file=out)
            for msg in rep.failures[:5]:
                print(f"  {msg}", file=out)
    failed = [rep.n for rep in reports if not rep.ok]
    print(f"verify: {'FAIL at n=' + ','.join(map(str, failed)) if failed else 'pass'} (n <= {args.n})", file=out)
    if failed:
        raise InvariantError(f"verification failed for n = {failed}")
    return 0


# --------------------------------------------------------------------------
# parser


def _add_system(p: argparse.ArgumentParser):
    p.add_argument("--i", help="weights i_1,...,i_m (derived from the sides when omitted)")
    p.add_argument("--a", required=True, help="source sides a_1,...,a_m (integers or p/q)")
    p.add_argument("--b", required=True, help="target sides b_1,...,b_m")


class _Parser(argparse.ArgumentParser):
    """Usage errors are refusals, so they exit 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ohara", description="Exact engine for the partition bijection and its box geometry.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file supplying defaults for: " + ", ".join(CONFIG_KEYS))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="apply the bijection to one partition")
    p.add_argument("--spec", help="spec JSON file or builtin:<name>")
    p.add_argument("--input", required=True, help='partition such as "3^3 4^4 5^2"')
    p.add_argument("--speedy", action="store_true", help="fire maximal batches")
    p.add_argument("--fast", action="store_true", help="use the fixed-point solver instead of stepping")
    p.add_argument("--strategy", help="min_part, max_part, fifo, random or random:<seed>")
    p.add_argument("--trace", help="write the run as JSON here")
    p.add_argument("--budget", type=int, help="step budget (default from the cycle formula and sizes)")
    p.add_argument("--horizon", type=int, help="largest part the spec is consulted for (default: partition size)")
    p.add_argument("--seed", type=int, help="seed for the random strategy (default 0)")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("trace", help="replay a trace file and check it")
    p.add_argument("file")
    p.add_argument("--spec", help="spec JSON file or builtin:<name>")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("cycle", help="run one cycle system from a point t")
    _add_system(p)
    p.add_argument("--t", required=True, help="starting point in R(a)")
    p.add_argument("--fast", action="store_true", help="fixed-point solver (integer sides only)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("maxsteps", help="largest step count of a cycle system")
    _add_system(p)
    p.add_argument("--brute", action="store_true", help="confirm by running every integer point")
    p.set_defaults(func=cmd_maxsteps)

    p = sub.add_parser("decompose", help="cut R(a) into translated boxes that tile R(b)")
    _add_system(p)
    p.add_argument("--out", help="write the decomposition JSON here (default: stdout)")
    p.add_argument("--svg", help="write a picture here (2-D only)")
    p.add_argument("--no-merge", action="store_true", help="keep unit cells")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("euclid", help="squares of Euclid's algorithm from R(a,b) to R(b,a)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_euclid)

    p = sub.add_parser("bench", help="step counts and timings on a worst-case family")
    p.add_argument("--family", required=True, help=", ".join(FAMILIES))
    p.add_argument("--params", required=True, help="k values, or the primes for prime_cycle")
    p.add_argument("--engines", help="comma list from naive,speedy,fast (default all)")
    p.add_argument("--compare", help="alias for --engines")
    p.add_argument("--budget", type=int, help="step budget per stepping run")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--no-timings", action="store_true", help="omit wall times so output is reproducible")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="exhaustive bijection and agreement checks for n up to N")
    p.add_argument("--spec", help="spec JSON file or builtin:<name>")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--horizon", type=int)
    p.add_argument("--cap", type=int, help="largest n the enumerator accepts (default 60)")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-fast", action="store_true", help="skip the fast-path comparison")
    p.add_argument("--all", action="store_true", help="print every n, not just the last")
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code or 0
    try:
        _apply_config(args, _load_config(args.config))
        return args.func(args, out)
    except InvariantError as exc:
        print(f"ohara: internal error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"ohara: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
