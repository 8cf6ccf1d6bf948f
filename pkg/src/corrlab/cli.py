"""``corrlab`` command line: measure, decompose, verify, example.

Exit codes: 0 success, 1 failed guarantee/check or unmet hypothesis,
2 bad input or parameters, 3 capacity exceeded, 4 infeasible subset budget.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus
from .decompose import theorem_a, theorem_a2, theorem_a_prime
from .errors import BudgetInfeasible, CapacityExceeded, CorrlabError, GuaranteeViolation
from .info import info_report
from .io import REPORT_SCHEMA_VERSION, DistFileError, load, save
from .space import mix
from .suites import SUITES, fixed_space_dists, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAPACITY, EXIT_BUDGET = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _err(msg: str) -> None:
    print(f"corrlab: {msg}", file=sys.stderr)


def _print_report(rep, as_json: bool) -> None:
    if as_json:
        doc = {"schema_version": REPORT_SCHEMA_VERSION, "kind": "info_report", **rep.to_dict()}
        print(json.dumps(doc, indent=2))
        return
    unit = {"e": "nats", "2": "bits", "10": "dits"}[rep.base]
    f = lambda v: f"{v:.6f}"
    print(f"units: {unit}")
    print(f"H = {f(rep.entropy)}")
    print("H(X_i) = " + " ".join(f(v) for v in rep.coordinate_entropies))
    print("H(X_i | rest) = " + " ".join(f(v) for v in rep.conditional_entropies))
    print(f"TC = {f(rep.tc)}")
    print(f"DTC = {f(rep.dtc)}")
    print("I(X_i ; rest) = " + " ".join(f(v) for v in rep.full_mutual_infos))
    print(f"Shearer gap (singletons, k=1) = {f(rep.shearer_singletons)}")
    if rep.shearer_codim1 is not None:
        print(f"Shearer gap ((n-1)-subsets, k=n-1) = {f(rep.shearer_codim1)}")


def cmd_measure(args) -> int:
    dist = load(args.input)
    _print_report(info_report(dist, args.base), args.json)
    return EXIT_OK


def cmd_decompose(args) -> int:
    if args.mode == "a2" and args.epsilon is None:
        raise UsageError("--epsilon is required for mode a2")
    if args.mode != "a2" and args.epsilon is not None:
        raise UsageError("--epsilon only applies to mode a2")
    dist = load(args.input)
    if args.mode == "a":
        report = theorem_a(dist, args.delta, strict=False)
    elif args.mode == "a-prime":
        report = theorem_a_prime(dist, args.delta, strict=False)
    else:
        report = theorem_a2(dist, args.delta, args.epsilon, seed=args.seed, strict=False)
    doc = {"schema_version": REPORT_SCHEMA_VERSION, "kind": "decomposition_report", **report.to_dict()}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for j, (c, p) in enumerate(zip(report.components, report.products)):
            save(c, out / f"component_{j:04d}.json")
            save(p, out / f"product_{j:04d}.json")
            files.append({"component": f"component_{j:04d}.json", "product": f"product_{j:04d}.json"})
        doc["files"] = files
        (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n")
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        print(f"mode = {report.mode}")
        print(f"S = {[i + 1 for i in report.S]}")
        print(f"components = {len(report.components)}")
        print(f"DTC = {report.dtc:.6f}")
        print(f"hypothesis DTC <= delta^3 n: {'holds' if report.hypothesis_holds else 'fails'}")
        print(f"mix_mi = {report.mix_mi:.6f}  (bound {report.mi_bound:.6f})")
        print(f"transport_err = {report.transport_err:.6f}  (bound {report.err_bound:.6f})")
        if report.m_bound is not None:
            print(f"m = {report.m}  (bound {report.m_bound:.6g})")
        for name, c in report.guarantees.items():
            print(f"  {name}: {c.value:.6g} vs {c.bound:.6g} {'ok' if c.holds else 'VIOLATED'}")
    for note in report.notes:
        _err(note)
    if not report.guarantees_hold:
        _err("a guarantee was violated")
        return EXIT_FAIL
    if not report.hypothesis_holds:
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    if (args.input is None) == (args.random is None):
        raise UsageError("give exactly one of an input file or --random n k trials seed")
    if args.input is not None:
        base = load(args.input)
        dists, seed = [base], 0
    else:
        n, k, trials, seed = args.random
        if n < 1 or k < 1 or trials < 1:
            raise UsageError("--random needs positive n, k and trials")
        dists = fixed_space_dists(trials, seed, n, k)
    names = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        res = run_suite(name, dists, seed=seed, oracle_runs=args.oracle_runs)
        print(f"[{name}] {'pass' if res.passed else 'FAIL'} ({res.seconds:.2f} s)")
        print(res.table())
        if not res.passed:
            ok = False
            if args.dump:
                dump = Path(args.dump)
                dump.mkdir(parents=True, exist_ok=True)
                for c in res.checks.values():
                    if c.counterexample is not None:
                        path = save(c.counterexample, dump / f"{name}_{c.name}.json")
                        _err(f"{name}/{c.name}: {c.message}; counterexample written to {path}")
            else:
                for c in res.checks.values():
                    if not c.passed:
                        _err(f"{name}/{c.name}: {c.message}")
    return EXIT_OK if ok else EXIT_FAIL


EXAMPLES = {
    "zero-sum": (("n", int), ("p", int)),
    "dirac-spike": (("n", int), ("k", int), ("delta", float)),
    "planted-mixture": (("n", int), ("k", int), ("components", int), ("seed", int)),
    "random-dense": (("n", int), ("k", int), ("seed", int), ("concentration", float)),
    "noisy-coupling": (("n", int), ("k", int), ("flip", float), ("seed", int)),
    "opposed-products": (("n", int), ("bias", float)),
}


def _build_example(kind: str, params: list[str]):
    if kind not in EXAMPLES:
        raise UsageError(f"unknown example kind {kind!r}; choose from {', '.join(EXAMPLES)}")
    spec = EXAMPLES[kind]
    optional = {"random-dense": 1, "opposed-products": 1}.get(kind, 0)
    if not len(spec) - optional <= len(params) <= len(spec):
        raise UsageError(f"{kind} takes parameters: {' '.join(name for name, _ in spec)}")
    try:
        vals = {name: typ(v) for (name, typ), v in zip(spec, params)}
    except ValueError as exc:
        raise UsageError(f"bad parameter for {kind}: {exc}") from None
    if kind == "zero-sum":
        return corpus.zero_sum_uniform(vals["n"], vals["p"])
    if kind == "dirac-spike":
        return corpus.dirac_spike_mixture(vals["n"], vals["k"], vals["delta"])
    if kind == "planted-mixture":
        return mix(corpus.planted_product_mixture(vals["n"], vals["k"], vals["components"], vals["seed"]))
    if kind == "random-dense":
        return corpus.random_dense(vals["n"], vals["k"], vals["seed"], vals.get("concentration", 1.0))
    if kind == "noisy-coupling":
        base = corpus.random_dense(vals["n"], vals["k"], vals["seed"])
        return corpus.noisy_coupling(base, vals["flip"], vals["seed"] + 1)
    return mix(corpus.opposed_products(vals["n"], vals.get("bias", 0.1)))


def cmd_example(args) -> int:
    dist = _build_example(args.kind, args.params)
    if args.out:
        save(dist, args.out)
    _print_report(info_report(dist, args.base), args.json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="corrlab", description="Exact TC/DTC, transport and near-product decompositions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("measure", help="information report of a DistFile")
    m.add_argument("input")
    m.add_argument("--base", choices=["e", "2", "10"], default="e")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_measure)

    d = sub.add_parser("decompose", help="mixture of near-product measures")
    d.add_argument("input")
    d.add_argument("--mode", choices=["a", "a-prime", "a2"], default="a")
    d.add_argument("--delta", type=float, required=True)
    d.add_argument("--epsilon", type=float)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("input", nargs="?")
    v.add_argument("--random", nargs=4, type=int, metavar=("N", "K", "TRIALS", "SEED"))
    v.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    v.add_argument("--oracle-runs", type=int, default=100)
    v.add_argument("--dump", help="directory for counterexample DistFiles")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("example", help="write a named fixture")
    e.add_argument("kind")
    e.add_argument("params", nargs="*")
    e.add_argument("--out")
    e.add_argument("--base", choices=["e", "2", "10"], default="e")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except DistFileError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except CapacityExceeded as exc:
        _err(f"capacity: {exc}")
        return EXIT_CAPACITY
    except BudgetInfeasible as exc:
        _err(f"subset search: {exc}")
        return EXIT_BUDGET
    except GuaranteeViolation as exc:
        _err(str(exc))
        return EXIT_FAIL
    except (CorrlabError, ValueError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
