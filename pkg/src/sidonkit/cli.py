"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 cap exceeded, 4 an audited
inequality failed (a counterexample dump is printed as JSON).
"""
from __future__ import annotations

import argparse
import inspect
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import CapExceededError, HypothesisError
from .experiments import RUNNERS, compare_golden, to_csv
from .hadamard import construct, double, read_matrix, verify
from .qc import parallel_map, qc_exact, qc_monte_carlo
from .rademacher import khintchine_l1_ratio, khintchine_tail_check, max_partial_ratio
from .sidon import (
    LacunarySequence,
    ModulatedPolynomialFamily,
    admissible_degrees,
    gamma_bound,
    sidon_ratio,
    split_lacunary,
    validate_lacunary,
)
from .trigpoly import TrigPoly, norm_l1, norm_l2_exact, norm_sup
from .walsh import DiscreteSystem, discrete_sidon_check, load_system, random_walsh_trial, walsh_sidon_check

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_AUDIT = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_poly(path: str) -> TrigPoly:
    with open(path) as fh:
        return TrigPoly.from_dict(json.load(fh))


def _floats(text: str) -> list[float]:
    try:
        return [float(Fraction(v.strip())) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


# -- subcommands --------------------------------------------------------------


def cmd_norm(args) -> int:
    t = _load_poly(args.input)
    if args.p == "inf":
        _emit(norm_sup(t, args.tol).to_dict())
    elif args.p == "1":
        _emit(norm_l1(t, args.tol).to_dict())
    else:
        _emit({"p": 2, "value": norm_l2_exact(t)})
    return EXIT_OK


def cmd_qc(args) -> int:
    t = _load_poly(args.input)
    if args.mode == "exact":
        est = qc_exact(t, args.inner_tol)
    else:
        est = qc_monte_carlo(t, args.samples, args.seed, args.inner_tol)
    _emit(est.to_dict())
    return EXIT_OK


def cmd_rademacher(args) -> int:
    a = _floats(args.coeffs)
    if not a:
        raise UsageError("--coeffs must not be empty")
    out = {"coeffs": a}
    code = EXIT_OK
    if args.lam is not None:
        rep = khintchine_tail_check(a, args.lam, cap=args.cap)
        out.update(rep.to_dict())
        if not rep.holds:
            out["counterexample"] = {"coeffs": a, "lambda": args.lam}
            code = EXIT_AUDIT
    if args.l1_ratio:
        out["l1_ratio"] = khintchine_l1_ratio(a, cap=args.cap)
    if args.max_partial:
        out["max_partial_ratio"] = max_partial_ratio(a, cap=args.cap)
    _emit(out)
    return code


def _parse_sequence(text: str) -> LacunarySequence:
    if text.startswith("geometric:"):
        parts = text.split(":", 1)[1].split(",")
        if len(parts) != 3:
            raise UsageError("geometric sequences are written geometric:lambda,n0,count")
        return LacunarySequence.geometric(float(Fraction(parts[0])), int(parts[1]), int(parts[2]))
    try:
        return LacunarySequence(tuple(int(v) for v in text.split(",") if v.strip()))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sidon(args) -> int:
    out = {}
    if args.sequence:
        seq = _parse_sequence(args.sequence)
        out["sequence"] = list(seq.terms)
        if args.split is not None:
            lam = Fraction(args.split)
            out["split"] = {"lambda": args.split, "pieces": [list(u) for u in split_lacunary(seq.terms, lam)]}
        if args.check is not None:
            out["lacunary"] = {"lambda": args.check, "member": validate_lacunary(seq.terms, Fraction(args.check))}
        if args.degrees:
            l, m, eps, B = int(args.degrees[0]), int(args.degrees[1]), float(args.degrees[2]), float(args.degrees[3])
            r = admissible_degrees(seq.terms, l, m, eps, B)
            out["degrees"] = {"l": l, "m": m, "eps": eps, "B": B, "r": r.tolist()}
    elif args.split is not None or args.degrees or args.check is not None:
        raise UsageError("--split, --check and --degrees need --sequence")
    if args.gamma:
        lam, eps = (float(Fraction(v)) for v in args.gamma)
        out["gamma"] = {"lambda": lam, "eps": eps, "value": gamma_bound(lam, eps)}
    if args.ratio:
        with open(args.ratio) as fh:
            d = json.load(fh)
        fam = ModulatedPolynomialFamily(
            tuple(d["seq"]),
            int(d["l"]),
            int(d["m"]),
            tuple(TrigPoly.from_dict(p) for p in d["p"]),
            tuple(TrigPoly.from_dict(q) for q in d["q"]),
            d.get("eps"),
            d.get("B", 1.0),
        )
        out["ratio"] = sidon_ratio(fam, args.tol).to_dict()
    if not out:
        raise UsageError("nothing to do: give --sequence, --gamma or --ratio")
    _emit(out)
    return EXIT_OK


def _system_trial(rng: np.random.Generator, system: DiscreteSystem, l: int, N: int, max_bits: int = 8):
    m = system.m_seq
    n = [1] + [int(rng.integers(m[k - 2] + 1, m[k - 1] + 1)) for k in range(2, N + 1)]
    p = []
    for _ in range(l + 1, N + 1):
        b = int(rng.integers(0, max_bits + 1))
        nums = rng.integers(-(1 << b), (1 << b) + 1, size=m[l - 1])
        p.append([Fraction(int(v), 1 << b) for v in nums])
    return n, p


def cmd_walsh_sidon(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    rng = np.random.Generator(np.random.Philox(args.seed))
    if args.system == "walsh":
        if args.l < 0 or args.N < args.l + 1:
            raise UsageError("need l >= 0 and N >= l + 1")
        inputs = [random_walsh_trial(rng, args.l, args.N) for _ in range(args.trials)]
        check = lambda item: walsh_sidon_check(args.l, *item)
        form = "walsh: 2^{k-1} <= n_k < 2^k, p_k in W(2^l - 1)"
    else:
        system = load_system(args.system)
        if args.l < 1 or args.N < args.l + 1 or len(system.m_seq) < args.N:
            raise UsageError("need 1 <= l < N <= len(m_seq) for a system file")
        if system.m_seq[args.N - 1] > len(system):
            raise UsageError(f"system has {len(system)} functions, needs m_N = {system.m_seq[args.N - 1]}")
        inputs = [_system_trial(rng, system, args.l, args.N) for _ in range(args.trials)]
        check = lambda item: discrete_sidon_check(system, item[0], args.l, args.N, item[1])
        form = "theorem: m_{k-1} < n_k <= m_k, p_k in Phi(m_l)"
    reports = parallel_map(check, inputs)  # inputs are drawn up front, results kept in trial order
    bad = [i for i, r in enumerate(reports) if not r.holds]
    ratios = [r.ratio for r in reports if r.ratio is not None]
    out = {
        "form": form,
        "system": args.system,
        "l": args.l,
        "N": args.N,
        "trials": args.trials,
        "seed": args.seed,
        "violations": len(bad),
        "min_ratio": str(min(ratios)) if ratios else None,
        "min_ratio_float": float(min(ratios)) if ratios else None,
    }
    if bad:
        out["counterexamples"] = [
            {"trial": i, "n_seq": inputs[i][0], "p": [[str(c) for c in row] for row in inputs[i][1]], **reports[i].to_dict()}
            for i in bad[:10]
        ]
    _emit(out)
    return EXIT_AUDIT if bad else EXIT_OK


def cmd_hadamard(args) -> int:
    if args.verify:
        H = read_matrix(args.verify)
        ok = verify(H)
        _emit({"file": args.verify, "order": int(H.shape[0]), "hadamard": ok})
        return EXIT_OK if ok else EXIT_AUDIT
    if not args.construct:
        raise UsageError("give --construct or --verify")
    H = construct(args.construct)
    for _ in range(args.double):
        H = double(H)
    text = H.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _emit({"construction": H.provenance, "order": H.order, "hadamard": verify(H), "file": args.out})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# Experiment parameters settable from the command line (dest -> type).
EXPERIMENT_FLAGS = {
    "nmin": int, "nmax": int, "kmin": int, "kmax": int, "inner_tol": float, "tol": float,
    "mode": str, "samples": int, "seed": int, "trials": int, "mmax": int, "base": int,
    "grid": int, "points": int, "pmax": int, "p2max": int, "levels": int, "tower_pmax": int,
}


def _experiment_kwargs(name: str, args) -> dict:
    accepted = inspect.signature(RUNNERS[name]).parameters
    kw = {}
    for dest in EXPERIMENT_FLAGS:
        v = getattr(args, dest, None)
        if v is None:
            continue
        if dest not in accepted:
            raise UsageError(f"experiment {name} does not take --{dest.replace('_', '-')}")
        kw[dest] = v
    return kw


def cmd_experiment(args) -> int:
    name = args.name
    kw = _experiment_kwargs(name, args)
    rows = RUNNERS[name](**kw)
    params = dict(rows[0].params) if rows else kw
    if args.format == "csv":
        text = to_csv(name, params, rows)
    else:
        text = "\n".join(r.to_json() for r in rows) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    code = EXIT_OK
    if args.golden:
        with open(args.golden) as fh:
            golden = fh.read()
        diffs = compare_golden(name, to_csv(name, params, rows), golden)
        sys.stderr.write(f"golden {args.golden}: {len(diffs)} mismatches\n")
        if diffs:
            _emit_err([d.__dict__ for d in diffs])
            code = EXIT_AUDIT
    audit = _experiment_audit(name, rows)
    if audit:
        _emit_err({"experiment": name, "counterexamples": audit})
        code = EXIT_AUDIT
    return code


def _emit_err(obj) -> None:
    sys.stderr.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _experiment_audit(name: str, rows) -> list:
    """Rows that contradict a proved inequality."""
    if name == "khintchine":
        return [r.outputs for r in rows if r.outputs["violations"]]
    if name == "logcos":
        return [r.outputs for r in rows if not r.outputs["proxy_gt_half_sqrt_k"]]
    if name == "riesz":
        return [r.outputs for r in rows if not r.outputs["min_ok"] or r.outputs["mean"] != 1.0]
    if name == "oskolkov":
        return [r.outputs for r in rows if abs(r.outputs["sup_norm"] - r.outputs["n"]) > 1e-6]
    return []


# -- parser ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sidonkit", description="Sidon-type inequality and QC-norm toolkit")
    ap.add_argument("--version", action="version", version=f"sidonkit {__version__}")
    ap.add_argument("--config", help="JSON file of default flag values (flags override)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norm", help="certified sup / L1 norm or exact L2 norm")
    p.add_argument("--input", required=True, help="polynomial JSON")
    p.add_argument("--p", choices=["inf", "1", "2"], default="inf")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("qc", help="QC-norm, exact or Monte Carlo")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inner-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_qc)

    p = sub.add_parser("rademacher", help="exact Rademacher sums: tail bound and Khintchine ratios")
    p.add_argument("--coeffs", required=True, help="comma list, e.g. 1,1,1/2")
    p.add_argument("--lam", type=float, help="check mes{|S| > lam ||a||_2} <= 2 exp(-lam^2/2)")
    p.add_argument("--l1-ratio", action="store_true")
    p.add_argument("--max-partial", action="store_true")
    p.add_argument("--cap", type=int, default=24)
    p.set_defaults(func=cmd_rademacher)

    p = sub.add_parser("sidon", help="lacunary sequences, degree bounds and Sidon ratios")
    p.add_argument("--sequence", help='comma list or "geometric:lambda,n0,count"')
    p.add_argument("--split", help="split the sequence for this lambda")
    p.add_argument("--check", help="test membership in Lambda(lambda)")
    p.add_argument("--gamma", nargs=2, metavar=("LAMBDA", "EPS"))
    p.add_argument("--degrees", nargs=4, metavar=("L", "M", "EPS", "B"))
    p.add_argument("--ratio", metavar="FAMILY_JSON")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_sidon)

    p = sub.add_parser("walsh-sidon", help="randomized exact discrete Sidon audit")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--system", default="walsh", help='"walsh" or a system JSON file')
    p.set_defaults(func=cmd_walsh_sidon)

    p = sub.add_parser("hadamard", help="construct or verify Hadamard matrices")
    p.add_argument("--construct", help="sylvester:k | paley1:p | paley2:p")
    p.add_argument("--double", action="count", default=0, help="double the result (repeatable)")
    p.add_argument("--verify", metavar="FILE")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_hadamard)

    p = sub.add_parser("experiment", help="run a named experiment and emit CSV")
    p.add_argument("name", choices=sorted(RUNNERS))
    p.add_argument("--out", dest="format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", metavar="FILE")
    p.add_argument("--golden", metavar="FILE")
    for dest, typ in EXPERIMENT_FLAGS.items():
        p.add_argument("--" + dest.replace("_", "-"), dest=dest, type=typ)
    p.set_defaults(func=cmd_experiment)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in dests})


def dispatch(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except CapExceededError as exc:
        sys.stderr.write(f"cap exceeded: {exc}\n")
        return EXIT_CAP
    except HypothesisError as exc:
        sys.stderr.write(f"hypothesis violated: {exc}\n")
        return EXIT_USAGE
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
