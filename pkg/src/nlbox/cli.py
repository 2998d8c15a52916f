"""Command-line front end: ``nlbox <group> <command> [options]``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import acceptance, bounds
from . import io as nio
from .box import (
    SIMULATED_TOL,
    STRICT_TOL,
    canonicalize,
    chsh,
    classify,
    correlated_error_box,
    correlations,
    isotropic_box,
    pr_box,
    uniform_box,
)
from .errors import InvariantError, NLBoxError
from .wiring import (
    apply_wiring,
    compose,
    identity_protocol,
    twirl_protocol,
    validate_protocol,
    xor_protocol,
)

TOLERANCES = {"strict": STRICT_TOL, "simulated": SIMULATED_TOL}


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1, like every other rejected input."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    return int(text, 0)


def _common(p):
    p.add_argument("--seed", type=_seed, default=acceptance.DEFAULT_SEED, help="RNG seed (hex allowed)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tolerance-profile", choices=sorted(TOLERANCES), default="strict")
    p.add_argument("--out", help="write output here instead of stdout")
    return p


def _read(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _emit(args, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(args, obj):
    _emit(args, json.dumps(obj, indent=2))


def _tol(args) -> float:
    return TOLERANCES[args.tolerance_profile]


def _load_box(args, path):
    return nio.load_box(_read(path), tol=_tol(args))


# --- box ----------------------------------------------------------------------------

def box_make(args):
    kinds = {"pr": lambda q: pr_box(), "uniform": lambda q: uniform_box(),
             "isotropic": isotropic_box, "correlated-error": correlated_error_box}
    _emit(args, nio.dump_box(kinds[args.kind](args.q)))


def box_check(args):
    b = _load_box(args, args.file)
    c = classify(b, _tol(args))
    _json(args, {"signaling": c.signaling, "local": c.local, "independent": c.independent, "nl": chsh(b).nl})


def box_chsh(args):
    b = _load_box(args, args.file)
    v = chsh(b)
    e = correlations(b)
    _json(args, {"nl": v.nl, "q_equiv": v.q_equiv, "correlations": [e.e00, e.e01, e.e10, e.e11]})


def box_canon(args):
    _emit(args, nio.dump_box(canonicalize(_load_box(args, args.file), _tol(args))))


# --- wire ---------------------------------------------------------------------------

def wire_make(args):
    kinds = {"identity": identity_protocol, "xor": xor_protocol, "twirl": lambda n: twirl_protocol()}
    _emit(args, nio.dump_protocol(kinds[args.kind](args.n)))


def wire_apply(args):
    p = nio.load_protocol(_read(args.protocol))
    if args.box:
        b = _load_box(args, args.box)
    elif args.q is not None:
        b = isotropic_box(args.q)
    else:
        raise NLBoxError("give --box FILE or --q Q")
    _emit(args, nio.dump_box(apply_wiring(p, [b] * p.n)))


def wire_compose(args):
    outer = nio.load_protocol(_read(args.outer))
    inners = [nio.load_protocol(_read(f)) for f in args.inner]
    if len(inners) == 1:
        inners = inners * outer.n
    _emit(args, nio.dump_protocol(compose(outer, inners)))


def wire_validate(args):
    errs = validate_protocol(nio.load_protocol(_read(args.file)))
    if errs:
        raise errs[0]
    _json(args, {"valid": True})


# --- search -------------------------------------------------------------------------

def _space(args):
    from .search import SearchSpace

    return SearchSpace(args.n, adaptive=not args.non_adaptive, output_class=args.family,
                       symmetry_reduction=not args.no_symmetry)


def search_run(args):
    from .search import search_max_nl

    if args.box:
        resource = _load_box(args, args.box)
    elif args.q is not None:
        resource = isotropic_box(args.q)
    else:
        raise NLBoxError("give --q Q or --box FILE")
    _json(args, nio.report_to_dict(search_max_nl(_space(args), resource, threads=args.threads)))


def _grid(text: str) -> list:
    if ":" in text:
        lo, hi, k = text.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(k))]
    return [float(v) for v in text.split(",")]


def search_sweep(args):
    from .search import sweep

    qs = _grid(args.q_grid)
    _emit(args, nio.sweep_csv(qs, sweep(_space(args), qs, threads=args.threads)))


# --- quantum --------------------------------------------------------------------------

def _state(args):
    from .quantum.states import DensityMatrix, omega

    if args.state:
        return DensityMatrix(nio.state_from_dict(json.loads(_read(args.state)))).matrix
    if args.alpha is None:
        raise NLBoxError("give --alpha A or --state FILE")
    return omega(args.alpha).matrix


def quantum_nl(args):
    from .quantum.entanglement import nl_state

    _json(args, {"nl": nl_state(_state(args))})


def quantum_fef(args):
    from .quantum.entanglement import fully_entangled_fraction

    _json(args, {"F": fully_entangled_fraction(_state(args), check=args.check, seed=args.seed)})


def quantum_simulate(args):
    from .quantum.measurement import simulate_isotropic

    _emit(args, nio.dump_box(simulate_isotropic(args.alpha)))


def quantum_decompose(args):
    from .quantum.states import omega_power_decomposition

    terms = omega_power_decomposition(args.alpha, args.n)
    _json(args, [{"v": "".join(str(s) for s in t.v), "degree": t.degree, "weight": t.weight} for t in terms])


def quantum_edp_sweep(args):
    from .quantum.edp import edp_sweep

    r = edp_sweep(args.alpha, args.n, args.trials, seed=args.seed, ancillas=args.ancillas, threads=args.threads)
    _json(args, {"alpha": r.alpha, "n": r.n, "ancillas": r.ancillas, "trials": r.trials, "max_F": r.max_F,
                 "bound": r.bound, "violations": r.violations, "identity_F": r.identity_F})


def quantum_blockdiag(args):
    from .quantum.blockdiag import block_diagonalize, random_projector_pair

    rng = np.random.default_rng(args.seed)
    p = random_projector_pair(rng, args.dim, args.rank)
    q = random_projector_pair(rng, args.dim, args.rank)
    dec = block_diagonalize(*p, *q, rng_seed=args.seed)
    _json(args, {"sizes": dec.sizes, "off_block_mass": max(dec.off_block_mass(m) for m in (*p, *q)),
                 "unitarity_error": dec.unitarity_error()})


def quantum_lemma5(args):
    from .quantum.entanglement import lemma5_witness

    r = lemma5_witness(args.alpha, args.trials, rng_seed=args.seed)
    _json(args, {"alpha": r.alpha, "trials": r.trials, "violations": r.violations,
                 "worst_margin": r.worst_margin, "extremal_residual": r.extremal_residual})


# --- bounds ---------------------------------------------------------------------------

def bounds_curve(args):
    fn = {"ceiling": bounds.ceiling_curve, "nlfef": bounds.nl_vs_fef_curve}[args.curve]
    _emit(args, nio.curve_csv(fn(args.points)))


def bounds_gap(args):
    g = bounds.gap(args.q)
    _json(args, {"q": g.q, "g": g.g, "ceiling": g.ceiling})


def bounds_limits(args):
    _json(args, bounds.known_limits(args.q, args.p))


# --- verify ---------------------------------------------------------------------------

def verify_all(args):
    only = None if not args.only else {int(v) for v in args.only.split(",")}
    results = acceptance.run_all(seed=args.seed, threads=args.threads, only=only)
    _emit(args, acceptance.format_report(results, seed=args.seed))
    return 0 if all(r.passed for r in results) else 2


# --- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="nlbox", description="Non-local box distillation laboratory.")
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(sub, name, fn, help=None):
        p = _common(sub.add_parser(name, help=help))
        p.set_defaults(func=fn)
        return p

    g = groups.add_parser("box", help="inspect boxes").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "make", box_make, "emit a standard box")
    p.add_argument("--kind", choices=["pr", "uniform", "isotropic", "correlated-error"], default="isotropic")
    p.add_argument("--q", type=float, default=1.0)
    for name, fn in (("check", box_check), ("chsh", box_chsh), ("canon", box_canon)):
        leaf(g, name, fn).add_argument("file", nargs="?", help="box JSON (default stdin)")

    g = groups.add_parser("wire", help="protocols").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "make", wire_make, "emit a standard protocol")
    p.add_argument("--kind", choices=["identity", "xor", "twirl"], default="xor")
    p.add_argument("--n", type=int, default=2)
    p = leaf(g, "apply", wire_apply)
    p.add_argument("protocol")
    p.add_argument("--box")
    p.add_argument("--q", type=float)
    p = leaf(g, "compose", wire_compose)
    p.add_argument("--outer", required=True)
    p.add_argument("--inner", action="append", required=True)
    leaf(g, "validate", wire_validate).add_argument("file", nargs="?")

    g = groups.add_parser("search", help="exhaustive wiring search").add_subparsers(dest="cmd", required=True)
    for name, fn in (("run", search_run), ("sweep", search_sweep)):
        p = leaf(g, name, fn)
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--family", choices=["all", "xor-affine"], default="all")
        p.add_argument("--no-symmetry", action="store_true")
        p.add_argument("--non-adaptive", action="store_true")
        if name == "run":
            p.add_argument("--q", type=float)
            p.add_argument("--box")
        else:
            p.add_argument("--q-grid", default="0.75:0.85:5", help="lo:hi:count or comma list")

    g = groups.add_parser("quantum", help="two-qubit layer").add_subparsers(dest="cmd", required=True)
    for name, fn in (("nl", quantum_nl), ("fef", quantum_fef)):
        p = leaf(g, name, fn)
        p.add_argument("--alpha", type=float)
        p.add_argument("--state")
        if name == "fef":
            p.add_argument("--check", action="store_true", help="cross-check with the optimiser")
    leaf(g, "simulate", quantum_simulate).add_argument("--alpha", type=float, required=True)
    p = leaf(g, "decompose", quantum_decompose)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, default=2)
    p = leaf(g, "edp-sweep", quantum_edp_sweep)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--ancillas", type=int, default=0)
    p = leaf(g, "blockdiag", quantum_blockdiag)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--rank", type=int)
    p = leaf(g, "lemma5", quantum_lemma5)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--trials", type=int, default=1000)

    g = groups.add_parser("bounds", help="closed-form limits").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "curve", bounds_curve)
    p.add_argument("--curve", choices=["ceiling", "nlfef"], default="ceiling")
    p.add_argument("--points", type=int, default=101)
    leaf(g, "gap", bounds_gap).add_argument("--q", type=float, required=True)
    p = leaf(g, "limits", bounds_limits)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--p", type=float, required=True)

    g = groups.add_parser("verify", help="acceptance suite").add_subparsers(dest="cmd", required=True)
    leaf(g, "all", verify_all).add_argument("--only", help="comma list of criterion numbers")
    return root


_DEFAULT_CMD = {"search": "run", "bounds": "curve"}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) >= 2 and argv[0] in _DEFAULT_CMD and argv[1].startswith("-") and argv[1] not in ("-h", "--help"):
        argv.insert(1, _DEFAULT_CMD[argv[0]])
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
    except NLBoxError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except InvariantError as e:
        print(f"invariant failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
