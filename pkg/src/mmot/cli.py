"""Command-line entry point.

Machine-readable JSON goes to stdout and a one-line summary to stderr.  Exit
codes: 0 success, 1 input error, 2 capacity, infeasible or infinite optimum,
3 negative certificate.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .costs import _read_json
from .errors import CapacityError, InfeasibleError, MMOTError, NotMongeError, ValidationError
from .extremal import ExtremePointCatalog, check_representable
from .measures import Marginal, PairMeasure, SAEState
from .monge import sae_to_monge
from .problem import METHODS, PRICINGS, ProblemFile
from .solver import (
    maximize_gs,
    maximize_soft_gs,
    maximize_soft_wasserstein,
    maximize_wasserstein,
    solve_colgen,
    solve_monge_bruteforce,
    solve_oracle_full,
    solve_sae,
)

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_NEGATIVE = 0, 1, 2, 3

logger = logging.getLogger("mmot")


def _emit(payload: dict, summary: str) -> None:
    json.dump(payload, sys.stdout, indent=2, allow_nan=False)
    sys.stdout.write("\n")
    print(summary, file=sys.stderr)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def cmd_solve(args) -> int:
    prob = ProblemFile.load(args.problem)
    opts = prob.options
    for name in ("method", "pricing", "seed", "limit_columns", "limit_oracle"):
        v = getattr(args, name)
        if v is not None:
            setattr(opts, name, v)
    if args.exact:
        opts.exact = True
    threads = args.threads or opts.threads or os.cpu_count()
    if opts.method == "sae":
        report = solve_sae(prob.cost, prob.marginal, prob.N, exact=opts.exact, limit=opts.limit_columns, threads=threads)
    elif opts.method == "colgen":
        report = solve_colgen(prob.cost, prob.marginal, prob.N, pricing=opts.pricing, seed=opts.seed, limit=opts.limit_columns)
    elif opts.method == "oracle":
        kwargs = {} if opts.limit_oracle is None else {"limit": opts.limit_oracle}
        report = solve_oracle_full(prob.cost, prob.marginal, prob.N, **kwargs)
    else:
        report = solve_monge_bruteforce(prob.cost, prob.N, prob.marginal)
    payload = report.to_dict()
    cost = payload["cost"]
    if cost == "inf":
        _emit(payload, f"{opts.method}: no plan of finite cost")
        return EXIT_SOLVER
    extra = ""
    if opts.method in ("sae", "colgen"):
        extra = f", support {report.support_size}, unique={report.unique}"
        if opts.method == "colgen" and not report.certified:
            extra += ", heuristic (not certified)"
    _emit(payload, f"{opts.method}: cost {cost:.12g}{extra}")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    cat = ExtremePointCatalog(args.l, args.N, args.limit_columns)
    rows = []
    phis = cat.phi_images if args.with_phi else None
    for k, rho in enumerate(cat.occupations):
        item = {"rho": [int(v) for v in rho]}
        if phis is not None:
            item["phi"] = phis[k].tolist()
        rows.append(item)
    _emit({"l": args.l, "N": args.N, "count": len(cat), "measures": rows}, f"{len(cat)} quantized measures for l={args.l}, N={args.N}")
    return EXIT_OK


def cmd_check_representable(args) -> int:
    mu = PairMeasure.from_dict(_read_json(args.file))
    cert = check_representable(mu, args.N, limit=args.limit_columns)
    if cert.representable:
        _emit(cert.to_dict(), f"representable for N={args.N} with {len(cert.witness)} extreme points")
        return EXIT_OK
    _emit(cert.to_dict(), f"not representable for N={args.N}; separation margin {cert.margin:.3g}")
    return EXIT_NEGATIVE


def cmd_decompose_monge(args) -> int:
    state = SAEState.from_dict(_read_json(args.file))
    try:
        monge = sae_to_monge(state)
    except NotMongeError as exc:
        _emit({"verdict": "not-monge", "reason": str(exc)}, f"rejected: {exc}")
        return EXIT_NEGATIVE
    _emit({"verdict": "monge", "N": monge.N, "l": monge.l, "maps": monge.to_list()}, f"{monge.N} permutations of {monge.l} sites")
    return EXIT_OK


def cmd_max_wasserstein(args) -> int:
    data = _read_json(args.file)
    if isinstance(data, dict) and "marginal" in data:
        data = data["marginal"]
    lam = Marginal.from_dict(data)
    if args.gs:
        res, soft = maximize_gs(lam, args.N, limit=args.limit_columns), maximize_soft_gs(lam, args.N, args.limit_columns)
    else:
        res, soft = maximize_wasserstein(lam, args.N, limit=args.limit_columns), maximize_soft_wasserstein(lam, args.N, args.limit_columns)
    payload = res.to_dict()
    payload["soft"] = {"value": soft.value, "argmax": list(soft.argmax.rho)}
    _emit(payload, f"{payload['objective']} maximum {res.value:.12g}, unique={res.unique}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmot", description="Symmetric multi-marginal optimal transport on finite spaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a problem file")
    s.add_argument("problem")
    s.add_argument("--method", choices=METHODS)
    s.add_argument("--pricing", choices=PRICINGS)
    s.add_argument("--exact", action="store_true", help="rational arithmetic (sae only)")
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=_positive_int)
    s.add_argument("--limit-columns", type=_positive_int)
    s.add_argument("--limit-oracle", type=_positive_int)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("enumerate", help="list the quantized measures for (l, N)")
    e.add_argument("l", type=_positive_int)
    e.add_argument("N", type=_positive_int)
    e.add_argument("--with-phi", action="store_true")
    e.add_argument("--limit-columns", type=_positive_int)
    e.set_defaults(func=cmd_enumerate)

    r = sub.add_parser("check-representable", help="test N-representability of a pair measure")
    r.add_argument("file")
    r.add_argument("N", type=_positive_int)
    r.add_argument("--limit-columns", type=_positive_int)
    r.set_defaults(func=cmd_check_representable)

    d = sub.add_parser("decompose-monge", help="recover Monge maps from an equal-weight SAE state")
    d.add_argument("file")
    d.set_defaults(func=cmd_decompose_monge)

    w = sub.add_parser("max-wasserstein", help="maximize the discrete Wasserstein cost for a marginal")
    w.add_argument("file")
    w.add_argument("N", type=_positive_int)
    w.add_argument("--gs", action="store_true", help="maximize the Gangbo-Swiech cost instead")
    w.add_argument("--limit-columns", type=_positive_int)
    w.set_defaults(func=cmd_max_wasserstein)
    return p


def main(argv=None) -> int:
    level = os.environ.get("MMOT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CapacityError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MMOTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        print(f"error: invalid input ({exc})", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
