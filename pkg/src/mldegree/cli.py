"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 computation anomaly
(count and mixed volume disagree after the retry), 3 internal invariant
violation (the two mixed-volume engines disagree, a face check fails).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .core import (
    DataVector,
    SystemDocument,
    SystemFormatError,
    is_hat_form,
    parse_document,
    sample_data_vector,
    serialize_system,
    system_to_dict,
)
from .faces import CertificateError, Case, case3_kernel_certificate, classify_face, scan_weight_vectors
from .families import random_square_supports
from .mixed_volume import FinenessError, MixedVolumeDisagreement, mixed_cells, mixed_volume_ie
from .ml_system import build_ml_system, hat, ml_degree_mixed_volume
from .polytope import LatticePolytope, newton_polytope
from .solver import TrackerConfig, bkk_trial, solve_ml_system

EXIT_OK, EXIT_USAGE, EXIT_ANOMALY, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _config_args(p: argparse.ArgumentParser) -> None:
    d = TrackerConfig()
    g = p.add_argument_group("tracker")
    g.add_argument("--initial-step", type=float, default=d.initial_step)
    g.add_argument("--min-step", type=float, default=d.min_step)
    g.add_argument("--newton-tol", type=float, default=d.newton_tolerance)
    g.add_argument("--max-newton-iters", type=int, default=d.max_newton_iters)
    g.add_argument("--max-steps", type=int, default=d.max_steps)
    g.add_argument("--torus-threshold", type=float, default=d.torus_threshold)
    g.add_argument("--dedup-distance", type=float, default=d.dedup_distance)
    g.add_argument("--workers", type=int, default=1, help="threads for path tracking")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mldegree", description="ML degrees of sparse polynomial models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input", help="system file (JSON)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, help="overrides the seed in the input file (default 0)")

    common(sub.add_parser("validate", help="parse and check a system file"))
    common(sub.add_parser("ml-system", help="emit the Lagrange likelihood system as a system file"))
    p = sub.add_parser("mixed-volume", help="mixed volume of a square system's Newton polytopes")
    common(p)
    p.add_argument("--method", choices=["ie", "cells", "both"], default="both")
    p = sub.add_parser("ml-degree", help="ML degree by mixed volume, by solving, or both")
    common(p)
    p.add_argument("--method", choices=["mixed-volume", "solve", "both"], default="both")
    _config_args(p)
    p = sub.add_parser("classify", help="exposed-face case of a weight vector, or a scan")
    common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--weight", help="comma separated integers a1,..,an,b1,..,bk")
    group.add_argument("--radius", type=int, help="scan all nonzero w with max-norm <= radius")
    p = sub.add_parser("bkk-check", help="random square systems: solve count against mixed volume")
    common(p, needs_input=False)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--n", type=int, help="fixed dimension (default: random in 1..3)")
    p.add_argument("--no-retry", action="store_true")
    _config_args(p)
    return parser


def _digest(doc: SystemDocument) -> str:
    return hashlib.sha256(serialize_system(doc.system, doc.u, doc.seed).encode()).hexdigest()


def _config(args) -> TrackerConfig:
    try:
        return TrackerConfig(args.initial_step, args.min_step, args.newton_tol, args.max_newton_iters,
                             args.max_steps, args.torus_threshold, args.dedup_distance)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _polytopes_json(polys: Sequence[LatticePolytope]) -> list:
    return [sorted(list(v) for v in P.vertex_set()) for P in polys]


def _data(doc: SystemDocument, seed: int) -> tuple[DataVector, str]:
    if doc.u is not None:
        return doc.u, "input"
    return sample_data_vector(doc.system.n, seed), "sampled"


def _u_json(u: DataVector) -> list:
    return [str(v) for v in u.exact] if u.exact is not None else list(u.values)


def _cmd_validate(doc: SystemDocument, args) -> tuple[dict, int]:
    F = doc.system
    return {"valid": True, "n": F.n, "k": F.k, "terms": [len(f.terms) for f in F],
            "hat_form": is_hat_form(F), "exact": all(f.is_exact for f in F),
            "has_data": doc.u is not None}, EXIT_OK


def _cmd_ml_system(doc: SystemDocument, args, seed: int) -> tuple[dict, int]:
    u, origin = _data(doc, seed)
    ml = build_ml_system(doc.system, u)
    out = system_to_dict(ml.as_system())
    out["variables"] = ml.variable_names()
    out["source"] = {"n": ml.n, "k": ml.k, "u": _u_json(u), "u_origin": origin}
    return out, EXIT_OK


def _cmd_mixed_volume(doc: SystemDocument, args, seed: int) -> tuple[dict, int]:
    F = doc.system
    if F.k != F.n:
        raise UsageError(f"mixed volume needs a square system, got {F.k} polynomials in {F.n} variables")
    report: dict = {"method": args.method}
    polys = [newton_polytope(f) for f in F]
    if args.method in ("ie", "both"):
        report["ie"] = mixed_volume_ie(polys)
    if args.method in ("cells", "both"):
        sub = mixed_cells(F.supports, seed)
        report["cells_total"] = sub.total
        report["cells"] = [c.to_dict(sub.supports) for c in sub.cells]
        report["lifting_seed"] = seed
        report["lifting_attempts"] = sub.attempts
    if args.method == "both" and report["ie"] != report["cells_total"]:
        report["mixed_volume"] = None
        report["error"] = "engines disagree"
        return report, EXIT_INTERNAL
    report["mixed_volume"] = report["ie"] if "ie" in report else report["cells_total"]
    return report, EXIT_OK


def _cmd_ml_degree(doc: SystemDocument, args, seed: int) -> tuple[dict, int]:
    F = doc.system
    u, origin = _data(doc, seed)
    ml = build_ml_system(F, u)
    report: dict = {"n": F.n, "k": F.k, "method": args.method, "u": _u_json(u), "u_origin": origin,
                    "newton_polytopes": _polytopes_json(ml.newton_polytopes()),
                    "variables": ml.variable_names()}
    code = EXIT_OK
    if args.method in ("mixed-volume", "both"):
        report["mixed_volume"] = ml_degree_mixed_volume(F, u, seed, "both")
    if args.method in ("solve", "both"):
        config = _config(args)
        solved = solve_ml_system(F, u, seed, config, workers=args.workers)
        report["solve"] = solved.to_dict()
        report["count"] = solved.count
        report["config"] = config.to_dict()
        if "mixed_volume" not in report:
            report["mixed_volume"] = solved.mixed_volume
        report["agreement"] = solved.count == report["mixed_volume"]
        if not report["agreement"]:
            code = EXIT_ANOMALY
    report["ml_degree"] = report["count"] if args.method == "solve" else report["mixed_volume"]
    return report, code


def _parse_weight(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad weight vector {text!r}") from exc


def _cmd_classify(doc: SystemDocument, args, seed: int) -> tuple[dict, int]:
    F = doc.system
    applied = not is_hat_form(F)
    if applied:
        F = hat(F)
    u, _ = _data(doc, seed)
    ml = build_ml_system(F, u)
    report: dict = {"hat_applied": applied, "n": ml.n, "k": ml.k}
    if args.weight is not None:
        w = _parse_weight(args.weight)
        try:
            fc = classify_face(ml, w)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        report["classification"] = fc.to_dict()
        if fc.case == Case.MIXED and any(w[: ml.n]):
            cert = case3_kernel_certificate(ml, w)
            report["certificate"] = {"vector": list(cert.vector), "matrix_shape": list(cert.matrix_shape),
                                     "verified": True}
        return report, EXIT_OK
    if args.radius < 1:
        raise UsageError("radius must be at least 1")
    scan = scan_weight_vectors(ml, args.radius)
    report["radius"] = args.radius
    report.update(scan.to_dict())
    bad = scan.unclassified or scan.inconsistent
    return report, EXIT_INTERNAL if bad else EXIT_OK


def _cmd_bkk(args, seed: int) -> tuple[dict, int]:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.n is not None and not 1 <= args.n <= 6:
        raise UsageError("--n must be between 1 and 6")
    config = _config(args)
    trials = []
    for i in range(args.trials):
        trial_seed = seed * 1_000_003 + i
        supports = random_square_supports(trial_seed, n=args.n)
        trials.append(bkk_trial(supports, trial_seed, config, retry=not args.no_retry))
    first = sum(t.passed_first for t in trials)
    final = sum(t.passed for t in trials)
    report = {"trials": [t.to_dict() for t in trials], "passed_first": first, "passed": final,
              "total": len(trials), "config": config.to_dict()}
    return report, EXIT_OK if final == len(trials) else EXIT_ANOMALY


def _glue_weight(argv: Sequence[str]) -> list[str]:
    # "--weight -3,14,3" would otherwise be read as an unknown option.
    out: list[str] = []
    it = iter(argv)
    for arg in it:
        if arg == "--weight":
            value = next(it, None)
            out.append("--weight" if value is None else f"--weight={value}")
        else:
            out.append(arg)
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = _glue_weight(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"mldegree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING, format="mldegree: %(levelname)s: %(message)s")
    try:
        if args.command == "bkk-check":
            seed = 0 if args.seed is None else args.seed
            report, code = _cmd_bkk(args, seed)
            report = {"command": args.command, "seed": seed, **report}
        else:
            try:
                with open(args.input, "rb") as fh:
                    doc = parse_document(fh.read())
            except OSError as exc:
                raise UsageError(f"cannot read {args.input}: {exc.strerror}") from exc
            seed = args.seed if args.seed is not None else (doc.seed if doc.seed is not None else 0)
            handler = {"validate": lambda: _cmd_validate(doc, args),
                       "ml-system": lambda: _cmd_ml_system(doc, args, seed),
                       "mixed-volume": lambda: _cmd_mixed_volume(doc, args, seed),
                       "ml-degree": lambda: _cmd_ml_degree(doc, args, seed),
                       "classify": lambda: _cmd_classify(doc, args, seed)}[args.command]
            report, code = handler()
            if args.command != "ml-system":
                report = {"command": args.command, "input_digest": _digest(doc), "seed": seed, **report}
            else:
                report["input_digest"] = _digest(doc)
                report["seed"] = seed
    except (UsageError, SystemFormatError) as exc:
        print(f"mldegree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MixedVolumeDisagreement, CertificateError, FinenessError) as exc:
        print(f"mldegree: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    report["arguments"] = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "input")}
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_ANOMALY:
        print("mldegree: anomaly: solution count and mixed volume disagree", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
