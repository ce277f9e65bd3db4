"""Command-line front end: ``qcorrlab <subcommand> [options]``.

Every run writes one document (JSON or CSV) that echoes the version, seed
and parameters, followed by one record per trial, branch or error pair.
Exit status is 0 when every contract holds, 1 on a contract violation and 2
on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .cavityfeedback import (
    FeedbackConfig,
    cumulative_success_probability,
    nonlocal_method1,
    nonlocal_method2,
    run_feedback_protocol,
)
from .channels import contraction_suite, monotonicity_suite
from .errors import QcorrError
from .infomeasures import entropy_property_suite, trial_rng
from .localec import error_sweep
from .qecc import ERROR_KINDS, CodeSpec, check_general_conditions, check_strict_conditions, load_code

TWO_LN2 = 2 * math.log(2)

# Column schemas, fixed per subcommand.  JSON records carry the same keys.
COLUMNS = {
    "feedback": ["kind", "trial", "atom", "time", "outcome", "probability", "mutual_information",
                 "ground_probability", "cumulative_probability", "limit", "status"],
    "nonlocal": ["trial", "method", "t1", "t2", "mutual_information", "target"],
    "monotonicity": ["suite", "trial", "before", "after", "spectator_deviation", "dilation_deviation"],
    "entropy-props": ["trial", "property", "trials", "violations", "min_slack"],
    "codecheck": ["trial", "condition", "first", "second", "first_label", "second_label", "y_real", "y_imag", "ok"],
    "ecdemo": ["trial", "site", "c1_weight", "syndrome_A", "syndrome_B", "corrected_A", "corrected_B",
               "atom_error_A", "atom_error_B", "probability", "fidelity", "i_before", "i_after"],
}

EPILOG = "CSV columns:\n" + "\n".join(f"  {cmd}: {', '.join(cols)}" for cmd, cols in COLUMNS.items())


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _dims(count: int) -> Callable[[str], tuple[int, ...]]:
    def parse(text: str) -> tuple[int, ...]:
        try:
            dims = tuple(int(x) for x in text.lower().split("x"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {count} integers joined by 'x'") from None
        if len(dims) != count or min(dims) < 2:
            raise argparse.ArgumentTypeError(f"expected {count} dimensions >= 2 joined by 'x'")
        return dims

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--trials", type=_positive, default=None)
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=Path, default=None, help="write here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="qcorrlab", epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--version", action="version", version=f"qcorrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        return sub.add_parser(
            name, parents=[common], help=help_, epilog=f"CSV columns: {', '.join(COLUMNS[name])}"
        )

    fb = add("feedback", "one-sided cavity feedback: success curve and sampled trajectories")
    fb.add_argument("--alpha2", type=float, default=0.8, help="|alpha|^2, must exceed 1/2")
    fb.add_argument("--n", type=int, default=0)
    fb.add_argument("--nprime", type=int, default=1)
    fb.add_argument("--m", type=int, default=1)
    fb.add_argument("--mprime", type=int, default=0)
    fb.add_argument("--r0", type=float, default=1.0)
    fb.add_argument("--atoms", type=_positive, default=60)
    fb.add_argument("--fock-cutoff", type=int, default=None)

    nl = add("nonlocal", "two non-local entangling methods")
    nl.add_argument("--r0", type=float, default=1.0)
    nl.add_argument("--t", type=float, default=None, help="method 1 interaction time (default pi/r0)")
    nl.add_argument("--t1", type=float, default=None, help="method 2 first time (default pi/(2 r0))")
    nl.add_argument("--t2", type=float, default=None, help="method 2 second time (default pi/r0)")

    mo = add("monotonicity", "random local channels: mutual information never grows")
    mo.add_argument("--dims", type=_dims(2), default=(2, 2), help="e.g. 2x3")

    ep = add("entropy-props", "random checks of the entropy inequalities")
    ep.add_argument("--dims", type=_dims(3), default=(2, 2, 2), help="e.g. 2x2x2")

    cc = add("codecheck", "check a codeword file against the code conditions")
    cc.add_argument("--file", type=Path, required=True)
    cc.add_argument("--d", type=int, default=None, help="override the file's d")
    cc.add_argument("--errors", choices=ERROR_KINDS, default="all")
    cc.add_argument("--condition", choices=("general", "strict", "both"), default="general")

    ec = add("ecdemo", "encode, corrupt, decode and correct the cavity pair")
    ec.add_argument("--alpha2", type=float, default=0.7)
    ec.add_argument("--weights", type=float, nargs="+", default=[0.1, 0.5, 1.0], help="|c1|^2 values")
    return parser


# -- subcommands ---------------------------------------------------------------------
# Each returns (records, violations, params).


def _feedback(args) -> tuple[list[dict], list[dict], dict]:
    if not 0.5 < args.alpha2 <= 1.0:
        raise UsageError("--alpha2 must lie in (1/2, 1]")
    cfg = FeedbackConfig.from_weight(
        args.alpha2, args.n, args.nprime, args.m, args.mprime,
        r0=args.r0, max_atoms=args.atoms, fock_cutoff=args.fock_cutoff, seed=args.seed,
    )
    trials = args.trials or 10
    params = {"alpha2": args.alpha2, "n": args.n, "nprime": args.nprime, "m": args.m, "mprime": args.mprime,
              "r0": args.r0, "atoms": args.atoms, "fock_cutoff": cfg.fock_cutoff, "trials": trials}
    records, violations = [], []
    curve = cumulative_success_probability(cfg, args.atoms)
    prev = 0.0
    for k, (p, g) in enumerate(zip(curve.probabilities, curve.ground_probabilities)):
        records.append({"kind": "curve", "trial": None, "atom": k + 1, "cumulative_probability": p,
                        "ground_probability": g, "limit": curve.limit})
        if p < prev - 1e-15 or p >= 1.0:
            violations.append({"kind": "curve", "atom": k + 1, "cumulative_probability": p, "previous": prev})
        prev = p
    for trial in range(trials):
        trace = run_feedback_protocol(cfg, trial_rng(args.seed, trial))
        last = trace.initial_mutual_information
        for rec in trace.records:
            records.append({
                "kind": "trajectory", "trial": trial, "atom": rec.index + 1, "time": rec.time,
                "outcome": rec.outcome, "probability": rec.probability,
                "mutual_information": rec.mutual_information, "status": trace.status,
            })
            bad = (
                rec.outcome == "e" and abs(rec.mutual_information - TWO_LN2) > 1e-9
            ) or (rec.outcome == "g" and last > 1e-12 and rec.mutual_information >= last) or (
                rec.spectator_deviation > 1e-10
            )
            if bad:
                violations.append({"kind": "trajectory", "trial": trial, "seed": args.seed, "atom": rec.index + 1,
                                   "mutual_information": rec.mutual_information, "previous": last,
                                   "spectator_deviation": rec.spectator_deviation})
            last = rec.mutual_information
    return records, violations, params


def _nonlocal(args) -> tuple[list[dict], list[dict], dict]:
    if args.r0 <= 0:
        raise UsageError("--r0 must be positive")
    t = args.t if args.t is not None else math.pi / args.r0
    t1 = args.t1 if args.t1 is not None else math.pi / (2 * args.r0)
    t2 = args.t2 if args.t2 is not None else math.pi / args.r0
    _, i1 = nonlocal_method1(t, args.r0)
    _, i2 = nonlocal_method2(t1, t2, args.r0)
    records = [
        {"trial": 0, "method": 1, "t1": t, "t2": t, "mutual_information": i1, "target": TWO_LN2},
        {"trial": 1, "method": 2, "t1": t1, "t2": t2, "mutual_information": i2, "target": TWO_LN2},
    ]
    return records, [], {"r0": args.r0, "t": t, "t1": t1, "t2": t2}


def _monotonicity(args) -> tuple[list[dict], list[dict], dict]:
    trials = args.trials or 1000
    records, violations = [], []
    for report in (monotonicity_suite(args.seed, trials, args.dims), contraction_suite(args.seed, trials, args.dims)):
        for rec in report.records:
            if report.name == "monotonicity":
                row = {"before": rec["i_before"], "after": rec["i_after"],
                       "spectator_deviation": rec["spectator_deviation"],
                       "dilation_deviation": rec["dilation_deviation"]}
            else:
                row = {"before": rec["d_before"], "after": rec["d_after"]}
            records.append({"suite": report.name, "trial": rec["trial"], **row})
        violations += [dict(v, suite=report.name) for v in report.violations]
    return records, violations, {"dims": "x".join(map(str, args.dims)), "trials": trials}


def _entropy(args) -> tuple[list[dict], list[dict], dict]:
    trials = args.trials or 1000
    report = entropy_property_suite(args.seed, trials, args.dims)
    records = [dict(rec, trial=k) for k, rec in enumerate(report.as_records())]
    violations = [dict(cert, property=c.name) for c in report.checks.values() for cert in c.certificates]
    return records, violations, {"dims": "x".join(map(str, args.dims)), "trials": trials}


def _codecheck(args) -> tuple[list[dict], list[dict], dict]:
    try:
        code = load_code(args.file)
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    if args.d is not None:
        code = CodeSpec(code.n, code.q, code.codewords, args.d, name=code.name)
    checks = {"general": check_general_conditions, "strict": check_strict_conditions}
    wanted = ["general", "strict"] if args.condition == "both" else [args.condition]
    records, violations = [], []
    for name in wanted:
        report = checks[name](code, args.errors)
        bad = {(v.first, v.second) for v in report.violations}
        for (a, b), y in report.y_values.items():
            records.append({"trial": len(records), "condition": name, "first": str(a), "second": str(b),
                            "first_label": a.label(), "second_label": b.label(),
                            "y_real": y.real, "y_imag": y.imag, "ok": (a, b) not in bad})
        violations += [dict(v.to_dict(), condition=name) for v in report.violations]
    params = {"file": args.file.name, "n": code.n, "q": code.q, "d": code.d, "errors": args.errors,
              "condition": args.condition}
    return records, violations, params


def _ecdemo(args) -> tuple[list[dict], list[dict], dict]:
    if not 0.0 <= args.alpha2 <= 1.0:
        raise UsageError("--alpha2 must lie in [0, 1]")
    if any(not 0.0 <= w <= 1.0 for w in args.weights):
        raise UsageError("--weights must lie in [0, 1]")
    alpha, beta = math.sqrt(args.alpha2), math.sqrt(1 - args.alpha2)
    records, violations = [], []
    for case in error_sweep(alpha, beta, args.weights):
        for o in case.branches:
            rec = {"trial": len(records), "site": case.site, "c1_weight": case.c1_weight,
                   "syndrome_A": "".join("ge"[b] for b in o.syndrome["A"]),
                   "syndrome_B": "".join("ge"[b] for b in o.syndrome["B"]),
                   "corrected_A": o.corrected["A"], "corrected_B": o.corrected["B"],
                   "atom_error_A": o.atom_error["A"], "atom_error_B": o.atom_error["B"],
                   "probability": o.probability, "fidelity": o.fidelity,
                   "i_before": o.i_before, "i_after": o.i_after}
            records.append(rec)
            if o.fidelity < 1 - 1e-9 or abs(o.i_after - o.i_before) > 1e-8:
                violations.append(dict(rec))
    return records, violations, {"alpha2": args.alpha2, "weights": list(args.weights)}


HANDLERS = {
    "feedback": _feedback,
    "nonlocal": _nonlocal,
    "monotonicity": _monotonicity,
    "entropy-props": _entropy,
    "codecheck": _codecheck,
    "ecdemo": _ecdemo,
}


# -- output ------------------------------------------------------------------------


def _plain(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def render(command: str, seed: int, params: dict, records: list[dict], violations: list[dict], fmt: str) -> str:
    head = {"version": __version__, "command": command, "seed": seed, "params": params}
    if fmt == "json":
        doc = dict(head, passed=not violations, records=records, violations=violations)
        return json.dumps(doc, default=_plain, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# qcorrlab {__version__}\n# command: {command}\n# seed: {seed}\n")
    buf.write(f"# params: {json.dumps(params, sort_keys=True, default=_plain)}\n")
    buf.write(f"# passed: {str(not violations).lower()}\n")
    writer = csv.DictWriter(buf, fieldnames=COLUMNS[command], extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: ("" if v is None else _plain(v)) for k, v in rec.items()})
    for v in violations:
        buf.write(f"# violation: {json.dumps(v, sort_keys=True, default=_plain)}\n")
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        records, violations, params = HANDLERS[args.command](args)
    except (UsageError, QcorrError, ValueError) as exc:
        print(f"qcorrlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = render(args.command, args.seed, params, records, violations, args.output)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 1 if violations else 0


if __name__ == "__main__":
    sys.exit(main())
