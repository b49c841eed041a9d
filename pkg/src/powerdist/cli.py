"""Command-line front end.

Exit status: 0 success (relation holds), 2 input error, 3 violations found.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import report as rp
from .classification import Inequality, NamedInequality, classify
from .distance import validate
from .errors import PowerDistError
from .fixtures import (AnalyticSpace, curve_length_324, known_witnesses,
                       sample_matrix, verify_record)
from .numerics import parse_extended
from .power_triangle import (PowerParams, TriplePolicy, boundary_p,
                             boundary_sigma, check_relation, sigma_profile)
from .sequences import (CAUCHY_EPS, CAUCHY_N_MAX, DEFAULT_EPS, DEFAULT_N_MAX,
                        SequenceSpec, Verdict, cauchy_check, limit_check)
from .transforms import TransformSpec, apply

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 2, 3
DEFAULT_GRID = "-2:2:9,inf,-inf"


def parse_grid(text: str) -> list[float]:
    """``lo:hi:count`` ranges and single values, comma separated.

    >>> parse_grid("0:1:3,inf")
    [0.0, 0.5, 1.0, inf]
    """
    values = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            raise PowerDistError(f"empty item in grid {text!r}")
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise PowerDistError(f"range must be lo:hi:count, got {item!r}")
            lo, hi = float(parts[0]), float(parts[1])
            try:
                count = int(parts[2])
            except ValueError:
                raise PowerDistError(f"bad count in {item!r}") from None
            if count < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
                raise PowerDistError(f"bad range {item!r}")
            values.extend(float(v) for v in np.linspace(lo, hi, count))
        else:
            values.append(parse_extended(item))
    values.sort()
    for a, b in zip(values, values[1:]):
        if a == b:
            raise PowerDistError(f"grid value {a!r} appears twice")
    return values


def parse_sequence(text: str) -> SequenceSpec:
    """``reciprocal``, ``affine:a,b`` (a + b/n) or ``constant:c``."""
    name, _, arg = text.partition(":")
    try:
        nums = [float(v) for v in arg.split(",")] if arg else []
    except ValueError:
        raise PowerDistError(f"bad sequence parameters {arg!r}") from None
    if name == "reciprocal" and not nums:
        return SequenceSpec.reciprocal()
    if name == "affine" and len(nums) == 2:
        return SequenceSpec.affine(*nums)
    if name == "constant" and len(nums) == 1:
        return SequenceSpec.constant(nums[0])
    raise PowerDistError(f"unknown sequence {text!r}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load(args):
    text = _read(args.input)
    return text, rp.parse_matrix_csv(text)


def _witness_line(w, labels) -> str:
    x, y, z = (labels[i] for i in w.triple)
    return f"({x},{y},{z}) lhs {rp.fmt(w.lhs)} rhs {rp.fmt(w.rhs)}"


def cmd_validate(args) -> int:
    text, m = _load(args)
    v = validate(m.entries)
    lines = [f"n {m.n}", f"nonnegative {v.nonnegative}", f"symmetric {v.symmetric}",
             f"zero_diagonal {v.zero_diagonal}", f"nondegenerate {v.nondegenerate}"]
    for w in v.nondegenerate_witnesses[:10]:
        lines.append(f"  zero distance between {m.labels[w.i]} and {m.labels[w.j]}")
    _write(args.output, "\n".join(lines) + "\n")
    return EXIT_OK if v.ok else EXIT_VIOLATION


def cmd_classify(args) -> int:
    text, m = _load(args)
    policy = TriplePolicy(args.policy)
    c = classify(m, policy)
    prof = sigma_profile(m, parse_grid(args.grid), policy)
    labels = m.labels
    rep = rp.build_report(
        input=rp.input_record(args.input, text, m),
        policy=policy.value,
        classification=rp.classification_json(c),
        profile=rp.profile_json(prof, labels),
        witnesses={name: rp.relation_json(r, labels) for name, r in c.named.items()},
    )
    _write(args.output, rp.dumps(rep))
    return EXIT_OK if c.is_metric else EXIT_VIOLATION


def _check_params(args) -> PowerParams:
    if args.preset:
        return NamedInequality(args.preset, args.sigma).params()
    if args.p is None or args.sigma is None:
        raise PowerDistError("check needs --p and --sigma, or --preset")
    return PowerParams(parse_extended(args.p), args.sigma)


def cmd_check(args) -> int:
    text, m = _load(args)
    policy = TriplePolicy(args.policy)
    params = _check_params(args)
    r = check_relation(m, params, policy)
    if args.format == "json":
        rep = rp.build_report(input=rp.input_record(args.input, text, m),
                              policy=policy.value,
                              witnesses={"check": rp.relation_json(r, m.labels)})
        _write(args.output, rp.dumps(rep))
    else:
        head = f"p {rp.fmt(params.p)} sigma {rp.fmt(params.sigma)} policy {policy.value}"
        if r.holds:
            body = "holds" + ("" if r.witness is None else
                              f"; tightest {_witness_line(r.witness, m.labels)}")
        else:
            body = f"violated at {_witness_line(r.witness, m.labels)}"
        _write(args.output, f"{head}\n{body}\n")
    return EXIT_OK if r.holds else EXIT_VIOLATION


def cmd_sigma_profile(args) -> int:
    _, m = _load(args)
    prof = sigma_profile(m, parse_grid(args.grid), TriplePolicy(args.policy))
    _write(args.output, rp.profile_to_csv(prof, m.labels))
    return EXIT_OK


def cmd_boundary(args) -> int:
    if (args.p is None) == (args.sigma is None):
        raise PowerDistError("give exactly one of --p or --sigma")
    if args.p is not None:
        out = boundary_sigma(parse_extended(args.p))
    else:
        out = boundary_p(args.sigma)
    _write(None, rp.fmt(out) + "\n")
    return EXIT_OK


def cmd_fixture(args) -> int:
    space = AnalyticSpace(args.space)
    ok = True
    lines = []
    for rec in known_witnesses(space):
        chk = verify_record(rec)
        ok &= chk.reproduced
        pts = ",".join(rp.fmt(p) for p in rec.points)
        lines.append(f"{rec.kind} ({pts}): {rp.fmt(chk.lhs)} vs {rp.fmt(chk.rhs)} "
                     f"{'ok' if chk.reproduced else 'MISMATCH'}")
    if args.curve_n is not None:
        if space is not AnalyticSpace.EX324:
            raise PowerDistError("--curve-n applies to ex324 only")
        length = curve_length_324(args.curve_n)
        good = length == math.ldexp(1.0, -args.curve_n)
        ok &= good
        lines.append(f"curve length N={args.curve_n}: {rp.fmt(length)} "
                     f"{'ok' if good else 'MISMATCH'}")
    if args.sample:
        m = sample_matrix(space, [float(v) for v in args.sample.split(",")])
        _write(args.write_matrix, rp.matrix_to_csv(m))
        if args.write_matrix is None:
            return EXIT_OK if ok else EXIT_VIOLATION
    _write(None, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_sequence(args) -> int:
    space = AnalyticSpace(args.space)
    seq = parse_sequence(args.seq)
    if args.cauchy:
        eps = tuple(args.eps) if args.eps else CAUCHY_EPS
        cert = cauchy_check(space, seq, eps, args.n_max or CAUCHY_N_MAX)
        body = rp.cauchy_json(cert)
    else:
        if args.candidate is None:
            raise PowerDistError("limit check needs --candidate (or use --cauchy)")
        eps = tuple(args.eps) if args.eps else DEFAULT_EPS
        cert = limit_check(space, seq, args.candidate, eps, args.n_max or DEFAULT_N_MAX)
        body = rp.convergence_json(cert)
    body = {"space": space.value, "sequence": args.seq, **body}
    _write(args.output, rp.dumps(rp.build_report(certificates=[body])))
    return EXIT_OK if cert.verdict is Verdict.CERTIFIED else EXIT_VIOLATION


def cmd_transform(args) -> int:
    _, m = _load(args)
    out = apply(m, TransformSpec.parse(args.transform))
    _write(args.output, rp.matrix_to_csv(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="powerdist",
                                 description="Power-triangle analysis of distance matrices.")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_input(p):
        p.add_argument("--input", required=True, help="matrix CSV path, or - for stdin")
        p.add_argument("--output", help="output path (default stdout)")
        return p

    def with_policy(p):
        p.add_argument("--policy", default=TriplePolicy.EXCLUDE_DEGENERATE.value,
                       choices=[t.value for t in TriplePolicy])
        return p

    p = with_input(sub.add_parser("validate", help="check the distance axioms"))
    p.set_defaults(func=cmd_validate)

    p = with_policy(with_input(sub.add_parser("classify", help="JSON classification report")))
    p.add_argument("--grid", default=DEFAULT_GRID, help=f"p grid (default {DEFAULT_GRID})")
    p.set_defaults(func=cmd_classify)

    p = with_policy(with_input(sub.add_parser("check", help="test one (p, sigma) relation")))
    p.add_argument("--p", help="exponent; inf and -inf allowed")
    p.add_argument("--sigma", type=float)
    p.add_argument("--preset", choices=[k.value for k in Inequality],
                   help="named inequality; parametric ones also take --sigma")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_check)

    p = with_policy(with_input(sub.add_parser("sigma-profile", help="sigma_min over a p grid (CSV)")))
    p.add_argument("--grid", required=True, help="e.g. -4:4:17,inf,-inf")
    p.set_defaults(func=cmd_sigma_profile)

    p = sub.add_parser("boundary", help="boundary sigma for p, or p for sigma")
    p.add_argument("--p")
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("fixture", help="reproduce an example space's documented facts")
    p.add_argument("space", choices=[s.value for s in AnalyticSpace])
    p.add_argument("--curve-n", type=int)
    p.add_argument("--sample", help="comma-separated points to sample into a matrix CSV")
    p.add_argument("--write-matrix", help="where to write the sampled matrix (default stdout)")
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("sequence", help="finite-horizon limit or Cauchy certificate")
    p.add_argument("--space", required=True, choices=[s.value for s in AnalyticSpace])
    p.add_argument("--seq", required=True, help="reciprocal | affine:a,b | constant:c")
    p.add_argument("--candidate", type=float)
    p.add_argument("--cauchy", action="store_true")
    p.add_argument("--eps", type=float, nargs="+")
    p.add_argument("--n-max", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sequence)

    p = with_input(sub.add_parser("transform", help="apply phi entry-wise, write matrix CSV"))
    p.add_argument("--transform", required=True, help="name[:param], e.g. snowflake:0.5")
    p.set_defaults(func=cmd_transform)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PowerDistError, OSError) as exc:
        print(f"powerdist: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
