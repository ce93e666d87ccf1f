"""Command-line front end.

Exit codes: 0 = witness found / property holds on the window, 2 = a
verified violation or obstruction was found, 3 = inconclusive at the given
window, 1 = usage or internal error.  JSON outputs are byte-identical
across repeated runs on identical inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from conelab.groups import (
    BallCapExceeded,
    GroupError,
    ball,
    growth_report,
    power_counts,
)
from conelab.functions import FunctionError, QuerySpec
from conelab.lp import LpError
from conelab.certificates import (
    CertificateError,
    FreenessWitness,
    RatioWitness,
    ReiterWitness,
    TranslateViolation,
    certificate_to_json,
    free_to_depth,
    reverify_dict,
    structural_verify_semigroup_violation,
    verify_certificate,
)
from conelab.constructions import (
    ConstructionError,
    JenkinsSpec,
    jenkins_reiter_witness,
    jenkins_weight,
    transport_subgroup,
)
from conelab.search import (
    SearchError,
    find_free_pairs,
    moore_gap,
    ratio_defect_lp,
    reiter_defect_lp,
    windowed_alternative,
)
from conelab.specs import (
    SpecError,
    format_fraction,
    parse_element,
    parse_elements,
    parse_embedding,
    parse_fraction,
    parse_group,
    parse_test_function,
)

USAGE_ERROR, EXIT_WITNESS, EXIT_VIOLATION, EXIT_INCONCLUSIVE = 1, 0, 2, 3

CLI_ERRORS = (
    SpecError,
    GroupError,
    FunctionError,
    CertificateError,
    ConstructionError,
    SearchError,
    LpError,
    BallCapExceeded,
    OSError,
    json.JSONDecodeError,
)


def _load_config(args):
    if getattr(args, "config", None):
        with open(args.config) as handle:
            return json.load(handle)
    return None


def _emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w") as handle:
            handle.write(text)
    if getattr(args, "json", False) and not getattr(args, "out", None):
        sys.stdout.write(text)


def _emit_trace(args, trace):
    if getattr(args, "trace", None) and trace is not None:
        with open(args.trace, "w") as handle:
            handle.write(trace.problem_dump or "")
            handle.write(trace.outcome_dump or "")


def _query(args, G, config):
    S = parse_elements(G, args.set)
    eps = parse_fraction(args.epsilon) if args.epsilon else Fraction(1, 4)
    gens = parse_elements(G, args.window_set) if getattr(args, "window_set", None) else None
    return QuerySpec(S, eps, args.window, gens)


# -- subcommands ---------------------------------------------------------------


def cmd_groups(args):
    config = _load_config(args)
    rows = [
        ("Z, Z^d", "integer lattices"),
        ("F<k>", "free groups"),
        ("H3", "discrete Heisenberg group"),
        ("LL", "lamplighter Z/2 wr Z"),
        ("BS1_<m>", "Baumslag-Solitar BS(1,m)"),
        ("Dinf", "infinite dihedral (matrix realization)"),
        ("prod(G,H)", "direct products"),
        ("mat:[..][..]", "rational matrix groups"),
    ]
    for spec, desc in rows:
        print("%-14s %s" % (spec, desc))
    if config:
        for name in sorted(config.get("groups", {})):
            print("%-14s (config)" % name)
    return EXIT_WITNESS


def cmd_growth(args):
    G = parse_group(args.group, _load_config(args))
    S = parse_elements(G, args.set) if args.set else G.default_generators()
    rep = growth_report(G, S, args.radius, args.cap)
    for n, size in enumerate(rep.sizes):
        ratio = "" if n == 0 else "  ratio %s" % format_fraction(rep.ratios[n - 1])
        print("|B_%d| = %d%s" % (n, size, ratio))
    if args.products:
        counts = power_counts(G, S, args.radius, args.cap)
        print("product counts |S^n|: %s" % ", ".join(str(c) for c in counts))
    print("label: %s%s" % (rep.label, " (truncated)" if rep.truncated else ""))
    return EXIT_WITNESS


def cmd_ball(args):
    G = parse_group(args.group, _load_config(args))
    S = parse_elements(G, args.set) if args.set else G.default_generators()
    table = ball(G, S, args.radius, args.cap)
    for n, layer in enumerate(table.layers):
        line = "sphere %d: %d" % (n, len(layer))
        if args.elements:
            line += "  " + ", ".join(x.word_str() for x in layer)
        print(line)
    print("|B_%d| = %d" % (args.radius, table.size))
    return EXIT_WITNESS


def cmd_alternative(args):
    config = _load_config(args)
    G = parse_group(args.group, config)
    f = parse_test_function(G, args.f, config)
    q = _query(args, G, config)
    outcome = windowed_alternative(f, q, cap=args.cap, trace=bool(args.trace))
    _emit_trace(args, outcome.trace)
    if outcome.branch == "witness":
        cert = outcome.witness
        report = verify_certificate(cert)
        print("witness: all %d translated masses equal 1 exactly" % len(cert.S))
        _emit(args, certificate_to_json(cert, report))
        return EXIT_WITNESS
    cert = outcome.violation
    if args.structural:
        try:
            report = structural_verify_semigroup_violation(cert, cap=args.cap)
        except CertificateError as exc:
            print("structural upgrade refused: %s" % exc, file=sys.stderr)
            report = verify_certificate(cert, cap=args.cap)
    else:
        report = verify_certificate(cert, cap=args.cap)
    items = ", ".join(
        "(%s, %s)" % (format_fraction(t), g.word_str()) for t, g in cert.items
    )
    print("violation (%s level): %s" % (cert.verification_level, items))
    _emit(args, certificate_to_json(cert, report))
    return EXIT_VIOLATION


def cmd_ratio(args):
    config = _load_config(args)
    G = parse_group(args.group, config)
    f = parse_test_function(G, args.f, config)
    q = _query(args, G, config)
    two_sided = not args.one_sided
    result = ratio_defect_lp(f, q, two_sided=two_sided, cap=args.cap,
                             trace=bool(args.trace))
    lam, u = result[0], result[1]
    if args.trace:
        _emit_trace(args, result[3])
    print("ratio defect lambda* = %s" % format_fraction(lam))
    passes = lam <= q.epsilon if two_sided else lam < q.epsilon
    if passes:
        cert = RatioWitness(f, q.S, q.epsilon, u, two_sided, q.window_radius)
        report = verify_certificate(cert)
        _emit(args, certificate_to_json(cert, report))
        return EXIT_WITNESS
    print("no witness at epsilon = %s on this window" % format_fraction(q.epsilon))
    return EXIT_INCONCLUSIVE


def cmd_reiter(args):
    config = _load_config(args)
    G = parse_group(args.group, config)
    f = parse_test_function(G, args.f, config)
    q = _query(args, G, config)
    result = reiter_defect_lp(f, q, cap=args.cap, trace=bool(args.trace))
    eps, u = result[0], result[1]
    if args.trace:
        _emit_trace(args, result[2])
    print("reiter defect epsilon* = %s" % format_fraction(eps))
    if eps < q.epsilon:
        cert = ReiterWitness(f, q.S, q.epsilon, u, q.window_radius)
        report = verify_certificate(cert)
        _emit(args, certificate_to_json(cert, report))
        return EXIT_WITNESS
    print("no witness at epsilon = %s on this window" % format_fraction(q.epsilon))
    return EXIT_INCONCLUSIVE


def cmd_jenkins(args):
    config = _load_config(args)
    G = parse_group(args.group, config)
    S = parse_elements(G, args.set) if args.set else G.default_generators()
    eps = parse_fraction(args.epsilon)
    base = parse_fraction(args.base) if args.base else None
    spec = JenkinsSpec(G, S, eps, args.radius, base)
    rho, report = jenkins_weight(spec, args.cap)
    print("base r = %s, support %d points" % (format_fraction(spec.base), len(rho)))
    for name, value, ok in report.checks:
        print("  %-28s %s  [%s]" % (name, value, "ok" if ok else "FAIL"))
    if report.ok:
        cert = jenkins_reiter_witness(spec, args.cap)
        _emit(args, certificate_to_json(cert, verify_certificate(cert)))
        return EXIT_WITNESS
    print("truncated weight misses epsilon; enlarge the radius", file=sys.stderr)
    return EXIT_INCONCLUSIVE


def cmd_moore_gap(args):
    config = _load_config(args)
    G = parse_group(args.group, config)
    E = parse_test_function(G, args.f, config)
    T = parse_elements(G, args.set)
    gens = parse_elements(G, args.window_set) if args.window_set else G.default_generators()
    window = ball(G, gens, args.window, args.cap)
    result = moore_gap(E, T, window, trace=bool(args.trace))
    value, coeffs = result[0], result[1]
    if args.trace:
        _emit_trace(args, result[2])
    print("moore gap value = %s" % format_fraction(value))
    payload = {
        "kind": "moore_probe",
        "group": G.spec,
        "f": E.spec_string(),
        "translates": [g.word_str() for g in T],
        "window_radius": args.window,
        "value": format_fraction(value),
        "coefficients": [
            [g.word_str(), format_fraction(c)] for g, c in coeffs.items()
        ],
    }
    _emit(args, json.dumps(payload, indent=2) + "\n")
    return EXIT_WITNESS if value == 1 else EXIT_VIOLATION


def _verify_moore_probe(data, config):
    G = parse_group(data["group"], config)
    E = parse_test_function(G, data["f"], config)
    T = [parse_element(G, w) for w in data["translates"]]
    coeffs = {parse_element(G, w).key: parse_fraction(c)
              for w, c in data["coefficients"]}
    window = ball(G, G.default_generators(), int(data["window_radius"]))
    worst = Fraction(0)
    for x in window.elements():
        v = Fraction(1) - sum(
            (coeffs.get(g.key, Fraction(0)) * (E.value(x) - E.value(g.inv() * x))
             for g in T),
            Fraction(0),
        )
        worst = max(worst, abs(v))
    return worst == parse_fraction(data["value"]), worst


def cmd_freeness(args):
    config = _load_config(args)
    G = parse_group(args.group, config)
    if args.scan:
        S = parse_elements(G, args.set) if args.set else G.default_generators()
        found = find_free_pairs(G, S, args.depth, args.limit, args.cap)
        for w in found:
            print("free pair to depth %d: (%s, %s)"
                  % (w.depth, w.a.word_str(), w.b.word_str()))
        if not found:
            print("no free pair found in B_2 at depth %d" % args.depth)
            return EXIT_INCONCLUSIVE
        blobs = [certificate_to_json(w, verify_certificate(w)) for w in found]
        _emit(args, "".join(blobs))
        return EXIT_VIOLATION
    a_str, b_str = args.pair.split(",")
    a = parse_element(G, a_str)
    b = parse_element(G, b_str)
    witness = free_to_depth(G, a, b, args.depth, args.cap)
    if witness.status == "free":
        print("pair (%s, %s) free to depth %d" % (a_str, b_str, args.depth))
        _emit(args, certificate_to_json(witness, verify_certificate(witness)))
        return EXIT_VIOLATION
    print("collision: %s = %s as words in (a, b)" % witness.counterexample)
    _emit(args, certificate_to_json(witness, verify_certificate(witness)))
    return EXIT_WITNESS


def cmd_violation_verify(args):
    config = _load_config(args)
    with open(args.cert) as handle:
        data = json.load(handle)
    if data.get("kind") != "translate_violation":
        print("error: not a translate violation file", file=sys.stderr)
        return USAGE_ERROR
    if args.window is not None:
        # fresh verification at the overridden radius; stored block ignored
        from conelab.certificates import certificate_from_dict

        cert = certificate_from_dict(data, config)
        cert.window_radius = args.window
        if args.structural:
            report = structural_verify_semigroup_violation(cert, cap=args.cap)
        else:
            report = verify_certificate(cert, cap=args.cap)
    else:
        cert, report = reverify_dict(data, config, structural=args.structural)
    _print_report(report)
    return EXIT_VIOLATION if report.ok else EXIT_INCONCLUSIVE


def cmd_transport(args):
    config = _load_config(args)
    with open(args.cert) as handle:
        data = json.load(handle)
    cert, report = reverify_dict(data, config)
    if not report.ok:
        print("input certificate does not verify; refusing transport", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    target = parse_group(args.target, config)
    emb = parse_embedding(target, args.embedding)
    moved = transport_subgroup(cert, emb)
    if isinstance(moved, TranslateViolation) and moved.verification_level == "structural":
        moved_report = structural_verify_semigroup_violation(moved, cap=args.cap)
    else:
        moved_report = verify_certificate(moved, cap=args.cap)
    _emit(args, certificate_to_json(moved, moved_report))
    _print_report(moved_report)
    if not moved_report.ok:
        return EXIT_INCONCLUSIVE
    return EXIT_VIOLATION if isinstance(
        moved, (TranslateViolation, FreenessWitness)
    ) else EXIT_WITNESS


def cmd_verify(args):
    config = _load_config(args)
    with open(args.cert) as handle:
        data = json.load(handle)
    if data.get("kind") == "moore_probe":
        ok, worst = _verify_moore_probe(data, config)
        print("moore probe recomputation: %s (worst error %s)"
              % ("ok" if ok else "MISMATCH", format_fraction(worst)))
        if not ok:
            return EXIT_INCONCLUSIVE
        return EXIT_WITNESS if parse_fraction(data["value"]) == 1 else EXIT_VIOLATION
    cert, report = reverify_dict(data, config, structural=args.structural, p=args.p)
    _print_report(report)
    if not report.ok:
        return EXIT_INCONCLUSIVE
    if isinstance(cert, (TranslateViolation, FreenessWitness)):
        if isinstance(cert, FreenessWitness) and cert.status != "free":
            return EXIT_WITNESS
        return EXIT_VIOLATION
    return EXIT_WITNESS


def _print_report(report):
    for name, value, ok in report.checks:
        print("  %-28s %s  [%s]" % (name, value, "ok" if ok else "FAIL"))
    for line in report.counterexamples:
        print("  counterexample: %s" % line)
    print("verification: %s at %s level" % ("PASS" if report.ok else "FAIL", report.level))


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conelab",
        description="exact certificates for translate-property experiments",
    )
    parser.add_argument("--config", help="JSON config with named groups/predicates")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, f=False, window=False, sset=False, eps=False):
        p.add_argument("--group", required=True, help="group spec, e.g. F2 or prod(Z,Z)")
        if f:
            p.add_argument("--f", required=True, help="test function spec")
        if sset:
            p.add_argument("--set", required=True, help="comma-separated element words")
        if window:
            p.add_argument("--window", type=int, required=True, help="window radius")
            p.add_argument("--window-set", dest="window_set",
                           help="window generators (default: group generators)")
        if eps:
            p.add_argument("--epsilon", help="rational p/q")
        p.add_argument("--cap", type=int, help="ball element cap")
        p.add_argument("--out", help="write JSON output to this file")
        p.add_argument("--json", action="store_true", help="print JSON to stdout")
        p.add_argument("--trace", help="write the LP trace to this file")

    p = sub.add_parser("groups", help="list the group catalog")
    p.set_defaults(func=cmd_groups)

    p = sub.add_parser("growth", help="ball sizes, ratios, and growth label")
    p.add_argument("--group", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--set", help="generating set override")
    p.add_argument("--products", action="store_true", help="also report |S^n|")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("ball", help="enumerate a word-metric ball")
    p.add_argument("--group", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--set", help="generating set override")
    p.add_argument("--elements", action="store_true", help="print the elements")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("alternative", help="windowed Farkas alternative")
    common(p, f=True, window=True, sset=True, eps=True)
    p.add_argument("--structural", action="store_true",
                   help="attempt the structural upgrade of a violation")
    p.set_defaults(func=cmd_alternative)

    p = sub.add_parser("ratio", help="minimize the translate defect")
    common(p, f=True, window=True, sset=True, eps=True)
    p.add_argument("--one-sided", action="store_true",
                   help="use the one-sided (printed) ratio inequality")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("reiter", help="minimize the Reiter defect")
    common(p, f=True, window=True, sset=True, eps=True)
    p.set_defaults(func=cmd_reiter)

    p = sub.add_parser("jenkins", help="decaying near-invariant weight")
    p.add_argument("--group", required=True)
    p.add_argument("--epsilon", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--set", help="generating set override")
    p.add_argument("--base", help="rational base override")
    p.add_argument("--cap", type=int)
    p.add_argument("--out", help="write the witness JSON to this file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_jenkins)

    p = sub.add_parser("moore-gap", help="windowed Chebyshev probe")
    common(p, f=True, window=True, sset=True)
    p.set_defaults(func=cmd_moore_gap)

    p = sub.add_parser("freeness", help="free sub-semigroup search/check")
    p.add_argument("--group", required=True)
    p.add_argument("--pair", help="two element words, comma separated")
    p.add_argument("--scan", action="store_true", help="scan pairs from B_2")
    p.add_argument("--set", help="generating set for the scan pool")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--limit", type=int, default=5)
    p.add_argument("--cap", type=int)
    p.add_argument("--out", help="write witness JSON to this file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_freeness)

    p = sub.add_parser("violation-verify", help="re-verify a violation file")
    p.add_argument("--cert", required=True)
    p.add_argument("--structural", action="store_true")
    p.add_argument("--window", type=int, help="override window radius")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_violation_verify)

    p = sub.add_parser("transport", help="transport a certificate along an embedding")
    p.add_argument("--cert", required=True)
    p.add_argument("--target", required=True, help="target group spec")
    p.add_argument("--embedding", required=True, help="embedding spec")
    p.add_argument("--cap", type=int)
    p.add_argument("--out", help="write the transported certificate here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("verify", help="re-verify any certificate file")
    p.add_argument("--cert", required=True)
    p.add_argument("--structural", action="store_true")
    p.add_argument("--p", type=int, default=1, help="l^p power for the comparisons")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLI_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
