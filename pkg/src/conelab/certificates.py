"""Certificate types and their independent verifiers.

A certificate is checkable knowing only the group catalog and the function
layer; nothing here imports the search code.  Witness checks are global
(all sums are finite); translate-violation checks are window checks unless
the structural path upgrades them.

JSON layout (field order fixed, rationals as "p/q", elements as generator
words) makes certificate files byte-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from conelab.groups import (
    BallTable,
    Element,
    GroupHandle,
    ball,
    ball_cap,
)
from conelab.functions import (
    SemigroupDescriptor,
    TestFunction,
    Weight,
    ZeroExtensionDescriptor,
    reiter_defect,
    translated_mass,
    weighted_norm,
)
from conelab.specs import (
    SpecError,
    format_fraction,
    parse_element,
    parse_fraction,
    parse_group,
    parse_test_function,
)


class CertificateError(ValueError):
    """Pattern mismatch, missing data, or unverifiable certificate."""


LEVEL_WINDOW = "window"
LEVEL_STRUCTURAL = "structural"
LEVEL_GLOBAL = "global"


@dataclass
class VerificationReport:
    """Outcome of a verification run: named exact quantities plus a verdict.

    ``checks`` rows are (name, value-string, ok).  ``counterexamples`` list
    human-readable witnesses of failure, capped for brevity.
    """

    ok: bool
    level: str
    checks: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)

    def add(self, name: str, value, ok: bool) -> bool:
        if isinstance(value, Fraction):
            value = format_fraction(value)
        self.checks.append((name, str(value), bool(ok)))
        if not ok:
            self.ok = False
        return ok

    def as_dict(self) -> dict:
        return {
            "level": self.level,
            "ok": self.ok,
            "checks": [[n, v, ok] for (n, v, ok) in self.checks],
            "counterexamples": list(self.counterexamples),
        }


# ---------------------------------------------------------------------------
# Certificate types


@dataclass
class RatioWitness:
    """Nonnegative weight u with ||u f||_1 = 1 whose translated masses stay
    within epsilon of 1 (two-sided default) for every s in S."""

    f: TestFunction
    S: list
    epsilon: Fraction
    u: Weight
    two_sided: bool = True
    window_radius: int = 0
    provenance: list = field(default_factory=list)
    kind = "ratio_witness"


@dataclass
class ReiterWitness:
    """Nonnegative weight u with ||u f||_1 = 1 and ||(s u - u) f||_1 < epsilon
    for every s in S."""

    f: TestFunction
    S: list
    epsilon: Fraction
    u: Weight
    window_radius: int = 0
    provenance: list = field(default_factory=list)
    kind = "reiter_witness"


@dataclass
class TranslateViolation:
    """Data (t_i, g_i) with sum t_i = -1 claiming sum_i t_i f(g_i^-1 x) >= 0.

    The claim is verified on a window; only the structural path for
    semigroup indicators upgrades it beyond the window.
    """

    f: TestFunction
    items: list  # [(Fraction, Element)]
    window_radius: int
    verification_level: str = LEVEL_WINDOW
    provenance: list = field(default_factory=list)
    kind = "translate_violation"


@dataclass
class FreenessWitness:
    """All nonempty words of length <= depth in the pair (a, b) are distinct
    elements; status 'collision' carries the first pair of equal words."""

    a: Element
    b: Element
    depth: int
    status: str
    counterexample: Optional[tuple] = None
    provenance: list = field(default_factory=list)
    kind = "freeness_witness"


Certificate = (RatioWitness, ReiterWitness, TranslateViolation, FreenessWitness)


def canonical_violation(f: TestFunction, items: Sequence) -> TranslateViolation:
    """Drop zero coefficients, scale to sum t_i = -1, order by canonical key."""
    total = sum((t for t, _ in items), Fraction(0))
    if total >= 0:
        raise CertificateError("violation items must have negative sum")
    scaled = [(t / -total, g) for t, g in items if t != 0]
    scaled.sort(key=lambda item: item[1].key)
    return TranslateViolation(f, scaled, 0)


def canonical_weight(u: Weight, f: TestFunction) -> Weight:
    """Scale a nonnegative weight so that ||u f||_1 = 1."""
    norm = weighted_norm(u, f)
    if norm == 0:
        raise CertificateError("weight has zero f-mass; cannot normalize")
    return u.scale(1 / norm)


# ---------------------------------------------------------------------------
# Freeness


def _pair_word_str(word) -> str:
    return "".join(word)


def free_to_depth(G: GroupHandle, a: Element, b: Element, N: int,
                  cap: Optional[int] = None) -> FreenessWitness:
    """Enumerate all 2^(N+1)-2 nonempty (a,b)-words and compare canonical keys."""
    if N < 1:
        raise CertificateError("freeness depth must be >= 1")
    if a.group != G or b.group != G:
        raise CertificateError("pair must live in the given group")
    if 2 ** (N + 1) - 2 > ball_cap(cap):
        raise CertificateError("freeness enumeration exceeds the element cap")
    seen = {}
    frontier = [((), G.identity())]
    for _ in range(N):
        nxt = []
        for word, el in frontier:
            for letter, gen in (("a", a), ("b", b)):
                w2 = word + (letter,)
                e2 = el * gen
                if e2.key in seen:
                    return FreenessWitness(
                        a, b, N, "collision",
                        (_pair_word_str(seen[e2.key]), _pair_word_str(w2)),
                    )
                seen[e2.key] = w2
                nxt.append((w2, e2))
        frontier = nxt
    return FreenessWitness(a, b, N, "free")


# ---------------------------------------------------------------------------
# Verifiers


def _power(q: Fraction, p: int) -> Fraction:
    return q if p == 1 else q**p


def verify_certificate(cert, window_radius: Optional[int] = None,
                       p: int = 1, cap: Optional[int] = None) -> VerificationReport:
    """Recompute every certified quantity exactly and report pass/fail.

    Witness checks are conclusive (finite sums over the whole support);
    translate violations are checked at every point of the window ball of
    the given radius (defaulting to the certificate's own).  The p argument
    switches the l^1 comparisons to their l^p power forms.
    """
    if isinstance(cert, RatioWitness):
        return _verify_ratio(cert, p)
    if isinstance(cert, ReiterWitness):
        return _verify_reiter(cert, p)
    if isinstance(cert, TranslateViolation):
        return _verify_violation(cert, window_radius, cap)
    if isinstance(cert, FreenessWitness):
        return _verify_freeness(cert, cap)
    raise CertificateError("unknown certificate type %r" % type(cert).__name__)


def _verify_ratio(cert: RatioWitness, p: int) -> VerificationReport:
    rep = VerificationReport(True, LEVEL_GLOBAL)
    rep.add("nonnegative", "u >= 0", cert.u.is_nonnegative())
    norm = weighted_norm(cert.u, cert.f)
    rep.add("norm", norm, norm == 1)
    norm_p = weighted_norm(cert.u, cert.f, p)
    one = Fraction(1)
    for s in cert.S:
        sigma = translated_mass(cert.u, cert.f, s, p)
        if cert.two_sided:
            lo = _power(max(one - cert.epsilon, Fraction(0)), p) * norm_p
            hi = _power(one + cert.epsilon, p) * norm_p
            ok = lo <= sigma <= hi
        else:
            ok = sigma < _power(one + cert.epsilon, p) * norm_p
        rep.add("mass:%s" % s.word_str(), sigma, ok)
    return rep


def _verify_reiter(cert: ReiterWitness, p: int) -> VerificationReport:
    rep = VerificationReport(True, LEVEL_GLOBAL)
    rep.add("nonnegative", "u >= 0", cert.u.is_nonnegative())
    norm = weighted_norm(cert.u, cert.f)
    rep.add("norm", norm, norm == 1)
    norm_p = weighted_norm(cert.u, cert.f, p)
    for s in cert.S:
        d = reiter_defect(cert.u, cert.f, s, p)
        rep.add("defect:%s" % s.word_str(), d, d < _power(cert.epsilon, p) * norm_p)
    return rep


def _verify_violation(cert: TranslateViolation, window_radius, cap) -> VerificationReport:
    radius = cert.window_radius if window_radius is None else window_radius
    rep = VerificationReport(True, LEVEL_WINDOW)
    total = sum((t for t, _ in cert.items), Fraction(0))
    rep.add("coefficient_sum", total, total == -1)
    G = cert.f.group
    pairs = [(t, g.inv()) for t, g in cert.items]
    window = ball(G, G.default_generators(), radius, cap)
    bad = 0
    for x in window.elements():
        v = sum((t * cert.f.value(ginv * x) for t, ginv in pairs), Fraction(0))
        if v < 0:
            bad += 1
            if len(rep.counterexamples) < 5:
                rep.counterexamples.append(
                    "sum is %s at %s" % (format_fraction(v), x.word_str())
                )
    rep.add("window_points_checked", window.size, True)
    rep.add("window_failures", bad, bad == 0)
    return rep


def _verify_freeness(cert: FreenessWitness, cap) -> VerificationReport:
    rep = VerificationReport(True, LEVEL_GLOBAL)
    redone = free_to_depth(cert.a.group, cert.a, cert.b, cert.depth, cap)
    rep.add("recomputed_status", redone.status, redone.status == cert.status)
    if redone.status == "collision":
        rep.counterexamples.append("%s = %s" % redone.counterexample)
        if cert.counterexample is not None:
            rep.add(
                "counterexample_matches",
                "%s = %s" % redone.counterexample,
                cert.counterexample == redone.counterexample,
            )
    return rep


# ---------------------------------------------------------------------------
# Structural upgrade for semigroup-indicator violations


def _unwrap_semigroup(cert: TranslateViolation):
    """Return (oracle, items-in-base-group) for semigroup indicators and
    zero-extensions of them; raise on any other shape."""
    f = cert.f
    items = cert.items
    desc = f.descriptor
    if isinstance(desc, ZeroExtensionDescriptor):
        emb = desc.embedding
        inner_items = []
        for t, g in items:
            h = emb.preimage(g)
            if h is None:
                raise CertificateError(
                    "violation element %s is outside the embedded subgroup" % g
                )
            inner_items.append((t, h))
        inner = TranslateViolation(desc.inner, inner_items, cert.window_radius)
        return _unwrap_semigroup(inner)
    if not isinstance(desc, SemigroupDescriptor):
        raise CertificateError(
            "structural verification is defined for semigroup indicators only"
        )
    oracle = getattr(f, "oracle", None)
    if oracle is None:
        raise CertificateError("semigroup indicator lost its membership oracle")
    return oracle, items


def structural_verify_semigroup_violation(
    cert: TranslateViolation, cap: Optional[int] = None
) -> VerificationReport:
    """Upgrade a window-verified semigroup violation to structural level.

    Requires the canonical shape (1, e), (-1, a), (-1, b) up to positive
    scaling, a prefix-free catalog membership oracle, a freeness witness one
    step beyond the window radius, and exact closure plus disjointness scans
    of A on the window.  On success the certificate's level is upgraded.
    """
    oracle, items = _unwrap_semigroup(cert)
    G, a, b = oracle.group, oracle.a, oracle.b
    scaled = sorted(((t, g) for t, g in items), key=lambda i: i[1].key)
    shape = {g.key: t for t, g in scaled}
    expected = {G.identity().key: Fraction(1), a.key: Fraction(-1), b.key: Fraction(-1)}
    if shape != expected:
        raise CertificateError(
            "items do not match the canonical pattern (1,e),(-1,a),(-1,b)"
        )

    rep = VerificationReport(True, LEVEL_STRUCTURAL)
    R = cert.window_radius
    rep.add(
        "oracle_prefix_free",
        oracle.mode,
        oracle.structurally_free(),
    )
    if not rep.ok:
        raise CertificateError(
            "membership oracle for mode %r has no normal-form disjointness argument"
            % oracle.mode
        )
    freeness = free_to_depth(G, a, b, R + 1, cap)
    rep.add("free_to_depth", freeness.depth, freeness.status == "free")
    if freeness.status != "free":
        raise CertificateError(
            "freeness not established to depth %d: %s = %s"
            % (R + 1, *freeness.counterexample)
        )
    window = ball(G, G.default_generators(), R, cap)
    members = [x for x in window.elements() if oracle.contains(x)]
    closure_bad = [
        x for x in members
        if not (oracle.contains(a * x) and oracle.contains(b * x))
    ]
    rep.add("closure_failures", len(closure_bad), not closure_bad)
    disjoint_bad = [
        x for x in members
        if oracle.contains(a.inv() * x) and oracle.contains(b.inv() * x)
    ]
    rep.add("disjointness_failures", len(disjoint_bad), not disjoint_bad)
    word_bad = [x for x in members if oracle.unique_word(x) is None]
    rep.add("unique_word_failures", len(word_bad), not word_bad)
    window_rep = _verify_violation(cert, R, cap)
    rep.add("window_inequality", "recheck", window_rep.ok)
    rep.counterexamples.extend(window_rep.counterexamples)
    if rep.ok:
        cert.verification_level = LEVEL_STRUCTURAL
    return rep


# ---------------------------------------------------------------------------
# JSON serialization (byte-reproducible)


def _element_word(el: Element) -> str:
    return el.word_str()


def certificate_to_dict(cert, report: Optional[VerificationReport] = None) -> dict:
    out = {"kind": cert.kind}
    if isinstance(cert, FreenessWitness):
        out["group"] = cert.a.group.spec
        out["pair"] = [_element_word(cert.a), _element_word(cert.b)]
        out["depth"] = cert.depth
        out["status"] = cert.status
        if cert.counterexample:
            out["counterexample"] = list(cert.counterexample)
    elif isinstance(cert, TranslateViolation):
        out["group"] = cert.f.group.spec
        out["f"] = cert.f.spec_string()
        out["items"] = [
            [format_fraction(t), _element_word(g)] for t, g in cert.items
        ]
        out["window_radius"] = cert.window_radius
        out["level"] = cert.verification_level
    else:
        out["group"] = cert.f.group.spec
        out["f"] = cert.f.spec_string()
        out["s_set"] = [_element_word(s) for s in cert.S]
        out["epsilon"] = format_fraction(cert.epsilon)
        if isinstance(cert, RatioWitness):
            out["two_sided"] = cert.two_sided
        out["u"] = [
            [_element_word(el), format_fraction(v)] for el, v in cert.u.items()
        ]
        out["window_radius"] = cert.window_radius
    if cert.provenance:
        out["provenance"] = list(cert.provenance)
    if report is not None:
        out["verification"] = report.as_dict()
    return out


def certificate_to_json(cert, report: Optional[VerificationReport] = None) -> str:
    return json.dumps(certificate_to_dict(cert, report), indent=2) + "\n"


def certificate_from_dict(data: dict, config: Optional[dict] = None):
    """Rebuild a certificate object from its JSON dictionary."""
    try:
        kind = data["kind"]
        G = parse_group(data["group"], config)
        chain = list(data.get("provenance", []))
        if kind == "freeness_witness":
            a = parse_element(G, data["pair"][0])
            b = parse_element(G, data["pair"][1])
            return FreenessWitness(
                a, b, int(data["depth"]), data["status"],
                tuple(data["counterexample"]) if "counterexample" in data else None,
                chain,
            )
        f = parse_test_function(G, data["f"], config)
        if kind == "translate_violation":
            items = [
                (parse_fraction(t), parse_element(G, w)) for t, w in data["items"]
            ]
            return TranslateViolation(
                f, items, int(data["window_radius"]),
                data.get("level", LEVEL_WINDOW), chain,
            )
        S = [parse_element(G, w) for w in data["s_set"]]
        u = Weight(G, [(parse_element(G, w), parse_fraction(v)) for w, v in data["u"]])
        eps = parse_fraction(data["epsilon"])
        radius = int(data["window_radius"])
        if kind == "ratio_witness":
            return RatioWitness(
                f, S, eps, u, bool(data.get("two_sided", True)), radius, chain
            )
        if kind == "reiter_witness":
            return ReiterWitness(f, S, eps, u, radius, chain)
    except (KeyError, IndexError, SpecError) as exc:
        raise CertificateError("malformed certificate file: %s" % exc) from exc
    raise CertificateError("unknown certificate kind %r" % data.get("kind"))


def reverify_dict(data: dict, config: Optional[dict] = None,
                  structural: bool = False, p: int = 1):
    """Re-verify a loaded certificate dictionary.

    Returns (certificate, report).  The report fails if the recomputed
    verification block differs from the stored one, making every stored
    quantity tamper-evident.
    """
    cert = certificate_from_dict(data, config)
    want_structural = isinstance(cert, TranslateViolation) and (
        structural or data.get("level") == LEVEL_STRUCTURAL
    )
    if want_structural:
        report = structural_verify_semigroup_violation(cert)
    else:
        report = verify_certificate(cert, p=p)
    if "verification" in data and p == 1:
        stored = data["verification"]
        recomputed = report.as_dict()
        if stored != recomputed:
            report.ok = False
            report.checks.append(("stored_verification_matches", "diff", False))
    return cert, report
