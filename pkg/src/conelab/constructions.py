"""Constructive closure machinery: exponentially decaying near-invariant
weights, the coefficient tilt used in the product argument, the smoothing
sandwich check, and certificate transports along subgroup embeddings and
finite averaging.

The decaying weight is rho(g) = r^{|g|_S} truncated to the ball B_N, with
rational base r = 1/(1+eps) replacing e^(-delta); this satisfies the
pointwise two-sided bound |r^(+-1) - 1| <= eps exactly.  Truncation costs
are never estimated a priori: the l^1 defect is measured exactly afterward,
boundary loss included.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from conelab.groups import BallTable, Element, GroupHandle, ball
from conelab.functions import (
    FunctionError,
    TestFunction,
    Weight,
    constant,
    convolve,
    orbit_sum,
    reiter_defect,
    right_translate,
    translate,
    weighted_norm,
    zero_extension,
    Embedding,
    _convolution_embedding,
)
from conelab.certificates import (
    CertificateError,
    FreenessWitness,
    LEVEL_GLOBAL,
    RatioWitness,
    ReiterWitness,
    TranslateViolation,
    VerificationReport,
)


class ConstructionError(ValueError):
    """Violated preconditions of a construction."""


# ---------------------------------------------------------------------------
# Decaying near-invariant weights


@dataclass
class JenkinsSpec:
    """Parameters of the decaying weight rho(g) = base^{|g|_S} on B_N.

    The default base 1/(1+epsilon) meets the pointwise condition
    max(1/r - 1, 1 - r) <= epsilon with equality on one side; any other
    rational base satisfying it is accepted via the override.
    """

    group: GroupHandle
    S: list
    epsilon: Fraction
    N: int
    base: Optional[Fraction] = None

    def __post_init__(self):
        self.epsilon = Fraction(self.epsilon)
        if self.epsilon <= 0:
            raise ConstructionError("epsilon must be positive")
        if self.N < 1:
            raise ConstructionError("truncation radius must be >= 1")
        keys = {g.key for g in self.S}
        if not keys:
            raise ConstructionError("generating set must be nonempty")
        for g in self.S:
            if g.group != self.group:
                raise ConstructionError("generator outside the group")
            if g.inv().key not in keys:
                raise ConstructionError("S must be symmetrized (closed under inverse)")
        if self.base is None:
            self.base = 1 / (1 + self.epsilon)
        self.base = Fraction(self.base)
        if not 0 < self.base < 1:
            raise ConstructionError("base must lie in (0, 1)")
        if max(1 / self.base - 1, 1 - self.base) > self.epsilon:
            raise ConstructionError(
                "base violates max(1/r - 1, 1 - r) <= epsilon"
            )


def jenkins_weight(spec: JenkinsSpec, cap: Optional[int] = None):
    """Build rho and measure it: returns (weight, report).

    The report certifies, exactly: the pointwise two-sided bounds
    |rho(s^-1 g) - rho(g)| <= eps rho(g) and |rho(g s^-1) - rho(g)| <=
    eps rho(g) for every g in B_{N-1} and s in S, and the l^1 defect of
    every left translation relative to ||rho||_1, including the loss at the
    truncation sphere.
    """
    G, r, N = spec.group, spec.base, spec.N
    table = ball(G, spec.S, N, cap)
    powers = [r**n for n in range(N + 1)]
    rho = Weight(
        G,
        [(x, powers[n]) for n, layer in enumerate(table.layers) for x in layer],
    )
    report = VerificationReport(True, LEVEL_GLOBAL)
    report.add("base", r, True)
    norm = rho.l1()
    report.add("l1_norm", norm, norm > 0)

    interior_bad = 0
    eps = spec.epsilon
    for layer in table.layers[:N]:
        for g in layer:
            pg = rho.get(g)
            for s in spec.S:
                if abs(rho.get(s.inv() * g) - pg) > eps * pg:
                    interior_bad += 1
                if abs(rho.get(g * s.inv()) - pg) > eps * pg:
                    interior_bad += 1
    report.add("interior_pointwise_failures", interior_bad, interior_bad == 0)

    ones = constant(G, 1)
    worst = Fraction(0)
    for s in spec.S:
        defect = reiter_defect(rho, ones, s)
        relative = defect / norm
        worst = max(worst, relative)
        report.add("l1_defect:%s" % s.word_str(), relative, relative <= eps)
    report.add("max_relative_defect", worst, worst <= eps)
    return rho, report


def jenkins_reiter_witness(spec: JenkinsSpec, cap: Optional[int] = None) -> ReiterWitness:
    """Package the decaying weight as a Reiter witness for f = 1.

    Fails loudly if the measured defect (boundary loss included) is not
    strictly below epsilon.
    """
    rho, report = jenkins_weight(spec, cap)
    norm = rho.l1()
    u = rho.scale(1 / norm)
    S = [spec.group.identity()] + [s for s in spec.S if not s.is_identity()]
    witness = ReiterWitness(
        constant(spec.group, 1), S, spec.epsilon, u, spec.N,
        provenance=["jenkins_weight:r=%s/%s:N=%d"
                    % (spec.base.numerator, spec.base.denominator, spec.N)],
    )
    from conelab.certificates import verify_certificate

    if not verify_certificate(witness).ok:
        raise ConstructionError(
            "truncated weight misses the strict Reiter bound; enlarge N"
        )
    return witness


# ---------------------------------------------------------------------------
# Coefficient tilt


def tilde_coefficients(t: Sequence, epsilon) -> list:
    """(1+eps) t_i for positive entries, (1-eps) t_i otherwise.

    The exact identity sum(t~) = sum(t) + eps * sum|t| holds by
    construction and is asserted.
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ConstructionError("epsilon must lie in (0, 1)")
    t = [Fraction(v) for v in t]
    tilted = [(1 + epsilon) * v if v > 0 else (1 - epsilon) * v for v in t]
    assert sum(tilted) == sum(t) + epsilon * sum(abs(v) for v in t)
    return tilted


def negativity_preserved(t: Sequence, epsilon) -> bool:
    """Whether the tilt keeps sum(t) negative: eps < |sum t| / sum |t|."""
    return sum(tilde_coefficients(t, epsilon)) < 0


# ---------------------------------------------------------------------------
# Product smoothing sandwich


@dataclass
class SmoothingFailure:
    where: str  # "weight" | "function"
    h: str
    at: str
    attributable: bool


@dataclass
class SmoothingReport:
    """Pointwise sandwich results for (1-eps) rho f <= (rho h) f <= (1+eps) rho f.

    Failures caused by the truncation of rho (a contributing point falls
    off the support sphere) are flagged attributable; any non-attributable
    failure means rho is not a genuine decaying weight for this epsilon.
    ``ok`` requires zero function-sandwich failures on the window.
    """

    epsilon: Fraction
    window_points: int
    weight_points: int
    failures: list = field(default_factory=list)

    @property
    def function_failures(self):
        return [f for f in self.failures if f.where == "function"]

    @property
    def ok(self) -> bool:
        return not self.function_failures

    @property
    def clean(self) -> bool:
        return not self.failures

    @property
    def all_attributable(self) -> bool:
        return all(f.attributable for f in self.failures)


def product_smoothing_check(rho: Weight, f: TestFunction, h_list: Sequence[Element],
                            epsilon, window: BallTable,
                            spec: Optional[JenkinsSpec] = None) -> SmoothingReport:
    """Verify the smoothing sandwich exactly at every window point.

    rho lives on a factor H of f's group; (rho h)(y) = rho(y h^-1) is the
    right translate.  Checks both the weight sandwich
    (1-eps) rho <= rho h <= (1+eps) rho on supp(rho) union supp(rho).h and
    the convolved function sandwich on the window, locating failures and
    marking the ones attributable to truncation.
    """
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ConstructionError("epsilon must be nonnegative")
    if spec is not None:
        skeys = {g.key for g in spec.S}
        for h in h_list:
            if h.key not in skeys:
                raise ConstructionError("h_list must be contained in the weight's S")
    for h in h_list:
        if h.group != rho.group:
            raise ConstructionError("h_list must live in the weight's group")
    if not rho.is_nonnegative():
        raise ConstructionError("smoothing weight must be nonnegative")
    emb = _convolution_embedding(rho.group, f.group, None)

    report = SmoothingReport(epsilon, 0, 0)
    supp_keys = {el.key for el in rho.support()}
    lo, hi = 1 - epsilon, 1 + epsilon

    weight_bad = {}
    for h in h_list:
        rh = right_translate(rho, h)
        pts = {el.key: el for el in rho.support()}
        pts.update({el.key: el for el in rh.support()})
        bad = set()
        for key in sorted(pts):
            y = pts[key]
            base = rho.get(y)
            moved = rh.get(y)
            if not (lo * base <= moved <= hi * base):
                boundary = key not in supp_keys or (y * h.inv()).key not in supp_keys
                bad.add(key)
                report.failures.append(
                    SmoothingFailure("weight", h.word_str(), y.word_str(), boundary)
                )
        weight_bad[h.key] = (rh, bad)
        report.weight_points += len(pts)

    xs = list(window.elements())
    report.window_points = len(xs)
    pairs = [(emb.apply(y), v) for y, v in rho.items()]
    for h in h_list:
        rh, bad = weight_bad[h.key]
        pairs_h = [(emb.apply(y), v) for y, v in rh.items()]
        for x in xs:
            base = sum((v * f.value(y.inv() * x) for y, v in pairs), Fraction(0))
            moved = sum((v * f.value(y.inv() * x) for y, v in pairs_h), Fraction(0))
            if not (lo * base <= moved <= hi * base):
                involved = any(
                    f.value(emb.apply(rho.group.element(key)).inv() * x) > 0
                    for key in bad
                )
                report.failures.append(
                    SmoothingFailure("function", h.word_str(), x.word_str(), involved)
                )
    return report


# ---------------------------------------------------------------------------
# Certificate transports


def _push_weight(u: Weight, emb: Embedding) -> Weight:
    return Weight(emb.target, [(emb.apply(el), v) for el, v in u.items()])


def transport_subgroup(cert, embedding: Embedding):
    """Transport a certificate along a catalog embedding H <= G.

    The test function becomes its zero extension; elements and supports map
    through the embedding; everything else (coefficients, epsilon, window
    radius) is preserved.  The transported certificate verifies whenever
    the original does, at the same window radius inside the image.
    """
    step = "transport_subgroup:%s" % embedding.spec
    if isinstance(cert, FreenessWitness):
        if cert.a.group != embedding.source:
            raise ConstructionError("certificate group is not the embedding source")
        return FreenessWitness(
            embedding.apply(cert.a), embedding.apply(cert.b), cert.depth,
            cert.status, cert.counterexample, cert.provenance + [step],
        )
    if cert.f.group != embedding.source:
        raise ConstructionError("certificate group is not the embedding source")
    f_ext = zero_extension(cert.f, embedding)
    if isinstance(cert, TranslateViolation):
        return TranslateViolation(
            f_ext,
            [(t, embedding.apply(g)) for t, g in cert.items],
            cert.window_radius,
            cert.verification_level,
            cert.provenance + [step],
        )
    if isinstance(cert, RatioWitness):
        return RatioWitness(
            f_ext, [embedding.apply(s) for s in cert.S], cert.epsilon,
            _push_weight(cert.u, embedding), cert.two_sided, cert.window_radius,
            cert.provenance + [step],
        )
    if isinstance(cert, ReiterWitness):
        return ReiterWitness(
            f_ext, [embedding.apply(s) for s in cert.S], cert.epsilon,
            _push_weight(cert.u, embedding), cert.window_radius,
            cert.provenance + [step],
        )
    raise ConstructionError("unsupported certificate type %r" % type(cert).__name__)


FINITE_KINDS = ("finite_index_dominator", "finite_normal_average")


def finite_transport(kind: str, v, elements: Sequence[Element]):
    """Orbit-sum a weight or test function over a finite element list.

    finite_index_dominator: plain sum of translates (the dominating
    functional of the finite-index argument).  finite_normal_average:
    additionally asserts, exactly, that the output is invariant under left
    translation by every listed element (the list must be closed, as a
    finite normal subgroup is).
    """
    if kind not in FINITE_KINDS:
        raise ConstructionError("unknown finite transport kind %r" % kind)
    if not elements:
        raise ConstructionError("element list must be nonempty")
    if isinstance(v, Weight):
        out = orbit_sum(v, list(elements))
        if kind == "finite_normal_average":
            for g in elements:
                if translate(g, out) != out:
                    raise ConstructionError(
                        "output is not invariant under %s; list not closed"
                        % g.word_str()
                    )
        return out
    if isinstance(v, TestFunction):
        mask = Weight(elements[0].group, [(g, Fraction(1)) for g in elements])
        if len(mask) != len(elements):
            raise ConstructionError("duplicate elements in the transport list")
        if kind == "finite_normal_average":
            for g in elements:
                if translate(g, mask) != mask:
                    raise ConstructionError(
                        "output is not invariant under %s; list not closed"
                        % g.word_str()
                    )
        return convolve(mask, v, factor="id" if mask.group == v.group else None)
    raise ConstructionError("finite_transport expects a Weight or TestFunction")
