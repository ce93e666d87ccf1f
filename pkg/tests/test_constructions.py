from fractions import Fraction

import pytest

from conelab.groups import (
    DirectProduct,
    FreeGroup,
    IntegerLattice,
    Lamplighter,
    ball,
)
from conelab.functions import (
    LatticeEmbedding,
    ProductFactorEmbedding,
    Weight,
    constant,
    custom_predicate,
    half_space,
    semigroup_indicator,
    translate,
)
from conelab.certificates import (
    RatioWitness,
    TranslateViolation,
    structural_verify_semigroup_violation,
    verify_certificate,
)
from conelab.constructions import (
    ConstructionError,
    JenkinsSpec,
    SmoothingReport,
    finite_transport,
    jenkins_reiter_witness,
    jenkins_weight,
    negativity_preserved,
    product_smoothing_check,
    tilde_coefficients,
    transport_subgroup,
)

Z = IntegerLattice(1)
Z2 = IntegerLattice(2)
F2 = FreeGroup(2)
LL = Lamplighter()


def zel(n):
    return Z.from_word((1,) * n if n >= 0 else (-1,) * (-n))


# -- decaying weights ----------------------------------------------------------


def test_jenkins_z_base_and_values():
    spec = JenkinsSpec(Z, Z.default_generators(), Fraction(1, 2), 8)
    assert spec.base == Fraction(2, 3)
    rho, rep = jenkins_weight(spec)
    assert rho.get(Z.identity()) == 1
    for k in range(-8, 9):
        assert rho.get(zel(k)) == Fraction(2, 3) ** abs(k)
    assert rho.get(zel(9)) == 0
    assert rep.ok
    failures = [v for n, v, ok in rep.checks if n == "interior_pointwise_failures"]
    assert failures == ["0"]


def test_jenkins_identity_value_always_one():
    for G in (Z2, F2, LL):
        spec = JenkinsSpec(G, G.default_generators(), Fraction(1, 3), 3)
        rho, _ = jenkins_weight(spec)
        assert rho.get(G.identity()) == 1


def test_jenkins_base_override():
    JenkinsSpec(Z, Z.default_generators(), Fraction(1, 2), 4, base=Fraction(7, 10))
    with pytest.raises(ConstructionError):
        JenkinsSpec(Z, Z.default_generators(), Fraction(1, 2), 4, base=Fraction(3, 5))


def test_jenkins_requires_symmetric_set():
    t, a = LL.generators()
    with pytest.raises(ConstructionError):
        JenkinsSpec(LL, [t, a], Fraction(1, 2), 3)


def test_jenkins_z2_defect_bound():
    spec = JenkinsSpec(Z2, Z2.default_generators(), Fraction(1, 10), 60)
    rho, rep = jenkins_weight(spec)
    assert rep.ok  # measured relative defect <= 1/10, boundary loss included
    rel = [v for n, v, ok in rep.checks if n == "max_relative_defect"][0]
    num, den = map(int, rel.split("/"))
    assert Fraction(num, den) <= Fraction(1, 10)


def test_jenkins_truncation_too_small_fails_honestly():
    spec = JenkinsSpec(Z2, Z2.default_generators(), Fraction(1, 10), 20)
    _, rep = jenkins_weight(spec)
    assert not rep.ok  # boundary loss pushes the defect above epsilon
    with pytest.raises(ConstructionError):
        jenkins_reiter_witness(spec)


def test_jenkins_reiter_witness_verifies():
    spec = JenkinsSpec(Z, Z.default_generators(), Fraction(1, 2), 8)
    witness = jenkins_reiter_witness(spec)
    assert verify_certificate(witness).ok
    assert witness.provenance and witness.provenance[0].startswith("jenkins_weight")


# -- coefficient tilt ---------------------------------------------------------


def test_tilde_examples():
    assert tilde_coefficients([1, -1, -1], Fraction(1, 4)) == [
        Fraction(5, 4),
        Fraction(-3, 4),
        Fraction(-3, 4),
    ]
    assert sum(tilde_coefficients([1, -1, -1], Fraction(1, 4))) == Fraction(-1, 4)
    assert tilde_coefficients([0, 0], Fraction(1, 3)) == [0, 0]
    assert negativity_preserved([1, -1, -1], Fraction(1, 4))
    assert not negativity_preserved([1, -1, -1], Fraction(1, 2))


def test_tilde_identity_random():
    import random

    rng = random.Random(13)
    for _ in range(100):
        t = [Fraction(rng.randint(-6, 6), rng.randint(1, 5)) for _ in range(5)]
        eps = Fraction(rng.randint(1, 9), 10)
        tilted = tilde_coefficients(t, eps)
        assert sum(tilted) == sum(t) + eps * sum(abs(v) for v in t)


def test_tilde_epsilon_range():
    with pytest.raises(ConstructionError):
        tilde_coefficients([1], Fraction(1))
    with pytest.raises(ConstructionError):
        tilde_coefficients([1], Fraction(0))


# -- product smoothing ---------------------------------------------------------


def make_product():
    P = DirectProduct(Z, Z)
    window = ball(P, P.default_generators(), 2)
    return P, window


def test_smoothing_identity_weight():
    P, window = make_product()
    rho = Weight.dirac(Z.identity())
    f = constant(P, 1)
    rep = product_smoothing_check(rho, f, [Z.identity()], Fraction(0), window)
    assert rep.clean and rep.ok


def test_smoothing_constant_function_exact():
    P, window = make_product()
    spec = JenkinsSpec(Z, Z.default_generators(), Fraction(1, 3), 4)
    rho, _ = jenkins_weight(spec)
    rep = product_smoothing_check(
        rho, constant(P, 1), Z.default_generators(), Fraction(1, 3), window, spec
    )
    assert rep.ok and not rep.function_failures


def test_smoothing_left_factor_function_exact():
    # f depends only on the non-smoothed factor: the sandwich is an equality
    P, window = make_product()
    f = custom_predicate(P, "left_halfline", lambda el: el.key[0][0] >= 0)
    spec = JenkinsSpec(Z, Z.default_generators(), Fraction(1, 3), 4)
    rho, _ = jenkins_weight(spec)
    rep = product_smoothing_check(
        rho, f, Z.default_generators(), Fraction(1, 3), window, spec
    )
    assert rep.ok


def test_smoothing_truncation_failures_attributable():
    # f varies along the smoothed factor: truncation failures appear inside
    # the window but every one involves a support-boundary point
    P, window = make_product()
    f = custom_predicate(P, "right_halfline", lambda el: el.key[1][0] >= 0)
    spec = JenkinsSpec(Z, Z.default_generators(), Fraction(1, 3), 4)
    rho, _ = jenkins_weight(spec)
    rep = product_smoothing_check(
        rho, f, Z.default_generators(), Fraction(1, 3), window, spec
    )
    assert rep.failures
    assert rep.all_attributable


def test_smoothing_h_outside_s_guard():
    P, window = make_product()
    spec = JenkinsSpec(Z, Z.default_generators(), Fraction(1, 3), 4)
    rho, _ = jenkins_weight(spec)
    far = Z.from_word((1, 1, 1))
    with pytest.raises(ConstructionError):
        product_smoothing_check(rho, constant(P, 1), [far], Fraction(1, 3), window, spec)


# -- transports ----------------------------------------------------------------


def f2_violation(radius=4):
    a, b = F2.generators()
    f = semigroup_indicator(F2, a, b)
    return TranslateViolation(
        f,
        [(Fraction(1), F2.identity()), (Fraction(-1), a), (Fraction(-1), b)],
        radius,
    )


def test_transport_identity():
    from conelab.functions import IdentityEmbedding

    cert = f2_violation()
    moved = transport_subgroup(cert, IdentityEmbedding(F2))
    assert [(t, g.key) for t, g in moved.items] == [(t, g.key) for t, g in cert.items]
    assert verify_certificate(moved).ok
    assert moved.provenance == ["transport_subgroup:id"]


def test_transport_f2_violation_to_product():
    P = DirectProduct(F2, Z)
    emb = ProductFactorEmbedding(P, "left")
    cert = f2_violation(4)
    moved = transport_subgroup(cert, emb)
    assert moved.f.group == P
    assert verify_certificate(moved, window_radius=4).ok
    rep = structural_verify_semigroup_violation(moved)
    assert rep.ok and moved.verification_level == "structural"


def test_transport_z_witness_to_z2():
    emb = LatticeEmbedding([[1], [0]])
    u = Weight.dirac(zel(5))
    S = [Z.identity(), zel(1), zel(-1)]
    cert = RatioWitness(half_space(Z, (1,)), S, Fraction(0), u, window_radius=10)
    assert verify_certificate(cert).ok
    moved = transport_subgroup(cert, emb)
    assert [x.key for x in moved.u.support()] == [(5, 0)]
    rep = verify_certificate(moved)
    assert rep.ok
    masses = [v for n, v, ok in rep.checks if n.startswith("mass:")]
    assert masses == ["1/1", "1/1", "1/1"]


def test_transport_preserves_verdict_both_ways():
    emb = LatticeEmbedding([[1], [0]])
    u = Weight.dirac(zel(5))
    S = [Z.identity(), zel(1), zel(-1)]
    good = RatioWitness(half_space(Z, (1,)), S, Fraction(0), u, window_radius=10)
    bad = RatioWitness(
        half_space(Z, (1,)), S, Fraction(0), u.scale(Fraction(3, 2)), window_radius=10
    )
    for cert in (good, bad):
        direct = verify_certificate(cert).ok
        moved = verify_certificate(transport_subgroup(cert, emb)).ok
        assert direct == moved


def test_finite_transport_identity_list():
    u = Weight.dirac(zel(2), Fraction(3, 7))
    out = finite_transport("finite_index_dominator", u, [Z.identity()])
    assert out == u


def test_finite_transport_lamplighter_average():
    t, a = LL.generators()
    u = Weight.dirac(LL.identity())
    out = finite_transport("finite_normal_average", u, [LL.identity(), a])
    assert translate(a, out) == out
    assert out.get(LL.identity()) == 1 and out.get(a) == 1


def test_finite_transport_nonclosed_list_error():
    a, _ = F2.generators()
    with pytest.raises(ConstructionError):
        finite_transport(
            "finite_normal_average", Weight.dirac(F2.identity()), [F2.identity(), a]
        )


def test_finite_transport_test_function():
    t, a = LL.generators()
    f = semigroup_indicator(LL, t, a * t)
    out = finite_transport("finite_normal_average", f, [LL.identity(), a])
    for x in ball(LL, LL.default_generators(), 3).elements():
        assert out.value(x) == f.value(x) + f.value(a.inv() * x)


def test_finite_transport_dominator_is_orbit_sum():
    u = Weight.dirac(zel(0), 1)
    out = finite_transport("finite_index_dominator", u, [Z.identity(), zel(3)])
    assert out.get(zel(0)) == 1 and out.get(zel(3)) == 1
