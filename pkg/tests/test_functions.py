import random
from fractions import Fraction

import pytest

from conelab.groups import DirectProduct, FreeGroup, IntegerLattice, Lamplighter, ball
from conelab.functions import (
    FunctionError,
    IdentityEmbedding,
    LatticeEmbedding,
    ProductFactorEmbedding,
    QuerySpec,
    Weight,
    ball_indicator,
    constant,
    convolve,
    custom_predicate,
    free_prefix_indicator,
    half_space,
    orbit_sum,
    reiter_defect,
    right_translate,
    semigroup_indicator,
    subgroup_indicator,
    translate,
    translated_mass,
    weighted_norm,
    zero_extension,
)

Z = IntegerLattice(1)
Z2 = IntegerLattice(2)
F2 = FreeGroup(2)
LL = Lamplighter()


def zel(n):
    return Z.element((n,))


def random_weight(G, rng, size=4):
    gens = G.default_generators()
    items = []
    for _ in range(size):
        el = G.identity()
        for _ in range(rng.randint(0, 4)):
            el = el * rng.choice(gens)
        items.append((el, Fraction(rng.randint(-5, 5), rng.randint(1, 4))))
    return Weight(G, items)


# -- translate ----------------------------------------------------------------


def test_translate_dirac_pushforward():
    a, b = F2.generators()
    u = Weight.dirac(F2.identity())
    assert translate(a, u) == Weight.dirac(a)
    assert translate(a * b, u) == Weight.dirac(a * b)


def test_translate_convention_on_z():
    u = Weight(Z, [(zel(0), 2), (zel(3), 5)])
    tu = translate(zel(1), u)
    for n in range(-2, 6):
        assert tu.get(zel(n)) == u.get(zel(n - 1))


def test_translate_action_axiom_random():
    rng = random.Random(3)
    for _ in range(25):
        u = random_weight(F2, rng)
        g = random_weight(F2, rng, 1).support()
        h = random_weight(F2, rng, 1).support()
        g = g[0] if g else F2.identity()
        h = h[0] if h else F2.identity()
        assert translate(g, translate(h, u)) == translate(g * h, u)


def test_translate_preserves_counting_norm():
    rng = random.Random(4)
    for G in (Z2, F2, LL):
        u = random_weight(G, rng)
        g = G.default_generators()[0]
        assert translate(g, u).l1() == u.l1()


# -- weighted_norm ------------------------------------------------------------


def test_weighted_norm_halfline_examples():
    f = half_space(Z, (1,))
    u = Weight(Z, [(zel(0), 1), (zel(1), 1)])
    assert weighted_norm(u, f) == 2
    assert weighted_norm(Weight.dirac(zel(-1)), f) == 0
    u2 = Weight(Z, [(zel(0), Fraction(1, 2)), (zel(1), Fraction(1, 2))])
    assert weighted_norm(u2, f, p=2) == Fraction(1, 2)


def test_weighted_norm_zero_iff_pointwise():
    f = half_space(Z, (1,))
    u = Weight(Z, [(zel(-3), 4), (zel(-1), -2)])
    assert weighted_norm(u, f) == 0
    assert all(f.value(el) == 0 for el in u.support())


def test_translated_mass_derived_identity():
    # sum |(g.u)(x)| f(x) == sum |u(x)| f(g x), exactly
    rng = random.Random(5)
    f = semigroup_indicator(F2, *F2.generators())
    for _ in range(20):
        u = random_weight(F2, rng)
        g = random_weight(F2, rng, 1).support()
        g = g[0] if g else F2.identity()
        gu = translate(g, u)
        lhs = sum((abs(v) * f.value(el) for el, v in gu.items()), Fraction(0))
        assert lhs == translated_mass(u, f, g)


# -- convolve -----------------------------------------------------------------


def test_convolve_identity_weight():
    P = DirectProduct(Z, Z)
    f = custom_predicate(P, "left_halfline", lambda el: el.key[0][0] >= 0)
    rho = Weight.dirac(Z.identity())
    g = convolve(rho, f, factor="right")
    for x in ball(P, P.default_generators(), 3).elements():
        assert g.value(x) == f.value(x)


def test_convolve_single_translate():
    P = DirectProduct(Z, Z)
    f = custom_predicate(P, "left_halfline", lambda el: el.key[0][0] >= 0)
    t_left = P.generators()[0]  # (1, 0)
    rho = Weight.dirac(Z.generators()[0])
    g = convolve(rho, f, factor="left")
    for x in ball(P, P.default_generators(), 3).elements():
        assert g.value(x) == f.value(t_left.inv() * x)


def test_convolve_two_term_values():
    P = DirectProduct(Z, Z)
    f = custom_predicate(P, "left_halfline", lambda el: el.key[0][0] >= 0)
    rho = Weight(Z, [(Z.identity(), Fraction(1, 2)), (Z.generators()[0], Fraction(1, 2))])
    g = convolve(rho, f, factor="left")
    window = ball(P, P.default_generators(), 3)
    values = {g.value(x) for x in window.elements()}
    assert values == {Fraction(0), Fraction(1, 2), Fraction(1)}
    assert g.value(P.element(((0, 0), (0, 0)))) == Fraction(1, 2)


def test_convolve_monotone():
    P = DirectProduct(Z, Z)
    f1 = custom_predicate(P, "left_halfline", lambda el: el.key[0][0] >= 0)
    f2 = constant(P, 1)  # f2 >= f1 pointwise
    rho1 = Weight.dirac(Z.identity(), Fraction(1, 2))
    rho2 = Weight(Z, [(Z.identity(), Fraction(1, 2)), (Z.generators()[0], 1)])
    g11 = convolve(rho1, f1, factor="left")
    g21 = convolve(rho2, f1, factor="left")
    g22 = convolve(rho2, f2, factor="left")
    for x in ball(P, P.default_generators(), 2).elements():
        assert g11.value(x) <= g21.value(x) <= g22.value(x)


def test_convolve_requires_factor():
    f = half_space(Z2, (1, 0))
    rho = Weight.dirac(Z.identity())
    with pytest.raises(FunctionError):
        convolve(rho, f)


# -- orbit_sum ----------------------------------------------------------------


def test_orbit_sum_identity_list():
    u = Weight(Z, [(zel(2), 3)])
    assert orbit_sum(u, [Z.identity()]) == u


def test_orbit_sum_dirac():
    s = zel(1)
    out = orbit_sum(Weight.dirac(Z.identity()), [Z.identity(), s])
    assert out == Weight(Z, [(Z.identity(), 1), (s, 1)])


def test_orbit_sum_lamplighter_invariance():
    t, a = LL.generators()
    u = orbit_sum(Weight.dirac(LL.identity()), [LL.identity(), a])
    assert translate(a, u) == u


def test_orbit_sum_linear_positive():
    rng = random.Random(6)
    gens = F2.default_generators()
    for _ in range(10):
        u = random_weight(F2, rng)
        v = random_weight(F2, rng)
        els = [F2.identity(), rng.choice(gens)]
        assert orbit_sum(u + v, els) == orbit_sum(u, els) + orbit_sum(v, els)
        assert orbit_sum(u.scale(Fraction(3, 2)), els) == orbit_sum(u, els).scale(
            Fraction(3, 2)
        )
        w = Weight(F2, [(el, abs(val)) for el, val in u.items()])
        assert orbit_sum(w, els).is_nonnegative()


# -- zero_extension -----------------------------------------------------------


def test_zero_extension_even_integers():
    emb = LatticeEmbedding([[2]])
    f = zero_extension(constant(Z, 1), emb)
    for n in range(-6, 7):
        assert f.value(zel(n)) == (1 if n % 2 == 0 else 0)


def test_zero_extension_first_factor_halfline():
    emb = LatticeEmbedding([[1], [0]])  # Z -> Z^2, x -> (x, 0)
    f = zero_extension(half_space(Z, (1,)), emb)
    assert f.value(Z2.element((5, 0))) == 1
    assert f.value(Z2.element((-1, 0))) == 0
    assert f.value(Z2.element((5, 1))) == 0


def test_zero_extension_support_inside_image():
    emb = LatticeEmbedding([[1], [0]])
    f = zero_extension(half_space(Z, (1,)), emb)
    window = ball(Z2, Z2.generators(), 4)
    assert f.self_check(window)
    for x in window.elements():
        if f.value(x) != 0:
            assert emb.contains(x)


def test_zero_extension_product_factor():
    P = DirectProduct(F2, Z)
    emb = ProductFactorEmbedding(P, "left")
    f = zero_extension(semigroup_indicator(F2, *F2.generators()), emb)
    a = F2.generators()[0]
    assert f.value(emb.apply(a)) == 1
    assert f.value(P.pair(a, Z.generators()[0])) == 0


def test_lattice_embedding_membership():
    emb = LatticeEmbedding([[2, 0], [0, 3]])
    assert emb.contains(Z2.element((4, -3)))
    assert not emb.contains(Z2.element((1, 0)))
    assert emb.preimage(Z2.element((4, -3))).key == (2, -1)
    with pytest.raises(FunctionError):
        LatticeEmbedding([[1, 1], [2, 2]])  # dependent columns


# -- test function catalog ----------------------------------------------------


def test_semigroup_indicator_free_letters():
    a, b = F2.generators()
    f = semigroup_indicator(F2, a, b)
    assert f.oracle.mode == "letters"
    assert f.value(a) == 1 and f.value(a * b) == 1
    assert f.value(F2.identity()) == 0
    assert f.value(a.inv()) == 0
    assert f.value(a * b.inv()) == 0
    assert f.oracle.unique_word(a * b * b) == ("a", "b", "b")


def test_semigroup_indicator_lamplighter_pair():
    t, a = LL.generators()
    f = semigroup_indicator(LL, t, a * t)
    assert f.oracle.mode == "lamplighter"
    # product of the word (a t) t (a t): lamps {0, 2}, cursor 3
    w = (a * t) * t * (a * t)
    assert w.key == ((0, 2), 3)
    assert f.value(w) == 1
    assert f.oracle.unique_word(w) == ("b", "a", "b")
    assert f.value(t.inv()) == 0
    assert f.value(LL.element(((5,), 3))) == 0  # lamp beyond cursor range


def test_semigroup_indicator_bs_pair():
    from conelab.groups import BaumslagSolitar

    BS2 = BaumslagSolitar(2)
    a, b = BS2.generators()
    f = semigroup_indicator(BS2, a, b)
    assert f.oracle.mode == "affine"
    assert f.value(a * b) == 1          # 2x + 2
    assert f.value(b * a) == 1          # 2x + 1
    assert f.value(BS2.identity()) == 0
    assert f.value(a.inv()) == 0
    assert f.value(BS2.element((1, Fraction(1, 2)))) == 0  # dyadic non-integer
    assert f.oracle.unique_word(a * b) is None  # words not unique for (a, b)


def test_semigroup_indicator_bfs_fallback():
    x, y = Z2.generators()
    f = semigroup_indicator(Z2, x, y, cap=5)
    assert f.oracle.mode == "bfs"
    assert f.value(Z2.element((2, 3))) == 1
    assert f.value(Z2.element((6, 0))) == 0  # beyond the cap: truncated indicator
    assert f.value(Z2.element((-1, 0))) == 0


def test_ball_and_prefix_indicators():
    f = ball_indicator(Z, 2)
    assert [f.value(zel(n)) for n in (-3, -2, 0, 2, 3)] == [0, 1, 1, 1, 0]
    g = free_prefix_indicator(F2, "a")
    a, b = F2.generators()
    assert g.value(a * b) == 1
    assert g.value(b * a) == 0
    assert g.value(a.inv() * b) == 0
    assert g.value(F2.identity()) == 0


def test_subgroup_indicator():
    f = subgroup_indicator(LatticeEmbedding([[3]]))
    assert [f.value(zel(n)) for n in (-3, -1, 0, 3, 4)] == [1, 0, 1, 1, 0]


# -- reiter defect helper -----------------------------------------------------


def test_reiter_defect_disjoint_diracs():
    f = half_space(Z, (1,))
    u = Weight.dirac(zel(5))
    assert reiter_defect(u, f, zel(1)) == 2


def test_reiter_defect_bounds_ratio_difference():
    # |sum u f(sx) - sum u f(x)| <= reiter defect, exactly
    rng = random.Random(8)
    f = semigroup_indicator(F2, *F2.generators())
    for _ in range(20):
        u = random_weight(F2, rng)
        u = Weight(F2, [(el, abs(v)) for el, v in u.items()])
        for s in F2.default_generators():
            lhs = abs(translated_mass(u, f, s) - weighted_norm(u, f))
            assert lhs <= reiter_defect(u, f, s)


def test_right_translate():
    t, a = LL.generators()
    u = Weight.dirac(t)
    assert right_translate(u, a) == Weight.dirac(t * a)


# -- query spec ---------------------------------------------------------------


def test_query_spec_validation():
    e = Z.identity()
    QuerySpec([e, zel(1)], Fraction(1, 2), 3)
    with pytest.raises(FunctionError):
        QuerySpec([zel(1)], Fraction(1, 2), 3)
    with pytest.raises(FunctionError):
        QuerySpec([e, zel(1), zel(1)], Fraction(1, 2), 3)
    with pytest.raises(FunctionError):
        QuerySpec([e], Fraction(0), 3)
