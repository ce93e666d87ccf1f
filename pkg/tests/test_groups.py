import random
from fractions import Fraction

import pytest

from conelab.groups import (
    BallCapExceeded,
    BaumslagSolitar,
    DirectProduct,
    FreeGroup,
    GroupError,
    Heisenberg,
    IntegerLattice,
    Lamplighter,
    MatrixGroup,
    ball,
    growth_report,
    infinite_dihedral,
    make_group,
    multiply,
    power_counts,
)

Z = IntegerLattice(1)
Z2 = IntegerLattice(2)
F2 = FreeGroup(2)
LL = Lamplighter()
BS2 = BaumslagSolitar(2)

BUILTINS = [Z, Z2, F2, LL, BS2, Heisenberg(), infinite_dihedral(), DirectProduct(Z, F2)]


def random_element(G, rng, max_len=6):
    gens = G.default_generators()
    word = [rng.choice(gens) for _ in range(rng.randint(0, max_len))]
    el = G.identity()
    for g in word:
        el = el * g
    return el


# -- make_group ---------------------------------------------------------------


def test_make_group_lattice_identity():
    G = make_group(("integer_lattice", 2))
    assert G.identity().key == (0, 0)


def test_make_group_matrix_dihedral_realization():
    # the two standard matrices generate an infinite dihedral group
    G = make_group(
        ("matrix_group", [[[2, 0], [0, Fraction(1, 2)]], [[0, 1], [1, 0]]])
    )
    a, b = G.generators()
    assert (b * b).is_identity()
    assert b * a * b == a.inv()
    # a has infinite order: check a few powers are distinct
    powers = set()
    el = G.identity()
    for _ in range(6):
        powers.add(el.key)
        el = el * a
    assert len(powers) == 6


def test_make_group_bs12_affine_relation():
    # oracle: compose the affine maps x -> 2x and x -> x+1 directly
    G = make_group(("baumslag_solitar", 1, 2))
    a, b = G.generators()

    def as_map(el):
        return lambda x: G.apply(el, x)

    lhs = a * b * a.inv()
    rhs = b * b
    for x in (Fraction(0), Fraction(1), Fraction(-3, 7)):
        assert as_map(lhs)(x) == as_map(rhs)(x)
    assert lhs == rhs


def test_make_group_errors():
    with pytest.raises(GroupError):
        make_group(("baumslag_solitar", 1, 1))
    with pytest.raises(GroupError):
        MatrixGroup([[[1, 0], [2, 0]]])  # singular
    with pytest.raises(GroupError):
        MatrixGroup([[[1, 0], [0, 1], [0, 0]]])  # not square


# -- multiply / inverse -------------------------------------------------------


def test_multiply_lattice():
    a = Z2.element((1, 2))
    b = Z2.element((3, -1))
    assert multiply(Z2, a, b).key == (4, 1)


def test_multiply_free_reduction():
    a, b = F2.generators()
    assert (a * a.inv()).is_identity()
    assert (a * b).inv() == b.inv() * a.inv()


def test_multiply_bs12_composition_oracle():
    a, b = BS2.generators()
    prod = a * b  # x -> 2x, after x -> x+1
    for x in (Fraction(0), Fraction(5), Fraction(-1, 4)):
        assert BS2.apply(prod, x) == 2 * x + 2


def test_multiply_group_mismatch():
    with pytest.raises(GroupError):
        multiply(Z, Z.element((1,)), Z2.element((1, 0)))


def test_inverse_lattice_and_free():
    assert Z2.element((3, -1)).inv().key == (-3, 1)
    a, b = F2.generators()
    assert (a * b).inv().key == (-2, -1)


def test_inverse_lamplighter_formula():
    # (lamps {0}, cursor 1) -> (lamps {-1}, cursor -1), and back to identity
    g = LL.element(((0,), 1))
    assert g.inv().key == ((-1,), -1)
    assert (g * g.inv()).is_identity()
    assert (g.inv() * g).is_identity()


def test_group_axioms_random_triples():
    rng = random.Random(7)
    for G in BUILTINS:
        e = G.identity()
        for _ in range(1000 // len(BUILTINS) + 1):
            a = random_element(G, rng)
            b = random_element(G, rng)
            c = random_element(G, rng)
            assert (a * b) * c == a * (b * c)
            assert a * e == a and e * a == a
            assert (a * a.inv()).is_identity()


# -- balls --------------------------------------------------------------------


def test_ball_z_sizes():
    t = ball(Z, Z.generators(), 3)
    assert t.ball_sizes() == [1, 3, 5, 7]


def test_ball_z2_cross_check_formula():
    t = ball(Z2, Z2.generators(), 8)
    assert t.ball_sizes() == [2 * n * n + 2 * n + 1 for n in range(9)]


def test_ball_f2_cross_check_formula():
    t = ball(F2, F2.generators(), 8)
    assert t.ball_sizes() == [2 * 3**n - 1 for n in range(9)]


def test_ball_layer_parent_property():
    # every sphere element has a neighbour one step down
    for G in (Z2, F2, LL):
        t = ball(G, G.default_generators(), 4)
        dirs = [s.inv() for s in t.generating_set] + list(t.generating_set)
        for n in range(1, 5):
            for g in t.layers[n]:
                assert any(
                    (g * s).key in t.lengths and t.lengths[(g * s).key] == n - 1
                    for s in dirs
                )


def test_ball_deterministic_layer_order():
    t1 = ball(F2, F2.generators(), 3)
    t2 = ball(F2, list(reversed(F2.default_generators())), 3)
    for l1, l2 in zip(t1.layers, t2.layers):
        assert [e.key for e in l1] == [e.key for e in l2]


def test_ball_cap():
    with pytest.raises(BallCapExceeded) as exc:
        ball(F2, F2.generators(), 8, cap=100)
    assert exc.value.partial.radius >= 2


def test_word_length_lipschitz():
    for G in (Z2, F2, LL, BS2):
        n = 4
        t = ball(G, G.default_generators(), n)
        for g in t.elements():
            if t.length(g) > n - 1:
                continue
            for s in t.generating_set:
                h = g * s
                assert abs(t.lengths[h.key] - t.length(g)) <= 1


def test_ball_submultiplicative():
    for G in BUILTINS:
        try:
            sizes = ball(G, G.default_generators(), 8, cap=500_000).ball_sizes()
        except BallCapExceeded:
            continue
        for m in range(9):
            for n in range(9 - m):
                assert sizes[m + n] <= sizes[m] * sizes[n]


def test_canonical_key_injectivity_b6():
    for G in BUILTINS:
        t = ball(G, G.default_generators(), 6 if G is not F2 else 5, cap=500_000)
        seen = {}
        for g in t.elements():
            blob = g.canonical_bytes()
            assert blob not in seen
            seen[blob] = g


# -- growth -------------------------------------------------------------------


def test_growth_z_polynomial():
    rep = growth_report(Z, Z.generators(), 8)
    assert rep.sizes == [2 * n + 1 for n in range(9)]
    assert rep.ratios[-1] == Fraction(17, 15)
    assert rep.label == "polynomial-like"


def test_growth_f2_exponential():
    rep = growth_report(F2, F2.generators(), 8)
    assert rep.sizes[8] == 13121
    assert rep.ratios[-1] == Fraction(13121, 4373)
    assert rep.label == "exponential-like"


def test_growth_lamplighter_exponential():
    rep = growth_report(LL, LL.default_generators(), 8)
    assert all(r >= Fraction(5, 4) for r in rep.ratios[-3:])
    assert rep.label == "exponential-like"


def test_growth_cap_inconclusive():
    rep = growth_report(F2, F2.generators(), 8, cap=200)
    assert rep.truncated
    assert rep.label == "inconclusive"


def test_power_counts_vs_ball():
    # for symmetric S containing e, |S^n| equals |B_n|
    S = [Z.identity()] + Z.default_generators()
    assert power_counts(Z, S, 5) == [1, 3, 5, 7, 9, 11]
    # non-symmetric: the free semigroup on two letters
    a, b = F2.generators()
    assert power_counts(F2, [a, b], 5) == [1, 2, 4, 8, 16, 32]


# -- misc ---------------------------------------------------------------------


def test_from_word_and_word_str():
    el = F2.from_word((1, 2, -1, 1, 1))
    assert el.key == (1, 2, 1)
    assert F2.from_word((1, -2, 1, 1)).word_str() == "a*b^-1*a^2"


def test_product_pair_and_generators():
    P = DirectProduct(Z, F2)
    x = Z.generators()[0]
    a = F2.generators()[0]
    pa = P.pair(x, a)
    assert pa.key == ((1,), (1,))
    assert pa.word_str() == "x.1*a.2"
    names = P.generator_names
    assert names == ("x.1", "a.2", "b.2")


def test_heisenberg_commutator_central():
    H = Heisenberg()
    x, y = H.generators()
    z = x * y * x.inv() * y.inv()
    assert z.key == (0, 0, 1)
    assert z * x == x * z and z * y == y * z
