"""Deterministic random instance generators shared by the search tests and
the acceptance suite."""

from fractions import Fraction

from conelab.groups import (
    BaumslagSolitar,
    FreeGroup,
    IntegerLattice,
    Lamplighter,
    ball,
)
from conelab.functions import (
    LatticeEmbedding,
    QuerySpec,
    ball_indicator,
    constant,
    free_prefix_indicator,
    half_space,
    semigroup_indicator,
    subgroup_indicator,
)

Z = IntegerLattice(1)
Z2 = IntegerLattice(2)
F2 = FreeGroup(2)
LL = Lamplighter()
BS2 = BaumslagSolitar(2)


def function_pool(G):
    fs = [constant(G, 1), ball_indicator(G, 2)]
    if G == Z:
        fs.append(half_space(Z, (1,)))
        fs.append(subgroup_indicator(LatticeEmbedding([[2]])))
    if G == Z2:
        fs.append(half_space(Z2, (1, 0)))
        fs.append(half_space(Z2, (1, -2)))
    if G == F2:
        a, b = F2.generators()
        fs.append(semigroup_indicator(F2, a, b))
        fs.append(free_prefix_indicator(F2, "a"))
    if G == LL:
        t, a = LL.generators()
        fs.append(semigroup_indicator(LL, t, a * t))
    if G == BS2:
        a, b = BS2.generators()
        fs.append(semigroup_indicator(BS2, a, b))
    return fs


def random_query(G, rng, max_extra=3, max_radius=4, min_radius=2):
    pool = [x for layer in ball(G, G.default_generators(), 2).layers[1:] for x in layer]
    extra = rng.sample(pool, rng.randint(1, min(max_extra, len(pool))))
    S = [G.identity()] + extra
    return QuerySpec(S, Fraction(1, 4), rng.randint(min_radius, max_radius))


def random_alternative_instance(rng, max_radius=4):
    G = rng.choice([Z, Z2, F2, LL, BS2])
    f = rng.choice(function_pool(G))
    q = random_query(G, rng, max_radius=max_radius)
    return f, q
