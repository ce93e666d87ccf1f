"""Finitely supported rational weights and bounded nonnegative test
functions on groups, with the translation, weighted-norm, convolution,
averaging, and zero-extension operators.

Conventions (fixed globally): the left action is (g.u)(x) = u(g^-1 x) for
weights and test functions alike, and the right translate of a weight is
(u.h)(y) = u(y h^-1).  l^p quantities are returned as p-th powers so that
every value in the package stays an exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from conelab.groups import (
    BallTable,
    DirectProduct,
    Element,
    FreeGroup,
    GroupError,
    GroupHandle,
    IntegerLattice,
    Lamplighter,
    ball,
)


class FunctionError(ValueError):
    """Mismatched groups, unsupported embeddings, or malformed data."""


# ---------------------------------------------------------------------------
# Weights


class Weight:
    """A finitely supported rational function on a group.

    Stored entries are nonzero; iteration order is by canonical key, so all
    derived output is deterministic.
    """

    def __init__(self, group: GroupHandle, items: Iterable = ()):
        self.group = group
        self._entries = {}
        for el, val in items:
            if el.group != group:
                raise FunctionError("weight entry from a different group")
            val = Fraction(val)
            if val == 0:
                continue
            if el.key in self._entries:
                old_el, old_val = self._entries[el.key]
                val = old_val + val
                if val == 0:
                    del self._entries[el.key]
                    continue
                el = old_el
            self._entries[el.key] = (el, val)

    @classmethod
    def dirac(cls, el: Element, value=Fraction(1)) -> "Weight":
        return cls(el.group, [(el, value)])

    def items(self):
        """(element, value) pairs sorted by canonical key."""
        return sorted(self._entries.values(), key=lambda p: p[0].key)

    def support(self):
        return [el for el, _ in self.items()]

    def get(self, el: Element) -> Fraction:
        got = self._entries.get(el.key)
        return got[1] if got else Fraction(0)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        return (
            isinstance(other, Weight)
            and self.group == other.group
            and {k: v for k, (_, v) in self._entries.items()}
            == {k: v for k, (_, v) in other._entries.items()}
        )

    def is_nonnegative(self) -> bool:
        return all(v > 0 for _, v in self._entries.values())

    def total(self) -> Fraction:
        return sum((v for _, v in self._entries.values()), Fraction(0))

    def l1(self) -> Fraction:
        """Counting l1-norm (f = 1)."""
        return sum((abs(v) for _, v in self._entries.values()), Fraction(0))

    def scale(self, c) -> "Weight":
        c = Fraction(c)
        return Weight(self.group, [(el, c * v) for el, v in self.items()])

    def __add__(self, other: "Weight") -> "Weight":
        if other.group != self.group:
            raise FunctionError("group mismatch in weight sum")
        return Weight(self.group, list(self.items()) + list(other.items()))

    def __repr__(self):
        parts = ", ".join("%s: %s" % (el, v) for el, v in self.items()[:4])
        more = "..." if len(self) > 4 else ""
        return "<weight {%s%s} on %s>" % (parts, more, self.group.spec)


def translate(g: Element, u: Weight) -> Weight:
    """Left translate: (g.u)(x) = u(g^-1 x); support moves to g.support."""
    if g.group != u.group:
        raise FunctionError("group mismatch in translate")
    return Weight(u.group, [(g * el, v) for el, v in u.items()])


def right_translate(u: Weight, h: Element) -> Weight:
    """Right translate: (u.h)(y) = u(y h^-1); support moves to support.h."""
    if h.group != u.group:
        raise FunctionError("group mismatch in right_translate")
    return Weight(u.group, [(el * h, v) for el, v in u.items()])


def orbit_sum(v: Weight, elements: Sequence[Element]) -> Weight:
    """Sum of the translates r.v over the given list."""
    if not elements:
        raise FunctionError("orbit_sum needs a nonempty element list")
    out = Weight(v.group)
    for r in elements:
        out = out + translate(r, v)
    return out


# ---------------------------------------------------------------------------
# Embeddings of one catalog group into another


class Embedding:
    """Injective homomorphism with decidable image membership.

    Only catalog embeddings are supported: the identity, a factor of a
    direct product, and injective linear maps between integer lattices
    (which cover standard copies of Z^k and finite-index sublattices).
    """

    source: GroupHandle
    target: GroupHandle
    spec: str

    def apply(self, el: Element) -> Element:
        raise NotImplementedError

    def contains(self, el: Element) -> bool:
        raise NotImplementedError

    def preimage(self, el: Element) -> Optional[Element]:
        raise NotImplementedError


class IdentityEmbedding(Embedding):
    def __init__(self, G: GroupHandle):
        self.source = G
        self.target = G
        self.spec = "id"

    def apply(self, el):
        return el

    def contains(self, el):
        return True

    def preimage(self, el):
        return el


class ProductFactorEmbedding(Embedding):
    def __init__(self, product: DirectProduct, side: str):
        if not isinstance(product, DirectProduct):
            raise FunctionError("factor embedding requires a direct product")
        if side not in ("left", "right"):
            raise FunctionError("factor side must be 'left' or 'right'")
        self.side = side
        self.source = product.left if side == "left" else product.right
        self.target = product
        self.spec = "factor:%s" % side

    def apply(self, el):
        if el.group != self.source:
            raise FunctionError("element not in embedding source")
        if self.side == "left":
            return self.target.pair(el, self.target.right.identity())
        return self.target.pair(self.target.left.identity(), el)

    def contains(self, el):
        k_left, k_right = el.key
        if self.side == "left":
            return k_right == self.target.right._identity_key()
        return k_left == self.target.left._identity_key()

    def preimage(self, el):
        if not self.contains(el):
            return None
        k = el.key[0] if self.side == "left" else el.key[1]
        return self.source.element(k)


class LatticeEmbedding(Embedding):
    """x -> M x for an injective integer matrix M (d rows, k columns)."""

    def __init__(self, matrix: Sequence[Sequence[int]]):
        rows = tuple(tuple(int(v) for v in row) for row in matrix)
        if not rows or not rows[0]:
            raise FunctionError("empty lattice matrix")
        d, k = len(rows), len(rows[0])
        if any(len(r) != k for r in rows):
            raise FunctionError("ragged lattice matrix")
        self.matrix = rows
        self.source = IntegerLattice(k)
        self.target = IntegerLattice(d)
        self.spec = "lat:" + ";".join(",".join(str(v) for v in r) for r in rows)
        if self._solve(tuple(0 for _ in range(d)), check_injective=True) is None:
            raise FunctionError("lattice matrix must have independent columns")

    def _solve(self, x, check_injective=False):
        # Gaussian elimination over Q on [M | x]; returns the rational
        # solution vector or None if inconsistent.
        d, k = len(self.matrix), len(self.matrix[0])
        aug = [[Fraction(self.matrix[i][j]) for j in range(k)] + [Fraction(x[i])]
               for i in range(d)]
        pivots = []
        row = 0
        for col in range(k):
            piv = next((r for r in range(row, d) if aug[r][col] != 0), None)
            if piv is None:
                continue
            aug[row], aug[piv] = aug[piv], aug[row]
            aug[row] = [v / aug[row][col] for v in aug[row]]
            for r in range(d):
                if r != row and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [v - f * w for v, w in zip(aug[r], aug[row])]
            pivots.append(col)
            row += 1
        if check_injective:
            return pivots if len(pivots) == k else None
        if len(pivots) < k:
            return None
        for r in range(row, d):
            if aug[r][k] != 0:
                return None
        sol = [Fraction(0)] * k
        for r, col in enumerate(pivots):
            sol[col] = aug[r][k]
        return tuple(sol)

    def apply(self, el):
        if el.group != self.source:
            raise FunctionError("element not in embedding source")
        y = el.key
        x = tuple(sum(row[j] * y[j] for j in range(len(y))) for row in self.matrix)
        return self.target.element(x)

    def _rational_preimage(self, el):
        if el.group != self.target:
            raise FunctionError("element not in embedding target")
        return self._solve(el.key)

    def contains(self, el):
        sol = self._rational_preimage(el)
        return sol is not None and all(v.denominator == 1 for v in sol)

    def preimage(self, el):
        sol = self._rational_preimage(el)
        if sol is None or any(v.denominator != 1 for v in sol):
            return None
        return self.source.element(tuple(int(v) for v in sol))


# ---------------------------------------------------------------------------
# Test functions


class Descriptor:
    """Structure tag of a test function; enables verification beyond windows."""

    kind: str

    def spec_string(self) -> str:
        raise NotImplementedError


@dataclass
class ConstantDescriptor(Descriptor):
    value: Fraction
    kind = "constant"

    def spec_string(self):
        return "const:%s" % _fstr(self.value)


@dataclass
class HalfSpaceDescriptor(Descriptor):
    normal: tuple
    kind = "half_space"

    def spec_string(self):
        return "half:Z^%d:%s" % (len(self.normal), ",".join(str(v) for v in self.normal))


@dataclass
class SubgroupDescriptor(Descriptor):
    embedding: Embedding
    kind = "subgroup_indicator"

    def spec_string(self):
        return "subgroup:%s" % self.embedding.spec


@dataclass
class BallDescriptor(Descriptor):
    radius: int
    generator_words: Optional[tuple]
    kind = "ball_indicator"

    def spec_string(self):
        if self.generator_words is None:
            return "ball:%d" % self.radius
        return "ball:%d:%s" % (self.radius, ",".join(self.generator_words))


@dataclass
class SemigroupDescriptor(Descriptor):
    a: Element
    b: Element
    mode: str  # "letters" | "lamplighter" | "affine" | "bfs"
    cap: int
    kind = "semigroup_indicator"

    def spec_string(self):
        return "semigroup:%s,%s" % (self.a.word_str(), self.b.word_str())


@dataclass
class ZeroExtensionDescriptor(Descriptor):
    inner: "TestFunction"
    embedding: Embedding
    kind = "zero_extension"

    def spec_string(self):
        return "zext:%s:%s" % (self.embedding.spec, self.inner.spec_string())


@dataclass
class ConvolvedDescriptor(Descriptor):
    rho: Weight
    inner: "TestFunction"
    embedding: Embedding
    kind = "convolved"

    def spec_string(self):
        return "conv(%s)" % self.inner.spec_string()


@dataclass
class CustomDescriptor(Descriptor):
    name: str
    kind = "custom_predicate"

    def spec_string(self):
        return "custom:%s" % self.name


def _fstr(q: Fraction) -> str:
    return "%d/%d" % (q.numerator, q.denominator)


class TestFunction:
    """A bounded nonnegative rational-valued total function on a group.

    ``value`` must satisfy 0 <= value(x) <= bound for every element x; the
    descriptor records the structure that makes checks beyond a finite
    window possible.
    """

    def __init__(self, group: GroupHandle, bound, descriptor: Descriptor,
                 func: Callable[[Element], Fraction]):
        self.group = group
        self.bound = Fraction(bound)
        if self.bound < 0:
            raise FunctionError("bound must be nonnegative")
        self.descriptor = descriptor
        self._func = func

    def value(self, el: Element) -> Fraction:
        if el.group != self.group:
            raise FunctionError("element/group mismatch in test function")
        return self._func(el)

    def spec_string(self) -> str:
        return self.descriptor.spec_string()

    def self_check(self, window: BallTable) -> bool:
        """Exact descriptor sanity check on every window element."""
        for x in window.elements():
            v = self.value(x)
            if v < 0 or v > self.bound:
                return False
            if isinstance(self.descriptor, ZeroExtensionDescriptor):
                if v != 0 and not self.descriptor.embedding.contains(x):
                    return False
        return True

    def __repr__(self):
        return "<testfunction %s on %s>" % (self.spec_string(), self.group.spec)


def constant(G: GroupHandle, value=Fraction(1)) -> TestFunction:
    value = Fraction(value)
    if value < 0:
        raise FunctionError("constant test functions must be nonnegative")
    return TestFunction(G, value, ConstantDescriptor(value), lambda x: value)


def half_space(G: GroupHandle, normal: Sequence[int]) -> TestFunction:
    if not isinstance(G, IntegerLattice):
        raise FunctionError("half_space requires an integer lattice")
    normal = tuple(int(v) for v in normal)
    if len(normal) != G.d or all(v == 0 for v in normal):
        raise FunctionError("normal vector must be nonzero of matching rank")

    def f(x):
        return Fraction(1) if sum(n * c for n, c in zip(normal, x.key)) >= 0 else Fraction(0)

    return TestFunction(G, 1, HalfSpaceDescriptor(normal), f)


def subgroup_indicator(embedding: Embedding) -> TestFunction:
    desc = SubgroupDescriptor(embedding)
    return TestFunction(
        embedding.target,
        1,
        desc,
        lambda x: Fraction(1) if embedding.contains(x) else Fraction(0),
    )


def ball_indicator(G: GroupHandle, R: int, S: Optional[Sequence[Element]] = None,
                   cap: Optional[int] = None) -> TestFunction:
    words = None
    if S is None:
        S = G.default_generators()
    else:
        words = tuple(g.word_str() for g in S)
    table = ball(G, list(S), R, cap)
    keys = set(table.lengths)
    desc = BallDescriptor(R, words)
    return TestFunction(
        G, 1, desc, lambda x: Fraction(1) if x.key in keys else Fraction(0)
    )


class _SemigroupOracle:
    """Membership oracle for the sub-semigroup generated by a pair (a, b).

    Catalog patterns (recognized exactly, with unique-word recovery where
    the pair is prefix-free): two distinct free-group generators, the
    lamplighter pair (t, a*t), and the BS(1,m) pair (a, b).  Everything
    else falls back to a breadth-first enumeration truncated at ``cap``,
    i.e. the indicator of words of length <= cap.
    """

    def __init__(self, G: GroupHandle, a: Element, b: Element, cap: int):
        self.group = G
        self.a = a
        self.b = b
        self.cap = cap
        self.mode = self._classify()
        self._bfs_keys = None

    def _classify(self) -> str:
        G, a, b = self.group, self.a, self.b
        if isinstance(G, FreeGroup):
            ka, kb = a.key, b.key
            if (
                len(ka) == 1 and len(kb) == 1
                and ka[0] > 0 and kb[0] > 0 and ka != kb
            ):
                return "letters"
        if isinstance(G, Lamplighter):
            if a.key == ((), 1) and b.key == ((0,), 1):
                return "lamplighter"
        if G.spec.startswith("BS1_"):
            gen_a, gen_b = G.generators()
            if a == gen_a and b == gen_b:
                return "affine"
        return "bfs"

    def _bfs(self):
        if self._bfs_keys is None:
            keys = set()
            frontier = [self.group.identity()]
            for _ in range(self.cap):
                nxt = []
                for g in frontier:
                    for s in (self.a, self.b):
                        h = g * s
                        if h.key not in keys:
                            keys.add(h.key)
                            nxt.append(h)
                frontier = nxt
            self._bfs_keys = keys
        return self._bfs_keys

    def contains(self, x: Element) -> bool:
        if self.mode == "letters":
            la, lb = self.a.key[0], self.b.key[0]
            return len(x.key) > 0 and all(c in (la, lb) for c in x.key)
        if self.mode == "lamplighter":
            lamps, cursor = x.key
            return cursor >= 1 and all(0 <= p < cursor for p in lamps)
        if self.mode == "affine":
            k, c = x.key
            return k >= 0 and c >= 0 and c.denominator == 1 and (k, c) != (0, Fraction(0))
        return x.key in self._bfs()

    def unique_word(self, x: Element) -> Optional[tuple]:
        """The unique (a, b)-word for x, as a string of 'a'/'b' choices.

        Only available for prefix-free catalog patterns; None signals that
        uniqueness is not structurally certified for this pair.
        """
        if not self.contains(x):
            return None
        if self.mode == "letters":
            la = self.a.key[0]
            return tuple("a" if c == la else "b" for c in x.key)
        if self.mode == "lamplighter":
            lamps, cursor = x.key
            lit = set(lamps)
            return tuple("b" if i in lit else "a" for i in range(cursor))
        return None

    def structurally_free(self) -> bool:
        return self.mode in ("letters", "lamplighter")


def semigroup_indicator(G: GroupHandle, a: Element, b: Element,
                        cap: int = 12) -> TestFunction:
    if a.group != G or b.group != G:
        raise FunctionError("semigroup pair must live in the given group")
    oracle = _SemigroupOracle(G, a, b, cap)
    desc = SemigroupDescriptor(a, b, oracle.mode, cap)
    f = TestFunction(
        G, 1, desc, lambda x: Fraction(1) if oracle.contains(x) else Fraction(0)
    )
    f.oracle = oracle
    return f


def custom_predicate(G: GroupHandle, name: str,
                     predicate: Callable[[Element], bool],
                     value=Fraction(1)) -> TestFunction:
    value = Fraction(value)
    return TestFunction(
        G, value, CustomDescriptor(name),
        lambda x: value if predicate(x) else Fraction(0),
    )


def free_prefix_indicator(G: FreeGroup, letter: str) -> TestFunction:
    """Indicator of reduced words whose first letter is the given generator."""
    if not isinstance(G, FreeGroup):
        raise FunctionError("prefix indicator requires a free group")
    inv = letter.endswith("^-1")
    name = letter[:-3] if inv else letter
    if name not in G.generator_names:
        raise FunctionError("unknown generator %r" % letter)
    idx = G.generator_names.index(name) + 1
    first = -idx if inv else idx

    def pred(x):
        return len(x.key) > 0 and x.key[0] == first

    return custom_predicate(G, "prefix:%s" % letter, pred)


def zero_extension(f: TestFunction, embedding: Embedding) -> TestFunction:
    """Extend f by zero outside the image of the embedding."""
    if f.group != embedding.source:
        raise FunctionError("test function does not live on the embedding source")

    def ext(x):
        h = embedding.preimage(x)
        return f.value(h) if h is not None else Fraction(0)

    return TestFunction(
        embedding.target, f.bound, ZeroExtensionDescriptor(f, embedding), ext
    )


def _convolution_embedding(rho_group: GroupHandle, target: GroupHandle,
                           factor: Optional[str]) -> Embedding:
    if factor is None:
        if rho_group == target:
            return IdentityEmbedding(target)
        if isinstance(target, DirectProduct):
            if rho_group == target.right:
                return ProductFactorEmbedding(target, "right")
            if rho_group == target.left:
                return ProductFactorEmbedding(target, "left")
        raise FunctionError("group structure is not a direct product with the weight's factor")
    if factor == "id":
        if rho_group != target:
            raise FunctionError("identity convolution requires equal groups")
        return IdentityEmbedding(target)
    if not isinstance(target, DirectProduct):
        raise FunctionError("group structure is not a direct product with the weight's factor")
    emb = ProductFactorEmbedding(target, factor)
    if emb.source != rho_group:
        raise FunctionError("weight does not live on the requested factor")
    return emb


def convolve(rho: Weight, f: TestFunction, window: Optional[BallTable] = None,
             factor: Optional[str] = None) -> TestFunction:
    """(rho f)(x) = sum_y rho(y) f(y^-1 x), rho living on a factor of f's group.

    The sum is finite because rho is, so values are exact.  If a window is
    given, the descriptor is sanity-checked on it.
    """
    if not rho.is_nonnegative() and len(rho) > 0:
        raise FunctionError("convolution weight must be nonnegative")
    emb = _convolution_embedding(rho.group, f.group, factor)
    pairs = [(emb.apply(y).inv(), v) for y, v in rho.items()]
    bound = rho.total() * f.bound

    def conv(x):
        return sum((v * f.value(y_inv * x) for y_inv, v in pairs), Fraction(0))

    out = TestFunction(f.group, bound, ConvolvedDescriptor(rho, f, emb), conv)
    if window is not None and not out.self_check(window):
        raise FunctionError("convolved descriptor failed its window check")
    return out


# ---------------------------------------------------------------------------
# Norms and defect sums


def weighted_norm(u: Weight, f: TestFunction, p: int = 1) -> Fraction:
    """For p=1: sum |u(x)| f(x).  For p>1: the p-th power of the l^p norm,
    sum |u(x)|^p f(x)^p, kept rational."""
    if u.group != f.group:
        raise FunctionError("group mismatch in weighted_norm")
    if p < 1:
        raise FunctionError("p must be a positive integer")
    if p == 1:
        return sum((abs(v) * f.value(el) for el, v in u.items()), Fraction(0))
    return sum((abs(v) ** p * f.value(el) ** p for el, v in u.items()), Fraction(0))


def translated_mass(u: Weight, f: TestFunction, s: Element, p: int = 1) -> Fraction:
    """||(s.u) f||_1 computed via the identity sum |u(x)| f(s x); for p>1 the
    p-th power sum |u(x)|^p f(s x)^p."""
    if u.group != f.group or s.group != u.group:
        raise FunctionError("group mismatch in translated_mass")
    if p == 1:
        return sum((abs(v) * f.value(s * el) for el, v in u.items()), Fraction(0))
    return sum((abs(v) ** p * f.value(s * el) ** p for el, v in u.items()), Fraction(0))


def reiter_defect(u: Weight, f: TestFunction, s: Element, p: int = 1) -> Fraction:
    """||(s.u - u) f||_1 = sum_x |u(s^-1 x) - u(x)| f(x) (p-th power for p>1)."""
    if u.group != f.group or s.group != u.group:
        raise FunctionError("group mismatch in reiter_defect")
    su = translate(s, u)
    keys = {el.key: el for el in u.support()}
    keys.update({el.key: el for el in su.support()})
    total = Fraction(0)
    for key in sorted(keys):
        x = keys[key]
        d = abs(su.get(x) - u.get(x))
        if d:
            total += d**p * f.value(x) ** p if p > 1 else d * f.value(x)
    return total


# ---------------------------------------------------------------------------
# Query specification


@dataclass
class QuerySpec:
    """A finite test set S (identity first), a positive epsilon, and the
    window ball parameters used to instantiate LP constraints."""

    S: list
    epsilon: Fraction
    window_radius: int
    window_generators: Optional[list] = None

    def __post_init__(self):
        if not self.S:
            raise FunctionError("test set S must be nonempty")
        if not self.S[0].is_identity():
            raise FunctionError("the identity must be the first entry of S")
        keys = [g.key for g in self.S]
        if len(set(keys)) != len(keys):
            raise FunctionError("duplicate elements in S")
        self.epsilon = Fraction(self.epsilon)
        if self.epsilon <= 0:
            raise FunctionError("epsilon must be positive")
        if self.window_radius < 0:
            raise FunctionError("window radius must be nonnegative")

    def window(self, G: GroupHandle, cap: Optional[int] = None) -> BallTable:
        gens = self.window_generators or G.default_generators()
        return ball(G, gens, self.window_radius, cap)
