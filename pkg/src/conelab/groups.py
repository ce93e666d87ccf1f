"""Exact element arithmetic, canonical normal forms, and Cayley-ball
enumeration for a catalog of finitely generated groups.

Supported groups: integer lattices Z^d, free groups F_k, the discrete
Heisenberg group, the lamplighter group Z/2 wr Z, Baumslag-Solitar groups
BS(1,m), the infinite dihedral group (as a rational matrix group), direct
products, and user-defined rational matrix groups.

Every element carries a group-specific canonical key; two elements are
equal iff their serialized keys are byte-identical.  All arithmetic is
exact (integers and fractions.Fraction only).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

DEFAULT_BALL_CAP = 200_000
BALL_CAP_ENV = "CONELAB_CAP"


class GroupError(ValueError):
    """Malformed descriptor, element/group mismatch, or singular generator."""


class BallCapExceeded(RuntimeError):
    """Raised when a ball enumeration would exceed the element-count cap."""

    def __init__(self, message: str, partial: Optional["BallTable"] = None):
        super().__init__(message)
        self.partial = partial


def ball_cap(explicit: Optional[int] = None) -> int:
    """Effective element-count cap: explicit argument, else CONELAB_CAP, else default."""
    if explicit is not None:
        return explicit
    env = os.environ.get(BALL_CAP_ENV)
    if env:
        return int(env)
    return DEFAULT_BALL_CAP


def _key_str(key) -> str:
    if isinstance(key, tuple):
        return "(" + ",".join(_key_str(k) for k in key) + ")"
    if isinstance(key, Fraction):
        return "%d/%d" % (key.numerator, key.denominator)
    return str(key)


class Element:
    """Group element: a canonical key plus an optional generator word.

    ``word`` is a tuple of signed 1-based indices into the group's named
    generator list (-i meaning the inverse of generator i).  It records how
    the element was produced and is used for serialization; it plays no
    role in equality.
    """

    __slots__ = ("group", "key", "word")

    def __init__(self, group: "GroupHandle", key, word: Optional[tuple] = None):
        self.group = group
        self.key = key
        self.word = word

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.group == other.group
            and self.key == other.key
        )

    def __hash__(self):
        return hash((self.group.spec, self.key))

    def canonical_bytes(self) -> bytes:
        return _key_str(self.key).encode("ascii")

    def __mul__(self, other: "Element") -> "Element":
        return multiply(self.group, self, other)

    def inv(self) -> "Element":
        return inverse(self.group, self)

    def is_identity(self) -> bool:
        return self.key == self.group.identity().key

    def word_str(self) -> str:
        """Render the recorded word (``a*b^-1*a^2`` style), or ``e``."""
        word = self.word
        if word is None:
            word = self.group.canonical_word(self.key)
        if word is None:
            if self.is_identity():
                return "e"
            raise GroupError("element has no recorded generator word")
        return format_word(self.group, word)

    def __repr__(self):
        try:
            w = self.word_str()
        except GroupError:
            w = _key_str(self.key)
        return "<%s in %s>" % (w, self.group.spec)


def _inv_word(word: Optional[tuple]) -> Optional[tuple]:
    if word is None:
        return None
    return tuple(-i for i in reversed(word))


def _cat_words(w1: Optional[tuple], w2: Optional[tuple]) -> Optional[tuple]:
    if w1 is None or w2 is None:
        return None
    return w1 + w2


def format_word(group: "GroupHandle", word: tuple) -> str:
    if not word:
        return "e"
    names = group.generator_names
    parts = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        idx = word[i]
        name = names[abs(idx) - 1]
        power = (j - i) * (1 if idx > 0 else -1)
        parts.append(name if power == 1 else "%s^%d" % (name, power))
        i = j
    return "*".join(parts)


class GroupHandle:
    """Base class for the group catalog.

    Subclasses implement raw-key arithmetic; the public surface works with
    :class:`Element`.  Handles are immutable and compared by their ``spec``
    string, which is a canonical description of the construction.
    """

    spec: str
    generator_names: tuple

    def _identity_key(self):
        raise NotImplementedError

    def _mul_keys(self, a, b):
        raise NotImplementedError

    def _inv_key(self, a):
        raise NotImplementedError

    def _generator_keys(self) -> tuple:
        raise NotImplementedError

    def canonical_word(self, key) -> Optional[tuple]:
        """A generator word for the key, where one is cheaply derivable."""
        return None

    def __eq__(self, other):
        return isinstance(other, GroupHandle) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return "<group %s>" % self.spec

    def element(self, key, word: Optional[tuple] = None) -> Element:
        return Element(self, key, word)

    def identity(self) -> Element:
        return self.element(self._identity_key(), ())

    def generators(self) -> list:
        """Named base generators, in declaration order."""
        return [
            self.element(k, (i + 1,))
            for i, k in enumerate(self._generator_keys())
        ]

    def default_generators(self) -> list:
        """Base generators and their inverses, deduplicated, in stable order."""
        out, seen = [], set()
        for g in self.generators():
            for h in (g, g.inv()):
                if h.key not in seen:
                    seen.add(h.key)
                    out.append(h)
        return out

    def from_word(self, word: Iterable[int]) -> Element:
        """Evaluate a signed-index generator word to an element."""
        gens = self.generators()
        el = self.identity()
        for idx in word:
            if idx == 0 or abs(idx) > len(gens):
                raise GroupError("generator index out of range: %d" % idx)
            g = gens[idx - 1] if idx > 0 else gens[-idx - 1].inv()
            el = el * g
        return el


def make_group(descriptor) -> GroupHandle:
    """Build a group handle from a structured descriptor tuple.

    Accepted forms::

        ("integer_lattice", d)
        ("free_group", k)
        ("heisenberg",)
        ("lamplighter",)
        ("baumslag_solitar", 1, m)        # m >= 2
        ("infinite_dihedral",)
        ("direct_product", G, H)          # handles or descriptors
        ("matrix_group", [matrices], [names]?)
    """
    if isinstance(descriptor, GroupHandle):
        return descriptor
    if not isinstance(descriptor, tuple) or not descriptor:
        raise GroupError("descriptor must be a nonempty tuple")
    tag = descriptor[0]
    if tag == "integer_lattice":
        return IntegerLattice(descriptor[1])
    if tag == "free_group":
        return FreeGroup(descriptor[1])
    if tag == "heisenberg":
        return Heisenberg()
    if tag == "lamplighter":
        return Lamplighter()
    if tag == "baumslag_solitar":
        if len(descriptor) != 3 or descriptor[1] != 1:
            raise GroupError("only BS(1,m) is supported")
        return BaumslagSolitar(descriptor[2])
    if tag == "infinite_dihedral":
        return infinite_dihedral()
    if tag == "direct_product":
        return DirectProduct(make_group(descriptor[1]), make_group(descriptor[2]))
    if tag == "matrix_group":
        names = descriptor[2] if len(descriptor) > 2 else None
        return MatrixGroup(descriptor[1], names=names)
    raise GroupError("unknown group descriptor: %r" % (tag,))


def multiply(G: GroupHandle, a: Element, b: Element) -> Element:
    if a.group != G or b.group != G:
        raise GroupError("element/group mismatch in multiply")
    return G.element(G._mul_keys(a.key, b.key), _cat_words(a.word, b.word))


def inverse(G: GroupHandle, a: Element) -> Element:
    if a.group != G:
        raise GroupError("element/group mismatch in inverse")
    return G.element(G._inv_key(a.key), _inv_word(a.word))


# ---------------------------------------------------------------------------
# Catalog groups


class IntegerLattice(GroupHandle):
    """Z^d with componentwise addition; keys are integer tuples."""

    def __init__(self, d: int):
        if not isinstance(d, int) or d < 1:
            raise GroupError("lattice rank must be a positive integer")
        self.d = d
        self.spec = "Z" if d == 1 else "Z^%d" % d
        if d == 1:
            self.generator_names = ("x",)
        elif d == 2:
            self.generator_names = ("x", "y")
        elif d == 3:
            self.generator_names = ("x", "y", "z")
        else:
            self.generator_names = tuple("x%d" % (i + 1) for i in range(d))

    def _identity_key(self):
        return (0,) * self.d

    def _mul_keys(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _inv_key(self, a):
        return tuple(-x for x in a)

    def _generator_keys(self):
        return tuple(
            tuple(1 if j == i else 0 for j in range(self.d)) for i in range(self.d)
        )

    def canonical_word(self, key):
        word = []
        for i, c in enumerate(key):
            word.extend([(i + 1) if c > 0 else -(i + 1)] * abs(c))
        return tuple(word)


class FreeGroup(GroupHandle):
    """F_k; keys are freely reduced words as tuples of signed letters."""

    def __init__(self, k: int):
        if not isinstance(k, int) or k < 1:
            raise GroupError("free rank must be a positive integer")
        self.k = k
        self.spec = "F%d" % k
        if k <= 4:
            self.generator_names = tuple("abcd"[:k])
        else:
            self.generator_names = tuple("a%d" % (i + 1) for i in range(k))

    def _identity_key(self):
        return ()

    def _mul_keys(self, a, b):
        out = list(a)
        for letter in b:
            if out and out[-1] == -letter:
                out.pop()
            else:
                out.append(letter)
        return tuple(out)

    def _inv_key(self, a):
        return tuple(-x for x in reversed(a))

    def _generator_keys(self):
        return tuple((i + 1,) for i in range(self.k))

    def canonical_word(self, key):
        return tuple(key)


class Heisenberg(GroupHandle):
    """Upper unitriangular 3x3 integer matrices, as triples (p, q, r).

    (p,q,r) stands for the matrix with first row (1,p,r) and second (0,1,q);
    multiplication is (p,q,r)(p',q',r') = (p+p', q+q', r+r'+p*q').
    """

    def __init__(self):
        self.spec = "H3"
        self.generator_names = ("x", "y")

    def _identity_key(self):
        return (0, 0, 0)

    def _mul_keys(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def _inv_key(self, a):
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def _generator_keys(self):
        return ((1, 0, 0), (0, 1, 0))

    def canonical_word(self, key):
        # x^p y^q (x y x^-1 y^-1)^s with s = r - p q
        p, q, r = key
        word = [1 if p > 0 else -1] * abs(p) + [2 if q > 0 else -2] * abs(q)
        s = r - p * q
        commutator = (1, 2, -1, -2) if s > 0 else (2, 1, -2, -1)
        word.extend(commutator * abs(s))
        return tuple(word)


class Lamplighter(GroupHandle):
    """Z/2 wr Z; keys are (sorted tuple of lit lamp positions, cursor).

    Generators: t moves the cursor by +1, a toggles the lamp at the cursor.
    a is an involution, so the default generating set is {t, t^-1, a}.
    """

    def __init__(self):
        self.spec = "LL"
        self.generator_names = ("t", "a")

    def _identity_key(self):
        return ((), 0)

    def _mul_keys(self, a, b):
        lamps1, k1 = a
        lamps2, k2 = b
        lamps = set(lamps1)
        for p in lamps2:
            q = p + k1
            if q in lamps:
                lamps.remove(q)
            else:
                lamps.add(q)
        return (tuple(sorted(lamps)), k1 + k2)

    def _inv_key(self, a):
        lamps, k = a
        return (tuple(sorted(p - k for p in lamps)), -k)

    def _generator_keys(self):
        return (((), 1), ((0,), 0))

    def canonical_word(self, key):
        # t^p a t^-p toggles the lamp at p; finish with the cursor move
        lamps, k = key
        word = []
        for p in lamps:
            word.extend([1] * p if p > 0 else [-1] * (-p))
            word.append(2)
            word.extend([-1] * p if p > 0 else [1] * (-p))
        word.extend([1] * k if k > 0 else [-1] * (-k))
        return tuple(word)


class BaumslagSolitar(GroupHandle):
    """BS(1,m) as affine maps x -> m^k x + c with c an m-adic rational.

    Keys are pairs (k, c); the generator a is x -> m x and b is x -> x + 1.
    Composition (left factor outermost) gives
    (k1,c1)*(k2,c2) = (k1+k2, c1 + m^k1 * c2).
    """

    def __init__(self, m: int):
        if not isinstance(m, int) or m < 2:
            raise GroupError("baumslag_solitar requires m >= 2")
        self.m = m
        self.spec = "BS1_%d" % m
        self.generator_names = ("a", "b")

    def _identity_key(self):
        return (0, Fraction(0))

    def _mul_keys(self, a, b):
        k1, c1 = a
        k2, c2 = b
        return (k1 + k2, c1 + Fraction(self.m) ** k1 * c2)

    def _inv_key(self, a):
        k, c = a
        return (-k, -c * Fraction(self.m) ** (-k))

    def _generator_keys(self):
        return ((1, Fraction(0)), (0, Fraction(1)))

    def canonical_word(self, key):
        # a^-j b^(c m^j) a^(k+j) where m^j clears the denominator of c
        k, c = key
        j = 0
        den = c.denominator
        while den > 1:
            den, rem = divmod(den, self.m)
            if rem:
                return None
            j += 1
        shift = int(c * self.m**j)
        word = [-1] * j
        word.extend([2] * shift if shift > 0 else [-2] * (-shift))
        power = k + j
        word.extend([1] * power if power > 0 else [-1] * (-power))
        return tuple(word)

    def apply(self, el: Element, x: Fraction) -> Fraction:
        """Evaluate the affine map of ``el`` at ``x`` (oracle for tests)."""
        k, c = el.key
        return Fraction(self.m) ** k * x + c


def _as_fraction_matrix(rows) -> tuple:
    mat = tuple(tuple(Fraction(v) for v in row) for row in rows)
    n = len(mat)
    if n == 0 or any(len(row) != n for row in mat):
        raise GroupError("matrix generators must be square")
    return mat


def _mat_mul(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def _mat_inv(a):
    n = len(a)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise GroupError("singular matrix generator")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def _mat_str(mat) -> str:
    return "[" + ";".join(",".join(_key_str(v) for v in row) for row in mat) + "]"


class MatrixGroup(GroupHandle):
    """Group generated by invertible rational matrices; equality is matrix equality.

    There is no word-problem guarantee here: ball enumeration is total only
    because of the element-count cap.
    """

    def __init__(self, matrices: Sequence, names: Optional[Sequence[str]] = None,
                 spec: Optional[str] = None):
        if not matrices:
            raise GroupError("matrix_group needs at least one generator")
        self.matrices = tuple(_as_fraction_matrix(m) for m in matrices)
        self.n = len(self.matrices[0])
        if any(len(m) != self.n for m in self.matrices):
            raise GroupError("matrix generators must share one size")
        for m in self.matrices:
            _mat_inv(m)  # raises on singular input
        if names is None:
            names = tuple("m%d" % (i + 1) for i in range(len(self.matrices)))
        self.generator_names = tuple(names)
        if len(self.generator_names) != len(self.matrices):
            raise GroupError("one name per matrix generator required")
        self.spec = spec or ("mat:" + "".join(_mat_str(m) for m in self.matrices))

    def _identity_key(self):
        return tuple(
            tuple(Fraction(int(i == j)) for j in range(self.n)) for i in range(self.n)
        )

    def _mul_keys(self, a, b):
        return _mat_mul(a, b)

    def _inv_key(self, a):
        return _mat_inv(a)

    def _generator_keys(self):
        return self.matrices


def infinite_dihedral() -> MatrixGroup:
    """The infinite dihedral group, realized by its two standard rational matrices."""
    a = ((Fraction(2), Fraction(0)), (Fraction(0), Fraction(1, 2)))
    b = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
    return MatrixGroup([a, b], names=("a", "b"), spec="Dinf")


class DirectProduct(GroupHandle):
    """G x H with componentwise operations; keys are key pairs."""

    def __init__(self, left: GroupHandle, right: GroupHandle):
        self.left = left
        self.right = right
        self.spec = "prod(%s,%s)" % (left.spec, right.spec)
        self.generator_names = tuple("%s.1" % n for n in left.generator_names) + tuple(
            "%s.2" % n for n in right.generator_names
        )

    def _identity_key(self):
        return (self.left._identity_key(), self.right._identity_key())

    def _mul_keys(self, a, b):
        return (self.left._mul_keys(a[0], b[0]), self.right._mul_keys(a[1], b[1]))

    def _inv_key(self, a):
        return (self.left._inv_key(a[0]), self.right._inv_key(a[1]))

    def _generator_keys(self):
        er = self.right._identity_key()
        el = self.left._identity_key()
        return tuple((k, er) for k in self.left._generator_keys()) + tuple(
            (el, k) for k in self.right._generator_keys()
        )

    def canonical_word(self, key):
        w1 = self.left.canonical_word(key[0])
        w2 = self.right.canonical_word(key[1])
        if w1 is None or w2 is None:
            return None
        off = len(self.left.generator_names)
        return w1 + tuple((i + off) if i > 0 else (i - off) for i in w2)

    def pair(self, a: Element, b: Element) -> Element:
        if a.group != self.left or b.group != self.right:
            raise GroupError("factor mismatch in pair")
        word = None
        if a.word is not None and b.word is not None:
            off = len(self.left.generator_names)
            word = a.word + tuple(
                (i + off) if i > 0 else (i - off) for i in b.word
            )
        return self.element((a.key, b.key), word)


# ---------------------------------------------------------------------------
# Balls and growth


@dataclass
class BallTable:
    """Word-metric ball over a symmetrized generating set.

    ``layers[n]`` is the sphere of radius n, sorted by canonical key;
    ``lengths`` maps element keys to word lengths.
    """

    group: GroupHandle
    generating_set: list
    radius: int
    layers: list
    lengths: dict

    @property
    def size(self) -> int:
        return len(self.lengths)

    def elements(self) -> Iterator[Element]:
        for layer in self.layers:
            yield from layer

    def __contains__(self, el: Element) -> bool:
        return el.key in self.lengths

    def length(self, el: Element) -> int:
        return self.lengths[el.key]

    def layer_sizes(self) -> list:
        return [len(layer) for layer in self.layers]

    def ball_sizes(self) -> list:
        """Cumulative sizes |B_0|, ..., |B_radius|."""
        out, total = [], 0
        for layer in self.layers:
            total += len(layer)
            out.append(total)
        return out


def symmetrize(S: Sequence[Element]) -> list:
    """S united with its inverses, deduplicated, in stable order."""
    out, seen = [], set()
    for g in S:
        for h in (g, g.inv()):
            if h.key not in seen:
                seen.add(h.key)
                out.append(h)
    return out


def ball(G: GroupHandle, S: Sequence[Element], n: int, cap: Optional[int] = None) -> BallTable:
    """Breadth-first ball of radius n over S union S^-1.

    Raises :class:`BallCapExceeded` (carrying the completed layers) if the
    element count would exceed the cap.
    """
    if not S:
        raise GroupError("generating set must be nonempty")
    if n < 0:
        raise GroupError("radius must be nonnegative")
    for g in S:
        if g.group != G:
            raise GroupError("element/group mismatch in ball")
    cap = ball_cap(cap)
    directions = symmetrize(S)
    lengths = {G._identity_key(): 0}
    layers = [[G.identity()]]
    frontier = [G.identity()]
    for depth in range(1, n + 1):
        nxt = {}
        for g in frontier:
            for s in directions:
                h = g * s
                if h.key not in lengths and h.key not in nxt:
                    nxt[h.key] = h
        if len(lengths) + len(nxt) > cap:
            partial = BallTable(G, list(S), depth - 1, layers, lengths)
            raise BallCapExceeded(
                "ball cap %d exceeded at radius %d" % (cap, depth), partial
            )
        layer = sorted(nxt.values(), key=lambda e: e.key)
        for h in layer:
            lengths[h.key] = depth
        layers.append(layer)
        frontier = layer
    return BallTable(G, list(S), n, layers, lengths)


@dataclass
class GrowthReport:
    """Ball sizes, successive ratios, and a heuristic growth label.

    The label is an estimator only; it proves nothing about the group.
    """

    group_spec: str
    sizes: list
    ratios: list
    label: str
    truncated: bool


def growth_report(G: GroupHandle, S: Sequence[Element], N: int,
                  cap: Optional[int] = None) -> GrowthReport:
    """Sizes |B_0|..|B_N|, exact ratios, and a trend label.

    Label rule: polynomial-like if the last three ratios are all
    <= 1 + 4/N, exponential-like if all >= 5/4, else inconclusive.
    On a cap hit the partial sequence is reported with label inconclusive.
    """
    if N < 2:
        raise GroupError("growth_report requires N >= 2")
    truncated = False
    try:
        table = ball(G, S, N, cap)
    except BallCapExceeded as exc:
        table = exc.partial
        truncated = True
    sizes = table.ball_sizes()
    ratios = [Fraction(sizes[i + 1], sizes[i]) for i in range(len(sizes) - 1)]
    if truncated or len(ratios) < 3:
        label = "inconclusive"
    else:
        tail = ratios[-3:]
        if all(r <= 1 + Fraction(4, N) for r in tail):
            label = "polynomial-like"
        elif all(r >= Fraction(5, 4) for r in tail):
            label = "exponential-like"
        else:
            label = "inconclusive"
    return GrowthReport(G.spec, sizes, ratios, label, truncated)


def power_counts(G: GroupHandle, S: Sequence[Element], N: int,
                 cap: Optional[int] = None) -> list:
    """|S^0|, |S^1|, ..., |S^N| for the (non-symmetrized) product sets."""
    cap = ball_cap(cap)
    counts = [1]
    current = {G._identity_key(): G.identity()}
    for _ in range(N):
        nxt = {}
        for g in current.values():
            for s in S:
                h = g * s
                nxt.setdefault(h.key, h)
                if len(nxt) > cap:
                    raise BallCapExceeded("power-set cap %d exceeded" % cap)
        current = nxt
        counts.append(len(current))
    return counts
