"""Parsers for the group / element / test-function / embedding
mini-languages used by the CLI and by certificate files.

Grammar summary::

    group:      Z | Z^d | F<k> | H3 | LL | BS1_<m> | Dinf
                | prod(<group>,<group>) | mat:[r;r][r;r]... | <config name>
    element:    e | name | name^k | word*word*...
    function:   const:<q> | half:Z^d:<v1,..,vd> | ball:<R>[:<words>]
                | subgroup:<emb> | semigroup:<a>,<b> | zext:<emb>:<function>
                | custom:<name>
    embedding:  id | factor:left | factor:right | lat:<r11,..;r21,..>

Rationals are written p/q (plain integers also accepted on input).
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional

from conelab.groups import (
    BaumslagSolitar,
    DirectProduct,
    Element,
    FreeGroup,
    GroupError,
    GroupHandle,
    Heisenberg,
    IntegerLattice,
    Lamplighter,
    MatrixGroup,
    infinite_dihedral,
)
from conelab.functions import (
    Embedding,
    FunctionError,
    IdentityEmbedding,
    LatticeEmbedding,
    ProductFactorEmbedding,
    TestFunction,
    ball_indicator,
    constant,
    custom_predicate,
    free_prefix_indicator,
    half_space,
    semigroup_indicator,
    subgroup_indicator,
    zero_extension,
)


class SpecError(ValueError):
    """Unparseable spec string; the message carries the offending text."""


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    m = re.fullmatch(r"(-?\d+)(?:/(\d+))?", text)
    if not m:
        raise SpecError("bad rational %r (expected p or p/q)" % text)
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def format_fraction(q: Fraction) -> str:
    return "%d/%d" % (q.numerator, q.denominator)


# ---------------------------------------------------------------------------
# Groups


def _split_top_level(text: str) -> list:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def _parse_matrices(body: str) -> list:
    mats = []
    for block in re.findall(r"\[([^\[\]]*)\]", body):
        rows = []
        for row in block.split(";"):
            rows.append([parse_fraction(v) for v in row.split(",")])
        mats.append(rows)
    if not mats:
        raise SpecError("no matrices in %r" % body)
    return mats


def parse_group(spec: str, config: Optional[dict] = None) -> GroupHandle:
    spec = spec.strip()
    if spec == "Z":
        return IntegerLattice(1)
    m = re.fullmatch(r"Z\^(\d+)", spec)
    if m:
        return IntegerLattice(int(m.group(1)))
    m = re.fullmatch(r"F(\d+)", spec)
    if m:
        return FreeGroup(int(m.group(1)))
    if spec == "H3":
        return Heisenberg()
    if spec == "LL":
        return Lamplighter()
    if spec == "Dinf":
        return infinite_dihedral()
    m = re.fullmatch(r"BS1_(\d+)", spec)
    if m:
        return BaumslagSolitar(int(m.group(1)))
    if spec.startswith("prod(") and spec.endswith(")"):
        parts = _split_top_level(spec[5:-1])
        if len(parts) != 2:
            raise SpecError("prod() takes exactly two groups: %r" % spec)
        return DirectProduct(parse_group(parts[0], config), parse_group(parts[1], config))
    if spec.startswith("mat:"):
        try:
            return MatrixGroup(_parse_matrices(spec[4:]))
        except GroupError as exc:
            raise SpecError(str(exc)) from exc
    if config and spec in config.get("groups", {}):
        entry = config["groups"][spec]
        if isinstance(entry, str):
            return parse_group(entry, None)
        mats = [
            [[parse_fraction(str(v)) for v in row] for row in mat]
            for mat in entry["matrices"]
        ]
        try:
            return MatrixGroup(mats, names=entry.get("names"))
        except GroupError as exc:
            raise SpecError(str(exc)) from exc
    raise SpecError("unknown group spec %r" % spec)


# ---------------------------------------------------------------------------
# Elements


_TERM = re.compile(r"([A-Za-z][A-Za-z0-9._]*)(?:\^(-?\d+))?$")


def parse_element(G: GroupHandle, text: str) -> Element:
    text = text.strip()
    if not text:
        raise SpecError("empty element word")
    if text == "e":
        return G.identity()
    names = {n: i + 1 for i, n in enumerate(G.generator_names)}
    word = []
    for pos, term in enumerate(text.split("*")):
        m = _TERM.match(term.strip())
        if not m:
            raise SpecError("bad term %r at position %d in %r" % (term, pos, text))
        name, exp = m.group(1), int(m.group(2) or 1)
        if name not in names:
            raise SpecError(
                "unknown generator %r at position %d in %r (available: %s)"
                % (name, pos, text, ", ".join(G.generator_names))
            )
        idx = names[name]
        word.extend([idx if exp > 0 else -idx] * abs(exp))
    return G.from_word(word)


def parse_elements(G: GroupHandle, text: str) -> list:
    return [parse_element(G, part) for part in text.split(",")]


# ---------------------------------------------------------------------------
# Embeddings


def parse_embedding(target: GroupHandle, spec: str) -> Embedding:
    spec = spec.strip()
    if spec == "id":
        return IdentityEmbedding(target)
    if spec in ("factor:left", "factor:right"):
        if not isinstance(target, DirectProduct):
            raise SpecError("factor embedding requires a product group")
        return ProductFactorEmbedding(target, spec.split(":")[1])
    if spec.startswith("lat:"):
        rows = [
            [int(v) for v in row.split(",")] for row in spec[4:].split(";")
        ]
        try:
            emb = LatticeEmbedding(rows)
        except FunctionError as exc:
            raise SpecError(str(exc)) from exc
        if emb.target != target:
            raise SpecError(
                "lattice embedding targets %s, not %s" % (emb.target.spec, target.spec)
            )
        return emb
    raise SpecError("unknown embedding spec %r" % spec)


_EMB_PREFIX = re.compile(r"(id|factor:left|factor:right|lat:[0-9,;\-]+):")


# ---------------------------------------------------------------------------
# Test functions


def parse_test_function(G: GroupHandle, spec: str,
                        config: Optional[dict] = None) -> TestFunction:
    spec = spec.strip()
    try:
        return _parse_tf(G, spec, config)
    except (FunctionError, GroupError) as exc:
        raise SpecError("bad test function %r: %s" % (spec, exc)) from exc


def _parse_tf(G, spec, config):
    if spec.startswith("const:"):
        return constant(G, parse_fraction(spec[6:]))
    if spec.startswith("half:"):
        m = re.fullmatch(r"half:Z(?:\^(\d+))?:(.+)", spec)
        if not m:
            raise SpecError("half-space spec must be half:Z^d:<vector>: %r" % spec)
        d = int(m.group(1) or 1)
        if not isinstance(G, IntegerLattice) or G.d != d:
            raise SpecError("half-space spec %r does not match group %s" % (spec, G.spec))
        return half_space(G, [int(v) for v in m.group(2).split(",")])
    if spec.startswith("ball:"):
        rest = spec[5:]
        if ":" in rest:
            radius, words = rest.split(":", 1)
            S = parse_elements(G, words)
            return ball_indicator(G, int(radius), S)
        return ball_indicator(G, int(rest))
    if spec.startswith("subgroup:"):
        return subgroup_indicator(parse_embedding(G, spec[9:]))
    if spec.startswith("semigroup:"):
        parts = spec[10:].split(",")
        if len(parts) != 2:
            raise SpecError("semigroup spec needs exactly two words: %r" % spec)
        a = parse_element(G, parts[0])
        b = parse_element(G, parts[1])
        return semigroup_indicator(G, a, b)
    if spec.startswith("zext:"):
        m = _EMB_PREFIX.match(spec[5:])
        if not m:
            raise SpecError("zext spec needs an embedding prefix: %r" % spec)
        emb_spec = m.group(1)
        inner_spec = spec[5 + m.end():]
        emb = parse_embedding(G, emb_spec)
        inner = _parse_tf(emb.source, inner_spec, config)
        return zero_extension(inner, emb)
    if spec.startswith("custom:"):
        name = spec[7:]
        if name.startswith("prefix:") and isinstance(G, FreeGroup):
            return free_prefix_indicator(G, name[7:])
        if config and name in config.get("predicates", {}):
            entry = config["predicates"][name]
            keys = {parse_element(G, w).key for w in entry["elements"]}
            value = parse_fraction(str(entry.get("value", "1")))
            return custom_predicate(G, name, lambda x: x.key in keys, value)
        raise SpecError("unknown custom predicate %r" % name)
    raise SpecError("unknown test function spec %r" % spec)
