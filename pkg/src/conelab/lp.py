"""Deterministic exact-rational linear programming.

A dense-free (sparse-row) primal simplex with Bland's anti-cycling rule over
exact rationals.  Every outcome ships with a certificate that is checked
before being returned: optimal solutions carry a dual vector with bit-exact
strong duality, infeasible problems carry a Farkas vector, unbounded
problems carry a feasible point and an improving ray.

Internally gmpy2.mpq is used when available (it is several times faster
than fractions.Fraction); the public surface speaks fractions.Fraction.

Farkas convention: the vector assigns a multiplier to every constraint,
nonnegative for inequality rows, free for equality rows.  Orienting each
``<=`` row as its negation, the combined inequality  sum_i F_i (a_i x) >=
sum_i F_i b_i  must hold for every feasible x while the supremum of the
left side over the variable bounds stays strictly below the right side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

try:  # fast exact rationals
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction

_ZERO = _Q(0)
_ONE = _Q(1)

LE, EQ, GE = "<=", "=", ">="
_RELS = (LE, EQ, GE)

MAX_PIVOTS = 200_000


class LpError(ValueError):
    """Malformed problem data."""


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


@dataclass
class LpProblem:
    """opt c.x subject to rows (a, rel, b) and per-variable bounds.

    ``bounds[j]`` is a (lower, upper) pair, each a rational or None; the
    default is (0, None) for every variable.
    """

    n: int
    objective: Sequence
    sense: str = "min"
    rows: list = field(default_factory=list)
    bounds: Optional[list] = None

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise LpError("sense must be 'min' or 'max'")
        if len(self.objective) != self.n:
            raise LpError("objective length mismatch")
        self.objective = [Fraction(c) for c in self.objective]
        for coeffs, rel, rhs in self.rows:
            if len(coeffs) != self.n:
                raise LpError("constraint row length mismatch")
            if rel not in _RELS:
                raise LpError("relation must be one of <=, =, >=")
        self.rows = [
            ([Fraction(a) for a in coeffs], rel, Fraction(rhs))
            for coeffs, rel, rhs in self.rows
        ]
        if self.bounds is None:
            self.bounds = [(Fraction(0), None)] * self.n
        if len(self.bounds) != self.n:
            raise LpError("bounds length mismatch")
        self.bounds = [
            (None if lo is None else Fraction(lo), None if hi is None else Fraction(hi))
            for lo, hi in self.bounds
        ]


@dataclass
class LpOutcome:
    """Exact LP result with its certificate.

    status 'optimal': x primal, y dual (per row), value = c.x = dual value.
    status 'infeasible': farkas vector per row (see module docstring).
    status 'unbounded': x feasible, ray improves the objective forever.
    """

    status: str
    x: Optional[list] = None
    y: Optional[list] = None
    value: Optional[Fraction] = None
    farkas: Optional[list] = None
    ray: Optional[list] = None
    pivots: int = 0


# ---------------------------------------------------------------------------
# Certificate checks (used by the solver itself and by tests)


def primal_feasible(p: LpProblem, x: Sequence) -> bool:
    for (coeffs, rel, rhs) in p.rows:
        v = sum((a * xi for a, xi in zip(coeffs, x)), Fraction(0))
        if rel == LE and v > rhs:
            return False
        if rel == GE and v < rhs:
            return False
        if rel == EQ and v != rhs:
            return False
    for xi, (lo, hi) in zip(x, p.bounds):
        if lo is not None and xi < lo:
            return False
        if hi is not None and xi > hi:
            return False
    return True


def dual_objective(p: LpProblem, y: Sequence) -> Optional[Fraction]:
    """Value of the bound-folded dual at y, or None if y is dual-infeasible.

    For min problems y must be <=0 on <= rows and >=0 on >= rows (reversed
    for max); reduced costs d_j = c_j - y.A_j are charged to whichever
    variable bound makes the Lagrangian finite.
    """
    sign = 1 if p.sense == "min" else -1
    total = Fraction(0)
    for yi, (coeffs, rel, rhs) in zip(y, p.rows):
        if rel == LE and sign * yi > 0:
            return None
        if rel == GE and sign * yi < 0:
            return None
        total += yi * rhs
    for j in range(p.n):
        d = p.objective[j] - sum(
            (yi * row[0][j] for yi, row in zip(y, p.rows)), Fraction(0)
        )
        lo, hi = p.bounds[j]
        if d == 0:
            continue
        if p.sense == "min":
            # contribute min d*x over [lo, hi]
            if d > 0:
                if lo is None:
                    return None
                total += d * lo
            else:
                if hi is None:
                    return None
                total += d * hi
        else:
            if d > 0:
                if hi is None:
                    return None
                total += d * hi
            else:
                if lo is None:
                    return None
                total += d * lo
    return total


def check_optimal(p: LpProblem, out: LpOutcome) -> bool:
    if out.status != "optimal" or out.x is None or out.y is None:
        return False
    if not primal_feasible(p, out.x):
        return False
    value = sum((c * xi for c, xi in zip(p.objective, out.x)), Fraction(0))
    if value != out.value:
        return False
    return dual_objective(p, out.y) == value


def check_farkas(p: LpProblem, farkas: Sequence) -> bool:
    """Exact infeasibility certificate check (box-sup rule)."""
    for lo, hi in p.bounds:
        if lo is not None and hi is not None and lo > hi:
            return True  # contradictory bounds are trivially infeasible
    combined = [Fraction(0)] * p.n
    rhs_total = Fraction(0)
    for fi, (coeffs, rel, rhs) in zip(farkas, p.rows):
        if rel in (LE, GE) and fi < 0:
            return False
        mult = -fi if rel == LE else fi  # orient <= rows as >=
        for j, a in enumerate(coeffs):
            combined[j] += mult * a
        rhs_total += mult * rhs
    sup = Fraction(0)
    for rj, (lo, hi) in zip(combined, p.bounds):
        if rj > 0:
            if hi is None:
                return False
            sup += rj * hi
        elif rj < 0:
            if lo is None:
                return False
            sup += rj * lo
    return sup < rhs_total


def check_ray(p: LpProblem, out: LpOutcome) -> bool:
    if out.status != "unbounded" or out.x is None or out.ray is None:
        return False
    if not primal_feasible(p, out.x):
        return False
    r = out.ray
    for (coeffs, rel, rhs) in p.rows:
        v = sum((a * ri for a, ri in zip(coeffs, r)), Fraction(0))
        if rel == LE and v > 0:
            return False
        if rel == GE and v < 0:
            return False
        if rel == EQ and v != 0:
            return False
    for ri, (lo, hi) in zip(r, p.bounds):
        if ri < 0 and lo is not None:
            return False
        if ri > 0 and hi is not None:
            return False
    gain = sum((c * ri for c, ri in zip(p.objective, r)), Fraction(0))
    return gain < 0 if p.sense == "min" else gain > 0


# ---------------------------------------------------------------------------
# Simplex


class _Tableau:
    """Sparse-row simplex tableau for min c.x, A x = b, x >= 0, b >= 0."""

    def __init__(self, nrows):
        self.rows = [dict() for _ in range(nrows)]  # col -> mpq
        self.rhs = [_ZERO] * nrows
        self.basis = [None] * nrows
        self.ncols = 0
        self.pivots = 0

    def add_col(self):
        self.ncols += 1
        return self.ncols - 1

    def pivot(self, r, c):
        prow = self.rows[r]
        piv = prow[c]
        if piv != _ONE:
            inv = _ONE / piv
            for k in list(prow):
                prow[k] *= inv
            self.rhs[r] *= inv
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(c)
            if f is None or f == 0:
                continue
            for k, v in prow.items():
                nv = row.get(k, _ZERO) - f * v
                if nv == 0:
                    row.pop(k, None)
                else:
                    row[k] = nv
            self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c
        self.pivots += 1

    def reduce_cost_row(self, cost):
        """Reduced-cost dict and -(objective value) for the current basis."""
        erow = {j: q for j, q in cost.items() if q != 0}
        erhs = _ZERO
        for r, b in enumerate(self.basis):
            f = erow.get(b)
            if f is None or f == 0:
                continue
            for k, v in self.rows[r].items():
                nv = erow.get(k, _ZERO) - f * v
                if nv == 0:
                    erow.pop(k, None)
                else:
                    erow[k] = nv
            erhs -= f * self.rhs[r]
        return erow, erhs

    def update_cost(self, erow, erhs, r):
        prow = self.rows[r]
        c = self.basis[r]
        f = erow.get(c)
        if f is None or f == 0:
            return erhs
        for k, v in prow.items():
            nv = erow.get(k, _ZERO) - f * v
            if nv == 0:
                erow.pop(k, None)
            else:
                erow[k] = nv
        return erhs - f * self.rhs[r]


def _simplex(tab: _Tableau, cost: dict, enterable, artificial_basics: set):
    """Run Bland's rule to optimality or unboundedness.

    Returns (erow, erhs, unbounded_col).  Rows whose basic variable is an
    artificial at level zero are forced pivot targets so that artificials
    can never take a positive value again.
    """
    erow, erhs = tab.reduce_cost_row(cost)
    while True:
        if tab.pivots > MAX_PIVOTS:
            raise LpError("pivot limit exceeded; anti-cycling rule failed")
        entering = None
        for j, d in erow.items():
            if d < 0 and j in enterable and (entering is None or j < entering):
                entering = j
        if entering is None:
            return erow, erhs, None
        # forced exit of zero-level artificials first
        forced = None
        for r, b in enumerate(tab.basis):
            if b in artificial_basics and tab.rows[r].get(entering, _ZERO) != 0:
                if forced is None or b < tab.basis[forced]:
                    forced = r
        if forced is not None:
            leave = forced
        else:
            leave = None
            best = None
            for r, row in enumerate(tab.rows):
                a = row.get(entering, _ZERO)
                if a > 0:
                    ratio = tab.rhs[r] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and tab.basis[r] < tab.basis[leave])
                    ):
                        best = ratio
                        leave = r
            if leave is None:
                return erow, erhs, entering
        old = tab.basis[leave]
        tab.pivot(leave, entering)
        artificial_basics.discard(old)
        erhs = tab.update_cost(erow, erhs, leave)


@dataclass
class _VarMap:
    kind: str  # "shift" | "mirror" | "split"
    col: int
    aux_col: Optional[int] = None
    offset: Fraction = Fraction(0)


def solve(p: LpProblem) -> LpOutcome:
    """Solve exactly; deterministic for identical inputs.

    The returned outcome always passes the matching check_* helper; this is
    asserted before returning.
    """
    for lo, hi in p.bounds:
        if lo is not None and hi is not None and lo > hi:
            out = LpOutcome(status="infeasible", farkas=[Fraction(0)] * len(p.rows))
            assert check_farkas(p, out.farkas)
            return out

    minimize = p.sense == "min"
    obj = [(_Q(c) if minimize else -_Q(c)) for c in p.objective]

    # --- variable transformation to x' >= 0
    nrows0 = len(p.rows)
    extra_rows = []  # (var index, upper residual) for two-sided bounds
    varmaps = []
    col_count = 0
    for j, (lo, hi) in enumerate(p.bounds):
        if lo is not None:
            vm = _VarMap("shift", col_count, offset=lo)
            col_count += 1
            if hi is not None:
                extra_rows.append((j, hi - lo))
        elif hi is not None:
            vm = _VarMap("mirror", col_count, offset=hi)
            col_count += 1
        else:
            vm = _VarMap("split", col_count, aux_col=col_count + 1)
            col_count += 2
        varmaps.append(vm)

    m = nrows0 + len(extra_rows)
    tab = _Tableau(m)
    tab.ncols = col_count
    cost2 = {}

    def add_entry(r, col, q):
        if q != 0:
            tab.rows[r][col] = tab.rows[r].get(col, _ZERO) + q

    rhs = [_ZERO] * m
    for i, (coeffs, rel, b) in enumerate(p.rows):
        acc = _Q(b)
        for j, a in enumerate(coeffs):
            if a == 0:
                continue
            a = _Q(a)
            vm = varmaps[j]
            if vm.kind == "shift":
                add_entry(i, vm.col, a)
                acc -= a * _Q(vm.offset)
            elif vm.kind == "mirror":
                add_entry(i, vm.col, -a)
                acc -= a * _Q(vm.offset)
            else:
                add_entry(i, vm.col, a)
                add_entry(i, vm.aux_col, -a)
        rhs[i] = acc
    for r, (j, residual) in enumerate(extra_rows):
        add_entry(nrows0 + r, varmaps[j].col, _ONE)
        rhs[nrows0 + r] = _Q(residual)

    for j, c in enumerate(obj):
        if c == 0:
            continue
        vm = varmaps[j]
        if vm.kind == "shift":
            cost2[vm.col] = cost2.get(vm.col, _ZERO) + _Q(c)
        elif vm.kind == "mirror":
            cost2[vm.col] = cost2.get(vm.col, _ZERO) - _Q(c)
        else:
            cost2[vm.col] = cost2.get(vm.col, _ZERO) + _Q(c)
            cost2[vm.aux_col] = cost2.get(vm.aux_col, _ZERO) - _Q(c)

    # --- slacks, row orientation, and the initial identity footprint
    rels = [rel for (_, rel, _) in p.rows] + [LE] * len(extra_rows)
    sigma = [1] * m
    slack_col = {}
    for i in range(m):
        if rels[i] == LE:
            slack_col[i] = tab.add_col()
            add_entry(i, slack_col[i], _ONE)
        elif rels[i] == GE:
            slack_col[i] = tab.add_col()
            add_entry(i, slack_col[i], -_ONE)
        tab.rhs[i] = rhs[i]
        if tab.rhs[i] < 0:
            sigma[i] = -1
            tab.rhs[i] = -tab.rhs[i]
            tab.rows[i] = {k: -v for k, v in tab.rows[i].items()}

    identity_col = {}
    artificials = set()
    cost1 = {}
    for i in range(m):
        sc = slack_col.get(i)
        if sc is not None and tab.rows[i].get(sc, _ZERO) == _ONE:
            identity_col[i] = (sc, _ZERO)
            tab.basis[i] = sc
        else:
            ac = tab.add_col()
            add_entry(i, ac, _ONE)
            artificials.add(ac)
            identity_col[i] = (ac, _ONE)
            cost1[ac] = _ONE
            tab.basis[i] = ac

    structural = set(range(tab.ncols)) - artificials

    # --- phase 1
    erow, erhs, unb = _simplex(tab, cost1, structural, set())
    assert unb is None  # phase-1 objective is bounded below by zero
    phase1_value = -erhs
    if phase1_value > 0:
        y = []
        for i in range(m):
            col, c_init = identity_col[i]
            d = erow.get(col, _ZERO)
            y.append(sigma[i] * (c_init - d))
        farkas = []
        for i, rel in enumerate(rels[:nrows0]):
            fi = -y[i] if rel == LE else y[i]
            farkas.append(_frac(fi))
        # normalize: first nonzero scaled to +-1, lowest terms
        scale = next((abs(f) for f in farkas if f != 0), None)
        if scale:
            farkas = [f / scale for f in farkas]
        out = LpOutcome(status="infeasible", farkas=farkas, pivots=tab.pivots)
        assert check_farkas(p, out.farkas), "internal error: bad Farkas certificate"
        return out

    # --- phase 2
    art_basics = {b for b in tab.basis if b in artificials}
    erow, erhs, unb = _simplex(tab, cost2, structural, art_basics)

    def recover_x():
        vals = {}
        for r, b in enumerate(tab.basis):
            vals[b] = tab.rhs[r]
        x = []
        for j, vm in enumerate(varmaps):
            t = vals.get(vm.col, _ZERO)
            if vm.kind == "shift":
                x.append(_frac(t) + p.bounds[j][0])
            elif vm.kind == "mirror":
                x.append(p.bounds[j][1] - _frac(t))
            else:
                x.append(_frac(t) - _frac(vals.get(vm.aux_col, _ZERO)))
        return x

    if unb is not None:
        x = recover_x()
        direction = {unb: _ONE}
        for r, b in enumerate(tab.basis):
            a = tab.rows[r].get(unb, _ZERO)
            if a != 0:
                direction[b] = -a
        ray = []
        for vm in varmaps:
            t = direction.get(vm.col, _ZERO)
            if vm.kind == "shift":
                ray.append(_frac(t))
            elif vm.kind == "mirror":
                ray.append(-_frac(t))
            else:
                ray.append(_frac(t) - _frac(direction.get(vm.aux_col, _ZERO)))
        out = LpOutcome(status="unbounded", x=x, ray=ray, pivots=tab.pivots)
        assert check_ray(p, out), "internal error: bad unboundedness ray"
        return out

    x = recover_x()
    value = sum((c * xi for c, xi in zip(p.objective, x)), Fraction(0))
    y = []
    for i in range(nrows0):
        col, _ = identity_col[i]
        d = erow.get(col, _ZERO)
        yi = _frac(sigma[i] * (-d))
        y.append(yi if minimize else -yi)
    out = LpOutcome(status="optimal", x=x, y=y, value=value, pivots=tab.pivots)
    assert check_optimal(p, out), "internal error: strong duality failed"
    return out


# ---------------------------------------------------------------------------
# Debug dump (line-oriented, p/q rationals)


def _fstr(q) -> str:
    q = Fraction(q)
    return "%d/%d" % (q.numerator, q.denominator)


def dump_problem(p: LpProblem) -> str:
    lines = ["lp %s %d vars %d rows" % (p.sense, p.n, len(p.rows))]
    lines.append("obj " + " ".join(_fstr(c) for c in p.objective))
    for coeffs, rel, rhs in p.rows:
        lines.append(
            "row " + " ".join(_fstr(a) for a in coeffs) + " %s %s" % (rel, _fstr(rhs))
        )
    for lo, hi in p.bounds:
        lines.append(
            "bnd %s %s"
            % ("-" if lo is None else _fstr(lo), "-" if hi is None else _fstr(hi))
        )
    return "\n".join(lines) + "\n"


def dump_outcome(out: LpOutcome) -> str:
    lines = ["status %s pivots %d" % (out.status, out.pivots)]
    if out.value is not None:
        lines.append("value " + _fstr(out.value))
    for name in ("x", "y", "farkas", "ray"):
        vec = getattr(out, name)
        if vec is not None:
            lines.append(name + " " + " ".join(_fstr(v) for v in vec))
    return "\n".join(lines) + "\n"
