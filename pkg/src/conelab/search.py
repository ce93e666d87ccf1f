"""LP formulations that find certificates.

* windowed_alternative: the exact Farkas alternative for the membership
  system  sum_x c_x f(s x) = 1 (s in S), c >= 0 supported in a window W.
  Feasibility yields a globally valid witness; infeasibility yields a
  Farkas vector that converts into a window-level translate violation.
* ratio_defect_lp / reiter_defect_lp: minimize the two-sided translate
  defect resp. the Reiter defect over weights supported in W.
* moore_gap: windowed Chebyshev distance from the constant-1 function to
  the span of the differences E - gE over a fixed translate set.
* find_free_pairs: deterministic scan for free sub-semigroup pairs.

Every emitted certificate is re-verified with its own verifier before
being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from conelab.groups import BallTable, Element, GroupHandle, ball
from conelab.functions import QuerySpec, TestFunction, Weight
from conelab.lp import EQ, LE, LpProblem, LpOutcome, dump_outcome, dump_problem, solve
from conelab.certificates import (
    CertificateError,
    FreenessWitness,
    RatioWitness,
    TranslateViolation,
    ReiterWitness,
    canonical_violation,
    free_to_depth,
    verify_certificate,
)


class SearchError(ValueError):
    """Empty window mass, malformed query, or evaluation failure."""


@dataclass
class LpTrace:
    """Summary of the LP behind a search result (dumps on request)."""

    nvars: int
    nrows: int
    status: str
    pivots: int
    problem_dump: Optional[str] = None
    outcome_dump: Optional[str] = None


def _traced(problem: LpProblem, outcome: LpOutcome, keep: bool) -> LpTrace:
    return LpTrace(
        nvars=problem.n,
        nrows=len(problem.rows),
        status=outcome.status,
        pivots=outcome.pivots,
        problem_dump=dump_problem(problem) if keep else None,
        outcome_dump=dump_outcome(outcome) if keep else None,
    )


@dataclass
class AlternativeOutcome:
    """Exactly one branch: a witness (feasible) or a violation (Farkas)."""

    witness: Optional[RatioWitness] = None
    violation: Optional[TranslateViolation] = None
    trace: Optional[LpTrace] = None

    @property
    def branch(self) -> str:
        return "witness" if self.witness is not None else "violation"

    def __post_init__(self):
        if (self.witness is None) == (self.violation is None):
            raise SearchError("exactly one branch must be present")


def _window_elements(f: TestFunction, q: QuerySpec, cap) -> list:
    window = q.window(f.group, cap)
    return list(window.elements())


def windowed_alternative(f: TestFunction, q: QuerySpec, cap: Optional[int] = None,
                         trace: bool = False) -> AlternativeOutcome:
    """Decide the membership system over the window, certificate either way.

    Feasible: returns a RatioWitness with epsilon 0 (two-sided), globally
    valid since every certified sum is finite.  Infeasible: the Farkas
    vector tau (sum_s tau_s f(s x) <= 0 on W, sum tau_s = 1) is first
    canonicalized by minimizing sum_s |tau_s| and then flipped into the
    violation items (-tau_s, s^-1), window-level only.
    """
    xs = _window_elements(f, q, cap)
    S = q.S
    columns = [[f.value(s * x) for s in S] for x in xs]
    rows = [
        ([col[i] for col in columns], EQ, Fraction(1)) for i in range(len(S))
    ]
    problem = LpProblem(n=len(xs), objective=[0] * len(xs), rows=rows)
    out = solve(problem)
    if out.status == "optimal":
        u = Weight(f.group, [(x, v) for x, v in zip(xs, out.x) if v != 0])
        witness = RatioWitness(f, list(S), Fraction(0), u,
                               two_sided=True, window_radius=q.window_radius)
        report = verify_certificate(witness)
        if not report.ok:
            raise SearchError("internal error: witness failed verification")
        return AlternativeOutcome(witness=witness, trace=_traced(problem, out, trace))
    if out.status != "infeasible":
        raise SearchError("membership system cannot be unbounded")

    tau = _canonical_farkas(S, columns)
    items = [(-t, s.inv()) for s, t in zip(S, tau) if t != 0]
    violation = canonical_violation(f, items)
    violation.window_radius = q.window_radius
    report = verify_certificate(violation)
    if not report.ok:
        raise SearchError("internal error: violation failed verification")
    return AlternativeOutcome(violation=violation, trace=_traced(problem, out, trace))


def _canonical_farkas(S, columns) -> list:
    """l1-minimal Farkas vector with sum tau_s = 1 (deterministic vertex)."""
    k = len(S)
    distinct = []
    seen = set()
    for col in columns:
        key = tuple(col)
        if key not in seen:
            seen.add(key)
            distinct.append(col)
    # variables: tau_1..tau_k (free), w_1..w_k >= 0 with w >= |tau|
    n = 2 * k
    rows = []
    for col in distinct:
        rows.append((list(col) + [0] * k, LE, Fraction(0)))
    rows.append(([1] * k + [0] * k, EQ, Fraction(1)))
    for i in range(k):
        pos = [0] * n
        pos[i] = 1
        pos[k + i] = -1
        rows.append((pos, LE, Fraction(0)))
        neg = [0] * n
        neg[i] = -1
        neg[k + i] = -1
        rows.append((neg, LE, Fraction(0)))
    bounds = [(None, None)] * k + [(Fraction(0), None)] * k
    problem = LpProblem(
        n=n, objective=[0] * k + [1] * k, sense="min", rows=rows, bounds=bounds
    )
    out = solve(problem)
    if out.status != "optimal":
        raise SearchError("internal error: Farkas canonicalization failed")
    return [out.x[i] for i in range(k)]


def ratio_defect_lp(f: TestFunction, q: QuerySpec, two_sided: bool = True,
                    cap: Optional[int] = None, trace: bool = False):
    """Minimize the translate defect over normalized weights in the window.

    Two-sided (default): min lambda s.t. |sum_x u(x) f(s x) - 1| <= lambda.
    One-sided (printed ratio form): only the upper inequality.
    Returns (lambda*, u, duals[, trace]); lambda* = 0 iff the windowed
    alternative returns a witness.
    """
    xs = _window_elements(f, q, cap)
    base = [f.value(x) for x in xs]
    if all(v == 0 for v in base):
        raise SearchError("normalization infeasible: f vanishes on the window")
    nx = len(xs)
    rows = [(base + [0], EQ, Fraction(1))]
    for s in q.S[1:]:
        col = [f.value(s * x) for x in xs]
        rows.append((col + [-1], LE, Fraction(1)))
        if two_sided:
            rows.append(([-v for v in col] + [-1], LE, Fraction(-1)))
    problem = LpProblem(n=nx + 1, objective=[0] * nx + [1], rows=rows)
    out = solve(problem)
    if out.status != "optimal":
        raise SearchError("defect LP must have an optimum")
    u = Weight(f.group, [(x, v) for x, v in zip(xs, out.x) if v != 0])
    result = (out.value, u, out.y)
    if trace:
        return result + (_traced(problem, out, True),)
    return result


def reiter_defect_lp(f: TestFunction, q: QuerySpec, cap: Optional[int] = None,
                     trace: bool = False):
    """Minimize the Reiter defect max_s sum_x |u(s^-1 x) - u(x)| f(x) over
    normalized weights supported in the window; exact optimum.

    Constraint rows run over the enlarged window S.W union W restricted to
    the points where f is positive.  Returns (epsilon*, u[, trace]).
    """
    xs = _window_elements(f, q, cap)
    base = [f.value(x) for x in xs]
    if all(v == 0 for v in base):
        raise SearchError("normalization infeasible: f vanishes on the window")
    index = {x.key: i for i, x in enumerate(xs)}
    nx = len(xs)

    # enlarged window: for each s, the points where a difference can be felt
    var_count = nx + 1  # u variables plus lambda
    lam = nx
    z_index = {}
    rows_z = []
    defect_rows = []
    for si, s in enumerate(q.S[1:], start=1):
        enlarged = {}
        for x in xs:
            for y in (x, s * x):
                if y.key not in enlarged:
                    enlarged[y.key] = y
        pts = sorted(enlarged.values(), key=lambda e: e.key)
        coeffs = {}
        for x in pts:
            fx = f.value(x)
            if fx == 0:
                continue
            zcol = var_count
            var_count += 1
            z_index[(si, x.key)] = zcol
            coeffs[zcol] = fx
            # u(s^-1 x) - u(x) bounded by z both ways
            terms = []
            pre = s.inv() * x
            i_pre = index.get(pre.key)
            if i_pre is not None:
                terms.append((i_pre, Fraction(1)))
            i_x = index.get(x.key)
            if i_x is not None:
                terms.append((i_x, Fraction(-1)))
            rows_z.append((terms, zcol))
        defect_rows.append(coeffs)

    rows = []
    n = var_count
    rows.append((base + [0] * (n - nx), EQ, Fraction(1)))
    for terms, zcol in rows_z:
        row = [Fraction(0)] * n
        for i, c in terms:
            row[i] = c
        row[zcol] = Fraction(-1)
        rows.append((row, LE, Fraction(0)))
        row2 = [Fraction(0)] * n
        for i, c in terms:
            row2[i] = -c
        row2[zcol] = Fraction(-1)
        rows.append((row2, LE, Fraction(0)))
    for coeffs in defect_rows:
        row = [Fraction(0)] * n
        for col, fx in coeffs.items():
            row[col] = fx
        row[lam] = Fraction(-1)
        rows.append((row, LE, Fraction(0)))
    problem = LpProblem(n=n, objective=[0] * lam + [1] + [0] * (n - lam - 1), rows=rows)
    out = solve(problem)
    if out.status != "optimal":
        raise SearchError("defect LP must have an optimum")
    u = Weight(f.group, [(x, v) for x, v in zip(xs, out.x[:nx]) if v != 0])
    if trace:
        return out.value, u, _traced(problem, out, True)
    return out.value, u


def moore_gap(E: TestFunction, T: Sequence[Element], window: BallTable,
              trace: bool = False):
    """Windowed Chebyshev distance from 1 to span{E - gE : g in T}.

    minimize_t max_{x in W} |1 - sum_g t_g (E(x) - E(g^-1 x))|, solved via
    the row-light dual; the returned optimum is re-certified by direct
    evaluation of the recovered coefficient vector.  Returns
    (value, {g: t_g}[, trace]).
    """
    xs = list(window.elements())
    for x in xs:
        if E.value(x) not in (0, 1):
            raise SearchError("moore_gap requires a 0/1-valued function")
    diffs = []
    for g in T:
        ginv = g.inv()
        diffs.append([E.value(x) - E.value(ginv * x) for x in xs])
    # dual: max sum (p - q) s.t. sum (p+q) = 1, sum (p-q) d_g = 0, p,q >= 0
    nx = len(xs)
    n = 2 * nx
    rows = []
    for dg in diffs:
        rows.append((dg + [-v for v in dg], EQ, Fraction(0)))
    rows.append(([1] * n, EQ, Fraction(1)))
    objective = [1] * nx + [-1] * nx
    problem = LpProblem(n=n, objective=objective, sense="max", rows=rows)
    out = solve(problem)
    if out.status != "optimal":
        raise SearchError("moore probe LP must have an optimum")
    value = out.value

    def recompute(ts):
        worst = Fraction(0)
        for i in range(nx):
            v = Fraction(1) - sum(
                (t * dg[i] for t, dg in zip(ts, diffs)), Fraction(0)
            )
            worst = max(worst, abs(v))
        return worst

    t_raw = [out.y[i] for i in range(len(T))]
    for candidate in (t_raw, [-t for t in t_raw]):
        if recompute(candidate) == value:
            coeffs = dict(zip(T, candidate))
            result = (value, coeffs)
            if trace:
                return result + (_traced(problem, out, True),)
            return result
    raise SearchError("internal error: moore dual did not certify")


def find_free_pairs(G: GroupHandle, S: Sequence[Element], depth: int,
                    limit: int = 5, cap: Optional[int] = None) -> list:
    """Scan pairs from B_2 in deterministic order; return up to ``limit``
    FreenessWitness objects of the given depth."""
    if depth < 2:
        raise SearchError("freeness scan depth must be >= 2")
    table = ball(G, list(S), 2, cap)
    pool = [x for layer in table.layers[1:] for x in layer]
    found = []
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            witness = free_to_depth(G, pool[i], pool[j], depth, cap)
            if witness.status == "free":
                found.append(witness)
                if len(found) >= limit:
                    return found
    return found


def violation_duality_bound(violation: TranslateViolation) -> Fraction:
    """|sum t| / sum |t|: the weak-duality lower bound the violation imposes
    on every ratio defect over the same window."""
    total = sum((t for t, _ in violation.items), Fraction(0))
    mass = sum((abs(t) for t, _ in violation.items), Fraction(0))
    if mass == 0:
        raise CertificateError("empty violation")
    return abs(total) / mass
