"""Constraint-solving backend: Boolean logic plus difference arithmetic.

A self-contained lazy-SMT engine: a CDCL SAT core over the Boolean skeleton,
with arithmetic atoms delegated to a difference-logic theory solver
(negative-cycle detection over rational bounds with an infinitesimal
component for strict inequalities).  Cardinality constraints use a totalizer
encoding, and minimization of indicator counts runs a descending linear
search over the totalizer outputs.

Every model this backend deals in is exact: real values are Fractions.
The fragment is deliberately small -- linear atoms must normalize to
``x - y <= c``, ``x <= c`` or ``x >= c`` -- which covers all sub-problem
models in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import SortError, UnsupportedConstraint

BOOL = "bool"
REAL = "real"

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class VarRef:
    idx: int
    name: str
    sort: str

    def __repr__(self) -> str:
        return self.name


# ---------------------------------------------------------------------------
# Formula trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class BoolLit(Formula):
    value: bool


@dataclass(frozen=True)
class Atom(Formula):
    """Boolean occurrence of a Boolean variable."""

    var: VarRef


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Ite(Formula):
    cond: Formula
    then: Formula
    other: Formula


@dataclass(frozen=True)
class LinCmp(Formula):
    """sum(coeff * var) op const, with op in {<=, >=, ==}."""

    terms: tuple[tuple[Fraction, VarRef], ...]
    op: str
    const: Fraction


@dataclass(frozen=True)
class ExactlyN(Formula):
    vars: tuple[VarRef, ...]
    n: int


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def bvar(v: VarRef) -> Formula:
    if v.sort != BOOL:
        raise SortError(f"{v.name} is not Boolean")
    return Atom(v)


def not_(f: Formula) -> Formula:
    return Not(f)


def and_(*fs: Formula) -> Formula:
    return And(tuple(fs))


def or_(*fs: Formula) -> Formula:
    return Or(tuple(fs))


def implies(a: Formula, b: Formula) -> Formula:
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return Iff(a, b)


def ite(c: Formula, t: Formula, e: Formula) -> Formula:
    return Ite(c, t, e)


def exactly(vars: Iterable[VarRef], n: int) -> Formula:
    return ExactlyN(tuple(vars), n)


def lin(terms: Iterable[tuple[Number, VarRef]], op: str, const: Number) -> Formula:
    assert op in ("<=", ">=", "==")
    tt = tuple((Fraction(c), v) for c, v in terms)
    for _, v in tt:
        if v.sort != REAL:
            raise SortError(f"{v.name} is not real-sorted")
    return LinCmp(tt, op, Fraction(const))


def diff_ge(x: VarRef, y: VarRef, c: Number) -> Formula:
    """x >= y + c"""
    return lin([(1, x), (-1, y)], ">=", c)


def var_le(x: VarRef, c: Number) -> Formula:
    return lin([(1, x)], "<=", c)


def var_ge(x: VarRef, c: Number) -> Formula:
    return lin([(1, x)], ">=", c)


def var_eq(x: VarRef, c: Number) -> Formula:
    return lin([(1, x)], "==", c)


def diff_eq(x: VarRef, y: VarRef, c: Number) -> Formula:
    """x == y + c"""
    return lin([(1, x), (-1, y)], "==", c)


# ---------------------------------------------------------------------------
# Models and results
# ---------------------------------------------------------------------------

class Model:
    def __init__(self, assignment: dict[VarRef, object]):
        self._assignment = assignment

    def value(self, v: VarRef):
        return self._assignment[v]

    def __contains__(self, v: VarRef) -> bool:
        return v in self._assignment

    def true_vars(self, vars: Iterable[VarRef]) -> frozenset[VarRef]:
        return frozenset(v for v in vars if self._assignment[v] is True)


@dataclass(frozen=True)
class SolveResult:
    sat: bool
    model: Model | None = None


# Bound with an infinitesimal component: value + eps * delta.
_Bound = tuple[Fraction, int]


def _bound_add(a: _Bound, b: _Bound) -> _Bound:
    return (a[0] + b[0], a[1] + b[1])


# ---------------------------------------------------------------------------
# The CDCL core
# ---------------------------------------------------------------------------

class _SatCore:
    """Small CDCL solver: occurrence-list propagation, 1UIP learning,
    backjumping.  Literals are nonzero ints; variable v has literals v, -v.

    Assumptions are handled as forced decisions on their own levels, so
    every learned clause is a consequence of the clause database alone and
    stays valid across calls.
    """

    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.occ: dict[int, list[int]] = {}
        self.empty_clause = False
        self.activity: dict[int, float] = {}

    def new_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self.occ[v] = []
        self.occ[-v] = []
        self.activity[v] = 0.0
        return v

    def add_clause(self, lits: Sequence[int]) -> int | None:
        """Add a clause, returning its index (None if dropped as tautology)."""
        lits = sorted(set(lits), key=abs)
        if any(-l in lits for l in lits):
            return None
        if not lits:
            self.empty_clause = True
            return None
        idx = len(self.clauses)
        self.clauses.append(list(lits))
        for l in lits:
            self.occ[l].append(idx)
        return idx

    # -- main search ------------------------------------------------------

    def solve(self, assumptions: Sequence[int] = ()) -> dict[int, bool] | None:
        if self.empty_clause:
            return None
        assign: dict[int, bool] = {}
        level: dict[int, int] = {}
        reason: dict[int, int | None] = {}
        trail: list[int] = []
        lim: list[int] = []

        def value(lit: int):
            v = assign.get(abs(lit))
            if v is None:
                return None
            return v if lit > 0 else not v

        def enqueue(lit: int, why: int | None) -> bool:
            val = value(lit)
            if val is not None:
                return val
            assign[abs(lit)] = lit > 0
            level[abs(lit)] = len(lim)
            reason[abs(lit)] = why
            trail.append(lit)
            return True

        head = 0

        def propagate() -> int | None:
            """Unit propagation; returns a conflicting clause index or None."""
            nonlocal head
            while head < len(trail):
                lit = trail[head]
                head += 1
                for ci in self.occ[-lit]:
                    clause = self.clauses[ci]
                    unassigned = None
                    satisfied = False
                    unit = True
                    for other in clause:
                        ov = value(other)
                        if ov is True:
                            satisfied = True
                            break
                        if ov is None:
                            if unassigned is not None:
                                unit = False
                                break
                            unassigned = other
                    if satisfied or not unit:
                        continue
                    if unassigned is None:
                        return ci
                    enqueue(unassigned, ci)
            return None

        def analyze(conflict_ci: int) -> list[int]:
            """1UIP conflict analysis; returns the learned clause (last
            element is the asserting literal)."""
            cur_level = len(lim)
            seen: set[int] = set()
            learned: list[int] = []
            counter = 0
            lits = list(self.clauses[conflict_ci])
            idx = len(trail) - 1
            while True:
                for lit in lits:
                    v = abs(lit)
                    if v in seen or level[v] == 0:
                        continue
                    seen.add(v)
                    self.activity[v] += 1.0
                    if level[v] == cur_level:
                        counter += 1
                    else:
                        learned.append(lit)
                while idx >= 0 and abs(trail[idx]) not in seen:
                    idx -= 1
                assert idx >= 0, "conflict analysis ran off the trail"
                uip_lit = trail[idx]
                idx -= 1
                seen.discard(abs(uip_lit))
                counter -= 1
                if counter == 0:
                    learned.append(-uip_lit)
                    return learned
                why = reason[abs(uip_lit)]
                assert why is not None, "non-UIP literal must have a reason"
                lits = [l for l in self.clauses[why] if l != uip_lit]

        def backtrack(to_level: int) -> None:
            nonlocal head
            while len(lim) > to_level:
                mark = lim.pop()
                while len(trail) > mark:
                    lit = trail.pop()
                    del assign[abs(lit)]
                    del level[abs(lit)]
                    del reason[abs(lit)]
            head = min(head, len(trail))

        while True:
            ci = propagate()
            if ci is not None:
                if not lim:
                    return None
                learned = analyze(ci)
                uip = learned[-1]
                bj = max((level[abs(l)] for l in learned[:-1]), default=0)
                backtrack(bj)
                idx = self.add_clause(learned)
                enqueue(uip, idx)
                continue
            # place any pending assumption on its own decision level
            failed = False
            placed = False
            for a in assumptions:
                av = value(a)
                if av is False:
                    failed = True
                    break
                if av is None:
                    lim.append(len(trail))
                    enqueue(a, None)
                    placed = True
                    break
            if failed:
                return None
            if placed:
                continue
            free = [v for v in range(1, self.nvars + 1) if v not in assign]
            if not free:
                return dict(assign)
            pick = max(free, key=lambda v: (self.activity[v], -v))
            lim.append(len(trail))
            enqueue(-pick, None)


# ---------------------------------------------------------------------------
# Context: formulas in, models out
# ---------------------------------------------------------------------------

class Context:
    """One assertion set plus its solver state.

    Assertions are additive; there is no push/pop beyond model blocking.
    """

    def __init__(self) -> None:
        self._sat = _SatCore()
        self._vars: list[VarRef] = []
        self._bool_lit: dict[VarRef, int] = {}
        # difference atoms: key (u, v, bound) meaning  val(u) - val(v) <= bound
        self._atom_lit: dict[tuple[object, object, _Bound], int] = {}
        self._atom_by_lit: dict[int, tuple[object, object, _Bound]] = {}
        self._real_vars: list[VarRef] = []
        self._en_cache: dict[tuple[tuple[VarRef, ...]], list[int]] = {}
        self._assertions: list[Formula] = []
        self._totalizer_cache: dict[tuple[int, ...], list[int]] = {}

    # -- variable management ---------------------------------------------

    def new_bool(self, name: str) -> VarRef:
        v = VarRef(len(self._vars), name, BOOL)
        self._vars.append(v)
        self._bool_lit[v] = self._sat.new_var()
        return v

    def new_real(self, name: str) -> VarRef:
        v = VarRef(len(self._vars), name, REAL)
        self._vars.append(v)
        self._real_vars.append(v)
        return v

    # -- assertion --------------------------------------------------------

    def assert_formula(self, f: Formula) -> None:
        self._assertions.append(f)
        lit = self._encode(f)
        self._sat.add_clause([lit])

    def block_model(self, vars: Sequence[VarRef], m: Model) -> None:
        """Forbid the projection of model m onto the given Boolean vars."""
        clause = [
            -self._bool_lit[v] if m.value(v) is True else self._bool_lit[v]
            for v in vars
        ]
        self._sat.add_clause(clause)
        self._assertions.append(
            Or(tuple(
                Not(Atom(v)) if m.value(v) is True else Atom(v) for v in vars
            ))
        )

    def block_true_subset(self, vars: Sequence[VarRef], m: Model) -> None:
        """Forbid every model where all vars true in m are true again.

        Stronger than block_model: also rules out supersets.
        """
        clause = [-self._bool_lit[v] for v in vars if m.value(v) is True]
        self._sat.add_clause(clause)
        self._assertions.append(
            Or(tuple(Not(Atom(v)) for v in vars if m.value(v) is True))
        )

    # -- solving ----------------------------------------------------------

    def check(self, assumptions: Sequence[int] = ()) -> SolveResult:
        while True:
            assignment = self._sat.solve(assumptions)
            if assignment is None:
                return SolveResult(False, None)
            conflict = self._theory_conflict(assignment)
            if conflict is None:
                return SolveResult(True, self._build_model(assignment))
            self._sat.add_clause([-l for l in conflict])

    def minimize(self, indicators: Sequence[VarRef]) -> SolveResult:
        """Minimize the number of true variables among `indicators`.

        Descending linear search over totalizer outputs.  On success the
        attained bound is asserted permanently, so later check() calls stay
        satisfiable at the optimum.
        """
        res = self.check()
        if not res.sat:
            return res
        if not indicators:
            return res
        outs = self._totalizer([self._bool_lit[v] for v in indicators])
        best = res
        k = len(best.model.true_vars(indicators))
        while k > 0:
            tighter = self.check(assumptions=[-outs[k - 1]])
            if not tighter.sat:
                break
            best = tighter
            k = len(best.model.true_vars(indicators))
        if k < len(indicators):
            self._sat.add_clause([-outs[k]])  # cap at the attained optimum
        return best

    def assertion_count(self) -> int:
        return len(self._assertions)

    def dump(self) -> str:
        """Debug dump of the assertion list in an SMT-LIB-flavoured text."""
        return "\n".join(_pretty(f) for f in self._assertions)

    # -- encoding ---------------------------------------------------------

    def _encode(self, f: Formula) -> int:
        """Return a SAT literal equivalent to f (full Tseitin)."""
        if isinstance(f, BoolLit):
            lit = self._sat.new_var()
            self._sat.add_clause([lit if f.value else -lit])  # pin it
            return lit
        if isinstance(f, Atom):
            return self._bool_lit[f.var]
        if isinstance(f, Not):
            return -self._encode(f.arg)
        if isinstance(f, And):
            lits = [self._encode(a) for a in f.args]
            return self._define_and(lits)
        if isinstance(f, Or):
            lits = [self._encode(a) for a in f.args]
            return -self._define_and([-l for l in lits])
        if isinstance(f, Implies):
            return -self._define_and([self._encode(f.lhs), -self._encode(f.rhs)])
        if isinstance(f, Iff):
            a, b = self._encode(f.lhs), self._encode(f.rhs)
            p = self._sat.new_var()
            self._sat.add_clause([-p, -a, b])
            self._sat.add_clause([-p, a, -b])
            self._sat.add_clause([p, a, b])
            self._sat.add_clause([p, -a, -b])
            return p
        if isinstance(f, Ite):
            c, t, e = self._encode(f.cond), self._encode(f.then), self._encode(f.other)
            p = self._sat.new_var()
            self._sat.add_clause([-p, -c, t])
            self._sat.add_clause([-p, c, e])
            self._sat.add_clause([p, -c, -t])
            self._sat.add_clause([p, c, -e])
            return p
        if isinstance(f, ExactlyN):
            lits = [self._bool_lit[v] for v in f.vars]
            outs = self._totalizer(lits)
            if f.n > len(lits):
                return self._encode(FALSE)
            parts = []
            if f.n >= 1:
                parts.append(outs[f.n - 1])  # at least n
            if f.n < len(lits):
                parts.append(-outs[f.n])  # at most n
            return self._define_and(parts) if parts else self._encode(TRUE)
        if isinstance(f, LinCmp):
            return self._encode_lincmp(f)
        raise SortError(f"unknown formula node {f!r}")

    def _define_and(self, lits: list[int]) -> int:
        if not lits:
            return self._encode(TRUE)
        if len(lits) == 1:
            return lits[0]
        p = self._sat.new_var()
        for l in lits:
            self._sat.add_clause([-p, l])
        self._sat.add_clause([p] + [-l for l in lits])
        return p

    def _totalizer(self, lits: list[int]) -> list[int]:
        """Sorted-output counter: outs[k] is true iff > k inputs are true.

        outs[k] <=> (#true >= k+1).  Both implication directions are encoded
        so the outputs can be used under either polarity.
        """
        key = tuple(lits)
        if key in self._totalizer_cache:
            return self._totalizer_cache[key]

        def build(ls: list[int]) -> list[int]:
            if len(ls) == 1:
                return [ls[0]]
            mid = len(ls) // 2
            a = build(ls[:mid])
            b = build(ls[mid:])
            r = [self._sat.new_var() for _ in range(len(a) + len(b))]
            p, q = len(a), len(b)
            for i in range(p + 1):
                for j in range(q + 1):
                    if 1 <= i + j <= p + q:
                        clause = [r[i + j - 1]]
                        if i >= 1:
                            clause.append(-a[i - 1])
                        if j >= 1:
                            clause.append(-b[j - 1])
                        if i >= 1 or j >= 1:
                            self._sat.add_clause(clause)
                    if 0 <= i + j < p + q:
                        clause = [-r[i + j]]
                        if i < p:
                            clause.append(a[i])
                        if j < q:
                            clause.append(b[j])
                        self._sat.add_clause(clause)
            return r

        outs = build(list(lits))
        self._totalizer_cache[key] = outs
        return outs

    # -- arithmetic atoms --------------------------------------------------

    _ZERO = "<zero>"

    def _encode_lincmp(self, f: LinCmp) -> int:
        if f.op == "==":
            le = LinCmp(f.terms, "<=", f.const)
            ge = LinCmp(f.terms, ">=", f.const)
            return self._define_and([self._encode_lincmp(le), self._encode_lincmp(ge)])
        terms: dict[VarRef, Fraction] = {}
        for c, v in f.terms:
            terms[v] = terms.get(v, Fraction(0)) + c
        terms = {v: c for v, c in terms.items() if c != 0}
        const = f.const
        if f.op == ">=":
            terms = {v: -c for v, c in terms.items()}
            const = -const
        # now: sum(c*v) <= const
        if not terms:
            return self._encode(TRUE if 0 <= const else FALSE)
        if len(terms) == 1:
            ((v, c),) = terms.items()
            if c > 0:
                return self._atom(v, self._ZERO, (const / c, 0))
            # c < 0: v >= const/c, i.e. zero - v <= -(const/c)
            return self._atom(self._ZERO, v, (-const / c, 0))
        if len(terms) == 2:
            (v1, c1), (v2, c2) = sorted(terms.items(), key=lambda t: t[0].idx)
            if c1 == -c2:
                if c1 > 0:
                    return self._atom(v1, v2, (const / c1, 0))
                return self._atom(v2, v1, (const / c2, 0))
        raise UnsupportedConstraint(
            f"atom outside the difference fragment: {f.terms} {f.op} {f.const}"
        )

    def _atom(self, u: object, v: object, bound: _Bound) -> int:
        key = (u, v, bound)
        if key not in self._atom_lit:
            lit = self._sat.new_var()
            self._atom_lit[key] = lit
            self._atom_by_lit[lit] = key
        return self._atom_lit[key]

    # -- theory -----------------------------------------------------------

    def _theory_conflict(self, assignment: dict[int, bool]) -> list[int] | None:
        """Check the difference constraints implied by `assignment`.

        Returns the literals of an inconsistent subset (a negative cycle),
        or None when consistent.
        """
        # edge u -> v with weight w encodes  val(v) - val(u) <= w
        edges: list[tuple[object, object, _Bound, int]] = []
        for lit, (u, v, bound) in self._atom_by_lit.items():
            val = assignment.get(lit)
            if val is True:
                # val(u) - val(v) <= bound : edge v -> u
                edges.append((v, u, bound, lit))
            elif val is False:
                # negation: val(v) - val(u) <= -bound, strictly
                nb = (-bound[0], -bound[1] - 1)
                edges.append((u, v, nb, -lit))
        for v in self._real_vars:
            # nonnegative sort: zero - v <= 0  : edge v -> zero ... careful:
            # v >= 0  <=>  zero - v <= 0  : edge v -> zero with weight 0
            edges.append((v, self._ZERO, (Fraction(0), 0), 0))
        nodes = {self._ZERO, *self._real_vars}
        for u, v, _, _ in edges:
            nodes.add(u)
            nodes.add(v)
        dist: dict[object, _Bound] = {n: (Fraction(0), 0) for n in nodes}
        pred: dict[object, tuple[object, int]] = {}
        n = len(nodes)
        changed_node = None
        for it in range(n):
            changed_node = None
            for u, v, w, lit in edges:
                cand = _bound_add(dist[u], w)
                if cand < dist[v]:
                    dist[v] = cand
                    pred[v] = (u, lit)
                    changed_node = v
            if changed_node is None:
                return None
        # negative cycle: walk back n steps from the last relaxed node
        node = changed_node
        for _ in range(n):
            node = pred[node][0]
        cycle_lits: list[int] = []
        cur = node
        while True:
            prev, lit = pred[cur]
            if lit != 0:
                cycle_lits.append(lit)
            cur = prev
            if cur == node:
                break
        return cycle_lits or None

    def _build_model(self, assignment: dict[int, bool]) -> Model:
        values: dict[VarRef, object] = {}
        for v in self._vars:
            if v.sort == BOOL:
                values[v] = assignment.get(self._bool_lit[v], False)
        values.update(self._real_values(assignment))
        return Model(values)

    def _real_values(self, assignment: dict[int, bool]) -> dict[VarRef, Fraction]:
        if not self._real_vars:
            return {}
        edges: list[tuple[object, object, _Bound]] = []
        for lit, (u, v, bound) in self._atom_by_lit.items():
            val = assignment.get(lit)
            if val is True:
                edges.append((v, u, bound))
            elif val is False:
                edges.append((u, v, (-bound[0], -bound[1] - 1)))
        for v in self._real_vars:
            edges.append((v, self._ZERO, (Fraction(0), 0)))
        nodes = [self._ZERO, *self._real_vars]
        dist: dict[object, _Bound] = {n: (Fraction(0), 0) for n in nodes}
        for _ in range(len(nodes)):
            changed = False
            for u, v, w in edges:
                cand = _bound_add(dist[u], w)
                if cand < dist[v]:
                    dist[v] = cand
                    changed = True
            if not changed:
                break
        base = dist[self._ZERO]
        raw = {v: (dist[v][0] - base[0], dist[v][1] - base[1]) for v in self._real_vars}
        # realize the infinitesimal: pick delta keeping every edge satisfied
        delta = Fraction(1)
        for u, v, w in edges:
            slack_r = dist[u][0] + w[0] - dist[v][0]
            slack_e = dist[u][1] + w[1] - dist[v][1]
            if slack_r > 0 and slack_e < 0:
                delta = min(delta, Fraction(slack_r, -slack_e))
        delta = delta / 2
        return {v: a + delta * b for v, (a, b) in raw.items()}


def _pretty(f: Formula) -> str:
    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f.var.name
    if isinstance(f, Not):
        return f"(not {_pretty(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(_pretty(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(_pretty(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"(=> {_pretty(f.lhs)} {_pretty(f.rhs)})"
    if isinstance(f, Iff):
        return f"(= {_pretty(f.lhs)} {_pretty(f.rhs)})"
    if isinstance(f, Ite):
        return f"(ite {_pretty(f.cond)} {_pretty(f.then)} {_pretty(f.other)})"
    if isinstance(f, LinCmp):
        body = " ".join(f"(* {c} {v.name})" for c, v in f.terms)
        return f"({f.op} (+ {body}) {f.const})"
    if isinstance(f, ExactlyN):
        return f"(exactly {f.n} " + " ".join(v.name for v in f.vars) + ")"
    return repr(f)
