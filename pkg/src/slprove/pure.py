"""Decision procedure for pointer (dis)equalities + linear integer arithmetic.

Pointers are encoded as integers (null = 0), so everything reduces to
Presburger arithmetic, decided by Cooper-style quantifier elimination.
Queries are memoized by alpha-equivalent structure; the memo uses a
concurrent-read / locked-write discipline.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    And, Cmp, Dvd, Exists, FALSE, Forall, LinTerm, Not, Or, PFalse, PTrue,
    PredAtom, Pure, TRUE, Var, eq0, le0, nnf, pand, pnot, por, pure_unknowns,
    pure_vars, _key_pure,
)


class UnknownPredicateError(Exception):
    """A pure unknown atom reached the solver."""


class BudgetExceeded(Exception):
    """Step budget exhausted; caller reports UNKNOWN."""


@dataclass(frozen=True)
class SatVerdict:
    kind: str  # 'sat' | 'unsat' | 'unknown'
    witness: Optional[dict[Var, int]] = None
    reason: str = ""

    def is_sat(self) -> bool:
        return self.kind == "sat"

    def is_unsat(self) -> bool:
        return self.kind == "unsat"


VALID = "valid"
INVALID = "invalid"
UNKNOWN = "unknown"


def _lcm(a: int, b: int) -> int:
    return abs(a * b) // math.gcd(a, b) if a and b else abs(a or b)


# ---------------------------------------------------------------------------
# Ground evaluation


def eval_pure(f: Pure, env: dict[Var, int], budget=None) -> bool:
    """Evaluate a quantifier-free formula under a total assignment."""
    if budget is not None:
        budget.spend()
    if isinstance(f, PTrue):
        return True
    if isinstance(f, PFalse):
        return False
    if isinstance(f, Cmp):
        val = f.term.const + sum(c * env[v] for v, c in f.term.coeffs)
        return val == 0 if f.op == "=" else val <= 0
    if isinstance(f, Dvd):
        val = f.term.const + sum(c * env[v] for v, c in f.term.coeffs)
        return val % f.modulus == 0
    if isinstance(f, Not):
        return not eval_pure(f.arg, env, budget)
    if isinstance(f, And):
        return all(eval_pure(g, env, budget) for g in f.args)
    if isinstance(f, Or):
        return any(eval_pure(g, env, budget) for g in f.args)
    if isinstance(f, PredAtom):
        raise UnknownPredicateError(f.name)
    raise TypeError(f"not ground-evaluable: {f!r}")


# ---------------------------------------------------------------------------
# Cooper elimination


class _Budget:
    __slots__ = ("left",)

    def __init__(self, steps: int):
        self.left = steps

    def spend(self, n: int = 1):
        self.left -= n
        if self.left < 0:
            raise BudgetExceeded()


def _subst_var_term(f: Pure, x: Var, t: LinTerm, budget) -> Pure:
    """Replace x (coefficient +-1 everywhere) by the term t."""
    budget.spend()
    if isinstance(f, (PTrue, PFalse)):
        return f
    if isinstance(f, Cmp):
        c = f.term.coeff(x)
        if c == 0:
            return f
        g = f.term.drop(x).add(t.scale(c))
        return eq0(g) if f.op == "=" else le0(g)
    if isinstance(f, Dvd):
        c = f.term.coeff(x)
        if c == 0:
            return f
        g = f.term.drop(x).add(t.scale(c))
        if g.is_const():
            return TRUE if g.const % f.modulus == 0 else FALSE
        return Dvd(f.modulus, g)
    if isinstance(f, Not):
        return pnot(_subst_var_term(f.arg, x, t, budget))
    if isinstance(f, And):
        return pand(*(_subst_var_term(g, x, t, budget) for g in f.args))
    if isinstance(f, Or):
        return por(*(_subst_var_term(g, x, t, budget) for g in f.args))
    raise TypeError(f"unexpected in QF formula: {f!r}")


def _scale_coeffs(f: Pure, x: Var, delta: int, budget) -> Pure:
    """Make every coefficient of x equal +-1, scaling atoms to delta."""
    budget.spend()
    if isinstance(f, (PTrue, PFalse)):
        return f
    if isinstance(f, Cmp):
        c = f.term.coeff(x)
        if c == 0:
            return f
        k = delta // abs(c)
        t = f.term.scale(k)
        # now coefficient is +-delta; rename delta*x -> x
        d = t.as_dict()
        d[x] = 1 if c > 0 else -1
        t2 = LinTerm.of(d, t.const)
        return Cmp(f.op, t2)
    if isinstance(f, Dvd):
        c = f.term.coeff(x)
        if c == 0:
            return f
        k = delta // abs(c)
        t = f.term.scale(k)
        d = t.as_dict()
        d[x] = 1 if c > 0 else -1
        return Dvd(f.modulus * k, LinTerm.of(d, t.const))
    if isinstance(f, Not):
        return Not(_scale_coeffs(f.arg, x, delta, budget))
    if isinstance(f, And):
        return And(tuple(_scale_coeffs(g, x, delta, budget) for g in f.args))
    if isinstance(f, Or):
        return Or(tuple(_scale_coeffs(g, x, delta, budget) for g in f.args))
    raise TypeError(f"unexpected in QF formula: {f!r}")


def _minus_inf(f: Pure, x: Var, budget) -> Pure:
    """The x -> -infinity projection of f (coefficients of x are +-1)."""
    budget.spend()
    if isinstance(f, Cmp):
        c = f.term.coeff(x)
        if c == 0:
            return f
        if f.op == "=":
            return FALSE
        return TRUE if c > 0 else FALSE  # x + t <= 0 true at -inf
    if isinstance(f, Not):
        c = _atom_coeff(f.arg, x)
        if c == 0:
            return f
        if isinstance(f.arg, Cmp) and f.arg.op == "=":
            return TRUE
        if isinstance(f.arg, Dvd):
            return f
        # Not(Cmp <=) should not appear in NNF, but handle anyway
        inner = _minus_inf(f.arg, x, budget)
        return pnot(inner)
    if isinstance(f, Dvd):
        return f
    if isinstance(f, And):
        return pand(*(_minus_inf(g, x, budget) for g in f.args))
    if isinstance(f, Or):
        return por(*(_minus_inf(g, x, budget) for g in f.args))
    return f


def _plus_inf(f: Pure, x: Var, budget) -> Pure:
    budget.spend()
    if isinstance(f, Cmp):
        c = f.term.coeff(x)
        if c == 0:
            return f
        if f.op == "=":
            return FALSE
        return TRUE if c < 0 else FALSE
    if isinstance(f, Not):
        c = _atom_coeff(f.arg, x)
        if c == 0:
            return f
        if isinstance(f.arg, Cmp) and f.arg.op == "=":
            return TRUE
        if isinstance(f.arg, Dvd):
            return f
        inner = _plus_inf(f.arg, x, budget)
        return pnot(inner)
    if isinstance(f, Dvd):
        return f
    if isinstance(f, And):
        return pand(*(_plus_inf(g, x, budget) for g in f.args))
    if isinstance(f, Or):
        return por(*(_plus_inf(g, x, budget) for g in f.args))
    return f


def _atom_coeff(f: Pure, x: Var) -> int:
    if isinstance(f, (Cmp, Dvd)):
        return f.term.coeff(x)
    return 0


def _collect(f: Pure, x: Var, coeffs: list, divs: list, lowers: list, uppers: list):
    """Gather x-coefficients, divisibility moduli and strict bound terms.

    Bounds use the strict convention of Cooper's theorem: lowers holds terms
    b with "b < x" and uppers terms a with "x < a".  With coefficient +1 and
    remainder t:  x + t <= 0 means x < -t+1;  x + t = 0 means -t-1 < x < -t+1;
    a negated equality contributes the value itself on both sides.
    """
    if isinstance(f, Cmp):
        c = f.term.coeff(x)
        if c:
            coeffs.append(c)
            rest = f.term.drop(x)
            if abs(c) == 1:
                val = rest.neg() if c > 0 else rest  # solved boundary value
                if f.op == "<=":
                    if c > 0:
                        uppers.append(val.plus_const(1))
                    else:
                        lowers.append(val.plus_const(-1))
                else:
                    lowers.append(val.plus_const(-1))
                    uppers.append(val.plus_const(1))
    elif isinstance(f, Dvd):
        c = f.term.coeff(x)
        if c:
            coeffs.append(c)
            divs.append(f.modulus)
    elif isinstance(f, Not):
        inner = f.arg
        if isinstance(inner, (Cmp, Dvd)):
            c = inner.term.coeff(x)
            if c:
                coeffs.append(c)
                if isinstance(inner, Dvd):
                    divs.append(inner.modulus)
                elif abs(c) == 1:
                    rest = inner.term.drop(x)
                    val = rest.neg() if c > 0 else rest
                    uppers.append(val)
                    lowers.append(val)
        else:
            _collect(inner, x, coeffs, divs, lowers, uppers)
    elif isinstance(f, (And, Or)):
        for g in f.args:
            _collect(g, x, coeffs, divs, lowers, uppers)


def _simplify(f: Pure) -> Pure:
    if isinstance(f, And):
        return pand(*(_simplify(g) for g in f.args))
    if isinstance(f, Or):
        return por(*(_simplify(g) for g in f.args))
    if isinstance(f, Not):
        return pnot(_simplify(f.arg))
    return f


def eliminate_exists(x: Var, f: Pure, budget: _Budget) -> Pure:
    """Cooper's procedure for `exists x . f` with f quantifier-free NNF."""
    coeffs: list[int] = []
    divs: list[int] = []
    lowers: list[LinTerm] = []
    uppers: list[LinTerm] = []
    _collect(f, x, coeffs, [], [], [])  # first pass only for coefficients
    if not coeffs:
        return f
    delta = 1
    for c in coeffs:
        delta = _lcm(delta, abs(c))
    g = _scale_coeffs(f, x, delta, budget)
    if delta > 1:
        g = pand(g, Dvd(delta, LinTerm.var(x)))
    lowers, uppers, divs = [], [], []
    _collect(g, x, [], divs, lowers, uppers)
    bigd = 1
    for m in divs:
        bigd = _lcm(bigd, m)
    use_lower = len(lowers) <= len(uppers)
    parts: list[Pure] = []
    inf = _minus_inf(g, x, budget) if use_lower else _plus_inf(g, x, budget)
    bounds = lowers if use_lower else uppers
    sign = 1 if use_lower else -1
    for j in range(1, bigd + 1):
        parts.append(_subst_var_term(inf, x, LinTerm.num(sign * j), budget))
    seen_b = set()
    for b in bounds:
        if b in seen_b:
            continue
        seen_b.add(b)
        for j in range(1, bigd + 1):
            parts.append(_subst_var_term(g, x, b.plus_const(sign * j), budget))
    return _simplify(por(*parts))


def eliminate_quantifiers(f: Pure, budget: Optional[_Budget] = None) -> Pure:
    """Quantifier-free equivalent of f over the integers."""
    if pure_unknowns(f):
        raise UnknownPredicateError(sorted(pure_unknowns(f))[0])
    budget = budget or _Budget(10**7)

    def go(g: Pure) -> Pure:
        budget.spend()
        if isinstance(g, (PTrue, PFalse, Cmp, Dvd)):
            return g
        if isinstance(g, Not):
            return pnot(go(g.arg))
        if isinstance(g, And):
            return pand(*(go(h) for h in g.args))
        if isinstance(g, Or):
            return por(*(go(h) for h in g.args))
        if isinstance(g, Exists):
            body = nnf(go(g.body))
            return eliminate_exists(g.var, body, budget)
        if isinstance(g, Forall):
            body = nnf(pnot(go(g.body)))
            return pnot(eliminate_exists(g.var, body, budget))
        raise TypeError(repr(g))

    return _simplify(go(nnf(f)))


# ---------------------------------------------------------------------------
# Satisfiability and implication with witness construction


class Solver:
    """Memoizing Presburger solver.

    UNKNOWN is reserved for step-budget exhaustion.  The memo is read
    without a lock and written under one, matching the documented
    concurrent-read / locked-write contract.
    """

    def __init__(self, step_budget: int = 10**6, smt_dump_dir: Optional[str] = None):
        self.step_budget = step_budget
        self._memo: dict = {}
        self._lock = threading.Lock()
        self.smt_dump_dir = smt_dump_dir
        self._dump_n = 0

    # -- helpers

    def _key(self, f: Pure):
        return _key_pure(f, {})

    def _close_exists(self, f: Pure) -> Pure:
        g = f
        for v in sorted(pure_vars(f), key=lambda v: v.name, reverse=True):
            g = Exists(v, g)
        return g

    def _candidates(self, f: Pure, x: Var) -> list[int]:
        """Concrete Cooper test points for x in a ground-in-x formula."""
        coeffs: list[int] = []
        divs: list[int] = []
        lowers: list[LinTerm] = []
        uppers: list[LinTerm] = []
        _collect(f, x, coeffs, divs, lowers, uppers)
        delta = 1
        for c in coeffs:
            delta = _lcm(delta, abs(c))
        bigd = delta
        for m in divs:
            bigd = _lcm(bigd, m)
        vals: set[int] = set()
        span = bigd if bigd > 0 else 1
        for b in lowers + uppers:
            if b.is_const():
                for j in range(-span, span + 1):
                    vals.add(b.const + j)
        for j in range(-span, span + 1):
            vals.add(j)
        return sorted(vals)

    def is_sat(self, f: Pure) -> SatVerdict:
        if pure_unknowns(f):
            raise UnknownPredicateError(sorted(pure_unknowns(f))[0])
        key = ("sat", self._key(f))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        budget = _Budget(self.step_budget)
        self._maybe_dump(f)
        try:
            closed = eliminate_quantifiers(self._close_exists(f), budget)
            truth = eval_pure(closed, {}, budget)
            if not truth:
                out = SatVerdict("unsat")
            else:
                out = SatVerdict("sat", self._model(nnf(f), budget))
        except BudgetExceeded:
            out = SatVerdict("unknown", reason="step budget exceeded")
        with self._lock:
            self._memo[key] = out
        return out

    def _model(self, f: Pure, budget: _Budget) -> dict[Var, int]:
        """Build a witness for a satisfiable quantifier-free-ish formula."""
        g = eliminate_quantifiers(f, budget)
        fvs = sorted(pure_vars(g), key=lambda v: v.name)
        env: dict[Var, int] = {}
        cur = g
        for i, v in enumerate(fvs):
            rest = fvs[i + 1:]
            proj = cur
            for w in reversed(rest):
                proj = eliminate_exists(w, nnf(proj), budget)
            found = False
            for val in self._candidates(proj, v):
                budget.spend()
                if eval_pure(_subst_var_term(nnf(proj), v, LinTerm.num(val), budget), {},
                             budget):
                    env[v] = val
                    cur = _subst_var_term(nnf(cur), v, LinTerm.num(val), budget)
                    found = True
                    break
            if not found:  # fall back to a small scan
                for val in range(-64, 65):
                    budget.spend()
                    if eval_pure(_subst_var_term(nnf(proj), v, LinTerm.num(val),
                                                 budget), {}, budget):
                        env[v] = val
                        cur = _subst_var_term(nnf(cur), v, LinTerm.num(val), budget)
                        found = True
                        break
            if not found:
                raise BudgetExceeded()  # should not happen on sat formulas
        return env

    def implies(self, p1: Pure, p2: Pure):
        """(verdict, witness): VALID iff p1 and not(p2) is unsat."""
        v = self.is_sat(pand(p1, pnot(p2)))
        if v.is_unsat():
            return VALID, None
        if v.is_sat():
            return INVALID, v.witness
        return UNKNOWN, None

    def equivalent(self, p1: Pure, p2: Pure) -> bool:
        a, _ = self.implies(p1, p2)
        b, _ = self.implies(p2, p1)
        return a == VALID and b == VALID

    def qe(self, f: Pure) -> Pure:
        return eliminate_quantifiers(f, _Budget(self.step_budget))

    # -- optional SMT-LIB 2 emission (debug aid)

    def _maybe_dump(self, f: Pure):
        if not self.smt_dump_dir:
            return
        import os

        os.makedirs(self.smt_dump_dir, exist_ok=True)
        self._dump_n += 1
        path = os.path.join(self.smt_dump_dir, f"query_{self._dump_n:04d}.smt2")
        with open(path, "w") as fh:
            fh.write(to_smtlib(f))


def to_smtlib(f: Pure) -> str:
    """Render a satisfiability query as an SMT-LIB 2 LIA script."""
    decls = sorted(pure_vars(f), key=lambda v: v.name)
    lines = ["(set-logic LIA)"]
    for v in decls:
        lines.append(f"(declare-const {_smt_name(v)} Int)")
    lines.append(f"(assert {_smt(f)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _smt_name(v: Var) -> str:
    return v.name.replace("#", "h").replace("'", "p")


def _smt_term(t: LinTerm) -> str:
    parts = [f"(* {c} {_smt_name(v)})" if c != 1 else _smt_name(v)
             for v, c in t.coeffs]
    parts.append(str(t.const))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _smt(f: Pure) -> str:
    if isinstance(f, PTrue):
        return "true"
    if isinstance(f, PFalse):
        return "false"
    if isinstance(f, Cmp):
        op = "=" if f.op == "=" else "<="
        return f"({op} {_smt_term(f.term)} 0)"
    if isinstance(f, Dvd):
        return f"(= (mod {_smt_term(f.term)} {f.modulus}) 0)"
    if isinstance(f, Not):
        return f"(not {_smt(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(_smt(g) for g in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(_smt(g) for g in f.args) + ")"
    if isinstance(f, Exists):
        return f"(exists (({_smt_name(f.var)} Int)) {_smt(f.body)})"
    if isinstance(f, Forall):
        return f"(forall (({_smt_name(f.var)} Int)) {_smt(f.body)})"
    raise TypeError(repr(f))
