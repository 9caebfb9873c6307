"""Pure over-approximation of heap formulas.

Each predicate gets invariant cases (baga, pure): baga is the set of
parameters that are definitely allocated, pairwise distinct and non-null in
that case; pure is a quantifier-free constraint over the parameters.
Inference runs bottom-up over dependency SCCs with a hull join and a
drop-changed-numerics widening, so it terminates and only ever weakens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import pure as pr
from .syntax import (
    And, Cmp, Conj, FALSE, Formula, InvCase, IntConst, LinTerm, Not, Null,
    Or, PFalse, PTrue, PointsTo, PredAtom, PredEnv, PredInst, Pure, TRUE,
    UnknownInst, Var, conjuncts, eq0, le0, neq, nnf, normalize, pand, pnot,
    por, pure_vars, subst_pure, _key_pure,
)


class AbstractionUnsupported(Exception):
    """xpure applied to a formula with unknown predicate instances."""


class InvariantUnsound(Exception):
    def __init__(self, pred: str, branch: int):
        super().__init__(f"declared invariant of {pred} unsound at branch {branch}")
        self.pred = pred
        self.branch = branch


@dataclass(frozen=True)
class _Case:
    baga: frozenset[Var]
    atoms: tuple[Pure, ...]  # conjunction of atomic constraints

    def pure(self) -> Pure:
        return pand(*self.atoms)


class InvariantTable:
    def __init__(self):
        self._cases: dict[str, tuple[_Case, ...]] = {}
        self.provenance: dict[str, str] = {}  # 'declared' | 'inferred'

    def has(self, pred: str) -> bool:
        return pred in self._cases

    def cases(self, pred: str) -> tuple[_Case, ...]:
        return self._cases[pred]

    def set(self, pred: str, cases, provenance: str):
        self._cases[pred] = tuple(cases)
        self.provenance[pred] = provenance

    def public_cases(self, pred: str) -> tuple[InvCase, ...]:
        return tuple(
            InvCase(tuple(sorted(c.baga, key=lambda v: v.name)), c.pure())
            for c in self._cases[pred]
        )


def baga_facts(baga) -> Pure:
    vs = sorted(baga, key=lambda v: v.name)
    out = []
    for i, v in enumerate(vs):
        out.append(neq(v, Null()))
        for w in vs[i + 1:]:
            out.append(neq(v, w))
    return pand(*out)


def _split_eq(a: Pure) -> list[Pure]:
    """Split t=0 into t<=0 and -t<=0 so hulling can keep half-spaces."""
    if isinstance(a, Cmp) and a.op == "=":
        return [le0(a.term), le0(a.term.neg())]
    return [a]


def _merge_eq(atoms: list[Pure]) -> list[Pure]:
    """Recombine le-pairs t<=0, -t<=0 into t=0 (enables substitution)."""
    keys = {_key_pure(a, {}) for a in atoms}
    out: list[Pure] = []
    emitted = set()
    for a in atoms:
        if isinstance(a, Cmp) and a.op == "<=":
            negk = _key_pure(le0(a.term.neg()), {})
            if negk in keys:
                e = eq0(a.term)
                k = _key_pure(e, {})
                if k not in emitted:
                    emitted.add(k)
                    out.append(e)
                continue
        k = _key_pure(a, {})
        if k not in emitted:
            emitted.add(k)
            out.append(a)
    return out


def _is_ptr_atom(a: Pure) -> bool:
    body = a.arg if isinstance(a, Not) else a
    if not isinstance(body, Cmp):
        return False
    return all(v.is_ptr() for v in body.term.vars()) and bool(body.term.coeffs)


def _case_formula(c: _Case) -> Pure:
    return pand(baga_facts(c.baga), *c.atoms)


class _Inference:
    def __init__(self, env: PredEnv, solver: pr.Solver, max_iters: int = 3):
        self.env = env
        self.solver = solver
        self.max_iters = max_iters
        self.table = InvariantTable()

    # -- branch abstraction -------------------------------------------------

    def abstract_conj(self, c: Conj, self_cases: dict[str, tuple[_Case, ...]],
                      keep: set[Var]) -> list[_Case]:
        """Abstract one definition branch into cases over `keep` vars."""
        prods: list[tuple[frozenset[Var], list[Pure]]] = [(frozenset(), [])]
        for atom in c.heap:
            if isinstance(atom, UnknownInst):
                raise AbstractionUnsupported(atom.name)
            options: list[tuple[frozenset[Var], list[Pure]]] = []
            if isinstance(atom, PointsTo):
                options.append((frozenset([atom.root]), []))
            else:
                cases = self_cases.get(atom.pred)
                if cases is None:
                    cases = self.table.cases(atom.pred) if self.table.has(atom.pred) else ()
                params = self.env.preds[atom.pred].params
                rho = dict(zip(params, atom.args))
                for case in cases:
                    bag: set[Var] = set()
                    ok = True
                    for b in case.baga:
                        t = rho.get(b, b)
                        if isinstance(t, Null):
                            ok = False  # null cannot be allocated
                            break
                        if isinstance(t, IntConst):
                            ok = False
                            break
                        if t in bag:
                            ok = False  # distinctness violated
                            break
                        bag.add(t)
                    if not ok:
                        continue
                    inst = [subst_pure(a, rho) for a in case.atoms]
                    if any(isinstance(a, PFalse) for a in inst):
                        continue
                    options.append((frozenset(bag), [a for a in inst
                                                     if not isinstance(a, PTrue)]))
            nxt = []
            for (b1, p1) in prods:
                for (b2, p2) in options:
                    if b1 & b2:
                        continue  # separation: same cell twice
                    nxt.append((b1 | b2, p1 + p2))
            prods = nxt
            if not prods:
                return []
        out = []
        branch_atoms = conjuncts(nnf(c.pure))
        locals_ = set(c.exists)
        for bag, atoms in prods:
            allat = _merge_eq(atoms + branch_atoms)
            allat = self._project(allat, locals_, keep)
            if allat is None:
                continue
            split: list[Pure] = []
            for a in allat:
                split.extend(_split_eq(a))
            out.append(_Case(frozenset(v for v in bag if v in keep),
                             tuple(dict.fromkeys(split))))
        return out

    def _project(self, atoms: list[Pure], locals_: set[Var],
                 keep: set[Var]) -> Optional[list[Pure]]:
        """Eliminate local variables: substitute via equalities, then drop
        conjuncts still mentioning locals (a sound weakening)."""
        atoms = [a for a in atoms if not isinstance(a, PTrue)]
        drop = {v for v in locals_ if v not in keep}
        changed = True
        while changed:
            changed = False
            for a in atoms:
                if not isinstance(a, Cmp) or a.op != "=":
                    continue
                sub = None
                for v, coef in a.term.coeffs:
                    if v in drop and abs(coef) == 1:
                        rest = a.term.drop(v).scale(-coef)
                        sub = (v, rest)
                        break
                if sub is None:
                    continue
                v, rest = sub
                new_atoms = []
                for b in atoms:
                    if b is a:
                        continue
                    nb = _subst_linear(b, v, rest)
                    if isinstance(nb, PFalse):
                        return None
                    if not isinstance(nb, PTrue):
                        new_atoms.append(nb)
                atoms = new_atoms
                drop.discard(v)
                changed = True
                break
        out = []
        for a in atoms:
            if pure_vars(a) & drop:
                continue
            if isinstance(a, PFalse):
                return None
            out.append(a)
        # dedup, stable
        seen = set()
        ded = []
        for a in out:
            k = _key_pure(a, {})
            if k not in seen:
                seen.add(k)
                ded.append(a)
        return ded

    # -- join / widen ---------------------------------------------------------

    def _implied(self, case_pure: Pure, atom: Pure) -> bool:
        v, _ = self.solver.implies(case_pure, atom)
        return v == pr.VALID

    def _hull(self, c1: _Case, c2: _Case) -> _Case:
        assert c1.baga == c2.baga
        f1, f2 = _case_formula(c1), _case_formula(c2)
        cand = []
        seen = set()
        for a in c1.atoms + c2.atoms:
            for s in _split_eq(a):
                k = _key_pure(s, {})
                if k not in seen:
                    seen.add(k)
                    cand.append(s)
        kept = [a for a in cand if self._implied(f1, a) and self._implied(f2, a)]
        return _Case(c1.baga, tuple(kept))

    def _join(self, acc: list[_Case], new: list[_Case]) -> list[_Case]:
        groups: dict[frozenset[Var], _Case] = {c.baga: c for c in acc}
        for c in new:
            if c.baga in groups:
                groups[c.baga] = self._hull(groups[c.baga], c)
            else:
                groups[c.baga] = c
        return [groups[k] for k in sorted(groups, key=lambda b: sorted(v.name for v in b))]

    def _widen(self, prev: list[_Case], cur: list[_Case]) -> list[_Case]:
        prev_by_baga = {c.baga: {_key_pure(a, {}) for a in c.atoms} for c in prev}
        out = []
        for c in cur:
            stable = prev_by_baga.get(c.baga)
            if stable is None:
                out.append(c)
                continue
            kept = tuple(a for a in c.atoms
                         if _key_pure(a, {}) in stable or _is_ptr_atom(a))
            out.append(_Case(c.baga, kept))
        return out

    def _same(self, a: list[_Case], b: list[_Case]) -> bool:
        key = lambda cs: {(c.baga, tuple(sorted(_key_pure(x, {}) for x in c.atoms)))
                          for c in cs}
        return key(a) == key(b)

    # -- driver ----------------------------------------------------------------

    def run(self, preds: Optional[list[str]] = None):
        names = preds if preds is not None else list(self.env.preds)
        for scc in _sccs(self.env, names):
            declared = [p for p in scc if self.env.preds[p].declared_inv is not None]
            if len(declared) == len(scc):
                for p in scc:
                    self._install_declared(p)
                for p in scc:
                    self._check_declared(p)
                continue
            self._infer_scc(scc)

    def _install_declared(self, p: str):
        cases = []
        for ic in self.env.preds[p].declared_inv:
            atoms = []
            for a in conjuncts(nnf(ic.pure)):
                atoms.extend(_split_eq(a))
            cases.append(_Case(frozenset(ic.baga), tuple(atoms)))
        self.table.set(p, cases, "declared")

    def _check_declared(self, p: str):
        pd = self.env.preds[p]
        keep = set(pd.params)
        decl = self.table.cases(p)
        for i, br in enumerate(pd.body.disjuncts):
            for case in self.abstract_conj(normalize(br), {}, keep):
                got = _case_formula(case)
                if self.solver.is_sat(got).is_unsat():
                    continue  # branch-case infeasible
                covered = False
                for d in decl:
                    if not (d.baga <= case.baga):
                        continue
                    v, _ = self.solver.implies(got, _case_formula(d))
                    if v == pr.VALID:
                        covered = True
                        break
                if not covered:
                    raise InvariantUnsound(p, i)

    def _infer_scc(self, scc: list[str]):
        cur: dict[str, list[_Case]] = {p: [] for p in scc}
        keeps = {p: set(self.env.preds[p].params) for p in scc}
        prev: dict[str, list[_Case]] = {p: [] for p in scc}
        it = 0
        extra = 6
        while True:
            it += 1
            new: dict[str, list[_Case]] = {}
            for p in scc:
                branch_cases: list[_Case] = []
                for br in self.env.preds[p].body.disjuncts:
                    branch_cases.extend(
                        self.abstract_conj(normalize(br),
                                           {q: tuple(cur[q]) for q in scc},
                                           keeps[p]))
                new[p] = self._join(list(cur[p]), branch_cases)
            if all(self._same(new[p], cur[p]) for p in scc):
                cur = new
                break
            if it == self.max_iters:
                new = {p: self._widen(cur[p], new[p]) for p in scc}
            elif it > self.max_iters:
                extra -= 1
                if extra == 0:  # final fallback: keep pointer skeleton only
                    new = {p: [_Case(c.baga,
                                     tuple(a for a in c.atoms if _is_ptr_atom(a)))
                               for c in new[p]] for p in scc}
                if extra < -2:
                    break
            prev, cur = cur, new
        for p in scc:
            self.table.set(p, cur[p], "inferred")


def _subst_linear(a: Pure, v: Var, rest: LinTerm) -> Pure:
    if isinstance(a, Cmp):
        c = a.term.coeff(v)
        if c == 0:
            return a
        t = a.term.drop(v).add(rest.scale(c))
        return eq0(t) if a.op == "=" else le0(t)
    if isinstance(a, Not):
        inner = _subst_linear(a.arg, v, rest)
        return pnot(inner)
    if isinstance(a, (And, Or)):
        parts = [_subst_linear(g, v, rest) for g in a.args]
        return pand(*parts) if isinstance(a, And) else por(*parts)
    return a


def _sccs(env: PredEnv, names: list[str]) -> list[list[str]]:
    """Tarjan SCCs of the predicate dependency graph, bottom-up order."""
    graph: dict[str, set[str]] = {}
    for p in names:
        deps: set[str] = set()
        for d in env.preds[p].body.disjuncts:
            for a in d.heap:
                if isinstance(a, PredInst) and a.pred in env.preds:
                    deps.add(a.pred)
        graph[p] = deps
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on: set[str] = set()
    out: list[list[str]] = []
    counter = [0]

    def strongconnect(v: str):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on.add(v)
        for w in sorted(graph.get(v, ())):
            if w not in graph:
                continue
            if w not in index:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(sorted(comp))

    for v in sorted(graph):
        if v not in index:
            strongconnect(v)
    return out


def infer_invariants(env: PredEnv, solver: pr.Solver, max_iters: int = 3,
                     preds: Optional[list[str]] = None,
                     table: Optional[InvariantTable] = None) -> InvariantTable:
    """Invariant table for every predicate (or just `preds`, extending
    `table` in place for incremental use with synthesized definitions)."""
    inf = _Inference(env, solver, max_iters)
    if table is not None:
        inf.table = table
    inf.run(preds)
    return inf.table


# ---------------------------------------------------------------------------
# XPure abstraction

XPURE_CASE_CAP = 64


def xpure(heap, pure_part: Pure, table: InvariantTable, env: PredEnv,
          strict_unknown: bool = True) -> Pure:
    """Sound pure over-approximation of `heap /\\ pure_part`.

    Unknown instances raise AbstractionUnsupported unless strict_unknown is
    False, in which case they contribute no information (still sound)."""
    prods: list[tuple[frozenset, list[Pure]]] = [(frozenset(), [])]
    for atom in heap:
        if isinstance(atom, UnknownInst):
            if strict_unknown:
                raise AbstractionUnsupported(atom.name)
            continue
        if isinstance(atom, PointsTo):
            options = [(frozenset([atom.root]), [])]
        else:
            cases = table.cases(atom.pred)
            params = env.preds[atom.pred].params
            rho = dict(zip(params, atom.args))
            if len(cases) * len(prods) > XPURE_CASE_CAP and len(cases) > 1:
                cases = (_hull_cases(cases),)
            options = []
            for case in cases:
                bag: set = set()
                ok = True
                for b in case.baga:
                    t = rho.get(b, b)
                    if isinstance(t, (Null, IntConst)) or t in bag:
                        ok = False
                        break
                    bag.add(t)
                if not ok:
                    continue
                inst = [subst_pure(a, rho) for a in case.atoms]
                if any(isinstance(a, PFalse) for a in inst):
                    continue
                options.append((frozenset(bag),
                                [a for a in inst if not isinstance(a, PTrue)]))
            if not options:
                return FALSE
        nxt = []
        for b1, p1 in prods:
            for b2, p2 in options:
                if b1 & b2:
                    continue
                nxt.append((b1 | b2, p1 + p2))
        prods = nxt
        if not prods:
            return FALSE
        if len(prods) > XPURE_CASE_CAP:
            prods = _hull_products(prods)
    disjuncts = []
    for bag, atoms in prods:
        disjuncts.append(pand(baga_facts(bag), *atoms, pure_part))
    return por(*disjuncts)


def _hull_cases(cases) -> _Case:
    bag = frozenset.intersection(*[c.baga for c in cases])
    return _Case(bag, (por(*[pand(*c.atoms) for c in cases]),))


def _hull_products(prods):
    bag = frozenset.intersection(*[b for b, _ in prods])
    return [(bag, [por(*[pand(*p) for _, p in prods])])]


def xpure_conj(c: Conj, table: InvariantTable, env: PredEnv,
               strict_unknown: bool = True) -> Pure:
    return xpure(c.heap, c.pure, table, env, strict_unknown)
