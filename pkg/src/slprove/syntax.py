"""Abstract syntax for symbolic heaps and pure formulas.

Values of every type here are immutable after construction; sharing between
threads is safe.  Fresh-name supply lives in :class:`PredEnv` and uses a
lock-protected counter.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Union

INT = "int"
ANYPTR = "_any"  # pointer of unknown data type (only compared to null)

ROOT_NAME = "root"


class SubstitutionSortError(Exception):
    """Raised when a substitution does not preserve sorts."""


class SemanticError(Exception):
    """Name resolution / arity / sort errors outside the lexer."""


# ---------------------------------------------------------------------------
# Variables and constant arguments


@dataclass(frozen=True)
class Var:
    name: str
    sort: str = INT  # 'int' or a data-type name, or ANYPTR

    def is_ptr(self) -> bool:
        return self.sort != INT

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Null:
    def __repr__(self) -> str:
        return "null"


@dataclass(frozen=True)
class IntConst:
    value: int

    def __repr__(self) -> str:
        return str(self.value)


NULL = Null()

AtomArg = Union[Var, Null, IntConst]


def sorts_compatible(s1: str, s2: str) -> bool:
    if s1 == s2:
        return True
    if ANYPTR in (s1, s2):
        return s1 != INT and s2 != INT
    return False


def arg_sort(a: AtomArg) -> str:
    if isinstance(a, Var):
        return a.sort
    if isinstance(a, Null):
        return ANYPTR
    return INT


# ---------------------------------------------------------------------------
# Linear terms: sum of coeff*var plus an integer constant.  Pointer variables
# are encoded as integers with null = 0, so one term type serves both sorts.


@dataclass(frozen=True)
class LinTerm:
    coeffs: tuple[tuple[Var, int], ...]  # sorted by var name, no zeros
    const: int = 0

    @staticmethod
    def of(coeffs: Mapping[Var, int] | None = None, const: int = 0) -> "LinTerm":
        items = []
        if coeffs:
            for v, c in coeffs.items():
                if c != 0:
                    items.append((v, c))
        items.sort(key=lambda p: p[0].name)
        return LinTerm(tuple(items), const)

    @staticmethod
    def var(v: Var) -> "LinTerm":
        return LinTerm(((v, 1),), 0)

    @staticmethod
    def num(k: int) -> "LinTerm":
        return LinTerm((), k)

    @staticmethod
    def of_arg(a: AtomArg) -> "LinTerm":
        if isinstance(a, Var):
            return LinTerm.var(a)
        if isinstance(a, Null):
            return LinTerm.num(0)
        return LinTerm.num(a.value)

    def as_dict(self) -> dict[Var, int]:
        return dict(self.coeffs)

    def add(self, other: "LinTerm") -> "LinTerm":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return LinTerm.of(d, self.const + other.const)

    def neg(self) -> "LinTerm":
        return LinTerm(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def sub(self, other: "LinTerm") -> "LinTerm":
        return self.add(other.neg())

    def scale(self, k: int) -> "LinTerm":
        if k == 0:
            return LinTerm.num(0)
        return LinTerm(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def plus_const(self, k: int) -> "LinTerm":
        return LinTerm(self.coeffs, self.const + k)

    def coeff(self, v: Var) -> int:
        for w, c in self.coeffs:
            if w == v:
                return c
        return 0

    def drop(self, v: Var) -> "LinTerm":
        return LinTerm(tuple((w, c) for w, c in self.coeffs if w != v), self.const)

    def is_const(self) -> bool:
        return not self.coeffs

    def vars(self) -> set[Var]:
        return {v for v, _ in self.coeffs}

    def subst(self, rho: Mapping[Var, AtomArg]) -> "LinTerm":
        d: dict[Var, int] = {}
        const = self.const
        for v, c in self.coeffs:
            t = rho.get(v)
            if t is None:
                d[v] = d.get(v, 0) + c
            elif isinstance(t, Var):
                d[t] = d.get(t, 0) + c
            elif isinstance(t, Null):
                pass  # null = 0
            else:
                const += c * t.value
        return LinTerm.of(d, const)


# ---------------------------------------------------------------------------
# Pure formulas.  Comparison atoms are canonicalized to "term = 0" and
# "term <= 0"; divisibility atoms appear only inside the solver.


class Pure:
    __slots__ = ()


@dataclass(frozen=True)
class PTrue(Pure):
    pass


@dataclass(frozen=True)
class PFalse(Pure):
    pass


TRUE = PTrue()
FALSE = PFalse()


@dataclass(frozen=True)
class Cmp(Pure):
    op: str  # '=' or '<='
    term: LinTerm


@dataclass(frozen=True)
class Dvd(Pure):
    modulus: int  # >= 2
    term: LinTerm


@dataclass(frozen=True)
class PredAtom(Pure):
    """Unknown pure predicate instance p(args)."""

    name: str
    args: tuple[AtomArg, ...]


@dataclass(frozen=True)
class Not(Pure):
    arg: Pure


@dataclass(frozen=True)
class And(Pure):
    args: tuple[Pure, ...]


@dataclass(frozen=True)
class Or(Pure):
    args: tuple[Pure, ...]


@dataclass(frozen=True)
class Exists(Pure):
    var: Var
    body: Pure


@dataclass(frozen=True)
class Forall(Pure):
    var: Var
    body: Pure


def eq0(t: LinTerm) -> Pure:
    if t.is_const():
        return TRUE if t.const == 0 else FALSE
    if t.coeffs[0][1] < 0:
        t = t.neg()
    return Cmp("=", t)


def le0(t: LinTerm) -> Pure:
    if t.is_const():
        return TRUE if t.const <= 0 else FALSE
    return Cmp("<=", t)


def eq(a: AtomArg, b: AtomArg) -> Pure:
    return eq0(LinTerm.of_arg(a).sub(LinTerm.of_arg(b)))


def neq(a: AtomArg, b: AtomArg) -> Pure:
    return pnot(eq(a, b))


def le(a: LinTerm, b: LinTerm) -> Pure:
    return le0(a.sub(b))


def lt(a: LinTerm, b: LinTerm) -> Pure:
    return le0(a.sub(b).plus_const(1))


def pnot(f: Pure) -> Pure:
    if isinstance(f, PTrue):
        return FALSE
    if isinstance(f, PFalse):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def pand(*fs: Pure) -> Pure:
    out: list[Pure] = []
    seen: set[Pure] = set()
    for f in fs:
        parts = f.args if isinstance(f, And) else (f,)
        for g in parts:
            if isinstance(g, PTrue):
                continue
            if isinstance(g, PFalse):
                return FALSE
            if g not in seen:
                seen.add(g)
                out.append(g)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def por(*fs: Pure) -> Pure:
    out: list[Pure] = []
    seen: set[Pure] = set()
    for f in fs:
        parts = f.args if isinstance(f, Or) else (f,)
        for g in parts:
            if isinstance(g, PFalse):
                continue
            if isinstance(g, PTrue):
                return TRUE
            if g not in seen:
                seen.add(g)
                out.append(g)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def conjuncts(f: Pure) -> list[Pure]:
    if isinstance(f, And):
        out: list[Pure] = []
        for g in f.args:
            out.extend(conjuncts(g))
        return out
    if isinstance(f, PTrue):
        return []
    return [f]


def pure_vars(f: Pure) -> set[Var]:
    if isinstance(f, (PTrue, PFalse)):
        return set()
    if isinstance(f, Cmp):
        return f.term.vars()
    if isinstance(f, Dvd):
        return f.term.vars()
    if isinstance(f, PredAtom):
        return {a for a in f.args if isinstance(a, Var)}
    if isinstance(f, Not):
        return pure_vars(f.arg)
    if isinstance(f, (And, Or)):
        out: set[Var] = set()
        for g in f.args:
            out |= pure_vars(g)
        return out
    if isinstance(f, (Exists, Forall)):
        return pure_vars(f.body) - {f.var}
    raise TypeError(f"not a pure formula: {f!r}")


def pure_unknowns(f: Pure) -> set[str]:
    if isinstance(f, PredAtom):
        return {f.name}
    if isinstance(f, Not):
        return pure_unknowns(f.arg)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for g in f.args:
            out |= pure_unknowns(g)
        return out
    if isinstance(f, (Exists, Forall)):
        return pure_unknowns(f.body)
    return set()


def subst_pure(f: Pure, rho: Mapping[Var, AtomArg], fresh=None) -> Pure:
    """Simultaneous, capture-avoiding substitution on a pure formula."""
    if isinstance(f, (PTrue, PFalse)):
        return f
    if isinstance(f, Cmp):
        g = f.term.subst(rho)
        return eq0(g) if f.op == "=" else le0(g)
    if isinstance(f, Dvd):
        t = f.term.subst(rho)
        if t.is_const():
            return TRUE if t.const % f.modulus == 0 else FALSE
        return Dvd(f.modulus, t)
    if isinstance(f, PredAtom):
        return PredAtom(f.name, tuple(_subst_arg(a, rho) for a in f.args))
    if isinstance(f, Not):
        return pnot(subst_pure(f.arg, rho, fresh))
    if isinstance(f, And):
        return pand(*(subst_pure(g, rho, fresh) for g in f.args))
    if isinstance(f, Or):
        return por(*(subst_pure(g, rho, fresh) for g in f.args))
    if isinstance(f, (Exists, Forall)):
        rho2 = {v: t for v, t in rho.items() if v != f.var}
        captured = any(
            isinstance(t, Var) and t == f.var for t in rho2.values()
        )
        var = f.var
        body = f.body
        if captured:
            nv = (fresh or _default_fresh)(f.var)
            body = subst_pure(body, {f.var: nv}, fresh)
            var = nv
        body = subst_pure(body, rho2, fresh)
        return Exists(var, body) if isinstance(f, Exists) else Forall(var, body)
    raise TypeError(f"not a pure formula: {f!r}")


_anon = itertools.count()


def _default_fresh(v: Var) -> Var:
    return Var(f"{v.name}_r{next(_anon)}", v.sort)


def _subst_arg(a: AtomArg, rho: Mapping[Var, AtomArg]) -> AtomArg:
    if isinstance(a, Var) and a in rho:
        t = rho[a]
        if not sorts_compatible(arg_sort(a), arg_sort(t)):
            raise SubstitutionSortError(f"{a.name}:{a.sort} -> {t!r}")
        return t
    return a


# ---------------------------------------------------------------------------
# Heap atoms.  Every atom carries a session-unique id; origin records the
# atom it was unfolded from (descendant tracking for the cyclic-proof trace
# condition).  ucount counts unfoldings along the lineage; ldepth counts
# lemma applications along the lineage.


_aid_counter = itertools.count(1)
_aid_lock = threading.Lock()


def next_aid() -> int:
    with _aid_lock:
        return next(_aid_counter)


@dataclass(frozen=True)
class PointsTo:
    root: Var
    data: str
    args: tuple[AtomArg, ...]
    aid: int = field(default_factory=next_aid, compare=False)
    origin: Optional[int] = field(default=None, compare=False)
    ucount: int = field(default=0, compare=False)
    ldepth: int = field(default=0, compare=False)

    def vars(self) -> set[Var]:
        return {self.root} | {a for a in self.args if isinstance(a, Var)}


@dataclass(frozen=True)
class PredInst:
    pred: str
    args: tuple[AtomArg, ...]
    aid: int = field(default_factory=next_aid, compare=False)
    origin: Optional[int] = field(default=None, compare=False)
    ucount: int = field(default=0, compare=False)
    ldepth: int = field(default=0, compare=False)

    @property
    def root(self) -> Var:
        a = self.args[0]
        if not isinstance(a, Var):
            raise SemanticError(f"{self.pred} root argument is not a variable")
        return a

    def vars(self) -> set[Var]:
        return {a for a in self.args if isinstance(a, Var)}


@dataclass(frozen=True)
class UnknownInst:
    """Second-order heap variable U(args); hashed flags guide abduction."""

    name: str
    args: tuple[AtomArg, ...]
    hashed: tuple[bool, ...]
    aid: int = field(default_factory=next_aid, compare=False)
    origin: Optional[int] = field(default=None, compare=False)
    ucount: int = field(default=0, compare=False)
    ldepth: int = field(default=0, compare=False)

    def vars(self) -> set[Var]:
        return {a for a in self.args if isinstance(a, Var)}


HeapAtom = Union[PointsTo, PredInst, UnknownInst]


def atom_root(a: HeapAtom) -> Optional[Var]:
    if isinstance(a, PointsTo):
        return a.root
    if isinstance(a, PredInst):
        r = a.args[0]
        return r if isinstance(r, Var) else None
    return None


def subst_atom(a: HeapAtom, rho: Mapping[Var, AtomArg]) -> HeapAtom:
    if isinstance(a, PointsTo):
        r = _subst_arg(a.root, rho)
        if not isinstance(r, Var):
            raise SubstitutionSortError("points-to root replaced by constant")
        return replace(a, root=r, args=tuple(_subst_arg(x, rho) for x in a.args))
    if isinstance(a, PredInst):
        return replace(a, args=tuple(_subst_arg(x, rho) for x in a.args))
    return replace(a, args=tuple(_subst_arg(x, rho) for x in a.args))


# ---------------------------------------------------------------------------
# Symbolic-heap conjuncts and formulas


@dataclass(frozen=True)
class Conj:
    exists: tuple[Var, ...]
    heap: tuple[HeapAtom, ...]
    pure: Pure

    def free_vars(self) -> set[Var]:
        out: set[Var] = set()
        for a in self.heap:
            out |= a.vars()
        out |= pure_vars(self.pure)
        return out - set(self.exists)

    def all_vars(self) -> set[Var]:
        return self.free_vars() | set(self.exists)


@dataclass(frozen=True)
class Formula:
    disjuncts: tuple[Conj, ...]

    def __post_init__(self):
        if not self.disjuncts:
            raise SemanticError("formula must have at least one disjunct")

    def free_vars(self) -> set[Var]:
        out: set[Var] = set()
        for d in self.disjuncts:
            out |= d.free_vars()
        return out


def conj(exists: Iterable[Var] = (), heap: Iterable[HeapAtom] = (),
         pure: Pure = TRUE) -> Conj:
    return Conj(tuple(exists), tuple(heap), pure)


def emp(pure: Pure = TRUE) -> Conj:
    return Conj((), (), pure)


def substitute(f, rho: Mapping[Var, AtomArg], fresh=None):
    """Simultaneous substitution; bound variables are alpha-renamed away
    from capture.  Works on Conj, Formula and Pure."""
    if isinstance(f, Formula):
        return Formula(tuple(substitute(d, rho, fresh) for d in f.disjuncts))
    if isinstance(f, Conj):
        rho2 = {v: t for v, t in rho.items() if v not in f.exists}
        targets = {t for t in rho2.values() if isinstance(t, Var)}
        ex = list(f.exists)
        ren: dict[Var, AtomArg] = {}
        for i, v in enumerate(ex):
            if v in targets:
                nv = (fresh or _default_fresh)(v)
                ren[v] = nv
                ex[i] = nv
        heap = f.heap
        pure = f.pure
        if ren:
            heap = tuple(subst_atom(a, ren) for a in heap)
            pure = subst_pure(pure, ren, fresh)
        return Conj(
            tuple(ex),
            tuple(subst_atom(a, rho2) for a in heap),
            subst_pure(pure, rho2, fresh),
        )
    if isinstance(f, Pure):
        return subst_pure(f, rho, fresh)
    raise TypeError(f"cannot substitute in {type(f).__name__}")


def free_vars(f) -> set[Var]:
    if isinstance(f, (Conj, Formula)):
        return f.free_vars()
    if isinstance(f, Pure):
        return pure_vars(f)
    raise TypeError(f"no free variables for {type(f).__name__}")


# ---------------------------------------------------------------------------
# Normalization


def _nnf(f: Pure, neg: bool = False) -> Pure:
    if isinstance(f, PTrue):
        return FALSE if neg else TRUE
    if isinstance(f, PFalse):
        return TRUE if neg else FALSE
    if isinstance(f, Cmp):
        if not neg:
            return eq0(f.term) if f.op == "=" else le0(f.term)
        if f.op == "<=":  # not(t<=0)  <=>  -t+1 <= 0
            return le0(f.term.neg().plus_const(1))
        # not(t=0)  <=>  t+1<=0 or -t+1<=0
        return por(le0(f.term.plus_const(1)), le0(f.term.neg().plus_const(1)))
    if isinstance(f, (Dvd, PredAtom)):
        return pnot(f) if neg else f
    if isinstance(f, Not):
        return _nnf(f.arg, not neg)
    if isinstance(f, And):
        parts = tuple(_nnf(g, neg) for g in f.args)
        return por(*parts) if neg else pand(*parts)
    if isinstance(f, Or):
        parts = tuple(_nnf(g, neg) for g in f.args)
        return pand(*parts) if neg else por(*parts)
    if isinstance(f, Exists):
        body = _nnf(f.body, neg)
        return Forall(f.var, body) if neg else Exists(f.var, body)
    if isinstance(f, Forall):
        body = _nnf(f.body, neg)
        return Exists(f.var, body) if neg else Forall(f.var, body)
    raise TypeError(f"not a pure formula: {f!r}")


def nnf(f: Pure) -> Pure:
    return _nnf(f, False)


def _arg_key(a: AtomArg, bound: set[Var]) -> str:
    if isinstance(a, Var):
        return "?" if a in bound else a.name
    return repr(a)


def _atom_sort_key(a: HeapAtom, bound: set[Var]):
    if isinstance(a, PointsTo):
        return (0, _arg_key(a.root, bound), a.data,
                tuple(_arg_key(x, bound) for x in a.args), a.aid)
    if isinstance(a, PredInst):
        return (1, _arg_key(a.args[0], bound), a.pred,
                tuple(_arg_key(x, bound) for x in a.args), a.aid)
    return (2, a.name, tuple(_arg_key(x, bound) for x in a.args), a.aid)


def normalize(c: Conj) -> Conj:
    """Canonical form: heap sorted, NNF pure with trivial atoms dropped,
    unused existentials removed.  Idempotent."""
    pure = nnf(c.pure)
    bound = set(c.exists)
    heap = tuple(sorted(c.heap, key=lambda a: _atom_sort_key(a, bound)))
    used: set[Var] = set()
    for a in heap:
        used |= a.vars()
    used |= pure_vars(pure)
    ex = tuple(v for v in c.exists if v in used)
    return Conj(ex, heap, pure)


def normalize_formula(f: Formula) -> Formula:
    return Formula(tuple(normalize(d) for d in f.disjuncts))


# ---------------------------------------------------------------------------
# Alpha-equivalence keys (bound-name independence); heap-atom metadata
# (ids, origins, counters) is ignored.


def _key_pure(f: Pure, num: dict[Var, str]) -> tuple:
    if isinstance(f, (PTrue, PFalse)):
        return (type(f).__name__,)
    if isinstance(f, Cmp):
        return ("C", f.op, tuple((num.get(v, v.name), c) for v, c in f.term.coeffs),
                f.term.const)
    if isinstance(f, Dvd):
        return ("D", f.modulus, tuple((num.get(v, v.name), c) for v, c in f.term.coeffs),
                f.term.const)
    if isinstance(f, PredAtom):
        return ("P", f.name, tuple(_key_arg(a, num) for a in f.args))
    if isinstance(f, Not):
        return ("N", _key_pure(f.arg, num))
    if isinstance(f, (And, Or)):
        tag = "A" if isinstance(f, And) else "O"
        return (tag, tuple(sorted(_key_pure(g, num) for g in f.args)))
    if isinstance(f, (Exists, Forall)):
        tag = "E" if isinstance(f, Exists) else "F"
        n2 = dict(num)
        n2[f.var] = f"b{len(n2)}"
        return (tag, _key_pure(f.body, n2))
    raise TypeError(repr(f))


def _key_arg(a: AtomArg, num: dict[Var, str]):
    if isinstance(a, Var):
        return num.get(a, a.name)
    return repr(a)


def alpha_key(c: Conj) -> tuple:
    c = normalize(c)
    bound = set(c.exists)
    num: dict[Var, str] = {}
    for a in c.heap:
        roots = [atom_root(a)] if atom_root(a) is not None else []
        for v in roots + [x for x in a.args if isinstance(x, Var)]:
            if v in bound and v not in num:
                num[v] = f"e{len(num)}"
    for v in sorted(pure_vars(c.pure) & bound, key=lambda v: v.name):
        if v not in num:
            num[v] = f"e{len(num)}"
    heap_keys = []
    for a in c.heap:
        if isinstance(a, PointsTo):
            heap_keys.append(("pt", _key_arg(a.root, num), a.data,
                              tuple(_key_arg(x, num) for x in a.args)))
        elif isinstance(a, PredInst):
            heap_keys.append(("pi", a.pred, tuple(_key_arg(x, num) for x in a.args)))
        else:
            heap_keys.append(("ui", a.name, tuple(_key_arg(x, num) for x in a.args),
                              a.hashed))
    return (tuple(heap_keys), _key_pure(nnf(c.pure), num))


def alpha_equal(c1: Conj, c2: Conj) -> bool:
    return alpha_key(c1) == alpha_key(c2)


# ---------------------------------------------------------------------------
# Declarations and environment


@dataclass(frozen=True)
class DataDecl:
    name: str
    fields: tuple[tuple[str, str], ...]  # (field name, 'int' | data name)

    def __post_init__(self):
        names = [f for f, _ in self.fields]
        if len(names) != len(set(names)):
            raise SemanticError(f"duplicate field in data {self.name}")


@dataclass(frozen=True)
class InvCase:
    baga: tuple[Var, ...]  # definitely-allocated, pairwise-distinct, non-null
    pure: Pure


@dataclass(frozen=True)
class PredDef:
    name: str
    params: tuple[Var, ...]  # first param is the root by convention
    body: Formula
    declared_inv: Optional[tuple[InvCase, ...]] = None

    def instantiate(self, args: tuple[AtomArg, ...], freshen) -> Formula:
        """Body with params replaced by args and locals freshened."""
        if len(args) != len(self.params):
            raise SemanticError(f"{self.name} arity mismatch")
        out = []
        for d in self.body.disjuncts:
            ren = {v: freshen(v) for v in d.exists}
            d2 = Conj(
                tuple(ren[v] for v in d.exists),
                tuple(subst_atom(a, ren) for a in d.heap),
                subst_pure(d.pure, ren),
            )
            rho = dict(zip(self.params, args))
            out.append(substitute(Conj((), d2.heap, d2.pure), rho))
        return Formula(tuple(out))


class PredEnv:
    """Data and predicate declarations plus the session fresh-name supply."""

    def __init__(self):
        self.datas: dict[str, DataDecl] = {}
        self.preds: dict[str, PredDef] = {}
        self._used: set[str] = set()
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def add_data(self, d: DataDecl):
        for _, fsort in d.fields:
            if fsort != INT and fsort not in self.datas and fsort != d.name:
                raise SemanticError(f"unknown field type {fsort} in data {d.name}")
        self.datas[d.name] = d
        self._used.add(d.name)

    def add_pred(self, p: PredDef):
        self.preds[p.name] = p
        self._used.add(p.name)
        for v in p.params:
            self._used.add(v.name)

    def note_name(self, name: str):
        self._used.add(name)

    def fresh(self, base: str, sort: str) -> Var:
        base = base.split("_#")[0] or "v"
        with self._lock:
            while True:
                name = f"{base}_#{next(self._counter)}"
                if name not in self._used:
                    self._used.add(name)
                    return Var(name, sort)

    def freshen(self, v: Var) -> Var:
        return self.fresh(v.name, v.sort)

    def field_sorts(self, data: str) -> tuple[str, ...]:
        return tuple(s for _, s in self.datas[data].fields)

    def check_conj(self, c: Conj):
        for a in c.heap:
            if isinstance(a, PointsTo):
                if a.data not in self.datas:
                    raise SemanticError(f"unknown data type {a.data}")
                if len(a.args) != len(self.datas[a.data].fields):
                    raise SemanticError(f"bad arity for {a.root.name}::{a.data}")
            elif isinstance(a, PredInst):
                if a.pred not in self.preds:
                    raise SemanticError(f"unknown predicate {a.pred}")
                if len(a.args) != len(self.preds[a.pred].params):
                    raise SemanticError(f"bad arity for {a.pred}")
