"""Hash-consed first-order terms with matching, unification and renaming.

Terms are interned: constructing the same variable or application twice
yields the same object, so equality is identity and hashing is O(1). All
traversals over unbounded term depth are iterative; rewriting can produce
terms several hundred constructors deep.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping


class PositionError(ValueError):
    """Raised when a position does not address a subterm."""


class Symbol:
    """A function symbol with a fixed arity."""

    __slots__ = ("name", "arity")
    _cache: dict[tuple[str, int], "Symbol"] = {}

    def __new__(cls, name: str, arity: int) -> "Symbol":
        key = (name, arity)
        sym = cls._cache.get(key)
        if sym is None:
            sym = object.__new__(cls)
            sym.name = name
            sym.arity = arity
            cls._cache[key] = sym
        return sym

    def __repr__(self) -> str:
        return f"{self.name}/{self.arity}"

    # interned: identity equality, default hash
    def __reduce__(self):
        return (Symbol, (self.name, self.arity))


class Term:
    """Base class for Var and App."""

    __slots__ = ()

    size: int

    def __str__(self) -> str:
        return term_to_str(self)

    def __repr__(self) -> str:
        return term_to_str(self)


class Var(Term):
    __slots__ = ("name", "size")
    _cache: dict[str, "Var"] = {}

    def __new__(cls, name: str) -> "Var":
        v = cls._cache.get(name)
        if v is None:
            v = object.__new__(cls)
            v.name = name
            v.size = 1
            cls._cache[name] = v
        return v

    def __reduce__(self):
        return (Var, (self.name,))


class App(Term):
    __slots__ = ("sym", "args", "size")
    _cache: dict[tuple, "App"] = {}

    def __new__(cls, sym: Symbol, args: Iterable[Term] = ()) -> "App":
        args = tuple(args)
        if len(args) != sym.arity:
            raise ValueError(f"arity mismatch: {sym.name} expects {sym.arity} arguments, got {len(args)}")
        key = (sym, args)
        t = cls._cache.get(key)
        if t is None:
            t = object.__new__(cls)
            t.sym = sym
            t.args = args
            t.size = 1 + sum(a.size for a in args)
            cls._cache[key] = t
        return t

    def __reduce__(self):
        return (App, (self.sym, self.args))


Subst = Mapping[Var, Term]
Pos = tuple[int, ...]


def term_to_str(t: Term, explicit_nullary: bool = False) -> str:
    """Render a term. Nullary applications print bare unless explicit_nullary."""
    parts: list[str] = []
    # (term, None) renders a node, (None, text) emits literal text
    work: list[tuple[Term | None, str | None]] = [(t, None)]
    while work:
        node, text = work.pop()
        if text is not None:
            parts.append(text)
            continue
        if isinstance(node, Var):
            parts.append(node.name)
        else:
            assert isinstance(node, App)
            if not node.args:
                parts.append(node.sym.name + ("()" if explicit_nullary else ""))
                continue
            parts.append(node.sym.name + "(")
            work.append((None, ")"))
            for i in range(len(node.args) - 1, -1, -1):
                work.append((node.args[i], None))
                if i:
                    work.append((None, ","))
    return "".join(parts)


def positions(t: Term) -> list[Pos]:
    """All positions of t in preorder; the root is the empty tuple, children count from 1."""
    out: list[Pos] = []
    stack: list[tuple[Term, Pos]] = [(t, ())]
    while stack:
        node, pos = stack.pop()
        out.append(pos)
        if isinstance(node, App):
            for i in range(len(node.args) - 1, -1, -1):
                stack.append((node.args[i], pos + (i + 1,)))
    # stack order already yields preorder for the left-to-right convention
    return out


def subterm_at(t: Term, pos: Pos) -> Term:
    cur = t
    for i in pos:
        if not isinstance(cur, App) or not 1 <= i <= len(cur.args):
            raise PositionError(f"position out of range: {pos} in {term_to_str(t)}")
        cur = cur.args[i - 1]
    return cur


def replace_at(t: Term, pos: Pos, new: Term) -> Term:
    """Replace the subterm of t at pos by new."""
    spine: list[App] = []
    cur = t
    for i in pos:
        if not isinstance(cur, App) or not 1 <= i <= len(cur.args):
            raise PositionError(f"position out of range: {pos} in {term_to_str(t)}")
        spine.append(cur)
        cur = cur.args[i - 1]
    result = new
    for parent, i in zip(reversed(spine), reversed(pos)):
        args = parent.args[: i - 1] + (result,) + parent.args[i:]
        result = App(parent.sym, args)
    return result


def iter_subterms(t: Term) -> Iterator[Term]:
    """All subterm occurrences in preorder (with repetitions)."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, App):
            stack.extend(reversed(node.args))


def vars_of(t: Term) -> set[Var]:
    out: set[Var] = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node)
        else:
            stack.extend(node.args)
    return out


def var_counts(t: Term) -> dict[Var, int]:
    """Multiset of variable occurrences."""
    out: dict[Var, int] = {}
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out[node] = out.get(node, 0) + 1
        else:
            stack.extend(node.args)
    return out


def funs_of(t: Term) -> set[Symbol]:
    out: set[Symbol] = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, App):
            out.add(node.sym)
            stack.extend(node.args)
    return out


def is_ground(t: Term) -> bool:
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            return False
        stack.extend(node.args)
    return True


def apply_subst(t: Term, subst: Subst) -> Term:
    if not subst:
        return t
    memo: dict[Term, Term] = {}
    work: list[tuple[Term, bool]] = [(t, False)]
    while work:
        node, ready = work.pop()
        if node in memo:
            continue
        if isinstance(node, Var):
            memo[node] = subst.get(node, node)
        elif ready:
            args = tuple(memo[a] for a in node.args)
            memo[node] = node if all(a is b for a, b in zip(args, node.args)) else App(node.sym, args)
        else:
            work.append((node, True))
            for a in node.args:
                if a not in memo:
                    work.append((a, False))
    return memo[t]


def match(pattern: Term, subject: Term) -> dict[Var, Term] | None:
    """Substitution s with pattern.s == subject, or None."""
    binding: dict[Var, Term] = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = binding.get(p)
            if bound is None:
                binding[p] = s
            elif bound is not s:
                return None
        elif isinstance(s, App) and p.sym is s.sym:
            stack.extend(zip(p.args, s.args))
        else:
            return None
    return binding


def _walk(t: Term, subst: dict[Var, Term]) -> Term:
    while isinstance(t, Var):
        nxt = subst.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def _occurs(v: Var, t: Term, subst: dict[Var, Term]) -> bool:
    stack = [t]
    while stack:
        node = _walk(stack.pop(), subst)
        if node is v:
            return True
        if isinstance(node, App):
            stack.extend(node.args)
    return False


def unify(s: Term, t: Term) -> dict[Var, Term] | None:
    """Most general unifier with occurs check, fully resolved, or None."""
    subst: dict[Var, Term] = {}
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a = _walk(a, subst)
        b = _walk(b, subst)
        if a is b:
            continue
        if isinstance(a, Var):
            if _occurs(a, b, subst):
                return None
            subst[a] = b
        elif isinstance(b, Var):
            if _occurs(b, a, subst):
                return None
            subst[b] = a
        elif a.sym is b.sym:
            stack.extend(zip(a.args, b.args))
        else:
            return None
    # resolve triangular bindings so the result applies in one pass
    resolved: dict[Var, Term] = {}
    for v in subst:
        resolved[v] = _resolve(subst[v], subst)
    return resolved


def _resolve(t: Term, subst: dict[Var, Term]) -> Term:
    memo: dict[Term, Term] = {}
    work: list[tuple[Term, bool]] = [(t, False)]
    while work:
        node, ready = work.pop()
        if node in memo:
            continue
        if isinstance(node, Var):
            target = _walk(node, subst)
            if target is node:
                memo[node] = node
            elif isinstance(target, Var):
                memo[node] = target
            elif target in memo:
                memo[node] = memo[target]
            else:
                work.append((node, False))
                work.append((target, False))
        elif ready:
            args = tuple(memo[a] for a in node.args)
            memo[node] = node if all(x is y for x, y in zip(args, node.args)) else App(node.sym, args)
        else:
            work.append((node, True))
            for a in node.args:
                if a not in memo:
                    work.append((a, False))
    return memo[t]


class FreshVars:
    """Generates w0, w1, ... skipping names in avoid."""

    __slots__ = ("_taken", "_next", "_prefix")

    def __init__(self, avoid: Iterable[Var] = (), prefix: str = "w"):
        self._taken = {v.name for v in avoid}
        self._next = 0
        self._prefix = prefix

    def fresh(self) -> Var:
        while True:
            name = f"{self._prefix}{self._next}"
            self._next += 1
            if name not in self._taken:
                self._taken.add(name)
                return Var(name)

    def reserve(self, names: Iterable[str]) -> None:
        self._taken.update(names)


def rename_apart(t: Term, avoid: Iterable[Var]) -> Term:
    """Rename every variable of t away from avoid (and from t's own names).

    Renaming always happens, priming each name until it is unused, so two
    successive calls with overlapping avoid sets never share variables.
    """
    taken = {v.name for v in avoid}
    mapping: dict[Var, Term] = {}
    for v in vars_of(t):
        name = v.name + "'"
        while name in taken:
            name += "'"
        taken.add(name)
        mapping[v] = Var(name)
    return apply_subst(t, mapping)
