"""Term rewrite systems: rules, validation, TPDB-style parsing and printing."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Iterator

from .terms import App, Symbol, Term, Var, funs_of, term_to_str, var_counts, vars_of


class TrsError(ValueError):
    """Raised for structurally invalid rules or systems."""


class TrsSyntaxError(TrsError):
    """Raised by the parser; message carries line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class Rule:
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if isinstance(self.lhs, Var):
            raise TrsError(f"variable left-hand side: {self.lhs}")
        free = vars_of(self.rhs) - vars_of(self.lhs)
        if free:
            names = ", ".join(sorted(v.name for v in free))
            raise TrsError(f"free variable in right-hand side: {names}")

    def __str__(self) -> str:
        return format_rule(self)

    @property
    def root(self) -> Symbol:
        assert isinstance(self.lhs, App)
        return self.lhs.sym

    def is_duplicating(self) -> bool:
        """True if some variable occurs more often in rhs than in lhs."""
        left = var_counts(self.lhs)
        return any(n > left.get(v, 0) for v, n in var_counts(self.rhs).items())


def format_rule(rule: Rule) -> str:
    return f"{term_to_str(rule.lhs, True)} -> {term_to_str(rule.rhs, True)}"


class TRS:
    """An ordered list of rules with derived signature information.

    Rule indices are 1-based everywhere user-facing numbers appear.
    """

    __slots__ = ("rules", "strategy", "signature", "defined", "constructors")

    def __init__(self, rules: Iterable[Rule], strategy: str = "full"):
        self.rules: tuple[Rule, ...] = tuple(rules)
        if strategy not in ("full", "innermost"):
            raise TrsError(f"unknown strategy: {strategy}")
        self.strategy = strategy
        sig: set[Symbol] = set()
        for r in self.rules:
            sig |= funs_of(r.lhs)
            sig |= funs_of(r.rhs)
        self.signature = frozenset(sig)
        self.defined = frozenset(r.root for r in self.rules)
        self.constructors = self.signature - self.defined
        if self.rules and not self._constructor_ground_exists():
            raise TrsError("no constructor constant: ground basic terms do not exist")

    def _constructor_ground_exists(self) -> bool:
        # a ground constructor term exists iff some constructor is inhabited
        inhabited: set[Symbol] = {c for c in self.constructors if c.arity == 0}
        changed = True
        while changed and len(inhabited) < len(self.constructors):
            changed = False
            for c in self.constructors:
                if c not in inhabited and c.arity > 0 and inhabited:
                    # every argument position can reuse any inhabited constructor
                    inhabited.add(c)
                    changed = True
        return bool(inhabited)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def is_duplicating(self) -> bool:
        return any(r.is_duplicating() for r in self.rules)

    def is_basic(self, t: Term) -> bool:
        """Defined root, constructor terms (possibly with variables) below."""
        if not isinstance(t, App) or t.sym not in self.defined:
            return False
        stack = list(t.args)
        while stack:
            node = stack.pop()
            if isinstance(node, App):
                if node.sym in self.defined:
                    return False
                stack.extend(node.args)
        return True

    def variables(self) -> list[Var]:
        seen: set[Var] = set()
        for r in self.rules:
            seen |= vars_of(r.lhs) | vars_of(r.rhs)
        return sorted(seen, key=lambda v: v.name)


def fingerprint(trs: TRS) -> str:
    """Stable content hash of the canonical rendering."""
    return hashlib.sha256(print_trs(trs).encode()).hexdigest()


def print_trs(trs: TRS) -> str:
    lines = []
    names = " ".join(v.name for v in trs.variables())
    lines.append(f"(VAR {names})" if names else "(VAR )")
    if trs.rules:
        lines.append("(RULES")
        for r in trs.rules:
            lines.append("  " + format_rule(r))
        lines.append(")")
    else:
        lines.append("(RULES )")
    if trs.strategy == "innermost":
        lines.append("(STRATEGY INNERMOST)")
    return "\n".join(lines) + "\n"


_SPECIAL = set("(),")


class _Token:
    __slots__ = ("text", "line", "col")

    def __init__(self, text: str, line: int, col: int):
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch in _SPECIAL:
            tokens.append(_Token(ch, line, col))
            col += 1
            i += 1
        else:
            start, startcol = i, col
            while i < n and not text[i].isspace() and text[i] not in _SPECIAL:
                i += 1
                col += 1
            tokens.append(_Token(text[start:i], line, startcol))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", 1, 1)
            raise TrsSyntaxError("unexpected end of input", last.line, last.col + len(last.text))
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise TrsSyntaxError(f"expected '{text}', found '{tok.text}'", tok.line, tok.col)
        return tok


def parse_trs(text: str) -> TRS:
    """Parse sections (VAR ...), (RULES ...), (STRATEGY INNERMOST), (COMMENT ...)."""
    parser = _Parser(_tokenize(text))
    variables: set[str] = set()
    arities: dict[str, int] = {}
    rules: list[Rule] = []
    strategy = "full"
    saw_rules = False

    def parse_term(tok: _Token) -> Term:
        name = tok.text
        if name in ("(", ")", ",", "->"):
            raise TrsSyntaxError(f"expected a term, found '{name}'", tok.line, tok.col)
        args: list[Term] = []
        nxt = parser.peek()
        if nxt is not None and nxt.text == "(":
            parser.next()
            closing = parser.peek()
            if closing is not None and closing.text == ")":
                parser.next()
            else:
                while True:
                    args.append(parse_term(parser.next()))
                    sep = parser.next()
                    if sep.text == ")":
                        break
                    if sep.text != ",":
                        raise TrsSyntaxError(f"expected ',' or ')', found '{sep.text}'", sep.line, sep.col)
            if name in variables:
                raise TrsSyntaxError(f"variable '{name}' used with arguments", tok.line, tok.col)
        elif name in variables:
            return Var(name)
        known = arities.get(name)
        if known is None:
            arities[name] = len(args)
        elif known != len(args):
            raise TrsSyntaxError(
                f"arity mismatch: '{name}' used with {len(args)} arguments, previously {known}",
                tok.line,
                tok.col,
            )
        return App(Symbol(name, len(args)), args)

    while (tok := parser.peek()) is not None:
        opener = parser.expect("(")
        section = parser.next()
        kind = section.text.upper()
        if kind == "VAR":
            while (tok := parser.next()).text != ")":
                if tok.text in ("(", ","):
                    raise TrsSyntaxError(f"bad variable name '{tok.text}'", tok.line, tok.col)
                variables.add(tok.text)
        elif kind == "RULES":
            saw_rules = True
            while (tok := parser.peek()) is not None and tok.text != ")":
                lhs_tok = parser.next()
                lhs = parse_term(lhs_tok)
                arrow = parser.next()
                if arrow.text != "->":
                    raise TrsSyntaxError(f"expected '->', found '{arrow.text}'", arrow.line, arrow.col)
                rhs = parse_term(parser.next())
                try:
                    rules.append(Rule(lhs, rhs))
                except TrsError as exc:
                    raise TrsSyntaxError(str(exc), lhs_tok.line, lhs_tok.col) from None
            parser.expect(")")
        elif kind == "STRATEGY":
            name = parser.next()
            if name.text.upper() != "INNERMOST":
                raise TrsSyntaxError(f"unsupported strategy '{name.text}'", name.line, name.col)
            strategy = "innermost"
            parser.expect(")")
        elif kind == "COMMENT":
            depth = 1
            while depth:
                tok = parser.next()
                if tok.text == "(":
                    depth += 1
                elif tok.text == ")":
                    depth -= 1
        else:
            raise TrsSyntaxError(f"unknown section '{section.text}'", section.line, section.col)

    if not saw_rules:
        raise TrsSyntaxError("missing (RULES ...) section", 1, 1)
    try:
        return TRS(rules, strategy)
    except TrsError as exc:
        raise TrsSyntaxError(str(exc), 1, 1) from None
