"""Shared systems for the test suite, in TPDB text form.

Each constant is parsed on demand through load(); tests that mutate
nothing may share the cached TRS objects.
"""

from functools import lru_cache

from rtc import TRS, Rule, Symbol, Term, Var, App, parse_trs

DIV = """
(VAR x y)
(RULES
  minus(x, 0) -> x
  minus(s(x), s(y)) -> minus(x, y)
  div(0, s(y)) -> 0
  div(s(x), s(y)) -> s(div(minus(x, y), s(y)))
)
"""

DIFF = """
(VAR x y)
(RULES
  D(c) -> 0
  D(t) -> 1
  D(plus(x, y)) -> plus(D(x), D(y))
  D(minus(x, y)) -> minus(D(x), D(y))
  D(times(x, y)) -> plus(times(y, D(x)), times(x, D(y)))
)
"""

GCD = """
(VAR x y)
(RULES
  le(0, y) -> true
  le(s(x), 0) -> false
  le(s(x), s(y)) -> le(x, y)
  minus(x, 0) -> x
  minus(s(x), s(y)) -> minus(x, y)
  gcd(0, y) -> y
  gcd(s(x), 0) -> s(x)
  gcd(s(x), s(y)) -> if_gcd(le(y, x), s(x), s(y))
  if_gcd(true, s(x), s(y)) -> gcd(minus(x, y), s(y))
  if_gcd(false, s(x), s(y)) -> gcd(minus(y, x), s(x))
)
"""

EXP = """
(VAR x)
(RULES
  exp(0) -> s(0)
  exp(r(x)) -> d(exp(x))
  d(0) -> 0
  d(s(x)) -> s(s(d(x)))
)
"""

TOYAMA = """
(VAR x y)
(RULES
  f(a, b, x) -> f(x, x, x)
  g(x, y) -> x
  g(x, y) -> y
)
"""

SLI_MINUS = """
(VAR x y)
(RULES
  f(s(x)) -> f(minus(x, s(0)))
  minus(x, 0) -> x
  minus(s(x), s(y)) -> minus(x, y)
)
"""

DUP_FD = """
(VAR x y z)
(RULES
  f(s(x), y) -> f(x, d(y, y, y))
  d(0, 0, x) -> x
  d(s(x), s(y), z) -> d(x, y, s(z))
)
"""

LIST = """
(VAR x y z)
(RULES
  f(nil) -> nil
  f(cons(x, y)) -> cons(x, f(g(y, nil)))
  g(nil, z) -> z
  g(cons(x, y), z) -> g(y, cons(x, z))
)
"""

DG1 = """
(VAR x)
(RULES
  f(0) -> a
  f(s(x)) -> b(f(x), f(x))
)
"""

DG2 = """
(RULES
  f -> b(g, h)
  g -> a
  h -> a
)
"""

TWO_RULE = """
(VAR x y)
(RULES
  f(a, s(x), y) -> f(a, x, s(y))
  f(b, x, s(y)) -> f(b, s(x), y)
)
"""

TEXTS = {
    "div": DIV,
    "diff": DIFF,
    "gcd": GCD,
    "exp": EXP,
    "toyama": TOYAMA,
    "sli-minus": SLI_MINUS,
    "dup-fd": DUP_FD,
    "list": LIST,
    "dg1": DG1,
    "dg2": DG2,
    "two-rule": TWO_RULE,
}


@lru_cache(maxsize=None)
def load(name: str) -> TRS:
    return parse_trs(TEXTS[name])


def term(text: str, variables: tuple[str, ...] = ("x", "y", "z")) -> Term:
    """Build a term from prefix notation, e.g. "div(s(0), s(0))"."""
    pos = 0

    def skip_ws() -> None:
        nonlocal pos
        while pos < len(text) and text[pos] in " \t":
            pos += 1

    def ident() -> str:
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos] not in "(), \t":
            pos += 1
        if start == pos:
            raise ValueError(f"expected identifier at {pos} in {text!r}")
        return text[start:pos]

    def parse() -> Term:
        nonlocal pos
        skip_ws()
        name = ident()
        skip_ws()
        args: list[Term] = []
        if pos < len(text) and text[pos] == "(":
            pos += 1
            skip_ws()
            if text[pos] != ")":
                args.append(parse())
                skip_ws()
                while text[pos] == ",":
                    pos += 1
                    args.append(parse())
                    skip_ws()
            if text[pos] != ")":
                raise ValueError(f"expected ')' at {pos} in {text!r}")
            pos += 1
        elif name in variables:
            return Var(name)
        return App(Symbol(name, len(args)), args)

    result = parse()
    skip_ws()
    if pos != len(text):
        raise ValueError(f"trailing input at {pos} in {text!r}")
    return result


def rule(lhs: str, rhs: str, variables: tuple[str, ...] = ("x", "y", "z")) -> Rule:
    return Rule(term(lhs, variables), term(rhs, variables))
