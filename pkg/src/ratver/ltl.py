"""LTL formulas: abstract syntax, a small parser, and lasso-word evaluation.

Formulas are kept in the core grammar (true, propositions, negation,
disjunction, next, until). Conjunction, implication, eventually and always
are rewritten at construction time.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class LtlSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class LtlFormula:
    """Base class of formula nodes. Nodes are immutable and hashable."""

    def children(self) -> tuple["LtlFormula", ...]:
        return ()

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children())

    @property
    def props(self) -> frozenset[str]:
        out: set[str] = set()
        stack = [self]
        while stack:
            f = stack.pop()
            if isinstance(f, Prop):
                out.add(f.name)
            stack.extend(f.children())
        return frozenset(out)

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class TrueF(LtlFormula):
    pass


@dataclass(frozen=True)
class Prop(LtlFormula):
    name: str

    def __post_init__(self):
        if not _IDENT.fullmatch(self.name or "") or self.name in _KEYWORDS:
            raise ValueError(f"invalid proposition name {self.name!r}")


@dataclass(frozen=True)
class Not(LtlFormula):
    arg: LtlFormula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Or(LtlFormula):
    left: LtlFormula
    right: LtlFormula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Next(LtlFormula):
    arg: LtlFormula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(LtlFormula):
    left: LtlFormula
    right: LtlFormula

    def children(self):
        return (self.left, self.right)


TRUE = TrueF()


# Sugar. Every helper returns a core-grammar formula.

def neg(f: LtlFormula) -> LtlFormula:
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def disj(a: LtlFormula, b: LtlFormula) -> LtlFormula:
    return Or(a, b)


def conj(a: LtlFormula, b: LtlFormula) -> LtlFormula:
    return neg(Or(neg(a), neg(b)))


def conj_all(fs: Iterable[LtlFormula]) -> LtlFormula:
    fs = list(fs)
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = conj(out, f)
    return out


def implies(a: LtlFormula, b: LtlFormula) -> LtlFormula:
    return Or(neg(a), b)


def eventually(f: LtlFormula) -> LtlFormula:
    return Until(TRUE, f)


def always(f: LtlFormula) -> LtlFormula:
    return neg(eventually(neg(f)))


FALSE = neg(TRUE)


def to_string(f: LtlFormula) -> str:
    """Render in the concrete syntax; the output parses back to ``f``."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Not):
        return f"!{_atomic(f.arg)}"
    if isinstance(f, Next):
        return f"X {_atomic(f.arg)}"
    if isinstance(f, Or):
        return f"({to_string(f.left)} | {to_string(f.right)})"
    if isinstance(f, Until):
        return f"({to_string(f.left)} U {to_string(f.right)})"
    raise TypeError(f)


def _atomic(f: LtlFormula) -> str:
    s = to_string(f)
    if isinstance(f, (Not, Next)):
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# Parser
#
# precedence, tightest first: ! X F G, &, |, ->, U.  -> and U associate right.

_IDENT = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*")
_KEYWORDS = {"X", "F", "G", "U", "true", "false"}
_TOKEN = re.compile(r"\s*(?:(->)|([!&|()])|([a-zA-Z_][a-zA-Z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            j = pos
            while j < len(text) and text[j].isspace():
                j += 1
            raise LtlSyntaxError(f"unexpected character {text[j]!r}", j)
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("<end>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self) -> tuple[str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, tok: str):
        got, pos = self.take()
        if got != tok:
            raise LtlSyntaxError(f"expected {tok!r}, found {got!r}", pos)

    def parse(self) -> LtlFormula:
        f = self.until()
        tok, pos = self.tokens[self.i]
        if tok != "<end>":
            raise LtlSyntaxError(f"unexpected token {tok!r}", pos)
        return f

    def until(self) -> LtlFormula:
        left = self.implication()
        if self.peek() == "U":
            self.take()
            return Until(left, self.until())
        return left

    def implication(self) -> LtlFormula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return implies(left, self.implication())
        return left

    def disjunction(self) -> LtlFormula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> LtlFormula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = conj(f, self.unary())
        return f

    def unary(self) -> LtlFormula:
        tok, pos = self.take()
        if tok == "!":
            return Not(self.unary())
        if tok == "X":
            return Next(self.unary())
        if tok == "F":
            return eventually(self.unary())
        if tok == "G":
            return always(self.unary())
        if tok == "(":
            f = self.until()
            self.expect(")")
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if tok == "<end>":
            raise LtlSyntaxError("unexpected end of input", pos)
        if tok in _KEYWORDS or not _IDENT.fullmatch(tok):
            raise LtlSyntaxError(f"unexpected token {tok!r}", pos)
        return Prop(tok)


def parse_ltl(text: str) -> LtlFormula:
    """Parse a formula such as ``"G (req -> F grant)"``."""
    if not text or not text.strip():
        raise LtlSyntaxError("empty formula", 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Lasso words

@dataclass(frozen=True)
class LassoWord:
    """The infinite word ``prefix . cycle^omega`` over sets of propositions."""

    prefix: tuple[frozenset, ...] = ()
    cycle: tuple[frozenset, ...] = field(default=(frozenset(),))

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(frozenset(x) for x in self.prefix))
        object.__setattr__(self, "cycle", tuple(frozenset(x) for x in self.cycle))
        if not self.cycle:
            raise ValueError("lasso cycle must be nonempty")

    def __len__(self):
        return len(self.prefix) + len(self.cycle)

    def letter(self, i: int) -> frozenset:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def successor(self, i: int) -> int:
        """Position index following ``i`` in the folded representation."""
        if i + 1 < len(self):
            return i + 1
        return len(self.prefix)

    def rotated(self) -> "LassoWord":
        """Same infinite word, with the first cycle letter moved into the prefix."""
        c = self.cycle
        return LassoWord(self.prefix + (c[0],), c[1:] + (c[0],))


def lasso(prefix: Sequence[Iterable[str]], cycle: Sequence[Iterable[str]]) -> LassoWord:
    return LassoWord(tuple(frozenset(p) for p in prefix), tuple(frozenset(c) for c in cycle))


def evaluate_on_lasso(f: LtlFormula, w: LassoWord) -> bool:
    """Decide whether ``w`` satisfies ``f`` at position 0.

    Truth values are computed bottom-up on the folded positions of the lasso
    (the last position wraps to the start of the cycle). Until is the least
    fixpoint of ``right or (left and next)``, found by backward sweeps.
    """
    return _values(f, w, {})[0]


def _values(f: LtlFormula, w: LassoWord, memo: dict) -> list[bool]:
    if f in memo:
        return memo[f]
    n = len(w)
    if isinstance(f, TrueF):
        out = [True] * n
    elif isinstance(f, Prop):
        out = [f.name in w.letter(i) for i in range(n)]
    elif isinstance(f, Not):
        out = [not v for v in _values(f.arg, w, memo)]
    elif isinstance(f, Or):
        a, b = _values(f.left, w, memo), _values(f.right, w, memo)
        out = [x or y for x, y in zip(a, b)]
    elif isinstance(f, Next):
        a = _values(f.arg, w, memo)
        out = [a[w.successor(i)] for i in range(n)]
    elif isinstance(f, Until):
        a, b = _values(f.left, w, memo), _values(f.right, w, memo)
        out = [False] * n
        changed = True
        while changed:
            changed = False
            for i in reversed(range(n)):
                v = b[i] or (a[i] and out[w.successor(i)])
                if v and not out[i]:
                    out[i] = True
                    changed = True
    else:
        raise TypeError(f"not a core LTL node: {f!r}")
    memo[f] = out
    return out
