"""Tokenizer and recursive-descent parser for the ASCII grammar.

Grammar summary (decreasing precedence): atoms [a-z][a-zA-Z0-9_]*, `bot`,
`top`, prefixes `box `/`dia `, then `*` (non-associative, parens required
when nested), `&` (left), `|` (left), `->` (right) and `<-` (left, same
level, mixing needs parens).  Structures use `.` and `^`, both demanding
explicit parentheses when nested.  Sequents: `ANTE => SUCC`, comma-separated
antecedents for intuitionistic sequents, `=> A` for an empty antecedent.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    And, Bot, Box, CoImp, Dia, Formula, Imp, IntSequent, LanguageError, Leaf,
    Or, Prod, Prop, RblSequent, SMeet, SProd, Structure, Top, is_bpl, is_int,
    is_modal, is_rbl,
)


class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = expected
        hint = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at position {position}{hint}")


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<coarrow><-)|(?P<seq>=>)|(?P<ident>[a-z][a-zA-Z0-9_]*)"
    r"|(?P<sym>[&|*().^,]))"
)
_KEYWORDS = {"bot", "top", "box", "dia"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out, i = [], 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            stripped = text[i:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}",
                             len(text) - len(stripped))
        i = m.end()
        if m.lastgroup == "ident":
            word = m.group("ident")
            kind = word if word in _KEYWORDS else "atom"
            out.append(Token(kind, word, m.start("ident")))
        elif m.lastgroup == "arrow":
            out.append(Token("->", "->", m.start()))
        elif m.lastgroup == "coarrow":
            out.append(Token("<-", "<-", m.start()))
        elif m.lastgroup == "seq":
            out.append(Token("=>", "=>", m.start()))
        else:
            s = m.group("sym")
            out.append(Token(s, s, m.start("sym")))
    out.append(Token("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos, (kind,))
        return self.next()

    # formulas -----------------------------------------------------------

    def formula(self) -> Formula:
        items = [self.or_level()]
        ops: list[Token] = []
        while self.peek().kind in ("->", "<-"):
            ops.append(self.next())
            items.append(self.or_level())
        if not ops:
            return items[0]
        kinds = {t.kind for t in ops}
        if len(kinds) > 1:
            bad = next(t for t in ops if t.kind != ops[0].kind)
            raise ParseError("mixing -> and <- requires parentheses", bad.pos)
        if ops[0].kind == "->":  # right-associative
            out = items[-1]
            for it in reversed(items[:-1]):
                out = Imp(it, out)
            return out
        out = items[0]  # <- is left-associative
        for it in items[1:]:
            out = CoImp(out, it)
        return out

    def or_level(self) -> Formula:
        f = self.and_level()
        while self.peek().kind == "|":
            self.next()
            f = Or(f, self.and_level())
        return f

    def and_level(self) -> Formula:
        f = self.prod_level()
        while self.peek().kind == "&":
            self.next()
            f = And(f, self.prod_level())
        return f

    def prod_level(self) -> Formula:
        f = self.unary()
        if self.peek().kind == "*":
            self.next()
            g = self.unary()
            if self.peek().kind == "*":
                raise ParseError("* is non-associative; parenthesize nested products",
                                 self.peek().pos)
            return Prod(f, g)
        return f

    def unary(self) -> Formula:
        t = self.peek()
        if t.kind == "box":
            self.next()
            return Box(self.unary())
        if t.kind == "dia":
            self.next()
            return Dia(self.unary())
        if t.kind == "atom":
            return Prop(self.next().text)
        if t.kind == "bot":
            self.next()
            return Bot()
        if t.kind == "top":
            self.next()
            return Top()
        if t.kind == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos,
                         ("atom", "bot", "top", "box", "dia", "("))

    # structures ---------------------------------------------------------

    def structure(self) -> Structure:
        left = self.structure_atom()
        t = self.peek()
        if t.kind in (".", "^"):
            self.next()
            right = self.structure_atom()
            if self.peek().kind in (".", "^"):
                raise ParseError("structure operators need explicit parentheses",
                                 self.peek().pos)
            return SProd(left, right) if t.kind == "." else SMeet(left, right)
        return left

    def structure_atom(self) -> Structure:
        # A parenthesized group may be either a nested structure or part of a
        # formula; try the formula reading first and backtrack on failure.
        save = self.i
        try:
            f = self.formula()
            if self.peek().kind in (".", "^", ")", "=>", ",", "eof"):
                return Leaf(f)
        except ParseError:
            pass
        self.i = save
        self.expect("(")
        s = self.structure()
        self.expect(")")
        return s

    # sequents -----------------------------------------------------------

    def sequent(self, prefer: str = "auto"):
        if self.peek().kind == "=>":
            self.next()
            succ = self.formula()
            self.expect("eof")
            if prefer == "rbl":
                return RblSequent(None, succ)
            return IntSequent((), succ)
        if prefer == "int":
            items = [self.formula()]
            while self.peek().kind == ",":
                self.next()
                items.append(self.formula())
            self.expect("=>")
            succ = self.formula()
            self.expect("eof")
            return IntSequent(tuple(items), succ)
        first = self.structure()
        if self.peek().kind == ",":
            if not isinstance(first, Leaf):
                raise ParseError("commas and structure operators cannot mix",
                                 self.peek().pos)
            items = [first.formula]
            while self.peek().kind == ",":
                self.next()
                items.append(self.formula())
            self.expect("=>")
            succ = self.formula()
            self.expect("eof")
            return IntSequent(tuple(items), succ)
        self.expect("=>")
        succ = self.formula()
        self.expect("eof")
        if prefer == "rbl":
            return RblSequent(first, succ)
        if isinstance(first, Leaf) and is_int(first.formula) and is_int(succ):
            return IntSequent((first.formula,), succ)
        return RblSequent(first, succ)


_CHECKS = {"int": is_int, "bpl": is_bpl, "rbl": is_rbl, "modal": is_modal}
_LANG_NAME = {"int": "intuitionistic", "bpl": "BPL", "rbl": "RBL", "modal": "modal"}


def _check_language(f: Formula, language: str) -> Formula:
    if not _CHECKS[language](f):
        raise LanguageError(
            f"formula {f} is not in the {_LANG_NAME[language]} language")
    return f


def parse(text: str, language: str = "rbl"):
    """Parse text as a formula of the given language, a structure, or a
    sequent.  language is one of int|bpl|rbl|modal|structure|sequent, plus
    int-sequent|rbl-sequent to force the sequent reading."""
    p = _Parser(tokenize(text))
    if language in _CHECKS:
        f = p.formula()
        p.expect("eof")
        return _check_language(f, language)
    if language == "structure":
        s = p.structure()
        p.expect("eof")
        return s
    if language == "sequent":
        return p.sequent("auto")
    if language == "int-sequent":
        seq = p.sequent("int")
        for f in (*seq.antecedent, seq.succedent):
            if not is_bpl(f):
                raise LanguageError(f"formula {f} is not an Int/BPL formula")
        return seq
    if language == "rbl-sequent":
        seq = p.sequent("rbl")
        return seq
    raise ValueError(f"unknown language {language!r}")


def parse_formula(text: str) -> Formula:
    return parse(text, "rbl")


def parse_sequent(text: str):
    return parse(text, "sequent")
