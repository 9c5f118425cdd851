"""Syntactic translations: positive-occurrence top-wrapping, the sequent
map into structure sequents, the intuitionistic-to-BPL translation, index
rewrapping of positive occurrences, and the modal maps (Godel, its
letter-doubling variant, and the splitting translation)."""
from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    And, Bot, Box, CoImp, Dia, Formula, Imp, IntSequent, LanguageError, Leaf,
    NEGATIVE, Or, POSITIVE, Prod, Prop, RblSequent, SMeet, Sequent, Structure,
    Top, formula_size, is_bpl, is_int, is_modal, occurrence_formula,
    polarity_at, replace_occurrence, weight, weight_sequent,
)


@dataclass(frozen=True)
class SharpConfig:
    """Wrapping index and the polarity assumed at the root occurrence."""

    n: int
    root_polarity: int = POSITIVE

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("wrapping index must be >= 1")
        if self.root_polarity not in (POSITIVE, NEGATIVE):
            raise ValueError("root_polarity must be POSITIVE or NEGATIVE")


def top_pow(n: int, body: Formula) -> Formula:
    """top^n -> body as a chain: top^1->B = top->B, top^(n+1)->B = top->(top^n->B)."""
    for _ in range(n):
        body = Imp(Top(), body)
    return body


def _sharp(f: Formula, n: int, positive: bool) -> Formula:
    if isinstance(f, (Prop, Bot, Top)):
        body = f
    elif isinstance(f, (And, Or)):
        body = type(f)(_sharp(f.left, n, positive), _sharp(f.right, n, positive))
    elif isinstance(f, Imp):
        body = Imp(_sharp(f.left, n, not positive), _sharp(f.right, n, positive))
    else:
        raise LanguageError(f"{f} is not an intuitionistic formula")
    # a positive occurrence is wrapped exactly once, outside-in; the fresh
    # prefix is never re-scanned
    return top_pow(n, body) if positive else body


def sharp(f: Formula, cfg: SharpConfig) -> Formula:
    """Wrap every positive-polarity occurrence (relative to the root polarity)
    as top^n -> B."""
    if not is_int(f):
        raise LanguageError(f"{f} is not an intuitionistic formula")
    return _sharp(f, cfg.n, cfg.root_polarity == POSITIVE)


def sharp_sequent(s: IntSequent) -> RblSequent:
    """Translate an Int sequent with n = its weight: antecedent formulas map
    negatively and join with the structure meet, the succedent positively;
    an empty antecedent becomes top."""
    n = weight_sequent(s)
    succ = _sharp(s.succedent, n, True)
    if not s.antecedent:
        return RblSequent(Leaf(Top()), succ)
    parts = [Leaf(_sharp(f, n, False)) for f in s.antecedent]
    ante: Structure = parts[0]
    for p in parts[1:]:
        ante = SMeet(ante, p)
    return RblSequent(ante, succ)


def tr(f: Formula) -> Formula:
    """The succedent of the translated sequent (=> f): every positive
    occurrence wrapped with top^w(f)."""
    if not is_int(f):
        raise LanguageError(f"{f} is not an intuitionistic formula")
    n = weight(f)
    out = _sharp(f, n, True)
    assert is_bpl(out)
    assert formula_size(out) <= formula_size(f) * (2 * n + 1)
    return out


def replace_positive(s: Sequent, occ, n_from: int, n_to: int) -> Sequent:
    """Rewrap a positive occurrence from index n_from to n_to (adds
    n_to - n_from top layers around it)."""
    if n_from < 0 or n_to < n_from:
        raise ValueError("need 0 <= n_from <= n_to")
    if polarity_at(s, occ) != POSITIVE:
        raise ValueError(f"occurrence {occ!r} is not positive")
    if n_to == n_from:
        return s
    cur = occurrence_formula(s, occ)
    return replace_occurrence(s, occ, top_pow(n_to - n_from, cur))


def godel(f: Formula) -> Formula:
    """p -> box p, homomorphic on and/or/bot/top, A->B -> box(GA -> GB)."""
    if isinstance(f, Prop):
        return Box(f)
    if isinstance(f, (Bot, Top)):
        return f
    if isinstance(f, (And, Or)):
        return type(f)(godel(f.left), godel(f.right))
    if isinstance(f, Imp):
        return Box(Imp(godel(f.left), godel(f.right)))
    raise LanguageError(f"{f} is not an Int/BPL formula")


def godel1(f: Formula) -> Formula:
    """Like godel but sends each letter p to p & box p."""
    if isinstance(f, Prop):
        return And(f, Box(f))
    if isinstance(f, (Bot, Top)):
        return f
    if isinstance(f, (And, Or)):
        return type(f)(godel1(f.left), godel1(f.right))
    if isinstance(f, Imp):
        return Box(Imp(godel1(f.left), godel1(f.right)))
    raise LanguageError(f"{f} is not an Int/BPL formula")


def sp(f: Formula) -> Formula:
    """Splitting translation: commutes with the Boolean connectives and
    rewrites box F to Sp(F) & box Sp(F), dia F to Sp(F) | dia Sp(F)."""
    if not is_modal(f):
        raise LanguageError(f"{f} is not a modal formula")
    if isinstance(f, (Prop, Bot, Top)):
        return f
    if isinstance(f, (And, Or, Imp)):
        return type(f)(sp(f.left), sp(f.right))
    if isinstance(f, Box):
        g = sp(f.child)
        return And(g, Box(g))
    if isinstance(f, Dia):
        g = sp(f.child)
        return Or(g, Dia(g))
    raise LanguageError(f"cannot translate {type(f).__name__}")


@dataclass(frozen=True)
class SizeReport:
    input_size: int
    output_size: int
    weight: int


def tr_size_report(f: Formula) -> SizeReport:
    """Node counts of f and tr(f) plus w(f); the output size is asserted
    against the bound size(f) * (2 w(f) + 1) inside tr."""
    out = tr(f)
    return SizeReport(formula_size(f), formula_size(out), weight(f))
