"""Backward proof search and proof checking for the contraction-free
sequent calculus G4ip, with an optional top extension.

Search terminates without loop checks: every rule application strictly
decreases the multiplicative sequent weight.  The left rules for compound
implications follow the usual split on the shape of the antecedent of the
principal implication; (AndR)/(OrL) are the context-sharing forms.

The top extension (on by default) adds (TopR) G => top, (TopL) deleting an
antecedent top, and (ImpLTop) rewriting top->B to B; with w(top)=2 all
three keep the weight decrease strict.  They are needed because the
intuitionistic image of the product-logic translation contains top.
"""
from __future__ import annotations

from dataclasses import dataclass

from .proofs import ACCEPT, CheckResult, Derivation, params_of, reject
from .syntax import (
    And, Bot, Formula, Imp, IntSequent, LanguageError, Or, Prop, Top,
    formula_key, is_bpl, is_int, weight, weight_sequent,
)


def _remove(ante: tuple[Formula, ...], f: Formula) -> tuple[Formula, ...]:
    out = list(ante)
    out.remove(f)
    return tuple(out)


def _seq(ante, succ) -> IntSequent:
    return IntSequent(tuple(ante), succ)


def _check_language(s: IntSequent, top_ext: bool) -> None:
    ok = is_bpl if top_ext else is_int
    for f in (*s.antecedent, s.succedent):
        if not ok(f):
            lang = "BPL" if top_ext else "intuitionistic"
            raise LanguageError(f"{f} is not in the {lang} language")


def _axiom(seq: IntSequent, top_ext: bool) -> Derivation | None:
    if any(isinstance(f, Bot) for f in seq.antecedent):
        return Derivation("BotL", seq)
    if top_ext and isinstance(seq.succedent, Top):
        return Derivation("TopR", seq)
    if isinstance(seq.succedent, Prop) and seq.succedent in seq.antecedent:
        return Derivation("Id", seq, (), params_of(principal=seq.succedent))
    return None


def _invertible_step(seq: IntSequent, top_ext: bool):
    """First applicable single-premise invertible rule, or None."""
    ante, succ = seq.antecedent, seq.succedent
    for f in ante:
        if isinstance(f, And):
            rest = _remove(ante, f)
            return "AndL", f, _seq(rest + (f.left, f.right), succ)
        if top_ext and isinstance(f, Top):
            return "TopL", f, _seq(_remove(ante, f), succ)
        if isinstance(f, Imp):
            a, b = f.left, f.right
            if top_ext and isinstance(a, Top):
                return "ImpLTop", f, _seq(_remove(ante, f) + (b,), succ)
            if isinstance(a, And):
                g = Imp(a.left, Imp(a.right, b))
                return "ImpL2", f, _seq(_remove(ante, f) + (g,), succ)
            if isinstance(a, Or):
                g1, g2 = Imp(a.left, b), Imp(a.right, b)
                return "ImpL3", f, _seq(_remove(ante, f) + (g1, g2), succ)
            if isinstance(a, Prop) and a in _remove(ante, f):
                return "ImpL1", f, _seq(_remove(ante, f) + (b,), succ)
    if isinstance(succ, Imp):
        return "ImpR", succ, _seq(ante + (succ.left,), succ.right)
    return None


def _prove(seq: IntSequent, memo: dict, top_ext: bool) -> Derivation | None:
    hit = memo.get(seq, False)
    if hit is not False:
        return hit
    # saturation: single-premise invertible rules applied as a loop so deep
    # top-chains do not consume Python stack
    steps: list[tuple[str, Formula, IntSequent]] = []
    cur = seq
    d: Derivation | None = None
    while True:
        ax = _axiom(cur, top_ext)
        if ax is not None:
            d = ax
            break
        hit = memo.get(cur, False)
        if hit is not False and steps:
            d = hit
            break
        step = _invertible_step(cur, top_ext)
        if step is None:
            d = _branch(cur, memo, top_ext)
            break
        rule, principal, nxt = step
        assert weight_sequent(nxt) < weight_sequent(cur)
        steps.append((rule, principal, cur))
        cur = nxt
    memo[cur] = d
    if d is not None:
        for rule, principal, conclusion in reversed(steps):
            d = Derivation(rule, conclusion, (d,), params_of(principal=principal))
            memo[conclusion] = d
    else:
        for _, _, conclusion in steps:
            memo[conclusion] = None
    memo[seq] = d
    return d


def _branch(seq: IntSequent, memo: dict, top_ext: bool) -> Derivation | None:
    ante, succ = seq.antecedent, seq.succedent
    # two-premise invertible rules: no backtracking past them
    if isinstance(succ, And):
        left = _prove(_seq(ante, succ.left), memo, top_ext)
        if left is None:
            return None
        right = _prove(_seq(ante, succ.right), memo, top_ext)
        if right is None:
            return None
        return Derivation("AndR", seq, (left, right), params_of(principal=succ))
    for f in ante:
        if isinstance(f, Or):
            rest = _remove(ante, f)
            left = _prove(_seq(rest + (f.left,), succ), memo, top_ext)
            if left is None:
                return None
            right = _prove(_seq(rest + (f.right,), succ), memo, top_ext)
            if right is None:
                return None
            return Derivation("OrL", seq, (left, right), params_of(principal=f))
    # genuine choice points: right disjunction and nested implications
    if isinstance(succ, Or):
        d = _prove(_seq(ante, succ.left), memo, top_ext)
        if d is not None:
            return Derivation("OrR1", seq, (d,), params_of(principal=succ))
        d = _prove(_seq(ante, succ.right), memo, top_ext)
        if d is not None:
            return Derivation("OrR2", seq, (d,), params_of(principal=succ))
    for f in ante:
        if isinstance(f, Imp) and isinstance(f.left, Imp):
            c, dd = f.left.left, f.left.right
            b = f.right
            rest = _remove(ante, f)
            p1 = _prove(_seq(rest + (Imp(dd, b), c), dd), memo, top_ext)
            if p1 is None:
                continue
            p2 = _prove(_seq(rest + (b,), succ), memo, top_ext)
            if p2 is None:
                continue
            return Derivation("ImpL4", seq, (p1, p2), params_of(principal=f))
    return None


def prove_g4ip(seq: IntSequent, top_ext: bool = True) -> Derivation | None:
    """Complete backward search: a Derivation accepted by check_g4ip, or None
    when no derivation exists."""
    _check_language(seq, top_ext)
    return _prove(seq, {}, top_ext)


@dataclass(frozen=True)
class EquivResult:
    yes: bool
    forward: Derivation | None = None   # a => b
    backward: Derivation | None = None  # b => a
    failing: str | None = None

    def __bool__(self):
        return self.yes


def prove_equiv_g4ip(a: Formula, b: Formula, top_ext: bool = True) -> EquivResult:
    fwd = prove_g4ip(IntSequent((a,), b), top_ext)
    if fwd is None:
        return EquivResult(False, failing=f"{a} => {b}")
    bwd = prove_g4ip(IntSequent((b,), a), top_ext)
    if bwd is None:
        return EquivResult(False, forward=fwd, failing=f"{b} => {a}")
    return EquivResult(True, fwd, bwd)


# ---------------------------------------------------------------------------
# Checking


def _same_multiset(a: tuple[Formula, ...], b: tuple[Formula, ...]) -> bool:
    return sorted(a, key=formula_key) == sorted(b, key=formula_key)


def check_g4ip(d: Derivation, top_ext: bool = True) -> CheckResult:
    """Schema-by-schema validation, including side conditions and the strict
    premise-weight decrease."""
    for path, node in d.nodes():
        r = _check_node(node, top_ext)
        if r is not None:
            return reject(path, r)
        try:
            wc = weight_sequent(node.conclusion)
        except LanguageError as e:
            return reject(path, str(e))
        for p in node.premises:
            if weight_sequent(p.conclusion) >= wc:
                return reject(path, "premise weight not lower than conclusion")
    return ACCEPT


def _check_node(node: Derivation, top_ext: bool) -> str | None:
    seq = node.conclusion
    if not isinstance(seq, IntSequent):
        return "not an intuitionistic sequent"
    ante, succ = seq.antecedent, seq.succedent
    rule = node.rule
    prem = node.premises
    n_prem = {"Id": 0, "BotL": 0, "TopR": 0}.get(rule, 2 if rule in
              ("AndR", "OrL", "ImpL4") else 1)
    if len(prem) != n_prem:
        return f"{rule} expects {n_prem} premises, got {len(prem)}"
    if rule in ("TopR", "TopL", "ImpLTop") and not top_ext:
        return f"{rule} requires the top extension"

    def expects(*want: IntSequent) -> str | None:
        for got, w in zip(prem, want):
            if got.conclusion.succedent != w.succedent or not _same_multiset(
                    got.conclusion.antecedent, w.antecedent):
                return f"{rule} premise mismatch: expected {w}, got {got.conclusion}"
        return None

    if rule == "Id":
        if not isinstance(succ, Prop):
            return "Id formula must be atomic"
        if succ not in ante:
            return "Id formula mismatch"
        return None
    if rule == "BotL":
        return None if any(isinstance(f, Bot) for f in ante) else "no bot in antecedent"
    if rule == "TopR":
        return None if isinstance(succ, Top) else "succedent is not top"

    f = node.param("principal")
    if f is None:
        return f"{rule} needs a principal formula parameter"

    if rule == "AndL":
        if not (isinstance(f, And) and f in ante):
            return "principal and-formula not in antecedent"
        return expects(_seq(_remove(ante, f) + (f.left, f.right), succ))
    if rule == "TopL":
        if not (isinstance(f, Top) and f in ante):
            return "principal top not in antecedent"
        return expects(_seq(_remove(ante, f), succ))
    if rule == "AndR":
        if succ != f or not isinstance(f, And):
            return "principal must be the and-succedent"
        return expects(_seq(ante, f.left), _seq(ante, f.right))
    if rule == "OrL":
        if not (isinstance(f, Or) and f in ante):
            return "principal or-formula not in antecedent"
        rest = _remove(ante, f)
        return expects(_seq(rest + (f.left,), succ), _seq(rest + (f.right,), succ))
    if rule in ("OrR1", "OrR2"):
        if succ != f or not isinstance(f, Or):
            return "principal must be the or-succedent"
        pick = f.left if rule == "OrR1" else f.right
        return expects(_seq(ante, pick))
    if rule == "ImpR":
        if succ != f or not isinstance(f, Imp):
            return "principal must be the implication succedent"
        return expects(_seq(ante + (f.left,), f.right))
    if not (isinstance(f, Imp) and f in ante):
        return f"{rule} principal implication not in antecedent"
    rest = _remove(ante, f)
    a, b = f.left, f.right
    if rule == "ImpL1":
        if not isinstance(a, Prop):
            return "atomicity"
        if a not in rest:
            return "ImpL1 needs the atom alongside the implication"
        return expects(_seq(rest + (b,), succ))
    if rule == "ImpLTop":
        if not isinstance(a, Top):
            return "principal is not a top-implication"
        return expects(_seq(rest + (b,), succ))
    if rule == "ImpL2":
        if not isinstance(a, And):
            return "principal does not nest a conjunction"
        return expects(_seq(rest + (Imp(a.left, Imp(a.right, b)),), succ))
    if rule == "ImpL3":
        if not isinstance(a, Or):
            return "principal does not nest a disjunction"
        return expects(_seq(rest + (Imp(a.left, b), Imp(a.right, b)), succ))
    if rule == "ImpL4":
        if not isinstance(a, Imp):
            return "principal does not nest an implication"
        c, dd = a.left, a.right
        return expects(_seq(rest + (Imp(dd, b), c), dd), _seq(rest + (b,), succ))
    return f"unknown rule {rule}"
