"""Bounded backward proof search and exact derivation checking for the
cut-free sequent calculus of residuated basic logic.

Search works on canonical antecedents where maximal meet-clusters are
flattened to sorted multisets (the meet-exchange and meet-associativity
rules are exactly that quotient), while the product stays a binary tree.
Every search move is positional on the underlying raw tree, so emitted
derivations consist of ordinary rule instances and never need explicit
permutation steps; the checker still validates MeetE/MeetA1/MeetA2 and Cut
in externally supplied proofs.

Termination discipline: per-branch repetition check (minimal proofs never
repeat a sequent along a branch, so this pruning is exact), plus explicit
depth and structure-size bounds for the contraction rules, which are the
sole source of growth.  A failed search is reported as definitely
unprovable only when no depth/size bound fired; a cheap two-valued algebra
filter additionally refutes many sequents outright.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .proofs import ACCEPT, CheckResult, Derivation, params_of, reject
from .syntax import (
    And, Bot, CoImp, Formula, Imp, LanguageError, Leaf, Or, Prod, Prop,
    RblSequent, SMeet, SProd, Structure, Top, atoms, children, formula_of_id,
    format_formula, intern_id, is_rbl, replace_structure_at, structure_at,
    subformulas,
)

MODES = ("lrbl", "lrbl-prime", "dfnl")


# ---------------------------------------------------------------------------
# T-sets: a finite generator base plus its and/or closure


class TClosure:
    """The and/or-closure of a finite base set (bot and top are always
    included).  Membership is structural: a formula is in the closure iff it
    is a base formula or an and/or of closure members."""

    def __init__(self, base):
        base = frozenset(base) | {Bot(), Top()}
        self.base = base
        self._memo: dict[Formula, bool] = {}

    @classmethod
    def from_sequent_formulas(cls, formulas) -> "TClosure":
        gen: set[Formula] = set()
        for f in formulas:
            gen |= subformulas(f)
        return cls(gen)

    def contains(self, f: Formula) -> bool:
        hit = self._memo.get(f)
        if hit is not None:
            return hit
        ok = f in self.base or (isinstance(f, (And, Or))
                                and self.contains(f.left) and self.contains(f.right))
        self._memo[f] = ok
        return ok

    def subformula_closed(self) -> bool:
        return all(g in self.base for f in self.base for g in subformulas(f))

    def __contains__(self, f: Formula) -> bool:
        return self.contains(f)


# ---------------------------------------------------------------------------
# Prover configuration and outcomes


@dataclass(frozen=True)
class ProverConfig:
    max_depth: int = 24
    max_structure_size: int = 12
    mode: str = "lrbl"
    phi: frozenset = frozenset()          # pairs (Formula, Formula), read A => B
    t_restriction: TClosure | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.max_depth <= 0 or self.max_structure_size <= 0:
            raise ValueError("bounds must be positive")
        object.__setattr__(self, "phi", frozenset(self.phi))


@dataclass(frozen=True)
class Proved:
    derivation: Derivation

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Exhausted:
    """No proof within bounds.  complete=True means no depth/size bound was
    hit, so (by the branch-repetition argument) no proof exists at all."""

    nodes: int
    complete: bool
    depth_hits: int
    size_hits: int

    def __bool__(self):
        return False


SearchOutcome = Proved | Exhausted


# ---------------------------------------------------------------------------
# Canonical structures: ('L', fid) | ('P', c1, c2) | ('M', (children...))
# Meet-cluster children are non-meet nodes, sorted, at least two of them.


def canon(s: Structure):
    if isinstance(s, Leaf):
        return ("L", intern_id(s.formula))
    if isinstance(s, SProd):
        return ("P", canon(s.left), canon(s.right))
    return c_meet([canon(s.left), canon(s.right)])


def c_meet(parts):
    flat = []
    for p in parts:
        if p[0] == "M":
            flat.extend(p[1])
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return ("M", tuple(sorted(flat)))


def c_positions(c, path=()):
    yield path, c
    if c[0] == "P":
        yield from c_positions(c[1], path + (0,))
        yield from c_positions(c[2], path + (1,))
    elif c[0] == "M":
        for i, kid in enumerate(c[1]):
            yield from c_positions(kid, path + (i,))


def c_sub(c, path):
    for i in path:
        c = c[i + 1] if c[0] == "P" else c[1][i]
    return c


def c_replace(c, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    if c[0] == "P":
        if i == 0:
            return ("P", c_replace(c[1], rest, new), c[2])
        return ("P", c[1], c_replace(c[2], rest, new))
    kids = list(c[1])
    kids[i] = c_replace(kids[i], rest, new)
    return c_meet(kids)


def c_delete(c, path):
    """Remove the subtree at path (its parent collapses to the sibling)."""
    parent_path, i = path[:-1], path[-1]
    parent = c_sub(c, parent_path)
    if parent[0] == "P":
        sibling = parent[2] if i == 0 else parent[1]
        return c_replace(c, parent_path, sibling)
    kids = list(parent[1])
    del kids[i]
    return c_replace(c, parent_path, c_meet(kids))


def c_leafcount(c) -> int:
    if c[0] == "L":
        return 1
    if c[0] == "P":
        return c_leafcount(c[1]) + c_leafcount(c[2])
    return sum(c_leafcount(k) for k in c[1])


def c_formulas(c):
    if c[0] == "L":
        yield formula_of_id(c[1])
    elif c[0] == "P":
        yield from c_formulas(c[1])
        yield from c_formulas(c[2])
    else:
        for k in c[1]:
            yield from c_formulas(k)


def _flatten_meet(raw: Structure, prefix=()):
    if isinstance(raw, SMeet):
        yield from _flatten_meet(raw.left, prefix + (0,))
        yield from _flatten_meet(raw.right, prefix + (1,))
    else:
        yield prefix, raw


def raw_path_of(raw: Structure, c, cpath) -> tuple[int, ...]:
    """Map a canonical position to a raw position (canon(raw) must equal c)."""
    out: tuple[int, ...] = ()
    for i in cpath:
        if c[0] == "P":
            out += (i,)
            raw = raw.left if i == 0 else raw.right
            c = c[i + 1]
        else:
            members = list(_flatten_meet(raw))
            order = sorted(range(len(members)), key=lambda j: (canon(members[j][1]), j))
            rel, sub = members[order[i]]
            out += rel
            raw = sub
            c = c[1][i]
    return out


# ---------------------------------------------------------------------------
# Plans: the search result, elaborated into a raw derivation afterwards


@dataclass(frozen=True)
class _Plan:
    rule: str
    pos: tuple = ()
    kids: tuple = ()


def _mode_has(mode: str, what: str) -> bool:
    if mode == "dfnl":
        return what not in ("top", "bot", "weaken", "prodc")
    return True


def _constant_free(f: Formula) -> bool:
    return not any(isinstance(g, (Top, Bot)) for g in subformulas(f))


class _ChainFilter:
    """Evaluation in small Goedel chains with product = meet: these are
    residuated basic algebras, so a sequent false in one of them under a
    valuation satisfying the hypotheses is definitely unprovable.  An exact,
    cheap refuter for the backward search."""

    def __init__(self, names, phi, heights=(2, 3)):
        self.names = tuple(sorted(names))
        self.chains = []
        for n in heights:
            if n ** len(self.names) > 30_000:
                continue
            masks = self._valuations(n, phi)
            self.chains.append((n, masks, {}))

    def _valuations(self, n, phi):
        out = []
        for m in itertools.product(range(n), repeat=len(self.names)):
            env = dict(zip(self.names, m))
            if all(self._ev(a, env, n) <= self._ev(b, env, n) for a, b in phi):
                out.append(env)
        return out

    def _ev(self, f: Formula, env, n, memo=None) -> int:
        if memo is not None:
            key = intern_id(f)
            hit = memo.get(key)
            if hit is not None:
                return hit
        if isinstance(f, Prop):
            v = env.get(f.name, 0)
        elif isinstance(f, Bot):
            v = 0
        elif isinstance(f, Top):
            v = n - 1
        elif isinstance(f, (And, Prod)):
            v = min(self._ev(f.left, env, n, memo), self._ev(f.right, env, n, memo))
        elif isinstance(f, Or):
            v = max(self._ev(f.left, env, n, memo), self._ev(f.right, env, n, memo))
        elif isinstance(f, Imp):
            a, b = self._ev(f.left, env, n, memo), self._ev(f.right, env, n, memo)
            v = n - 1 if a <= b else b
        elif isinstance(f, CoImp):
            # with a commutative product the co-residual mirrors the residual
            a, b = self._ev(f.left, env, n, memo), self._ev(f.right, env, n, memo)
            v = n - 1 if b <= a else a
        else:
            raise LanguageError(f"cannot evaluate {type(f).__name__}")
        if memo is not None:
            memo[key] = v
        return v

    def _formula_value(self, f, env_id, env, n, cache) -> int:
        key = (intern_id(f), env_id)
        hit = cache.get(key)
        if hit is None:
            hit = self._ev(f, env, n)
            cache[key] = hit
        return hit

    def _eval_c(self, c, env_id, env, n, cache) -> int:
        if c[0] == "L":
            return self._formula_value(formula_of_id(c[1]), env_id, env, n, cache)
        if c[0] == "P":
            return min(self._eval_c(c[1], env_id, env, n, cache),
                       self._eval_c(c[2], env_id, env, n, cache))
        return min(self._eval_c(k, env_id, env, n, cache) for k in c[1])

    def refutes(self, c, succ: Formula) -> bool:
        for n, envs, cache in self.chains:
            for i, env in enumerate(envs):
                if self._eval_c(c, i, env, n, cache) > self._formula_value(
                        succ, i, env, n, cache):
                    return True
        return False


_EMPTY: frozenset = frozenset()


class _Search:
    """Backward search with exact failure caching.

    A failed goal is cached together with its blocker set: the on-stack
    ancestor goals whose branch-repetition pruning the failure depended on.
    The cached failure is reusable whenever all blockers are on the current
    stack again and (if a depth/size bound fired during the exploration) the
    current depth budget is no larger.  Both conditions make the replayed
    exploration a subset of the recorded one, so reuse is sound; failures
    with no blockers and no bound hits are definitive."""

    def __init__(self, cfg: ProverConfig):
        self.cfg = cfg
        self.mode = cfg.mode
        self.phi = cfg.phi
        self.t = cfg.t_restriction
        self.proved: dict = {}
        self.fail_cache: dict = {}  # key -> (blockers, bound_hit, depth)
        self.onstack: set = set()
        self.nodes = 0
        self.depth_hits = 0
        self.size_hits = 0
        self.use_eager = not cfg.phi and (self.t is None or self.t.subformula_closed())
        self.filter: _ChainFilter | None = None

    def init_filter(self, goal_c, succ):
        names = set()
        for f in itertools.chain(c_formulas(goal_c), [succ],
                                 (g for pair in self.phi for g in pair)):
            names |= atoms(f)
        if 2 ** len(names) <= 30_000:
            self.filter = _ChainFilter(names, self.phi)

    def t_ok(self, f: Formula) -> bool:
        return self.t is None or self.t.contains(f)

    # -- axioms ------------------------------------------------------------

    def _axiom(self, c, succ: Formula) -> _Plan | None:
        mode = self.mode
        if c[0] == "L":
            f = formula_of_id(c[1])
            if f == succ:
                if mode == "lrbl-prime":
                    if isinstance(f, Prop):
                        return _Plan("IdAtomic")
                elif mode == "dfnl":
                    if _constant_free(f):
                        return _Plan("Id")
                else:
                    return _Plan("Id")
            if (f, succ) in self.phi:
                return _Plan("Hyp")
            if isinstance(f, Bot) and _mode_has(mode, "bot"):
                return _Plan("Bot")
            if isinstance(succ, Top) and _mode_has(mode, "top"):
                return _Plan("Top")
        return None

    def _weaken_to(self, c, keep_path) -> _Plan | None:
        """Plan deleting everything except the subtree at keep_path, then a
        continuation built by the caller on that subtree (returned as a chain
        with a hole: we return the list of deletions)."""
        steps = []
        path = keep_path
        while path:
            parent = path[:-1]
            # delete the sibling(s) of the kept child, innermost first
            node = c_sub(c, parent)
            if node[0] == "P":
                sib = 1 - path[-1]
                steps.append(parent + (sib,))
                c = c_delete(c, parent + (sib,))
                path = parent
            else:
                i = path[-1]
                kids = c_sub(c, parent)[1]
                for j in range(len(kids) - 1, -1, -1):
                    if j != i:
                        steps.append(parent + (j,))
                        c = c_delete(c, parent + (j,))
                path = parent
        return steps

    def _terminal_shortcut(self, c, succ: Formula) -> _Plan | None:
        """Goals provable outright by (weakening down to) an axiom leaf."""
        ax = self._axiom(c, succ)
        if ax is not None:
            return ax
        if not _mode_has(self.mode, "weaken") or c[0] == "L":
            return None
        for path, node in c_positions(c):
            if node[0] == "L":
                tail = self._axiom(node, succ)
                if tail is not None:
                    return self._chain_weaken(c, path, tail)
        return None

    def _chain_weaken(self, c, keep_path, tail: _Plan) -> _Plan:
        dels = self._weaken_to(c, keep_path)
        plan = tail
        for pos in reversed(dels):
            plan = _Plan("W", pos, (plan,))
        return plan

    # -- move generation ----------------------------------------------------

    def _eager_step(self, c, succ):
        """(rule, pos, premises as (c', succ') list) or None."""
        mode = self.mode
        for path, node in c_positions(c):
            if node[0] != "L":
                continue
            f = formula_of_id(node[1])
            if isinstance(f, Prod):
                prem = c_replace(c, path, ("P", ("L", intern_id(f.left)),
                                           ("L", intern_id(f.right))))
                return "ProdL", path, [(prem, succ)]
            if isinstance(f, And) and mode != "dfnl":
                prem = c_replace(c, path, c_meet([("L", intern_id(f.left)),
                                                  ("L", intern_id(f.right))]))
                return "AndL", path, [(prem, succ)]
        if isinstance(succ, Imp):
            prem = ("P", ("L", intern_id(succ.left)), c)
            return "ImpR", (), [(prem, succ.right)]
        if isinstance(succ, CoImp):
            prem = ("P", c, ("L", intern_id(succ.right)))
            return "CoImpR", (), [(prem, succ.left)]
        for path, node in c_positions(c):
            if node[0] == "L" and isinstance(formula_of_id(node[1]), Or):
                f = formula_of_id(node[1])
                p1 = c_replace(c, path, ("L", intern_id(f.left)))
                p2 = c_replace(c, path, ("L", intern_id(f.right)))
                return "OrL", path, [(p1, succ), (p2, succ)]
        if isinstance(succ, And) and mode != "dfnl":
            return "AndR", (), [(c, succ.left), (c, succ.right)]
        return None

    def _choices(self, c, succ):
        """Backtrackable moves, in search order: logical moves first, then
        shrinking weakenings, then the growing contractions."""
        out = []
        if isinstance(succ, Prod) and c[0] == "P":
            out.append(("ProdR", (), [(c[1], succ.left), (c[2], succ.right)]))
        if isinstance(succ, Or):
            out.append(("OrR1", (), [(c, succ.left)]))
            out.append(("OrR2", (), [(c, succ.right)]))
        if not self.use_eager:
            # everything the eager pass would normally own becomes a choice
            for path, node in c_positions(c):
                if node[0] != "L":
                    continue
                f = formula_of_id(node[1])
                if isinstance(f, Prod):
                    prem = c_replace(c, path, ("P", ("L", intern_id(f.left)),
                                               ("L", intern_id(f.right))))
                    out.append(("ProdL", path, [(prem, succ)]))
                elif isinstance(f, Or):
                    p1 = c_replace(c, path, ("L", intern_id(f.left)))
                    p2 = c_replace(c, path, ("L", intern_id(f.right)))
                    out.append(("OrL", path, [(p1, succ), (p2, succ)]))
                elif isinstance(f, And) and self.mode != "dfnl":
                    prem = c_replace(c, path, c_meet([("L", intern_id(f.left)),
                                                      ("L", intern_id(f.right))]))
                    out.append(("AndL", path, [(prem, succ)]))
            if isinstance(succ, Imp):
                out.append(("ImpR", (), [(("P", ("L", intern_id(succ.left)), c),
                                          succ.right)]))
            if isinstance(succ, CoImp):
                out.append(("CoImpR", (), [(("P", c, ("L", intern_id(succ.right))),
                                            succ.left)]))
            if isinstance(succ, And) and self.mode != "dfnl":
                out.append(("AndR", (), [(c, succ.left), (c, succ.right)]))
        if self.mode == "dfnl":
            for path, node in c_positions(c):
                if node[0] == "L" and isinstance(formula_of_id(node[1]), And):
                    f = formula_of_id(node[1])
                    prem = c_replace(c, path, c_meet([("L", intern_id(f.left)),
                                                      ("L", intern_id(f.right))]))
                    out.append(("AndL", path, [(prem, succ)]))
            if isinstance(succ, And):
                out.append(("AndR", (), [(c, succ.left), (c, succ.right)]))
        # left implication rules
        for path, node in c_positions(c):
            if node[0] != "P":
                continue
            _, l, r = node
            if r[0] == "L":
                f = formula_of_id(r[1])
                if isinstance(f, Imp):
                    p2 = c_replace(c, path, ("L", intern_id(f.right)))
                    out.append(("ImpL", path, [(l, f.left), (p2, succ)]))
            if l[0] == "L":
                f = formula_of_id(l[1])
                if isinstance(f, CoImp):
                    p1 = c_replace(c, path, ("L", intern_id(f.left)))
                    out.append(("CoImpL", path, [(p1, succ), (r, f.right)]))
        # weakening: top-leaf deletions first, then the rest
        if _mode_has(self.mode, "weaken") and c[0] != "L":
            tops, others = [], []
            for path, node in c_positions(c):
                if not path:
                    continue
                bucket = tops if (node[0] == "L" and isinstance(
                    formula_of_id(node[1]), Top)) else others
                bucket.append(("W", path, [(c_delete(c, path), succ)]))
            out.extend(tops)
            out.extend(others)
        # contractions grow the antecedent; bounded by max_structure_size
        oversize = False
        size = c_leafcount(c)
        cap = self.cfg.max_structure_size
        for path, node in c_positions(c):
            if node[0] == "P":
                extra = c_leafcount(node[2])
                if size + extra <= cap:
                    prem = c_replace(c, path, ("P", node, node[2]))
                    out.append(("ProdC", path, [(prem, succ)]))
                else:
                    oversize = True
        for path, node in c_positions(c):
            extra = c_leafcount(node)
            if size + extra <= cap:
                out.append(("MeetC", path,
                            [(c_replace(c, path, c_meet([node, node])), succ)]))
            else:
                oversize = True
        return out, oversize

    # -- the search --------------------------------------------------------

    def search(self, c, succ: Formula, depth: int):
        """Returns (plan-or-None, blockers, bound_hit)."""
        key = (c, intern_id(succ))
        hit = self.proved.get(key)
        if hit is not None:
            return hit, _EMPTY, False
        ent = self.fail_cache.get(key)
        if ent is not None:
            blockers, ebh, edepth = ent
            if blockers <= self.onstack and (not ebh or depth <= edepth):
                return None, blockers, ebh
        if key in self.onstack:
            return None, frozenset((key,)), False
        if self.filter is not None and self.filter.refutes(c, succ):
            self.fail_cache[key] = (_EMPTY, False, 0)
            return None, _EMPTY, False
        if depth <= 0:
            self.depth_hits += 1
            return None, _EMPTY, True
        self.nodes += 1
        self.onstack.add(key)
        try:
            plan, blockers, bh = self._attack(c, succ, depth)
        finally:
            self.onstack.discard(key)
        if plan is not None:
            self.proved[key] = plan
            return plan, _EMPTY, False
        blockers = blockers - {key}  # hits of this goal are self-contained
        self.fail_cache[key] = (blockers, bh, depth)
        return None, blockers, bh

    def _try_move(self, rule, pos, premises, depth):
        kids = []
        blockers, bh = set(), False
        for pc, ps in premises:
            if self.t is not None and not all(
                    self.t.contains(f) for f in itertools.chain(c_formulas(pc), [ps])):
                return None, _EMPTY, False  # rule not available under the T-restriction
            plan, b2, h2 = self.search(pc, ps, depth - 1)
            blockers |= b2
            bh = bh or h2
            if plan is None:
                return None, blockers, bh
            kids.append(plan)
        return _Plan(rule, pos, tuple(kids)), frozenset(blockers), bh

    def _attack(self, c, succ: Formula, depth: int):
        short = self._terminal_shortcut(c, succ)
        if short is not None:
            return short, _EMPTY, False
        blockers, bh = set(), False
        if self.use_eager:
            step = self._eager_step(c, succ)
            if step is not None:
                rule, pos, premises = step
                if any(c_leafcount(pc) > self.cfg.max_structure_size
                       for pc, _ in premises):
                    self.size_hits += 1
                    return None, _EMPTY, True
                return self._try_move(rule, pos, premises, depth)
        moves, oversize = self._choices(c, succ)
        for rule, pos, premises in moves:
            if any(c_leafcount(pc) > self.cfg.max_structure_size
                   for pc, _ in premises):
                self.size_hits += 1
                bh = True
                continue
            plan, b2, h2 = self._try_move(rule, pos, premises, depth)
            blockers |= b2
            bh = bh or h2
            if plan is not None:
                return plan, _EMPTY, False
        if oversize:
            self.size_hits += 1
            bh = True
        return None, frozenset(blockers), bh


# ---------------------------------------------------------------------------
# Elaboration of plans into raw derivations


def _elaborate(plan: _Plan, raw: Structure, succ: Formula) -> Derivation:
    seq = RblSequent(raw, succ)
    rule = plan.rule
    if rule in ("Id", "IdAtomic", "Top", "Bot", "Hyp"):
        assert isinstance(raw, Leaf)
        return Derivation(rule, seq, (), params_of(formula=raw.formula))
    c = canon(raw)
    if rule == "ImpR":
        prem = SProd(Leaf(succ.left), raw)
        return Derivation("ImpR", seq, (_elaborate(plan.kids[0], prem, succ.right),),
                          params_of(principal=succ))
    if rule == "CoImpR":
        prem = SProd(raw, Leaf(succ.right))
        return Derivation("CoImpR", seq, (_elaborate(plan.kids[0], prem, succ.left),),
                          params_of(principal=succ))
    if rule == "AndR":
        return Derivation("AndR", seq,
                          (_elaborate(plan.kids[0], raw, succ.left),
                           _elaborate(plan.kids[1], raw, succ.right)),
                          params_of(principal=succ))
    if rule in ("OrR1", "OrR2"):
        pick = succ.left if rule == "OrR1" else succ.right
        return Derivation(rule, seq, (_elaborate(plan.kids[0], raw, pick),),
                          params_of(principal=succ))
    if rule == "ProdR":
        assert isinstance(raw, SProd)
        return Derivation("ProdR", seq,
                          (_elaborate(plan.kids[0], raw.left, succ.left),
                           _elaborate(plan.kids[1], raw.right, succ.right)),
                          params_of(principal=succ))
    rpath = raw_path_of(raw, c, plan.pos)
    site = structure_at(raw, rpath)
    if rule == "ProdL":
        f = site.formula
        prem = replace_structure_at(raw, rpath, SProd(Leaf(f.left), Leaf(f.right)))
        return Derivation("ProdL", seq, (_elaborate(plan.kids[0], prem, succ),),
                          params_of(path=rpath, principal=f))
    if rule == "AndL":
        f = site.formula
        prem = replace_structure_at(raw, rpath, SMeet(Leaf(f.left), Leaf(f.right)))
        return Derivation("AndL", seq, (_elaborate(plan.kids[0], prem, succ),),
                          params_of(path=rpath, principal=f))
    if rule == "OrL":
        f = site.formula
        p1 = replace_structure_at(raw, rpath, Leaf(f.left))
        p2 = replace_structure_at(raw, rpath, Leaf(f.right))
        return Derivation("OrL", seq,
                          (_elaborate(plan.kids[0], p1, succ),
                           _elaborate(plan.kids[1], p2, succ)),
                          params_of(path=rpath, principal=f))
    if rule == "ImpL":
        f = site.right.formula
        prem2 = replace_structure_at(raw, rpath, Leaf(f.right))
        return Derivation("ImpL", seq,
                          (_elaborate(plan.kids[0], site.left, f.left),
                           _elaborate(plan.kids[1], prem2, succ)),
                          params_of(path=rpath, principal=f))
    if rule == "CoImpL":
        f = site.left.formula
        prem1 = replace_structure_at(raw, rpath, Leaf(f.left))
        return Derivation("CoImpL", seq,
                          (_elaborate(plan.kids[0], prem1, succ),
                           _elaborate(plan.kids[1], site.right, f.right)),
                          params_of(path=rpath, principal=f))
    if rule == "W":
        parent_path, i = rpath[:-1], rpath[-1]
        parent = structure_at(raw, parent_path)
        sibling = parent.right if i == 0 else parent.left
        prem = replace_structure_at(raw, parent_path, sibling)
        tag = "W1" if i == 0 else "W2"
        star = "meet" if isinstance(parent, SMeet) else "prod"
        return Derivation(tag, seq, (_elaborate(plan.kids[0], prem, succ),),
                          params_of(path=parent_path, star=star,
                                    removed=structure_at(raw, rpath)))
    if rule == "MeetC":
        prem = replace_structure_at(raw, rpath, SMeet(site, site))
        return Derivation("MeetC", seq, (_elaborate(plan.kids[0], prem, succ),),
                          params_of(path=rpath))
    if rule == "ProdC":
        prem = replace_structure_at(raw, rpath, SProd(site, site.right))
        return Derivation("ProdC", seq, (_elaborate(plan.kids[0], prem, succ),),
                          params_of(path=rpath))
    raise AssertionError(f"unknown plan rule {rule}")


# ---------------------------------------------------------------------------
# Public prover entry points


def _as_structure(seq: RblSequent) -> Structure:
    # the bare "=> A" statement is interchangeable with "top => A"
    return seq.antecedent if seq.antecedent is not None else Leaf(Top())


def prove_lrbl(seq: RblSequent, cfg: ProverConfig = ProverConfig()) -> SearchOutcome:
    """Bounded backward search.  Proved derivations are cut-free, use only
    rules of cfg.mode, take Hyp leaves from cfg.phi only, and are T-sequent
    throughout when cfg.t_restriction is set."""
    for f in _sequent_formulas(seq):
        if not is_rbl(f):
            raise LanguageError(f"{f} is not an RBL formula")
    if cfg.t_restriction is not None:
        t = cfg.t_restriction
        bad = [f for f in _sequent_formulas(seq) if not t.contains(f)]
        if bad:
            raise ValueError(f"goal is not a T-sequent: {bad[0]} is outside T")
    raw = _as_structure(seq)
    s = _Search(cfg)
    goal_c = canon(raw)
    s.init_filter(goal_c, seq.succedent)
    # iterative deepening: wrong branches are cut at shallow horizons before
    # the contraction space is wandered; the failure cache is depth-aware, so
    # nothing unsound is reused between rounds
    budgets = list(range(6, cfg.max_depth, 6)) + [cfg.max_depth]
    plan = None
    bound_hit = False
    for budget in budgets:
        plan, _, bound_hit = s.search(goal_c, seq.succedent, budget)
        if plan is not None:
            break
    if plan is None:
        return Exhausted(s.nodes, not bound_hit, s.depth_hits, s.size_hits)
    return Proved(_elaborate(plan, raw, seq.succedent))


def _sequent_formulas(seq: RblSequent):
    if seq.antecedent is not None:
        for f in c_formulas(canon(seq.antecedent)):
            yield f
    yield seq.succedent


def prove_bpl(a: Formula, cfg: ProverConfig = ProverConfig()) -> SearchOutcome:
    """BPL theoremhood via the conservativity bridge: prove top => a."""
    from .syntax import is_bpl
    if not is_bpl(a):
        raise LanguageError(f"{a} is not a BPL formula")
    return prove_lrbl(RblSequent(Leaf(Top()), a), cfg)


def derivable_T(a: Formula, b: Formula, t: TClosure,
                cfg: ProverConfig = ProverConfig()) -> SearchOutcome:
    """T-restricted derivability of a => b (the order oracle for the
    syntactic model)."""
    if not t.contains(a) or not t.contains(b):
        raise ValueError("both endpoints must lie in T")
    cfg = replace(cfg, t_restriction=t)
    return prove_lrbl(RblSequent(Leaf(a), b), cfg)


# ---------------------------------------------------------------------------
# Identity expansion (used by interpolation in atomic-identity mode)


def id_derivation(f: Formula, mode: str = "lrbl") -> Derivation:
    """A derivation of f => f; in lrbl-prime mode the general identity is
    expanded down to atomic leaves."""
    seq = RblSequent(Leaf(f), f)
    if mode != "lrbl-prime":
        if mode == "dfnl" and not _constant_free(f):
            raise LanguageError("identity on constants is not derivable in dfnl mode")
        return Derivation("Id", seq, (), params_of(formula=f))
    if isinstance(f, Prop):
        return Derivation("IdAtomic", seq, (), params_of(formula=f))
    if isinstance(f, Top):
        return Derivation("Top", seq, (), params_of(formula=f))
    if isinstance(f, Bot):
        return Derivation("Bot", seq, (), params_of(formula=f))
    if isinstance(f, And):
        a, b = f.left, f.right
        left = Derivation(
            "AndL", RblSequent(Leaf(f), a),
            (Derivation("W2", RblSequent(SMeet(Leaf(a), Leaf(b)), a),
                        (id_derivation(a, mode),),
                        params_of(path=(), star="meet", removed=Leaf(b))),),
            params_of(path=(), principal=f))
        right = Derivation(
            "AndL", RblSequent(Leaf(f), b),
            (Derivation("W1", RblSequent(SMeet(Leaf(a), Leaf(b)), b),
                        (id_derivation(b, mode),),
                        params_of(path=(), star="meet", removed=Leaf(a))),),
            params_of(path=(), principal=f))
        return Derivation("AndR", seq, (left, right), params_of(principal=f))
    if isinstance(f, Or):
        a, b = f.left, f.right
        p1 = Derivation("OrR1", RblSequent(Leaf(a), f), (id_derivation(a, mode),),
                        params_of(principal=f))
        p2 = Derivation("OrR2", RblSequent(Leaf(b), f), (id_derivation(b, mode),),
                        params_of(principal=f))
        return Derivation("OrL", seq, (p1, p2), params_of(path=(), principal=f))
    if isinstance(f, Prod):
        a, b = f.left, f.right
        inner = Derivation("ProdR", RblSequent(SProd(Leaf(a), Leaf(b)), f),
                           (id_derivation(a, mode), id_derivation(b, mode)),
                           params_of(principal=f))
        return Derivation("ProdL", seq, (inner,), params_of(path=(), principal=f))
    if isinstance(f, Imp):
        a, b = f.left, f.right
        site = SProd(Leaf(a), Leaf(f))
        impl = Derivation("ImpL", RblSequent(site, b),
                          (id_derivation(a, mode), id_derivation(b, mode)),
                          params_of(path=(), principal=f))
        return Derivation("ImpR", seq, (impl,), params_of(principal=f))
    if isinstance(f, CoImp):
        a, b = f.left, f.right
        site = SProd(Leaf(f), Leaf(b))
        impl = Derivation("CoImpL", RblSequent(site, a),
                          (id_derivation(a, mode), id_derivation(b, mode)),
                          params_of(path=(), principal=f))
        return Derivation("CoImpR", seq, (impl,), params_of(principal=f))
    raise LanguageError(f"cannot expand identity for {type(f).__name__}")


# ---------------------------------------------------------------------------
# Checking raw derivations


def check_lrbl(d: Derivation, cfg: ProverConfig = ProverConfig(),
               allow_cut: bool = True) -> CheckResult:
    """Exact schema validation with context substitution verified
    structurally.  Cut nodes are accepted (check mode) unless allow_cut is
    False; mode restrictions and Hyp membership in cfg.phi are enforced, and
    every sequent must be a T-sequent when cfg.t_restriction is set."""
    for path, node in d.nodes():
        r = _check_node_lrbl(node, cfg, allow_cut)
        if r is not None:
            return reject(path, r)
        if cfg.t_restriction is not None:
            for f in _node_formulas(node.conclusion):
                if not cfg.t_restriction.contains(f):
                    return reject(path, f"not a T-sequent: {format_formula(f)} outside T")
    return ACCEPT


def _node_formulas(seq: RblSequent):
    if not isinstance(seq, RblSequent) or seq.antecedent is None:
        return
    for f in _sequent_formulas(seq):
        yield f


def _check_node_lrbl(node: Derivation, cfg: ProverConfig, allow_cut: bool) -> str | None:
    seq = node.conclusion
    if not isinstance(seq, RblSequent) or seq.antecedent is None:
        return "conclusion must be a structure sequent"
    ante, succ = seq.antecedent, seq.succedent
    rule, prem = node.rule, node.premises
    mode = cfg.mode
    if mode == "dfnl" and rule in ("Top", "Bot", "W1", "W2", "ProdC"):
        return f"{rule} is not available in dfnl mode"
    if mode == "lrbl-prime" and rule == "Id":
        return "general identity is not available in lrbl-prime mode"

    def prem_seq(i) -> RblSequent:
        return prem[i].conclusion

    def arity(n) -> str | None:
        return None if len(prem) == n else f"{rule} expects {n} premises"

    if rule == "Id":
        if arity(0):
            return arity(0)
        if not (isinstance(ante, Leaf) and ante.formula == succ):
            return "Id endpoints differ"
        if mode == "dfnl" and not _constant_free(succ):
            return "Id on constants is excluded in dfnl mode"
        return None
    if rule == "IdAtomic":
        if arity(0):
            return arity(0)
        if not isinstance(succ, Prop):
            return "IdAtomic needs an atomic formula"
        if not (isinstance(ante, Leaf) and ante.formula == succ):
            return "IdAtomic endpoints differ"
        return None
    if rule == "Top":
        if arity(0):
            return arity(0)
        if not isinstance(succ, Top):
            return "Top succedent must be top"
        if not isinstance(ante, Leaf):
            return "Top antecedent must be a single formula"
        return None
    if rule == "Bot":
        if arity(0):
            return arity(0)
        if not (isinstance(ante, Leaf) and isinstance(ante.formula, Bot)):
            return "Bot antecedent must be bot"
        return None
    if rule == "Hyp":
        if arity(0):
            return arity(0)
        if not isinstance(ante, Leaf):
            return "Hyp antecedent must be a single formula"
        if (ante.formula, succ) not in cfg.phi:
            return "Hyp sequent is not among the hypotheses"
        return None

    if rule == "ImpR":
        if arity(1):
            return arity(1)
        if not isinstance(succ, Imp):
            return "ImpR succedent must be an implication"
        want = RblSequent(SProd(Leaf(succ.left), ante), succ.right)
        return None if prem_seq(0) == want else f"ImpR premise must be {want}"
    if rule == "CoImpR":
        if arity(1):
            return arity(1)
        if not isinstance(succ, CoImp):
            return "CoImpR succedent must be a co-implication"
        want = RblSequent(SProd(ante, Leaf(succ.right)), succ.left)
        return None if prem_seq(0) == want else f"CoImpR premise must be {want}"
    if rule == "AndR":
        if arity(2):
            return arity(2)
        if not isinstance(succ, And):
            return "AndR succedent must be a conjunction"
        w1 = RblSequent(ante, succ.left)
        w2 = RblSequent(ante, succ.right)
        if prem_seq(0) != w1 or prem_seq(1) != w2:
            return "AndR premises must share the conclusion antecedent"
        return None
    if rule in ("OrR1", "OrR2"):
        if arity(1):
            return arity(1)
        if not isinstance(succ, Or):
            return f"{rule} succedent must be a disjunction"
        pick = succ.left if rule == "OrR1" else succ.right
        want = RblSequent(ante, pick)
        return None if prem_seq(0) == want else f"{rule} premise must be {want}"
    if rule == "ProdR":
        if arity(2):
            return arity(2)
        if not isinstance(succ, Prod):
            return "ProdR succedent must be a product"
        if not isinstance(ante, SProd):
            return "ProdR antecedent must split at a product node"
        w1 = RblSequent(ante.left, succ.left)
        w2 = RblSequent(ante.right, succ.right)
        if prem_seq(0) != w1 or prem_seq(1) != w2:
            return "ProdR premises do not match the split"
        return None

    path = node.param("path")
    if path is None:
        return f"{rule} needs a hole path parameter"
    try:
        site = structure_at(ante, tuple(path))
    except ValueError:
        return f"{rule} hole path leaves the antecedent"

    if rule == "ProdL":
        if arity(1):
            return arity(1)
        if not (isinstance(site, Leaf) and isinstance(site.formula, Prod)):
            return "ProdL site must be a product formula leaf"
        f = site.formula
        want = RblSequent(replace_structure_at(
            ante, tuple(path), SProd(Leaf(f.left), Leaf(f.right))), succ)
        return None if prem_seq(0) == want else f"ProdL premise must be {want}"
    if rule == "AndL":
        if arity(1):
            return arity(1)
        if not (isinstance(site, Leaf) and isinstance(site.formula, And)):
            return "AndL site must be a conjunction leaf"
        f = site.formula
        want = RblSequent(replace_structure_at(
            ante, tuple(path), SMeet(Leaf(f.left), Leaf(f.right))), succ)
        return None if prem_seq(0) == want else f"AndL premise must be {want}"
    if rule == "OrL":
        if arity(2):
            return arity(2)
        if not (isinstance(site, Leaf) and isinstance(site.formula, Or)):
            return "OrL site must be a disjunction leaf"
        f = site.formula
        w1 = RblSequent(replace_structure_at(ante, tuple(path), Leaf(f.left)), succ)
        w2 = RblSequent(replace_structure_at(ante, tuple(path), Leaf(f.right)), succ)
        if prem_seq(0) != w1 or prem_seq(1) != w2:
            return "OrL premises do not match the two disjuncts"
        return None
    if rule == "ImpL":
        if arity(2):
            return arity(2)
        if not (isinstance(site, SProd) and isinstance(site.right, Leaf)
                and isinstance(site.right.formula, Imp)):
            return "ImpL site must be Delta . (A -> B)"
        f = site.right.formula
        w1 = RblSequent(site.left, f.left)
        w2 = RblSequent(replace_structure_at(ante, tuple(path), Leaf(f.right)), succ)
        if prem_seq(0) != w1:
            return f"ImpL first premise must be {w1}"
        if prem_seq(1) != w2:
            return f"ImpL second premise must be {w2}"
        return None
    if rule == "CoImpL":
        if arity(2):
            return arity(2)
        if not (isinstance(site, SProd) and isinstance(site.left, Leaf)
                and isinstance(site.left.formula, CoImp)):
            return "CoImpL site must be (A <- B) . Delta"
        f = site.left.formula
        w1 = RblSequent(replace_structure_at(ante, tuple(path), Leaf(f.left)), succ)
        w2 = RblSequent(site.right, f.right)
        if prem_seq(0) != w1:
            return f"CoImpL first premise must be {w1}"
        if prem_seq(1) != w2:
            return f"CoImpL second premise must be {w2}"
        return None
    if rule == "MeetC":
        if arity(1):
            return arity(1)
        want = RblSequent(replace_structure_at(
            ante, tuple(path), SMeet(site, site)), succ)
        return None if prem_seq(0) == want else "MeetC premise must duplicate the site"
    if rule == "ProdC":
        if arity(1):
            return arity(1)
        if not isinstance(site, SProd):
            return "Lambda is not empty: ProdC site must be a product Lambda . Delta"
        want = RblSequent(replace_structure_at(
            ante, tuple(path), SProd(site, site.right)), succ)
        return None if prem_seq(0) == want else "ProdC premise must duplicate the right part"
    if rule == "MeetE":
        if arity(1):
            return arity(1)
        if not isinstance(site, SMeet):
            return "MeetE site must be a meet"
        want = RblSequent(replace_structure_at(
            ante, tuple(path), SMeet(site.right, site.left)), succ)
        return None if prem_seq(0) == want else "MeetE premise must swap the site"
    if rule == "MeetA1":
        if arity(1):
            return arity(1)
        if not (isinstance(site, SMeet) and isinstance(site.right, SMeet)):
            return "MeetA1 conclusion site must be D1 ^ (D2 ^ D3)"
        d1, d2, d3 = site.left, site.right.left, site.right.right
        want = RblSequent(replace_structure_at(
            ante, tuple(path), SMeet(SMeet(d1, d2), d3)), succ)
        return None if prem_seq(0) == want else "MeetA1 premise must be left-nested"
    if rule == "MeetA2":
        if arity(1):
            return arity(1)
        if not (isinstance(site, SMeet) and isinstance(site.left, SMeet)):
            return "MeetA2 conclusion site must be (D1 ^ D2) ^ D3"
        d1, d2, d3 = site.left.left, site.left.right, site.right
        want = RblSequent(replace_structure_at(
            ante, tuple(path), SMeet(d1, SMeet(d2, d3))), succ)
        return None if prem_seq(0) == want else "MeetA2 premise must be right-nested"
    if rule in ("W1", "W2"):
        if arity(1):
            return arity(1)
        if not isinstance(site, (SProd, SMeet)):
            return f"{rule} site must be a binary structure node"
        star = node.param("star")
        if star is not None:
            want_star = "meet" if isinstance(site, SMeet) else "prod"
            if star != want_star:
                return f"{rule} star parameter does not match the site"
        kept = site.right if rule == "W1" else site.left
        want = RblSequent(replace_structure_at(ante, tuple(path), kept), succ)
        return None if prem_seq(0) == want else f"{rule} premise must drop the added part"
    if rule == "Cut":
        if not allow_cut:
            return "Cut is not accepted here"
        if arity(2):
            return arity(2)
        cut_formula = prem_seq(0).succedent
        w2 = RblSequent(replace_structure_at(ante, tuple(path), Leaf(cut_formula)), succ)
        if prem_seq(1) != w2:
            return "Cut second premise must have the cut formula at the hole"
        if prem_seq(0).antecedent != site:
            return "Cut conclusion must substitute the first premise's antecedent"
        return None
    return f"unknown rule {rule}"
