"""Brute-force Kripke refutation engines.

Four frame flavors serve as independent oracles: intuitionistic (preorder,
persistent valuation), K4 (transitive), wK4 (weakly transitive) and BPL
(transitive, persistent valuation, strict-successor implication; the exact
clause follows the Visser tradition and is an external oracle, not a claim
about the source calculi).  No prover is implemented: refute() either finds
a countermodel within the world bound or reports none, which is not a
validity proof.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .syntax import (
    And, Bot, Box, CoImp, Dia, Formula, Imp, LanguageError, Or, Prod, Prop,
    Top, atoms, children, format_formula, is_modal,
)

FLAVORS = ("int", "k4", "wk4", "bpl")
MAX_WORLDS_CAP = 4

Relation = tuple[tuple[bool, ...], ...]
Valuation = dict[str, frozenset[int]]


def _reflexive(rel: Relation) -> bool:
    return all(rel[w][w] for w in range(len(rel)))


def _transitive(rel: Relation) -> bool:
    n = len(rel)
    return all(not (rel[w][v] and rel[v][u]) or rel[w][u]
               for w in range(n) for v in range(n) for u in range(n))


def _weakly_transitive(rel: Relation) -> bool:
    n = len(rel)
    return all(not (rel[w][v] and rel[v][u] and w != u) or rel[w][u]
               for w in range(n) for v in range(n) for u in range(n))


_FRAME_CONDITIONS = {
    "int": lambda r: _reflexive(r) and _transitive(r),
    "k4": _transitive,
    "wk4": _weakly_transitive,
    "bpl": _transitive,
}

_PERSISTENT = {"int": True, "bpl": True, "k4": False, "wk4": False}
# Implication ranges over all successors; int frames are reflexive so the
# current world is included, bpl frames use the bare (strict) relation.
_IMP_BY_RELATION = {"int", "bpl"}


@dataclass(frozen=True)
class Frame:
    worlds: int
    relation: Relation
    flavor: str

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if len(self.relation) != self.worlds or any(
                len(row) != self.worlds for row in self.relation):
            raise ValueError("relation matrix shape mismatch")
        if not _FRAME_CONDITIONS[self.flavor](self.relation):
            raise ValueError(f"relation violates the {self.flavor} frame condition")

    def successors(self, w: int) -> tuple[int, ...]:
        return tuple(v for v in range(self.worlds) if self.relation[w][v])


def check_valuation(frame: Frame, valuation: Valuation) -> None:
    if not _PERSISTENT[frame.flavor]:
        return
    for atom, ws in valuation.items():
        for w in ws:
            for v in frame.successors(w):
                if v not in ws:
                    raise ValueError(
                        f"valuation of {atom} not persistent: {w} R {v}")


def eval_modal(f: Formula, frame: Frame, valuation: Valuation, world: int) -> bool:
    """Standard forcing clauses; -> is evaluated over the frame relation for
    the int and bpl flavors and classically otherwise."""
    if isinstance(f, (CoImp, Prod)):
        raise LanguageError(f"{format_formula(f)} is not a modal/Int formula")
    if isinstance(f, Prop):
        return world in valuation.get(f.name, frozenset())
    if isinstance(f, Bot):
        return False
    if isinstance(f, Top):
        return True
    if isinstance(f, And):
        return (eval_modal(f.left, frame, valuation, world)
                and eval_modal(f.right, frame, valuation, world))
    if isinstance(f, Or):
        return (eval_modal(f.left, frame, valuation, world)
                or eval_modal(f.right, frame, valuation, world))
    if isinstance(f, Imp):
        if frame.flavor in _IMP_BY_RELATION:
            return all(not eval_modal(f.left, frame, valuation, v)
                       or eval_modal(f.right, frame, valuation, v)
                       for v in frame.successors(world))
        return (not eval_modal(f.left, frame, valuation, world)
                or eval_modal(f.right, frame, valuation, world))
    if isinstance(f, Box):
        return all(eval_modal(f.child, frame, valuation, v)
                   for v in frame.successors(world))
    if isinstance(f, Dia):
        return any(eval_modal(f.child, frame, valuation, v)
                   for v in frame.successors(world))
    raise LanguageError(f"cannot evaluate {type(f).__name__}")


# ---------------------------------------------------------------------------
# Frame enumeration (canonical representatives modulo world permutation;
# forcing is invariant under frame isomorphism, so results are identical to
# the full labeled enumeration)


def _canonical(bits: tuple[int, ...], n: int) -> tuple[int, ...]:
    best = bits
    for perm in itertools.permutations(range(n)):
        img = tuple(bits[perm[w] * n + perm[v]] for w in range(n) for v in range(n))
        if img < best:
            best = img
    return best


@lru_cache(maxsize=None)
def flavor_relations(n: int, flavor: str) -> tuple[Relation, ...]:
    cond = _FRAME_CONDITIONS[flavor]
    seen: set[tuple[int, ...]] = set()
    out: list[Relation] = []
    for bits in itertools.product((0, 1), repeat=n * n):
        rel = tuple(tuple(bool(bits[w * n + v]) for v in range(n)) for w in range(n))
        if not cond(rel):
            continue
        canon = _canonical(bits, n)
        if canon in seen:
            continue
        seen.add(canon)
        out.append(rel)
    return tuple(out)


@lru_cache(maxsize=None)
def _upsets(rel_key: Relation) -> tuple[frozenset[int], ...]:
    n = len(rel_key)
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        s = frozenset(w for w in range(n) if bits[w])
        if all(v in s for w in s for v in range(n) if rel_key[w][v]):
            out.append(s)
    return tuple(out)


# ---------------------------------------------------------------------------
# Vectorized evaluation over all valuations of one frame at once


class _FrameEval:
    """Evaluates a plan as boolean arrays of shape (V, n) over V valuations."""

    def __init__(self, rel: Relation, flavor: str, atom_arrays: dict[str, np.ndarray],
                 n_valuations: int):
        self.flavor = flavor
        self.atoms = atom_arrays
        self.n = len(rel)
        self.V = n_valuations
        R = np.array(rel, dtype=bool)
        # Powers of R eventually cycle (they stabilize in transitive frames,
        # may 2-cycle in weakly transitive ones); precompute prefix + cycle so
        # a box-run costs O(1) array ops regardless of its length.
        pows = [R]
        while True:
            nxt = np.matmul(pows[-1].astype(np.uint8), R.astype(np.uint8)) > 0
            rep = next((j for j, P in enumerate(pows) if (nxt == P).all()), None)
            if rep is not None:
                self._cycle_start = rep  # pows[rep] == R^(len(pows)+1)
                break
            pows.append(nxt)
        self.relpows = pows
        self.cache: dict = {}

    def relpow(self, k: int) -> np.ndarray:
        if k <= len(self.relpows):
            return self.relpows[k - 1]
        a, m = self._cycle_start, len(self.relpows)
        period = m - a
        return self.relpows[a + ((k - 1 - a) % period)]

    def _box_over(self, R: np.ndarray, X: np.ndarray) -> np.ndarray:
        # true at w iff no R-successor falsifies X
        return ~(np.matmul(~X, R.T.astype(np.uint8)).astype(bool))

    def run(self, plan) -> np.ndarray:
        key = id(plan)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        tag = plan[0]
        if tag == "p":
            out = self.atoms[plan[1]]
        elif tag == "bot":
            out = np.zeros((self.V, self.n), dtype=bool)
        elif tag == "top":
            out = np.ones((self.V, self.n), dtype=bool)
        elif tag == "and":
            out = self.run(plan[1]) & self.run(plan[2])
        elif tag == "or":
            out = self.run(plan[1]) | self.run(plan[2])
        elif tag == "imp":
            a, b = self.run(plan[1]), self.run(plan[2])
            if self.flavor in _IMP_BY_RELATION:
                out = self._box_over(self.relpows[0], ~a | b)
            else:
                out = ~a | b
        elif tag == "boxn":
            out = self._box_over(self.relpow(plan[1]), self.run(plan[2]))
        elif tag == "dia":
            x = self.run(plan[1])
            out = np.matmul(x, self.relpows[0].T.astype(np.uint8)).astype(bool)
        else:
            raise AssertionError(plan)
        self.cache[key] = out
        return out


def _plan_nodes_shared(f: Formula, collapse_top_imp: bool):
    """Build an evaluation plan with subterm sharing so the eval cache
    deduplicates.  top->X collapses to X only under classical implication
    (k4/wk4); for relational implication the antecedent quantifies over
    successors and the collapse would be unsound."""
    memo: dict[Formula, object] = {}

    def go(g: Formula):
        got = memo.get(g)
        if got is None:
            if collapse_top_imp and isinstance(g, Imp) and isinstance(g.left, Top):
                got = go(g.right)
            elif isinstance(g, Box):
                k, h = 1, g.child
                while isinstance(h, Box):
                    k += 1
                    h = h.child
                got = ("boxn", k, go(h))
            elif isinstance(g, Prop):
                got = ("p", g.name)
            elif isinstance(g, Bot):
                got = ("bot",)
            elif isinstance(g, Top):
                got = ("top",)
            elif isinstance(g, (And, Or, Imp)):
                tag = {"And": "and", "Or": "or", "Imp": "imp"}[type(g).__name__]
                got = (tag, go(g.left), go(g.right))
            elif isinstance(g, Dia):
                got = ("dia", go(g.child))
            else:
                raise LanguageError(f"cannot evaluate {type(g).__name__}")
            memo[g] = got
        return got

    return go(f)


@dataclass(frozen=True)
class Countermodel:
    frame: Frame
    valuation: Valuation
    world: int

    def to_dict(self) -> dict:
        return {
            "worlds": self.frame.worlds,
            "flavor": self.frame.flavor,
            "relation": [[int(b) for b in row] for row in self.frame.relation],
            "valuation": {a: sorted(ws) for a, ws in self.valuation.items()},
            "witness_world": self.world,
        }


def _valuation_arrays(n: int, names: list[str], rel: Relation, persistent: bool):
    """All valuations as one array per atom, shape (V, n)."""
    if persistent:
        sets = _upsets(rel)
    else:
        sets = tuple(frozenset(w for w in range(n) if bits[w])
                     for bits in itertools.product((0, 1), repeat=n))
    per_atom = np.zeros((len(sets), n), dtype=bool)
    for i, s in enumerate(sets):
        for w in s:
            per_atom[i, w] = True
    k = len(names)
    V = len(sets) ** k
    arrays = {}
    for j, name in enumerate(names):
        reps_inner = len(sets) ** (k - 1 - j)
        idx = (np.arange(V) // reps_inner) % len(sets)
        arrays[name] = per_atom[idx]
    return arrays, sets


def _valuation_from_index(index: int, names: list[str], sets) -> Valuation:
    k = len(names)
    out: Valuation = {}
    for j, name in enumerate(names):
        reps_inner = len(sets) ** (k - 1 - j)
        out[name] = sets[(index // reps_inner) % len(sets)]
    return out


def refute(f: Formula, flavor: str, max_worlds: int = 4) -> Countermodel | None:
    """Exhaustive countermodel search over frames with at most max_worlds
    worlds (up to isomorphism).  None means no countermodel within the bound,
    NOT that the formula is valid."""
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    if max_worlds > MAX_WORLDS_CAP:
        raise ValueError(f"max_worlds {max_worlds} exceeds the hard cap {MAX_WORLDS_CAP}")
    if not is_modal(f):
        raise LanguageError(f"{format_formula(f)} is not a modal-language formula")
    if flavor in ("int", "bpl") and any(isinstance(g, (Box, Dia)) for g in _subterms(f)):
        raise LanguageError("box/dia are not part of the int/bpl languages")
    names = sorted(atoms(f))
    plan = _plan_nodes_shared(f, collapse_top_imp=flavor not in _IMP_BY_RELATION)
    persistent = _PERSISTENT[flavor]
    for n in range(1, max_worlds + 1):
        for rel in flavor_relations(n, flavor):
            arrays, sets = _valuation_arrays(n, names, rel, persistent)
            V = next(iter(arrays.values())).shape[0] if arrays else 1
            ev = _FrameEval(rel, flavor, arrays, V)
            truth = ev.run(plan)
            false_at = np.argwhere(~truth)
            if false_at.size:
                vi, world = int(false_at[0][0]), int(false_at[0][1])
                frame = Frame(n, rel, flavor)
                valuation = _valuation_from_index(vi, names, sets) if names else {}
                cm = Countermodel(frame, valuation, world)
                # a returned model must re-evaluate to false independently
                assert eval_modal(f, frame, valuation, world) is False
                return cm
    return None


def _subterms(f: Formula):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(children(g))
