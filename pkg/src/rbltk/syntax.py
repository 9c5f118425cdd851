"""Formula and structure trees shared by every engine in the toolkit.

Formulas cover four languages at once (intuitionistic, BPL, residuated
basic, modal); per-language membership is checked by predicates at module
boundaries instead of separate AST types, because the translations cross
languages constantly.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Iterator, Union

# Trees get deep (top-chain wrappers nest linearly in the sequent weight);
# structural __eq__/__hash__ recurse, so give CPython headroom.
if sys.getrecursionlimit() < 30_000:
    sys.setrecursionlimit(30_000)

POSITIVE = 1
NEGATIVE = -1


class LanguageError(ValueError):
    """A formula uses a connective outside the requested language."""


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return format_formula(self)


def _hash_cache(obj, *parts) -> None:
    object.__setattr__(obj, "_hash", hash(parts))


@dataclass(frozen=True, eq=True)
class Prop(Formula):
    name: str
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _hash_cache(self, "p", self.name)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=True)
class Bot(Formula):
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _hash_cache(self, "bot")

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=True)
class Top(Formula):
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _hash_cache(self, "top")

    def __hash__(self):
        return self._hash


class _BinOp(Formula):
    __slots__ = ()


def _binop(tag):
    @dataclass(frozen=True, eq=True)
    class Node(_BinOp):
        left: Formula
        right: Formula
        _hash: int = field(init=False, compare=False, repr=False)

        def __post_init__(self):
            _hash_cache(self, tag, self.left._hash, self.right._hash)

        def __hash__(self):
            return self._hash

    Node.__name__ = Node.__qualname__ = tag
    return Node


And = _binop("And")
Or = _binop("Or")
Imp = _binop("Imp")      # ->
CoImp = _binop("CoImp")  # <-
Prod = _binop("Prod")    # .


def _unop(tag):
    @dataclass(frozen=True, eq=True)
    class Node(Formula):
        child: Formula
        _hash: int = field(init=False, compare=False, repr=False)

        def __post_init__(self):
            _hash_cache(self, tag, self.child._hash)

        def __hash__(self):
            return self._hash

    Node.__name__ = Node.__qualname__ = tag
    return Node


Box = _unop("Box")
Dia = _unop("Dia")

BOT = Bot()
TOP = Top()


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _BinOp):
        return (f.left, f.right)
    if isinstance(f, (Box, Dia)):
        return (f.child,)
    return ()


def _walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(children(g))


def is_int(f: Formula) -> bool:
    """Built from letters and bot with and/or and intuitionistic ->."""
    return all(isinstance(g, (Prop, Bot, And, Or, Imp)) for g in _walk(f))


def is_bpl(f: Formula) -> bool:
    return all(isinstance(g, (Prop, Bot, Top, And, Or, Imp)) for g in _walk(f))


def is_rbl(f: Formula) -> bool:
    return not any(isinstance(g, (Box, Dia)) for g in _walk(f))


def is_modal(f: Formula) -> bool:
    return not any(isinstance(g, (CoImp, Prod)) for g in _walk(f))


def atoms(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in _walk(f) if isinstance(g, Prop))


def subformulas(f: Formula) -> frozenset[Formula]:
    """Subterm closure of f, including f itself."""
    return frozenset(_walk(f))


def formula_at(f: Formula, path: tuple[int, ...]) -> Formula:
    for i in path:
        kids = children(f)
        if i >= len(kids):
            raise ValueError(f"path {path!r} leaves the formula")
        f = kids[i]
    return f


def replace_formula_at(f: Formula, path: tuple[int, ...], g: Formula) -> Formula:
    if not path:
        return g
    i, rest = path[0], path[1:]
    kids = children(f)
    if i >= len(kids):
        raise ValueError(f"path {path!r} leaves the formula")
    new = replace_formula_at(kids[i], rest, g)
    if isinstance(f, _BinOp):
        return type(f)(new, f.right) if i == 0 else type(f)(f.left, new)
    return type(f)(new)


def formula_occurrences(f: Formula) -> Iterator[tuple[tuple[int, ...], Formula]]:
    stack = [((), f)]
    while stack:
        path, g = stack.pop()
        yield path, g
        for i, kid in enumerate(children(g)):
            stack.append((path + (i,), kid))


def formula_size(f: Formula) -> int:
    return sum(1 for _ in _walk(f))


# A process-stable total order on formulas: intern ids are assigned on first
# request, so sorting is deterministic for a fixed input and O(1) per compare.
_intern: dict[Formula, int] = {}


def formula_key(f: Formula) -> int:
    fid = _intern.get(f)
    if fid is None:
        fid = len(_intern)
        _intern[f] = fid
    return fid


_by_id: dict[int, Formula] = {}


def intern_id(f: Formula) -> int:
    fid = formula_key(f)
    _by_id[fid] = f
    return fid


def formula_of_id(fid: int) -> Formula:
    return _by_id[fid]


# ---------------------------------------------------------------------------
# Structures (antecedents of residuated sequents)


class Structure:
    __slots__ = ()

    def __str__(self) -> str:
        return format_structure(self)


@dataclass(frozen=True, eq=True)
class Leaf(Structure):
    formula: Formula
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _hash_cache(self, "L", self.formula._hash)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=True)
class SProd(Structure):
    """Binary, non-associative structure product (the paper's circle-dot)."""

    left: Structure
    right: Structure
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _hash_cache(self, "SP", self.left._hash, self.right._hash)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=True)
class SMeet(Structure):
    """Binary structure meet; never normalized here (the prover may)."""

    left: Structure
    right: Structure
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _hash_cache(self, "SM", self.left._hash, self.right._hash)

    def __hash__(self):
        return self._hash


def structure_children(s: Structure) -> tuple[Structure, ...]:
    if isinstance(s, Leaf):
        return ()
    return (s.left, s.right)


def structure_at(s: Structure, path: tuple[int, ...]) -> Structure:
    for i in path:
        if isinstance(s, Leaf):
            raise ValueError(f"path {path!r} descends into a leaf")
        s = s.left if i == 0 else s.right
    return s


def replace_structure_at(s: Structure, path: tuple[int, ...], new: Structure) -> Structure:
    if not path:
        return new
    if isinstance(s, Leaf):
        raise ValueError(f"path {path!r} descends into a leaf")
    i, rest = path[0], path[1:]
    if i == 0:
        return type(s)(replace_structure_at(s.left, rest, new), s.right)
    return type(s)(s.left, replace_structure_at(s.right, rest, new))


def structure_positions(s: Structure) -> Iterator[tuple[tuple[int, ...], Structure]]:
    stack = [((), s)]
    while stack:
        path, t = stack.pop()
        yield path, t
        if not isinstance(t, Leaf):
            stack.append((path + (0,), t.left))
            stack.append((path + (1,), t.right))


def structure_leaves(s: Structure) -> Iterator[tuple[tuple[int, ...], Formula]]:
    for path, t in structure_positions(s):
        if isinstance(t, Leaf):
            yield path, t.formula


def leaf_count(s: Structure) -> int:
    return sum(1 for _ in structure_leaves(s))


def mu(s: Structure) -> Formula:
    """Collapse a structure to its formula image: leaves fixed, prod to ., meet to &."""
    if isinstance(s, Leaf):
        return s.formula
    if isinstance(s, SProd):
        return Prod(mu(s.left), mu(s.right))
    return And(mu(s.left), mu(s.right))


@dataclass(frozen=True)
class Context:
    """A structure with one distinguished hole, named by its path."""

    structure: Structure
    hole: tuple[int, ...]

    def __post_init__(self):
        structure_at(self.structure, self.hole)  # validates the path

    def fill(self, delta: Structure) -> Structure:
        return replace_structure_at(self.structure, self.hole, delta)

    def content(self) -> Structure:
        return structure_at(self.structure, self.hole)


# ---------------------------------------------------------------------------
# Sequents


@dataclass(frozen=True, eq=True)
class IntSequent:
    """Finite multiset of formulas => formula; antecedent kept sorted."""

    antecedent: tuple[Formula, ...]
    succedent: Formula
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        ante = tuple(sorted(self.antecedent, key=formula_key))
        object.__setattr__(self, "antecedent", ante)
        _hash_cache(self, "iseq", tuple(f._hash for f in ante), self.succedent._hash)

    def __hash__(self):
        return self._hash

    def __str__(self) -> str:
        return format_sequent(self)


@dataclass(frozen=True, eq=True)
class RblSequent:
    """Structure => formula; antecedent None encodes the bare '=> A' statement."""

    antecedent: Union[Structure, None]
    succedent: Formula
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        a = self.antecedent
        _hash_cache(self, "rseq", None if a is None else a._hash, self.succedent._hash)

    def __hash__(self):
        return self._hash

    def __str__(self) -> str:
        return format_sequent(self)


Sequent = Union[IntSequent, RblSequent]


def sequent_formulas(s: Sequent) -> Iterator[Formula]:
    """The formulas occurring in a sequent (structure leaves and succedent)."""
    if isinstance(s, IntSequent):
        yield from s.antecedent
    elif s.antecedent is not None:
        for _, f in structure_leaves(s.antecedent):
            yield f
    yield s.succedent


# ---------------------------------------------------------------------------
# Weight (termination measure for G4ip)


def weight(f: Formula) -> int:
    """w(p) = w(bot) = w(top) = 2, w(A&B) = w(A)(1+w(B)),
    w(A|B) = 1+w(A)+w(B), w(A->B) = 1+w(A)w(B).

    Defined on the intuitionistic language plus top (top mirrors bot so the
    added top rules keep the premise-weight decrease)."""
    if isinstance(f, (Prop, Bot, Top)):
        return 2
    if isinstance(f, And):
        return weight(f.left) * (1 + weight(f.right))
    if isinstance(f, Or):
        return 1 + weight(f.left) + weight(f.right)
    if isinstance(f, Imp):
        return 1 + weight(f.left) * weight(f.right)
    raise LanguageError(f"weight undefined for connective {type(f).__name__}")


def weight_sequent(s: IntSequent) -> int:
    return sum(weight(f) for f in s.antecedent) + weight(s.succedent)


# ---------------------------------------------------------------------------
# Polarity of occurrences in a sequent
#
# Occurrences are named (root, container_path, formula_path):
#   ("succ", (), fpath)            the succedent subtree at fpath
#   ("ante", (i,), fpath)          i-th antecedent formula of an Int sequent
#   ("ante", spath, fpath)         leaf at structure path spath of an RBL one


Occurrence = tuple[str, tuple[int, ...], tuple[int, ...]]


def _polarity_formula(f: Formula, sign: int, base: Occurrence, out: dict,
                      rbl_extension: bool) -> None:
    root, cpath, fpath = base
    out[(root, cpath, fpath)] = sign
    if isinstance(f, (And, Or)):
        _polarity_formula(f.left, sign, (root, cpath, fpath + (0,)), out, rbl_extension)
        _polarity_formula(f.right, sign, (root, cpath, fpath + (1,)), out, rbl_extension)
    elif isinstance(f, Imp):
        _polarity_formula(f.left, -sign, (root, cpath, fpath + (0,)), out, rbl_extension)
        _polarity_formula(f.right, sign, (root, cpath, fpath + (1,)), out, rbl_extension)
    elif isinstance(f, CoImp):
        if not rbl_extension:
            raise LanguageError("polarity of <- requires the rbl extension")
        # A <- B: A behaves like ->'s consequent, B like its antecedent.
        _polarity_formula(f.left, sign, (root, cpath, fpath + (0,)), out, rbl_extension)
        _polarity_formula(f.right, -sign, (root, cpath, fpath + (1,)), out, rbl_extension)
    elif isinstance(f, Prod):
        if not rbl_extension:
            raise LanguageError("polarity of . requires the rbl extension")
        _polarity_formula(f.left, sign, (root, cpath, fpath + (0,)), out, rbl_extension)
        _polarity_formula(f.right, sign, (root, cpath, fpath + (1,)), out, rbl_extension)
    elif isinstance(f, (Box, Dia)):
        raise LanguageError("polarity is not defined for modal formulas")


def polarity(s: Sequent, rbl_extension: bool = True) -> dict[Occurrence, int]:
    """Total polarity map: succedent root positive, antecedent roots negative,
    and/or preserve, -> flips its left child.

    The clauses for ., <- and structure nodes are an extension beyond the
    intuitionistic definition (structure nodes transmit negativity to both
    children, . preserves, <- mirrors ->); disable with rbl_extension=False
    to reject such inputs."""
    out: dict[Occurrence, int] = {}
    _polarity_formula(s.succedent, POSITIVE, ("succ", (), ()), out, rbl_extension)
    if isinstance(s, IntSequent):
        for i, f in enumerate(s.antecedent):
            _polarity_formula(f, NEGATIVE, ("ante", (i,), ()), out, rbl_extension)
    elif s.antecedent is not None:
        if not rbl_extension and not isinstance(s.antecedent, Leaf):
            raise LanguageError("structure antecedents require the rbl extension")
        for spath, f in structure_leaves(s.antecedent):
            _polarity_formula(f, NEGATIVE, ("ante", spath, ()), out, rbl_extension)
    return out


def polarity_at(s: Sequent, occ: Occurrence, rbl_extension: bool = True) -> int:
    table = polarity(s, rbl_extension)
    if occ not in table:
        raise ValueError(f"no occurrence {occ!r} in the sequent")
    return table[occ]


def occurrence_formula(s: Sequent, occ: Occurrence) -> Formula:
    root, cpath, fpath = occ
    if root == "succ":
        return formula_at(s.succedent, fpath)
    if isinstance(s, IntSequent):
        return formula_at(s.antecedent[cpath[0]], fpath)
    leaf = structure_at(s.antecedent, cpath)
    if not isinstance(leaf, Leaf):
        raise ValueError("occurrence container path must address a leaf")
    return formula_at(leaf.formula, fpath)


def replace_occurrence(s: Sequent, occ: Occurrence, g: Formula) -> Sequent:
    root, cpath, fpath = occ
    if root == "succ":
        return type(s)(s.antecedent, replace_formula_at(s.succedent, fpath, g))
    if isinstance(s, IntSequent):
        i = cpath[0]
        ante = list(s.antecedent)
        ante[i] = replace_formula_at(ante[i], fpath, g)
        return IntSequent(tuple(ante), s.succedent)
    leaf = structure_at(s.antecedent, cpath)
    new_leaf = Leaf(replace_formula_at(leaf.formula, fpath, g))
    return RblSequent(replace_structure_at(s.antecedent, cpath, new_leaf), s.succedent)


# ---------------------------------------------------------------------------
# Printing (minimal parenthesization; grammar lives in parser.py)

_PREC = {"Imp": 1, "CoImp": 1, "Or": 2, "And": 3, "Prod": 4}
_SYM = {"Imp": "->", "CoImp": "<-", "Or": "|", "And": "&", "Prod": "*"}


def format_formula(f: Formula, top_indexed: bool = False) -> str:
    """Grammar text for a formula. top_indexed renders chains top->(top->...X)
    as top^n -> X for display; that form is not re-parseable."""
    return _fmt(f, 0, top_indexed)


def _top_chain_length(f: Formula) -> tuple[int, Formula]:
    n = 0
    while isinstance(f, Imp) and isinstance(f.left, Top):
        n += 1
        f = f.right
    return n, f


def _fmt(f: Formula, ctx: int, ti: bool) -> str:
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Box):
        return "box " + _fmt_prefix_arg(f.child, ti)
    if isinstance(f, Dia):
        return "dia " + _fmt_prefix_arg(f.child, ti)
    name = type(f).__name__
    prec = _PREC[name]
    if ti and isinstance(f, Imp) and isinstance(f.left, Top):
        n, body = _top_chain_length(f)
        if n > 1:
            s = f"top^{n} -> " + _fmt(body, 1, ti)
            return f"({s})" if ctx > 1 else s
    if name == "Imp":  # right-assoc
        s = _fmt(f.left, prec + 1, ti) + " -> " + _fmt_imp_right(f.right, ti)
    elif name == "CoImp":  # left-assoc
        s = _fmt_coimp_left(f.left, ti) + " <- " + _fmt(f.right, prec + 1, ti)
    elif name == "Prod":  # non-associative: nested products always bracketed
        s = _fmt(f.left, prec + 1, ti) + " * " + _fmt(f.right, prec + 1, ti)
    else:  # And / Or, left-assoc
        s = _fmt_assoc_left(f, name, prec, ti) + f" {_SYM[name]} " + _fmt(f.right, prec + 1, ti)
    return f"({s})" if ctx > prec else s


def _fmt_imp_right(f: Formula, ti: bool) -> str:
    if isinstance(f, Imp):
        return _fmt(f, 1, ti)
    return _fmt(f, 2, ti) if isinstance(f, CoImp) else _fmt(f, 1, ti)


def _fmt_coimp_left(f: Formula, ti: bool) -> str:
    if isinstance(f, CoImp):
        return _fmt(f, 1, ti)
    return _fmt(f, 2, ti) if isinstance(f, Imp) else _fmt(f, 1, ti)


def _fmt_assoc_left(f, name, prec, ti):
    # left child of a left-assoc op may repeat the op without parens
    left = f.left
    if type(left).__name__ == name:
        return _fmt(left, prec, ti)
    return _fmt(left, prec + 1, ti)


def _fmt_prefix_arg(f: Formula, ti: bool) -> str:
    if isinstance(f, (Prop, Bot, Top, Box, Dia)):
        return _fmt(f, 5, ti)
    return "(" + _fmt(f, 0, ti) + ")"


def format_structure(s: Structure, top_indexed: bool = False) -> str:
    if isinstance(s, Leaf):
        return format_formula(s.formula, top_indexed)
    op = "." if isinstance(s, SProd) else "^"
    return f"{_fmt_struct_arg(s.left, top_indexed)} {op} {_fmt_struct_arg(s.right, top_indexed)}"


def _fmt_struct_arg(s: Structure, ti: bool) -> str:
    if isinstance(s, Leaf):
        return format_formula(s.formula, ti)
    return "(" + format_structure(s, ti) + ")"


def format_sequent(s: Sequent, top_indexed: bool = False) -> str:
    succ = format_formula(s.succedent, top_indexed)
    if isinstance(s, IntSequent):
        if not s.antecedent:
            return f"=> {succ}"
        return ", ".join(format_formula(f, top_indexed) for f in s.antecedent) + f" => {succ}"
    if s.antecedent is None:
        return f"=> {succ}"
    return f"{format_structure(s.antecedent, top_indexed)} => {succ}"
