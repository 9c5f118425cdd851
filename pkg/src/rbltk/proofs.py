"""Explicit proof trees shared by the G4ip and L_RBL engines."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterator

from .syntax import (
    Formula, IntSequent, RblSequent, Sequent, Structure, format_formula,
    format_sequent, format_structure,
)

# Rule tags for G4ip derivations.
G4_RULES = (
    "Id", "BotL", "TopR", "TopL", "AndL", "AndR", "OrL", "OrR1", "OrR2",
    "ImpR", "ImpL1", "ImpL2", "ImpL3", "ImpL4", "ImpLTop",
)

# Rule tags for L_RBL derivations.
LRBL_RULES = (
    "Id", "IdAtomic", "Top", "Bot", "Hyp",
    "ImpL", "ImpR", "CoImpL", "CoImpR", "ProdL", "ProdR",
    "AndL", "AndR", "OrL", "OrR1", "OrR2",
    "MeetC", "ProdC", "MeetE", "MeetA1", "MeetA2",
    "W1", "W2", "Cut",
)


@dataclass(frozen=True, eq=True)
class Derivation:
    """One proof node: rule tag, conclusion, premise subtrees and the rule
    parameters (active formula, hole path) needed to re-check the instance."""

    rule: str
    conclusion: Sequent
    premises: tuple["Derivation", ...] = ()
    params: tuple[tuple[str, Any], ...] = ()

    def param(self, key: str, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default

    def nodes(self) -> Iterator[tuple[tuple[int, ...], "Derivation"]]:
        stack = [((), self)]
        while stack:
            path, d = stack.pop()
            yield path, d
            for i, p in enumerate(d.premises):
                stack.append((path + (i,), p))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def __str__(self) -> str:
        return format_sequent(self.conclusion) + f"  [{self.rule}]"


def params_of(**kv) -> tuple[tuple[str, Any], ...]:
    return tuple(sorted(kv.items()))


def _param_to_json(v):
    if isinstance(v, Formula):
        return {"formula": format_formula(v)}
    if isinstance(v, Structure):
        return {"structure": format_structure(v)}
    if isinstance(v, tuple):
        return list(v)
    return v


def derivation_to_dict(d: Derivation) -> dict:
    return {
        "rule": d.rule,
        "sequent": format_sequent(d.conclusion),
        "params": {k: _param_to_json(v) for k, v in d.params},
        "premises": [derivation_to_dict(p) for p in d.premises],
    }


def derivation_to_json(d: Derivation, indent: int | None = 2) -> str:
    return json.dumps(derivation_to_dict(d), indent=indent)


def _param_from_json(v):
    from .parser import parse
    if isinstance(v, dict) and "formula" in v:
        return parse(v["formula"], "rbl")
    if isinstance(v, dict) and "structure" in v:
        return parse(v["structure"], "structure")
    if isinstance(v, list):
        return tuple(v)
    return v


def derivation_from_dict(obj: dict, sequent_kind: str = "auto") -> Derivation:
    from .parser import parse
    kind = {"auto": "sequent", "int": "int-sequent", "rbl": "rbl-sequent"}[sequent_kind]
    seq = parse(obj["sequent"], kind)
    params = params_of(**{k: _param_from_json(v) for k, v in obj.get("params", {}).items()})
    premises = tuple(derivation_from_dict(p, sequent_kind) for p in obj.get("premises", []))
    return Derivation(obj["rule"], seq, premises, params)


def derivation_from_json(text: str, sequent_kind: str = "auto") -> Derivation:
    return derivation_from_dict(json.loads(text), sequent_kind)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a derivation check; falsy when rejected."""

    ok: bool
    path: tuple[int, ...] | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "accept"
        return f"reject at node {list(self.path)}: {self.reason}"


ACCEPT = CheckResult(True)


def reject(path: tuple[int, ...], reason: str) -> CheckResult:
    return CheckResult(False, path, reason)
