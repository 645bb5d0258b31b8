"""Interpretive choices that the computations depend on, with a stable hash.

Every verification result is reported against ConventionTable.hash so a FAIL
can be traced to a convention rather than to code.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Mapping, Tuple

Mono = Tuple[int, ...]


class ConventionGap(ValueError):
    """A computation needed a value the active table leaves undefined."""


@dataclass(frozen=True)
class ConventionTable:
    name: str = "default"
    # value of x ∪_i y for distinct generators and i >= 1: "zero" or "strict" (gap -> error)
    mixed_cup: str = "zero"
    # explicit values for distinct pairs: ((i, x, y), poly) with x <= y in the monomial order
    cup_overrides: Tuple[Tuple[Tuple[int, Mono, Mono], FrozenSet[Mono]], ...] = ()
    # xi0^{-k} in the ∇-compatibility relation: cancel when possible, drop the term otherwise
    xi0_inverse: str = "cancel"
    # PS letters: xi0^a*m -> [m], xi0^a -> h_{-1}
    xi0_normalize: bool = True
    # cross terms a ∪_j b + b ∪_j a of distinct summands in P_j(a + b)
    symmetric_cross_terms: str = "vanish"

    def __post_init__(self):
        if self.mixed_cup not in ("zero", "strict"):
            raise ValueError(f"mixed_cup must be 'zero' or 'strict', got {self.mixed_cup!r}")
        if self.xi0_inverse != "cancel":
            raise ValueError("only the 'cancel' reading of xi0^{-k} is implemented")
        if self.symmetric_cross_terms != "vanish":
            raise ValueError("only vanishing cross terms are implemented")

    def override(self, i: int, x: Mono, y: Mono):
        for key, val in self.cup_overrides:
            if key == (i, x, y):
                return val
        return None

    def as_dict(self) -> Dict:
        return {
            "name": self.name,
            "mixed_cup": self.mixed_cup,
            "cup_overrides": [[k[0], list(k[1]), list(k[2]), sorted(list(m) for m in v)]
                              for k, v in sorted(self.cup_overrides)],
            "xi0_inverse": self.xi0_inverse,
            "xi0_normalize": self.xi0_normalize,
            "symmetric_cross_terms": self.symmetric_cross_terms,
        }

    @property
    def hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConventionTable":
        ov = tuple(sorted(((int(i), tuple(x), tuple(y)), frozenset(tuple(m) for m in v))
                          for i, x, y, v in d.get("cup_overrides", [])))
        return cls(name=d.get("name", "custom"), mixed_cup=d.get("mixed_cup", "zero"),
                   cup_overrides=ov, xi0_inverse=d.get("xi0_inverse", "cancel"),
                   xi0_normalize=bool(d.get("xi0_normalize", True)),
                   symmetric_cross_terms=d.get("symmetric_cross_terms", "vanish"))


DEFAULT = ConventionTable()
PRESETS = {"default": DEFAULT, "strict": ConventionTable(name="strict", mixed_cup="strict")}


def load(spec: str) -> ConventionTable:
    """A preset name or a path to a JSON file."""
    if spec in PRESETS:
        return PRESETS[spec]
    try:
        with open(spec) as fh:
            return ConventionTable.from_dict(json.load(fh))
    except FileNotFoundError:
        raise ValueError(f"unknown convention preset or file: {spec!r}") from None
