"""
Pauli-string observables, e.g. ``Z5``, ``Z5 Z6`` or ``X0*Y1``.
"""

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

from .gates import PAULIS
from .validators import ValidationError

_TERM = re.compile(r"([IXYZ])(\d+)")


@dataclass(frozen=True)
class PauliString:
    """Product of single-site Paulis; identity factors are dropped."""

    ops: Tuple[Tuple[int, str], ...]

    def __post_init__(self):
        sites = [site for site, _ in self.ops]
        if len(set(sites)) != len(sites):
            raise ValidationError(f"Pauli string repeats a site: {self.label}")
        for _, letter in self.ops:
            if letter not in PAULIS:
                raise ValidationError(f"Unknown Pauli {letter!r}")
        object.__setattr__(self, "ops", tuple(sorted((int(s), p) for s, p in self.ops if p != "I")))

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """
        Parse whitespace- or '*'-separated terms like ``Z5 Z6``.

        Raises:
            ValidationError: On unknown Pauli letters or malformed terms
        """
        tokens = [t for t in re.split(r"[\s*]+", text.strip()) if t]
        if not tokens:
            raise ValidationError("Empty observable")
        ops = []
        for token in tokens:
            match = _TERM.fullmatch(token.upper())
            if not match:
                raise ValidationError(f"Cannot parse observable term {token!r} (expected e.g. Z5)")
            ops.append((int(match.group(2)), match.group(1)))
        return cls(tuple(ops))

    @property
    def sites(self) -> Tuple[int, ...]:
        return tuple(site for site, _ in self.ops)

    @property
    def is_diagonal(self) -> bool:
        return all(letter == "Z" for _, letter in self.ops)

    @property
    def label(self) -> str:
        return " ".join(f"{letter}{site}" for site, letter in self.ops) or "I"

    def matrices(self) -> Dict[int, np.ndarray]:
        return {site: PAULIS[letter] for site, letter in self.ops}

    def check_sites(self, n: int) -> "PauliString":
        for site in self.sites:
            if not 0 <= site < n:
                raise ValidationError(f"Observable {self.label} acts on site {site} outside 0..{n - 1}")
        return self

    def value_on(self, bits: Sequence[int]) -> float:
        """<x|O|x> for a diagonal observable."""
        if not self.is_diagonal:
            raise ValidationError(f"{self.label} is not diagonal in the computational basis")
        sign = 1.0
        for site in self.sites:
            if bits[site]:
                sign = -sign
        return sign


def z_string(sites: Iterable[int]) -> PauliString:
    return PauliString(tuple((int(s), "Z") for s in sites))


IDENTITY = PauliString(())
