"""Finite measures over opaque atoms and the sup-over-events distance.

The distance between two (sub-probability) measures is the supremum over all
events of the absolute mass difference.  By the Jordan decomposition this
equals max(sum of positive part, sum of negative part), which is how it is
computed here; for two probability measures the parts coincide and the value
is half the L1 distance.  Sub-probability measures are first-class because
pushforwards can lose mass off the image of a type map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping

from .rational import ZERO, Rat, rat

Atom = Hashable


@dataclass(frozen=True)
class FiniteMeasure:
    mass: dict[Atom, Rat]

    @classmethod
    def create(cls, entries: Mapping[Atom, object]) -> "FiniteMeasure":
        out = {}
        for atom, m in entries.items():
            q = rat(m)
            if q < 0:
                raise ValueError(f"negative mass {q} at atom {atom!r}")
            if q != 0:
                out[atom] = q
        return cls(out)

    def total(self) -> Rat:
        return sum(self.mass.values(), ZERO)

    def __call__(self, atom: Atom) -> Rat:
        return self.mass.get(atom, ZERO)

    def restricted(self, atoms: Iterable[Atom]) -> "FiniteMeasure":
        keep = set(atoms)
        return FiniteMeasure({a: m for a, m in self.mass.items() if a in keep})


def sup_event_distance(mu, nu) -> Rat:
    """sup over events E of |mu(E) - nu(E)|, exactly.

    Arguments may be FiniteMeasure or plain atom->mass mappings; atoms
    missing from one side count as zero.  Symmetric and triangle-inequality
    compliant; zero iff the measures agree atomwise.
    """
    mu = mu.mass if isinstance(mu, FiniteMeasure) else mu
    nu = nu.mass if isinstance(nu, FiniteMeasure) else nu
    pos = ZERO
    neg = ZERO
    for atom in mu.keys() | nu.keys():
        d = mu.get(atom, ZERO) - nu.get(atom, ZERO)
        if d > 0:
            pos += d
        elif d < 0:
            neg -= d
    return max(pos, neg)
