"""Non-redundant representations by coarsest-stable-partition refinement.

Two types of a player are redundant when they induce the same belief
hierarchy over states.  For finite games the infinite hierarchy collapses to
finitely many rounds of partition refinement: start with all of a player's
supported types in one class, then repeatedly split classes whose members
induce different beliefs over (state profile, opponents' current classes).
The fixed point is reached in at most the total number of types, and its
classes are exactly the equal-hierarchy classes.

The quotient game replaces each player's types by class representatives
(the first member in declared type order) and pushes the prior forward.
"""

from __future__ import annotations

from dataclasses import dataclass

from .game import Game, GameError, Label, is_minimal
from .rational import ZERO, Rat
from .rules import TypeMap


@dataclass(frozen=True)
class TypeQuotientMap:
    """Per player, the map from a type to its hierarchy-class representative."""

    classes: dict[str, dict[Label, Label]]

    def as_type_map(self) -> TypeMap:
        return TypeMap({i: dict(m) for i, m in self.classes.items()})

    def is_identity(self) -> bool:
        return all(all(t == rep for t, rep in m.items()) for m in self.classes.values())


def _refine(g: Game) -> dict[str, dict[Label, int]]:
    """Run the refinement; returns per player the class index of each type."""
    players = g.players
    # class assignment per player: type -> class id; start with one class each
    assign = {i: {t: 0 for t in g.types[i]} for i in players}
    # conditional beliefs are computed once; refinement only re-buckets them
    beliefs = {
        i: {t: g.belief(i, t) for t in g.types[i]} for i in players
    }
    max_rounds = sum(len(g.types[i]) for i in players) + 1
    for _ in range(max_rounds):
        changed = False
        new_assign = {}
        for k, i in enumerate(players):
            signatures: dict[Label, tuple] = {}
            for t in g.types[i]:
                sig: dict = {}
                for (t_rest, th), p in beliefs[i][t].items():
                    opp_classes = tuple(
                        assign[j][t_rest[m if m < k else m - 1]]
                        for m, j in enumerate(players)
                        if j != i
                    )
                    key = (opp_classes, th)
                    sig[key] = sig.get(key, ZERO) + p
                signatures[t] = tuple(sorted(sig.items(), key=lambda kv: repr(kv[0])))
            # bucket types by signature, numbering classes by first occurrence
            buckets: dict[tuple, int] = {}
            na = {}
            for t in g.types[i]:
                s = signatures[t]
                if s not in buckets:
                    buckets[s] = len(buckets)
                na[t] = buckets[s]
            new_assign[i] = na
            if na != assign[i]:
                changed = True
        assign = new_assign
        if not changed:
            return assign
    raise AssertionError("partition refinement failed to stabilize")


def non_redundant_representation(g: Game) -> tuple[Game, TypeQuotientMap]:
    """Quotient a minimal game by equal belief hierarchies.

    Returns the quotient game and the type-to-representative map.  Running
    the operation on its own output yields the identity quotient.
    """
    if not is_minimal(g):
        raise GameError("non_redundant_representation requires a minimal game")
    assign = _refine(g)

    reps: dict[str, dict[Label, Label]] = {}
    rep_lists: dict[str, tuple[Label, ...]] = {}
    for i in g.players:
        class_rep: dict[int, Label] = {}
        for t in g.types[i]:
            c = assign[i][t]
            if c not in class_rep:
                class_rep[c] = t
        reps[i] = {t: class_rep[assign[i][t]] for t in g.types[i]}
        rep_lists[i] = tuple(class_rep[c] for c in sorted(class_rep))

    prior: dict = {}
    for (t, th), mass in g.prior.items():
        qt = tuple(reps[i][t[k]] for k, i in enumerate(g.players))
        prior[(qt, th)] = prior.get((qt, th), ZERO) + mass

    quotient = Game.create(g.players, g.actions, rep_lists, g.states, prior, g.payoffs)
    return quotient, TypeQuotientMap(reps)
