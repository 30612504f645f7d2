"""Distributional decision rules and their pushforwards along type maps.

A distributional rule stores the joint mass z(a, t, theta) of playing action
profile a when (t, theta) realizes, i.e. the rule already multiplied by the
prior.  Summing z over actions at a supported (t, theta) must reproduce the
prior mass there; atoms off the prior support carry no mass.

Pushing a rule from a perturbed game down to a base game sums over the type
fibers of the map.  States outside the base state space are collapsed
through the optional state map when one is declared, and otherwise land in a
reserved off-support bucket so no mass is silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping

from .game import Game, GameError, Label, Profile
from .measures import FiniteMeasure
from .rational import ZERO, Rat, rat

#: reserved state label for pushforward mass landing outside the base states
OFF_SUPPORT = "__off_support__"


@dataclass(frozen=True)
class TypeMap:
    """Per-player map from one game's types into another's."""

    maps: dict[str, dict[Label, Label]]

    def apply(self, i: str, t_i: Label) -> Label:
        try:
            return self.maps[i][t_i]
        except KeyError:
            raise GameError(f"type map not total: player {i!r}, type {t_i!r}") from None

    def apply_profile(self, players, t: Profile) -> Profile:
        return tuple(self.apply(i, t[k]) for k, i in enumerate(players))

    def fiber(self, i: str, t_i: Label) -> list[Label]:
        return [s for s, d in self.maps[i].items() if d == t_i]

    @classmethod
    def identity(cls, g: Game) -> "TypeMap":
        return cls({i: {t: t for t in g.types[i]} for i in g.players})


@dataclass(frozen=True)
class StateMap:
    """Per-player collapse of perturbed states onto base states."""

    maps: dict[str, dict[Label, Label]]

    def apply(self, i: str, s_i: Label) -> Label:
        return self.maps[i][s_i]


@dataclass(frozen=True)
class DistributionalRule:
    game: Game
    z: dict[tuple[Profile, Profile, Profile], Rat]

    @classmethod
    def create(cls, game: Game, entries: Mapping, check: bool = True) -> "DistributionalRule":
        z = {}
        for (a, t, th), mass in entries.items():
            q = rat(mass)
            if q != 0:
                z[(tuple(a), tuple(t), tuple(th))] = q
        rule = cls(game, z)
        if check:
            rule.validate()
        return rule

    @classmethod
    def from_conditional(cls, game: Game, sigma) -> "DistributionalRule":
        """Build from sigma(a | t, theta) given as a callable or nested map."""
        z = {}
        for (t, th), mass in game.prior.items():
            dist = sigma(t, th) if callable(sigma) else sigma[(t, th)]
            for a, p in dist.items():
                p = rat(p)
                if p != 0:
                    z[(tuple(a), t, th)] = p * mass
        return cls.create(game, z)

    @classmethod
    def pure(cls, game: Game, strategy: Mapping[str, Mapping[Label, Label]]) -> "DistributionalRule":
        """Build from a pure strategy profile (per player, type -> action)."""
        z = {}
        for (t, th), mass in game.prior.items():
            a = tuple(strategy[i][t[k]] for k, i in enumerate(game.players))
            z[(a, t, th)] = mass
        return cls.create(game, z)

    def validate(self) -> None:
        sums: dict[tuple[Profile, Profile], Rat] = {}
        for (a, t, th), mass in self.z.items():
            if mass < 0:
                raise GameError(f"negative rule mass at {(a, t, th)!r}")
            if (t, th) not in self.game.prior:
                raise GameError(f"rule mass off the prior support at {(t, th)!r}")
            sums[(t, th)] = sums.get((t, th), ZERO) + mass
        for key, mass in self.game.prior.items():
            if sums.get(key, ZERO) != mass:
                raise GameError(
                    f"rule mass at {key!r} sums to {sums.get(key, ZERO)} != prior {mass}"
                )

    def total(self) -> Rat:
        return sum(self.z.values(), ZERO)

    def as_measure(self) -> FiniteMeasure:
        return FiniteMeasure(dict(self.z))

    def action_state_marginal(self) -> dict[tuple[Profile, Profile], Rat]:
        out: dict[tuple[Profile, Profile], Rat] = {}
        for (a, _t, th), mass in self.z.items():
            out[(a, th)] = out.get((a, th), ZERO) + mass
        return out

    def own_action_marginal(self, i: str) -> dict[tuple[Label, Label], Rat]:
        """Joint mass of (own action, own type) pairs for player i."""
        k = self.game.player_index(i)
        out: dict[tuple[Label, Label], Rat] = {}
        for (a, t, _th), mass in self.z.items():
            key = (a[k], t[k])
            out[key] = out.get(key, ZERO) + mass
        return out

    def expected_payoff(self, i: str) -> Rat:
        total = ZERO
        for (a, _t, th), mass in self.z.items():
            total += mass * self.game.payoff(i, a, th)
        return total

    def is_belief_invariant(self) -> bool:
        """Check that each player's action marginal depends only on own type."""
        for k, i in enumerate(self.game.players):
            ratio: dict[tuple[Label, Label], Rat] = {}
            for (t, th), mass in self.game.prior.items():
                cond: dict[Label, Rat] = {a_i: ZERO for a_i in self.game.actions[i]}
                for a in self.game.action_profiles():
                    m = self.z.get((a, t, th))
                    if m:
                        cond[a[k]] += m
                for a_i in self.game.actions[i]:
                    key = (a_i, t[k])
                    value = cond[a_i] / mass
                    if key in ratio:
                        if ratio[key] != value:
                            return False
                    else:
                        ratio[key] = value
        return True

    def is_obedient(self) -> tuple[bool, list]:
        """Check every obedience inequality exactly; returns (ok, violations)."""
        violations = []
        g = self.game
        for k, i in enumerate(g.players):
            gains: dict[tuple[Label, Label, Label], Rat] = {}
            for (a, t, th), mass in self.z.items():
                if mass == 0:
                    continue
                for dev in g.actions[i]:
                    if dev == a[k]:
                        continue
                    ad = a[:k] + (dev,) + a[k + 1 :]
                    delta = mass * (g.payoff(i, ad, th) - g.payoff(i, a, th))
                    key = (t[k], a[k], dev)
                    gains[key] = gains.get(key, ZERO) + delta
            for key, gain in gains.items():
                if gain > 0:
                    violations.append((i,) + key + (gain,))
        return not violations, violations


def pushforward(
    rule: DistributionalRule,
    tau: TypeMap,
    base: Game,
    phi: StateMap | None = None,
) -> DistributionalRule:
    """Push a rule on a perturbed game down to the base game along tau.

    z'(a, t, theta) aggregates the rule's mass over the tau-fiber of t.
    Perturbed states already in the base state space pass through; others go
    through phi when provided, else to the off-support bucket.  The result
    keeps the base game reference but is not validated against the base
    prior (its type/state marginal generally differs; that difference is the
    whole point of the elaboration distance).
    """
    players = rule.game.players
    if tuple(base.players) != tuple(players):
        raise GameError("pushforward requires identical player lists")
    base_states = {i: set(base.states[i]) for i in players}
    out: dict[tuple[Profile, Profile, Profile], Rat] = {}
    for (a, t, th), mass in rule.z.items():
        bt = tau.apply_profile(players, t)
        collapsed = []
        for k, i in enumerate(players):
            s = th[k]
            if s in base_states[i]:
                collapsed.append(s)
            elif phi is not None and s in phi.maps.get(i, {}):
                collapsed.append(phi.apply(i, s))
            else:
                collapsed.append(OFF_SUPPORT)
        key = (a, bt, tuple(collapsed))
        out[key] = out.get(key, ZERO) + mass
    return DistributionalRule(base, out)


def push_prior(perturbed: Game, tau: TypeMap, base: Game) -> dict[tuple[Profile, Profile], Rat]:
    """Pushforward of the perturbed prior onto base (type, state) pairs.

    States keep their labels; atoms with any component outside the base
    state lists are excluded (they never belong to an event over the base
    universe).
    """
    players = base.players
    base_states = {i: set(base.states[i]) for i in players}
    out: dict[tuple[Profile, Profile], Rat] = {}
    for (t, th), mass in perturbed.prior.items():
        if any(th[k] not in base_states[i] for k, i in enumerate(players)):
            continue
        key = (tau.apply_profile(players, t), th)
        out[key] = out.get(key, ZERO) + mass
    return out


def outcome_equivalent(
    rule_a: DistributionalRule,
    tau: TypeMap,
    rule_b: DistributionalRule,
    phi: StateMap | None = None,
) -> bool:
    """Whether rule_a pushed along tau equals rule_b atomwise."""
    pushed = pushforward(rule_a, tau, rule_b.game, phi)
    keys = pushed.z.keys() | rule_b.z.keys()
    return all(pushed.z.get(k, ZERO) == rule_b.z.get(k, ZERO) for k in keys)
