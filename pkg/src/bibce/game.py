"""Finite incomplete-information games with exact rational data.

A game consists of ordered players, per-player finite action/type/state
lists, a sparse rational prior over (type profile, state profile) pairs, and
per-player payoffs keyed by (action profile, own state component).  Keying
payoffs by the player's own state component makes the product-state payoff
restriction structural: a player's payoff can only depend on the state
through their own coordinate.

Labels for actions, types, and states may be any hashable value (strings in
serialized documents, ints or tuples for generated families).  Profiles are
tuples ordered by the player list.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .rational import ONE, ZERO, Rat, rat, rat_str

Label = Hashable
Profile = tuple  # tuple of labels, one per player


class GameError(ValueError):
    """Raised when game data violates a structural requirement."""


@dataclass(frozen=True)
class Game:
    players: tuple[str, ...]
    actions: dict[str, tuple[Label, ...]]
    types: dict[str, tuple[Label, ...]]
    states: dict[str, tuple[Label, ...]]
    prior: dict[tuple[Profile, Profile], Rat]
    payoffs: dict[str, dict[tuple[Profile, Label], Rat]]

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def create(cls, players, actions, types, states, prior, payoffs) -> "Game":
        """Build a game with canonicalized ordering and rationalized entries.

        ``prior`` maps (type profile, state profile) to a rational-coercible
        mass; zero-mass entries are dropped.  ``payoffs[i]`` maps
        (action profile, own state) to a value.  Raises GameError on dangling
        labels or malformed profiles; probabilistic invariants (mass sums)
        are checked separately by ``validate_game``.
        """
        players = tuple(players)
        if len(set(players)) != len(players) or not players:
            raise GameError("players must be a nonempty list of distinct ids")
        actions = {i: tuple(actions[i]) for i in players}
        types = {i: tuple(types[i]) for i in players}
        states = {i: tuple(states[i]) for i in players}
        for i in players:
            if not actions[i] or not types[i] or not states[i]:
                raise GameError(f"player {i!r} needs nonempty actions, types, states")
            for name, seq in (("actions", actions[i]), ("types", types[i]), ("states", states[i])):
                if len(set(seq)) != len(seq):
                    raise GameError(f"duplicate {name} label for player {i!r}")

        t_idx = {i: {t: k for k, t in enumerate(types[i])} for i in players}
        s_idx = {i: {s: k for k, s in enumerate(states[i])} for i in players}
        a_idx = {i: {a: k for k, a in enumerate(actions[i])} for i in players}

        def profile_key(profile, idx):
            return tuple(idx[i][profile[k]] for k, i in enumerate(players))

        norm_prior = {}
        for (t, th), mass in prior.items():
            t, th = tuple(t), tuple(th)
            if len(t) != len(players) or len(th) != len(players):
                raise GameError(f"prior profile arity mismatch at {(t, th)!r}")
            for k, i in enumerate(players):
                if t[k] not in t_idx[i]:
                    raise GameError(f"dangling type key {t[k]!r} for player {i!r}")
                if th[k] not in s_idx[i]:
                    raise GameError(f"dangling state key {th[k]!r} for player {i!r}")
            q = rat(mass)
            if q != 0:
                norm_prior[(t, th)] = q
        ordered = sorted(
            norm_prior, key=lambda k: (profile_key(k[0], t_idx), profile_key(k[1], s_idx))
        )
        canon_prior = {k: norm_prior[k] for k in ordered}

        canon_payoffs: dict[str, dict[tuple[Profile, Label], Rat]] = {}
        for i in players:
            table = {}
            for (a, own), value in payoffs[i].items():
                a = tuple(a)
                if len(a) != len(players):
                    raise GameError(f"payoff action profile arity mismatch at {a!r}")
                for k, j in enumerate(players):
                    if a[k] not in a_idx[j]:
                        raise GameError(f"dangling action key {a[k]!r} for player {j!r}")
                if own not in s_idx[i]:
                    raise GameError(f"dangling own-state key {own!r} for player {i!r}")
                table[(a, own)] = rat(value)
            keys = sorted(table, key=lambda k: (profile_key(k[0], a_idx), s_idx[i][k[1]]))
            canon_payoffs[i] = {k: table[k] for k in keys}

        return cls(players, actions, types, states, canon_prior, canon_payoffs)

    # ------------------------------------------------------------------
    # basic queries

    def action_profiles(self) -> list[Profile]:
        return [tuple(p) for p in itertools.product(*(self.actions[i] for i in self.players))]

    def state_profiles(self) -> list[Profile]:
        return [tuple(p) for p in itertools.product(*(self.states[i] for i in self.players))]

    def support(self) -> list[tuple[Profile, Profile]]:
        """Prior support, in canonical order."""
        return list(self.prior.keys())

    def payoff(self, i: str, a: Profile, theta: Profile) -> Rat:
        """u_i(a, theta); depends on theta only through player i's component."""
        own = theta[self.players.index(i)]
        return self.payoffs[i][(tuple(a), own)]

    def player_index(self, i: str) -> int:
        return self.players.index(i)

    def type_marginal(self, i: str) -> dict[Label, Rat]:
        k = self.player_index(i)
        out: dict[Label, Rat] = {}
        for (t, _th), mass in self.prior.items():
            out[t[k]] = out.get(t[k], ZERO) + mass
        return out

    def state_marginal(self, i: str) -> dict[Label, Rat]:
        k = self.player_index(i)
        out: dict[Label, Rat] = {}
        for (_t, th), mass in self.prior.items():
            out[th[k]] = out.get(th[k], ZERO) + mass
        return out

    def belief(self, i: str, t_i: Label) -> dict[tuple[Profile, Profile], Rat]:
        """Conditional belief over (opponents' type profile, state profile).

        Keys drop player i's own type component.  Raises on zero-probability
        types.
        """
        k = self.player_index(i)
        rows = {}
        total = ZERO
        for (t, th), mass in self.prior.items():
            if t[k] == t_i:
                key = (t[:k] + t[k + 1 :], th)
                rows[key] = rows.get(key, ZERO) + mass
                total += mass
        if total == 0:
            raise GameError(f"type {t_i!r} of player {i!r} has zero prior probability")
        return {key: mass / total for key, mass in rows.items()}

    def payoff_bounds(self) -> tuple[Rat, Rat]:
        values = [v for table in self.payoffs.values() for v in table.values()]
        return min(values), max(values)

    def digest(self) -> str:
        """Stable content hash of the canonical representation."""
        h = hashlib.sha256()
        h.update(repr(self.players).encode())
        for i in self.players:
            h.update(repr((self.actions[i], self.types[i], self.states[i])).encode())
            h.update(repr([(k, rat_str(v)) for k, v in self.payoffs[i].items()]).encode())
        h.update(repr([(k, rat_str(v)) for k, v in self.prior.items()]).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class SupportSets:
    """Per-player type and state supports of the prior, freshly computed."""

    types: dict[str, tuple[Label, ...]]
    states: dict[str, tuple[Label, ...]]

    @classmethod
    def of(cls, g: Game) -> "SupportSets":
        tsets = {}
        ssets = {}
        for i in g.players:
            tm = g.type_marginal(i)
            sm = g.state_marginal(i)
            tsets[i] = tuple(t for t in g.types[i] if tm.get(t, ZERO) > 0)
            ssets[i] = tuple(s for s in g.states[i] if sm.get(s, ZERO) > 0)
        return cls(tsets, ssets)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    support: SupportSets | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_game(g: Game) -> ValidationReport:
    """Check all game invariants, collecting every violation found.

    Structural key errors are caught at construction; this checks the
    probabilistic invariants (nonnegative prior summing to exactly 1) and
    payoff-table completeness over actions and own states.
    """
    report = ValidationReport()
    total = ZERO
    for (t, th), mass in g.prior.items():
        if mass < 0:
            report.violations.append(f"negative prior mass {rat_str(mass)} at {(t, th)!r}")
        total += mass
    if total != 1:
        report.violations.append(f"prior mass {rat_str(total)}")

    profiles = g.action_profiles()
    for i in g.players:
        table = g.payoffs[i]
        for a in profiles:
            for own in g.states[i]:
                if (a, own) not in table:
                    report.violations.append(
                        f"missing payoff for player {i!r} at action {a!r}, state {own!r}"
                    )
    if report.ok:
        report.support = SupportSets.of(g)
    return report


def require_valid(g: Game) -> Game:
    report = validate_game(g)
    if not report.ok:
        raise GameError("; ".join(report.violations))
    return g


def minimum_representation(g: Game) -> Game:
    """Restrict the game to the types and states carrying prior mass.

    Idempotent; the prior re-sums to 1 because every supported profile has
    all of its components on the per-player supports.
    """
    supp = SupportSets.of(g)
    for i in g.players:
        if not supp.types[i] or not supp.states[i]:
            raise GameError("degenerate prior")
    keep_states = {i: set(supp.states[i]) for i in g.players}
    payoffs = {
        i: {
            (a, own): v
            for (a, own), v in g.payoffs[i].items()
            if own in keep_states[i]
        }
        for i in g.players
    }
    return Game.create(g.players, g.actions, supp.types, supp.states, g.prior, payoffs)


def is_minimal(g: Game) -> bool:
    supp = SupportSets.of(g)
    return all(
        supp.types[i] == g.types[i] and supp.states[i] == g.states[i] for i in g.players
    )


# ----------------------------------------------------------------------
# communication rules and conjunctions


@dataclass(frozen=True)
class CommunicationRule:
    """A correlating device: messages drawn given (type profile, state).

    ``messages[i]`` is player i's message alphabet and ``rho`` maps each
    prior-supported (t, theta) to a distribution over message profiles.
    """

    messages: dict[str, tuple[Label, ...]]
    rho: dict[tuple[Profile, Profile], dict[Profile, Rat]]

    def row(self, t: Profile, th: Profile) -> dict[Profile, Rat]:
        return self.rho[(t, th)]

    def is_belief_invariant(self, g: Game) -> bool:
        """Whether each player's message marginal depends only on their type.

        Checks, for every player and message, that the conditional marginal
        probability of the message is constant across all supported
        (t_{-i}, theta) given t_i.
        """
        for k, i in enumerate(g.players):
            seen: dict[tuple[Label, Label], Rat] = {}
            for (t, th), row in self.rho.items():
                if (t, th) not in g.prior:
                    continue
                marg: dict[Label, Rat] = {m_i: ZERO for m_i in self.messages[i]}
                for m, p in row.items():
                    marg[m[k]] += p
                for m_i, p in marg.items():
                    key = (t[k], m_i)
                    if key in seen:
                        if seen[key] != p:
                            return False
                    else:
                        seen[key] = p
        return True


def conjunction(g: Game, device: CommunicationRule) -> tuple[Game, "TypeMap"]:
    """Adjoin a correlating device to a game.

    The new game's types are (type, message) pairs and its prior is
    prior(t, theta) * rho(m | t, theta).  Returns the enlarged game together
    with the projection map (t_i, m_i) -> t_i.  Raises if any supported
    (t, theta) row of the device is missing or does not sum to 1.
    """
    from .rules import TypeMap  # local import to avoid a cycle

    for key in g.prior:
        row = device.rho.get(key)
        if row is None:
            raise GameError(f"device has no row for supported profile {key!r}")
        total = sum(row.values(), ZERO)
        if total != 1:
            raise GameError(f"device row at {key!r} sums to {rat_str(total)}")

    new_types = {
        i: tuple((t, m) for t in g.types[i] for m in device.messages[i]) for i in g.players
    }
    prior: dict[tuple[Profile, Profile], Rat] = {}
    for (t, th), mass in g.prior.items():
        for m, p in device.rho[(t, th)].items():
            if p == 0:
                continue
            bar_t = tuple((t[k], m[k]) for k in range(len(g.players)))
            prior[(bar_t, th)] = prior.get((bar_t, th), ZERO) + mass * p

    bar = Game.create(g.players, g.actions, new_types, g.states, prior, g.payoffs)
    tau = TypeMap({i: {tm: tm[0] for tm in new_types[i]} for i in g.players})
    return bar, tau
