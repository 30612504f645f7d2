"""Supermodular structure: checks, rearrangement, extremal selections, bounds.

Action sets carry per-player total orders; a game is supermodular when every
ex-post payoff has increasing differences in (own action, opponents'
actions) on the prior's state support.  The rearrangement routine moves a
distribution over action profiles onto a chain (totally ordered support)
without touching marginals and without decreasing the expected value of a
supermodular function, one join/meet mass transfer at a time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .game import Game, GameError, Label, Profile, SupportSets
from .rational import ONE, ZERO, Rat, rat

__all__ = [
    "OrderedGame",
    "is_supermodular",
    "LatticeMeasure",
    "is_supermodular_function",
    "order_rearrange",
    "extremal_selections",
    "kappa",
    "common_belief_event",
    "CommonBeliefReport",
]


@dataclass(frozen=True)
class OrderedGame:
    """A game together with a total order on each player's actions."""

    game: Game
    orders: dict[str, tuple[Label, ...]]

    @classmethod
    def checked(cls, g: Game, orders: dict[str, tuple[Label, ...]] | None = None) -> "OrderedGame":
        og = cls(g, _normalize_orders(g, orders))
        ok, violations = is_supermodular(g, og.orders)
        if not ok:
            raise GameError(f"game is not supermodular: {violations[:3]}")
        return og

    def rank(self, i: str) -> dict[Label, int]:
        return {a: n for n, a in enumerate(self.orders[i])}


def _normalize_orders(g: Game, orders) -> dict[str, tuple[Label, ...]]:
    if orders is None:
        return {i: tuple(g.actions[i]) for i in g.players}
    out = {}
    for i in g.players:
        seq = tuple(orders[i])
        if sorted(map(repr, seq)) != sorted(map(repr, g.actions[i])):
            raise GameError(f"order for player {i!r} must permute the action set")
        out[i] = seq
    return out


def is_supermodular(
    g: Game, orders: dict[str, tuple[Label, ...]] | None = None
) -> tuple[bool, list]:
    """Exhaustive increasing-differences check over all comparable pairs.

    Returns (ok, violations) where each violation records
    (player, a_i, b_i, a_-i, b_-i, state) for a failed inequality
    u_i(a_i, a_-i) - u_i(b_i, a_-i) >= u_i(a_i, b_-i) - u_i(b_i, b_-i).
    """
    orders = _normalize_orders(g, orders)
    rank = {i: {a: n for n, a in enumerate(orders[i])} for i in g.players}
    violations = []
    # each inequality depends on the state only through player i's component,
    # so checking the supported profiles covers every relevant ex-post game
    state_profiles = list({th: None for (_t, th) in g.prior}.keys())
    for k, i in enumerate(g.players):
        own_pairs = [
            (hi, lo)
            for hi in g.actions[i]
            for lo in g.actions[i]
            if rank[i][hi] > rank[i][lo]
        ]
        others = [j for j in g.players if j != i]
        opp_profiles = list(itertools.product(*(g.actions[j] for j in others)))
        for th in state_profiles:
            th = tuple(th)
            for hi, lo in own_pairs:
                for opp_hi in opp_profiles:
                    for opp_lo in opp_profiles:
                        if any(
                            rank[j][opp_hi[m]] < rank[j][opp_lo[m]]
                            for m, j in enumerate(others)
                        ):
                            continue

                        def full(a_i, opp):
                            a = list(opp[:k]) + [a_i] + list(opp[k:])
                            return tuple(a)

                        lhs = g.payoff(i, full(hi, opp_hi), th) - g.payoff(i, full(lo, opp_hi), th)
                        rhs = g.payoff(i, full(hi, opp_lo), th) - g.payoff(i, full(lo, opp_lo), th)
                        if lhs < rhs:
                            violations.append((i, hi, lo, opp_hi, opp_lo, th))
    return not violations, violations


# ----------------------------------------------------------------------
# lattice rearrangement


@dataclass
class LatticeMeasure:
    """Nonnegative mass on action profiles of an ordered product lattice."""

    orders: dict[str, tuple[Label, ...]]
    players: tuple[str, ...]
    mass: dict[Profile, Rat]

    @classmethod
    def create(cls, orders, players, entries) -> "LatticeMeasure":
        mass = {}
        for a, m in entries.items():
            q = rat(m)
            if q < 0:
                raise GameError(f"negative lattice mass at {a!r}")
            if q != 0:
                mass[tuple(a)] = q
        return cls({i: tuple(o) for i, o in orders.items()}, tuple(players), mass)

    def rank(self) -> dict[str, dict[Label, int]]:
        return {i: {a: n for n, a in enumerate(self.orders[i])} for i in self.players}

    def marginal(self, i: str) -> dict[Label, Rat]:
        k = self.players.index(i)
        out: dict[Label, Rat] = {}
        for a, m in self.mass.items():
            out[a[k]] = out.get(a[k], ZERO) + m
        return out


def is_supermodular_function(f, measure_or_orders, players=None) -> bool:
    """f(a join b) + f(a meet b) >= f(a) + f(b) over the full profile lattice."""
    if isinstance(measure_or_orders, LatticeMeasure):
        orders, players = measure_or_orders.orders, measure_or_orders.players
    else:
        orders = measure_or_orders
    rank = {i: {a: n for n, a in enumerate(orders[i])} for i in players}
    profiles = [tuple(p) for p in itertools.product(*(orders[i] for i in players))]
    for a in profiles:
        for b in profiles:
            join = tuple(
                a[k] if rank[i][a[k]] >= rank[i][b[k]] else b[k]
                for k, i in enumerate(players)
            )
            meet = tuple(
                a[k] if rank[i][a[k]] <= rank[i][b[k]] else b[k]
                for k, i in enumerate(players)
            )
            if f(join) + f(meet) < f(a) + f(b):
                return False
    return True


def order_rearrange(mu: LatticeMeasure, f) -> LatticeMeasure:
    """Rearrange mass onto a chain without hurting a supermodular objective.

    Repeatedly picks, in lexicographically descending support order, the
    first profile incomparable with a later one and the first such later
    profile, and transfers the smaller of their masses to their join and
    meet.  Marginals are preserved exactly at every step and the objective
    sum f d(mu) never decreases; the loop stops when the support is totally
    ordered.  A hard iteration cap of |lattice|^3 guards termination.
    """
    players = mu.players
    rank = mu.rank()
    if not is_supermodular_function(f, mu):
        raise GameError("objective is not supermodular on the profile lattice")

    def lex_key(a: Profile):
        return tuple(-rank[i][a[k]] for k, i in enumerate(players))

    def geq(a: Profile, b: Profile) -> bool:
        return all(rank[i][a[k]] >= rank[i][b[k]] for k, i in enumerate(players))

    size = 1
    for i in players:
        size *= len(mu.orders[i])
    cap = size**3 + 1

    mass = dict(mu.mass)
    for _ in range(cap):
        support = sorted(mass, key=lex_key)
        k1 = None
        k2 = None
        for idx, a in enumerate(support):
            for jdx in range(idx + 1, len(support)):
                if not geq(a, support[jdx]):
                    k1, k2 = idx, jdx
                    break
            if k1 is not None:
                break
        if k1 is None:
            return LatticeMeasure(mu.orders, players, mass)
        alpha, beta = support[k1], support[k2]
        join = tuple(
            alpha[k] if rank[i][alpha[k]] >= rank[i][beta[k]] else beta[k]
            for k, i in enumerate(players)
        )
        meet = tuple(
            alpha[k] if rank[i][alpha[k]] <= rank[i][beta[k]] else beta[k]
            for k, i in enumerate(players)
        )
        t = min(mass[alpha], mass[beta])
        for x in (alpha, beta):
            nv = mass[x] - t
            if nv:
                mass[x] = nv
            else:
                del mass[x]
        for x in (join, meet):
            mass[x] = mass.get(x, ZERO) + t
    raise AssertionError("rearrangement exceeded its iteration cap")


# ----------------------------------------------------------------------
# extremal selections and the critical-path bound


def extremal_selections(rule, orders=None):
    """Largest and smallest per-type support actions of a belief-invariant rule.

    Returns a pair of pure StrategyProfile objects (top selection, bottom
    selection) built from the rule's own-action marginals.
    """
    from .equilibria import StrategyProfile

    g = rule.game
    orders = _normalize_orders(g, orders)
    rank = {i: {a: n for n, a in enumerate(orders[i])} for i in g.players}
    top: dict[str, dict[Label, Label]] = {i: {} for i in g.players}
    bottom: dict[str, dict[Label, Label]] = {i: {} for i in g.players}
    for i in g.players:
        marg = rule.own_action_marginal(i)
        for (a_i, t_i), mass in marg.items():
            if mass == 0:
                continue
            cur = top[i].get(t_i)
            if cur is None or rank[i][a_i] > rank[i][cur]:
                top[i][t_i] = a_i
            cur = bottom[i].get(t_i)
            if cur is None or rank[i][a_i] < rank[i][cur]:
                bottom[i][t_i] = a_i
    return StrategyProfile.pure(top), StrategyProfile.pure(bottom)


def kappa(v, g: Game, orders: dict[str, tuple[Label, ...]] | None = None) -> Rat:
    """Critical-path constant of a binary-action potential table.

    ``v`` maps (action profile, state profile) to a value; the action
    profiles 1_S play the top action inside S and the bottom action outside.
    The maximum of v(1_S) - v(1_{S'}) over nested S inside S' (S' != all)
    is divided by the minimum gap of the all-top profile over every other
    profile, both ranging over the state profiles on the prior support.
    Requires the all-top profile to be the strict maximum in every such
    state; errors on a nonpositive denominator.
    """
    orders = _normalize_orders(g, orders)
    if any(len(g.actions[i]) != 2 for i in g.players):
        raise GameError("kappa requires binary actions")
    bot = {i: orders[i][0] for i in g.players}
    top = {i: orders[i][-1] for i in g.players}
    n = len(g.players)
    indicators = list(itertools.product((0, 1), repeat=n))
    ones = tuple([1] * n)

    def profile(ind):
        return tuple(top[i] if ind[k] else bot[i] for k, i in enumerate(g.players))

    states = sorted({th for (_t, th) in g.prior}, key=repr)
    num = None
    den = None
    for th in states:
        v_ones = v[(profile(ones), th)]
        for s in indicators:
            if s == ones:
                continue
            gap = v_ones - v[(profile(s), th)]
            if den is None or gap < den:
                den = gap
            for s2 in indicators:
                if s2 == ones:
                    continue
                if all(x <= y for x, y in zip(s, s2)):
                    diff = v[(profile(s), th)] - v[(profile(s2), th)]
                    if num is None or diff > num:
                        num = diff
    if den is None:
        raise GameError("kappa needs a nonempty prior support")
    if den <= 0:
        raise GameError("zero denominator: all-top profile is not a strict maximum")
    return ONE + num / den


@dataclass
class CommonBeliefReport:
    cb: dict[str, tuple[Label, ...]]
    fictitious: Game
    epsilon: Rat
    cb_mass: Rat
    kappa_value: Rat | None
    bound_rhs: Rat | None
    bound_holds: bool | None


def _fictitious_game(g: Game, event: dict[str, set], orders) -> Game:
    """Duplicate each player's states with a 'forced' flag and reroute the
    prior so that types outside the event land on flagged states, where a
    large bonus makes the lowest action strictly dominant.

    Payoffs stay keyed by own state, so the construction is a legitimate
    game; every type's belief is preserved up to the flag decoration.
    """
    lo, hi = g.payoff_bounds()
    bonus = hi - lo + 1
    states = {i: tuple((s, flag) for s in g.states[i] for flag in (0, 1)) for i in g.players}
    lowest = {i: orders[i][0] for i in g.players}
    payoffs = {}
    for i in g.players:
        table = {}
        for (a, own), value in g.payoffs[i].items():
            table[(a, (own, 0))] = value
            table[(a, (own, 1))] = value + (bonus if a[g.player_index(i)] == lowest[i] else ZERO)
        payoffs[i] = table
    prior = {}
    for (t, th), mass in g.prior.items():
        flagged = tuple(
            (th[k], 0 if t[k] in event[i] else 1) for k, i in enumerate(g.players)
        )
        prior[(t, flagged)] = mass
    return Game.create(g.players, g.actions, g.types, states, prior, payoffs)


def common_belief_event(
    g: Game,
    event: dict[str, object],
    orders: dict[str, tuple[Label, ...]] | None = None,
    monotone_potential: dict | None = None,
) -> CommonBeliefReport:
    """Types iteratively justified in playing the top action inside an event.

    Builds the fictitious game that forces types outside ``event`` to the
    bottom action, takes its largest pure equilibrium, and returns the set
    of types playing the top action per player, along with
    epsilon = 1 - prior(event).  When a monotone potential table (with the
    strict all-ones maximum) is supplied, the report also evaluates the
    critical-path lower bound prior(CB) >= 1 - kappa(v) * epsilon.
    """
    from .equilibria import extremal_bne_supermodular

    orders = _normalize_orders(g, orders)
    if any(len(g.actions[i]) != 2 for i in g.players):
        raise GameError("common-belief analysis requires binary actions")
    ok, violations = is_supermodular(g, orders)
    if not ok:
        raise GameError(f"game is not supermodular: {violations[:3]}")
    supp = SupportSets.of(g)
    event_sets = {i: set(event[i]) & set(supp.types[i]) for i in g.players}

    event_mass = sum(
        (
            mass
            for (t, _th), mass in g.prior.items()
            if all(t[k] in event_sets[i] for k, i in enumerate(g.players))
        ),
        ZERO,
    )
    eps = ONE - event_mass

    fict = _fictitious_game(g, event_sets, orders)
    fict_orders = {i: orders[i] for i in g.players}
    largest = extremal_bne_supermodular(fict, "top", fict_orders)
    top_action = {i: orders[i][-1] for i in g.players}
    cb = {
        i: tuple(
            t_i
            for t_i in supp.types[i]
            if largest.sigma[i].get(t_i) and largest.pure_action(i, t_i) == top_action[i]
        )
        for i in g.players
    }
    for i in g.players:
        assert set(cb[i]) <= event_sets[i], "common-belief set escaped the event"
    cb_mass = sum(
        (
            mass
            for (t, _th), mass in g.prior.items()
            if all(t[k] in cb[i] for k, i in enumerate(g.players))
        ),
        ZERO,
    )

    kap = rhs = holds = None
    if monotone_potential is not None:
        kap = kappa(monotone_potential, g, orders)
        rhs = ONE - kap * eps
        holds = cb_mass >= rhs
    return CommonBeliefReport(cb, fict, eps, cb_mass, kap, rhs, holds)
