"""Equilibrium polytopes and solvers.

Everything here reduces to exact LPs over the distributional variables
z(a, t, theta) = sigma(a | t, theta) * prior(t, theta) on the prior support:

  * obedience: for every player, supported type, recommendation and
    deviation, the expected gain from deviating is nonpositive;
  * belief-invariance: each player's conditional action marginal depends on
    their own type only, linearized with auxiliary w_i(a_i, t_i) variables.

Iterated interim strict dominance doubles as an exact presolve: obedient
rules place no mass on recommendations that are strictly dominated against
correlated, state-dependent conjectures over surviving opponent actions, so
equilibrium LPs can drop those columns without changing the feasible set.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .game import Game, GameError, Label, Profile, SupportSets
from .lp import LinearProgram, LpOutcome, solve
from .rational import ONE, ZERO, Rat
from .rules import DistributionalRule, TypeMap, outcome_equivalent, pushforward

__all__ = [
    "EquilibriumPolytope",
    "StrategyProfile",
    "bce_constraints",
    "bibce_constraints",
    "find_bibce",
    "iterated_strict_dominance",
    "extremal_bne_supermodular",
    "enumerate_pure_bne",
    "outcome_equivalent",
]

Survivors = dict[str, dict[Label, tuple[Label, ...]]]


@dataclass(frozen=True)
class StrategyProfile:
    """Per player, a map type -> distribution over own actions."""

    sigma: dict[str, dict[Label, dict[Label, Rat]]]

    @classmethod
    def pure(cls, assignment: dict[str, dict[Label, Label]]) -> "StrategyProfile":
        return cls(
            {
                i: {t: {a: ONE} for t, a in table.items()}
                for i, table in assignment.items()
            }
        )

    def pure_action(self, i: str, t_i: Label) -> Label:
        dist = self.sigma[i][t_i]
        if len(dist) != 1:
            raise GameError(f"strategy of {i!r} at {t_i!r} is not pure")
        return next(iter(dist))

    def as_rule(self, g: Game) -> DistributionalRule:
        z = {}
        for (t, th), mass in g.prior.items():
            dists = [self.sigma[i][t[k]] for k, i in enumerate(g.players)]
            for combo in itertools.product(*(d.items() for d in dists)):
                a = tuple(c[0] for c in combo)
                p = mass
                for c in combo:
                    p *= c[1]
                if p != 0:
                    z[(a, t, th)] = z.get((a, t, th), ZERO) + p
        return DistributionalRule.create(g, z)


@dataclass
class EquilibriumPolytope:
    """LP encoding of an equilibrium set over distributional variables."""

    game: Game
    kind: str  # "bce" or "bibce"
    lp: LinearProgram
    zvar: dict[tuple[Profile, Profile, Profile], str]
    wvar: dict[tuple[str, Label, Label], str]

    def decode(self, point: dict[str, Rat]) -> DistributionalRule:
        z = {
            key: point[name]
            for key, name in self.zvar.items()
            if point.get(name, ZERO) != 0
        }
        return DistributionalRule.create(self.game, z)

    def contains(self, rule: DistributionalRule) -> bool:
        """Exact membership check, done on the rule itself rather than the LP."""
        try:
            rule.validate()
        except GameError:
            return False
        if self.kind == "bibce" and not rule.is_belief_invariant():
            return False
        ok, _ = rule.is_obedient()
        return ok

    def objective_for_rule_value(self, value_fn) -> dict[str, Rat]:
        """Linear objective sum z(a,t,theta)*value_fn(a,theta) over variables."""
        coeffs = {}
        for (a, _t, th), name in self.zvar.items():
            v = value_fn(a, th)
            if v != 0:
                coeffs[name] = coeffs.get(name, ZERO) + v
        return coeffs


def _allowed_profiles(g: Game, t: Profile, survivors: Survivors | None) -> list[Profile]:
    if survivors is None:
        return g.action_profiles()
    pools = [survivors[i][t[k]] for k, i in enumerate(g.players)]
    return [tuple(p) for p in itertools.product(*pools)]


def _build_polytope(
    g: Game,
    kind: str,
    belief_invariant: bool,
    obedience: bool,
    lp: LinearProgram | None = None,
    prefix: str = "",
    survivors: Survivors | None = None,
) -> EquilibriumPolytope:
    supp = SupportSets.of(g)
    if lp is None:
        lp = LinearProgram()
    zvar: dict[tuple[Profile, Profile, Profile], str] = {}
    for n, (t, th) in enumerate(g.prior):
        for m, a in enumerate(_allowed_profiles(g, t, survivors)):
            name = lp.add_var(f"{prefix}z{n}_{m}")
            zvar[(a, t, th)] = name

    # per-atom mass conservation: sum_a z = prior
    atoms: dict[tuple[Profile, Profile], list[str]] = {}
    for (a, t, th), name in zvar.items():
        atoms.setdefault((t, th), []).append(name)
    for (t, th), names in atoms.items():
        lp.add_eq({name: ONE for name in names}, g.prior[(t, th)])

    wvar: dict[tuple[str, Label, Label], str] = {}
    if belief_invariant:
        tmarg = {i: g.type_marginal(i) for i in g.players}
        for k, i in enumerate(g.players):
            for t_i in supp.types[i]:
                for a_i in g.actions[i]:
                    wvar[(i, a_i, t_i)] = lp.add_var(f"{prefix}w_{k}_{a_i}_{t_i}")
        # prior(t_i) * sum_{a_-i} z(a,t,theta) = prior(t,theta) * w_i(a_i,t_i)
        for k, i in enumerate(g.players):
            for (t, th), mass in g.prior.items():
                rows: dict[Label, dict[str, Rat]] = {a_i: {} for a_i in g.actions[i]}
                for a in _allowed_profiles(g, t, survivors):
                    rows[a[k]][zvar[(a, t, th)]] = tmarg[i][t[k]]
                for a_i, coeffs in rows.items():
                    coeffs = dict(coeffs)
                    wname = wvar[(i, a_i, t[k])]
                    coeffs[wname] = coeffs.get(wname, ZERO) - mass
                    lp.add_eq(coeffs, ZERO)

    if obedience:
        for k, i in enumerate(g.players):
            # gain rows grouped by (type, recommendation, deviation)
            gain: dict[tuple[Label, Label, Label], dict[str, Rat]] = {}
            for (a, t, th), name in zvar.items():
                u_rec = g.payoff(i, a, th)
                for dev in g.actions[i]:
                    if dev == a[k]:
                        continue
                    ad = a[:k] + (dev,) + a[k + 1 :]
                    delta = g.payoff(i, ad, th) - u_rec
                    if delta == 0:
                        continue
                    row = gain.setdefault((t[k], a[k], dev), {})
                    row[name] = row.get(name, ZERO) + delta
            for row in gain.values():
                lp.add_le(row, ZERO)

    return EquilibriumPolytope(g, kind, lp, zvar, wvar)


def bce_constraints(g: Game, survivors: Survivors | None = None) -> EquilibriumPolytope:
    """Obedience polytope: its points are exactly the distributional BCE."""
    return _build_polytope(g, "bce", belief_invariant=False, obedience=True, survivors=survivors)


def bibce_constraints(
    g: Game,
    survivors: Survivors | None = None,
    lp: LinearProgram | None = None,
    prefix: str = "",
    obedience: bool = True,
) -> EquilibriumPolytope:
    """Belief-invariance plus obedience; contained in the BCE polytope."""
    return _build_polytope(
        g, "bibce", belief_invariant=True, obedience=obedience,
        lp=lp, prefix=prefix, survivors=survivors,
    )


def find_bibce(
    g: Game,
    objective: dict | None = None,
    presolve: bool = False,
) -> DistributionalRule:
    """Return an exact BIBCE; existence is guaranteed for every valid game.

    ``objective`` optionally maps (a, theta) pairs to values to select among
    equilibria; with ``presolve`` the LP is restricted to actions surviving
    iterated strict dominance first (exact, see module docstring).
    """
    survivors = iterated_strict_dominance(g) if presolve else None
    poly = bibce_constraints(g, survivors=survivors)
    if objective:
        coeffs = poly.objective_for_rule_value(lambda a, th: objective.get((a, th), ZERO))
        poly.lp.set_objective(coeffs, "max")
    out = solve(poly.lp)
    if out.status != "optimal":
        raise AssertionError(f"theory violation: BIBCE polytope is {out.status}")
    rule = poly.decode(out.point)
    assert poly.contains(rule)
    return rule


# ----------------------------------------------------------------------
# iterated interim strict dominance


def _strict_dominance_slack(
    g: Game,
    i: str,
    t_i: Label,
    candidate: Label,
    survivors: Survivors,
    belief,
) -> Rat:
    """Best guaranteed strict-improvement margin against surviving conjectures.

    Maximizes, over mixtures x on the type's surviving actions, the expected
    pointwise-minimum payoff gain over opponents' surviving action choices
    (which may depend on their types and the state, and be correlated).  A
    positive optimum certifies strict dominance of ``candidate``.
    """
    k = g.player_index(i)
    lp = LinearProgram()
    surv_i = survivors[i][t_i]
    xvars = {a_i: lp.add_var(f"x_{m}") for m, a_i in enumerate(surv_i)}
    lp.add_eq({name: ONE for name in xvars.values()}, ONE)
    objective: dict[str, Rat] = {}
    for n, ((t_rest, th), p) in enumerate(belief.items()):
        mvar = lp.add_var(f"m_{n}", free=True)
        objective[mvar] = p
        t_full = t_rest[:k] + (t_i,) + t_rest[k:]
        opp_pools = [survivors[j][t_full[m]] for m, j in enumerate(g.players) if j != i]
        for opp in itertools.product(*opp_pools):
            row: dict[str, Rat] = {mvar: ONE}
            for a_i, name in xvars.items():
                a = opp[:k] + (a_i,) + opp[k:]
                b = opp[:k] + (candidate,) + opp[k:]
                delta = g.payoff(i, a, th) - g.payoff(i, b, th)
                if delta != 0:
                    row[name] = row.get(name, ZERO) - delta
            lp.add_le(row, ZERO)
    lp.set_objective(objective, "max")
    out = solve(lp)
    assert out.status == "optimal"
    return out.value


def iterated_strict_dominance(g: Game, rng: random.Random | None = None) -> Survivors:
    """Largest per-(player, type) action sets surviving iterated elimination.

    Elimination is interim and strict: an action goes when some mixture over
    the type's surviving actions strictly outperforms it against every
    conjecture supported on opponents' surviving actions.  The result is
    independent of elimination order; pass ``rng`` to randomize the worklist
    order (used by the order-invariance tests).
    """
    supp = SupportSets.of(g)
    survivors: Survivors = {
        i: {t_i: tuple(g.actions[i]) for t_i in supp.types[i]} for i in g.players
    }
    beliefs = {
        (i, t_i): g.belief(i, t_i) for i in g.players for t_i in supp.types[i]
    }
    # who must be re-examined when (i, t_i) shrinks: every type sharing an atom
    neighbors: dict[tuple[str, Label], set[tuple[str, Label]]] = {
        key: set() for key in beliefs
    }
    for (t, _th) in g.prior:
        present = [(i, t[k]) for k, i in enumerate(g.players)]
        for a in present:
            for b in present:
                if a != b:
                    neighbors[a].add(b)

    queue = list(beliefs.keys())
    if rng is not None:
        rng.shuffle(queue)
    queued = set(queue)
    while queue:
        i, t_i = queue.pop(0 if rng is None else rng.randrange(len(queue)))
        queued.discard((i, t_i))
        if len(survivors[i][t_i]) == 1:
            continue
        removed = []
        for candidate in survivors[i][t_i]:
            slack = _strict_dominance_slack(g, i, t_i, candidate, survivors, beliefs[(i, t_i)])
            if slack > 0:
                removed.append(candidate)
        if removed:
            keep = tuple(a for a in survivors[i][t_i] if a not in removed)
            assert keep, "strict dominance cannot remove every action"
            survivors[i][t_i] = keep
            for nb in neighbors[(i, t_i)] | {(i, t_i)}:
                if nb not in queued:
                    queue.append(nb)
                    queued.add(nb)
    return survivors


# ----------------------------------------------------------------------
# extremal pure equilibria of supermodular games


def extremal_bne_supermodular(
    g: Game, direction: str = "top", orders: dict[str, tuple[Label, ...]] | None = None
) -> StrategyProfile:
    """Largest or smallest pure BNE by monotone best-response iteration.

    Starts from the all-maximal (``top``) or all-minimal (``bottom``)
    profile and applies simultaneous extreme best responses; in a
    supermodular game the iterates move monotonically and stop at the
    extremal equilibrium.  The result is verified obedient.
    """
    from .supermodular import OrderedGame  # circular at module load time only

    og = g if isinstance(g, OrderedGame) else OrderedGame.checked(g, orders)
    base = og.game
    if direction not in ("top", "bottom"):
        raise GameError(f"direction must be 'top' or 'bottom', not {direction!r}")
    supp = SupportSets.of(base)
    rank = {i: {a: n for n, a in enumerate(og.orders[i])} for i in base.players}
    pick = (lambda opts, i: max(opts, key=rank[i].get)) if direction == "top" else (
        lambda opts, i: min(opts, key=rank[i].get)
    )
    current = {
        i: {t_i: pick(base.actions[i], i) for t_i in supp.types[i]} for i in base.players
    }
    beliefs = {(i, t_i): base.belief(i, t_i) for i in base.players for t_i in supp.types[i]}

    max_rounds = sum(len(supp.types[i]) * len(base.actions[i]) for i in base.players) + 2
    for _ in range(max_rounds):
        nxt = {}
        for k, i in enumerate(base.players):
            nxt[i] = {}
            for t_i in supp.types[i]:
                best_value = None
                best_set = []
                for a_i in base.actions[i]:
                    value = ZERO
                    for (t_rest, th), p in beliefs[(i, t_i)].items():
                        t_full = t_rest[:k] + (t_i,) + t_rest[k:]
                        a = tuple(
                            a_i if j == i else current[j][t_full[m]]
                            for m, j in enumerate(base.players)
                        )
                        value += p * base.payoff(i, a, th)
                    if best_value is None or value > best_value:
                        best_value = value
                        best_set = [a_i]
                    elif value == best_value:
                        best_set.append(a_i)
                nxt[i][t_i] = pick(best_set, i)
        if nxt == current:
            profile = StrategyProfile.pure(current)
            rule = profile.as_rule(base)
            ok, violations = rule.is_obedient()
            assert ok, f"extremal iteration produced a non-equilibrium: {violations}"
            return profile
        current = nxt
    raise AssertionError("monotone best-response iteration failed to converge")


def enumerate_pure_bne(g: Game) -> list[StrategyProfile]:
    """Exhaustive pure BNE enumeration, refused beyond small instances."""
    supp = SupportSets.of(g)
    if len(g.players) > 2 or any(
        len(g.actions[i]) > 3 or len(supp.types[i]) > 3 for i in g.players
    ):
        raise GameError("pure BNE enumeration limited to 2 players x 3 actions x 3 types")
    slots = [(i, t_i) for i in g.players for t_i in supp.types[i]]
    found = []
    for combo in itertools.product(*(g.actions[i] for i, _t in slots)):
        assignment: dict[str, dict[Label, Label]] = {i: {} for i in g.players}
        for (i, t_i), a_i in zip(slots, combo):
            assignment[i][t_i] = a_i
        profile = StrategyProfile.pure(assignment)
        ok, _ = profile.as_rule(g).is_obedient()
        if ok:
            found.append(profile)
    return found
