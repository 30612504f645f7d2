"""Potential, monotone-potential, and generalized-potential machinery.

A potential decomposes every player's payoff as a common term plus an
opponent-dependent term, u_i(a, theta) = v(a, theta) + q_i(a_-i, theta), on
the product of per-player state supports.  Detection is linear feasibility;
since the unknowns for different state profiles never interact, the system
is solved blockwise per state.  Values at off-support states are defined by
collapsing each off-support component to a canonical on-support one, which
pins a deterministic convention where the definitions leave freedom.

Generalized potentials live on coverings (per-player families of action
subsets whose union is the action set).  Certification searches, per player,
subset, and deviation map, for an adversarial belief under which the subset
is potential-best yet every action in it is strictly improvable; a positive
LP slack is an exact counterexample, and exhausting the grid certifies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .equilibria import bibce_constraints
from .game import Game, GameError, Label, Profile, SupportSets
from .lp import LinearProgram, maximize_then_restrict, solve
from .rational import ONE, ZERO, Rat, rat
from .rules import DistributionalRule

__all__ = [
    "PotentialFunction",
    "PotentialResult",
    "find_potential",
    "verify_potential",
    "potential_cycle_oracle_2x2",
    "maximize_potential_bibce",
    "Covering",
    "GeneralizedPotential",
    "ADecisionRule",
    "Certified",
    "Counterexample",
    "verify_generalized_potential",
    "MonotonePotential",
    "find_monotone_potential",
    "gp_from_monotone",
    "gp_maximizing_bibce",
]


def support_state_profiles(g: Game) -> list[Profile]:
    """Distinct state profiles carrying prior mass, in canonical order.

    Common-state games embed with the prior supported on the diagonal of
    the product state space, and their potential/covering tables live on
    exactly these profiles; requiring decompositions on the full product of
    per-player supports would wrongly reject them.
    """
    seen = {}
    for (_t, th) in g.prior:
        seen.setdefault(th, None)
    return list(seen.keys())


def _collapse_map(g: Game) -> dict[str, dict[Label, Label]]:
    """Per player: identity on supported states, first supported state off it."""
    supp = SupportSets.of(g)
    out = {}
    for i in g.players:
        keep = set(supp.states[i])
        first = supp.states[i][0]
        out[i] = {s: (s if s in keep else first) for s in g.states[i]}
    return out


@dataclass(frozen=True)
class PotentialFunction:
    """v on (action profile, supported state profile), with q_i witnesses."""

    v: dict[tuple[Profile, Profile], Rat]
    q: dict[str, dict[tuple[Profile, Profile], Rat]]
    collapse: dict[str, dict[Label, Label]]

    def value(self, a: Profile, theta: Profile, players) -> Rat:
        th = tuple(self.collapse[i][theta[k]] for k, i in enumerate(players))
        return self.v[(tuple(a), th)]


@dataclass
class PotentialResult:
    potential: PotentialFunction | None
    certificate: object | None = None  # Farkas rows of the failing state block
    failing_state: Profile | None = None

    @property
    def feasible(self) -> bool:
        return self.potential is not None


def find_potential(g: Game) -> PotentialResult:
    """Detect an exact potential by linear feasibility, blockwise per state.

    Normalizes v at the first action profile to zero in every state block to
    pin the additive constant.  Returns the potential together with the q_i
    witnesses, or the Farkas certificate of the first infeasible block.
    """
    profiles = g.action_profiles()
    a0 = profiles[0]
    v: dict[tuple[Profile, Profile], Rat] = {}
    q: dict[str, dict[tuple[Profile, Profile], Rat]] = {i: {} for i in g.players}
    for th in support_state_profiles(g):
        lp = LinearProgram()
        vvar = {a: lp.add_var(f"v_{m}", free=True) for m, a in enumerate(profiles)}
        qvar = {}
        for k, i in enumerate(g.players):
            opp = sorted({a[:k] + a[k + 1 :] for a in profiles}, key=repr)
            for m, rest in enumerate(opp):
                qvar[(i, rest)] = lp.add_var(f"q_{k}_{m}", free=True)
        lp.add_eq({vvar[a0]: ONE}, ZERO)
        for k, i in enumerate(g.players):
            for a in profiles:
                rest = a[:k] + a[k + 1 :]
                lp.add_eq({vvar[a]: ONE, qvar[(i, rest)]: ONE}, g.payoff(i, a, th))
        out = solve(lp)
        if out.status != "optimal":
            return PotentialResult(None, certificate=out.certificate, failing_state=th)
        for a in profiles:
            v[(a, th)] = out.point[vvar[a]]
        for k, i in enumerate(g.players):
            for a in profiles:
                rest = a[:k] + a[k + 1 :]
                q[i][(a, th)] = out.point[qvar[(i, rest)]]
    return PotentialResult(PotentialFunction(v, q, _collapse_map(g)))


def verify_potential(g: Game, pf: PotentialFunction) -> tuple[bool, list]:
    """Substitution check of the decomposition on every supported state."""
    residuals = []
    for th in support_state_profiles(g):
        for k, i in enumerate(g.players):
            for a in g.action_profiles():
                want = g.payoff(i, a, th)
                got = pf.v[(a, th)] + pf.q[i][(a, th)]
                if want != got:
                    residuals.append((i, a, th, want - got))
    return not residuals, residuals


def potential_cycle_oracle_2x2(g: Game, th: Profile) -> bool:
    """Independent 4-cycle test for exact potentials of a 2x2 ex-post game.

    The alternating sum of unilateral deviation gains around the single
    4-cycle of action profiles must vanish.
    """
    if len(g.players) != 2 or any(len(g.actions[i]) != 2 for i in g.players):
        raise GameError("cycle oracle is for 2x2 games only")
    p1, p2 = g.players
    a1, b1 = g.actions[p1]
    a2, b2 = g.actions[p2]
    total = (
        (g.payoff(p1, (b1, a2), th) - g.payoff(p1, (a1, a2), th))
        + (g.payoff(p2, (b1, b2), th) - g.payoff(p2, (b1, a2), th))
        + (g.payoff(p1, (a1, b2), th) - g.payoff(p1, (b1, b2), th))
        + (g.payoff(p2, (a1, a2), th) - g.payoff(p2, (a1, b2), th))
    )
    return total == 0


# ----------------------------------------------------------------------
# potential-maximizing BIBCE


def _maximize_bi_general(g: Game, value_fn) -> tuple[DistributionalRule, Rat]:
    poly = bibce_constraints(g, obedience=False)
    coeffs = poly.objective_for_rule_value(value_fn)
    poly.lp.set_objective(coeffs, "max")
    out = solve(poly.lp)
    assert out.status == "optimal", f"belief-invariant polytope is {out.status}"
    return poly.decode(out.point), out.value


def _maximize_bi_two_player_binary(g: Game, value_fn) -> tuple[DistributionalRule, Rat]:
    """Fast path: per-atom couplings of two binary marginals are a segment.

    With two players and two actions, a belief-invariant rule is exactly a
    pair of type-measurable marginals plus, per supported (t, theta), a free
    joint mass on the (top, top) cell within the Frechet bounds.  This cuts
    the LP from |A| variables per atom to one, which matters for the deep
    truncated families.  The reconstructed rule is re-validated exactly.
    """
    p1, p2 = g.players
    top1, bot1 = g.actions[p1][1], g.actions[p1][0]
    top2, bot2 = g.actions[p2][1], g.actions[p2][0]
    supp = SupportSets.of(g)
    tmarg = {i: g.type_marginal(i) for i in g.players}

    lp = LinearProgram()
    wvar = {}
    for i, types in ((p1, supp.types[p1]), (p2, supp.types[p2])):
        for n, t_i in enumerate(types):
            name = lp.add_var(f"w_{i}_{n}")
            wvar[(i, t_i)] = name
            lp.add_le({name: ONE}, tmarg[i][t_i])
    zvar = {}
    objective: dict[str, Rat] = {}
    constant = ZERO
    for n, ((t, th), mass) in enumerate(g.prior.items()):
        zn = lp.add_var(f"c_{n}")
        zvar[(t, th)] = zn
        t1, t2 = t
        m1, m2 = tmarg[p1][t1], tmarg[p2][t2]
        w1, w2 = wvar[(p1, t1)], wvar[(p2, t2)]
        # Frechet bounds on the (top, top) mass given the two marginals
        lp.add_le({zn: m1, w1: -mass}, ZERO)
        lp.add_le({zn: m2, w2: -mass}, ZERO)
        lp.add_ge({zn: m1 * m2, w1: -mass * m2, w2: -mass * m1}, -m1 * m2 * mass)
        v_tt = value_fn((top1, top2), th)
        v_tb = value_fn((top1, bot2), th)
        v_bt = value_fn((bot1, top2), th)
        v_bb = value_fn((bot1, bot2), th)
        objective[zn] = objective.get(zn, ZERO) + (v_tt - v_tb - v_bt + v_bb)
        objective[w1] = objective.get(w1, ZERO) + mass * (v_tb - v_bb) / m1
        objective[w2] = objective.get(w2, ZERO) + mass * (v_bt - v_bb) / m2
        constant += mass * v_bb
    lp.set_objective(objective, "max")
    out = solve(lp)
    assert out.status == "optimal", f"belief-invariant polytope is {out.status}"

    z = {}
    for (t, th), mass in g.prior.items():
        t1, t2 = t
        s1 = out.point[wvar[(p1, t1)]] / tmarg[p1][t1]
        s2 = out.point[wvar[(p2, t2)]] / tmarg[p2][t2]
        z_tt = out.point[zvar[(t, th)]]
        cells = {
            (top1, top2): z_tt,
            (top1, bot2): s1 * mass - z_tt,
            (bot1, top2): s2 * mass - z_tt,
            (bot1, bot2): mass - s1 * mass - s2 * mass + z_tt,
        }
        for a, m in cells.items():
            if m != 0:
                z[(a, t, th)] = m
    rule = DistributionalRule.create(g, z)
    assert rule.is_belief_invariant()
    return rule, out.value + constant


def maximize_potential_bibce(
    g: Game, pf: PotentialFunction
) -> tuple[DistributionalRule, Rat]:
    """A belief-invariant rule maximizing the expected potential, and its value.

    The potential is re-certified by substitution first.  For an exact
    potential every maximizer is automatically obedient (a unilateral
    deviation changes the expected potential by exactly the deviator's
    payoff change), so the result is a BIBCE; obedience is still asserted
    on the returned point.
    """
    ok, residuals = verify_potential(g, pf)
    if not ok:
        raise GameError(f"potential does not certify: {residuals[:3]}")
    value_fn = lambda a, th: pf.value(a, th, g.players)
    if len(g.players) == 2 and all(len(g.actions[i]) == 2 for i in g.players):
        rule, value = _maximize_bi_two_player_binary(g, value_fn)
    else:
        rule, value = _maximize_bi_general(g, value_fn)
    obedient, violations = rule.is_obedient()
    if not obedient:
        raise AssertionError(f"potential certification bug: {violations[:3]}")
    return rule, value


# ----------------------------------------------------------------------
# coverings and generalized potentials


@dataclass(frozen=True)
class Covering:
    """Per player, a family of nonempty action subsets covering the action set."""

    subsets: dict[str, tuple[tuple[Label, ...], ...]]

    @classmethod
    def create(cls, g: Game, subsets) -> "Covering":
        canon = {}
        for i in g.players:
            rank = {a: n for n, a in enumerate(g.actions[i])}
            family = []
            for X in subsets[i]:
                X = tuple(sorted(set(X), key=rank.get))
                if not X:
                    raise GameError("covering contains an empty subset")
                if any(a not in rank for a in X):
                    raise GameError(f"covering subset {X!r} has unknown actions")
                if X not in family:
                    family.append(X)
            union = {a for X in family for a in X}
            if union != set(g.actions[i]):
                raise GameError(f"covering of player {i!r} does not cover the action set")
            canon[i] = tuple(family)
        return cls(canon)

    @classmethod
    def trivial(cls, g: Game) -> "Covering":
        return cls.create(g, {i: (tuple(g.actions[i]),) for i in g.players})

    @classmethod
    def singletons(cls, g: Game) -> "Covering":
        return cls.create(g, {i: tuple((a,) for a in g.actions[i]) for i in g.players})

    def profiles(self, players) -> list[tuple]:
        return [tuple(p) for p in itertools.product(*(self.subsets[i] for i in players))]


@dataclass(frozen=True)
class GeneralizedPotential:
    covering: Covering
    table: dict[tuple[tuple, Profile], Rat]  # (subset profile, state profile) -> value
    collapse: dict[str, dict[Label, Label]]

    def value(self, X: tuple, theta: Profile, players) -> Rat:
        th = tuple(self.collapse[i][theta[k]] for k, i in enumerate(players))
        return self.table[(tuple(X), th)]

    @classmethod
    def from_table(cls, g: Game, covering: Covering, table) -> "GeneralizedPotential":
        states = support_state_profiles(g)
        canon = {}
        for X in covering.profiles(g.players):
            for th in states:
                canon[(X, th)] = rat(table[(X, th)])
        return cls(covering, canon, _collapse_map(g))

    @classmethod
    def from_potential(cls, g: Game, pf: PotentialFunction) -> "GeneralizedPotential":
        covering = Covering.singletons(g)
        table = {}
        for th in support_state_profiles(g):
            for a in g.action_profiles():
                X = tuple((a_i,) for a_i in a)
                table[(X, th)] = pf.v[(a, th)]
        return cls(covering, table, _collapse_map(g))


@dataclass
class Certified:
    checked_grid: int = 0


@dataclass
class Counterexample:
    player: str
    subset: tuple
    deviation: dict
    belief: dict  # (a_-i, X_-i, theta) -> probability
    slack: Rat

    def reverify(self, g: Game, gp: GeneralizedPotential) -> bool:
        """Exact re-check: the subset is potential-best under the belief, yet
        every action in it is strictly beaten by its deviation target."""
        i = self.player
        k = g.player_index(i)
        players = g.players
        # potential-argmax membership (weak rows against all alternatives)
        for X_alt in gp.covering.subsets[i]:
            diff = ZERO
            for (a_rest, X_rest, th), p in self.belief.items():
                own = gp.value(_insert(X_rest, k, self.subset), th, players)
                alt = gp.value(_insert(X_rest, k, X_alt), th, players)
                diff += p * (own - alt)
            if diff < 0:
                return False
        for a_i in self.subset:
            gain = ZERO
            for (a_rest, _X_rest, th), p in self.belief.items():
                a = _insert(a_rest, k, a_i)
                b = _insert(a_rest, k, self.deviation[a_i])
                gain += p * (g.payoff(i, b, th) - g.payoff(i, a, th))
            if gain <= 0:
                return False
        return True


def _insert(rest: tuple, k: int, item) -> tuple:
    return tuple(rest[:k]) + (item,) + tuple(rest[k:])


def verify_generalized_potential(
    g: Game, gp: GeneralizedPotential
) -> Certified | Counterexample:
    """Certify a candidate generalized potential or produce a counterexample.

    For each player and covering subset, adversarial beliefs range over the
    polytope of distributions on (opponents' actions, opponents' subsets,
    supported states) that are supported inside the subsets and that keep
    the subset weakly potential-best.  For each map sending every action of
    the subset to a deviation target, an LP maximizes the minimum strict
    improvement; a positive optimum is a certified violation.  Subsets with
    more than four actions are refused (the map grid is exponential there).
    """
    players = g.players
    states = support_state_profiles(g)
    checked = 0
    for k, i in enumerate(players):
        others = [j for j in players if j != i]
        opp_subset_profiles = [
            tuple(p) for p in itertools.product(*(gp.covering.subsets[j] for j in others))
        ]
        # belief atoms: (a_-i, X_-i, theta) with a_-i inside X_-i
        atoms = []
        for X_rest in opp_subset_profiles:
            for a_rest in itertools.product(*X_rest):
                for th in states:
                    atoms.append((tuple(a_rest), X_rest, th))
        for X_i in gp.covering.subsets[i]:
            if len(X_i) > 4:
                raise GameError("covering subset too large to verify (limit 4)")
            alternatives = [X for X in gp.covering.subsets[i] if X != X_i]
            deviation_space = [
                [b for b in g.actions[i] if b != a_i] for a_i in X_i
            ]
            for targets in itertools.product(*deviation_space):
                checked += 1
                dev = dict(zip(X_i, targets))
                lp = LinearProgram()
                pvar = {atom: lp.add_var(f"p_{n}") for n, atom in enumerate(atoms)}
                svar = lp.add_var("s", free=True)
                lp.add_eq({name: ONE for name in pvar.values()}, ONE)
                for X_alt in alternatives:
                    row = {}
                    for atom, name in pvar.items():
                        a_rest, X_rest, th = atom
                        own = gp.value(_insert(X_rest, k, X_i), th, players)
                        alt = gp.value(_insert(X_rest, k, X_alt), th, players)
                        if own != alt:
                            row[name] = own - alt
                    lp.add_ge(row, ZERO)
                for a_i in X_i:
                    row = {svar: -ONE}
                    for atom, name in pvar.items():
                        a_rest, _X_rest, th = atom
                        a = _insert(a_rest, k, a_i)
                        b = _insert(a_rest, k, dev[a_i])
                        delta = g.payoff(i, b, th) - g.payoff(i, a, th)
                        if delta != 0:
                            row[name] = row.get(name, ZERO) + delta
                    lp.add_ge(row, ZERO)
                lp.set_objective({svar: ONE}, "max")
                out = solve(lp)
                assert out.status == "optimal"
                if out.value > 0:
                    belief = {
                        atom: out.point[name]
                        for atom, name in pvar.items()
                        if out.point[name] != 0
                    }
                    cex = Counterexample(i, X_i, dev, belief, out.value)
                    assert cex.reverify(g, gp), "counterexample failed its own re-check"
                    return cex
    return Certified(checked)


# ----------------------------------------------------------------------
# monotone potentials (binary actions)


@dataclass
class MonotonePotential:
    v: dict[tuple[Profile, Profile], Rat]
    weights: dict[str, Rat]
    collapse: dict[str, dict[Label, Label]]


def find_monotone_potential(
    g: Game,
    orders: dict[str, tuple[Label, ...]] | None = None,
    supermodular_v: bool | None = None,
) -> MonotonePotential | None:
    """Search for a monotone potential certifying the all-top profile.

    Feasibility in (v, lambda) of the weighted inequality
    lambda_i * (u_i(top, a_-i) - u_i(bottom, a_-i)) >= v(top, a_-i) - v(bottom, a_-i)
    for every opponent profile and supported state, together with the strict
    maximality of the all-top profile.  Strictness is encoded by maximizing
    a slack capped at one; by positive scaling of (v, lambda, slack) the
    optimum is exactly one when a strict solution exists and at most zero
    otherwise.  lambda is normalized to be at least one.

    When the game itself is not supermodular, supermodularity is imposed on
    v instead (the other branch of the sufficient condition); pass
    ``supermodular_v`` explicitly to force a branch.
    """
    from .supermodular import is_supermodular

    if any(len(g.actions[i]) != 2 for i in g.players):
        raise GameError("monotone potentials are defined for binary actions")
    if orders is None:
        orders = {i: tuple(g.actions[i]) for i in g.players}
    bot = {i: orders[i][0] for i in g.players}
    top = {i: orders[i][-1] for i in g.players}
    if supermodular_v is None:
        game_super, _ = is_supermodular(g, orders)
        supermodular_v = not game_super

    profiles = g.action_profiles()
    states = support_state_profiles(g)
    ones = tuple(top[i] for i in g.players)

    lp = LinearProgram()
    vvar = {
        (a, th): lp.add_var(f"v_{m}_{n}", free=True)
        for m, a in enumerate(profiles)
        for n, th in enumerate(states)
    }
    lam = {i: lp.add_var(f"lam_{k}") for k, i in enumerate(g.players)}
    svar = lp.add_var("s", free=True)
    for i in g.players:
        lp.add_ge({lam[i]: ONE}, ONE)
    lp.add_le({svar: ONE}, ONE)

    for k, i in enumerate(g.players):
        others = [j for j in g.players if j != i]
        for rest in itertools.product(*(g.actions[j] for j in others)):
            hi = _insert(rest, k, top[i])
            lo = _insert(rest, k, bot[i])
            for th in states:
                du = g.payoff(i, hi, th) - g.payoff(i, lo, th)
                row = {vvar[(hi, th)]: -ONE, vvar[(lo, th)]: ONE}
                if du != 0:
                    row[lam[i]] = du
                lp.add_ge(row, ZERO)
    for th in states:
        for a in profiles:
            if a == ones:
                continue
            lp.add_ge({vvar[(ones, th)]: ONE, vvar[(a, th)]: -ONE, svar: -ONE}, ZERO)
    if supermodular_v:
        for ki, kj in itertools.combinations(range(len(g.players)), 2):
            i, j = g.players[ki], g.players[kj]
            others = [p for p in g.players if p not in (i, j)]
            for rest in itertools.product(*(g.actions[p] for p in others)):
                def build(ai, aj):
                    a = list(rest)
                    a.insert(min(ki, kj), None)
                    a.insert(max(ki, kj), None)
                    a[ki], a[kj] = ai, aj
                    return tuple(a)

                for th in states:
                    lp.add_ge(
                        {
                            vvar[(build(top[i], top[j]), th)]: ONE,
                            vvar[(build(bot[i], top[j]), th)]: -ONE,
                            vvar[(build(top[i], bot[j]), th)]: -ONE,
                            vvar[(build(bot[i], bot[j]), th)]: ONE,
                        },
                        ZERO,
                    )
    lp.set_objective({svar: ONE}, "max")
    out = solve(lp)
    assert out.status == "optimal"
    if out.value <= 0:
        return None
    assert out.value == 1, "strict slack must scale to its cap"
    v = {(a, th): out.point[vvar[(a, th)]] for a in profiles for th in states}
    weights = {i: out.point[lam[i]] for i in g.players}
    return MonotonePotential(v, weights, _collapse_map(g))


def gp_from_monotone(
    g: Game, mp: MonotonePotential, orders: dict[str, tuple[Label, ...]] | None = None
) -> GeneralizedPotential:
    """The generalized potential induced by a monotone potential.

    The covering gives each player the full action set and the top-action
    singleton; the table reads the monotone potential at the profile of
    subset minima.
    """
    if orders is None:
        orders = {i: tuple(g.actions[i]) for i in g.players}
    bot = {i: orders[i][0] for i in g.players}
    top = {i: orders[i][-1] for i in g.players}
    covering = Covering.create(
        g, {i: ((bot[i], top[i]), (top[i],)) for i in g.players}
    )
    table = {}
    for X in covering.profiles(g.players):
        mins = tuple(
            bot[i] if len(X[k]) > 1 else top[i] for k, i in enumerate(g.players)
        )
        for th in support_state_profiles(g):
            table[(X, th)] = mp.v[(mins, th)]
    return GeneralizedPotential(covering, table, _collapse_map(g))


# ----------------------------------------------------------------------
# GP-maximizing BIBCE


@dataclass(frozen=True)
class ADecisionRule:
    """Joint mass on (action profile, subset profile, type profile, state)."""

    game: Game
    covering: Covering
    gamma: dict[tuple[Profile, tuple, Profile, Profile], Rat]

    def validate(self) -> None:
        sums: dict[tuple[Profile, Profile], Rat] = {}
        for (a, X, t, th), mass in self.gamma.items():
            if mass < 0:
                raise GameError("negative mass in subset-recommendation rule")
            if any(a[k] not in X[k] for k in range(len(a))):
                raise GameError("recommended action outside its subset")
            if (t, th) not in self.game.prior:
                raise GameError("mass off the prior support")
            sums[(t, th)] = sums.get((t, th), ZERO) + mass
        for key, mass in self.game.prior.items():
            if sums.get(key, ZERO) != mass:
                raise GameError("per-atom masses do not match the prior")

    def project(self) -> DistributionalRule:
        z: dict = {}
        for (a, _X, t, th), mass in self.gamma.items():
            if mass != 0:
                z[(a, t, th)] = z.get((a, t, th), ZERO) + mass
        return DistributionalRule.create(self.game, z)

    def is_belief_invariant(self) -> bool:
        g = self.game
        for k, i in enumerate(g.players):
            seen: dict[tuple, Rat] = {}
            per_atom: dict[tuple, dict[tuple, Rat]] = {}
            for (a, X, t, th), mass in self.gamma.items():
                bucket = per_atom.setdefault((t, th), {})
                key = (a[k], X[k])
                bucket[key] = bucket.get(key, ZERO) + mass
            for (t, th), bucket in per_atom.items():
                prior = g.prior[(t, th)]
                pairs = {
                    (a_i, X_i)
                    for X_i in self.covering.subsets[i]
                    for a_i in X_i
                }
                for pair in pairs:
                    value = bucket.get(pair, ZERO) / prior
                    key = (t[k],) + pair
                    if key in seen:
                        if seen[key] != value:
                            return False
                    else:
                        seen[key] = value
        return True


def gamma_polytope(
    g: Game,
    gp: GeneralizedPotential,
    obedience: bool,
    lp: LinearProgram | None = None,
    prefix: str = "",
):
    """Belief-invariant subset-recommendation rules as an LP block.

    Variables are joint masses on (action profile, subset profile, type
    profile, state), constrained to recommend inside subsets, to sum to the
    prior per atom, and to have type-measurable (own action, own subset)
    marginals; obedience rows are optional.  Returns (lp, variable map,
    expected-potential objective coefficients).
    """
    players = g.players
    subset_profiles = gp.covering.profiles(players)
    if lp is None:
        lp = LinearProgram()
    gvar: dict[tuple[Profile, tuple, Profile, Profile], str] = {}
    for n, (t, th) in enumerate(g.prior):
        for m, X in enumerate(subset_profiles):
            for r, a in enumerate(itertools.product(*X)):
                gvar[(tuple(a), X, t, th)] = lp.add_var(f"{prefix}g{n}_{m}_{r}")
    atoms: dict[tuple[Profile, Profile], list[str]] = {}
    for (a, X, t, th), name in gvar.items():
        atoms.setdefault((t, th), []).append(name)
    for (t, th), names in atoms.items():
        lp.add_eq({name: ONE for name in names}, g.prior[(t, th)])
    # belief invariance in the (own action, own subset) pair
    tmarg = {i: g.type_marginal(i) for i in players}
    supp = SupportSets.of(g)
    wvar = {}
    for k, i in enumerate(players):
        pairs = [(a_i, X_i) for X_i in gp.covering.subsets[i] for a_i in X_i]
        for t_i in supp.types[i]:
            for m, pair in enumerate(pairs):
                wvar[(i, pair, t_i)] = lp.add_var(f"{prefix}W{k}_{t_i}_{m}")
        for (t, th), mass in g.prior.items():
            rows = {pair: {} for pair in pairs}
            for (a, X, t2, th2), name in gvar.items():
                if (t2, th2) == (t, th):
                    rows[(a[k], X[k])][name] = tmarg[i][t[k]]
            for pair, coeffs in rows.items():
                coeffs = dict(coeffs)
                wname = wvar[(i, pair, t[k])]
                coeffs[wname] = coeffs.get(wname, ZERO) - mass
                lp.add_eq(coeffs, ZERO)
    if obedience:
        for k, i in enumerate(players):
            gain: dict[tuple, dict[str, Rat]] = {}
            for (a, X, t, th), name in gvar.items():
                u_rec = g.payoff(i, a, th)
                for dev in g.actions[i]:
                    if dev == a[k]:
                        continue
                    ad = a[:k] + (dev,) + a[k + 1 :]
                    delta = g.payoff(i, ad, th) - u_rec
                    if delta == 0:
                        continue
                    row = gain.setdefault((t[k], X[k], a[k], dev), {})
                    row[name] = row.get(name, ZERO) + delta
            for row in gain.values():
                lp.add_le(row, ZERO)
    objective = {}
    for (a, X, t, th), name in gvar.items():
        val = gp.value(X, th, players)
        if val != 0:
            objective[name] = objective.get(name, ZERO) + val
    return lp, gvar, objective


def gp_maximizing_bibce(
    g: Game, gp: GeneralizedPotential
) -> tuple[ADecisionRule, DistributionalRule, Rat]:
    """Maximize the expected generalized potential among belief-invariant
    subset-recommendation rules, then pick an obedient point of the argmax
    face and project it to an ordinary rule.

    The maximal value over belief-invariant rules must be attained by an
    obedient one; the implementation asserts this by comparing the optimum
    with and without obedience rows ("theory violation" if they differ) and
    asserts that the projected rule is a BIBCE of the game.
    """
    lp_bi, _, obj_bi = gamma_polytope(g, gp, obedience=False)
    lp_bi.set_objective(obj_bi, "max")
    out_bi = solve(lp_bi)
    assert out_bi.status == "optimal"

    lp_ob, gvar, obj_ob = gamma_polytope(g, gp, obedience=True)
    lp_ob.set_objective(obj_ob, "max")
    first, second = maximize_then_restrict(lp_ob, {})
    if first.value != out_bi.value:
        raise AssertionError(
            "theory violation: no obedient rule attains the unconstrained optimum"
        )
    gamma = {
        key: second.point[name]
        for key, name in gvar.items()
        if second.point[name] != 0
    }
    a_rule = ADecisionRule(g, gp.covering, gamma)
    a_rule.validate()
    assert a_rule.is_belief_invariant()
    projected = a_rule.project()
    assert projected.is_belief_invariant()
    obedient, violations = projected.is_obedient()
    assert obedient, f"projected rule violates obedience: {violations[:3]}"
    return a_rule, projected, first.value
