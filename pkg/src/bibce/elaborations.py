"""Elaborations, perturbation families, and exact epsilon certification.

An elaboration reshuffles a game's types (possibly duplicating and
correlating them through a belief-invariant device) without changing any
belief hierarchy; the exact conditions are equalities between the base
prior/beliefs and their pushforwards along a type map.  An approximate
version relaxes the equalities to sup-over-events distances and allows a
small-probability set of types with foreign payoff states.  The smallest
epsilon certifying all conditions at once is computed exactly by scanning
the finite set of candidate thresholds.

Two canonical countable families are provided in exactly truncated form:
the email-game perturbation of the two-state coordination example, and a
discretized two-player global game.  Truncation absorbs the tail mass into
the deepest atom; the resulting belief distortion is measured by the
certifier rather than assumed.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .game import CommunicationRule, Game, GameError, Label, Profile, conjunction
from .measures import sup_event_distance
from .rational import ONE, ZERO, Rat, rat
from .rules import StateMap, TypeMap, push_prior

__all__ = [
    "ElaborationWitness",
    "EpsilonCertificate",
    "verify_elaboration",
    "epsilon_of",
    "motivating_example",
    "email_game_family",
    "global_game",
    "global_game_tau_star",
    "global_game_potential_table",
    "global_game_expected_potential",
    "threshold_strategy",
    "random_epsilon_elaboration",
]


@dataclass
class EpsilonCertificate:
    prior_distance: Rat
    sharp_mass: Rat
    belief_distances: dict[str, dict[Label, Rat]]
    flats: dict[str, tuple[Label, ...]]
    candidates: tuple[Rat, ...]


@dataclass
class ElaborationWitness:
    base: Game
    perturbed: Game
    tau: TypeMap
    phi: StateMap | None
    epsilon: Rat
    flats: dict[str, tuple[Label, ...]]
    sharp_mass: Rat
    certificate: EpsilonCertificate | None = None
    family: str = ""
    params: dict = field(default_factory=dict)


def verify_elaboration(base: Game, perturbed: Game, tau: TypeMap) -> bool:
    """Exact elaboration test: prior and belief pushforwards agree.

    Checks that the pushed-forward prior reproduces the base prior on its
    support and that every supported perturbed type's belief, pushed through
    the type map, equals the belief of its image type.
    """
    players = base.players
    if tuple(perturbed.players) != tuple(players):
        return False
    pushed = push_prior(perturbed, tau, base)
    keys = pushed.keys() | base.prior.keys()
    if any(pushed.get(k, ZERO) != base.prior.get(k, ZERO) for k in keys):
        return False
    for k, i in enumerate(players):
        for t_bar in perturbed.types[i]:
            marg = perturbed.type_marginal(i).get(t_bar, ZERO)
            if marg == 0:
                continue
            target = tau.apply(i, t_bar)
            base_belief = base.belief(i, target)
            pushed_belief: dict = {}
            for (t_rest, th), p in perturbed.belief(i, t_bar).items():
                mapped = tuple(
                    tau.apply(j, t_rest[m if m < k else m - 1])
                    for m, j in enumerate(players)
                    if j != i
                )
                key = (mapped, th)
                pushed_belief[key] = pushed_belief.get(key, ZERO) + p
            keys = pushed_belief.keys() | base_belief.keys()
            if any(
                pushed_belief.get(key, ZERO) != base_belief.get(key, ZERO) for key in keys
            ):
                return False
    return True


def _payoffs_agree_on_support(base: Game, perturbed: Game) -> bool:
    from .game import SupportSets

    supp = SupportSets.of(base)
    profiles = base.action_profiles()
    for i in base.players:
        for own in supp.states[i]:
            if own not in perturbed.states[i]:
                return False
            for a in profiles:
                if perturbed.payoffs[i].get((a, own)) != base.payoffs[i][(a, own)]:
                    return False
    return True


def epsilon_of(
    base: Game,
    perturbed: Game,
    tau: TypeMap,
    phi: StateMap | None = None,
) -> tuple[Rat, EpsilonCertificate]:
    """Smallest epsilon certifying the perturbed game as an approximate
    elaboration of the base game along the given type map.

    Three quantities must all sit below epsilon: the sup-event distance
    between the pushed prior and the base prior; one minus the probability
    that every player is sure their own payoff state is a base one; and,
    per player, the mass of types whose pushed belief is farther than
    epsilon from their image type's belief (those types are excluded from
    the per-player flat sets).  Feasibility is monotone in epsilon over a
    finite candidate set, so the scan below is exact and the result tight.
    """
    from .game import SupportSets

    players = base.players
    if tuple(perturbed.players) != tuple(players) or any(
        tuple(perturbed.actions[i]) != tuple(base.actions[i]) for i in players
    ):
        raise GameError("not an elaboration candidate: players or actions differ")
    if not _payoffs_agree_on_support(base, perturbed):
        raise GameError("not an elaboration candidate: payoffs differ on base states")
    base_supp = SupportSets.of(base)
    for i in players:
        allowed = set(base_supp.types[i])
        for t_bar, target in tau.maps[i].items():
            if target not in allowed:
                raise GameError(
                    f"type map sends {t_bar!r} outside the base support of {i!r}"
                )

    # (def 3:1): pushed prior vs base prior over the base universe
    eps_prior = sup_event_distance(push_prior(perturbed, tau, base), base.prior)

    # condition 2: mass of profiles whose every component is state-sure
    sure: dict[str, set] = {}
    for k, i in enumerate(players):
        good = set(base_supp.states[i])
        bad_mass: dict[Label, Rat] = {}
        tot_mass: dict[Label, Rat] = {}
        for (t, th), mass in perturbed.prior.items():
            tot_mass[t[k]] = tot_mass.get(t[k], ZERO) + mass
            if th[k] not in good:
                bad_mass[t[k]] = bad_mass.get(t[k], ZERO) + mass
        sure[i] = {
            t_i for t_i, m in tot_mass.items() if m > 0 and bad_mass.get(t_i, ZERO) == 0
        }
    sharp_mass = sum(
        (
            mass
            for (t, _th), mass in perturbed.prior.items()
            if all(t[k] in sure[i] for k, i in enumerate(players))
        ),
        ZERO,
    )
    eps_sharp = ONE - sharp_mass

    # (def 3:2): per-type belief distances through the type map
    base_states = {i: set(base.states[i]) for i in players}
    belief_cache = {i: {} for i in players}
    deltas: dict[str, dict[Label, Rat]] = {i: {} for i in players}
    type_mass: dict[str, dict[Label, Rat]] = {i: {} for i in players}
    for k, i in enumerate(players):
        marg = perturbed.type_marginal(i)
        for t_bar, m in marg.items():
            if m == 0:
                continue
            type_mass[i][t_bar] = m
            target = tau.apply(i, t_bar)
            if target not in belief_cache[i]:
                belief_cache[i][target] = base.belief(i, target)
            pushed: dict = {}
            for (t_rest, th), p in perturbed.belief(i, t_bar).items():
                if any(
                    th[m2] not in base_states[j]
                    for m2, j in enumerate(players)
                ):
                    continue  # outside the base universe, not part of any event
                mapped = tuple(
                    tau.apply(j, t_rest[m2 if m2 < k else m2 - 1])
                    for m2, j in enumerate(players)
                    if j != i
                )
                key = (mapped, th)
                pushed[key] = pushed.get(key, ZERO) + p
            deltas[i][t_bar] = sup_event_distance(pushed, belief_cache[i][target])

    def excluded_mass(i: str, c: Rat) -> Rat:
        return sum(
            (type_mass[i][t] for t, d in deltas[i].items() if d > c),
            ZERO,
        )

    candidates = {eps_prior, eps_sharp}
    for i in players:
        candidates.update(deltas[i].values())
        thresholds = sorted(set(deltas[i].values()))
        for c in thresholds:
            candidates.add(excluded_mass(i, c))
        candidates.add(excluded_mass(i, rat(-1)))
    feasible = [
        c
        for c in sorted(candidates)
        if c >= eps_prior
        and c >= eps_sharp
        and all(excluded_mass(i, c) <= c for i in players)
    ]
    assert feasible, "epsilon scan must terminate: 1 is always feasible"
    eps = feasible[0]
    flats = {
        i: tuple(t for t in deltas[i] if deltas[i][t] <= eps) for i in players
    }
    cert = EpsilonCertificate(
        eps_prior, sharp_mass, deltas, flats, tuple(sorted(candidates))
    )
    return eps, cert


def make_witness(
    base: Game,
    perturbed: Game,
    tau: TypeMap,
    phi: StateMap | None = None,
    family: str = "",
    params: dict | None = None,
) -> ElaborationWitness:
    eps, cert = epsilon_of(base, perturbed, tau, phi)
    return ElaborationWitness(
        base, perturbed, tau, phi, eps, cert.flats, cert.sharp_mass,
        certificate=cert, family=family, params=params or {},
    )


# ----------------------------------------------------------------------
# the coordination example and its email-game perturbation


def motivating_example() -> Game:
    """Two players, two actions, two equally likely states, singleton types.

    Players want to match in the first state and mismatch in the second;
    all payoffs are common, so the payoff function is its own potential.
    """
    al, be = "alpha", "beta"
    common = {
        ("theta1", (al, al)): 1, ("theta1", (al, be)): 0,
        ("theta1", (be, al)): 0, ("theta1", (be, be)): 1,
        ("theta2", (al, al)): 0, ("theta2", (al, be)): 1,
        ("theta2", (be, al)): 1, ("theta2", (be, be)): 0,
    }
    payoffs = {
        i: {(a, th): v for (th, a), v in common.items()}
        for i in ("1", "2")
    }
    return Game.create(
        players=("1", "2"),
        actions={"1": (al, be), "2": (al, be)},
        types={"1": ("t",), "2": ("t",)},
        states={"1": ("theta1", "theta2"), "2": ("theta1", "theta2")},
        prior={
            (("t", "t"), ("theta1", "theta1")): rat(1, 2),
            (("t", "t"), ("theta2", "theta2")): rat(1, 2),
        },
        payoffs=payoffs,
    )


def _email_state(n: int) -> str:
    if n == 0:
        return "theta0"
    return "theta1" if n % 2 == 1 else "theta2"


def _email_type(player: int, n: int) -> int:
    # player 1 observes cells {0},{1,2},{3,4},...; player 2 {0,1},{2,3},...
    if player == 1:
        return n if n % 2 == 0 else n + 1
    return n if n % 2 == 1 else n + 1


def email_game_family(eps, depth: int) -> ElaborationWitness:
    """Truncated email-game perturbation of the coordination example.

    A geometric count with success probability ``eps`` drives the state
    (a dominance state at zero, then alternating coordination states), and
    players observe staggered two-cell partitions of the count.  Counts at
    ``depth`` and beyond are absorbed into the deepest atom; the certified
    epsilon accounts for the resulting distortion exactly.
    """
    eps = rat(eps)
    if not (0 < eps < 1):
        raise GameError("family parameter must lie strictly between 0 and 1")
    if depth < 2:
        raise GameError("depth must be at least 2")
    base = motivating_example()
    al, be = "alpha", "beta"
    q = ONE - eps

    masses = {}
    acc = ONE
    for n in range(depth):
        masses[n] = eps * acc
        acc *= q
    masses[depth] = acc  # absorbed tail

    t1_types = sorted({_email_type(1, n) for n in masses})
    t2_types = sorted({_email_type(2, n) for n in masses})
    states = ("theta1", "theta2", "theta0")
    prior = {}
    for n, m in masses.items():
        th = _email_state(n)
        prior[((_email_type(1, n), _email_type(2, n)), (th, th))] = m

    theta0 = {
        (al, al): (1, 0), (al, be): (1, 1), (be, al): (0, 1), (be, be): (0, 0),
    }
    payoffs = {}
    for idx, i in enumerate(("1", "2")):
        table = dict(base.payoffs[i])
        for a, vals in theta0.items():
            table[(a, "theta0")] = rat(vals[idx])
        payoffs[i] = table

    perturbed = Game.create(
        players=("1", "2"),
        actions={"1": (al, be), "2": (al, be)},
        types={"1": tuple(t1_types), "2": tuple(t2_types)},
        states={"1": states, "2": states},
        prior=prior,
        payoffs=payoffs,
    )
    tau = TypeMap({"1": {t: "t" for t in t1_types}, "2": {t: "t" for t in t2_types}})
    return make_witness(
        base, perturbed, tau, None,
        family="email", params={"eps": eps, "depth": depth},
    )


# ----------------------------------------------------------------------
# the discretized global game


def global_game(r, p, depth: int) -> Game:
    """Binary-action coordination with geometrically decaying returns.

    State n (geometric with parameter ``p``, truncated at ``depth`` with the
    tail absorbed) pays r^(n+1) for joint investment, r^(n+1)-1 for lone
    investment, and 0 for staying out; players observe the email-game
    partitions of n.  Supermodular for every parameter choice.
    """
    r, p = rat(r), rat(p)
    if not (0 < r < 1 and 0 < p < 1):
        raise GameError("require 0 < r < 1 and 0 < p < 1")
    if depth < 2:
        raise GameError("depth must be at least 2")
    q = ONE - p
    masses = {}
    acc = ONE
    for n in range(depth):
        masses[n] = p * acc
        acc *= q
    masses[depth] = acc

    t1_types = sorted({_email_type(1, n) for n in masses})
    t2_types = sorted({_email_type(2, n) for n in masses})
    states = tuple(range(depth + 1))
    prior = {
        ((_email_type(1, n), _email_type(2, n)), (n, n)): m for n, m in masses.items()
    }
    rpow = {n: r ** (n + 1) for n in states}
    payoffs = {}
    for k, i in enumerate(("1", "2")):
        table = {}
        for n in states:
            for a1 in ("0", "1"):
                for a2 in ("0", "1"):
                    own = (a1, a2)[k]
                    other = (a1, a2)[1 - k]
                    if own == "0":
                        u = ZERO
                    elif other == "1":
                        u = rpow[n]
                    else:
                        u = rpow[n] - 1
                    table[((a1, a2), n)] = u
        payoffs[i] = table
    return Game.create(
        players=("1", "2"),
        actions={"1": ("0", "1"), "2": ("0", "1")},
        types={"1": tuple(t1_types), "2": tuple(t2_types)},
        states={"1": states, "2": states},
        prior=prior,
        payoffs=payoffs,
    )


def global_game_tau_star(r, p) -> int:
    """Smallest integer threshold at which investment stops being justified.

    Scans tau = 2, 3, ... for r^tau < (1-p)/(1+r(1-p)), rejecting knife-edge
    parameter choices where some tau hits the bound with equality.
    """
    r, p = rat(r), rat(p)
    bound = (ONE - p) / (ONE + r * (ONE - p))
    tau = 2
    while True:
        power = r**tau
        if power == bound:
            raise GameError("knife-edge parameters: threshold condition holds with equality")
        if power < bound:
            return tau
        tau += 1


def threshold_strategy(g: Game, tau) -> dict[str, dict[Label, Label]]:
    """Pure profile: types below the threshold invest, the rest stay out."""
    out = {}
    for i in g.players:
        out[i] = {t: ("1" if t <= tau - 1 else "0") for t in g.types[i]}
    return out


def global_game_expected_potential(r, p, depth: int, strategy) -> Rat:
    """Exact expected potential of a pure profile, straight from the sums.

    Uses the diagonal potential (joint investment worth r^(n+1), joint
    abstention worth 1 - r^(n+1)) and the truncated geometric weights; the
    profile is given per type label.
    """
    r, p = rat(r), rat(p)
    q = ONE - p
    total = ZERO
    acc = ONE
    for n in range(depth + 1):
        mass = acc if n == depth else p * acc
        x1 = rat(1) if strategy["1"][_email_type(1, n)] == "1" else ZERO
        x2 = rat(1) if strategy["2"][_email_type(2, n)] == "1" else ZERO
        rp = r ** (n + 1)
        total += mass * (rp * x1 * x2 + (ONE - rp) * (ONE - x1) * (ONE - x2))
        acc *= q
    return total


def global_game_potential_table(g: Game, r) -> "PotentialFunction":
    """The exact potential of the global game over all product states.

    Built in the zero-at-joint-abstention normalization, together with its
    opponent-term witnesses, and certified by substitution.
    """
    from .potentials import PotentialFunction, support_state_profiles, _collapse_map, verify_potential

    r = rat(r)
    v = {}
    q = {"1": {}, "2": {}}
    for th in support_state_profiles(g):
        n, m = th
        rn = r ** (n + 1)
        rm = r ** (m + 1)
        v[(("0", "0"), th)] = ZERO
        v[(("1", "0"), th)] = rn - 1
        v[(("0", "1"), th)] = rm - 1
        v[(("1", "1"), th)] = rm - 1 + rn
        for a in (("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")):
            q["1"][(a, th)] = ZERO if a[1] == "0" else ONE - rm
            q["2"][(a, th)] = ZERO if a[0] == "0" else ONE - rn
    pf = PotentialFunction(v, q, _collapse_map(g))
    ok, residuals = verify_potential(g, pf)
    assert ok, f"global-game potential table failed certification: {residuals[:3]}"
    return pf


# ----------------------------------------------------------------------
# randomized perturbations


def _random_rational_dist(rng: random.Random, keys, max_weight: int = 4) -> dict:
    weights = {k: rng.randint(1, max_weight) for k in keys}
    total = sum(weights.values())
    return {k: rat(w, total) for k, w in weights.items()}


def random_epsilon_elaboration(base: Game, eps, seed: int) -> ElaborationWitness:
    """Seeded generator of certified approximate elaborations.

    Duplicates types through a correlating device drawn independently of
    (types, state) (hence belief-invariant), then, for positive ``eps``,
    splices in a disjoint block of fresh types living on fresh dominance
    states with total mass ``eps``.  The block is disjoint from the standard
    part, so standard beliefs are untouched and the certified epsilon equals
    ``eps`` exactly (zero for pure duplication).
    """
    from .game import SupportSets

    eps = rat(eps)
    if not (0 <= eps < 1):
        raise GameError("eps must lie in [0, 1)")
    rng = random.Random(seed)
    players = base.players
    supp = SupportSets.of(base)

    messages = {i: tuple(f"m{k}" for k in range(rng.randint(1, 2))) for i in players}
    profiles = [tuple(p) for p in itertools.product(*(messages[i] for i in players))]
    joint = _random_rational_dist(rng, profiles)
    device = CommunicationRule(messages, {key: dict(joint) for key in base.prior})
    conj, tau = conjunction(base, device)

    if eps == 0:
        return make_witness(base, conj, tau, None, family="random",
                            params={"eps": eps, "seed": seed})

    crazy_type = {i: ("crazy", i) for i in players}
    fresh_state = {i: ("offstate", i) for i in players}
    types = {i: conj.types[i] + (crazy_type[i],) for i in players}
    states = {i: conj.states[i] + (fresh_state[i],) for i in players}
    prior = {key: mass * (ONE - eps) for key, mass in conj.prior.items()}
    crazy_profile = (
        tuple(crazy_type[i] for i in players),
        tuple(fresh_state[i] for i in players),
    )
    prior[crazy_profile] = eps
    payoffs = {}
    for k, i in enumerate(players):
        dominant = rng.choice(base.actions[i])
        table = dict(conj.payoffs[i])
        for a in base.action_profiles():
            table[(a, fresh_state[i])] = ONE if a[k] == dominant else ZERO
        payoffs[i] = table
    perturbed = Game.create(players, base.actions, types, states, prior, payoffs)
    tau_maps = {i: dict(tau.maps[i]) for i in players}
    for i in players:
        tau_maps[i][crazy_type[i]] = rng.choice(supp.types[i])
    tau2 = TypeMap(tau_maps)
    phi = StateMap(
        {i: {fresh_state[i]: rng.choice(supp.states[i])} for i in players}
    )
    witness = make_witness(base, perturbed, tau2, phi, family="random",
                           params={"eps": eps, "seed": seed})
    assert witness.epsilon <= eps, "generator produced a looser witness than promised"
    return witness
