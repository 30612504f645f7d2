"""Document formats: JSON serialization for games, rules, coverings,
potentials, type/state maps, witnesses, and sweep reports.

Rationals serialize as "p/q" strings (decimal strings are accepted on
input and parsed exactly).  Labels may be strings, ints, or tuples; tuples
render as JSON arrays and come back as tuples, so a round trip reproduces
the in-memory value exactly.
"""

from __future__ import annotations

import json
import os
from typing import Any

from .elaborations import ElaborationWitness, EpsilonCertificate
from .game import Game
from .potentials import Covering, GeneralizedPotential, PotentialFunction
from .rational import rat, rat_str
from .rules import DistributionalRule, StateMap, TypeMap


class DocumentError(ValueError):
    pass


def _enc(label) -> Any:
    if isinstance(label, tuple):
        return [_enc(x) for x in label]
    return label


def _dec(value) -> Any:
    if isinstance(value, list):
        return tuple(_dec(x) for x in value)
    return value


def _field(doc: dict, key: str, where: str):
    if key not in doc:
        raise DocumentError(f"{where}: missing field {key!r}")
    return doc[key]


# ----------------------------------------------------------------------
# games


def game_to_doc(g: Game) -> dict:
    return {
        "players": list(g.players),
        "actions": {i: [_enc(a) for a in g.actions[i]] for i in g.players},
        "types": {i: [_enc(t) for t in g.types[i]] for i in g.players},
        "payoff_states": {i: [_enc(s) for s in g.states[i]] for i in g.players},
        "prior": [
            {
                "types": [_enc(x) for x in t],
                "states": [_enc(x) for x in th],
                "prob": rat_str(mass),
            }
            for (t, th), mass in g.prior.items()
        ],
        "payoffs": {
            i: [
                {
                    "action_profile": [_enc(x) for x in a],
                    "own_state": _enc(own),
                    "value": rat_str(v),
                }
                for (a, own), v in g.payoffs[i].items()
            ]
            for i in g.players
        },
    }


def game_from_doc(doc: dict) -> Game:
    players = [str(p) for p in _field(doc, "players", "game")]
    actions = {i: tuple(_dec(a) for a in _field(doc, "actions", "game")[i]) for i in players}
    types = {i: tuple(_dec(t) for t in _field(doc, "types", "game")[i]) for i in players}
    states = {
        i: tuple(_dec(s) for s in _field(doc, "payoff_states", "game")[i]) for i in players
    }
    prior = {}
    for n, entry in enumerate(_field(doc, "prior", "game")):
        t = tuple(_dec(x) for x in _field(entry, "types", f"prior[{n}]"))
        th = tuple(_dec(x) for x in _field(entry, "states", f"prior[{n}]"))
        prior[(t, th)] = rat(_field(entry, "prob", f"prior[{n}]"))
    payoffs = {}
    for i in players:
        table = {}
        for n, entry in enumerate(_field(doc, "payoffs", "game")[i]):
            a = tuple(_dec(x) for x in _field(entry, "action_profile", f"payoffs[{i}][{n}]"))
            own = _dec(_field(entry, "own_state", f"payoffs[{i}][{n}]"))
            table[(a, own)] = rat(_field(entry, "value", f"payoffs[{i}][{n}]"))
        payoffs[i] = table
    return Game.create(players, actions, types, states, prior, payoffs)


# ----------------------------------------------------------------------
# rules, maps, coverings, potentials


def rule_to_doc(rule: DistributionalRule) -> dict:
    return {
        "entries": [
            {
                "actions": [_enc(x) for x in a],
                "types": [_enc(x) for x in t],
                "states": [_enc(x) for x in th],
                "prob": rat_str(mass),
            }
            for (a, t, th), mass in rule.z.items()
        ]
    }


def rule_from_doc(doc: dict, game: Game, check: bool = True) -> DistributionalRule:
    z = {}
    for n, entry in enumerate(_field(doc, "entries", "rule")):
        a = tuple(_dec(x) for x in _field(entry, "actions", f"entries[{n}]"))
        t = tuple(_dec(x) for x in _field(entry, "types", f"entries[{n}]"))
        th = tuple(_dec(x) for x in _field(entry, "states", f"entries[{n}]"))
        z[(a, t, th)] = rat(_field(entry, "prob", f"entries[{n}]"))
    return DistributionalRule.create(game, z, check=check)


def type_map_to_doc(tau: TypeMap) -> dict:
    return {
        "maps": {
            i: [[_enc(src), _enc(dst)] for src, dst in table.items()]
            for i, table in tau.maps.items()
        }
    }


def type_map_from_doc(doc: dict) -> TypeMap:
    maps = {}
    for i, pairs in _field(doc, "maps", "type map").items():
        maps[i] = {_dec(src): _dec(dst) for src, dst in pairs}
    return TypeMap(maps)


def state_map_to_doc(phi: StateMap) -> dict:
    return {
        "maps": {
            i: [[_enc(src), _enc(dst)] for src, dst in table.items()]
            for i, table in phi.maps.items()
        }
    }


def state_map_from_doc(doc: dict) -> StateMap:
    maps = {}
    for i, pairs in _field(doc, "maps", "state map").items():
        maps[i] = {_dec(src): _dec(dst) for src, dst in pairs}
    return StateMap(maps)


def covering_to_doc(covering: Covering) -> dict:
    return {
        "subsets": {
            i: [[_enc(a) for a in X] for X in family]
            for i, family in covering.subsets.items()
        }
    }


def covering_from_doc(doc: dict, g: Game) -> Covering:
    raw = _field(doc, "subsets", "covering")
    return Covering.create(
        g, {i: tuple(tuple(_dec(a) for a in X) for X in raw[i]) for i in g.players}
    )


def gp_to_doc(gp: GeneralizedPotential) -> dict:
    return {
        "covering": covering_to_doc(gp.covering),
        "values": [
            {
                "subsets": [[_enc(a) for a in X_i] for X_i in X],
                "states": [_enc(s) for s in th],
                "value": rat_str(v),
            }
            for (X, th), v in gp.table.items()
        ],
    }


def gp_from_doc(doc: dict, g: Game) -> GeneralizedPotential:
    covering = covering_from_doc(_field(doc, "covering", "generalized potential"), g)
    table = {}
    for n, entry in enumerate(_field(doc, "values", "generalized potential")):
        X = tuple(
            tuple(_dec(a) for a in X_i)
            for X_i in _field(entry, "subsets", f"values[{n}]")
        )
        th = tuple(_dec(s) for s in _field(entry, "states", f"values[{n}]"))
        table[(X, th)] = rat(_field(entry, "value", f"values[{n}]"))
    return GeneralizedPotential.from_table(g, covering, table)


def potential_to_doc(pf: PotentialFunction) -> dict:
    return {
        "v": [
            {
                "action_profile": [_enc(x) for x in a],
                "states": [_enc(x) for x in th],
                "value": rat_str(v),
            }
            for (a, th), v in pf.v.items()
        ],
        "q": {
            i: [
                {
                    "action_profile": [_enc(x) for x in a],
                    "states": [_enc(x) for x in th],
                    "value": rat_str(v),
                }
                for (a, th), v in table.items()
            ]
            for i, table in pf.q.items()
        },
    }


def potential_from_doc(doc: dict, g: Game) -> PotentialFunction:
    from .potentials import _collapse_map

    v = {}
    for entry in _field(doc, "v", "potential"):
        a = tuple(_dec(x) for x in entry["action_profile"])
        th = tuple(_dec(x) for x in entry["states"])
        v[(a, th)] = rat(entry["value"])
    q = {}
    for i, rows in _field(doc, "q", "potential").items():
        table = {}
        for entry in rows:
            a = tuple(_dec(x) for x in entry["action_profile"])
            th = tuple(_dec(x) for x in entry["states"])
            table[(a, th)] = rat(entry["value"])
        q[i] = table
    return PotentialFunction(v, q, _collapse_map(g))


# ----------------------------------------------------------------------
# witness bundles (directories)


def witness_to_dir(witness: ElaborationWitness, path: str) -> None:
    os.makedirs(path, exist_ok=True)
    write_json(os.path.join(path, "base.json"), game_to_doc(witness.base))
    write_json(os.path.join(path, "perturbed.json"), game_to_doc(witness.perturbed))
    write_json(os.path.join(path, "tau.json"), type_map_to_doc(witness.tau))
    if witness.phi is not None:
        write_json(os.path.join(path, "phi.json"), state_map_to_doc(witness.phi))
    cert = witness.certificate
    doc = {
        "epsilon": rat_str(witness.epsilon),
        "sharp_mass": rat_str(witness.sharp_mass),
        "flats": {i: [_enc(t) for t in ts] for i, ts in witness.flats.items()},
        "family": witness.family,
        "params": {k: rat_str(v) if not isinstance(v, int) else v
                   for k, v in witness.params.items()},
    }
    if cert is not None:
        doc["prior_distance"] = rat_str(cert.prior_distance)
        doc["belief_distances"] = {
            i: [[_enc(t), rat_str(d)] for t, d in table.items()]
            for i, table in cert.belief_distances.items()
        }
    write_json(os.path.join(path, "certificate.json"), doc)


def witness_from_dir(path: str) -> ElaborationWitness:
    base = game_from_doc(read_json(os.path.join(path, "base.json")))
    perturbed = game_from_doc(read_json(os.path.join(path, "perturbed.json")))
    tau = type_map_from_doc(read_json(os.path.join(path, "tau.json")))
    phi_path = os.path.join(path, "phi.json")
    phi = state_map_from_doc(read_json(phi_path)) if os.path.exists(phi_path) else None
    cert_doc = read_json(os.path.join(path, "certificate.json"))
    from .elaborations import make_witness

    witness = make_witness(base, perturbed, tau, phi,
                           family=cert_doc.get("family", ""), params={})
    recorded = rat(_field(cert_doc, "epsilon", "certificate"))
    if witness.epsilon != recorded:
        raise DocumentError(
            f"stored epsilon {rat_str(recorded)} does not recertify "
            f"(recomputed {rat_str(witness.epsilon)})"
        )
    return witness


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
