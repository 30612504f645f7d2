"""Command-line front end.

Every subcommand reads and writes the JSON document formats; rationals are
printed as "p/q", never as decimals.  Exit codes: 0 on success, 2 on
validation or input problems, 3 on a failed self-checking reproduction.
"""

from __future__ import annotations

import sys

import click

from . import docio
from .elaborations import (
    email_game_family,
    global_game,
    random_epsilon_elaboration,
)
from .equilibria import bce_constraints, bibce_constraints, iterated_strict_dominance
from .game import GameError, minimum_representation, validate_game
from .hierarchy import non_redundant_representation
from .harness import (
    reproduce_global_game_example,
    reproduce_motivating_example,
    robustness_sweep,
    target_gp_face,
    target_potential_face,
)
from .lp import solve
from .potentials import (
    Certified,
    find_monotone_potential,
    find_potential,
    gp_maximizing_bibce,
    maximize_potential_bibce,
    verify_generalized_potential,
)
from .rational import rat, rat_str


def _load_game(path: str):
    try:
        return docio.game_from_doc(docio.read_json(path))
    except (docio.DocumentError, GameError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


def _emit(doc: dict, out: str | None) -> None:
    if out:
        docio.write_json(out, doc)
    else:
        import json

        click.echo(json.dumps(doc, indent=1))


@click.group()
def main() -> None:
    """Exact solvers for belief-invariant Bayes correlated equilibria."""


@main.command()
@click.argument("game", type=click.Path(exists=True))
def validate(game: str) -> None:
    """Report every invariant violation of a game document."""
    g = _load_game(game)
    report = validate_game(g)
    if report.ok:
        supp = report.support
        for i in g.players:
            click.echo(
                f"player {i}: |T*|={len(supp.types[i])} |Theta*|={len(supp.states[i])}"
            )
        click.echo("valid")
    else:
        for v in report.violations:
            click.echo(f"violation: {v}")
        sys.exit(2)


@main.command()
@click.argument("game", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path())
def minrep(game: str, out: str | None) -> None:
    """Restrict a game to its prior support."""
    g = _load_game(game)
    _emit(docio.game_to_doc(minimum_representation(g)), out)


@main.command()
@click.argument("game", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path())
def nonredundant(game: str, out: str | None) -> None:
    """Quotient a game by equal belief hierarchies."""
    g = minimum_representation(_load_game(game))
    quotient, qmap = non_redundant_representation(g)
    doc = docio.game_to_doc(quotient)
    doc["quotient_map"] = docio.type_map_to_doc(qmap.as_type_map())["maps"]
    _emit(doc, out)


@main.command("solve")
@click.argument("kind", type=click.Choice(["bibce", "bce"]))
@click.argument("game", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path())
@click.option("--presolve/--no-presolve", default=False,
              help="restrict to actions surviving iterated dominance first")
def solve_cmd(kind: str, game: str, out: str | None, presolve: bool) -> None:
    """Compute one exact equilibrium of the requested kind."""
    g = minimum_representation(_load_game(game))
    survivors = iterated_strict_dominance(g) if presolve else None
    poly = bibce_constraints(g, survivors=survivors) if kind == "bibce" else bce_constraints(
        g, survivors=survivors
    )
    outcome = solve(poly.lp)
    if outcome.status != "optimal":
        click.echo(f"error: equilibrium polytope is {outcome.status}", err=True)
        sys.exit(3)
    _emit(docio.rule_to_doc(poly.decode(outcome.point)), out)


@main.group()
def potential() -> None:
    """Exact potential detection and maximization."""


@potential.command("find")
@click.argument("game", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path())
def potential_find(game: str, out: str | None) -> None:
    g = minimum_representation(_load_game(game))
    res = find_potential(g)
    if not res.feasible:
        click.echo("INFEASIBLE")
        click.echo(f"state: {res.failing_state!r}")
        click.echo(f"certificate: {[rat_str(c) for c in res.certificate]}")
        return
    _emit(docio.potential_to_doc(res.potential), out)


@potential.command("maximize")
@click.argument("game", type=click.Path(exists=True))
@click.option("--potential", "potential_file", type=click.Path(exists=True),
              help="use this potential document instead of detecting one")
@click.option("-o", "--out", type=click.Path())
def potential_maximize(game: str, potential_file: str | None, out: str | None) -> None:
    g = minimum_representation(_load_game(game))
    if potential_file:
        pf = docio.potential_from_doc(docio.read_json(potential_file), g)
    else:
        res = find_potential(g)
        if not res.feasible:
            click.echo("error: game has no exact potential", err=True)
            sys.exit(2)
        pf = res.potential
    rule, value = maximize_potential_bibce(g, pf)
    click.echo(f"value: {rat_str(value)}")
    _emit(docio.rule_to_doc(rule), out)


@main.group()
def gp() -> None:
    """Generalized potential certification and maximization."""


@gp.command("verify")
@click.argument("game", type=click.Path(exists=True))
@click.argument("gpdoc", type=click.Path(exists=True))
def gp_verify(game: str, gpdoc: str) -> None:
    g = minimum_representation(_load_game(game))
    gpf = docio.gp_from_doc(docio.read_json(gpdoc), g)
    outcome = verify_generalized_potential(g, gpf)
    if isinstance(outcome, Certified):
        click.echo(f"CERTIFIED ({outcome.checked_grid} deviation maps checked)")
    else:
        click.echo(f"COUNTEREXAMPLE player={outcome.player} subset={outcome.subset!r}")
        click.echo(f"deviation: {outcome.deviation!r}")
        click.echo(f"slack: {rat_str(outcome.slack)}")
        for atom, p in outcome.belief.items():
            click.echo(f"  P{atom!r} = {rat_str(p)}")


@gp.command("maximize")
@click.argument("game", type=click.Path(exists=True))
@click.argument("gpdoc", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path())
def gp_maximize(game: str, gpdoc: str, out: str | None) -> None:
    g = minimum_representation(_load_game(game))
    gpf = docio.gp_from_doc(docio.read_json(gpdoc), g)
    _a_rule, rule, value = gp_maximizing_bibce(g, gpf)
    click.echo(f"value: {rat_str(value)}")
    _emit(docio.rule_to_doc(rule), out)


@main.command("monotone-potential")
@click.argument("game", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path())
def monotone_potential_cmd(game: str, out: str | None) -> None:
    """Search for a monotone potential certifying the all-top profile."""
    g = minimum_representation(_load_game(game))
    mp = find_monotone_potential(g)
    if mp is None:
        click.echo("INFEASIBLE")
        return
    click.echo("weights: " + ", ".join(f"{i}={rat_str(w)}" for i, w in mp.weights.items()))
    doc = {
        "v": [
            {
                "action_profile": [a_ for a_ in a],
                "states": list(th),
                "value": rat_str(v),
            }
            for (a, th), v in mp.v.items()
        ],
        "weights": {i: rat_str(w) for i, w in mp.weights.items()},
    }
    _emit(doc, out)


@main.command()
@click.argument("game", type=click.Path(exists=True))
def dominance(game: str) -> None:
    """Iterated interim strict dominance survivors, per player and type."""
    g = minimum_representation(_load_game(game))
    survivors = iterated_strict_dominance(g)
    for i in g.players:
        for t_i, actions in survivors[i].items():
            click.echo(f"player {i} type {t_i!r}: {list(actions)!r}")


@main.group()
def elaborate() -> None:
    """Build perturbation-family members."""


@elaborate.command("email")
@click.option("--eps", required=True, help="family parameter, e.g. 1/10")
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("-o", "--out", type=click.Path(), required=True,
              help="directory for the witness bundle")
def elaborate_email(eps: str, depth: int, out: str) -> None:
    witness = email_game_family(rat(eps), depth)
    docio.witness_to_dir(witness, out)
    click.echo(f"certified epsilon: {rat_str(witness.epsilon)}")


@elaborate.command("global")
@click.option("--r", "r_", required=True, help="discount-like return parameter")
@click.option("--p", "p_", required=True, help="geometric state parameter")
@click.option("--depth", type=int, default=60, show_default=True)
@click.option("-o", "--out", type=click.Path())
def elaborate_global(r_: str, p_: str, depth: int, out: str | None) -> None:
    _emit(docio.game_to_doc(global_game(rat(r_), rat(p_), depth)), out)


@elaborate.command("random")
@click.argument("base", type=click.Path(exists=True))
@click.option("--eps", required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(), required=True)
def elaborate_random(base: str, eps: str, seed: int, out: str) -> None:
    g = minimum_representation(_load_game(base))
    witness = random_epsilon_elaboration(g, rat(eps), seed)
    docio.witness_to_dir(witness, out)
    click.echo(f"certified epsilon: {rat_str(witness.epsilon)}")


@main.command("epsilon-of")
@click.argument("base", type=click.Path(exists=True))
@click.argument("perturbed", type=click.Path(exists=True))
@click.argument("tau", type=click.Path(exists=True))
@click.option("--phi", "phi_file", type=click.Path(exists=True))
def epsilon_of_cmd(base: str, perturbed: str, tau: str, phi_file: str | None) -> None:
    """Smallest certified epsilon for a (base, perturbed, tau) triple."""
    from .elaborations import epsilon_of

    b = _load_game(base)
    pert = _load_game(perturbed)
    tmap = docio.type_map_from_doc(docio.read_json(tau))
    phi = docio.state_map_from_doc(docio.read_json(phi_file)) if phi_file else None
    try:
        eps, cert = epsilon_of(b, pert, tmap, phi)
    except GameError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"epsilon: {rat_str(eps)}")
    click.echo(f"prior distance: {rat_str(cert.prior_distance)}")
    click.echo(f"sharp mass: {rat_str(cert.sharp_mass)}")


@main.command()
@click.argument("base", type=click.Path(exists=True))
@click.option("--gpdoc", type=click.Path(exists=True),
              help="target the face of this generalized potential")
@click.option("--potential", "potential_file", type=click.Path(exists=True),
              help="target the face of this potential (detected when omitted)")
@click.option("--family", type=click.Choice(["email", "random"]), required=True)
@click.option("--eps", "eps_list", multiple=True, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--depth", type=int, default=None, help="email-family truncation depth")
@click.option("-o", "--out", type=click.Path(), help="write the CSV report here")
def sweep(base, gpdoc, potential_file, family, eps_list, seed, depth, out) -> None:
    """Distance from family members' equilibria to a target set, per epsilon."""
    from .harness import _email_depth

    g = minimum_representation(_load_game(base))
    if gpdoc:
        target = target_gp_face(g, docio.gp_from_doc(docio.read_json(gpdoc), g))
    else:
        if potential_file:
            pf = docio.potential_from_doc(docio.read_json(potential_file), g)
        else:
            res = find_potential(g)
            if not res.feasible:
                click.echo("error: game has no exact potential; pass --gpdoc", err=True)
                sys.exit(2)
            pf = res.potential
        target = target_potential_face(g, pf)

    if family == "email":
        from .elaborations import motivating_example

        if g.digest() != minimum_representation(motivating_example()).digest():
            click.echo("error: the email family perturbs the coordination example only",
                       err=True)
            sys.exit(2)
        make = lambda e: email_game_family(e, depth if depth else _email_depth(e))
    else:
        make = lambda e: random_epsilon_elaboration(g, e, seed)

    report = robustness_sweep(g, target, make, [rat(e) for e in eps_list])
    csv = report.to_csv()
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(csv)
    click.echo(csv, nl=False)


@main.group()
def reproduce() -> None:
    """Self-checking reproductions of the two worked examples."""


@reproduce.command("motivating")
def reproduce_motivating() -> None:
    report = reproduce_motivating_example()
    click.echo(report.render())
    if not report.ok:
        sys.exit(3)


@reproduce.command("globalgame")
@click.option("--r", "r_", default="9/10", show_default=True)
@click.option("--p", "p_", default="1/10", show_default=True)
@click.option("--depth", type=int, default=60, show_default=True)
def reproduce_globalgame(r_: str, p_: str, depth: int) -> None:
    report = reproduce_global_game_example(rat(r_), rat(p_), depth)
    click.echo(report.render())
    if not report.ok:
        sys.exit(3)


if __name__ == "__main__":
    main()
