"""Command-line front end: one operation per invocation, files in between.

Reports print as text by default and as canonical JSON under --json;
commands whose result is itself a document (hsum, condexpect, oplus,
granger fit) print that document directly. Exit codes: 0 for a computed
report or verdict, 1 for any validation failure, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .errors import OmlprobError
from .io import (build_experiment, build_lattice, build_observable, build_smap,
                 build_timeseries, lattice_document, observable_document,
                 parse, render_json, resolve_lattice, serialize_document,
                 smap_document)
from .lattice import FiniteOml, MalformedInput, horizontal_sum, is_horizontal_sum
from .observables import (conditional_expectation, distribution, expectation,
                          oplus)
from .causality import (classical_granger_lag1, fit_smap_from_experiments,
                        granger_causes)
from .rationals import as_rational, format_rational
from .states import (check_smap_properties, classify_causality,
                     conditional_from_smap)


def _frac(v) -> str:
    return format_rational(v)


def _emit(args, lines, data) -> int:
    if args.json:
        sys.stdout.write(render_json(data))
    else:
        sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _smap_for(args):
    doc = parse(args.smap)
    lattice = resolve_lattice(doc, args.lattice)
    return lattice, build_smap(doc, lattice)


def _observable_for(args, lattice, path):
    return build_observable(parse(path), lattice)


def _block_line(lat: FiniteOml, pos: int) -> str:
    name = lat.block_names[pos] or f"block {pos}"
    members = ", ".join(e.name for e in lat.block_members(lat.blocks[pos]))
    return f"{name} ({len(lat.blocks[pos].members)} elements): {members}"


# -- lattice commands ------------------------------------------------------

def _cmd_validate(args) -> int:
    lat = build_lattice(parse(args.lattice_file))
    sizes = ", ".join(str(len(b.members)) for b in lat.blocks)
    check = is_horizontal_sum(lat)
    if check.is_sum:
        hs = "yes"
    elif check.witness is None:
        hs = "no (single block)"
    else:
        i, j, shared = check.witness
        hs = f"no (blocks {i} and {j} share {{{', '.join(shared)}}})"
    lines = [f"valid OML: {len(lat)} elements, {len(lat.blocks)} blocks "
             f"(sizes {sizes})",
             f"horizontal sum: {hs}"]
    data = {"command": "validate", "valid": True, "elements": len(lat),
            "blocks": [{"name": lat.block_names[i],
                        "size": len(b.members),
                        "members": [lat.elements[k].name
                                    for k in sorted(b.members)]}
                       for i, b in enumerate(lat.blocks)],
            "horizontal_sum": check.is_sum,
            "witness": check.witness}
    return _emit(args, lines, data)


def _cmd_blocks(args) -> int:
    lat = build_lattice(parse(args.lattice_file))
    lines = [_block_line(lat, i) for i in range(len(lat.blocks))]
    data = {"command": "blocks",
            "blocks": [{"name": lat.block_names[i],
                        "members": [lat.elements[k].name
                                    for k in sorted(b.members)]}
                       for i, b in enumerate(lat.blocks)]}
    return _emit(args, lines, data)


def _cmd_hsum(args) -> int:
    summands = [build_lattice(parse(path)) for path in args.lattice_files]
    names = None
    if all(len(s.blocks) == 1 and s.block_names[0] is not None
           for s in summands):
        names = [s.block_names[0] for s in summands]
    lat = horizontal_sum(summands, names=names)
    sys.stdout.write(serialize_document(lattice_document(lat)))
    return 0


# -- s-map commands --------------------------------------------------------

def _cmd_smap_validate(args) -> int:
    lattice, p = _smap_for(args)
    mu = p.mu()
    atoms = ", ".join(f"{a.name} = {_frac(mu(a))}" for a in lattice.atoms)
    lines = ["valid s-map", f"diagonal state on atoms: {atoms}"]
    data = {"command": "smap validate", "valid": True,
            "mu": {e.name: mu(e) for e in lattice.elements}}
    return _emit(args, lines, data)


def _cmd_smap_classify(args) -> int:
    _, p = _smap_for(args)
    rep = classify_causality(p)
    wording = {"symmetric": "symmetric",
               "causal": "causal, not strongly causal",
               "strongly_causal": "strongly causal"}
    lines = [wording[rep.classification]]
    if rep.causal_witnesses:
        lines.append(f"causal witnesses ({len(rep.causal_witnesses)}):")
        lines += [f"  p({a}, {b}) = {_frac(ab)} vs p({b}, {a}) = {_frac(ba)}"
                  for a, b, ab, ba in rep.causal_witnesses]
    if rep.dependence_witnesses:
        lines.append(f"one-way dependence ({len(rep.dependence_witnesses)}):")
        lines += [f"  {direction}, not conversely: {_frac(lhs)} vs "
                  f"{_frac(rhs)}"
                  for _, _, direction, lhs, rhs in rep.dependence_witnesses]
    if rep.jauch_piron_notes:
        pairs = ", ".join(f"({a}, {b})" for a, b in rep.jauch_piron_notes)
        lines.append(f"mass-1 pairs (symmetry forced): {pairs}")
    lines += [f"note: {a}" for a in rep.annotations]
    data = {"command": "smap classify", "classification": rep.classification,
            "causal_witnesses": rep.causal_witnesses,
            "dependence_witnesses": rep.dependence_witnesses,
            "jauch_piron_notes": rep.jauch_piron_notes,
            "annotations": rep.annotations}
    return _emit(args, lines, data)


def _cmd_smap_properties(args) -> int:
    _, p = _smap_for(args)
    rep = check_smap_properties(p)
    lines = []
    for c in rep.checks:
        status = "pass" if c.passed else "FAIL"
        suffix = f" ({c.detail})" if c.detail else ""
        lines.append(f"{c.name}: {status}{suffix}")
    lines.append(f"all passed: {'yes' if rep.all_passed else 'no'}")
    data = {"command": "smap properties", "all_passed": rep.all_passed,
            "checks": [{"name": c.name, "passed": c.passed,
                        "witness": c.witness, "detail": c.detail}
                       for c in rep.checks]}
    return _emit(args, lines, data)


def _cmd_cond(args) -> int:
    lattice, p = _smap_for(args)
    f = conditional_from_smap(p)
    mu = p.mu()
    fallback = [e.name for e in lattice.elements
                if e != lattice.bottom and mu(e) == 0]
    table = {}
    lines = []
    for b in lattice.elements:
        if b == lattice.bottom:
            continue
        row = {a.name: f(a, b) for a in lattice.elements}
        table[b.name] = row
        cells = ", ".join(f"{a.name} = {_frac(row[a.name])}"
                          for a in lattice.elements)
        tag = " [fallback]" if b.name in fallback else ""
        lines.append(f"f(. | {b.name}){tag}: {cells}")
    if fallback:
        lines.append(f"zero-mass conditioners filled by the canonical "
                     f"fallback: {', '.join(fallback)}")
    data = {"command": "cond", "conditioners": table,
            "fallback_conditioners": fallback}
    return _emit(args, lines, data)


# -- observable commands ---------------------------------------------------

def _cmd_expect(args) -> int:
    lattice, p = _smap_for(args)
    x = _observable_for(args, lattice, args.obs)
    value = expectation(p, x)
    dist = distribution(p.mu(), x)
    lines = [f"E = {_frac(value)}",
             "distribution: " + ", ".join(
                 f"{_frac(v)} -> {_frac(w)}" for v, w in sorted(dist.items()))]
    data = {"command": "expect", "expectation": value,
            "distribution": {_frac(v): w for v, w in dist.items()}}
    return _emit(args, lines, data)


def _cmd_condexpect(args) -> int:
    lattice, p = _smap_for(args)
    x = _observable_for(args, lattice, args.obs)
    y = _observable_for(args, lattice, args.onto)
    z = conditional_expectation(p, x, y.range_algebra())
    sys.stdout.write(serialize_document(observable_document(z)))
    return 0


def _cmd_oplus(args) -> int:
    lattice, p = _smap_for(args)
    x = _observable_for(args, lattice, args.obs)
    y = _observable_for(args, lattice, getattr(args, "with"))
    z = oplus(p, x, y)
    sys.stdout.write(serialize_document(observable_document(z)))
    return 0


def _cmd_obs_validate(args) -> int:
    doc = parse(args.obs)
    lattice = resolve_lattice(doc, args.lattice)
    x = build_observable(doc, lattice)
    spectrum = ", ".join(_frac(v) for v in x.spectrum())
    atoms = ", ".join(e.name for e in x.range_algebra().atom_elements())
    lines = ["valid observable", f"spectrum: {spectrum}",
             f"range atoms: {atoms}"]
    data = {"command": "obs validate", "valid": True,
            "spectrum": list(x.spectrum()),
            "support": {_frac(v): e.name for v, e in x.support},
            "range_atoms": [e.name for e in x.range_algebra().atom_elements()]}
    return _emit(args, lines, data)


# -- causality commands ----------------------------------------------------

def _cmd_granger_test(args) -> int:
    _, p = _smap_for(args)
    verdict = granger_causes(p, effect=args.effect, cause=args.cause)
    lines = [f"causes: {'yes' if verdict.causes else 'no'}",
             f"direction: {verdict.direction[0]} -> {verdict.direction[1]}"]
    if verdict.witnesses:
        lines.append(f"witnesses ({len(verdict.witnesses)}):")
        lines += [f"  f({a} | {b}) = {_frac(c)} vs mu({a}) = {_frac(u)}"
                  for a, b, c, u in verdict.witnesses]
    lines += [f"note: {a}" for a in verdict.annotations]
    data = {"command": "granger test", "causes": verdict.causes,
            "direction": {"cause": verdict.direction[0],
                          "effect": verdict.direction[1]},
            "witnesses": verdict.witnesses,
            "annotations": verdict.annotations}
    return _emit(args, lines, data)


def _cmd_granger_fit(args) -> int:
    if args.lattice is None:
        raise MalformedInput("granger fit needs --lattice")
    lattice = build_lattice(parse(args.lattice))
    exp1 = build_experiment(parse(args.exp1), order_tag="first block first")
    exp2 = build_experiment(parse(args.exp2), order_tag="second block first")
    p = fit_smap_from_experiments(lattice, exp1, exp2, args.tol)
    sys.stdout.write(serialize_document(smap_document(p)))
    return 0


def _cmd_granger_classic(args) -> int:
    xs, ys = build_timeseries(parse(args.timeseries))
    rep = classical_granger_lag1(xs, ys)
    lines = [f"causes: {'yes' if rep.causes else 'no'}",
             f"sigma2 restricted = {_frac(rep.sigma2_restricted)}",
             f"sigma2 full = {_frac(rep.sigma2_full)}",
             f"observations: {rep.observations}",
             f"note: {rep.note}"]
    data = {"command": "granger classic", "causes": rep.causes,
            "sigma2_restricted": rep.sigma2_restricted,
            "sigma2_full": rep.sigma2_full,
            "observations": rep.observations, "note": rep.note}
    return _emit(args, lines, data)


# -- wiring ----------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        help="machine-readable JSON output")

    top = argparse.ArgumentParser(
        prog="omlprob",
        description="Exact probability on finite orthomodular lattices.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="check a lattice file against every axiom")
    p.add_argument("lattice_file")
    p.set_defaults(run=_cmd_validate)

    p = sub.add_parser("blocks", parents=[common],
                       help="list the maximal Boolean blocks")
    p.add_argument("lattice_file")
    p.set_defaults(run=_cmd_blocks)

    p = sub.add_parser("hsum", parents=[common],
                       help="glue Boolean lattice files into a horizontal sum")
    p.add_argument("lattice_files", nargs="+")
    p.set_defaults(run=_cmd_hsum)

    smap = sub.add_parser("smap", help="validate, classify, or probe an s-map")
    ssub = smap.add_subparsers(dest="subcommand", required=True)
    for name, runner in (("validate", _cmd_smap_validate),
                         ("classify", _cmd_smap_classify),
                         ("properties", _cmd_smap_properties)):
        p = ssub.add_parser(name, parents=[common])
        p.add_argument("--smap", required=True, help="s-map document")
        p.add_argument("--lattice", help="lattice document (overrides the "
                                         "document's own reference)")
        p.set_defaults(run=runner)

    p = sub.add_parser("cond", parents=[common],
                       help="conditional state derived from an s-map")
    p.add_argument("--smap", required=True)
    p.add_argument("--lattice")
    p.set_defaults(run=_cmd_cond)

    p = sub.add_parser("expect", parents=[common],
                       help="expectation of an observable under an s-map")
    p.add_argument("--smap", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--lattice")
    p.set_defaults(run=_cmd_expect)

    p = sub.add_parser("condexpect", parents=[common],
                       help="conditional expectation onto an observable's range")
    p.add_argument("--smap", required=True)
    p.add_argument("--obs", required=True, help="observable to project")
    p.add_argument("--onto", required=True,
                   help="observable whose range receives the projection")
    p.add_argument("--lattice")
    p.set_defaults(run=_cmd_condexpect)

    p = sub.add_parser("oplus", parents=[common],
                       help="order-sensitive sum of two observables")
    p.add_argument("--smap", required=True)
    p.add_argument("--obs", required=True, help="left operand")
    p.add_argument("--with", required=True, dest="with",
                   help="right operand; the sum lives on its range")
    p.add_argument("--lattice")
    p.set_defaults(run=_cmd_oplus)

    obs = sub.add_parser("obs", help="observable operations")
    osub = obs.add_subparsers(dest="subcommand", required=True)
    p = osub.add_parser("validate", parents=[common])
    p.add_argument("--obs", required=True)
    p.add_argument("--lattice")
    p.set_defaults(run=_cmd_obs_validate)

    granger = sub.add_parser("granger", help="causality predicates and fitting")
    gsub = granger.add_subparsers(dest="subcommand", required=True)

    p = gsub.add_parser("test", parents=[common])
    p.add_argument("--smap", required=True)
    p.add_argument("--lattice")
    p.add_argument("--cause", required=True, metavar="SERIES@STAMP")
    p.add_argument("--effect", required=True, metavar="SERIES@STAMP")
    p.set_defaults(run=_cmd_granger_test)

    p = gsub.add_parser("fit", parents=[common])
    p.add_argument("exp1", help="counts CSV, first block's variable first")
    p.add_argument("exp2", help="counts CSV, second block's variable first")
    p.add_argument("--lattice", required=True)
    p.add_argument("--tol", default="0", type=as_rational,
                   help="marginal agreement tolerance (default exact)")
    p.set_defaults(run=_cmd_granger_fit)

    p = gsub.add_parser("classic", parents=[common])
    p.add_argument("timeseries", help="t,x,y CSV")
    p.set_defaults(run=_cmd_granger_classic)

    return top


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except OmlprobError as exc:
        if getattr(args, "json", False):
            payload = {"error": exc.kind, "message": str(exc),
                       "witness": exc.witness}
            sys.stdout.write(render_json(payload))
        else:
            sys.stderr.write(f"error [{exc.kind}]: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
