"""Command-line front end.

Exit codes: 0 a verdict was computed (whatever it is), 1 usage or input
error, 2 inconclusive or over budget, 3 internal invariant failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import corpus, ctl
from .control import (check_decision_independence, check_independence, check_independence_until,
                      is_decision, is_pure_button, is_pure_weak_button, is_restricted_switch,
                      is_switch, truth_set)
from .dot import frame_to_dot, general_to_dot, ts_to_dot
from .errors import InvariantError, MlarError
from .general_frame import (GeneralFrame, build_general_frame, bundle_from_dict, enumerate_abstractions,
                            eval_worlds, save_bundle, valid_on_general)
from .labeling import (countermodel_from_dict, labeling_from_dict, transfer_countermodel,
                       verify_labeling)
from .modal import (AXIOMS, KripkeFrame, dump_frame, eval_modal, frame_from_dict, frame_properties,
                    gen_fpf, gen_lollipop, gen_preboolean, chain, parse_modal, show_modal,
                    valid_on_frame)
from .ts import (Partition, TransitionSystem, dump_ts, find_abstraction, load_ts, quotient, validate)

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(MlarError):
    pass


class Inconclusive(MlarError):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- input resolution ----------------------------------------------------------

def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from None


def resolve_ts(name: str) -> TransitionSystem:
    """A file path, or a corpus name such as ``fig1_t1`` or ``buttons:2``."""
    if os.path.exists(name):
        ts = load_ts(name)
    else:
        ts = corpus.gen(name)
        if not isinstance(ts, TransitionSystem):
            raise UsageError(f"{name} does not name a transition system")
    problems = validate(ts)
    if problems:
        raise UsageError(f"{name}: {'; '.join(problems)}")
    return ts


GENERAL_BUILTINS = ("fig2", "buttons", "decisions", "switch", "rswitch")
FRAME_FAMILIES = ("preboolean", "lollipop", "fpf", "chain")


def _split(name):
    family, _, rest = name.partition(":")
    try:
        args = [int(x) for x in rest.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad parameters in {name!r}") from None
    if any(a < 0 for a in args):
        raise UsageError("parameters must be non-negative")
    return family, args


def builtin_general(name: str, relation: str = "search") -> GeneralFrame:
    family, args = _split(name)
    try:
        if family == "fig2" and not args:
            return corpus.fig2_frame("iso", relation)
        if family == "buttons" and len(args) == 1:
            return corpus.button_lattice(args[0], relation=relation)
        if family == "decisions" and len(args) == 1:
            return corpus.pruned_subframe(args[0], relation=relation)[0]
        if family == "switch" and len(args) <= 1:
            return corpus.switch_frame(*args, relation=relation)
        if family == "rswitch" and len(args) <= 2:
            return corpus.rswitch_frame(*args, relation=relation)
    except TypeError:
        pass
    raise UsageError(f"cannot build frame {name!r}")


def builtin_frame(name: str) -> KripkeFrame:
    family, args = _split(name)
    makers = {"preboolean": (gen_preboolean, 2), "lollipop": (gen_lollipop, 2),
              "fpf": (gen_fpf, 1), "chain": (chain, 1)}
    if family not in makers or len(args) != makers[family][1]:
        raise UsageError(f"unknown frame family {name!r}; use preboolean:n,c | lollipop:n,m | fpf:n | chain:k")
    return makers[family][0](*args)


def resolve_frame(name: str, relation: str = "search"):
    """General frame (bundle file or builtin) or plain Kripke frame."""
    if os.path.exists(name):
        data = _read_json(name)
        worlds = data.get("worlds") if isinstance(data, dict) else None
        if worlds and isinstance(worlds[0], dict):
            return bundle_from_dict(data)
        return frame_from_dict(data)
    family = name.partition(":")[0]
    if family in GENERAL_BUILTINS:
        return builtin_general(name, relation)
    if family in FRAME_FAMILIES:
        return builtin_frame(name)
    raise UsageError(f"{name} is neither a file nor a builtin frame")


def resolve_general(name: str, relation: str = "search") -> GeneralFrame:
    g = resolve_frame(name, relation)
    if not isinstance(g, GeneralFrame):
        raise UsageError(f"{name} is a plain frame; this command needs a lattice bundle")
    return g


def _world(g: GeneralFrame, world):
    if world is None:
        return corpus.bottom_world(g)
    if world not in g.kripke.index:
        raise UsageError(f"unknown world {world!r}")
    return world


def _modal_formula(args):
    if args.axiom:
        if args.axiom not in AXIOMS:
            raise UsageError(f"unknown axiom {args.axiom!r}; known: {', '.join(AXIOMS)}")
        return AXIOMS[args.axiom]
    if not args.formula:
        raise UsageError("give --formula or --axiom")
    return parse_modal(args.formula)


def _set(ws):
    return "{" + ", ".join(ws) + "}"


def _emit(args, text, data):
    print(json.dumps(data, indent=2, ensure_ascii=False) if args.json else text)


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


# -- subcommands ---------------------------------------------------------------

def cmd_check_ctl(args):
    ts = resolve_ts(args.ts)
    f = ctl.parse_ctl(args.formula)
    res = ctl.check_ctl(ts, f)
    text = "true" if res.holds else "false"
    if args.states:
        text += "\nsatisfying states: " + _set(res.sorted())
    _emit(args, text, {"formula": ctl.to_str(f), "holds": res.holds, "states": res.sorted()})
    return EXIT_OK


def cmd_lattice(args):
    ts = resolve_ts(args.ts)
    if args.ts == "fig2_s" and args.mode == "iso":
        g = corpus.fig2_frame("iso", args.relation)
        complete = True
    else:
        enum = enumerate_abstractions(ts, args.mode, max_states=args.max_states,
                                      max_worlds=args.max_worlds)
        if not enum.complete:
            raise Inconclusive(enum.reason)
        g = build_general_frame(enum.worlds, args.relation, budget=args.budget)
        complete = enum.complete
    if g.inconclusive:
        raise Inconclusive(f"abstraction search over budget for {len(g.inconclusive)} pairs")
    lines = [f"{len(g.worlds)} worlds, {len(g.blocks)} CTL-blocks"]
    for w in g.worlds:
        lines.append(f"world {w.id}: {w.description}")
    for a, b in g.kripke.sorted_access():
        if a != b:
            lines.append(f"access {a} -> {b}")
    for i, block in enumerate(g.blocks):
        f = g.block_formulas.get(i)
        lines.append(f"block {i}: {_set(block)}" + (f" := {ctl.to_str(f)}" if f is not None else ""))
    if args.out:
        save_bundle(g, args.out)
    if args.dot:
        _write(args.dot, general_to_dot(g))
    if args.plot:
        from .plotting import plot_general
        plot_general(g, args.plot, title=f"abstractions of {args.ts}")
    data = {"worlds": g.world_ids(), "blocks": g.blocks, "complete": complete,
            "access": [list(p) for p in g.kripke.sorted_access()]}
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


def _general_verdict(g: GeneralFrame, f, at, budget, witness):
    res = valid_on_general(g, f, at=at, budget=budget)
    if res.status == "inconclusive":
        raise Inconclusive(f"needs {res.required} valuations, budget is {budget}")
    if res.valid:
        return "valid", {"status": "valid"}
    # re-verify before printing
    for p, phi in res.witnesses.items():
        if sorted(truth_set(g, phi), key=g.kripke.index.__getitem__) != res.worlds[p]:
            raise InvariantError(f"witness for {p} does not define its world set")
    if eval_worlds(g, res.worlds, res.world, f):
        raise InvariantError("witness valuation does not falsify the formula")
    text = f"falsified at {res.world}"
    if witness:
        for p in res.worlds:
            text += f"; {p} := {ctl.to_str(res.witnesses[p])}; V({p}) = {_set(res.worlds[p])}"
    data = {"status": "invalid", "world": res.world, "worlds": res.worlds,
            "witnesses": {p: ctl.to_str(phi) for p, phi in res.witnesses.items()},
            "blocks": res.valuation}
    return text, data


def _frame_verdict(frame: KripkeFrame, f, at, budget, witness):
    res = valid_on_frame(frame, f, budget=budget, at=at)
    if res.status == "inconclusive":
        raise Inconclusive(f"needs {res.required} valuations, budget is {budget}")
    if res.status == "valid":
        return "valid", {"status": "valid"}
    cm = res.countermodel
    if eval_modal(frame, cm.valuation, cm.world, f):
        raise InvariantError("countermodel does not falsify the formula")
    text = f"falsified at {cm.world}"
    if witness:
        for p, ws in cm.valuation.items():
            text += f"; V({p}) = {_set(ws)}"
    return text, {"status": "invalid", "world": cm.world,
                  "valuation": {p: list(ws) for p, ws in cm.valuation.items()}}


def cmd_modal(args):
    frame = resolve_frame(args.frame, args.relation)
    f = _modal_formula(args)
    if args.world is not None and args.world not in (frame.kripke if isinstance(frame, GeneralFrame) else frame).index:
        raise UsageError(f"unknown world {args.world!r}")
    if isinstance(frame, GeneralFrame):
        text, data = _general_verdict(frame, f, args.world, args.budget, args.witness)
    else:
        text, data = _frame_verdict(frame, f, args.world, args.budget, args.witness)
    data["formula"] = show_modal(f)
    _emit(args, text, data)
    return EXIT_OK


def cmd_frame_gen(args):
    frame = builtin_frame(args.family)
    text = dump_frame(frame, args.out)
    if args.dot:
        _write(args.dot, frame_to_dot(frame, args.family))
    if args.plot:
        from .plotting import plot_frame
        plot_frame(frame, args.plot, title=args.family)
    if args.out:
        print(f"{len(frame.worlds)} worlds, {len(frame.access)} pairs")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_frame_check(args):
    frame = resolve_frame(args.frame)
    if isinstance(frame, GeneralFrame):
        frame = frame.kripke
    if args.props:
        props = frame_properties(frame)
        lines = []
        for name, r in props.items():
            line = f"{name}: {'yes' if r.holds else 'no'}"
            if not r.holds and r.counterexample is not None:
                line += f" (counterexample {r.counterexample})"
            lines.append(line)
        data = {k: {"holds": r.holds, "counterexample": r.counterexample} for k, r in props.items()}
        _emit(args, "\n".join(lines), data)
        return EXIT_OK
    f = _modal_formula(args)
    text, data = _frame_verdict(frame, f, args.world, args.budget, True)
    data["formula"] = show_modal(f)
    _emit(args, text, data)
    return EXIT_OK


def _control_text(v):
    text = f"{v.kind}: {'yes' if v.verdict else 'no'}"
    if v.reason:
        text += f" ({v.reason})"
    if v.counterexample:
        text += f"; counterexample {list(v.counterexample)}"
    for k, val in v.notes.items():
        text += f"; {k}: {val}"
    return text


def cmd_control(args):
    g = resolve_general(args.frame, args.relation)
    c = _world(g, args.world)
    f = ctl.parse_ctl(args.ctl)
    if args.kind == "button":
        v = is_pure_button(g, c, f)
    elif args.kind == "weak-button":
        v = is_pure_weak_button(g, c, f)
    elif args.kind == "switch":
        v = is_switch(g, c, f)
    elif args.kind == "restricted-switch":
        if not args.restrictor:
            raise UsageError("restricted-switch needs --restrictor")
        v = is_restricted_switch(g, c, f, ctl.parse_ctl(args.restrictor))
    else:
        if not args.partner:
            raise UsageError("decision needs --partner")
        v = is_decision(g, c, f, ctl.parse_ctl(args.partner))
    _emit(args, _control_text(v), v.to_dict())
    return EXIT_OK


def cmd_independence(args):
    g = resolve_general(args.frame, args.relation)
    c = _world(g, args.world)
    if args.decisions:
        if len(args.decisions) % 2:
            raise UsageError("--decisions takes pairs: LAMBDA DELTA ...")
        fs = [ctl.parse_ctl(s) for s in args.decisions]
        v = check_decision_independence(g, c, list(zip(fs[::2], fs[1::2])))
    else:
        buttons = [ctl.parse_ctl(s) for s in args.buttons]
        switches = [ctl.parse_ctl(s) for s in args.switches]
        if args.until:
            v = check_independence_until(g, c, buttons, ctl.parse_ctl(args.until), switches)
        else:
            v = check_independence(g, c, buttons, switches)
    _emit(args, _control_text(v), v.to_dict())
    return EXIT_OK


def cmd_labeling(args):
    l = labeling_from_dict(_read_json(args.labeling))
    g = resolve_general(args.frame, args.relation)
    l = l.on(g, _world(g, args.anchor))
    if args.action == "verify":
        v = verify_labeling(l)
        _emit(args, str(v), {"valid": v.ok, "condition": v.condition, "detail": list(v.detail)})
        return EXIT_OK
    if not args.countermodel:
        raise UsageError("transfer needs --countermodel")
    cm = countermodel_from_dict(_read_json(args.countermodel))
    t = transfer_countermodel(l, cm)
    lines = [f"falsified at {l.anchor}"]
    for p in t.worlds:
        lines.append(f"{p} := {ctl.to_str(t.formulas[p])}; V({p}) = {_set(t.worlds[p])}")
    data = {"anchor": l.anchor, "worlds": t.worlds,
            "formulas": {p: ctl.to_str(f) for p, f in t.formulas.items()}}
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


def cmd_gen(args):
    out = corpus.gen(args.name)
    if isinstance(out, GeneralFrame):
        text = save_bundle(out, args.out)
        summary = f"{len(out.worlds)} worlds"
        if args.dot:
            _write(args.dot, general_to_dot(out))
    else:
        text = dump_ts(out, args.out)
        summary = f"{len(out.states)} states, {len(out.transitions)} transitions"
        if args.dot:
            _write(args.dot, ts_to_dot(out, args.name))
    if args.out:
        print(summary)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_abstract(args):
    ts = resolve_ts(args.ts)
    blocks = _read_json(args.partition_file)
    if not isinstance(blocks, list):
        raise UsageError("partition file must be an array of arrays of state names")
    q, witness = quotient(ts, Partition.of(ts, blocks))
    text = dump_ts(q, args.out)
    if args.out:
        print(f"{len(q.states)} states, {len(q.transitions)} transitions")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_refines(args):
    coarse, fine = resolve_ts(args.coarse), resolve_ts(args.fine)
    res = find_abstraction(coarse, fine, budget=args.budget)
    if res.status == "inconclusive":
        raise Inconclusive(f"search gave up after {res.nodes} nodes")
    if res.witness is None:
        _emit(args, "no", {"refines": False, "nodes": res.nodes})
        return EXIT_OK
    mapping = res.witness.mapping
    lines = ["yes"] + [f"{s} -> {mapping[s]}" for s in fine.states]
    _emit(args, "\n".join(lines), {"refines": True, "mapping": {s: mapping[s] for s in fine.states}})
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = Parser(prog="mlar", description="Abstraction lattices, CTL and modal frames.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    def relation(sp):
        sp.add_argument("--relation", choices=("search", "coarsen"), default="search")

    sp = add("check-ctl", cmd_check_ctl, "model-check a CTL formula")
    sp.add_argument("--ts", required=True)
    sp.add_argument("--formula", required=True)
    sp.add_argument("--states", action="store_true", help="also list satisfying states")

    sp = add("lattice", cmd_lattice, "enumerate abstractions and build the frame")
    sp.add_argument("--ts", required=True)
    sp.add_argument("--mode", choices=("iso", "partition"), default="iso")
    relation(sp)
    sp.add_argument("--out")
    sp.add_argument("--dot")
    sp.add_argument("--plot", help="write a Hasse diagram image")
    sp.add_argument("--max-states", type=int, default=corpus.MAX_STATES)
    sp.add_argument("--max-worlds", type=int, default=corpus.MAX_WORLDS)
    sp.add_argument("--budget", type=int, default=10**6)

    sp = add("modal", cmd_modal, "validity of a modal formula on a frame")
    sp.add_argument("--frame", required=True)
    sp.add_argument("--formula")
    sp.add_argument("--axiom")
    sp.add_argument("--world")
    sp.add_argument("--witness", action="store_true")
    sp.add_argument("--budget", type=int, default=2**20)
    relation(sp)

    sp = add("frame-gen", cmd_frame_gen, "generate a finite frame")
    sp.add_argument("--family", required=True)
    sp.add_argument("--out")
    sp.add_argument("--dot")
    sp.add_argument("--plot", help="write a Hasse diagram image")

    sp = add("frame-check", cmd_frame_check, "formula validity or order properties of a frame")
    sp.add_argument("--frame", required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--formula")
    g.add_argument("--axiom")
    g.add_argument("--props", action="store_true")
    sp.add_argument("--world")
    sp.add_argument("--budget", type=int, default=2**20)

    sp = add("control", cmd_control, "check one control statement at a world")
    sp.add_argument("--frame", required=True)
    sp.add_argument("--world")
    sp.add_argument("--kind", required=True,
                    choices=("button", "weak-button", "switch", "restricted-switch", "decision"))
    sp.add_argument("--ctl", required=True)
    sp.add_argument("--restrictor")
    sp.add_argument("--partner")
    relation(sp)

    sp = add("independence", cmd_independence, "check independence of a control family")
    sp.add_argument("--frame", required=True)
    sp.add_argument("--world")
    sp.add_argument("--buttons", nargs="*", default=[])
    sp.add_argument("--switches", nargs="*", default=[])
    sp.add_argument("--until")
    sp.add_argument("--decisions", nargs="*", default=[])
    relation(sp)

    sp = add("labeling", cmd_labeling, "verify a labeling or transfer a countermodel")
    sp.add_argument("action", choices=("verify", "transfer"))
    sp.add_argument("labeling")
    sp.add_argument("--frame", required=True)
    sp.add_argument("--anchor")
    sp.add_argument("--countermodel")
    relation(sp)

    sp = add("gen", cmd_gen, "generate a corpus system")
    sp.add_argument("--name", required=True)
    sp.add_argument("--out")
    sp.add_argument("--dot")

    sp = add("abstract", cmd_abstract, "quotient a system by a partition")
    sp.add_argument("--ts", required=True)
    sp.add_argument("--partition-file", required=True)
    sp.add_argument("--out")

    sp = add("refines", cmd_refines, "search for an abstraction function")
    sp.add_argument("--coarse", required=True)
    sp.add_argument("--fine", required=True)
    sp.add_argument("--budget", type=int, default=10**6)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Inconclusive as e:
        print(f"inconclusive: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except InvariantError as e:
        print(f"invariant failure: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except MlarError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
