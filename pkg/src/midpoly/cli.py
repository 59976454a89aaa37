"""Command-line interface.

    midpoly validate MODEL
    midpoly evaluate MODEL --policy NAME [--spec NAME] [--stage K] [--additive] [--asymmetries]
    midpoly structure MODEL [--additive] [--policy NAME]
    midpoly transform MODEL (--reverse I J | --remove-barren I | --sufficiency I J | --to-extensive) [-o OUT]
    midpoly sweep MODEL --spec NAME --stage K --decision D --block Y3=1 --axis psi301:0:1:50 ... [--emit-plot-data FILE]
    midpoly oracle-check MODEL [--spec NAME] [--cap N]
    midpoly serve MODEL [--port P]

Commands run in-process against the model file; ``serve`` exposes the same
operations over HTTP for interactive clients.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .asymmetry import symbolic_eu_asymmetric
from .diagram import (
    comp_b,
    comp_j,
    config_iter,
    decision_sequence,
    is_extensive_form,
    validate,
)
from .engine import enumerate_policies, symbolic_eu
from .model import (
    ModelDocument,
    ModelParseError,
    parse_model,
    serialize_model,
    transform_step_record,
)
from .oracle import complete_numeric_spec, joint_eu_numeric
from .poly import format_fraction, to_fraction
from .sensitivity import apply_spec, build_bindings, spec_diagnostics
from .structure import check_structure, multiplication_count, predicted_structure
from .transforms import (
    TransformError,
    apply_sufficiency,
    remove_barren,
    reverse_arc,
    to_extensive_form,
)


def _load(path: str) -> ModelDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_model(fh.read())
    except FileNotFoundError:
        print(f"error: no such file {path}", file=sys.stderr)
        raise SystemExit(2)
    except ModelParseError as exc:
        for d in exc.diagnostics:
            print(str(d), file=sys.stderr)
        raise SystemExit(2)


def _config_text(scope, cfg) -> str:
    if not scope:
        return "()"
    return ",".join(f"Y{i}={v}" for i, v in sorted(zip(scope, cfg), reverse=True))


def cmd_validate(args) -> int:
    doc = _load(args.model)
    mid = doc.mid
    diags = validate(mid)
    for d in diags:
        print(str(d))
    print(f"decision sequence: {decision_sequence(mid).render()}")
    print(f"utility anchors:   {list(comp_j(mid))}")
    for i in range(1, mid.n + 2):
        print(f"B_{i} = {list(comp_b(mid, i))}")
    print(f"extensive form:    {is_extensive_form(mid)}")
    return 1 if any(d.severity == "error" for d in diags) else 0


def cmd_evaluate(args) -> int:
    doc = _load(args.model)
    mid = doc.mid
    policy = None
    if args.policy:
        if args.policy not in doc.policies:
            print(f"error: unknown policy {args.policy!r}", file=sys.stderr)
            return 2
        policy = doc.policies[args.policy]
    if args.asymmetries:
        trace = symbolic_eu_asymmetric(mid, policy, doc.asymmetries, additive=args.additive)
    else:
        trace = symbolic_eu(mid, policy, additive=args.additive)
    vec = trace.vectors[args.stage]
    if args.spec:
        if args.spec not in doc.specs:
            print(f"error: unknown spec {args.spec!r}", file=sys.stderr)
            return 2
        spec = doc.specs[args.spec]
        for note in spec_diagnostics(mid, spec):
            print(f"warning: {note}", file=sys.stderr)
        vec = apply_spec(mid, vec, spec)
    for cfg, entry in zip(config_iter(mid, vec.scope), vec.entries):
        value = entry.constant_value()
        shown = format_fraction(value) if value is not None else entry.render()
        print(f"U_{args.stage}({_config_text(vec.scope, cfg)}) = {shown}")
    return 0


def cmd_structure(args) -> int:
    from dataclasses import replace

    doc = _load(args.model)
    # structure predictions describe the fully symbolic parameterization, so
    # numeric weights are left unsubstituted here
    mid = replace(doc.mid, k=(None,) * doc.mid.m, h=None)
    additive = args.additive or doc.mid.h == "additive"
    policy = doc.policies.get(args.policy) if args.policy else None
    if policy is None and mid.decision_nodes:
        policy = next(enumerate_policies(mid))
    trace = symbolic_eu(mid, policy, additive=additive)
    anchors = {anchor: j for j, anchor in enumerate(comp_j(mid), start=1)}
    status = 0
    for i in range(1, mid.n + 1):
        pred = predicted_structure(mid, i, additive=additive)
        report = check_structure(trace.vectors[i], pred)
        hist = ", ".join(
            f"{c}@{d}" for d, (c, _) in sorted(pred.histogram().items())
        )
        ok = "ok" if report.ok else f"MISMATCH {report.first()}"
        print(f"stage {i}: dim {pred.dimension}, per-entry [{hist}] -> {ok}")
        if not report.ok:
            status = 1
        ops = ["maximize"] if mid.kind(i) == "decision" else ["marginalize"]
        if i in anchors:
            ops.insert(0, "multisum")
        costs = ", ".join(
            f"{op}={multiplication_count(mid, i, op, additive=additive)}" for op in ops
        )
        print(f"         multiplications: {costs}")
    return status


def cmd_transform(args) -> int:
    doc = _load(args.model)
    mid = doc.mid
    try:
        if args.reverse:
            i, j = args.reverse
            result, step = reverse_arc(mid, i, j)
            steps = [step]
        elif args.remove_barren is not None:
            result, step = remove_barren(mid, args.remove_barren)
            steps = [step]
        elif args.sufficiency:
            i, j = args.sufficiency
            result, step = apply_sufficiency(mid, i, j)
            steps = [step]
        else:
            result, log = to_extensive_form(mid)
            steps = log.steps
    except TransformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for step in steps:
        rec = transform_step_record(step)
        print(f"step: {rec['kind']} {rec['argsOriginal']}")
        for b in step.bindings:
            den = b.denominator.render()
            expr = b.numerator.render() if den == "1" else f"({b.numerator.render()}) / ({den})"
            print(f"  {b.new.render()} := {expr}")
    out_doc = ModelDocument(
        mid=result,
        name=doc.name + "-transformed",
        transform_log=[transform_step_record(s) for s in steps],
    )
    text = serialize_model(out_doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.output}")
    else:
        print(text)
    return 0


def _parse_axis(text: str) -> tuple[str, Fraction, Fraction, int]:
    parts = text.split(":")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("axis must be NAME:LO:HI:STEPS")
    return parts[0], to_fraction(parts[1]), to_fraction(parts[2]), int(parts[3])


def cmd_sweep(args) -> int:
    from .service import SweepRequest, AxisIn, create_app

    doc = _load(args.model)
    app = create_app(doc)  # reuse the endpoint logic
    from fastapi.testclient import TestClient

    block = {}
    for item in args.block or []:
        name, _, val = item.partition("=")
        block[name] = int(val)
    body = SweepRequest(
        spec=args.spec,
        stage=args.stage,
        decision=args.decision,
        block=block,
        axes=[
            AxisIn(name=a[0], lo=str(a[1]), hi=str(a[2]), steps=a[3])
            for a in args.axis
        ],
        policy=args.policy,
    )
    client = TestClient(app)
    resp = client.post("/sweep", json=body.model_dump())
    if resp.status_code != 200:
        print(f"error: {resp.json().get('detail')}", file=sys.stderr)
        return 1
    data = resp.json()
    header = [a[0] for a in args.axis] + ["preferred"] + data["labels"]
    lines = ["\t".join(header)]
    for cell in data["cells"]:
        lines.append("\t".join(cell["center"] + [cell["label"]] + cell["values"]))
    table = "\n".join(lines)
    if args.emit_plot_data:
        with open(args.emit_plot_data, "w", encoding="utf-8") as fh:
            fh.write(table + "\n")
        print(f"wrote {args.emit_plot_data}")
    else:
        print(table)
    return 0


def cmd_oracle_check(args) -> int:
    doc = _load(args.model)
    mid = doc.mid
    specs = doc.specs
    if args.spec:
        specs = {args.spec: doc.specs[args.spec]}
    failures = 0
    checked = 0
    for name, spec in specs.items():
        try:
            numeric = complete_numeric_spec(
                mid, build_resolved_numeric(doc, name), strict=True
            )
        except Exception as exc:
            print(f"spec {name}: skipped ({exc})")
            continue
        for policy in enumerate_policies(mid, cap=args.cap):
            symbolic = symbolic_eu(mid, policy).final.substitute(dict(numeric))
            value = symbolic.constant_value()
            reference = joint_eu_numeric(mid, numeric, policy)
            checked += 1
            if value != reference:
                failures += 1
                print(
                    f"spec {name}: MISMATCH symbolic={value} oracle={reference}",
                    file=sys.stderr,
                )
    print(f"checked {checked} policy evaluations, {failures} mismatches")
    return 1 if failures else 0


def build_resolved_numeric(doc: ModelDocument, spec_name: str):
    """Fully numeric parameter map from a named spec (relations resolved)."""
    mid = doc.mid
    spec = doc.specs[spec_name]
    bindings = build_bindings(mid, spec)
    numeric = {}
    for ind, poly in bindings.items():
        resolved = poly.substitute(bindings)
        value = resolved.constant_value()
        if value is not None:
            numeric[ind] = value
    return numeric


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    doc = _load(args.model)
    ui_dir = args.ui if args.ui else ("frontend" if os.path.isdir("frontend") else None)
    uvicorn.run(create_app(doc, ui_dir=ui_dir), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="midpoly", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="diagnostics plus derived sets")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evaluate", help="symbolic or substituted stage vectors")
    p.add_argument("model")
    p.add_argument("--policy")
    p.add_argument("--spec")
    p.add_argument("--stage", type=int, default=1)
    p.add_argument("--additive", action="store_true")
    p.add_argument("--asymmetries", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("structure", help="predicted vs actual polynomial structure")
    p.add_argument("model")
    p.add_argument("--policy")
    p.add_argument("--additive", action="store_true")
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("transform", help="diagram surgery")
    p.add_argument("model")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--reverse", nargs=2, type=int, metavar=("I", "J"))
    group.add_argument("--remove-barren", type=int, metavar="I")
    group.add_argument("--sufficiency", nargs=2, type=int, metavar=("I", "J"))
    group.add_argument("--to-extensive", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("sweep", help="admissible-domain grid")
    p.add_argument("model")
    p.add_argument("--spec", required=True)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--decision", type=int, required=True)
    p.add_argument("--block", action="append", metavar="Y3=1")
    p.add_argument("--axis", action="append", type=_parse_axis, required=True,
                   metavar="NAME:LO:HI:STEPS")
    p.add_argument("--policy")
    p.add_argument("--emit-plot-data", metavar="FILE")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="symbolic EU vs brute force, all policies")
    p.add_argument("model")
    p.add_argument("--spec")
    p.add_argument("--cap", type=int, default=10**6)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("model")
    p.add_argument("--port", type=int, default=8123)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="workbench directory to host at /ui (default: ./frontend)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
