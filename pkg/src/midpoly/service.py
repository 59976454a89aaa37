"""HTTP service exposing evaluation, substitution and sweeps over one model.

The app is stateless: the model document is loaded at startup and every
handler is a pure function of it, so concurrent requests need no locking and
responses are deterministic.  Numbers cross the wire as exact decimal text.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .asymmetry import apply_asymmetries
from .diagram import (
    DECISION,
    comp_b,
    comp_j,
    config_iter,
    decision_sequence,
    indeterminate_table,
    validate,
)
from .engine import Policy, PolicyError, symbolic_eu
from .model import ModelDocument, parse_model, serialize_model
from .poly import PolynomialParseError, format_fraction, parse_polynomial, to_fraction
from .sensitivity import (
    Axis,
    SubstitutionSpec,
    apply_spec,
    admissible_grid,
    preferred_action_table,
    spec_diagnostics,
)

Number = int | float | str


class InlineSpec(BaseModel):
    numeric: dict[str, Number] = Field(default_factory=dict)
    relations: dict[str, str] = Field(default_factory=dict)
    free: list[str] = Field(default_factory=list)


class EvaluateRequest(BaseModel):
    policy: str | dict[str, Any] | None = None
    spec: str | InlineSpec | None = None
    stage: int = 1
    asymmetries: bool = False
    additive: bool = False


class EntryOut(BaseModel):
    config: dict[str, int]
    polynomial: str
    value: str | None


class EvaluateResponse(BaseModel):
    stage: int
    scope: list[str]
    entries: list[EntryOut]


class PolicyTableRequest(BaseModel):
    spec: str | InlineSpec
    decision: int
    tailPolicy: str | None = None


class PolicyRow(BaseModel):
    block: dict[str, int]
    bestAction: int
    value: str
    runnerUp: str | None
    margin: str | None


class PolicyTableResponse(BaseModel):
    decision: int
    rows: list[PolicyRow]
    diagnostics: list[str]


class AxisIn(BaseModel):
    name: str
    lo: Number = 0
    hi: Number = 1
    steps: int = 50


class SweepRequest(BaseModel):
    spec: str | InlineSpec
    stage: int
    decision: int
    block: dict[str, int] = Field(default_factory=dict)
    axes: list[AxisIn]
    fixed: dict[str, Number] = Field(default_factory=dict)  # pins non-axis free parameters
    policy: str | None = None
    additive: bool = False


class CellOut(BaseModel):
    idx: list[int]
    center: list[str]
    label: str
    values: list[str]


class SweepResponse(BaseModel):
    labels: list[str]
    axes: list[AxisIn]
    cells: list[CellOut]


def _resolve_spec(doc: ModelDocument, spec: str | InlineSpec) -> SubstitutionSpec:
    if isinstance(spec, str):
        if spec not in doc.specs:
            raise HTTPException(404, f"unknown spec {spec!r}")
        return doc.specs[spec]
    names = doc.names()
    try:
        numeric = {names[k]: to_fraction(v) for k, v in spec.numeric.items()}
        relations = {
            names[k]: parse_polynomial(v, names) for k, v in spec.relations.items()
        }
        free = tuple(names[k] for k in spec.free)
    except KeyError as exc:
        raise HTTPException(422, f"unknown parameter {exc.args[0]!r}") from None
    except PolynomialParseError as exc:
        raise HTTPException(422, str(exc)) from None
    return SubstitutionSpec(numeric, relations, free)


def _resolve_policy(doc: ModelDocument, policy: str | dict | None) -> Policy | None:
    if policy is None:
        return None
    if isinstance(policy, str):
        if policy not in doc.policies:
            raise HTTPException(404, f"unknown policy {policy!r}")
        return doc.policies[policy]
    # inline: {"Y4": {"Y3=1": 0, ...}, "Y1": 1}
    from .model import ModelParseError, parse_model  # reuse the file-format parser
    import json

    try:
        probe = parse_model(
            json.dumps(
                json.loads(serialize_model(doc)) | {"policies": {"_inline": policy}}
            )
        )
    except ModelParseError as exc:
        raise HTTPException(422, str(exc)) from None
    return probe.policies["_inline"]


def _config_out(scope, cfg) -> dict[str, int]:
    return {f"Y{i}": v for i, v in sorted(zip(scope, cfg), reverse=True)}


def create_app(doc: ModelDocument, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="midpoly", description="Symbolic expected utilities over an influence diagram")
    mid = doc.mid
    if ui_dir:
        from pathlib import Path

        from fastapi.responses import FileResponse
        from fastapi.staticfiles import StaticFiles

        root = Path(ui_dir)
        if (root / "dist").is_dir():
            app.mount("/dist", StaticFiles(directory=root / "dist"), name="dist")
        if (root / "index.html").is_file():

            @app.get("/ui")
            def ui() -> FileResponse:
                return FileResponse(root / "index.html")

    @app.get("/model")
    def model() -> dict:
        import json

        from .sensitivity import build_bindings

        names = indeterminate_table(mid)
        resolved: dict[str, dict[str, str]] = {}
        for spec_name, spec in doc.specs.items():
            bindings = build_bindings(mid, spec)
            out: dict[str, str] = {}
            for ind, poly in bindings.items():
                value = poly.substitute(bindings).constant_value()
                if value is not None:
                    out[ind.render()] = format_fraction(value)
            resolved[spec_name] = out
        return {
            "document": json.loads(serialize_model(doc)),
            "derived": {
                "decisionSequence": decision_sequence(mid).render(),
                "utilityAnchors": list(comp_j(mid)),
                "relevanceScopes": {
                    str(i): list(comp_b(mid, i)) for i in range(1, mid.n + 2)
                },
                "parameters": sorted(names, key=lambda s: names[s].sort_key()),
                "resolvedSpecs": resolved,
                "diagnostics": [str(d) for d in validate(mid)],
            },
        }

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(req: EvaluateRequest) -> EvaluateResponse:
        policy = _resolve_policy(doc, req.policy)
        if policy is None and mid.decision_nodes:
            raise HTTPException(422, "a policy is required for diagrams with decisions")
        try:
            trace = symbolic_eu(mid, policy, additive=req.additive)
        except PolicyError as exc:
            raise HTTPException(422, str(exc)) from None
        if req.asymmetries and doc.asymmetries:
            trace = apply_asymmetries(trace, doc.asymmetries)
        if not 1 <= req.stage <= mid.n + 1:
            raise HTTPException(422, f"stage must be in 1..{mid.n + 1}")
        vec = trace.vectors[req.stage]
        if req.spec is not None:
            vec = apply_spec(mid, vec, _resolve_spec(doc, req.spec))
        entries = []
        for cfg, entry in zip(config_iter(mid, vec.scope), vec.entries):
            value = entry.constant_value()
            entries.append(
                EntryOut(
                    config=_config_out(vec.scope, cfg),
                    polynomial=entry.render(),
                    value=None if value is None else format_fraction(value),
                )
            )
        return EvaluateResponse(
            stage=req.stage,
            scope=[f"Y{i}" for i in vec.scope],
            entries=entries,
        )

    @app.post("/policy-table", response_model=PolicyTableResponse)
    def policy_table(req: PolicyTableRequest) -> PolicyTableResponse:
        spec = _resolve_spec(doc, req.spec)
        tail = _resolve_policy(doc, req.tailPolicy)
        if not 1 <= req.decision <= mid.n or mid.kind(req.decision) != DECISION:
            raise HTTPException(422, f"Y{req.decision} is not a decision node")
        try:
            rows = preferred_action_table(mid, spec, req.decision, tail_policy=tail)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        dom = Policy.domain(mid, req.decision)
        return PolicyTableResponse(
            decision=req.decision,
            rows=[
                PolicyRow(
                    block=_config_out(dom, row.block),
                    bestAction=row.best_action,
                    value=format_fraction(row.best_value),
                    runnerUp=None if row.runner_up is None else format_fraction(row.runner_up),
                    margin=None if row.margin is None else format_fraction(row.margin),
                )
                for row in rows
            ],
            diagnostics=spec_diagnostics(mid, spec),
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        spec = _resolve_spec(doc, req.spec)
        names = doc.names()
        if req.fixed:
            try:
                pinned = {names[k]: to_fraction(v) for k, v in req.fixed.items()}
            except KeyError as exc:
                raise HTTPException(422, f"unknown parameter {exc.args[0]!r}") from None
            spec = SubstitutionSpec(
                {**spec.numeric, **pinned},
                spec.relations,
                tuple(f for f in spec.free if f not in pinned),
            )
        if not 1 <= req.decision <= mid.n or mid.kind(req.decision) != DECISION:
            raise HTTPException(422, f"Y{req.decision} is not a decision node")
        tail = _resolve_policy(doc, req.policy)
        try:
            trace_vec = preferred_action_vector(doc, req, spec, tail)
        except (ValueError, PolicyError) as exc:
            raise HTTPException(422, str(exc)) from None
        axes = []
        for a in req.axes:
            if a.name not in names:
                raise HTTPException(422, f"unknown axis parameter {a.name!r}")
            axes.append(Axis(names[a.name], to_fraction(a.lo), to_fraction(a.hi), a.steps))
        try:
            grid = admissible_grid(trace_vec, axes)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        cells = [
            CellOut(
                idx=list(idx),
                center=[format_fraction(ax.center(k)) for ax, k in zip(grid.axes, idx)],
                label=grid.cells[idx],
                values=[format_fraction(v) for v in grid.values[idx]],
            )
            for idx in sorted(grid.cells)
        ]
        return SweepResponse(labels=list(grid.labels), axes=req.axes, cells=cells)

    def preferred_action_vector(doc, req, spec, tail):
        """Alternatives for the sweep: one labeled polynomial per action."""
        from .engine import backward_pass, eu_multisum

        anchors = {anchor: j for j, anchor in enumerate(comp_j(mid), start=1)}
        trace = backward_pass(mid, tail, down_to=req.decision + 1)
        u = trace.vectors[req.decision + 1]
        if req.decision in anchors:
            u = eu_multisum(mid, u, anchors[req.decision])
        u = apply_spec(mid, u, spec)
        if req.decision not in u.scope:
            raise ValueError(f"decision Y{req.decision} cannot influence the expected utility")
        block_scope = u.scope[:-1]
        want = {}
        for key, v in req.block.items():
            idx = int(key.lstrip("Y"))
            want[idx] = v
        missing = [s for s in block_scope if s not in want]
        if missing:
            raise ValueError(f"block must fix {[f'Y{s}' for s in missing]}")
        block_cfg = tuple(want[s] for s in block_scope)
        from .diagram import config_index

        block_idx = config_index(mid, block_scope, block_cfg)
        r = mid.card(req.decision)
        return [
            (f"Y{req.decision}={a}", u.entries[block_idx * r + (r - 1 - a)])
            for a in range(r)
        ]

    return app


def load_app(path: str) -> FastAPI:
    with open(path, "r", encoding="utf-8") as fh:
        return create_app(parse_model(fh.read()))
