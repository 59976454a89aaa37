"""The model file format: one JSON document holding a diagram, named
substitution specifications, asymmetries and policies.

Decimal literals are parsed as exact rationals (0.3 means 3/10); the
serializer writes integers as numbers and other rationals as strings
("0.3", "5/9"), which the parser accepts interchangeably, so documents
round-trip losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .asymmetry import Asymmetry
from .diagram import (
    CHANCE,
    DECISION,
    Diagnostic,
    MID,
    config_iter,
    indeterminate_table,
    validate,
)
from .engine import Config, Policy
from .indet import Indeterminate
from .poly import (
    Polynomial,
    PolynomialParseError,
    format_fraction,
    parse_polynomial,
    to_fraction,
)
from .sensitivity import SubstitutionSpec
from .transforms import TransformStep


class ModelParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass
class ModelDocument:
    mid: MID
    name: str = "model"
    specs: dict[str, SubstitutionSpec] = field(default_factory=dict)
    asymmetries: list[Asymmetry] = field(default_factory=list)
    policies: dict[str, Policy] = field(default_factory=dict)
    transform_log: list[dict[str, Any]] = field(default_factory=list)

    def names(self) -> dict[str, Indeterminate]:
        return indeterminate_table(self.mid)


# -- helpers -------------------------------------------------------------------


def _frac(value: Any, where: str, errors: list[Diagnostic]) -> Fraction | None:
    try:
        return to_fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        errors.append(Diagnostic("error", "number", f"{where}: bad number {value!r}"))
        return None


def _node_index(name: Any, n: int, where: str, errors: list[Diagnostic]) -> int | None:
    if isinstance(name, int):
        idx = name
    elif isinstance(name, str) and name.startswith("Y") and name[1:].isdigit():
        idx = int(name[1:])
    else:
        errors.append(Diagnostic("error", "node-ref", f"{where}: bad node reference {name!r}"))
        return None
    if not 1 <= idx <= n:
        errors.append(Diagnostic("error", "node-ref", f"{where}: node Y{idx} out of range"))
        return None
    return idx


def _parse_block_key(key: str, n: int, where: str, errors: list[Diagnostic]):
    if key == "":
        return ()
    pairs = []
    for part in key.split(","):
        if "=" not in part:
            errors.append(Diagnostic("error", "block-key", f"{where}: bad block entry {part!r}"))
            return None
        name, val = part.split("=", 1)
        idx = _node_index(name.strip(), n, where, errors)
        if idx is None or not val.strip().lstrip("-").isdigit():
            errors.append(Diagnostic("error", "block-key", f"{where}: bad block entry {part!r}"))
            return None
        pairs.append((idx, int(val)))
    return tuple(pairs)


def _block_key(scope: tuple[int, ...], config: Config) -> str:
    pairs = sorted(zip(scope, config), reverse=True)
    return ",".join(f"Y{i}={v}" for i, v in pairs)


# -- parsing --------------------------------------------------------------------


def parse_model(text: str) -> ModelDocument:
    """Parse and validate; raises ModelParseError with every problem found."""
    errors: list[Diagnostic] = []
    try:
        raw = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ModelParseError(
            [Diagnostic("error", "json", f"line {exc.lineno}: {exc.msg}")]
        ) from None
    if not isinstance(raw, dict):
        raise ModelParseError([Diagnostic("error", "json", "document must be an object")])

    nodes = raw.get("nodes", [])
    kinds: list[str] = []
    r: list[int] = []
    parents: dict[int, list[int]] = {}
    for pos, node in enumerate(nodes, start=1):
        where = f"nodes[{pos}]"
        nid = node.get("id", pos)
        if nid != pos:
            errors.append(
                Diagnostic("error", "node-order", f"{where}: id {nid} must equal position {pos}")
            )
        kind = node.get("kind")
        if kind not in (DECISION, CHANCE):
            errors.append(Diagnostic("error", "kind", f"{where}: kind must be decision|chance"))
            kind = CHANCE
        kinds.append(kind)
        try:
            r.append(int(node.get("r", 2)))
        except (TypeError, ValueError):
            errors.append(Diagnostic("error", "cardinality", f"{where}: bad cardinality"))
            r.append(2)
        ps = []
        for p in node.get("parents", []):
            idx = _node_index(p, len(nodes), where, errors)
            if idx is not None:
                if idx >= pos:
                    errors.append(
                        Diagnostic(
                            "error", "parent-order",
                            f"{where}: parent Y{idx} does not precede Y{pos}", (pos,),
                        )
                    )
                else:
                    ps.append(idx)
        parents[pos] = sorted(ps)
    n = len(nodes)

    util_parents: dict[int, list[int]] = {}
    for pos, u in enumerate(raw.get("utilities", []), start=1):
        where = f"utilities[{pos}]"
        ps = []
        for p in u.get("parents", []):
            idx = _node_index(p, n, where, errors)
            if idx is not None:
                ps.append(idx)
        util_parents[pos] = sorted(ps)
    m = len(util_parents)

    weights = raw.get("weights", {})
    k_raw = weights.get("k")
    if k_raw is None:
        k: list[Fraction | None] = [None] * m
    else:
        k = [None if v is None else _frac(v, f"weights.k[{j}]", errors) for j, v in enumerate(k_raw, start=1)]
        if len(k) != m:
            errors.append(Diagnostic("error", "weights", f"weights.k must have {m} entries"))
            k = (k + [None] * m)[:m]
    h_raw = weights.get("h")
    h: Any = None
    if h_raw in ("additive", "solve", None):
        h = h_raw
    else:
        h = _frac(h_raw, "weights.h", errors)

    if errors:
        raise ModelParseError(errors)

    mid = MID(tuple(kinds), tuple(r), tuple(tuple(parents[i]) for i in range(1, n + 1)),
              tuple(tuple(util_parents[j]) for j in range(1, m + 1)), tuple(k), h)
    for d in validate(mid):
        if d.severity == "error":
            errors.append(d)
    if errors:
        raise ModelParseError(errors)

    names = indeterminate_table(mid)
    specs: dict[str, SubstitutionSpec] = {}
    for sname, sraw in raw.get("specs", {}).items():
        where = f"specs.{sname}"
        numeric: dict[Indeterminate, Fraction] = {}
        for pname, val in sraw.get("numeric", {}).items():
            if pname not in names:
                errors.append(Diagnostic("error", "spec", f"{where}.numeric: unknown parameter {pname!r}"))
                continue
            v = _frac(val, f"{where}.numeric.{pname}", errors)
            if v is not None:
                numeric[names[pname]] = v
        relations: dict[Indeterminate, Polynomial] = {}
        for pname, expr in sraw.get("relations", {}).items():
            if pname not in names:
                errors.append(Diagnostic("error", "spec", f"{where}.relations: unknown parameter {pname!r}"))
                continue
            try:
                relations[names[pname]] = parse_polynomial(str(expr), names)
            except PolynomialParseError as exc:
                errors.append(Diagnostic("error", "spec", f"{where}.relations.{pname}: {exc}"))
        free = []
        for pname in sraw.get("free", []):
            if pname not in names:
                errors.append(Diagnostic("error", "spec", f"{where}.free: unknown parameter {pname!r}"))
            else:
                free.append(names[pname])
        specs[sname] = SubstitutionSpec(numeric, relations, tuple(free))

    asymmetries: list[Asymmetry] = []
    for pos, araw in enumerate(raw.get("asymmetries", []), start=1):
        where = f"asymmetries[{pos}]"
        try:
            ante = tuple(
                (i, int(v))
                for cond in araw["if"]
                if (i := _node_index(cond[0], n, where, errors)) is not None
                for v in [cond[1]]
            )
            var = _node_index(araw["then"][0], n, where, errors)
            rel = araw["then"][1]
            val = int(araw["then"][2])
            if var is not None and ante:
                asymmetries.append(Asymmetry(ante, var, rel, val))
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            errors.append(Diagnostic("error", "asymmetry", f"{where}: {exc}"))

    policies: dict[str, Policy] = {}
    for pname, praw in raw.get("policies", {}).items():
        where = f"policies.{pname}"
        actions: dict[int, dict[Config, int]] = {}
        for node_name, entry in praw.items():
            d = _node_index(node_name, n, where, errors)
            if d is None:
                continue
            if mid.kind(d) != DECISION:
                errors.append(Diagnostic("error", "policy", f"{where}: Y{d} is not a decision"))
                continue
            dom = Policy.domain(mid, d)
            per: dict[Config, int] = {}
            if isinstance(entry, int):
                per = {cfg: entry for cfg in config_iter(mid, dom)}
            elif isinstance(entry, dict):
                for key, action in entry.items():
                    pairs = _parse_block_key(key, n, f"{where}.Y{d}", errors)
                    if pairs is None:
                        continue
                    if tuple(sorted(i for i, _ in pairs)) != dom:
                        errors.append(
                            Diagnostic(
                                "error", "policy",
                                f"{where}.Y{d}: block {key!r} must cover exactly {['Y%d' % s for s in dom]}",
                            )
                        )
                        continue
                    by_index = dict(pairs)
                    per[tuple(by_index[s] for s in dom)] = int(action)
            else:
                errors.append(Diagnostic("error", "policy", f"{where}.Y{d}: bad entry"))
            missing = [cfg for cfg in config_iter(mid, dom) if cfg not in per]
            if missing:
                errors.append(
                    Diagnostic(
                        "error", "policy",
                        f"{where}.Y{d}: missing blocks {[_block_key(dom, c) for c in missing]}",
                    )
                )
            actions[d] = per
        for d in mid.decision_nodes:
            if d not in actions:
                errors.append(Diagnostic("error", "policy", f"{where}: no entry for decision Y{d}"))
        policies[pname] = Policy(actions)

    if errors:
        raise ModelParseError(errors)
    return ModelDocument(
        mid=mid,
        name=raw.get("name", "model"),
        specs=specs,
        asymmetries=asymmetries,
        policies=policies,
        transform_log=list(raw.get("transformLog", [])),
    )


# -- serialization ----------------------------------------------------------------


def _emit_number(q: Fraction) -> Any:
    if q.denominator == 1:
        return q.numerator
    return format_fraction(q)


def serialize_model(doc: ModelDocument) -> str:
    mid = doc.mid
    out: dict[str, Any] = {
        "name": doc.name,
        "nodes": [
            {
                "id": i,
                "kind": mid.kind(i),
                "r": mid.card(i),
                "parents": list(mid.pi(i)),
            }
            for i in range(1, mid.n + 1)
        ],
        "utilities": [
            {"id": j, "parents": list(mid.pset(j))} for j in range(1, mid.m + 1)
        ],
        "weights": {
            "k": [None if kj is None else _emit_number(kj) for kj in mid.k],
            "h": mid.h if isinstance(mid.h, (str, type(None))) else _emit_number(mid.h),
        },
    }
    if doc.specs:
        out["specs"] = {
            name: {
                "numeric": {
                    ind.render(): _emit_number(v) for ind, v in sorted(
                        spec.numeric.items(), key=lambda kv: kv[0].sort_key()
                    )
                },
                "relations": {
                    ind.render(): poly.render() for ind, poly in sorted(
                        spec.relations.items(), key=lambda kv: kv[0].sort_key()
                    )
                },
                "free": [ind.render() for ind in spec.free],
            }
            for name, spec in doc.specs.items()
        }
    if doc.asymmetries:
        out["asymmetries"] = [
            {
                "if": [[f"Y{i}", v] for i, v in a.antecedent],
                "then": [f"Y{a.variable}", a.relation, a.value],
            }
            for a in doc.asymmetries
        ]
    if doc.policies:
        out["policies"] = {
            name: {
                f"Y{d}": {
                    _block_key(Policy.domain(mid, d), cfg): action
                    for cfg, action in per.items()
                }
                for d, per in pol.actions.items()
            }
            for name, pol in doc.policies.items()
        }
    if doc.transform_log:
        out["transformLog"] = doc.transform_log
    return json.dumps(out, indent=2)


def transform_step_record(step: TransformStep) -> dict[str, Any]:
    return {
        "kind": step.kind,
        "args": list(step.args),
        "argsOriginal": list(step.args_original) if step.args_original else list(step.args),
        "relabel": {str(k): v for k, v in step.relabel.items()},
    }
