"""Partial substitution, preferred-action tables and admissible-domain grids.

A substitution specification partitions parameters into numeric values,
relation bindings (a parameter defined by a polynomial in other parameters)
and free symbols.  Probability blocks with exactly one unspecified entry are
auto-completed to one minus the rest, so eliciting p5111 alone determines
p5011 = 1 - p5111.

Grid classification is exact: every cell is evaluated at its rational
center, labels are argmax with ties reported as indifferent, and decimal
text appears only at the serialization boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .diagram import (
    DECISION,
    MID,
    Config,
    comp_j,
    config_iter,
    prob_param,
)
from .engine import EUVector, Policy, backward_pass, eu_multisum
from .indet import Indeterminate
from .poly import Polynomial, format_fraction


@dataclass(frozen=True)
class SubstitutionSpec:
    numeric: dict[Indeterminate, Fraction] = field(default_factory=dict)
    relations: dict[Indeterminate, Polynomial] = field(default_factory=dict)
    free: tuple[Indeterminate, ...] = ()

    def mentioned(self) -> set[Indeterminate]:
        return set(self.numeric) | set(self.relations) | set(self.free)


class SpecPartitionError(ValueError):
    pass


def build_bindings(mid: MID, spec: SubstitutionSpec) -> dict[Indeterminate, Polynomial]:
    """Numeric and relation bindings plus sum-to-one completions.

    A probability block completes when all but one entry is specified
    (numerically, by relation, or declared free); the leftover entry binds to
    one minus the sum of its siblings.  Overlapping partitions are rejected.
    """
    overlap = (set(spec.numeric) & set(spec.relations)) | (
        set(spec.numeric) & set(spec.free)
    ) | (set(spec.relations) & set(spec.free))
    if overlap:
        names = ", ".join(sorted(x.render() for x in overlap))
        raise SpecPartitionError(f"parameters assigned to several roles: {names}")
    bindings: dict[Indeterminate, Polynomial] = {
        ind: Polynomial.const(v) for ind, v in spec.numeric.items()
    }
    bindings.update(spec.relations)
    mentioned = spec.mentioned()
    for i in mid.chance_nodes:
        for parent_cfg in config_iter(mid, mid.pi(i)):
            block = [prob_param(mid, i, y, parent_cfg) for y in range(mid.card(i))]
            unmentioned = [b for b in block if b not in mentioned]
            if len(unmentioned) == 1:
                rest = Polynomial.const(1)
                for b in block:
                    if b is not unmentioned[0]:
                        rest = rest - Polynomial.var(b)
                bindings[unmentioned[0]] = rest
    return bindings


def apply_spec(mid: MID, vec: EUVector, spec: SubstitutionSpec) -> EUVector:
    """Substitute a specification into every entry of a stage vector."""
    bindings = build_bindings(mid, spec)
    return EUVector(vec.scope, tuple(e.substitute(bindings) for e in vec.entries))


def spec_diagnostics(mid: MID, spec: SubstitutionSpec) -> list[str]:
    """Range checks and the interaction-constant residual warning."""
    out: list[str] = []
    for ind, v in spec.numeric.items():
        if ind.kind in ("p", "psi") and not 0 <= v <= 1:
            out.append(f"{ind.render()}={format_fraction(v)} outside [0,1]")
        if ind.kind == "k" and not 0 < v < 1:
            out.append(f"{ind.render()}={format_fraction(v)} outside (0,1)")
    ks = [spec.numeric.get(Indeterminate.weight(j)) for j in range(1, mid.m + 1)]
    h = spec.numeric.get(Indeterminate.interaction())
    if h is not None and all(k is not None for k in ks) and ks:
        rhs = Fraction(1)
        for k in ks:
            rhs *= 1 + h * k  # type: ignore[operator]
        residual = abs((1 + h) - rhs)
        if residual > Fraction(1, 10**9):
            out.append(
                "interaction residual |(1+h) - prod(1+h*k)| = "
                f"{format_fraction(residual)}; values kept as stated"
            )
    return out


# -- preferred actions ---------------------------------------------------------


@dataclass(frozen=True)
class ActionRow:
    block: Config
    best_action: int
    best_value: Fraction
    runner_up: Fraction | None
    margin: Fraction | None


def preferred_action_table(
    mid: MID,
    spec: SubstitutionSpec,
    decision: int,
    *,
    tail_policy: Policy | None = None,
) -> list[ActionRow]:
    """Per-block argmax at a decision, from the substituted stage vector.

    Later decisions, if any, must be fixed by ``tail_policy``.  Ties break
    toward the lowest action index.
    """
    if mid.kind(decision) != DECISION:
        raise ValueError(f"Y{decision} is not a decision node")
    tail_decisions = [d for d in mid.decision_nodes if d > decision]
    if tail_decisions and tail_policy is None:
        raise ValueError(
            f"decisions {tail_decisions} follow Y{decision}; supply tail_policy"
        )
    trace = backward_pass(mid, tail_policy, down_to=decision + 1)
    u = trace.vectors[decision + 1]
    anchors = {anchor: j for j, anchor in enumerate(comp_j(mid), start=1)}
    if decision in anchors:
        u = eu_multisum(mid, u, anchors[decision])
    u = apply_spec(mid, u, spec)
    if decision not in u.scope:
        raise ValueError(f"decision Y{decision} cannot influence the expected utility")
    r = mid.card(decision)
    block_scope = u.scope[:-1]
    rows: list[ActionRow] = []
    for block_idx, block_cfg in enumerate(config_iter(mid, block_scope)):
        values: list[Fraction] = []
        for action in range(r):
            entry = u.entries[block_idx * r + (r - 1 - action)]
            v = entry.constant_value()
            if v is None:
                raise ValueError(
                    f"entry for block {block_cfg}, action {action} is not numeric "
                    "under this specification"
                )
            values.append(v)
        best = max(range(r), key=lambda a: (values[a], -a))
        others = sorted((v for a, v in enumerate(values) if a != best), reverse=True)
        runner = others[0] if others else None
        rows.append(
            ActionRow(
                block_cfg,
                best,
                values[best],
                runner,
                values[best] - runner if runner is not None else None,
            )
        )
    return rows


# -- admissible-domain grids -----------------------------------------------------


@dataclass(frozen=True)
class Axis:
    ind: Indeterminate
    lo: Fraction
    hi: Fraction
    steps: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError("axis needs lo < hi")
        if self.steps < 1:
            raise ValueError("axis needs at least one step")

    def center(self, idx: int) -> Fraction:
        width = (self.hi - self.lo) / self.steps
        return self.lo + width * idx + width / 2

    def node(self, idx: int) -> Fraction:
        return self.lo + (self.hi - self.lo) * idx / self.steps

    def cell_of(self, value: Fraction) -> int:
        """Index of the cell containing ``value`` (clamped to the range)."""
        width = (self.hi - self.lo) / self.steps
        idx = int((value - self.lo) / width)
        return min(max(idx, 0), self.steps - 1)


INDIFFERENT = "indifferent"


@dataclass(frozen=True)
class RegionGrid:
    axes: tuple[Axis, ...]
    labels: tuple[str, ...]
    cells: dict[Config, str]                    # cell index tuple -> label
    values: dict[Config, tuple[Fraction, ...]]  # per-alternative exact values

    def table(self) -> str:
        """One row per cell: axis centers, label, value per alternative."""
        header = [a.ind.render() for a in self.axes] + ["preferred"] + list(self.labels)
        lines = ["\t".join(header)]
        for idx in sorted(self.cells):
            centers = [format_fraction(ax.center(k)) for ax, k in zip(self.axes, idx)]
            vals = [format_fraction(v) for v in self.values[idx]]
            lines.append("\t".join(centers + [self.cells[idx]] + vals))
        return "\n".join(lines)


def admissible_grid(
    alternatives: Sequence[tuple[str, Polynomial]],
    axes: Sequence[Axis],
) -> RegionGrid:
    """Classify every cell center by the alternative with maximal value.

    All non-axis indeterminates must already be numeric; equal top values
    label the cell ``indifferent``.
    """
    if not 1 <= len(axes) <= 3:
        raise ValueError("grids support one to three free axes")
    axis_inds = {a.ind for a in axes}
    for label, poly in alternatives:
        extra = poly.variables() - axis_inds
        if extra:
            names = ", ".join(sorted(x.render() for x in extra))
            raise ValueError(f"alternative {label!r} still contains {names}")
    labels = tuple(label for label, _ in alternatives)
    cells: dict[Config, str] = {}
    values: dict[Config, tuple[Fraction, ...]] = {}
    for idx in _grid_indices([a.steps for a in axes]):
        point = {a.ind: a.center(k) for a, k in zip(axes, idx)}
        vals = tuple(poly.evaluate(point) for _, poly in alternatives)
        best = max(vals)
        winners = [label for label, v in zip(labels, vals) if v == best]
        cells[idx] = winners[0] if len(winners) == 1 else INDIFFERENT
        values[idx] = vals
    return RegionGrid(tuple(axes), labels, cells, values)


def _grid_indices(steps: Sequence[int]):
    import itertools

    return itertools.product(*[range(s) for s in steps])


@dataclass(frozen=True)
class Crossing:
    point: tuple[Fraction, ...]
    degenerate: bool = False


def indifference_samples(
    diff: Polynomial, axes: Sequence[Axis]
) -> list[Crossing]:
    """Sign changes of ``diff`` along grid edges, linearly interpolated.

    An edge with both endpoints exactly zero reports its midpoint flagged
    degenerate (the difference vanishes identically there).
    """
    if not 1 <= len(axes) <= 3:
        raise ValueError("grids support one to three free axes")
    extra = diff.variables() - {a.ind for a in axes}
    if extra:
        names = ", ".join(sorted(x.render() for x in extra))
        raise ValueError(f"difference still contains {names}")
    node_counts = [a.steps + 1 for a in axes]
    cache: dict[Config, Fraction] = {}

    def value_at(idx: Config) -> Fraction:
        if idx not in cache:
            point = {a.ind: a.node(k) for a, k in zip(axes, idx)}
            cache[idx] = diff.evaluate(point)
        return cache[idx]

    out: list[Crossing] = []
    for idx in _grid_indices(node_counts):
        for d in range(len(axes)):
            if idx[d] + 1 >= node_counts[d]:
                continue
            nxt = tuple(v + 1 if k == d else v for k, v in enumerate(idx))
            fa, fb = value_at(idx), value_at(nxt)
            pa = tuple(a.node(k) for a, k in zip(axes, idx))
            pb = tuple(a.node(k) for a, k in zip(axes, nxt))
            if fa == 0 and fb == 0:
                midpoint = tuple((x + y) / 2 for x, y in zip(pa, pb))
                out.append(Crossing(midpoint, degenerate=True))
            elif fa == 0:
                out.append(Crossing(pa))
            elif fb == 0:
                continue  # reported when the next edge starts at that node
            elif (fa < 0) != (fb < 0):
                t = fa / (fa - fb)
                point = tuple(x + (y - x) * t for x, y in zip(pa, pb))
                out.append(Crossing(point))
    return out
