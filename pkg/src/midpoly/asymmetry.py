"""Functional asymmetries as monomial cancellation.

A simple asymmetry "if Y_i = y then Y_j must (not) equal v" zeroes every
monomial whose factor annotations jointly realize the antecedent and violate
the consequent; entries whose own scope configuration contradicts an
asymmetry are emptied outright.  Composite asymmetries are lists of simple
ones and prune sequentially.

The in-evaluation variant filters monomials as each backward step produces
them, never materializing the cancelled ones; it yields exactly the same
trace as post-hoc pruning because annotations only grow along the recursion
and symmetric evaluation never merges like terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .diagram import CHANCE, MID, comp_b, comp_j, config_count, config_iter
from .engine import (
    EvaluationTrace,
    EUVector,
    Policy,
    backward_pass,
)
from .poly import Monomial, Polynomial

MUST_EQUAL = "="
MUST_DIFFER = "!="


@dataclass(frozen=True)
class Asymmetry:
    """antecedent (all must hold) => consequent restriction on one variable."""

    antecedent: tuple[tuple[int, int], ...]
    variable: int
    relation: str  # MUST_EQUAL | MUST_DIFFER
    value: int

    def __post_init__(self) -> None:
        if self.relation not in (MUST_EQUAL, MUST_DIFFER):
            raise ValueError(f"relation must be '=' or '!=', got {self.relation!r}")
        if not self.antecedent:
            raise ValueError("antecedent must be nonempty")
        indices = {i for i, _ in self.antecedent}
        if self.variable in indices:
            raise ValueError("consequent variable cannot appear in the antecedent")

    def forbidden_values(self, mid: MID) -> tuple[int, ...]:
        """Values of the consequent variable excluded once the antecedent holds."""
        if self.relation == MUST_DIFFER:
            return (self.value,)
        return tuple(v for v in range(mid.card(self.variable)) if v != self.value)


def _annotations_incompatible(ann: dict[int, set[int]], asy: Asymmetry) -> bool:
    for var, val in asy.antecedent:
        if val not in ann.get(var, ()):
            return False
    consequent_vals = ann.get(asy.variable)
    if not consequent_vals:
        return False
    if asy.relation == MUST_DIFFER:
        return asy.value in consequent_vals
    return any(v != asy.value for v in consequent_vals)


def monomial_compatible(mono: Monomial, asy: Asymmetry) -> bool:
    """False iff the factor annotations realize the antecedent and violate
    the consequent."""
    return not _annotations_incompatible(mono.value_annotations(), asy)


def prune_polynomial(
    p: Polynomial,
    asys: Sequence[Asymmetry],
    row: Mapping[int, int] | None = None,
) -> Polynomial:
    """Drop incompatible monomials, reading the row configuration as
    additional annotations: a monomial inside a row already conditioned on
    the antecedent value is impossible even when its own factors never
    mention that variable."""
    if not asys:
        return p
    kept = {}
    for mono in p.monomials():
        ann = mono.value_annotations()
        if row:
            for var, val in row.items():
                ann.setdefault(var, set()).add(val)
        if not any(_annotations_incompatible(ann, a) for a in asys):
            kept[mono.support] = mono.coefficient
    return Polynomial(kept)


def _config_contradicts(
    mid: MID, scope: tuple[int, ...], config: tuple[int, ...], asy: Asymmetry
) -> bool:
    values = dict(zip(scope, config))
    for var, val in asy.antecedent:
        if values.get(var) != val:
            return False
    if asy.variable not in values:
        return False
    return values[asy.variable] in asy.forbidden_values(mid)


def prune_vector(mid: MID, vec: EUVector, asys: Sequence[Asymmetry]) -> EUVector:
    """Row-aware monomial pruning plus emptying of contradicted rows."""
    entries = []
    for cfg, entry in zip(config_iter(mid, vec.scope), vec.entries):
        if any(_config_contradicts(mid, vec.scope, cfg, a) for a in asys):
            entries.append(Polynomial.zero())
        else:
            entries.append(prune_polynomial(entry, asys, dict(zip(vec.scope, cfg))))
    return EUVector(vec.scope, tuple(entries))


def apply_asymmetries(trace: EvaluationTrace, asys: Sequence[Asymmetry]) -> EvaluationTrace:
    """Prune every stage vector of a symmetric trace."""
    vectors = {
        i: prune_vector(trace.mid, vec, asys) for i, vec in trace.vectors.items()
    }
    return EvaluationTrace(trace.mid, vectors, list(trace.ops))


def symbolic_eu_asymmetric(
    mid: MID,
    policy: Policy,
    asys: Sequence[Asymmetry],
    *,
    additive: bool = False,
    check_extensive: bool = True,
) -> EvaluationTrace:
    """Backward induction that drops incompatible monomials as produced.

    The running vector prunes against chance row coordinates only: a chance
    coordinate later turns into a probability-factor annotation, so dropping
    early loses nothing, whereas a decision coordinate disappears at its
    maximization and using it would make the trace sharper than post-hoc
    pruning.  The stored stage copies prune with the full row context.
    """
    asys = tuple(asys)

    def prune(p: Polynomial, scope, cfg) -> Polynomial:
        row = {v: val for v, val in zip(scope, cfg) if mid.kind(v) == CHANCE}
        return prune_polynomial(p, asys, row)

    def store(stage: int, vec: EUVector) -> EUVector:
        return prune_vector(mid, vec, asys)

    return backward_pass(
        mid,
        policy,
        additive=additive,
        check_extensive=check_extensive,
        prune=prune if asys else None,
        store=store if asys else None,
    )


# -- count prediction ------------------------------------------------------------


@dataclass(frozen=True)
class AsymmetricCounts:
    """Predicted per-row monomial counts for one stage under a simple asymmetry.

    Every monomial class anchored at utility a instantiates exactly the
    chance positions stage..j_a, so once both restricted variables are
    determined (by the row configuration or inside that span) the forbidden
    combination removes a fixed fraction of the class.  With a decision
    variable involved the division is not exact and the reduced counts are
    lower bounds only (``exact`` is False); the pruning itself stays exact.
    """

    stage: int
    scope: tuple[int, ...]
    antecedent: tuple[int, int]
    consequent: int
    forbidden: tuple[int, ...]
    base: dict[int, int]
    exact: bool
    _mid: MID

    def expected_histogram(self, config: tuple[int, ...]) -> dict[int, int] | None:
        """Histogram predicted for one row; None means the row is emptied."""
        values = dict(zip(self.scope, config))
        i, yi = self.antecedent
        j = self.consequent
        num = 1
        over = 1
        span_need = self.stage - 1
        if i in values:
            if values[i] != yi:
                return dict(self.base)
        elif i >= self.stage:
            over *= self._mid.card(i)
            span_need = max(span_need, i)
        else:
            return dict(self.base)
        if j in values:
            if values[j] not in self.forbidden:
                return dict(self.base)
        elif j >= self.stage:
            num *= len(self.forbidden)
            over *= self._mid.card(j)
            span_need = max(span_need, j)
        else:
            return dict(self.base)
        if over == 1:
            return None  # both visible and jointly forbidden: emptied row
        js = comp_j(self._mid)
        from .structure import predicted_structure

        out: dict[int, int] = {}
        for t in predicted_structure(self._mid, self.stage).terms:
            keep = t.count
            if js[t.anchor - 1] >= span_need:
                keep = t.count - t.count * num // over
            out[t.degree] = out.get(t.degree, 0) + keep
        return {d: c for d, c in out.items() if c}

    def emptied_rows(self) -> int:
        i, yi = self.antecedent
        j = self.consequent
        if i not in self.scope or j not in self.scope:
            return 0
        rest = tuple(s for s in self.scope if s not in (i, j))
        return config_count(self._mid, rest) * len(self.forbidden)


def predicted_asymmetric_counts(mid: MID, stage: int, asy: Asymmetry) -> AsymmetricCounts:
    if len(asy.antecedent) != 1:
        raise ValueError("count prediction covers single-antecedent asymmetries")
    i, yi = asy.antecedent[0]
    j = asy.variable
    exact = mid.kind(i) == CHANCE and mid.kind(j) == CHANCE
    from .structure import predicted_structure

    base: dict[int, int] = {}
    for t in predicted_structure(mid, stage).terms:
        base[t.degree] = base.get(t.degree, 0) + t.count
    return AsymmetricCounts(
        stage,
        comp_b(mid, stage),
        (i, yi),
        j,
        asy.forbidden_values(mid),
        base,
        exact,
        mid,
    )
