"""Closed-form predictions of expected-utility polynomial structure and cost.

For a symmetric diagram the stage-i vector has dimension prod_{j in B_i} r_j
and each entry contains, for every pair (a, b) with l <= b <= a <= m (l the
first utility anchored at or after stage i):

    count   C(a-l, b-l) * prod of r_j over chance j in positions i..j_a
    degree  (b-l) + 2(b-l+1) + w_ia
    h power b-l

where w_ia counts the chance nodes among Y_i..Y_{j_a}.  The additive case
keeps only b = l.  The count product runs over chance positions only: the
written statement multiplies over all positions, but its own proof counts
configurations of the chance span and the worked examples (stage 5 of the
running diagram, the stage-1 histogram) require the chance-only product.

Predictions are exact oracles: any mismatch against an actual vector is a
failure, not a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .diagram import CHANCE, MID, comp_b, comp_j, config_count, require_valid
from .engine import EUVector


@dataclass(frozen=True)
class TermClass:
    count: int
    degree: int
    h_exponent: int
    anchor: int  # index a of the highest utility node the class involves


@dataclass(frozen=True)
class StructurePrediction:
    stage: int
    dimension: int
    terms: tuple[TermClass, ...]
    additive: bool

    def histogram(self) -> dict[int, tuple[int, bool]]:
        """degree -> (count, all square-free apart from nothing).

        A class is square-free exactly when its h exponent is at most one;
        higher powers of h are the only repeated factors a symmetric run can
        produce.
        """
        out: dict[int, tuple[int, bool]] = {}
        for t in self.terms:
            count, sf = out.get(t.degree, (0, True))
            out[t.degree] = (count + t.count, sf and t.h_exponent <= 1)
        return out

    @property
    def monomials_per_entry(self) -> int:
        return sum(t.count for t in self.terms)


def _first_utility_at_or_after(mid: MID, i: int) -> int | None:
    for j, anchor in enumerate(comp_j(mid), start=1):
        if anchor >= i:
            return j
    return None


def _chance_span_product(mid: MID, i: int, j_a: int) -> int:
    out = 1
    for s in range(i, j_a + 1):
        if mid.kind(s) == CHANCE:
            out *= mid.card(s)
    return out


def _chance_span_count(mid: MID, i: int, j_a: int) -> int:
    return sum(1 for s in range(i, j_a + 1) if mid.kind(s) == CHANCE)


def predicted_structure(mid: MID, i: int, additive: bool = False) -> StructurePrediction:
    """Entry structure of the stage-i expected-utility vector."""
    require_valid(mid)
    if not 1 <= i <= mid.n:
        raise ValueError(f"stage must be in 1..{mid.n}, got {i}")
    js = comp_j(mid)
    l = _first_utility_at_or_after(mid, i)
    dimension = config_count(mid, comp_b(mid, i))
    if l is None:
        return StructurePrediction(i, dimension, (), additive)
    terms: list[TermClass] = []
    for a in range(l, mid.m + 1):
        w_ia = _chance_span_count(mid, i, js[a - 1])
        span = _chance_span_product(mid, i, js[a - 1])
        if additive:
            terms.append(TermClass(span, w_ia + 2, 0, a))
        else:
            for b in range(l, a + 1):
                terms.append(
                    TermClass(
                        comb(a - l, b - l) * span,
                        (b - l) + 2 * (b - l + 1) + w_ia,
                        b - l,
                        a,
                    )
                )
    return StructurePrediction(i, dimension, tuple(terms), additive)


# -- conformance ---------------------------------------------------------------


@dataclass(frozen=True)
class Mismatch:
    entry: int
    degree: int | None
    expected: tuple[int, bool] | None
    actual: tuple[int, bool] | None
    note: str = ""


@dataclass(frozen=True)
class ConformanceReport:
    ok: bool
    mismatches: tuple[Mismatch, ...]

    def first(self) -> Mismatch | None:
        return self.mismatches[0] if self.mismatches else None


def check_structure(vec: EUVector, pred: StructurePrediction) -> ConformanceReport:
    """Compare every entry's degree histogram against the prediction."""
    mismatches: list[Mismatch] = []
    if len(vec.entries) != pred.dimension:
        mismatches.append(
            Mismatch(-1, None, (pred.dimension, True), (len(vec.entries), True), "dimension")
        )
    expected = pred.histogram()
    for idx, entry in enumerate(vec.entries):
        actual = entry.structure_summary()
        for degree in sorted(set(expected) | set(actual)):
            if expected.get(degree) != actual.get(degree):
                mismatches.append(
                    Mismatch(idx, degree, expected.get(degree), actual.get(degree))
                )
    return ConformanceReport(not mismatches, tuple(mismatches))


# -- multiplication counts ------------------------------------------------------


def _per_entry_monomials(mid: MID, stage: int, additive: bool) -> int:
    if stage == mid.n + 1:
        return 0
    return predicted_structure(mid, stage, additive).monomials_per_entry


def _stage_dimension(mid: MID, stage: int) -> int:
    if stage == mid.n + 1:
        return 1
    return config_count(mid, comp_b(mid, stage))


def multiplication_count(
    mid: MID, i: int, op: str, *, additive: bool = False
) -> int:
    """Scalar multiplications of one stage operation, per the closed forms.

    Maximization performs none.  A multi-sum at stage i costs
    c_{i+1} * t_i * (2 + m_{i+1}) + 1; a marginalization costs
    C * s_i * m + (C * s_i)^2 / r_i where C and m describe the vector being
    eliminated (after the stage's multi-sum when one fires).
    """
    require_valid(mid)
    anchors = {anchor: j for j, anchor in enumerate(comp_j(mid), start=1)}
    if op == "maximize":
        return 0
    c_next = _stage_dimension(mid, i + 1)
    m_next = _per_entry_monomials(mid, i + 1, additive)
    scope_next = set(comp_b(mid, i + 1)) if i + 1 <= mid.n else set()
    if op == "multisum":
        if i not in anchors:
            raise ValueError(f"no utility node is anchored at stage {i}")
        j = anchors[i]
        t = 1
        for s in set(mid.pset(j)) - scope_next:
            t *= mid.card(s)
        return c_next * t * (2 + m_next) + 1
    if op == "marginalize":
        if mid.kind(i) != CHANCE:
            raise ValueError(f"Y{i} is not a chance node")
        if i in anchors:
            j = anchors[i]
            t = 1
            for s in set(mid.pset(j)) - scope_next:
                t *= mid.card(s)
            operand_dim = c_next * t
            operand_scope = scope_next | set(mid.pset(j))
            operand_monomials = m_next + 1 if additive else 2 * m_next + 1
        else:
            operand_dim = c_next
            operand_scope = scope_next
            operand_monomials = m_next
        s_i = 1
        for s in (set(mid.pi(i)) | {i}) - operand_scope:
            s_i *= mid.card(s)
        aligned = operand_dim * s_i
        return aligned * operand_monomials + aligned * aligned // mid.card(i)
    raise ValueError(f"unknown operation {op!r}")
