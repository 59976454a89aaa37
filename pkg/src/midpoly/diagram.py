"""The influence-diagram data model and its derived combinatorial sets.

A diagram has variable nodes Y_1..Y_n (decision or chance, cardinalities
r_i), utility nodes U_1..U_m with pairwise-disjoint parent sets, per-utility
criterion weights k_j and the interaction constant h.  The aggregate utility
is additive when h = 0 and multiplicative otherwise, h solving
1 + h = prod_j(1 + h*k_j).

Configuration order (used by every vector in the package): a vector indexed
by an index set lists entries so that the highest variable index varies
fastest and every coordinate descends from r-1 to 0.  A probability vector
p_i is indexed by the node's own value and then its parents, which yields
the standard listing (p211, p201, p210, p200) for a binary node with one
binary parent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Literal, Sequence, Union

from .indet import Indeterminate
from .poly import format_fraction, to_fraction

DECISION = "decision"
CHANCE = "chance"

Config = tuple[int, ...]
Scope = tuple[int, ...]

# h may be a number, symbolic (None), exactly zero ("additive"), or derived
# from the weights ("solve").
HSpec = Union[Fraction, None, Literal["additive", "solve"]]


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    nodes: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"{self.severity}[{self.code}]: {self.message}"


class InvalidDiagramError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class MID:
    """Immutable diagram; derived sets are recomputed on demand.

    Node indices are 1-based everywhere, matching the written convention.
    ``k[j]`` may be None (symbolic weight); ``h`` follows HSpec.
    """

    kinds: tuple[str, ...]
    r: tuple[int, ...]
    parents: tuple[tuple[int, ...], ...]       # Pi_i, ascending
    util_parents: tuple[tuple[int, ...], ...]  # P_j, ascending
    k: tuple[Fraction | None, ...] = ()
    h: HSpec = None

    def __post_init__(self) -> None:
        if not self.k:
            object.__setattr__(self, "k", (None,) * self.m)

    @property
    def n(self) -> int:
        return len(self.kinds)

    @property
    def m(self) -> int:
        return len(self.util_parents)

    def kind(self, i: int) -> str:
        return self.kinds[i - 1]

    def card(self, i: int) -> int:
        return self.r[i - 1]

    def pi(self, i: int) -> tuple[int, ...]:
        return self.parents[i - 1]

    def pset(self, j: int) -> tuple[int, ...]:
        return self.util_parents[j - 1]

    @property
    def chance_nodes(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if self.kind(i) == CHANCE)

    @property
    def decision_nodes(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if self.kind(i) == DECISION)

    def children(self, i: int) -> tuple[int, ...]:
        """Variable-node children of Y_i (via chance and decision parent sets)."""
        return tuple(c for c in range(1, self.n + 1) if i in self.pi(c))

    def utility_children(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.m + 1) if i in self.pset(j))

    def resolved_h(self, tol: Fraction = Fraction(1, 10**12)) -> Fraction | None:
        """Numeric h if determined (additive/solve/number), None if symbolic."""
        if self.h == "additive":
            return Fraction(0)
        if self.h == "solve":
            ks = [k for k in self.k]
            if any(k is None for k in ks):
                raise InvalidDiagramError(
                    [Diagnostic("error", "h-solve", "h='solve' requires numeric weights")]
                )
            return solve_h([k for k in ks if k is not None], tol)
        return self.h


def make_mid(
    kinds: Sequence[str],
    r: Sequence[int],
    parents: dict[int, Sequence[int]],
    util_parents: dict[int, Sequence[int]],
    k: Sequence[Fraction | None] | None = None,
    h: HSpec = None,
) -> MID:
    n = len(kinds)
    m = len(util_parents)
    return MID(
        kinds=tuple(kinds),
        r=tuple(r),
        parents=tuple(tuple(sorted(parents.get(i, ()))) for i in range(1, n + 1)),
        util_parents=tuple(tuple(sorted(util_parents[j])) for j in range(1, m + 1)),
        k=tuple(k) if k is not None else (None,) * m,
        h=h,
    )


# -- validation ---------------------------------------------------------------

EQ2_TOLERANCE = Fraction(1, 10**9)


def validate(mid: MID) -> list[Diagnostic]:
    """All structural diagnostics at once; empty list means valid."""
    out: list[Diagnostic] = []
    n, m = mid.n, mid.m
    for i in range(1, n + 1):
        if mid.card(i) < 1:
            out.append(Diagnostic("error", "cardinality", f"Y{i} has cardinality < 1", (i,)))
        bad = [p for p in mid.pi(i) if not 1 <= p <= i - 1]
        if bad:
            out.append(
                Diagnostic(
                    "error",
                    "parent-order",
                    f"Y{i} has parent index not in 1..{i - 1}: {bad}",
                    (i,),
                )
            )
    seen: dict[int, int] = {}
    for j in range(1, m + 1):
        ps = mid.pset(j)
        if not ps:
            out.append(Diagnostic("error", "utility-parents", f"U{j} has no parents", ()))
        bad = [p for p in ps if not 1 <= p <= n]
        if bad:
            out.append(Diagnostic("error", "utility-parents", f"U{j} parent out of range: {bad}", ()))
        for p in ps:
            if p in seen:
                out.append(
                    Diagnostic(
                        "error",
                        "utility-overlap",
                        f"Y{p} is a parent of both U{seen[p]} and U{j}; parent sets must be disjoint",
                        (p,),
                    )
                )
            else:
                seen[p] = j
    for i in range(1, n + 1):
        # Barren nodes do not break evaluation (they arise mid-transform and
        # are deletable without changing the outcome), so this is a warning.
        if not mid.children(i) and not mid.utility_children(i):
            out.append(Diagnostic("warning", "childless", f"Y{i} has no children", (i,)))
    for j, kj in enumerate(mid.k, start=1):
        if kj is not None and not 0 < kj < 1:
            out.append(Diagnostic("error", "weight-range", f"k{j}={kj} outside (0,1)", ()))
    if isinstance(mid.h, Fraction) and all(kj is not None for kj in mid.k) and mid.m > 0:
        lhs = 1 + mid.h
        rhs = Fraction(1)
        for kj in mid.k:
            rhs *= 1 + mid.h * kj  # type: ignore[operator]
        residual = abs(lhs - rhs)
        if residual > EQ2_TOLERANCE:
            out.append(
                Diagnostic(
                    "warning",
                    "interaction-residual",
                    f"h={format_fraction(mid.h)} leaves |(1+h) - prod(1+h*k)| = "
                    f"{format_fraction(residual)}; proceeding with the stated values",
                )
            )
    return out


def require_valid(mid: MID) -> MID:
    errors = [d for d in validate(mid) if d.severity == "error"]
    if errors:
        raise InvalidDiagramError(errors)
    return mid


# -- derived sets -------------------------------------------------------------


def comp_j(mid: MID) -> tuple[int, ...]:
    """Highest parent index of each utility node, in utility order."""
    return tuple(max(mid.pset(j)) for j in range(1, mid.m + 1))


def comp_b(mid: MID, i: int) -> Scope:
    """Indices the stage-i expected utility genuinely depends on.

    Union of parent sets of chance nodes at or after stage i and of utility
    parent sets whose anchor is at or after stage i, minus {i..n}.
    """
    if not 1 <= i <= mid.n + 1:
        raise ValueError(f"stage must be in 1..{mid.n + 1}, got {i}")
    js = comp_j(mid)
    acc: set[int] = set()
    for kdx in range(i, mid.n + 1):
        if mid.kind(kdx) == CHANCE:
            acc.update(mid.pi(kdx))
    for j, anchor in enumerate(js, start=1):
        if anchor >= i:
            acc.update(mid.pset(j))
    return tuple(sorted(acc - set(range(i, mid.n + 1))))


@dataclass(frozen=True)
class DecisionSequence:
    """Variables in index order with each utility right after its anchor."""

    items: tuple[tuple[str, int], ...]  # ("Y", i) or ("U", j)

    def render(self) -> str:
        return "(" + ",".join(f"{kind}{idx}" for kind, idx in self.items) + ")"


class IllOrderedUtilitiesError(ValueError):
    pass


def decision_sequence(mid: MID) -> DecisionSequence:
    js = comp_j(mid)
    if len(set(js)) != len(js) or list(js) != sorted(js):
        raise IllOrderedUtilitiesError(
            f"utility anchors must be strictly increasing in utility order, got {js}"
        )
    items: list[tuple[str, int]] = []
    anchor_to_util = {anchor: j for j, anchor in enumerate(js, start=1)}
    for i in range(1, mid.n + 1):
        items.append(("Y", i))
        if i in anchor_to_util:
            items.append(("U", anchor_to_util[i]))
    return DecisionSequence(tuple(items))


def is_extensive_form(mid: MID) -> bool:
    """True iff every variable before a decision is a parent of that decision."""
    for d in mid.decision_nodes:
        if set(mid.pi(d)) != set(range(1, d)):
            return False
    return True


# -- interaction constant -----------------------------------------------------


class InteractionSolveError(ValueError):
    pass


def solve_h(k: Sequence[Fraction], tol: Fraction = Fraction(1, 10**12)) -> Fraction:
    """The unique nonzero root h >= -1 of 1 + h = prod(1 + h*k_j).

    Returns 0 when the weights sum to one (additive case).  Bisection on the
    exact residual; the result satisfies |(1+h) - prod(1+h*k_j)| <= tol.
    """
    ks = [to_fraction(x) for x in k]
    if any(not 0 < x < 1 for x in ks):
        raise InteractionSolveError(f"weights must lie in (0,1), got {ks}")
    total = sum(ks)
    if abs(total - 1) <= tol:
        return Fraction(0)

    def residual(h: Fraction) -> Fraction:
        prod = Fraction(1)
        for x in ks:
            prod *= 1 + h * x
        return prod - (1 + h)

    # residual(0) = 0 and residual'(0) = sum(k) - 1, so the nonzero root is
    # bracketed on the side where the derivative pushes the residual down.
    if total < 1:
        lo, hi = Fraction(1, 10**6), Fraction(2)
        while residual(hi) < 0:
            hi *= 2
            if hi > 10**9:
                raise InteractionSolveError("no sign change found while bracketing h > 0")
        if residual(lo) > 0:
            raise InteractionSolveError("residual positive near zero; cannot bracket root")
    else:
        lo, hi = Fraction(-1), -Fraction(1, 10**6)
        if residual(lo) < 0 or residual(hi) > 0:
            raise InteractionSolveError("no sign change found in [-1, 0)")
        lo, hi = hi, lo  # keep residual(lo) <= 0 <= residual(hi)

    for _ in range(200):
        mid_point = (lo + hi) / 2
        res = residual(mid_point)
        if abs(res) <= tol:
            return mid_point
        if res < 0:
            lo = mid_point
        else:
            hi = mid_point
    raise InteractionSolveError("bisection failed to reach tolerance")


# -- configuration order ------------------------------------------------------


def config_iter(mid: MID, scope: Scope) -> Iterator[Config]:
    """Configurations of ``scope`` (ascending indices) in canonical order.

    The highest index varies fastest and every coordinate descends.
    """
    ranges = [range(mid.card(i) - 1, -1, -1) for i in scope]
    return iter(itertools.product(*ranges))


def config_count(mid: MID, scope: Scope) -> int:
    out = 1
    for i in scope:
        out *= mid.card(i)
    return out


def config_index(mid: MID, scope: Scope, config: Config) -> int:
    """Position of a configuration in the canonical enumeration."""
    idx = 0
    for i, v in zip(scope, config):
        r = mid.card(i)
        if not 0 <= v < r:
            raise ValueError(f"value {v} out of range for Y{i}")
        idx = idx * r + (r - 1 - v)
    return idx


def project_config(scope: Scope, config: Config, sub: Scope) -> Config:
    pos = {s: k for k, s in enumerate(scope)}
    return tuple(config[pos[s]] for s in sub)


def config_pairs_desc(scope: Scope, config: Config) -> tuple[tuple[int, int], ...]:
    """(index, value) pairs with indices descending, the display convention."""
    return tuple(sorted(zip(scope, config), reverse=True))


# -- symbolic parameterization ------------------------------------------------


def prob_param(mid: MID, i: int, value: int, parent_config: Config) -> Indeterminate:
    return Indeterminate.prob(i, value, config_pairs_desc(mid.pi(i), parent_config))


def util_param(mid: MID, j: int, arg_config: Config) -> Indeterminate:
    return Indeterminate.util(j, config_pairs_desc(mid.pset(j), arg_config))


def prob_vector(mid: MID, i: int) -> list[Indeterminate]:
    """p_i in canonical order over (own value, parents)."""
    if mid.kind(i) != CHANCE:
        raise ValueError(f"Y{i} is not a chance node")
    scope = tuple(sorted(mid.pi(i) + (i,)))
    out = []
    for cfg in config_iter(mid, scope):
        own = cfg[scope.index(i)]
        parent_cfg = project_config(scope, cfg, mid.pi(i))
        out.append(prob_param(mid, i, own, parent_cfg))
    return out


def psi_vector(mid: MID, j: int) -> list[Indeterminate]:
    """psi_j in canonical order over the utility node's arguments."""
    return [util_param(mid, j, cfg) for cfg in config_iter(mid, mid.pset(j))]


@dataclass(frozen=True)
class ParamVectors:
    p: dict[int, list[Indeterminate]] = field(default_factory=dict)
    psi: dict[int, list[Indeterminate]] = field(default_factory=dict)


def parameter_vectors(mid: MID) -> ParamVectors:
    return ParamVectors(
        p={i: prob_vector(mid, i) for i in mid.chance_nodes},
        psi={j: psi_vector(mid, j) for j in range(1, mid.m + 1)},
    )


def indeterminate_table(mid: MID) -> dict[str, Indeterminate]:
    """Canonical name -> indeterminate, for parsing spec and relation text."""
    table: dict[str, Indeterminate] = {"h": Indeterminate.interaction()}
    for j in range(1, mid.m + 1):
        table[f"k{j}"] = Indeterminate.weight(j)
        for ind in psi_vector(mid, j):
            table[ind.render()] = ind
    for i in mid.chance_nodes:
        for ind in prob_vector(mid, i):
            table[ind.render()] = ind
    return table
