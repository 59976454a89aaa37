"""Symbolic backward induction over a multiplicative influence diagram.

The evaluator folds the diagram from Y_n down to Y_1 with three vector
operations:

  multi-sum        fold a utility node whose last argument was reached:
                   h*k_j*(u o psi_j) + k_j*psi_j + u  over the aligned scope;
  marginalization  eliminate a chance node: align with its probability
                   vector, multiply elementwise, sum each block of r_i;
  maximization     select one entry per surviving block of a decision node
                   according to an explicit policy.

Every vector is indexed in the canonical configuration order of its scope,
so the eliminated or selected variable always occupies the fastest axis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from .diagram import (
    CHANCE,
    DECISION,
    MID,
    Config,
    Scope,
    comp_b,
    comp_j,
    config_count,
    config_index,
    config_iter,
    decision_sequence,
    is_extensive_form,
    project_config,
    prob_vector,
    psi_vector,
    require_valid,
)
from .indet import Indeterminate
from .poly import Polynomial

# (entry polynomial, scope, row configuration) -> filtered polynomial
MonomialFilter = Callable[[Polynomial, Scope, Config], Polynomial]


@dataclass(frozen=True)
class EUVector:
    """Expected-utility polynomials indexed by configurations of ``scope``."""

    scope: Scope
    entries: tuple[Polynomial, ...]

    def __post_init__(self) -> None:
        if list(self.scope) != sorted(self.scope):
            raise ValueError(f"scope must be ascending, got {self.scope}")

    def entry(self, mid: MID, config: Config) -> Polynomial:
        return self.entries[config_index(mid, self.scope, config)]

    def structure_summaries(self) -> list[dict[int, tuple[int, bool]]]:
        return [e.structure_summary() for e in self.entries]


class PolicyError(KeyError):
    pass


@dataclass(frozen=True)
class Policy:
    """For each decision node, an action per configuration of its domain.

    The domain of decision i is the surviving scope comp_b(mid, i): exactly
    the block index of the vector the maximization selects from.
    """

    actions: Mapping[int, Mapping[Config, int]]

    @staticmethod
    def domain(mid: MID, i: int) -> Scope:
        return comp_b(mid, i)

    def action(self, mid: MID, i: int, block: Config) -> int:
        try:
            per_block = self.actions[i]
        except KeyError:
            raise PolicyError(f"policy has no entry for decision Y{i}") from None
        try:
            a = per_block[tuple(block)]
        except KeyError:
            raise PolicyError(
                f"policy for Y{i} is missing block {tuple(block)}"
            ) from None
        if not 0 <= a < mid.card(i):
            raise PolicyError(f"policy action {a} out of range for Y{i}")
        return a

    @staticmethod
    def constant(mid: MID, choices: Mapping[int, int]) -> "Policy":
        actions = {
            d: {cfg: choices[d] for cfg in config_iter(mid, Policy.domain(mid, d))}
            for d in mid.decision_nodes
        }
        return Policy(actions)


@dataclass
class OpRecord:
    stage: int
    op: str  # "multisum" | "marginalize" | "maximize"
    detail: dict = field(default_factory=dict)


@dataclass
class EvaluationTrace:
    """All stage vectors of one backward pass plus the operation log."""

    mid: MID
    vectors: dict[int, EUVector]
    ops: list[OpRecord]

    @property
    def final(self) -> Polynomial:
        return self.vectors[1].entries[0]


class NotExtensiveError(ValueError):
    pass


# -- scope alignment ----------------------------------------------------------


def align_scopes(
    mid: MID,
    u: EUVector,
    v: EUVector,
) -> tuple[EUVector, EUVector, Scope]:
    """Replicate both vectors onto the union scope.

    Each output entry equals the input entry at the projection of the union
    configuration onto the original scope; this is the duplication step of
    the written algorithm, done for psi- and p-alignment alike.
    """
    union = tuple(sorted(set(u.scope) | set(v.scope)))
    if union == u.scope == v.scope:
        return u, v, union
    u_out = []
    v_out = []
    for cfg in config_iter(mid, union):
        u_out.append(u.entry(mid, project_config(union, cfg, u.scope)))
        v_out.append(v.entry(mid, project_config(union, cfg, v.scope)))
    return (
        EUVector(union, tuple(u_out)),
        EUVector(union, tuple(v_out)),
        union,
    )


def _weight_poly(mid: MID, j: int) -> Polynomial:
    kj = mid.k[j - 1]
    if kj is None:
        return Polynomial.var(Indeterminate.weight(j))
    return Polynomial.const(kj)


def _interaction_poly(mid: MID, additive: bool) -> Polynomial:
    if additive:
        return Polynomial.zero()
    h = mid.resolved_h()
    if h is None:
        return Polynomial.var(Indeterminate.interaction())
    return Polynomial.const(h)


# -- the three operations -------------------------------------------------------


def eu_multisum(
    mid: MID,
    u: EUVector,
    j: int,
    *,
    additive: bool = False,
    prune: MonomialFilter | None = None,
) -> EUVector:
    """Fold utility node U_j into the running expected utility."""
    if not 1 <= j <= mid.m:
        raise ValueError(f"utility index {j} out of range")
    psi = EUVector(mid.pset(j), tuple(Polynomial.var(x) for x in psi_vector(mid, j)))
    u2, psi2, union = align_scopes(mid, u, psi)
    kj = _weight_poly(mid, j)
    hk = _interaction_poly(mid, additive) * kj
    entries = []
    for cfg, a, b in zip(config_iter(mid, union), u2.entries, psi2.entries):
        e = hk * (a * b) + kj * b + a
        entries.append(prune(e, union, cfg) if prune else e)
    return EUVector(union, tuple(entries))


def eu_marginalize(
    mid: MID,
    u: EUVector,
    i: int,
    *,
    prune: MonomialFilter | None = None,
) -> EUVector:
    """Eliminate chance node Y_i; the new scope is comp_b(mid, i)."""
    if mid.kind(i) != CHANCE:
        raise ValueError(f"Y{i} is not a chance node")
    pvec = EUVector(
        tuple(sorted(mid.pi(i) + (i,))),
        tuple(Polynomial.var(x) for x in prob_vector(mid, i)),
    )
    u2, p2, union = align_scopes(mid, u, pvec)
    if union[-1] != i:
        raise ValueError(f"Y{i} must carry the highest index of the union scope")
    r = mid.card(i)
    result_scope = union[:-1]
    entries = []
    for block, cfg in zip(range(len(u2.entries) // r), config_iter(mid, result_scope)):
        acc = Polynomial.zero()
        for off in range(r):
            acc = acc + u2.entries[block * r + off] * p2.entries[block * r + off]
        entries.append(prune(acc, result_scope, cfg) if prune else acc)
    return EUVector(result_scope, tuple(entries))


def eu_maximize(mid: MID, u: EUVector, i: int, policy: Policy) -> EUVector:
    """Select the policy's action in each block of decision node Y_i.

    Entry polynomials are unchanged; only the dimension drops.  When Y_i is
    absent from the scope the decision cannot influence the expected utility
    and the vector passes through unchanged.
    """
    if mid.kind(i) != DECISION:
        raise ValueError(f"Y{i} is not a decision node")
    if i not in u.scope:
        return u
    if u.scope[-1] != i:
        raise ValueError(f"Y{i} must carry the highest index of the scope")
    r = mid.card(i)
    block_scope = u.scope[:-1]
    entries = []
    for block_idx, block_cfg in enumerate(config_iter(mid, block_scope)):
        a = policy.action(mid, i, block_cfg)
        entries.append(u.entries[block_idx * r + (r - 1 - a)])
    return EUVector(block_scope, tuple(entries))


# -- the backward pass ----------------------------------------------------------


def backward_pass(
    mid: MID,
    policy: Policy | None,
    *,
    down_to: int = 1,
    additive: bool = False,
    check_extensive: bool = True,
    prune: MonomialFilter | None = None,
    store: Callable[[int, EUVector], EUVector] | None = None,
) -> EvaluationTrace:
    """Run the stage loop from Y_n down to ``down_to``.

    ``prune`` filters monomials as they are produced (asymmetric runs);
    ``store`` post-processes the copy kept in the trace without affecting
    the recursion.
    """
    require_valid(mid)
    decision_sequence(mid)  # raises when utility anchors are ill-ordered
    if check_extensive and not is_extensive_form(mid):
        raise NotExtensiveError(
            "diagram is not in extensive form; convert it first (see transforms)"
        )
    anchors = {anchor: j for j, anchor in enumerate(comp_j(mid), start=1)}
    u = EUVector((), (Polynomial.zero(),))
    vectors: dict[int, EUVector] = {mid.n + 1: u}
    ops: list[OpRecord] = []
    for stage in range(mid.n, down_to - 1, -1):
        if stage in anchors:
            j = anchors[stage]
            u = eu_multisum(mid, u, j, additive=additive, prune=prune)
            ops.append(OpRecord(stage, "multisum", {"utility": j, "dim": len(u.entries)}))
        if mid.kind(stage) == DECISION:
            if policy is None:
                raise PolicyError(f"a policy is required to process decision Y{stage}")
            u = eu_maximize(mid, u, stage, policy)
            ops.append(OpRecord(stage, "maximize", {"dim": len(u.entries)}))
        else:
            u = eu_marginalize(mid, u, stage, prune=prune)
            ops.append(OpRecord(stage, "marginalize", {"dim": len(u.entries)}))
        expected_scope = comp_b(mid, stage)
        if u.scope != expected_scope:
            raise AssertionError(
                f"scope law violated at stage {stage}: {u.scope} != {expected_scope}"
            )
        vectors[stage] = store(stage, u) if store else u
    return EvaluationTrace(mid, vectors, ops)


def symbolic_eu(
    mid: MID,
    policy: Policy,
    *,
    additive: bool = False,
    check_extensive: bool = True,
) -> EvaluationTrace:
    """Full symbolic evaluation; the stage-1 entry is the policy's EU."""
    return backward_pass(
        mid, policy, additive=additive, check_extensive=check_extensive
    )


# -- policy enumeration ---------------------------------------------------------


class PolicySpaceTooLarge(ValueError):
    def __init__(self, count: int, cap: int):
        self.count = count
        super().__init__(f"policy space has {count} elements, above the cap {cap}")


def policy_count(mid: MID) -> int:
    total = 1
    for d in mid.decision_nodes:
        total *= mid.card(d) ** config_count(mid, Policy.domain(mid, d))
    return total


def enumerate_policies(mid: MID, cap: int = 10**6) -> Iterator[Policy]:
    """All total policies, lexicographic by (decision, block, action)."""
    count = policy_count(mid)
    if count > cap:
        raise PolicySpaceTooLarge(count, cap)
    slots: list[tuple[int, Config]] = []
    for d in mid.decision_nodes:
        for cfg in config_iter(mid, Policy.domain(mid, d)):
            slots.append((d, cfg))
    ranges = [range(mid.card(d)) for d, _ in slots]
    for choice in itertools.product(*ranges):
        actions: dict[int, dict[Config, int]] = {d: {} for d in mid.decision_nodes}
        for (d, cfg), a in zip(slots, choice):
            actions[d][cfg] = a
        yield Policy(actions)
