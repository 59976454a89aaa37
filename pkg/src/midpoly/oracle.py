"""Brute-force numeric evaluation used as ground truth for symbolic results.

The expected utility of a policy is computed straight from the definition:
enumerate every chance configuration, take the product of transition
probabilities along the path, fix decisions from the policy, and aggregate
the utility tables multiplicatively,

    U(y) = sum_{I in P0([m])} h^(|I|-1) * prod_{j in I} k_j * U_j(y_{P_j}),

with the additive sum when h = 0.  Exact rational arithmetic throughout;
this module never calls the symbolic evaluator.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Mapping

from .diagram import (
    CHANCE,
    DECISION,
    MID,
    Config,
    comp_b,
    comp_j,
    config_iter,
    project_config,
    prob_param,
    psi_vector,
    util_param,
)
from .engine import Policy, PolicySpaceTooLarge, enumerate_policies, policy_count
from .indet import Indeterminate
from .poly import MissingParameterError, to_fraction

NumericSpec = Mapping[Indeterminate, Fraction]


class SpecValidationError(ValueError):
    pass


def complete_numeric_spec(
    mid: MID, values: Mapping[Indeterminate, object], *, strict: bool = True
) -> dict[Indeterminate, Fraction]:
    """Fill each probability block's single missing entry via sum-to-one.

    With ``strict`` the result must cover every probability, utility and
    weight of the diagram and satisfy the range and sum-to-one constraints.
    """
    spec: dict[Indeterminate, Fraction] = {
        ind: to_fraction(v) for ind, v in values.items()  # type: ignore[arg-type]
    }
    missing: list[Indeterminate] = []
    for i in mid.chance_nodes:
        for parent_cfg in config_iter(mid, mid.pi(i)):
            block = [prob_param(mid, i, y, parent_cfg) for y in range(mid.card(i))]
            absent = [b for b in block if b not in spec]
            if len(absent) == 1:
                spec[absent[0]] = 1 - sum(spec[b] for b in block if b in spec)
            elif absent and strict:
                missing.extend(absent)
            if all(b in spec for b in block):
                total = sum(spec[b] for b in block)
                if total != 1:
                    raise SpecValidationError(
                        f"probabilities of Y{i} given {parent_cfg} sum to {total}, not 1"
                    )
                for b in block:
                    if not 0 <= spec[b] <= 1:
                        raise SpecValidationError(f"{b.render()}={spec[b]} outside [0,1]")
    for j in range(1, mid.m + 1):
        kj = Indeterminate.weight(j)
        if kj not in spec and mid.k[j - 1] is not None:
            spec[kj] = mid.k[j - 1]  # type: ignore[assignment]
        if kj in spec and not 0 < spec[kj] < 1:
            raise SpecValidationError(f"k{j}={spec[kj]} outside (0,1)")
        for ind in psi_vector(mid, j):
            if ind in spec and not 0 <= spec[ind] <= 1:
                raise SpecValidationError(f"{ind.render()}={spec[ind]} outside [0,1]")
            if ind not in spec and strict:
                missing.append(ind)
        if kj not in spec and strict:
            missing.append(kj)
    h_ind = Indeterminate.interaction()
    if h_ind not in spec:
        resolved = mid.resolved_h()
        if resolved is not None:
            spec[h_ind] = resolved
        elif strict:
            missing.append(h_ind)
    if strict and missing:
        raise MissingParameterError(missing)
    return spec


def _utility_aggregate(mid: MID, spec: NumericSpec, path: Config) -> Fraction:
    h = spec[Indeterminate.interaction()]
    full_scope = tuple(range(1, mid.n + 1))
    ku = []
    for j in range(1, mid.m + 1):
        arg = project_config(full_scope, path, mid.pset(j))
        ku.append(spec[Indeterminate.weight(j)] * spec[util_param(mid, j, arg)])
    if h == 0:
        return sum(ku, Fraction(0))
    total = Fraction(0)
    for size in range(1, mid.m + 1):
        for subset in itertools.combinations(range(mid.m), size):
            prod = h ** (size - 1)
            for j in subset:
                prod *= ku[j]
            total += prod
    return total


def _path_probability(mid: MID, spec: NumericSpec, path: Config) -> Fraction:
    full_scope = tuple(range(1, mid.n + 1))
    prob = Fraction(1)
    for i in mid.chance_nodes:
        parent_cfg = project_config(full_scope, path, mid.pi(i))
        prob *= spec[prob_param(mid, i, path[i - 1], parent_cfg)]
    return prob


def joint_eu_numeric(mid: MID, spec: NumericSpec, policy: Policy) -> Fraction:
    """Expected utility of the policy by exhaustive path enumeration."""
    full_scope = tuple(range(1, mid.n + 1))
    total = Fraction(0)
    chance = mid.chance_nodes
    for chance_cfg in config_iter(mid, chance):
        values: dict[int, int] = dict(zip(chance, chance_cfg))
        for d in mid.decision_nodes:
            dom = Policy.domain(mid, d)
            block = tuple(values[s] for s in dom)
            values[d] = policy.action(mid, d, block)
        path = tuple(values[i] for i in full_scope)
        prob = _path_probability(mid, spec, path)
        if prob:
            total += prob * _utility_aggregate(mid, spec, path)
    return total


def stage_eu_numeric(
    mid: MID, spec: NumericSpec, stage: int, policy: Policy | None = None
) -> list[Fraction]:
    """Stage-restricted expected utilities over comp_b(mid, stage).

    Aggregates only the utility nodes anchored at or after ``stage`` and
    enumerates the variables from ``stage`` to n; interior decisions require
    a policy.
    """
    js = comp_j(mid)
    utilities = [j for j, anchor in enumerate(js, start=1) if anchor >= stage]
    h = spec[Indeterminate.interaction()]
    scope = comp_b(mid, stage)
    tail = tuple(range(stage, mid.n + 1))
    out: list[Fraction] = []
    for cfg in config_iter(mid, scope):
        known = dict(zip(scope, cfg))
        total = Fraction(0)
        tail_chance = tuple(i for i in tail if mid.kind(i) == CHANCE)
        for tail_cfg in config_iter(mid, tail_chance):
            values = dict(known)
            values.update(zip(tail_chance, tail_cfg))
            for d in tail:
                if mid.kind(d) == DECISION:
                    if policy is None:
                        raise _policy_required(d)
                    dom = Policy.domain(mid, d)
                    values[d] = policy.action(mid, d, tuple(values[s] for s in dom))
            prob = Fraction(1)
            for i in tail_chance:
                parent_cfg = tuple(values[s] for s in mid.pi(i))
                prob *= spec[prob_param(mid, i, values[i], parent_cfg)]
            if not prob:
                continue
            ku = []
            for j in utilities:
                arg = tuple(values[s] for s in mid.pset(j))
                ku.append(spec[Indeterminate.weight(j)] * spec[util_param(mid, j, arg)])
            agg = Fraction(0)
            for size in range(1, len(ku) + 1):
                for subset in itertools.combinations(range(len(ku)), size):
                    prod = h ** (size - 1)  # 0**0 == 1 covers the additive case
                    for idx in subset:
                        prod *= ku[idx]
                    agg += prod
            total += prob * agg
        out.append(total)
    return out


def _policy_required(d: int) -> Exception:
    from .engine import PolicyError

    return PolicyError(f"a policy is required for interior decision Y{d}")


# -- optimal policies -----------------------------------------------------------


class UnobservableDomainError(ValueError):
    pass


def require_observable_domains(mid: MID) -> None:
    """Policy domains must lie inside the decisions' observed parent sets.

    On a diagram that is not in extensive form a relevance scope can contain
    a variable the decision maker never sees; optimizing over such policies
    would grant clairvoyance.  Convert the diagram first in that case.
    """
    for d in mid.decision_nodes:
        domain = comp_b(mid, d)
        hidden = [s for s in domain if s not in mid.pi(d)]
        if hidden:
            raise UnobservableDomainError(
                f"decision Y{d} would condition on unobserved "
                f"{['Y%d' % s for s in hidden]}; bring the diagram to "
                "extensive form before optimizing"
            )


def numeric_backward(
    mid: MID, spec: NumericSpec
) -> tuple[Policy, Fraction]:
    """Numeric dynamic program mirroring the stage recursion.

    Ties at a decision block break toward the lowest action index.
    """
    require_observable_domains(mid)
    h = spec[Indeterminate.interaction()]
    anchors = {anchor: j for j, anchor in enumerate(comp_j(mid), start=1)}
    values: dict[Config, Fraction] = {(): Fraction(0)}
    scope: tuple[int, ...] = ()
    chosen: dict[int, dict[Config, int]] = {}
    for stage in range(mid.n, 0, -1):
        if stage in anchors:
            j = anchors[stage]
            new_scope = tuple(sorted(set(scope) | set(mid.pset(j))))
            new_values = {}
            for cfg in config_iter(mid, new_scope):
                u_val = values[project_config(new_scope, cfg, scope)]
                arg = project_config(new_scope, cfg, mid.pset(j))
                kpsi = spec[Indeterminate.weight(j)] * spec[util_param(mid, j, arg)]
                new_values[cfg] = h * kpsi * u_val + kpsi + u_val
            values, scope = new_values, new_scope
        if mid.kind(stage) == DECISION:
            if stage not in scope:
                chosen[stage] = {
                    cfg: 0 for cfg in config_iter(mid, Policy.domain(mid, stage))
                }
                continue
            block_scope = tuple(s for s in scope if s != stage)
            new_values = {}
            chosen[stage] = {}
            for cfg in config_iter(mid, block_scope):
                best_a, best_v = None, None
                for a in range(mid.card(stage)):
                    full = tuple(
                        a if s == stage else cfg[block_scope.index(s)] for s in scope
                    )
                    v = values[full]
                    if best_v is None or v > best_v or (v == best_v and a < best_a):
                        best_a, best_v = a, v
                chosen[stage][cfg] = best_a
                new_values[cfg] = best_v
            values, scope = new_values, block_scope
        else:
            union = tuple(sorted(set(scope) | set(mid.pi(stage)) | {stage}))
            block_scope = union[:-1]
            new_values = {}
            for cfg in config_iter(mid, block_scope):
                acc = Fraction(0)
                for y in range(mid.card(stage)):
                    full = tuple(
                        y if s == stage else cfg[block_scope.index(s)] for s in union
                    )
                    parent_cfg = project_config(union, full, mid.pi(stage))
                    p = spec[prob_param(mid, stage, y, parent_cfg)]
                    acc += p * values[project_config(union, full, scope)]
                new_values[cfg] = acc
            values, scope = new_values, block_scope
        if scope != comp_b(mid, stage):
            raise AssertionError(f"numeric scope law violated at stage {stage}")
    return Policy(chosen), values[()]


def optimal_policy_numeric(
    mid: MID, spec: NumericSpec, cap: int = 10**6
) -> tuple[Policy, Fraction]:
    """Exhaustive argmax cross-checked against the dynamic program."""
    require_observable_domains(mid)
    if policy_count(mid) > cap:
        raise PolicySpaceTooLarge(policy_count(mid), cap)
    best_policy: Policy | None = None
    best_value: Fraction | None = None
    for pol in enumerate_policies(mid, cap):
        v = joint_eu_numeric(mid, spec, pol)
        if best_value is None or v > best_value:
            best_policy, best_value = pol, v
    dp_policy, dp_value = numeric_backward(mid, spec)
    if dp_value != best_value:
        raise AssertionError(
            f"dynamic program ({dp_value}) disagrees with enumeration ({best_value})"
        )
    return dp_policy, dp_value
