"""Shared fixtures: the two reference diagrams, random diagram and
specification generators used by the property suites."""

from __future__ import annotations

import random
from fractions import Fraction

from midpoly import (
    CHANCE,
    DECISION,
    Indeterminate,
    MID,
    Policy,
    complete_numeric_spec,
    make_mid,
    psi_vector,
    validate,
)
from midpoly.engine import policy_count


def ex1() -> MID:
    return make_mid(
        kinds=[DECISION, CHANCE, CHANCE, DECISION, CHANCE, CHANCE],
        r=[2] * 6,
        parents={2: [1], 3: [1, 2], 4: [1, 2, 3], 5: [3, 4], 6: [4, 5]},
        util_parents={1: [3], 2: [5], 3: [4, 6]},
    )


def ex2() -> MID:
    return make_mid(
        kinds=[DECISION, CHANCE, CHANCE, DECISION, CHANCE, CHANCE],
        r=[2] * 6,
        parents={2: [1], 3: [1, 2], 4: [1, 3], 5: [3, 4], 6: [4, 5]},
        util_parents={1: [3], 2: [5], 3: [4, 6]},
    )


def policy_p1(mid: MID) -> Policy:
    """Y1 = 1; Y4 = 1 exactly when y3 = 1 (the worked maximization)."""
    return Policy({1: {(): 1}, 4: {(1,): 1, (0,): 0}})


def policy_p2(mid: MID) -> Policy:
    """Y1 = 0; Y4 = 0 exactly when y3 = 1 (the asymmetric example's choice)."""
    return Policy({1: {(): 0}, 4: {(1,): 0, (0,): 1}})


def random_mid(
    rng: random.Random,
    *,
    n_max: int = 7,
    m_max: int = 3,
    chance_only: bool = False,
    max_policies: int | None = None,
) -> MID:
    """A valid extensive-form binary diagram; rejection-samples until clean."""
    for _ in range(400):
        n = rng.randint(2, n_max)
        kinds = [
            CHANCE if chance_only or rng.random() < 0.7 else DECISION
            for _ in range(n)
        ]
        m = rng.randint(1, min(m_max, n))
        anchors = sorted(rng.sample(range(1, n), m - 1)) + [n] if m > 1 else [n]
        used: set[int] = set()
        util_parents: dict[int, list[int]] = {}
        ok = True
        for j, anchor in enumerate(anchors, start=1):
            if anchor in used:
                ok = False
                break
            ps = {anchor}
            for cand in range(1, anchor):
                if cand not in used and rng.random() < 0.25:
                    ps.add(cand)
            used |= ps
            util_parents[j] = sorted(ps)
        if not ok:
            continue
        parents: dict[int, list[int]] = {}
        for i in range(1, n + 1):
            if kinds[i - 1] == DECISION:
                parents[i] = list(range(1, i))
            else:
                parents[i] = [p for p in range(1, i) if rng.random() < 0.45]
        mid = make_mid(kinds, [2] * n, parents, util_parents)
        # repair childless interior nodes
        for i in range(1, n):
            if mid.children(i) or mid.utility_children(i):
                continue
            chance_after = [k for k in range(i + 1, n + 1) if kinds[k - 1] == CHANCE]
            if chance_after:
                parents[rng.choice(chance_after)].append(i)
            else:
                ok = False
                break
        if not ok:
            continue
        mid = make_mid(kinds, [2] * n, parents, util_parents)
        if any(d.severity == "error" for d in validate(mid)):
            continue
        if max_policies is not None and policy_count(mid) > max_policies:
            continue
        return mid
    raise AssertionError("random diagram generation kept failing")


def random_full_spec(rng: random.Random, mid: MID, *, additive: bool = False):
    """Exact random numeric specification covering every parameter."""
    from midpoly.diagram import config_iter, prob_param

    values: dict[Indeterminate, Fraction] = {}
    for i in mid.chance_nodes:
        for cfg in config_iter(mid, mid.pi(i)):
            weights = [rng.randint(1, 5) for _ in range(mid.card(i))]
            total = sum(weights)
            for y in range(mid.card(i)):
                values[prob_param(mid, i, y, cfg)] = Fraction(weights[y], total)
    for j in range(1, mid.m + 1):
        for ind in psi_vector(mid, j):
            values[ind] = Fraction(rng.randint(0, 8), 8)
        values[Indeterminate.weight(j)] = Fraction(rng.randint(1, 9), 10)
    if additive:
        values[Indeterminate.interaction()] = Fraction(0)
    else:
        values[Indeterminate.interaction()] = Fraction(rng.choice([-9, -5, 3, 7, 9, 15]), 10)
    return complete_numeric_spec(mid, values)


def random_policy(rng: random.Random, mid: MID) -> Policy:
    from midpoly.diagram import config_iter

    actions = {}
    for d in mid.decision_nodes:
        actions[d] = {
            cfg: rng.randrange(mid.card(d))
            for cfg in config_iter(mid, Policy.domain(mid, d))
        }
    return Policy(actions)
