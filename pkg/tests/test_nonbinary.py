"""Mixed cardinalities and numeric-weight paths (the fixtures are all binary,
the engine is not)."""

import random
from fractions import Fraction

import pytest

from midpoly import (
    CHANCE,
    DECISION,
    Indeterminate,
    check_structure,
    enumerate_policies,
    joint_eu_numeric,
    make_mid,
    predicted_structure,
    prob_vector,
    solve_h,
    symbolic_eu,
)
from midpoly.diagram import config_iter, prob_param
from midpoly.engine import Policy, policy_count
from midpoly.oracle import complete_numeric_spec

from helpers import ex1, policy_p1, random_policy


def random_cards_mid(rng, n_max=5):
    """Valid extensive diagram with cardinalities drawn from {1, 2, 3}."""
    from helpers import random_mid

    for _ in range(200):
        mid = random_mid(rng, n_max=n_max, max_policies=81)
        cards = tuple(rng.choice([1, 2, 3]) for _ in range(mid.n))
        candidate = make_mid(
            mid.kinds,
            cards,
            {i: list(mid.pi(i)) for i in range(1, mid.n + 1)},
            {j: list(mid.pset(j)) for j in range(1, mid.m + 1)},
        )
        if policy_count(candidate) <= 81:
            return candidate
    raise AssertionError("generation failed")


def mixed_spec(rng, mid):
    values = {}
    for i in mid.chance_nodes:
        for cfg in config_iter(mid, mid.pi(i)):
            weights = [rng.randint(1, 4) for _ in range(mid.card(i))]
            total = sum(weights)
            for y in range(mid.card(i)):
                values[prob_param(mid, i, y, cfg)] = Fraction(weights[y], total)
    from midpoly import psi_vector

    for j in range(1, mid.m + 1):
        for ind in psi_vector(mid, j):
            values[ind] = Fraction(rng.randint(0, 6), 6)
        values[Indeterminate.weight(j)] = Fraction(rng.randint(1, 9), 10)
    values[Indeterminate.interaction()] = Fraction(rng.choice([-7, 5, 11]), 10)
    return complete_numeric_spec(mid, values)


@pytest.mark.parametrize("seed", range(15))
def test_structure_conformance_mixed_cardinalities(seed):
    rng = random.Random(30_000 + seed)
    mid = random_cards_mid(rng)
    policy = random_policy(rng, mid)
    for additive in (False, True):
        trace = symbolic_eu(mid, policy, additive=additive)
        for i in range(1, mid.n + 1):
            rep = check_structure(
                trace.vectors[i], predicted_structure(mid, i, additive=additive)
            )
            assert rep.ok, (seed, i, additive, rep.first())


@pytest.mark.parametrize("seed", range(10))
def test_oracle_equivalence_mixed_cardinalities(seed):
    rng = random.Random(31_000 + seed)
    mid = random_cards_mid(rng)
    spec = mixed_spec(rng, mid)
    for policy in enumerate_policies(mid):
        symbolic = symbolic_eu(mid, policy).final.substitute(dict(spec)).constant_value()
        assert symbolic == joint_eu_numeric(mid, spec, policy)


def test_ternary_probability_vector_order():
    mid = make_mid([CHANCE, CHANCE], [2, 3], {2: [1]}, {1: [2]})
    assert [x.render() for x in prob_vector(mid, 2)] == [
        "p221", "p211", "p201", "p220", "p210", "p200",
    ]


def test_unit_cardinality_nodes_are_transparent():
    mid = make_mid(
        [DECISION, CHANCE, CHANCE],
        [1, 1, 2],
        {2: [1], 3: [1, 2]},
        {1: [3]},
    )
    policy = Policy.constant(mid, {1: 0})
    trace = symbolic_eu(mid, policy)
    # one block everywhere; the single-path chance nodes add degree only
    assert len(trace.vectors[1].entries) == 1
    assert policy_count(mid) == 1


def test_numeric_weights_fold_into_coefficients():
    mid_sym = ex1()
    k = (Fraction(2, 10), Fraction(2, 10), Fraction(4, 10))
    mid_num = make_mid(
        mid_sym.kinds,
        mid_sym.r,
        {i: list(mid_sym.pi(i)) for i in range(1, 7)},
        {j: list(mid_sym.pset(j)) for j in range(1, 4)},
        k=list(k),
        h=Fraction(9, 10),
    )
    pol = policy_p1(mid_sym)
    folded = symbolic_eu(mid_num, pol).final
    subs = {Indeterminate.weight(j): kj for j, kj in enumerate(k, start=1)}
    subs[Indeterminate.interaction()] = Fraction(9, 10)
    assert folded == symbolic_eu(mid_sym, pol).final.substitute(subs)
    assert not any(
        ind.kind in ("k", "h") for ind in folded.variables()
    )


def test_solved_interaction_constant_used_by_engine():
    mid = make_mid(
        [CHANCE, CHANCE],
        [2, 2],
        {2: [1]},
        {1: [1], 2: [2]},
        k=[Fraction(2, 5), Fraction(2, 5)],
        h="solve",
    )
    assert abs(mid.resolved_h() - Fraction(5, 4)) < Fraction(1, 10**9)
    trace = symbolic_eu(mid, Policy({}))
    subs = {Indeterminate.interaction(): mid.resolved_h()}
    reference = make_mid(
        mid.kinds, mid.r, {2: [1]}, {1: [1], 2: [2]},
        k=[Fraction(2, 5), Fraction(2, 5)], h=None,
    )
    expected = symbolic_eu(reference, Policy({})).final.substitute(subs)
    assert trace.final == expected


def test_additive_marker_means_zero_interaction():
    mid = make_mid(
        [CHANCE, CHANCE],
        [2, 2],
        {2: [1]},
        {1: [1], 2: [2]},
        k=[Fraction(1, 2), Fraction(1, 2)],
        h="additive",
    )
    final = symbolic_eu(mid, Policy({})).final
    assert all(ind.kind != "h" for ind in final.variables())
    # the structure prediction describes the symbolic parameterization
    symbolic = make_mid([CHANCE, CHANCE], [2, 2], {2: [1]}, {1: [1], 2: [2]})
    pred = predicted_structure(symbolic, 1, additive=True)
    assert check_structure(symbolic_eu(symbolic, Policy({}), additive=True).vectors[1], pred).ok