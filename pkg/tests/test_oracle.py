"""Brute-force oracle: ground truth for every symbolic expected utility."""

import random
from fractions import Fraction

import pytest

from midpoly import (
    CHANCE,
    DECISION,
    Indeterminate,
    Policy,
    complete_numeric_spec,
    enumerate_policies,
    joint_eu_numeric,
    make_mid,
    numeric_backward,
    optimal_policy_numeric,
    stage_eu_numeric,
    symbolic_eu,
)
from midpoly.diagram import prob_param
from midpoly.poly import MissingParameterError

from helpers import ex1, policy_p1, random_full_spec, random_mid, random_policy


def spec_c_full(mid):
    """The complete worked elicitation extended to the stage-1..4 parameters."""
    from midpoly.diagram import indeterminate_table

    tbl = indeterminate_table(mid)
    raw = {
        "p6111": "0.3", "p6110": "0.2", "p6101": "0.2", "p6100": "0.3",
        "p5111": "0.7", "p5110": "0.2", "p5101": "0.9", "p5100": "0.6",
        "psi311": "0", "psi310": "0.4", "psi301": "0.8", "psi300": "1",
        "psi21": "0", "psi20": "1", "psi11": "0.5", "psi10": "0.1",
        "p211": "0.25", "p210": "0.75",
        "p3111": "0.5", "p3110": "0.6", "p3101": "0.4", "p3100": "0.3",
        "k1": "0.2", "k2": "0.2", "k3": "0.4", "h": "0.9",
    }
    return complete_numeric_spec(mid, {tbl[k]: Fraction(v) for k, v in raw.items()})


def test_degenerate_distribution_returns_path_utility():
    mid = make_mid([CHANCE, CHANCE], [2, 2], {2: [1]}, {1: [2]})
    values = {
        prob_param(mid, 1, 1, ()): Fraction(1),
        prob_param(mid, 2, 1, (1,)): Fraction(1),
        prob_param(mid, 2, 1, (0,)): Fraction(0),
        Indeterminate.util(1, ((2, 1),)): Fraction(3, 4),
        Indeterminate.util(1, ((2, 0),)): Fraction(1, 9),
        Indeterminate.weight(1): Fraction(1, 2),
        Indeterminate.interaction(): Fraction(1, 2),
    }
    spec = complete_numeric_spec(mid, values)
    assert joint_eu_numeric(mid, spec, Policy({})) == Fraction(1, 2) * Fraction(3, 4)


@pytest.mark.parametrize("seed", range(6))
def test_additive_case_is_linear(seed):
    """With h = 0 the EU is the weighted sum of per-attribute expectations."""
    from midpoly.diagram import config_iter, project_config, util_param

    rng = random.Random(seed)
    mid = random_mid(rng, n_max=5, max_policies=16)
    spec = random_full_spec(rng, mid, additive=True)
    pol = random_policy(rng, mid)
    full = tuple(range(1, mid.n + 1))
    expectations = [Fraction(0)] * mid.m
    for chance_cfg in config_iter(mid, mid.chance_nodes):
        values = dict(zip(mid.chance_nodes, chance_cfg))
        for d in mid.decision_nodes:
            block = tuple(values[s] for s in Policy.domain(mid, d))
            values[d] = pol.action(mid, d, block)
        path = tuple(values[i] for i in full)
        prob = Fraction(1)
        for i in mid.chance_nodes:
            prob *= spec[prob_param(mid, i, path[i - 1], project_config(full, path, mid.pi(i)))]
        for j in range(1, mid.m + 1):
            arg = project_config(full, path, mid.pset(j))
            expectations[j - 1] += prob * spec[util_param(mid, j, arg)]
    weighted = sum(
        spec[Indeterminate.weight(j)] * expectations[j - 1] for j in range(1, mid.m + 1)
    )
    assert joint_eu_numeric(mid, spec, pol) == weighted


def test_stage5_restricted_values():
    mid = ex1()
    spec = spec_c_full(mid)
    vals = stage_eu_numeric(mid, spec, 5)
    assert vals == [
        Fraction(9607, 31250),     # 0.307424
        Fraction(23469, 62500),    # 0.375504
        Fraction(6976, 15625),     # 0.446464
        Fraction(6969, 15625),     # 0.446016
    ]


def test_stage5_matches_substituted_symbolic():
    mid = ex1()
    spec = spec_c_full(mid)
    trace = symbolic_eu(mid, policy_p1(mid))
    subbed = [e.substitute(dict(spec)).constant_value() for e in trace.vectors[5].entries]
    assert subbed == stage_eu_numeric(mid, spec, 5)


def test_optimal_policy_on_worked_example():
    mid = ex1()
    spec = spec_c_full(mid)
    policy, value = optimal_policy_numeric(mid, spec)
    assert policy.actions[4] == {(1,): 0, (0,): 1}  # Y4 = 1 iff y3 = 0
    assert value == joint_eu_numeric(mid, spec, policy)


def test_indicator_utility_selects_indicated_action():
    mid = make_mid([DECISION], [2], {}, {1: [1]})
    values = {
        Indeterminate.util(1, ((1, 1),)): Fraction(1),
        Indeterminate.util(1, ((1, 0),)): Fraction(0),
        Indeterminate.weight(1): Fraction(1, 2),
        Indeterminate.interaction(): Fraction(0),
    }
    spec = complete_numeric_spec(mid, values)
    policy, value = optimal_policy_numeric(mid, spec)
    assert policy.actions[1] == {(): 1}
    assert value == Fraction(1, 2)


def test_tie_break_lowest_action():
    mid = make_mid([DECISION], [2], {}, {1: [1]})
    values = {
        Indeterminate.util(1, ((1, 1),)): Fraction(1, 2),
        Indeterminate.util(1, ((1, 0),)): Fraction(1, 2),
        Indeterminate.weight(1): Fraction(1, 2),
        Indeterminate.interaction(): Fraction(0),
    }
    spec = complete_numeric_spec(mid, values)
    policy, _ = optimal_policy_numeric(mid, spec)
    assert policy.actions[1] == {(): 0}


@pytest.mark.parametrize("seed", range(10))
def test_dp_agrees_with_enumeration(seed):
    rng = random.Random(40 + seed)
    mid = random_mid(rng, n_max=5, max_policies=64)
    spec = random_full_spec(rng, mid)
    dp_policy, dp_value = numeric_backward(mid, spec)
    best = max(joint_eu_numeric(mid, spec, p) for p in enumerate_policies(mid))
    assert dp_value == best
    assert joint_eu_numeric(mid, spec, dp_policy) == best


@pytest.mark.parametrize("seed", range(10))
def test_symbolic_matches_oracle(seed):
    rng = random.Random(70 + seed)
    mid = random_mid(rng, n_max=5, max_policies=16)
    spec = random_full_spec(rng, mid)
    for pol in enumerate_policies(mid):
        symbolic = symbolic_eu(mid, pol).final.substitute(dict(spec)).constant_value()
        assert symbolic == joint_eu_numeric(mid, spec, pol)


def test_utility_scaling_monotonicity():
    rng = random.Random(5)
    mid = random_mid(rng, n_max=5, max_policies=16)
    spec = random_full_spec(rng, mid, additive=True)
    c = Fraction(3, 7)
    scaled = dict(spec)
    for ind in list(scaled):
        if ind.kind == "psi":
            scaled[ind] = scaled[ind] * c
    values = [(joint_eu_numeric(mid, spec, p), joint_eu_numeric(mid, scaled, p))
              for p in enumerate_policies(mid)]
    assert all(sv == v * c for v, sv in values)


def test_incomplete_spec_lists_missing():
    mid = ex1()
    with pytest.raises(MissingParameterError) as err:
        complete_numeric_spec(mid, {})
    assert err.value.missing
