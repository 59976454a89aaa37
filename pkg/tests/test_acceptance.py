"""Acceptance gate: one test per criterion, exact tolerances pinned.

Run ``python3 tests/test_acceptance.py`` (or ``pytest -s`` on this file) to
see one pass/fail line per criterion.  Two sub-criteria assert figures whose
published sources are internally inconsistent; they fail by design and the
analysis lives in notes/decisions.md (they are the only expected failures).
"""

import random
import sys
import time
from fractions import Fraction

import pytest

from midpoly import (
    Asymmetry,
    Policy,
    Polynomial,
    SubstitutionSpec,
    apply_asymmetries,
    apply_spec,
    apply_sufficiency,
    check_structure,
    comp_b,
    comp_j,
    decision_sequence,
    enumerate_policies,
    is_extensive_form,
    joint_eu_numeric,
    map_policy,
    multiplication_count,
    parse_polynomial,
    predicted_structure,
    preferred_action_table,
    resolve_spec,
    reverse_arc,
    remove_barren,
    sufficiency_removable,
    symbolic_eu,
    symbolic_eu_asymmetric,
    to_extensive_form,
)
from midpoly.diagram import CHANCE, DECISION, config_iter, indeterminate_table
from midpoly.transforms import TransformError, is_father

from helpers import (
    ex1,
    ex2,
    policy_p1,
    policy_p2,
    random_full_spec,
    random_mid,
    random_policy,
)
from test_asymmetry import EXAMPLE_ASYMMETRIES

F = Fraction
LEDGER = "documented defect in the published figures; analysis in notes/decisions.md"


def report(tag: str, detail: str) -> None:
    print(f"ACCEPTANCE {tag}: PASS  {detail}", flush=True)


def test_a01_fixture_combinatorics():
    start = time.monotonic()
    mid1, mid2 = ex1(), ex2()
    assert comp_j(mid1) == (3, 5, 6)
    assert comp_b(mid1, 5) == (3, 4)
    assert comp_b(mid1, 4) == (3,)
    assert decision_sequence(mid1).render() == "(Y1,Y2,Y3,U1,Y4,Y5,U2,Y6,U3)"
    assert is_extensive_form(mid1)
    assert not is_extensive_form(mid2)
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    report("A1", f"combinatorics exact in {elapsed:.3f}s")


def test_a02_stage5_vector_matches_published_rows():
    mid = ex1()
    names = indeterminate_table(mid)
    u5 = symbolic_eu(mid, policy_p1(mid)).vectors[5]
    assert len(u5.entries) == 4
    for (y3, y4) in config_iter(mid, (3, 4)):
        rows = [
            f"k2*(psi21*p51{y4}{y3} + psi20*p50{y4}{y3})",
            f"k3*(psi31{y4}*p611{y4} + psi30{y4}*p601{y4})*p51{y4}{y3}"
            f" + k3*(psi31{y4}*p610{y4} + psi30{y4}*p600{y4})*p50{y4}{y3}",
            f"h*k2*k3*((psi31{y4}*p610{y4} + psi30{y4}*p600{y4})*psi20*p50{y4}{y3}"
            f" + (psi31{y4}*p611{y4} + psi30{y4}*p601{y4})*psi21*p51{y4}{y3})",
        ]
        expected = Polynomial.zero()
        for row in rows:
            expected = expected + parse_polynomial(row, names)
        assert u5.entry(mid, (y3, y4)) == expected
        assert u5.entry(mid, (y3, y4)).structure_summary() == {
            3: (2, True), 4: (4, True), 7: (4, True),
        }
    report("A2", "stage-5 entries equal the three published row polynomials")


def test_a03_stage1_histograms():
    start = time.monotonic()
    mid = ex2()
    trace = symbolic_eu(mid, policy_p1(mid), check_extensive=False)
    final = trace.final
    assert len(final) == 84
    assert final.structure_summary() == {
        4: (4, True), 5: (8, True), 6: (16, True),
        8: (8, True), 9: (32, True), 12: (16, False),
    }
    additive = symbolic_eu(mid, policy_p1(mid), additive=True, check_extensive=False).final
    assert len(additive) == 28
    assert additive.structure_summary() == {4: (4, True), 5: (8, True), 6: (16, True)}
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report("A3", f"84/28 monomials with the exact histograms in {elapsed:.2f}s")


def test_a04_structure_conformance_suite():
    start = time.monotonic()
    rng = random.Random(20_240_001)
    for trial in range(200):
        mid = random_mid(rng, n_max=7, m_max=3)
        policy = random_policy(rng, mid)
        for additive in (False, True):
            trace = symbolic_eu(mid, policy, additive=additive)
            for i in range(1, mid.n + 1):
                rep = check_structure(
                    trace.vectors[i], predicted_structure(mid, i, additive=additive)
                )
                assert rep.ok, (trial, i, additive, rep.first())
    elapsed = time.monotonic() - start
    assert elapsed < 300.0
    report("A4", f"200 diagrams, every stage, both modes, 0 mismatches in {elapsed:.1f}s")


def test_a05_oracle_equivalence_suite():
    rng = random.Random(20_240_002)
    checked = 0
    for trial in range(100):
        mid = random_mid(rng, n_max=6, max_policies=32)
        if trial % 2:  # half the sample must exercise maximization steps
            while not mid.decision_nodes:
                mid = random_mid(rng, n_max=6, max_policies=32)
        specs = [random_full_spec(rng, mid) for _ in range(3)]
        for policy in enumerate_policies(mid):
            final = symbolic_eu(mid, policy).final
            for spec in specs:
                symbolic = final.substitute(dict(spec)).constant_value()
                assert symbolic == joint_eu_numeric(mid, spec, policy), (trial,)
                checked += 1
    report("A5", f"{checked} exact symbolic-vs-oracle equalities, 0 mismatches")


def _spec_complete(mid):
    names = indeterminate_table(mid)
    raw = {
        "p6111": "0.3", "p6110": "0.2", "p6101": "0.2", "p6100": "0.3",
        "p5111": "0.7", "p5110": "0.2", "p5101": "0.9", "p5100": "0.6",
        "psi311": "0", "psi310": "0.4", "psi301": "0.8", "psi300": "1",
        "psi21": "0", "psi20": "1",
        "k1": "0.2", "k2": "0.2", "k3": "0.4", "h": "0.9",
    }
    return SubstitutionSpec(numeric={names[k]: F(v) for k, v in raw.items()})


def test_a06_complete_elicitation():
    mid = ex1()
    u5 = symbolic_eu(mid, policy_p1(mid)).vectors[5]
    values = [e.constant_value() for e in apply_spec(mid, u5, _spec_complete(mid)).entries]
    # Exact rational arithmetic from the published table.  The second entry is
    # 0.375504 (= 23469/62500); see the ledger for the off-by-4e-5 figure that
    # sometimes circulates.
    assert values == [F(9607, 31250), F(23469, 62500), F(6976, 15625), F(6969, 15625)]
    for got, rounded in zip(values, [F("0.3074"), F("0.3755"), F("0.4465"), F("0.4460")]):
        assert abs(got - rounded) <= F(5, 10**5)
    rows = {r.block: r for r in preferred_action_table(mid, _spec_complete(mid), 4)}
    assert rows[(0,)].best_action == 1 and rows[(1,)].best_action == 0
    report("A6", "stage-5 values exact and within 5e-5 of the rounded figures")


def test_a07_partial_elicitation():
    mid = ex1()
    names = indeterminate_table(mid)
    raw = {
        "p6100": "0.3", "p5110": "0.2", "p5101": "0.9", "p5100": "0.6",
        "psi311": "0", "psi310": "0.4", "psi300": "1", "psi21": "0", "psi20": "1",
        "k1": "0.2", "k2": "0.2", "k3": "0.4", "h": "0.9",
    }
    spec = SubstitutionSpec(
        numeric={names[k]: F(v) for k, v in raw.items()},
        relations={
            names["p6011"]: Polynomial.var(names["p5111"]),
            names["p6010"]: Polynomial.var(names["p6001"]),
        },
        free=(names["psi301"], names["p6001"], names["p5111"]),
    )
    u5 = symbolic_eu(mid, policy_p1(mid)).vectors[5]
    out = apply_spec(mid, u5, spec)
    expected = parse_polynomial(
        "0.2*(1 - p5111) + 0.4*psi301*p5111^2 + 0.472*psi301*p6001*(1 - p5111)",
        names,
    )
    assert out.entry(mid, (1, 1)) == expected
    report("A7", "partial stage-5 entry structurally equals the published display")


def test_a08_transform_fixture_diagram():
    ext, log = to_extensive_form(ex2())
    assert [(s.kind, s.args_original) for s in log.steps] == [
        ("reverse_arc", (2, 3)), ("remove_barren", (2,)),
    ]
    assert ext.kinds == (DECISION, CHANCE, DECISION, CHANCE, CHANCE)
    assert {i: ext.pi(i) for i in range(1, 6)} == {
        1: (), 2: (1,), 3: (1, 2), 4: (2, 3), 5: (3, 4),
    }
    assert {j: ext.pset(j) for j in range(1, 4)} == {1: (2,), 2: (4,), 3: (3, 5)}
    report("A8a", "reversal plus barren removal reproduces the published diagram")


def test_a08_reversed_and_reduced_histograms():
    rev, _ = reverse_arc(ex2(), 2, 3)
    pol = Policy({1: {(): 0}, 4: {(1,): 0, (0,): 1}})
    trace_r = symbolic_eu(rev, pol, check_extensive=False)
    hist_r3 = {d: c for d, (c, _) in trace_r.vectors[3].entries[0].structure_summary().items()}
    assert hist_r3 == {4: 4, 5: 8, 8: 8}
    ext, _ = to_extensive_form(ex2())
    pol_b = Policy({1: {(): 0}, 3: {(1,): 0, (0,): 1}})
    trace_b = symbolic_eu(ext, pol_b)
    hist_b1 = {d: c for d, (c, _) in trace_b.vectors[1].entries[0].structure_summary().items()}
    assert hist_b1 == {3: 2, 4: 4, 5: 8, 7: 4, 8: 16, 11: 8}
    original = {4: 4, 5: 8, 6: 16, 8: 8, 9: 32, 12: 16}
    assert all(original[d + 1] == 2 * c for d, c in hist_b1.items())
    report("A8b", "reversed stage-3 and reduced stage-1 histograms reproduced")


def test_a08_reversed_stage1_histogram_published_value():
    """The published table keeps the first row unchanged at 4 monomials of
    degree 4; the evaluation over the reversed factorization yields 2 of
    degree 3 instead (the reversal genuinely shortens that class)."""
    rev, _ = reverse_arc(ex2(), 2, 3)
    pol = Policy({1: {(): 0}, 4: {(1,): 0, (0,): 1}})
    trace_r = symbolic_eu(rev, pol, check_extensive=False)
    hist_r1 = {d: c for d, (c, _) in trace_r.vectors[1].entries[0].structure_summary().items()}
    assert hist_r1 == {4: 4, 5: 8, 6: 16, 8: 8, 9: 32, 12: 16}, (
        f"actual {hist_r1}; {LEDGER}"
    )
    report("A8c", "reversed stage-1 histogram matches the published table")


def _forward_map_total(mid, out, step) -> bool:
    inverse = {new: old for old, new in step.relabel.items()}
    for d_new in out.decision_nodes:
        dom_old = Policy.domain(mid, inverse[d_new])
        visible = {inverse[s] for s in Policy.domain(out, d_new)}
        if not set(dom_old) <= visible:
            return False
    return True


def test_a08_eu_preservation_50_random_diagrams():
    from midpoly import optimal_policy_numeric

    rng = random.Random(20_240_003)
    verified = 0
    argmax_checked = 0
    attempts = 0
    while verified < 50:
        attempts += 1
        assert attempts < 3000, "too few transformable diagrams generated"
        mid = random_mid(rng, n_max=6, max_policies=32)
        arcs = [
            (i, j)
            for i in mid.chance_nodes
            for j in mid.children(i)
            if mid.kind(j) == CHANCE
            and is_father(mid, i, j)
            and not any(mid.kind(k) == DECISION for k in range(i + 1, j))
        ]
        candidates = []
        if arcs:
            candidates.append(("reverse", arcs[rng.randrange(len(arcs))]))
        for d in mid.decision_nodes:
            for i in sufficiency_removable(mid, d):
                candidates.append(("sufficiency", (i, d)))
        if not candidates:
            continue
        kind, args = candidates[rng.randrange(len(candidates))]
        spec = random_full_spec(rng, mid)
        try:
            if kind == "reverse":
                out, step = reverse_arc(mid, *args)
            else:
                out, step = apply_sufficiency(mid, *args)
        except TransformError:
            continue
        spec_out = resolve_spec(mid, out, step, spec)
        # the optimal value is preserved whether or not the policy spaces
        # correspond one-to-one (the transform may expose an irrelevance)
        assert (
            optimal_policy_numeric(mid, spec)[1]
            == optimal_policy_numeric(out, spec_out)[1]
        ), (kind, args)
        argmax_checked += 1
        if not _forward_map_total(mid, out, step):
            continue
        for policy in enumerate_policies(mid):
            mapped = map_policy(mid, out, step, policy)
            assert joint_eu_numeric(mid, spec, policy) == joint_eu_numeric(
                out, spec_out, mapped
            ), (kind, args)
        verified += 1
        # chase a barren node if the reversal produced one
        barren = [
            v for v in out.chance_nodes
            if not out.children(v) and not out.utility_children(v)
        ]
        if kind == "reverse" and barren:
            reduced, step2 = remove_barren(out, barren[0])
            if _forward_map_total(out, reduced, step2):
                spec2 = resolve_spec(out, reduced, step2, spec_out)
                for policy in enumerate_policies(out):
                    mapped = map_policy(out, reduced, step2, policy)
                    assert joint_eu_numeric(out, spec_out, policy) == joint_eu_numeric(
                        reduced, spec2, mapped
                    )
                verified += 1
    report(
        "A8d",
        f"every mapped policy's EU preserved on {verified} transforms; "
        f"optimal EU preserved on {argmax_checked}",
    )


def test_a09_sufficiency():
    mid = ex1()
    assert sufficiency_removable(mid, 4) == (2,)
    suf, _ = apply_sufficiency(mid, 2, 4)
    ext, _ = to_extensive_form(ex2())
    assert suf == ext
    report("A9", "sufficiency removal equals reversal plus barren removal")


def test_a10_example_pruning():
    mid = ex1()
    names = indeterminate_table(mid)
    trace = apply_asymmetries(symbolic_eu(mid, policy_p2(mid)), EXAMPLE_ASYMMETRIES)
    u6 = trace.vectors[6]
    assert u6.entry(mid, (1, 1)) == parse_polynomial("k3*psi311*p6111", names)
    assert u6.entry(mid, (1, 0)).is_zero
    u5 = trace.vectors[5]
    for y3 in (0, 1):
        expected = parse_polynomial(
            f"k3*psi311*p6111*p511{y3} + k2*psi21*p511{y3}"
            f" + h*k2*k3*psi311*psi21*p6111*p511{y3}",
            names,
        )
        assert u5.entry(mid, (y3, 1)) == expected
        assert len(u5.entry(mid, (y3, 1))) == 3
    report("A10a", "stage-6 and stage-5 pruned entries match the worked example")


def test_a10_designated_entry_nine_monomials():
    """The worked example prints nine monomials for the (y2=1, y1=1) entry;
    the cancellation rule applied to the full sixteen-plus-two monomial entry
    leaves twelve (the printed display drops whole sub-groups its own rule
    keeps)."""
    mid = ex1()
    trace = apply_asymmetries(symbolic_eu(mid, policy_p2(mid)), EXAMPLE_ASYMMETRIES)
    entry = trace.vectors[3].entry(mid, (1, 1))
    assert len(entry) == 9, f"actual {len(entry)} monomials; {LEDGER}"
    report("A10b", "designated stage-3 entry has nine monomials")


def test_a10_equivalence_100_pairs():
    rng = random.Random(20_240_004)
    pairs = 0
    while pairs < 100:
        mid = random_mid(rng, n_max=6, max_policies=64)
        if mid.n < 2:
            continue
        i, j = rng.sample(range(1, mid.n + 1), 2)
        asy = Asymmetry(
            ((i, rng.randrange(mid.card(i))),),
            j,
            rng.choice(["=", "!="]),
            rng.randrange(mid.card(j)),
        )
        policy = random_policy(rng, mid)
        stepwise = symbolic_eu_asymmetric(mid, policy, [asy])
        posthoc = apply_asymmetries(symbolic_eu(mid, policy), [asy])
        for stage in range(1, mid.n + 2):
            assert stepwise.vectors[stage] == posthoc.vectors[stage], (pairs, stage)
        pairs += 1
    report("A10c", "in-evaluation pruning equivalent to post-hoc on 100 pairs")


EXPECTED_COSTS = {
    6: {"multisum": 9, "marginalize": 40},
    5: {"multisum": 17, "marginalize": 72},
    4: {"maximize": 0},
    3: {"multisum": 25, "marginalize": 200},
    2: {"marginalize": 176},
    1: {"maximize": 0},
}


def test_a11_cost_formulas():
    mid = ex1()
    for stage, ops in EXPECTED_COSTS.items():
        for op, expected in ops.items():
            assert multiplication_count(mid, stage, op) == expected, (stage, op)
    for stage in mid.decision_nodes:
        assert multiplication_count(mid, stage, "maximize") == 0
    report("A11", "multiplication counts match the closed forms at every stage")


def test_a12_smoke_benchmark():
    start = time.monotonic()
    symbolic_eu(ex1(), policy_p1(ex1()))
    symbolic_eu(ex2(), policy_p1(ex2()), check_extensive=False)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report("A12", f"both reference diagrams fully evaluated in {elapsed:.2f}s")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-v"] + sys.argv[1:]))
