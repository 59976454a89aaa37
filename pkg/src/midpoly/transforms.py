"""Diagram surgery: arc reversal, barren-node removal, sufficiency, d-separation.

Each operation returns a fresh diagram plus a replayable step record.  Arc
reversal Bayes-inverts an edge between a father and son; the reparametrized
probabilities are *definitional bindings* on fresh indeterminates (a
polynomial for the son's new table, a ratio of polynomials for the father's),
so every expected-utility object stays polynomial and a numeric specification
of the source diagram resolves mechanically into one for the target.

Because a reversal makes the former father depend on a higher-indexed node,
the result is relabeled with a stable topological order; the step records the
old-to-new index map so policies and specifications can be carried across.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .diagram import (
    CHANCE,
    DECISION,
    MID,
    Config,
    comp_j,
    config_iter,
    config_pairs_desc,
    project_config,
    prob_param,
    require_valid,
)
from .engine import Policy
from .indet import Indeterminate
from .poly import Polynomial, poly_sum

YNode = int  # 1..n


class TransformError(ValueError):
    pass


def utility_label(mid: MID, j: int) -> int:
    """Graph label of utility node U_j (variable nodes keep their index)."""
    return mid.n + j


# -- moral graph and d-separation ----------------------------------------------


def moral_skeleton(mid: MID) -> dict[int, set[int]]:
    """Undirected adjacency of the moralized diagram (variables and utilities).

    Parents of every chance node and of every utility node are married;
    edges into decisions are informational and their co-parents are not.
    """
    adj: dict[int, set[int]] = {i: set() for i in range(1, mid.n + 1)}
    for j in range(1, mid.m + 1):
        adj[utility_label(mid, j)] = set()

    def connect(a: int, b: int) -> None:
        adj[a].add(b)
        adj[b].add(a)

    for i in range(1, mid.n + 1):
        for p in mid.pi(i):
            connect(p, i)
        if mid.kind(i) == CHANCE:
            for a, b in itertools.combinations(mid.pi(i), 2):
                connect(a, b)
    for j in range(1, mid.m + 1):
        for p in mid.pset(j):
            connect(p, utility_label(mid, j))
        for a, b in itertools.combinations(mid.pset(j), 2):
            connect(a, b)
    return adj


def d_separated(
    mid: MID, a: Iterable[int], b: Iterable[int], c: Iterable[int]
) -> bool:
    """True iff every skeleton path from ``a`` to ``c`` meets ``b``.

    Arguments are disjoint sets of graph labels (utilities via
    ``utility_label``).
    """
    aset, bset, cset = set(a), set(b), set(c)
    if (aset & bset) or (aset & cset) or (bset & cset):
        raise ValueError("d-separation arguments must be disjoint")
    adj = moral_skeleton(mid)
    frontier = list(aset)
    seen = set(aset)
    while frontier:
        node = frontier.pop()
        if node in cset:
            return False
        if node in bset:
            continue
        for nxt in adj[node]:
            if nxt not in seen and nxt not in bset:
                if nxt in cset:
                    return False
                seen.add(nxt)
                frontier.append(nxt)
    return True


def is_father(mid: MID, i: int, j: int) -> bool:
    """Edge (Y_i, Y_j) present and no other directed path joins them."""
    if i not in mid.pi(j):
        return False
    # search for a path i -> x -> ... -> j avoiding the direct edge
    stack = [c for c in mid.children(i) if c != j]
    seen = set(stack)
    while stack:
        node = stack.pop()
        if node == j:
            return False
        for nxt in mid.children(node):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


# -- transform records -----------------------------------------------------------


@dataclass(frozen=True)
class DefinitionalBinding:
    """A fresh parameter defined as a ratio of source-diagram polynomials."""

    new: Indeterminate           # in the result diagram's naming
    numerator: Polynomial        # over the source diagram's indeterminates
    denominator: Polynomial      # constant 1 for polynomial bindings

    def resolve(self, spec: Mapping[Indeterminate, Fraction]) -> Fraction:
        den = self.denominator.evaluate(spec)
        if den == 0:
            raise TransformError(
                f"binding for {self.new.render()} has zero denominator under this specification"
            )
        return self.numerator.evaluate(spec) / den


@dataclass(frozen=True)
class TransformStep:
    kind: str                      # "reverse_arc" | "remove_barren" | "sufficiency"
    args: tuple[int, ...]          # node indices in the step's *input* labeling
    relabel: dict[int, int]        # input index -> result index (dropped nodes absent)
    bindings: tuple[DefinitionalBinding, ...] = ()
    args_original: tuple[int, ...] | None = None  # same nodes in the first diagram's labels


@dataclass
class TransformLog:
    steps: list[TransformStep] = field(default_factory=list)

    def relabel_map(self, n: int) -> dict[int, int | None]:
        """Composite original-index -> final-index map over the source
        diagram's nodes 1..n; None marks a removed node."""
        current: dict[int, int | None] = {i: i for i in range(1, n + 1)}
        for step in self.steps:
            current = {
                orig: (step.relabel.get(cur) if cur is not None else None)
                for orig, cur in current.items()
            }
        return current


def replay(mid: MID, steps: Sequence[TransformStep]) -> MID:
    """Re-apply a recorded step sequence; used to audit logs."""
    current = mid
    for step in steps:
        if step.kind == "reverse_arc":
            current, _ = reverse_arc(current, *step.args)
        elif step.kind == "remove_barren":
            current, _ = remove_barren(current, *step.args)
        elif step.kind == "sufficiency":
            current, _ = apply_sufficiency(current, *step.args)
        else:
            raise TransformError(f"unknown step kind {step.kind!r}")
    return current


# -- relabeling helpers ----------------------------------------------------------


def _stable_topological_relabel(
    n: int, parents: Mapping[int, set[int]]
) -> dict[int, int]:
    """Old index -> new index; lowest old index first among ready nodes."""
    placed: dict[int, int] = {}
    remaining = set(range(1, n + 1))
    nxt = 1
    while remaining:
        ready = sorted(i for i in remaining if parents[i] <= placed.keys())
        if not ready:
            raise TransformError("relabeling failed: resulting graph is cyclic")
        placed[ready[0]] = nxt
        remaining.discard(ready[0])
        nxt += 1
    return placed


def _relabeled_mid(
    mid: MID,
    new_parents: Mapping[int, set[int]],
    relabel: Mapping[int, int],
) -> MID:
    n = mid.n
    kinds = [""] * n
    r = [0] * n
    parents: list[tuple[int, ...]] = [()] * n
    for old in range(1, n + 1):
        new = relabel[old]
        kinds[new - 1] = mid.kind(old)
        r[new - 1] = mid.card(old)
        parents[new - 1] = tuple(sorted(relabel[p] for p in new_parents[old]))
    util_parents = tuple(
        tuple(sorted(relabel[p] for p in mid.pset(j))) for j in range(1, mid.m + 1)
    )
    return MID(tuple(kinds), tuple(r), tuple(parents), util_parents, mid.k, mid.h)


def _relabel_config_pairs(
    pairs: Iterable[tuple[int, int]], relabel: Mapping[int, int]
) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(((relabel[i], v) for i, v in pairs), reverse=True))


def relabel_indeterminate(ind: Indeterminate, relabel: Mapping[int, int]) -> Indeterminate:
    """Carry a probability/utility parameter across a node relabeling."""
    if ind.kind == "p":
        return Indeterminate.prob(
            relabel[ind.node], ind.value, _relabel_config_pairs(ind.config, relabel)
        )
    if ind.kind == "psi":
        return Indeterminate.util(ind.node, _relabel_config_pairs(ind.config, relabel))
    return ind


# -- arc reversal -----------------------------------------------------------------


def reverse_arc(mid: MID, i: int, j: int) -> tuple[MID, TransformStep]:
    """Reverse the father-son edge (Y_i, Y_j), Bayes-inverting the tables."""
    require_valid(mid)
    if mid.kind(i) != CHANCE or mid.kind(j) != CHANCE:
        raise TransformError(f"arc reversal needs chance endpoints, got Y{i}, Y{j}")
    if i not in mid.pi(j):
        raise TransformError(f"no edge (Y{i}, Y{j})")
    if not is_father(mid, i, j):
        raise TransformError(
            f"Y{i} is not the father of Y{j}: another directed path joins them"
        )
    new_parents: dict[int, set[int]] = {
        node: set(mid.pi(node)) for node in range(1, mid.n + 1)
    }
    new_parents[j] = (set(mid.pi(j)) | set(mid.pi(i))) - {i}
    new_parents[i] = {j} | set(mid.pi(i)) | (set(mid.pi(j)) - {i})
    relabel = _stable_topological_relabel(mid.n, new_parents)
    result = _relabeled_mid(mid, new_parents, relabel)

    bindings: list[DefinitionalBinding] = []
    pi_j_new = tuple(sorted(new_parents[j]))
    pi_i_new = tuple(sorted(new_parents[i]))

    def mixture(y_j: int, values: dict[int, int]) -> Polynomial:
        # sum over y_i of p_j * p_i at the given values of the other parents
        terms = []
        for y_i in range(mid.card(i) - 1, -1, -1):
            vals = dict(values)
            vals[i] = y_i
            pj = prob_param(mid, j, y_j, tuple(vals[s] for s in mid.pi(j)))
            pi_ = prob_param(mid, i, y_i, tuple(vals[s] for s in mid.pi(i)))
            terms.append(Polynomial.var(pj) * Polynomial.var(pi_))
        return poly_sum(terms)

    for cfg in config_iter(mid, pi_j_new):
        values = dict(zip(pi_j_new, cfg))
        for y_j in range(mid.card(j)):
            new_ind = Indeterminate.prob(
                relabel[j],
                y_j,
                _relabel_config_pairs(config_pairs_desc(pi_j_new, cfg), relabel),
            )
            bindings.append(
                DefinitionalBinding(new_ind, mixture(y_j, values), Polynomial.const(1))
            )
    for cfg in config_iter(mid, pi_i_new):
        values = dict(zip(pi_i_new, cfg))
        y_j = values[j]
        for y_i in range(mid.card(i)):
            vals = dict(values)
            vals[i] = y_i
            pj = prob_param(mid, j, y_j, tuple(vals[s] for s in mid.pi(j)))
            pi_ = prob_param(mid, i, y_i, tuple(vals[s] for s in mid.pi(i)))
            new_ind = Indeterminate.prob(
                relabel[i],
                y_i,
                _relabel_config_pairs(config_pairs_desc(pi_i_new, cfg), relabel),
            )
            den_values = {s: values[s] for s in pi_j_new}
            bindings.append(
                DefinitionalBinding(
                    new_ind,
                    Polynomial.var(pj) * Polynomial.var(pi_),
                    mixture(y_j, den_values),
                )
            )
    step = TransformStep("reverse_arc", (i, j), relabel, tuple(bindings))
    return require_valid(result), step


# -- barren node removal -----------------------------------------------------------


def remove_barren(mid: MID, i: int) -> tuple[MID, TransformStep]:
    """Drop a childless chance node and its incoming edges."""
    require_valid(mid)
    if mid.kind(i) != CHANCE:
        raise TransformError(f"Y{i} is not a chance node")
    if mid.children(i):
        raise TransformError(f"Y{i} has children {mid.children(i)}; not barren")
    if mid.utility_children(i):
        raise TransformError(
            f"Y{i} is an argument of U{mid.utility_children(i)[0]}; "
            "utility parents cannot be deleted"
        )
    if mid.n == 1:
        raise TransformError("removing the only node would leave an empty diagram")
    relabel = {o: (o if o < i else o - 1) for o in range(1, mid.n + 1) if o != i}
    kinds = tuple(mid.kind(o) for o in range(1, mid.n + 1) if o != i)
    r = tuple(mid.card(o) for o in range(1, mid.n + 1) if o != i)
    parents = tuple(
        tuple(sorted(relabel[p] for p in mid.pi(o)))
        for o in range(1, mid.n + 1)
        if o != i
    )
    util_parents = tuple(
        tuple(sorted(relabel[p] for p in mid.pset(j))) for j in range(1, mid.m + 1)
    )
    result = MID(kinds, r, parents, util_parents, mid.k, mid.h)
    step = TransformStep("remove_barren", (i,), relabel, ())
    return require_valid(result), step


# -- sufficiency principle ----------------------------------------------------------


def _descendants(mid: MID, i: int) -> set[int]:
    out: set[int] = set()
    stack = list(mid.children(i))
    while stack:
        node = stack.pop()
        if node not in out:
            out.add(node)
            stack.extend(mid.children(node))
    return out


def sufficiency_removable(mid: MID, j: int) -> tuple[int, ...]:
    """Chance parents of decision Y_j that the sufficiency principle can drop."""
    require_valid(mid)
    if mid.kind(j) != DECISION:
        raise TransformError(f"Y{j} is not a decision node")
    js = comp_j(mid)
    out = []
    for i in mid.pi(j):
        if mid.kind(i) != CHANCE or mid.utility_children(i):
            continue
        targets = {utility_label(mid, k) for k, anchor in enumerate(js, start=1) if i <= anchor}
        separator = (set(mid.pi(j)) - {i}) | set(mid.decision_nodes)
        if d_separated(mid, {i}, separator, targets):
            out.append(i)
    return tuple(out)


def apply_sufficiency(mid: MID, i: int, j: int) -> tuple[MID, TransformStep]:
    """Remove Y_i, rewiring its children to its parents, with re-parametrization.

    The son (father-edge child) gets the plain mixture over y_i; any other
    chance child gets the Bayes inversion of y_i given the son's observed
    value.  The inversion is supported when the informative co-parents'
    tables are determined by the child's new parent set, which covers the
    one-hop structures the principle is stated for.
    """
    if i not in sufficiency_removable(mid, j):
        raise TransformError(
            f"Y{i} is not removable for decision Y{j} under the sufficiency principle"
        )
    children = mid.children(i)
    new_parents: dict[int, set[int]] = {
        node: set(mid.pi(node)) for node in range(1, mid.n + 1)
    }
    for c in children:
        new_parents[c] = (set(mid.pi(c)) - {i}) | set(mid.pi(i))
    relabel = {o: (o if o < i else o - 1) for o in range(1, mid.n + 1) if o != i}

    kinds = tuple(mid.kind(o) for o in range(1, mid.n + 1) if o != i)
    r = tuple(mid.card(o) for o in range(1, mid.n + 1) if o != i)
    parents = tuple(
        tuple(sorted(relabel[p] for p in new_parents[o]))
        for o in range(1, mid.n + 1)
        if o != i
    )
    util_parents = tuple(
        tuple(sorted(relabel[p] for p in mid.pset(jj))) for jj in range(1, mid.m + 1)
    )
    result = MID(kinds, r, parents, util_parents, mid.k, mid.h)

    bindings: list[DefinitionalBinding] = []
    chance_children = sorted(c for c in children if mid.kind(c) == CHANCE)
    descendants = _descendants(mid, i)
    # The children must form an observation chain: each one conditions on all
    # earlier ones, so the sequential Bayes inversions reconstruct the exact
    # joint.  Two decoupled children would become independent in the rewired
    # graph and the interaction term of the utility would feel it.
    for idx, c in enumerate(chance_children):
        severed = [s for s in chance_children[:idx] if s not in mid.pi(c)]
        if severed:
            raise TransformError(
                f"removing Y{i} would decouple its children Y{severed[0]} and "
                f"Y{c}; the rewired graph cannot carry their joint dependence"
            )
    for c in chance_children:
        pi_c_new = tuple(sorted(new_parents[c]))
        informants = [
            l for l in mid.pi(c)
            if l != i and i in mid.pi(l) and mid.kind(l) == CHANCE
        ]
        if not is_father(mid, i, c):
            # Every information channel from Y_i into Y_c's parent set must be
            # a direct chance child whose own table is determined by the new
            # parents; a deeper descendant would need marginal inference and a
            # decision's value carries policy-dependent information, so both
            # are refused rather than inverted wrongly.
            unsupported = [
                l for l in mid.pi(c)
                if l != i
                and l in descendants
                and (l not in informants or not set(mid.pi(l)) - {i} <= set(pi_c_new))
            ]
            if not informants or unsupported:
                raise TransformError(
                    f"cannot re-parametrize Y{c}: inversion of Y{i} needs every "
                    f"informative co-parent to be a direct chance child with its "
                    f"table determined by Y{c}'s new parents"
                )
        for cfg in config_iter(mid, pi_c_new):
            values = dict(zip(pi_c_new, cfg))

            def weight(y_i: int) -> Polynomial:
                vals = dict(values)
                vals[i] = y_i
                w = Polynomial.var(
                    prob_param(mid, i, y_i, tuple(vals[s] for s in mid.pi(i)))
                )
                if not is_father(mid, i, c):
                    for l in informants:
                        w = w * Polynomial.var(
                            prob_param(mid, l, vals[l], tuple(vals[s] for s in mid.pi(l)))
                        )
                return w

            weights = [weight(y_i) for y_i in range(mid.card(i) - 1, -1, -1)]
            for y_c in range(mid.card(c)):
                terms = []
                for y_i, w in zip(range(mid.card(i) - 1, -1, -1), weights):
                    vals = dict(values)
                    vals[i] = y_i
                    pc = prob_param(mid, c, y_c, tuple(vals[s] for s in mid.pi(c)))
                    terms.append(Polynomial.var(pc) * w)
                new_ind = Indeterminate.prob(
                    relabel[c],
                    y_c,
                    _relabel_config_pairs(config_pairs_desc(pi_c_new, cfg), relabel),
                )
                den = poly_sum(weights) if not is_father(mid, i, c) else Polynomial.const(1)
                bindings.append(DefinitionalBinding(new_ind, poly_sum(terms), den))
    step = TransformStep("sufficiency", (i, j), relabel, tuple(bindings))
    return require_valid(result), step


# -- extensive form ------------------------------------------------------------------


def to_extensive_form(mid: MID) -> tuple[MID, TransformLog]:
    """Greedy conversion: reverse father arcs away from the lowest offending
    chance node, delete it once barren; fail with the blocking structure when
    the node cannot be eliminated."""
    require_valid(mid)
    current = mid
    log = TransformLog()
    to_current: dict[int, int | None] = {i: i for i in range(1, mid.n + 1)}
    for _ in range(4 * mid.n * mid.n + 4):
        violation = _first_violation(current)
        if violation is None:
            return current, log
        d, v = violation
        originals = {cur: orig for orig, cur in to_current.items() if cur is not None}
        if current.kind(v) == DECISION:
            raise TransformError(
                f"decision Y{v} precedes decision Y{d} unobserved; "
                "order asymmetries are out of scope"
            )
        if current.utility_children(v):
            raise TransformError(
                f"chance Y{v} is unobserved before decision Y{d} but is a "
                f"utility parent (U{current.utility_children(v)[0]}); it cannot be deleted"
            )
        decision_children = [c for c in current.children(v) if current.kind(c) == DECISION]
        if decision_children:
            raise TransformError(
                f"chance Y{v} is unobserved before decision Y{d} but informs "
                f"decision Y{decision_children[0]}; it cannot be eliminated"
            )
        chance_children = [c for c in current.children(v) if current.kind(c) == CHANCE]
        if chance_children:
            sons = [c for c in chance_children if is_father(current, v, c)]
            if not sons:
                raise TransformError(f"no reversible father arc out of Y{v}")
            son = min(sons)
            current, step = reverse_arc(current, v, son)
            step = TransformStep(
                step.kind, step.args, step.relabel, step.bindings,
                (originals[v], originals[son]),
            )
        else:
            current, step = remove_barren(current, v)
            step = TransformStep(
                step.kind, step.args, step.relabel, step.bindings, (originals[v],)
            )
        log.steps.append(step)
        to_current = {
            orig: (step.relabel.get(cur) if cur is not None else None)
            for orig, cur in to_current.items()
        }
    raise TransformError("extensive-form conversion did not terminate")


def _first_violation(mid: MID) -> tuple[int, int] | None:
    for d in mid.decision_nodes:
        missing = sorted(set(range(1, d)) - set(mid.pi(d)))
        if missing:
            return d, missing[0]
    return None


# -- carrying specifications and policies across steps -------------------------------


def resolve_spec(
    mid_old: MID,
    mid_new: MID,
    step: TransformStep,
    spec: Mapping[Indeterminate, Fraction],
) -> dict[Indeterminate, Fraction]:
    """Numeric specification for the transformed diagram."""
    out: dict[Indeterminate, Fraction] = {}
    bound = {b.new: b for b in step.bindings}
    from .diagram import parameter_vectors  # local import to avoid cycle noise

    vectors = parameter_vectors(mid_new)
    inverse = {new: old for old, new in step.relabel.items()}
    for params in vectors.p.values():
        for ind in params:
            if ind in bound:
                out[ind] = bound[ind].resolve(spec)
            else:
                old_ind = relabel_indeterminate(ind, inverse)
                out[ind] = spec[old_ind]
    for params in vectors.psi.values():
        for ind in params:
            out[ind] = spec[relabel_indeterminate(ind, inverse)]
    for jj in range(1, mid_new.m + 1):
        w = Indeterminate.weight(jj)
        if w in spec:
            out[w] = spec[w]
    h = Indeterminate.interaction()
    if h in spec:
        out[h] = spec[h]
    return out


def map_policy(mid_old: MID, mid_new: MID, step: TransformStep, policy: Policy) -> Policy:
    """Carry a policy across a step by projecting each new decision block.

    Requires every old block coordinate to survive into the new domain;
    raises when the transform removed a coordinate the policy conditions on.
    """
    inverse = {new: old for old, new in step.relabel.items()}
    actions: dict[int, dict[Config, int]] = {}
    for d_new in mid_new.decision_nodes:
        d_old = inverse[d_new]
        dom_new = Policy.domain(mid_new, d_new)
        dom_old = Policy.domain(mid_old, d_old)
        visible_old = tuple(inverse[s] for s in dom_new)
        if not set(dom_old) <= set(visible_old):
            raise TransformError(
                f"policy for Y{d_old} conditions on {dom_old} but only "
                f"{visible_old} survives the transform"
            )
        actions[d_new] = {}
        for cfg in config_iter(mid_new, dom_new):
            old_cfg = project_config(visible_old, cfg, dom_old)
            actions[d_new][cfg] = policy.action(mid_old, d_old, old_cfg)
    return Policy(actions)
