"""Tagged symbolic parameters appearing in expected-utility polynomials.

Four kinds of indeterminate occur:

  ``p6101``   transition probability of a chance node, second digit is the
              node's own value, remaining digits instantiate its parents
              (parent indices decrease left to right);
  ``psi311``  utility-table entry, digits instantiate the utility node's
              arguments (indices decreasing left to right);
  ``k3``      criterion weight of a utility node;
  ``h``       the multiplicative interaction constant.

The total order over indeterminates is fixed so canonical polynomial text is
reproducible: first by kind (h < k < psi < p), then by node index, then by
reverse-lexicographic order over the value/configuration digits.  Under that
order the probability vector of a binary node with one binary parent lists as
(p211, p201, p210, p200).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

KIND_INTERACTION = "h"
KIND_WEIGHT = "k"
KIND_UTIL = "psi"
KIND_PROB = "p"

_KIND_RANK = {KIND_INTERACTION: 0, KIND_WEIGHT: 1, KIND_UTIL: 2, KIND_PROB: 3}


@dataclass(frozen=True)
class Indeterminate:
    """One symbolic parameter.

    ``config`` holds (node index, value) pairs with strictly decreasing
    indices; for a probability parameter ``value`` is the node's own state,
    for the other kinds it is -1.
    """

    kind: str
    node: int = 0
    value: int = -1
    config: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown indeterminate kind {self.kind!r}")
        indices = [i for i, _ in self.config]
        if indices != sorted(indices, reverse=True):
            raise ValueError(f"configuration indices must strictly decrease: {self.config}")
        if len(set(indices)) != len(indices):
            raise ValueError(f"duplicate index in configuration: {self.config}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def prob(node: int, value: int, config: tuple[tuple[int, int], ...]) -> "Indeterminate":
        return Indeterminate(KIND_PROB, node, value, tuple(config))

    @staticmethod
    def util(node: int, config: tuple[tuple[int, int], ...]) -> "Indeterminate":
        return Indeterminate(KIND_UTIL, node, -1, tuple(config))

    @staticmethod
    def weight(node: int) -> "Indeterminate":
        return Indeterminate(KIND_WEIGHT, node)

    @staticmethod
    def interaction() -> "Indeterminate":
        return Indeterminate(KIND_INTERACTION)

    # -- ordering ----------------------------------------------------------

    def digits(self) -> tuple[int, ...]:
        """Value digits in display order (own value first, then config)."""
        head = (self.value,) if self.kind == KIND_PROB else ()
        return head + tuple(v for _, v in self.config)

    def sort_key(self) -> tuple:
        # Reverse-lexicographic over the digits: alpha precedes beta when the
        # rightmost nonzero entry of alpha - beta is positive.
        digits = self.digits()
        revlex = tuple(-d for d in reversed(digits))
        return (_KIND_RANK[self.kind], self.node, revlex)

    # -- semantics ---------------------------------------------------------

    def value_annotations(self) -> Iterator[tuple[int, int]]:
        """(variable index, instantiated value) pairs this parameter implies."""
        if self.kind == KIND_PROB:
            yield (self.node, self.value)
        if self.kind in (KIND_PROB, KIND_UTIL):
            yield from self.config

    # -- rendering ---------------------------------------------------------

    def render(self) -> str:
        if self.kind == KIND_INTERACTION:
            return "h"
        if self.kind == KIND_WEIGHT:
            return f"k{self.node}"
        digits = self.digits()
        if self.node <= 9 and all(0 <= d <= 9 for d in digits):
            return self.kind + str(self.node) + "".join(str(d) for d in digits)
        return self.kind + str(self.node) + "".join(f"_{d}" for d in digits)

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.render()
