"""Exact sparse multivariate polynomials over diagram indeterminates.

A polynomial maps monomial supports to rational coefficients:

    support  =  tuple of (Indeterminate, exponent), sorted, exponents > 0
    Poly     =  {support: Fraction, ...}        (zero polynomial = {})

Coefficients are ``fractions.Fraction`` so every identity used in the tests
is an exact equality; floating-point inputs are converted through their
decimal string so ``0.3`` means exactly 3/10.  Polynomials are immutable
values: all operations return new objects and are safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .indet import Indeterminate

Support = tuple[tuple[Indeterminate, int], ...]
RationalLike = Union[int, str, Fraction, float, Decimal]


def to_fraction(x: RationalLike) -> Fraction:
    """Convert a number to an exact Fraction; floats go via their repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(Decimal(repr(x)))
    return Fraction(x)


def format_fraction(q: Fraction) -> str:
    """Render exactly: integer, terminating decimal, or ``n/d``."""
    if q.denominator == 1:
        return str(q.numerator)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    exp = max(twos, fives)
    scaled = abs(q.numerator) * (10**exp // q.denominator)
    digits = str(scaled).rjust(exp + 1, "0")
    sign = "-" if q.numerator < 0 else ""
    return f"{sign}{digits[:-exp]}.{digits[-exp:]}"


@dataclass(frozen=True)
class Monomial:
    """A coefficient times a square-free-or-not product of indeterminates."""

    coefficient: Fraction
    support: Support

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.support)

    @property
    def square_free(self) -> bool:
        return all(e == 1 for _, e in self.support)

    def value_annotations(self) -> dict[int, set[int]]:
        """Variable instantiations implied by the factors, per variable."""
        out: dict[int, set[int]] = {}
        for ind, _ in self.support:
            for var, val in ind.value_annotations():
                out.setdefault(var, set()).add(val)
        return out

    def render(self) -> str:
        if not self.support:
            return format_fraction(self.coefficient)
        factors = "*".join(
            ind.render() if e == 1 else f"{ind.render()}^{e}" for ind, e in self.support
        )
        if self.coefficient == 1:
            return factors
        if self.coefficient == -1:
            return f"-{factors}"
        return f"{format_fraction(self.coefficient)}*{factors}"


def _support_key(support: Support) -> tuple:
    return tuple((ind.sort_key(), e) for ind, e in support)


def _mono_key(support: Support) -> tuple:
    return (sum(e for _, e in support), _support_key(support))


class Polynomial:
    """Canonical sparse polynomial; equality is structural equality."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Support, Fraction] | None = None):
        cleaned: dict[Support, Fraction] = {}
        if terms:
            for support, coeff in terms.items():
                if coeff != 0:
                    cleaned[support] = coeff
        object.__setattr__(self, "_terms", cleaned)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return _ZERO

    @staticmethod
    def const(value: RationalLike) -> "Polynomial":
        q = to_fraction(value)
        return Polynomial({(): q}) if q else _ZERO

    @staticmethod
    def var(ind: Indeterminate) -> "Polynomial":
        return Polynomial({((ind, 1),): Fraction(1)})

    @staticmethod
    def lift(value: "Polynomial | RationalLike") -> "Polynomial":
        return value if isinstance(value, Polynomial) else Polynomial.const(value)

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e for _, e in s) for s in self._terms), default=0)

    def constant_value(self) -> Fraction | None:
        """The value if this polynomial is constant, else None."""
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and () in self._terms:
            return self._terms[()]
        return None

    def variables(self) -> set[Indeterminate]:
        return {ind for s in self._terms for ind, _ in s}

    def monomials(self) -> list[Monomial]:
        """Monomials in canonical order: by degree, then indeterminate order."""
        items = sorted(self._terms.items(), key=lambda kv: _mono_key(kv[0]))
        return [Monomial(c, s) for s, c in items]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polynomial) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        out = dict(self._terms)
        for s, c in other._terms.items():
            out[s] = out.get(s, Fraction(0)) + c
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial({s: -c for s, c in self._terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero or other.is_zero:
            return _ZERO
        out: dict[Support, Fraction] = {}
        for sa, ca in self._terms.items():
            for sb, cb in other._terms.items():
                s = _merge_supports(sa, sb)
                out[s] = out.get(s, Fraction(0)) + ca * cb
        return Polynomial(out)

    def scale(self, factor: RationalLike) -> "Polynomial":
        q = to_fraction(factor)
        if q == 0:
            return _ZERO
        return Polynomial({s: c * q for s, c in self._terms.items()})

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative exponent")
        acc = Polynomial.const(1)
        for _ in range(n):
            acc = acc * self
        return acc

    # -- substitution and evaluation ----------------------------------------

    def substitute(
        self, bindings: Mapping[Indeterminate, "Polynomial | RationalLike"]
    ) -> "Polynomial":
        """Replace bound indeterminates, recursively resolving chained bindings.

        Bindings must be acyclic; a cycle raises CyclicBindingError.
        """
        if not bindings:
            return self
        lifted = {ind: Polynomial.lift(v) for ind, v in bindings.items()}
        resolved: dict[Indeterminate, Polynomial] = {}
        visiting: set[Indeterminate] = set()

        def resolve(ind: Indeterminate) -> Polynomial:
            if ind in resolved:
                return resolved[ind]
            if ind in visiting:
                raise CyclicBindingError(f"cyclic binding through {ind.render()}")
            visiting.add(ind)
            out = apply(lifted[ind])
            visiting.discard(ind)
            resolved[ind] = out
            return out

        def apply(p: Polynomial) -> Polynomial:
            acc = _ZERO
            for support, coeff in p._terms.items():
                term = Polynomial.const(coeff)
                for ind, e in support:
                    factor = resolve(ind) if ind in lifted else Polynomial.var(ind)
                    term = term * factor**e
                acc = acc + term
            return acc

        return apply(self)

    def evaluate(self, assignment: Mapping[Indeterminate, Fraction]) -> Fraction:
        """Evaluate at a full numeric point; missing indeterminates raise."""
        missing = sorted(
            (ind for ind in self.variables() if ind not in assignment),
            key=lambda i: i.sort_key(),
        )
        if missing:
            raise MissingParameterError(missing)
        total = Fraction(0)
        for support, coeff in self._terms.items():
            v = coeff
            for ind, e in support:
                v *= assignment[ind] ** e
            total += v
        return total

    # -- structure ----------------------------------------------------------

    def structure_summary(self) -> dict[int, tuple[int, bool]]:
        """Degree histogram: degree -> (monomial count, all square-free)."""
        out: dict[int, tuple[int, bool]] = {}
        for support in self._terms:
            deg = sum(e for _, e in support)
            sf = all(e == 1 for _, e in support)
            count, all_sf = out.get(deg, (0, True))
            out[deg] = (count + 1, all_sf and sf)
        return out

    # -- rendering ----------------------------------------------------------

    def render(self) -> str:
        monos = self.monomials()
        if not monos:
            return "0"
        parts = [monos[0].render()]
        for m in monos[1:]:
            if m.coefficient < 0:
                flipped = Monomial(-m.coefficient, m.support)
                parts.append(f" - {flipped.render()}")
            else:
                parts.append(f" + {m.render()}")
        return "".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Polynomial({self.render()})"


def _merge_supports(a: Support, b: Support) -> Support:
    merged: dict[Indeterminate, int] = {}
    for ind, e in a:
        merged[ind] = merged.get(ind, 0) + e
    for ind, e in b:
        merged[ind] = merged.get(ind, 0) + e
    return tuple(sorted(merged.items(), key=lambda kv: kv[0].sort_key()))


_ZERO = Polynomial()


class CyclicBindingError(ValueError):
    pass


class MissingParameterError(ValueError):
    def __init__(self, missing: Iterable[Indeterminate]):
        self.missing = list(missing)
        names = ", ".join(i.render() for i in self.missing)
        super().__init__(f"specification is missing parameters: {names}")


def poly_sum(terms: Iterable[Polynomial]) -> Polynomial:
    acc = _ZERO
    for t in terms:
        acc = acc + t
    return acc


# -- text parsing ------------------------------------------------------------


class PolynomialParseError(ValueError):
    pass


def parse_polynomial(text: str, names: Mapping[str, Indeterminate]) -> Polynomial:
    """Parse ``0.4*psi301*p5111^2 + 1 - p5111`` style expressions.

    ``names`` maps canonical renderings to indeterminates (see
    ``diagram.indeterminate_table``); unknown names raise.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_expr() -> Polynomial:
        acc = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def parse_term() -> Polynomial:
        acc = parse_factor()
        while peek() == "*":
            take()
            acc = acc * parse_factor()
        return acc

    def parse_factor() -> Polynomial:
        base = parse_base()
        if peek() == "^":
            take()
            tok = take()
            if not tok.isdigit():
                raise PolynomialParseError(f"exponent must be an integer, got {tok!r}")
            return base ** int(tok)
        return base

    def parse_base() -> Polynomial:
        tok = peek()
        if tok is None:
            raise PolynomialParseError("unexpected end of expression")
        if tok == "-":
            take()
            return -parse_factor()
        if tok == "(":
            take()
            inner = parse_expr()
            if peek() != ")":
                raise PolynomialParseError("missing closing parenthesis")
            take()
            return inner
        take()
        if tok[0].isdigit() or tok[0] == ".":
            try:
                return Polynomial.const(Fraction(tok))
            except (ValueError, ZeroDivisionError) as exc:
                raise PolynomialParseError(f"bad number {tok!r}") from exc
        if tok in names:
            return Polynomial.var(names[tok])
        raise PolynomialParseError(f"unknown parameter name {tok!r}")

    result = parse_expr()
    if pos != len(tokens):
        raise PolynomialParseError(f"trailing input near {tokens[pos]!r}")
    return result


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "+-*^()":
            tokens.append(c)
            i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] in "./"):
                j += 1
            tokens.append(text[i:j])
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise PolynomialParseError(f"unexpected character {c!r}")
    return tokens
