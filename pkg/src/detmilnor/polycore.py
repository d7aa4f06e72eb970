"""Exact multivariate polynomial arithmetic over the rationals.

Everything downstream (minors, Groebner bases, solution counting) is built
on the two value types defined here: an immutable polynomial ring descriptor
and a sparse polynomial with Fraction coefficients keyed by exponent tuples.
All values are immutable after construction and all operations are pure, so
they are safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Union

# Exact rational coefficients.  fractions.Fraction already guarantees the
# lowest-terms / positive-denominator canonical form required here.
Rational = Fraction

# A monomial is a tuple of exponents, one per ring variable.
Mono = tuple

Coeff = Union[int, Fraction]

LT, EQ, GT = -1, 0, 1


class RingMismatchError(ValueError):
    """Operands live in different polynomial rings."""


class ParseError(ValueError):
    """A polynomial string violates the input grammar."""

    def __init__(self, message, text, pos):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} (line {line}, column {col})")
        self.pos = pos
        self.line = line
        self.column = col


@dataclass(frozen=True)
class Ring:
    """An ordered tuple of variable names; the ambient polynomial ring."""

    variables: tuple

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names: {self.variables}")

    @property
    def nvars(self):
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"no variable {name!r} in ring {self.variables}") from None

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def const(self, c: Coeff) -> "Polynomial":
        c = Fraction(c)
        if c == 0:
            return self.zero()
        return Polynomial(self, {(0,) * self.nvars: c})

    def var(self, name: str) -> "Polynomial":
        i = self.index(name)
        expo = [0] * self.nvars
        expo[i] = 1
        return Polynomial(self, {tuple(expo): Fraction(1)})

    def gens(self):
        return tuple(self.var(v) for v in self.variables)

    def monomial(self, expo: Iterable[int], coeff: Coeff = 1) -> "Polynomial":
        expo = tuple(expo)
        if len(expo) != self.nvars or any(e < 0 for e in expo):
            raise ValueError(f"bad exponent vector {expo} for {self.variables}")
        c = Fraction(coeff)
        return Polynomial(self, {expo: c} if c else {})

    def parse(self, text: str) -> "Polynomial":
        return _parse_poly(self, text)


def ring(*names: str) -> Ring:
    return Ring(tuple(names))


# ---------------------------------------------------------------------------
# monomial helpers (exponent tuples)

def mono_deg(m: Mono) -> int:
    return sum(m)


def mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Mono, b: Mono) -> bool:
    """True when x^a divides x^b."""
    return all(x <= y for x, y in zip(a, b))


def mono_div(a: Mono, b: Mono) -> Mono:
    """Exponent vector of x^a / x^b; caller guarantees divisibility."""
    return tuple(x - y for x, y in zip(a, b))


def mono_lcm(a: Mono, b: Mono) -> Mono:
    return tuple(max(x, y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# orderings

DEGREVLEX = "global-degrevlex"
NEGDEGREVLEX = "local-negdegrevlex"
ELIMINATION = "lex-block-elimination"


class Ordering:
    """A monomial ordering: global degrevlex, local negdegrevlex, or a
    two-block elimination order (degrevlex within each block, first block
    dominates).

    ``permutation`` lists variable indices in comparison order; it defaults
    to the declaration order and is only permuted when an elimination block
    is requested.
    """

    def __init__(self, kind: str, nvars: int, permutation=None, block: int = 0):
        if kind not in (DEGREVLEX, NEGDEGREVLEX, ELIMINATION):
            raise ValueError(f"unknown ordering kind {kind!r}")
        if kind == ELIMINATION and not 0 < block < nvars:
            raise ValueError("elimination block must be a proper prefix")
        self.kind = kind
        self.nvars = nvars
        self.permutation = tuple(permutation) if permutation is not None else tuple(range(nvars))
        if sorted(self.permutation) != list(range(nvars)):
            raise ValueError(f"bad permutation {self.permutation}")
        self.block = block

    @property
    def is_local(self) -> bool:
        return self.kind == NEGDEGREVLEX

    def key(self, m: Mono):
        """Sort key: key(a) > key(b) iff a comes before b (a is larger)."""
        p = self.permutation
        e = [m[i] for i in p] if p != tuple(range(self.nvars)) else list(m)
        if self.kind == DEGREVLEX:
            return (sum(e), _revlex(e))
        if self.kind == NEGDEGREVLEX:
            return (-sum(e), _revlex(e))
        b = self.block
        e1, e2 = e[:b], e[b:]
        return (sum(e1), _revlex(e1), sum(e2), _revlex(e2))

    def __repr__(self):
        extra = f", block={self.block}" if self.kind == ELIMINATION else ""
        return f"Ordering({self.kind}, nvars={self.nvars}{extra})"


def _revlex(e):
    # degrevlex tie-break: the monomial with the smaller exponent at the
    # last differing position is the larger one
    return tuple(-x for x in reversed(e))


def degrevlex(r: Ring) -> Ordering:
    return Ordering(DEGREVLEX, r.nvars)


def negdegrevlex(r: Ring) -> Ordering:
    return Ordering(NEGDEGREVLEX, r.nvars)


def elimination(r: Ring, eliminate: Iterable[str]) -> Ordering:
    """Ordering whose Groebner bases compute elimination ideals: the
    eliminated variables form the dominant block."""
    drop = [r.index(v) for v in eliminate]
    keep = [i for i in range(r.nvars) if i not in drop]
    if not drop or not keep:
        raise ValueError("elimination needs a proper nonempty variable block")
    return Ordering(ELIMINATION, r.nvars, permutation=tuple(drop) + tuple(keep), block=len(drop))


def mono_compare(a: Mono, b: Mono, ordering: Ordering) -> int:
    """Compare monomials under ``ordering``: one of LT, EQ, GT."""
    if len(a) != len(b) or len(a) != ordering.nvars:
        raise RingMismatchError(f"monomials {a}, {b} do not fit a {ordering.nvars}-variable ring")
    ka, kb = ordering.key(a), ordering.key(b)
    if ka == kb:
        return EQ
    return GT if ka > kb else LT


# ---------------------------------------------------------------------------
# polynomials

class Polynomial:
    """Sparse exact polynomial: a map monomial -> nonzero Fraction.

    Two polynomials are equal iff they live in the same ring and their term
    maps agree; no zero coefficients are ever stored.
    """

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[Mono, Coeff]):
        cleaned = {}
        for m, c in terms.items():
            c = Fraction(c)
            if c:
                cleaned[m] = c
        self.ring = ring
        self.terms = cleaned
        self._hash = None

    # -- basic queries ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(mono_deg(m) == 0 for m in self.terms)

    def constant(self) -> Fraction:
        return self.terms.get((0,) * self.ring.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((mono_deg(m) for m in self.terms), default=-1)

    def low_degree(self) -> int:
        """Degree of the lowest-order term; -1 for zero."""
        return min((mono_deg(m) for m in self.terms), default=-1)

    def variables_used(self):
        used = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        return used

    def lead(self, ordering: Ordering):
        """(monomial, coefficient) of the largest term under ``ordering``."""
        if not self.terms:
            raise ValueError("zero polynomial has no lead term")
        m = max(self.terms, key=ordering.key)
        return m, self.terms[m]

    # -- ring arithmetic ----------------------------------------------

    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatchError(f"rings differ: {self.ring.variables} vs {other.ring.variables}")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self.ring.zero()
            return Polynomial(self.ring, {m: c * other for m, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Polynomial(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = self.ring.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- calculus and substitution ------------------------------------

    def differentiate(self, var) -> "Polynomial":
        """Formal partial derivative with respect to a variable (name or index)."""
        i = var if isinstance(var, int) else self.ring.index(var)
        if not 0 <= i < self.ring.nvars:
            raise IndexError(f"variable index {i} out of range")
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                dm = m[:i] + (e - 1,) + m[i + 1:]
                s = out.get(dm, 0) + c * e
                if s:
                    out[dm] = s
                else:
                    del out[dm]
        return Polynomial(self.ring, out)

    def substitute(self, assignment: Mapping[str, object], target: Ring = None) -> "Polynomial":
        """Exact composition: replace assigned variables by polynomials (or
        constants) over ``target``; unassigned variables map to themselves.

        ``target`` defaults to the ring of the first polynomial value in the
        assignment, else to this polynomial's ring.  A needed unassigned
        variable missing from the target ring is an error.
        """
        if target is None:
            for v in assignment.values():
                if isinstance(v, Polynomial):
                    target = v.ring
                    break
            else:
                target = self.ring
        images = {}
        for name, value in assignment.items():
            i = self.ring.index(name)
            if isinstance(value, Polynomial):
                if value.ring != target:
                    raise RingMismatchError(f"assignment for {name} lives outside the target ring")
                images[i] = value
            else:
                images[i] = target.const(value)
        used = self.variables_used()
        for i in used:
            if i not in images:
                name = self.ring.variables[i]
                if name not in target.variables:
                    raise KeyError(f"target ring {target.variables} is missing variable {name!r}")
                images[i] = target.var(name)
        out = target.zero()
        # cache powers of each image polynomial as they are needed
        powers = {i: {0: target.one()} for i in images}
        for m, c in self.terms.items():
            piece = target.const(c)
            for i, e in enumerate(m):
                if not e:
                    continue
                cache = powers[i]
                if e not in cache:
                    p = cache[max(cache)]
                    for _ in range(max(cache), e):
                        p = p * images[i]
                        cache[max(cache) + 1] = p
                piece = piece * cache[e]
            out = out + piece
        return out

    def content_free(self) -> "Polynomial":
        """Scale to coprime integer coefficients with positive first lead
        coefficient under degrevlex; canonical integral representative."""
        if not self.terms:
            return self
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        scale = Fraction(den, num)
        m = max(self.terms, key=Ordering(DEGREVLEX, self.ring.nvars).key)
        if self.terms[m] < 0:
            scale = -scale
        return self * scale

    # -- printing -------------------------------------------------------

    def __repr__(self):
        return f"Polynomial({self.to_string()!r})"

    def __str__(self):
        return self.to_string()

    def to_string(self) -> str:
        """Render in the input grammar (round-trips through Ring.parse)."""
        if not self.terms:
            return "0"
        ordkey = Ordering(DEGREVLEX, self.ring.nvars).key
        parts = []
        for m in sorted(self.terms, key=ordkey, reverse=True):
            c = self.terms[m]
            factors = []
            for name, e in zip(self.ring.variables, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            parts.append(("- " if c < 0 else "+ ") + body)
        head = parts[0][2:] if parts[0].startswith("+ ") else "-" + parts[0][2:]
        return " ".join([head] + parts[1:])


# ---------------------------------------------------------------------------
# univariate utilities

def _univariate_index(p: Polynomial):
    used = p.variables_used()
    if len(used) > 1:
        raise ValueError(f"polynomial {p} is not univariate")
    return used.pop() if used else None


def univariate_coeffs(p: Polynomial):
    """Dense coefficient list c[0..deg] of a univariate polynomial."""
    i = _univariate_index(p)
    coeffs = [Fraction(0)] * (p.degree() + 1) if p.terms else []
    for m, c in p.terms.items():
        coeffs[m[i] if i is not None else 0] = c
    return coeffs


def univariate_from_coeffs(r: Ring, var: str, coeffs) -> Polynomial:
    i = r.index(var)
    terms = {}
    for e, c in enumerate(coeffs):
        if c:
            expo = [0] * r.nvars
            expo[i] = e
            terms[tuple(expo)] = Fraction(c)
    return Polynomial(r, terms)


def univariate_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd of two univariate polynomials in the same variable."""
    if a.ring != b.ring:
        raise RingMismatchError("gcd operands in different rings")
    ia, ib = _univariate_index(a), _univariate_index(b)
    if ia is not None and ib is not None and ia != ib:
        raise ValueError("gcd operands use different variables")
    fa, fb = univariate_coeffs(a), univariate_coeffs(b)
    while fb:
        fa, fb = fb, _poly_mod(fa, fb)
    if not fa:
        return a.ring.zero()
    lc = fa[-1]
    var = a.ring.variables[ia if ia is not None else (ib if ib is not None else 0)]
    return univariate_from_coeffs(a.ring, var, [c / lc for c in fa])


def _poly_mod(a, b):
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and a:
        q = a[-1] / lb
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] -= q * c
        while a and a[-1] == 0:
            a.pop()
    return a


def squarefree(m: Polynomial) -> bool:
    """True iff the univariate polynomial has no repeated roots."""
    i = _univariate_index(m)
    if i is None:
        return True
    g = univariate_gcd(m, m.differentiate(i))
    return g.degree() == 0


# ---------------------------------------------------------------------------
# parser for the polynomial text grammar:
#   poly   := ['+'|'-'] term (('+'|'-') term)*
#   term   := coeff ('*' factor)* | factor ('*' factor)*
#   factor := var ('^' int)? | '(' poly ')'
#   coeff  := int ('/' int)?
# Implicit multiplication is disallowed.

class _Tokens:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.toks = []
        self._scan()
        self.i = 0

    def _scan(self):
        t, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = t[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < n and t[j].isdigit():
                    j += 1
                self.toks.append(("int", t[i:j], i))
                i = j
            elif ch.isalpha() or ch == "_":
                j = i
                while j < n and (t[j].isalnum() or t[j] == "_"):
                    j += 1
                self.toks.append(("name", t[i:j], i))
                i = j
            elif ch in "+-*^()/":
                self.toks.append((ch, ch, i))
                i += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", t, i)
        self.toks.append(("end", "", n))

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok


def _parse_poly(r: Ring, text: str) -> Polynomial:
    toks = _Tokens(text)
    p = _poly(r, toks, text)
    kind, _, pos = toks.peek()
    if kind != "end":
        raise ParseError("trailing input after polynomial", text, pos)
    return p


def _poly(r, toks, text):
    sign = 1
    if toks.peek()[0] in "+-":
        sign = -1 if toks.next()[0] == "-" else 1
    out = _term(r, toks, text) * sign
    while toks.peek()[0] in "+-":
        op = toks.next()[0]
        t = _term(r, toks, text)
        out = out - t if op == "-" else out + t
    return out


def _term(r, toks, text):
    kind, _, pos = toks.peek()
    if kind == "int":
        out = r.const(_coeff(toks, text))
    elif kind in ("name", "("):
        out = _factor(r, toks, text)
    else:
        raise ParseError("expected a coefficient, variable, or '('", text, pos)
    while toks.peek()[0] == "*":
        toks.next()
        out = out * _factor(r, toks, text)
    return out


def _coeff(toks, text):
    _, num, _ = toks.next()
    if toks.peek()[0] == "/":
        toks.next()
        kind, den, pos = toks.next()
        if kind != "int":
            raise ParseError("expected an integer denominator", text, pos)
        if int(den) == 0:
            raise ParseError("zero denominator", text, pos)
        return Fraction(int(num), int(den))
    return Fraction(int(num))


def _factor(r, toks, text):
    kind, val, pos = toks.next()
    if kind == "(":
        p = _poly(r, toks, text)
        kind, _, pos = toks.next()
        if kind != ")":
            raise ParseError("expected ')'", text, pos)
        return p
    if kind != "name":
        raise ParseError("expected a variable or '('", text, pos)
    if val not in r.variables:
        raise ParseError(f"unknown variable {val!r}", text, pos)
    p = r.var(val)
    if toks.peek()[0] == "^":
        toks.next()
        kind, e, pos = toks.next()
        if kind != "int":
            raise ParseError("expected an integer exponent", text, pos)
        p = p ** int(e)
    return p
