"""Groebner bases (global orderings) and Mora standard bases (local
orderings) over the rationals, plus the quotient-ring tooling built on them:
dimension, solution counting, minimal polynomials of linear forms, and
elimination.

Internally every polynomial is handled fraction-free: a dict of integer
coefficients kept content-free (gcd 1) after each reduction step, which keeps
Buchberger feasible over Q without modular arithmetic.  Public inputs and
outputs are ordinary ``polycore.Polynomial`` values with monic normalization.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .polycore import (
    Mono,
    Ordering,
    Polynomial,
    Ring,
    degrevlex,
    elimination,
    mono_deg,
    mono_div,
    mono_divides,
    mono_lcm,
    mono_mul,
    univariate_from_coeffs,
    ring as make_ring,
)


@dataclass(frozen=True)
class GroebnerBasis:
    """A reduced basis: monic generators, no lead monomial dividing another.

    For local orderings the basis is a Mora standard basis, lead-interreduced
    and monic but not tail-reduced (tail reduction need not terminate in the
    local ring).
    """

    ring: Ring
    ordering: Ordering
    basis: tuple
    lead_monomials: tuple

    def is_unit(self) -> bool:
        return len(self.basis) == 1 and self.basis[0] == self.ring.one()


@dataclass(frozen=True)
class QuotientInfo:
    """Vector-space data of R/I: finite dimension and its staircase."""

    zero_dimensional: bool
    dimension: Optional[int]          # None means infinite
    standard_monomials: tuple


# ---------------------------------------------------------------------------
# integer-coefficient internals

def _to_int_terms(p: Polynomial) -> dict:
    den = 1
    for c in p.terms.values():
        den = den * c.denominator // gcd(den, c.denominator)
    terms = {m: int(c * den) for m, c in p.terms.items()}
    g = 0
    for v in terms.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        terms = {m: v // g for m, v in terms.items()}
    return terms


def _content(d: dict) -> int:
    g = 0
    for v in d.values():
        g = gcd(g, v)
        if g == 1:
            return 1
    return g


class _Reducer:
    """One basis element in engine form, with cached lead data and ecart."""

    __slots__ = ("terms", "lm", "lc", "ecart")

    def __init__(self, terms: dict, key):
        self.terms = terms
        self.lm = max(terms, key=key)
        self.lc = terms[self.lm]
        self.ecart = max(mono_deg(m) for m in terms) - mono_deg(self.lm)


def _find_reducer(reducers, m: Mono, rng=None):
    if rng is None:
        for g in reducers:
            if mono_divides(g.lm, m):
                return g
        return None
    candidates = [g for g in reducers if mono_divides(g.lm, m)]
    return rng.choice(candidates) if candidates else None


def _cancel_lead(h: dict, r: dict, g: _Reducer, m: Mono) -> int:
    """In place: scale (h, r) and subtract a multiple of g so that term m of
    h cancels exactly; returns the scale factor applied (positive)."""
    c = h[m]
    d = gcd(c, g.lc)
    a = abs(g.lc) // d
    b = c // d if g.lc > 0 else -(c // d)
    if a != 1:
        for k in h:
            h[k] *= a
        for k in r:
            r[k] *= a
    delta = mono_div(m, g.lm)
    for mg, cg in g.terms.items():
        k = mono_mul(mg, delta)
        v = h.get(k, 0) - b * cg
        if v:
            h[k] = v
        else:
            h.pop(k, None)
    return a


def _nf_global(f: dict, reducers, key, rng=None):
    """Fully reduced normal form of an integer-term dict.

    Returns (remainder dict, scale) with remainder == scale * exact
    normal form of f; the scale makes the division fraction-free while the
    caller can recover the exact, Q-linear remainder.
    """
    h = dict(f)
    r = {}
    scale = Fraction(1)
    while h:
        m = max(h, key=key)
        g = _find_reducer(reducers, m, rng)
        if g is None:
            r[m] = h.pop(m)
            continue
        scale *= _cancel_lead(h, r, g, m)
        c = gcd(_content(h), _content(r))
        if c > 1:
            for k in h:
                h[k] //= c
            for k in r:
                r[k] //= c
            scale /= c
    return r, scale


def _nf_mora(f: dict, reducers, key, rng=None):
    """Mora's weak normal form for local orderings.

    Reduces the lead term only, picking a divisor of minimal ecart and
    inserting the intermediate result into the reducer set whenever its
    ecart is exceeded; this is what guarantees termination where naive
    tail reduction would loop.  The result is exact only up to a unit of
    the local ring, so no scale is tracked; the lead monomial of a nonzero
    result is irreducible.
    """
    work = list(reducers)
    h = dict(f)
    while h:
        m = max(h, key=key)
        candidates = [g for g in work if mono_divides(g.lm, m)]
        if not candidates:
            break
        ecart_h = max(mono_deg(k) for k in h) - mono_deg(m)
        if rng is None:
            g = min(candidates, key=lambda g: g.ecart)
        else:
            best = min(g.ecart for g in candidates)
            g = rng.choice([g for g in candidates if g.ecart == best])
        if g.ecart > ecart_h:
            work.append(_Reducer(dict(h), key))
        _cancel_lead(h, {}, g, m)
        c = _content(h)
        if c > 1:
            for k in h:
                h[k] //= c
    return h, None


def _spair(f: _Reducer, g: _Reducer) -> dict:
    lcm = mono_lcm(f.lm, g.lm)
    d = gcd(f.lc, g.lc)
    af, ag = g.lc // d, f.lc // d
    mf, mg = mono_div(lcm, f.lm), mono_div(lcm, g.lm)
    out = {}
    for m, c in f.terms.items():
        out[mono_mul(m, mf)] = af * c
    for m, c in g.terms.items():
        k = mono_mul(m, mg)
        v = out.get(k, 0) - ag * c
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


# ---------------------------------------------------------------------------
# Buchberger / Mora main loop

def buchberger(gens: Sequence[Polynomial], ordering: Ordering) -> GroebnerBasis:
    """Reduced Groebner basis (global ordering) or reduced Mora standard
    basis (local ordering) of the ideal generated by ``gens``.

    Deterministic: normal selection strategy (pair with the smallest lcm
    under the ordering first, ties broken by insertion index).  The product
    and chain criteria are applied for global orderings.
    """
    polys = [p for p in gens if not p.is_zero()]
    if not polys:
        raise ValueError("empty generator list")
    base_ring = polys[0].ring
    for p in polys:
        if p.ring != base_ring:
            raise ValueError("generators live in different rings")
    key = ordering.key
    local = ordering.is_local
    nf = _nf_mora if local else _nf_global

    G = []
    seen = set()
    for p in polys:
        t = _to_int_terms(p)
        fs = frozenset(t.items())
        if fs not in seen:
            seen.add(fs)
            G.append(_Reducer(t, key))

    pairs = []                      # heap of (lcm key, counter, i, j, lcm)
    pending = set()                 # (i, j) with i < j still queued
    counter = itertools.count()

    def push_pairs(t: int):
        for i in range(t):
            lcm = mono_lcm(G[i].lm, G[t].lm)
            heapq.heappush(pairs, (key(lcm), next(counter), i, t, lcm))
            pending.add((i, t))

    for t in range(len(G)):
        push_pairs(t)

    while pairs:
        _, _, i, j, lcm = heapq.heappop(pairs)
        pending.discard((i, j))
        gi, gj = G[i], G[j]
        if not local:
            if mono_mul(gi.lm, gj.lm) == lcm:
                continue            # product criterion: coprime leads
            if _chain_criterion(G, pending, i, j, lcm):
                continue
        rem, _ = nf(_spair(gi, gj), G, key)
        if rem:
            G.append(_Reducer(rem, key))
            push_pairs(len(G) - 1)

    return _finalize(base_ring, ordering, G, key)


def _chain_criterion(G, pending, i, j, lcm) -> bool:
    for k in range(len(G)):
        if k == i or k == j:
            continue
        if mono_divides(G[k].lm, lcm):
            a = (min(i, k), max(i, k))
            b = (min(j, k), max(j, k))
            if a not in pending and b not in pending:
                return True
    return False


def _finalize(r: Ring, ordering: Ordering, G, key) -> GroebnerBasis:
    # a unit lead monomial means the (local or global) ideal is everything
    const = (0,) * r.nvars
    if any(g.lm == const for g in G):
        return GroebnerBasis(r, ordering, (r.one(),), (const,))
    # minimalize: drop any element whose lead another lead divides
    kept = []
    for g in sorted(G, key=lambda g: key(g.lm)):
        if not any(mono_divides(h.lm, g.lm) for h in kept):
            kept = [h for h in kept if not mono_divides(g.lm, h.lm)]
            kept.append(g)
    kept.sort(key=lambda g: key(g.lm))
    if not ordering.is_local:
        reduced = []
        for idx, g in enumerate(kept):
            others = kept[:idx] + kept[idx + 1:]
            t, _ = _nf_global(g.terms, others, key)
            reduced.append(_Reducer(t, key))
        kept = sorted(reduced, key=lambda g: key(g.lm))
    basis = tuple(_monic_poly(r, g) for g in kept)
    return GroebnerBasis(r, ordering, basis, tuple(g.lm for g in kept))


def _monic_poly(r: Ring, g: _Reducer) -> Polynomial:
    return Polynomial(r, {m: Fraction(c, g.lc) for m, c in g.terms.items()})


# ---------------------------------------------------------------------------
# public operations on a basis

def normal_form(p: Polynomial, G: GroebnerBasis, rng=None) -> Polynomial:
    """Remainder of ``p`` on division by the basis.

    Global orderings give the fully reduced normal form, which is idempotent
    and Q-linear (exact coefficients, no rescaling).  Local orderings give
    Mora's weak normal form, canonically rescaled to a content-free
    representative: zero exactly on members of the localized ideal.  ``rng``
    randomizes reducer selection; the result does not depend on it
    (confluence on a Groebner basis).
    """
    if p.ring != G.ring:
        raise ValueError("polynomial and basis rings differ")
    if p.is_zero():
        return p
    key = G.ordering.key
    reducers = [_Reducer(_to_int_terms(g), key) for g in G.basis]
    num = 1
    for c in p.terms.values():
        num = num * c.denominator // gcd(num, c.denominator)
    f = {m: int(c * num) for m, c in p.terms.items()}
    if G.ordering.is_local:
        rem, _ = _nf_mora(f, reducers, key, rng)
        if not rem:
            return p.ring.zero()
        lead = max(rem, key=key)
        sign = -1 if rem[lead] < 0 else 1
        return Polynomial(p.ring, {m: Fraction(sign * c) for m, c in rem.items()})
    rem, scale = _nf_global(f, reducers, key, rng)
    factor = Fraction(1, num) / scale
    return Polynomial(p.ring, {m: c * factor for m, c in rem.items()})


def is_unit_ideal(G: GroebnerBasis) -> bool:
    """Smoothness-style certificate: the ideal is the whole ring."""
    return G.is_unit()


def ideal_dimension(G: GroebnerBasis) -> int:
    """Krull dimension from the staircase of lead monomials (global only).

    The dimension is the largest size of a variable subset S such that no
    lead monomial involves only variables from S; the unit ideal has
    dimension -1.
    """
    if G.ordering.is_local:
        raise ValueError("ideal_dimension needs a global ordering")
    n = G.ring.nvars
    supports = [frozenset(i for i, e in enumerate(m) if e) for m in G.lead_monomials]
    for size in range(n, -1, -1):
        for S in itertools.combinations(range(n), size):
            sset = set(S)
            if all(not supp <= sset for supp in supports):
                return size
    return -1


def quotient_dimension(G: GroebnerBasis) -> QuotientInfo:
    """Count the standard monomials (those outside the lead-term ideal).

    The count is the vector-space dimension of R/I for global orderings and
    of the local ring modulo the ideal for local ones; it is finite exactly
    when every variable has a pure power among the lead monomials.
    """
    n = G.ring.nvars
    leads = G.lead_monomials
    if (0,) * n in leads:
        return QuotientInfo(True, 0, ())
    bounds = []
    for i in range(n):
        b = None
        for m in leads:
            if m[i] and all(e == 0 for j, e in enumerate(m) if j != i):
                b = m[i] if b is None else min(b, m[i])
        if b is None:
            return QuotientInfo(False, None, ())
        bounds.append(b)
    standard = []
    for expo in itertools.product(*[range(b) for b in bounds]):
        if not any(mono_divides(m, expo) for m in leads):
            standard.append(expo)
    standard.sort(key=G.ordering.key)
    return QuotientInfo(True, len(standard), tuple(standard))


def minimal_polynomial(ell: Polynomial, G: GroebnerBasis, var: str = "t") -> Polynomial:
    """Monic least-degree univariate m with m(ell) in the ideal.

    Computes normal forms of successive powers of ``ell`` and finds the
    first exact linear dependence over Q.  Requires a finite quotient and a
    global ordering (normal forms must be linear).
    """
    if G.ordering.is_local:
        raise ValueError("minimal_polynomial needs a global ordering")
    info = quotient_dimension(G)
    if not info.zero_dimensional:
        raise ValueError("quotient is not finite dimensional")
    index = {m: i for i, m in enumerate(info.standard_monomials)}
    dim = info.dimension
    tring = make_ring(var)
    if dim == 0:
        return tring.one()

    def coords(p: Polynomial):
        v = [Fraction(0)] * dim
        for m, c in p.terms.items():
            v[index[m]] = c
        return v

    # echelon rows: (pivot index, reduced vector, combination over powers)
    echelon = []
    power = G.ring.one()
    for j in range(dim + 1):
        vec = coords(power)
        combo = [Fraction(0)] * (dim + 2)
        combo[j] = Fraction(1)
        for pivot, row, rcombo in echelon:
            if vec[pivot]:
                f = vec[pivot] / row[pivot]
                vec = [a - f * b for a, b in zip(vec, row)]
                combo = [a - f * b for a, b in zip(combo, rcombo)]
        nz = next((i for i, a in enumerate(vec) if a), None)
        if nz is None:
            lead = combo[j]
            return univariate_from_coeffs(tring, var, [c / lead for c in combo[: j + 1]])
        echelon.append((nz, vec, combo))
        power = normal_form(ell * power, G)
    raise AssertionError("linear dependence must occur by the quotient dimension")


def eliminate(gens: Sequence[Polynomial], keep: Sequence[str]) -> list:
    """Generators of the elimination ideal obtained by projecting away all
    variables outside ``keep``, via a block-elimination Groebner basis."""
    polys = [p for p in gens if not p.is_zero()]
    if not polys:
        return []
    r = polys[0].ring
    keep_idx = {r.index(v) for v in keep}
    drop = [v for i, v in enumerate(r.variables) if i not in keep_idx]
    if not drop:
        return list(polys)
    G = buchberger(polys, elimination(r, drop))
    if G.is_unit():
        return [r.one()]
    return [g for g in G.basis if g.variables_used() <= keep_idx]


def groebner(gens: Sequence[Polynomial], ordering: Optional[Ordering] = None) -> GroebnerBasis:
    """Convenience wrapper defaulting to degrevlex over the generators' ring."""
    polys = list(gens)
    if not polys:
        raise ValueError("empty generator list")
    if ordering is None:
        ordering = degrevlex(polys[0].ring)
    return buchberger(polys, ordering)
