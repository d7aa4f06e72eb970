"""Presentation matrices of codimension-2 determinantal germs and the
matrix-level operations the pipeline is built from: minors, Jacobians,
bordered matrices, hyperplane sections, and deformations.

A presentation matrix is an (n+1) x n grid of polynomials vanishing at the
origin; its maximal minors generate the ideal of the germ.  Deformed members
of a family are the same type with the origin condition waived.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .polycore import Polynomial, Ring, mono_deg

AUTO_BOUND = 5


@dataclass(frozen=True)
class IdealGens:
    """Nonzero, deduplicated polynomial generators of an ideal."""

    ring: Ring
    generators: tuple

    @staticmethod
    def of(ring: Ring, polys: Sequence[Polynomial]) -> "IdealGens":
        out, seen = [], set()
        for p in polys:
            if p.ring != ring:
                raise ValueError("generator outside the ambient ring")
            if not p.is_zero() and p not in seen:
                seen.add(p)
                out.append(p)
        return IdealGens(ring, tuple(out))

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)


@dataclass(frozen=True)
class PresentationMatrix:
    """An (n+1) x n matrix germ over r ambient variables.

    ``deformed`` marks members of a deformation family, for which the
    entries-vanish-at-zero requirement is waived.
    """

    ring: Ring
    entries: tuple                       # tuple of row tuples of Polynomial
    deformed: bool = False

    def __post_init__(self):
        rows = {len(r) for r in self.entries}
        if len(rows) != 1:
            raise ValueError("entry grid is not rectangular")
        for row in self.entries:
            for e in row:
                if e.ring != self.ring:
                    raise ValueError("entry outside the ambient ring")
        if not self.deformed:
            for row in self.entries:
                for e in row:
                    if e.constant() != 0:
                        raise ValueError(
                            "germ entries must vanish at the origin "
                            "(flag deformed=True for family members)")

    @property
    def n_rows(self):
        return len(self.entries)

    @property
    def n_cols(self):
        return len(self.entries[0])

    @property
    def minor_size(self):
        return min(self.n_rows, self.n_cols)

    def is_presentation_shape(self) -> bool:
        """Codimension-2 shape: (n+1) x n, in either orientation."""
        return abs(self.n_rows - self.n_cols) == 1

    def tall(self) -> "PresentationMatrix":
        """The (n+1) x n orientation (transpose of a wide matrix); minors
        are unchanged, so either orientation presents the same ideal."""
        if self.n_rows >= self.n_cols:
            return self
        rows = tuple(tuple(self.entries[i][j] for i in range(self.n_rows))
                     for j in range(self.n_cols))
        return PresentationMatrix(self.ring, rows, self.deformed)

    @staticmethod
    def parse(ring: Ring, grid: Sequence[Sequence[str]], deformed=False) -> "PresentationMatrix":
        rows = tuple(tuple(ring.parse(s) for s in row) for row in grid)
        return PresentationMatrix(ring, rows, deformed)

    def to_grid(self):
        return [[e.to_string() for e in row] for row in self.entries]

    def map_entries(self, fn, ring=None, deformed=None) -> "PresentationMatrix":
        rows = tuple(tuple(fn(e) for e in row) for row in self.entries)
        return PresentationMatrix(ring or self.ring, rows,
                                  self.deformed if deformed is None else deformed)


@dataclass(frozen=True)
class ProjectionData:
    """A linear form p = sum c_i x_i and the constant 1-form dp it induces."""

    ring: Ring
    coefficients: tuple

    def __post_init__(self):
        if len(self.coefficients) != self.ring.nvars:
            raise ValueError("coefficient count does not match the ring")
        if not any(self.coefficients):
            raise ValueError("projection form is zero")

    @staticmethod
    def parse(ring: Ring, text: str) -> "ProjectionData":
        p = ring.parse(text)
        coeffs = [Fraction(0)] * ring.nvars
        for m, c in p.terms.items():
            if mono_deg(m) != 1:
                raise ValueError(f"{text!r} is not a linear form")
            coeffs[m.index(1)] = c
        return ProjectionData(ring, tuple(coeffs))

    def form(self) -> Polynomial:
        out = self.ring.zero()
        for name, c in zip(self.ring.variables, self.coefficients):
            if c:
                out = out + self.ring.var(name) * c
        return out

    def to_string(self) -> str:
        return self.form().to_string()


@dataclass(frozen=True)
class DeformationTemplate:
    """A matrix family: entries over ambient variables plus named parameters.

    Setting every parameter to zero recovers the base grid; an assignment of
    rational values to all parameters picks a family member.  The base need
    not coincide entry-wise with the germ being deformed (families are often
    written after row/column operations), only its shape and ring must.
    """

    ring: Ring                           # ambient variables only
    family_ring: Ring                    # ambient variables + parameters
    family: tuple                        # grid over family_ring
    parameters: tuple
    assignment: Mapping[str, Fraction] = field(default_factory=dict)

    def base(self) -> PresentationMatrix:
        zeros = {p: 0 for p in self.parameters}
        rows = tuple(tuple(e.substitute(zeros, self.ring) for e in row) for row in self.family)
        return PresentationMatrix(self.ring, rows)

    def member(self, assignment: Optional[Mapping] = None) -> PresentationMatrix:
        values = dict(self.assignment)
        if assignment:
            values.update(assignment)
        missing = [p for p in self.parameters if p not in values]
        if missing:
            raise ValueError(f"no assignment for parameters {missing}")
        subs = {p: Fraction(values[p]) for p in self.parameters}
        rows = tuple(tuple(e.substitute(subs, self.ring) for e in row) for row in self.family)
        return PresentationMatrix(self.ring, rows, deformed=True)


# ---------------------------------------------------------------------------
# determinants and minors

def _det(grid) -> Polynomial:
    n = len(grid)
    if n == 1:
        return grid[0][0]
    if n == 2:
        return grid[0][0] * grid[1][1] - grid[0][1] * grid[1][0]
    total = grid[0][0].ring.zero()
    for j in range(n):
        sub = [[row[jj] for jj in range(n) if jj != j] for row in grid[1:]]
        term = grid[0][j] * _det(sub)
        total = total + term if j % 2 == 0 else total - term
    return total


def _grid_minors(entries, k):
    """All k x k minors by cofactor expansion, in lexicographic order of
    (row subset, column subset); the enumeration is fixed so downstream
    reports are byte-stable."""
    rows, cols = len(entries), len(entries[0])
    out = []
    for rs in itertools.combinations(range(rows), k):
        for cs in itertools.combinations(range(cols), k):
            out.append(_det([[entries[i][j] for j in cs] for i in rs]))
    return out


def maximal_minors(M: PresentationMatrix, t: Optional[int] = None) -> IdealGens:
    """The t x t minors of M (default maximal), deduplicated, zeros dropped."""
    t = M.minor_size if t is None else t
    if t > M.minor_size or t < 1:
        raise ValueError(f"minor size {t} out of range for {M.n_rows}x{M.n_cols}")
    return IdealGens.of(M.ring, _grid_minors(M.entries, t))


def kxk_minors(grid: Sequence[Sequence[Polynomial]], k: int) -> IdealGens:
    """All k x k minors of an arbitrary polynomial matrix."""
    rows, cols = len(grid), len(grid[0])
    if not 1 <= k <= min(rows, cols):
        raise ValueError(f"minor size {k} out of range for {rows}x{cols}")
    ring = grid[0][0].ring
    return IdealGens.of(ring, _grid_minors(list(grid), k))


def hilbert_burch_check(M: PresentationMatrix, f: Optional[IdealGens] = None) -> bool:
    """The signed maximal-minor vector annihilates M (column by column).

    With d_i the minor of M after deleting row i, checks
    sum_i (-1)^i d_i M[i][j] = 0 for every column j; when ``f`` is given it
    must equal maximal_minors(M).  Wide matrices are transposed first.
    """
    if not M.is_presentation_shape():
        raise ValueError("expected an (n+1) x n matrix (either orientation)")
    if f is not None and IdealGens.of(M.ring, list(f)) != maximal_minors(M):
        raise ValueError("given generators are not the maximal minors of M")
    M = M.tall()
    signed = []
    for i in range(M.n_rows):
        sub = [list(row) for r, row in enumerate(M.entries) if r != i]
        d = _det(sub)
        signed.append(d if i % 2 == 0 else -d)
    for j in range(M.n_cols):
        acc = M.ring.zero()
        for i in range(M.n_rows):
            acc = acc + signed[i] * M.entries[i][j]
        if not acc.is_zero():
            return False
    return True


def jacobian(f: IdealGens) -> list:
    """Rows are gradients of the generators, columns follow the ring order."""
    r = f.ring
    return [[g.differentiate(i) for i in range(r.nvars)] for g in f]


def bordered_matrix(Jf: Sequence[Sequence[Polynomial]], omega: ProjectionData) -> list:
    """Jf with the constant coefficient row of the 1-form appended."""
    ring = Jf[0][0].ring
    if len(omega.coefficients) != len(Jf[0]):
        raise ValueError("1-form length does not match the Jacobian columns")
    rows = [list(row) for row in Jf]
    rows.append([ring.const(c) for c in omega.coefficients])
    return rows


def hyperplane_section(M: PresentationMatrix, p: ProjectionData) -> PresentationMatrix:
    """Restrict to the hyperplane p = 0 by solving for the highest-index
    variable with a nonzero coefficient; the result lives in r-1 variables."""
    coeffs = p.coefficients
    i = max(j for j, c in enumerate(coeffs) if c)
    small = Ring(tuple(v for j, v in enumerate(M.ring.variables) if j != i))
    repl = small.zero()
    for j, c in enumerate(coeffs):
        if j != i and c:
            repl = repl - small.var(M.ring.variables[j]) * (c / coeffs[i])
    name = M.ring.variables[i]
    return M.map_entries(lambda e: e.substitute({name: repl}, small),
                         ring=small, deformed=M.deformed)


def perturb(M: PresentationMatrix,
            template: Optional[DeformationTemplate] = None,
            seed: int = 0,
            scale: Fraction = Fraction(1),
            bound: int = AUTO_BOUND) -> PresentationMatrix:
    """A deformed family member.

    Template mode applies the template's parameter assignment.  Auto mode
    adds to each entry a nonzero constant drawn uniformly from
    {-bound..bound}, scaled by ``scale`` (default 1), using a generator
    seeded deterministically by ``seed``.
    """
    if template is not None:
        if template.ring != M.ring:
            raise ValueError("template ring differs from the matrix ring")
        member = template.member()
        if (member.n_rows, member.n_cols) != (M.n_rows, M.n_cols):
            raise ValueError("template shape differs from the matrix shape")
        return member
    rng = random.Random(seed)
    scale = Fraction(scale)

    def shift(e):
        c = 0
        while c == 0:
            c = rng.randint(-bound, bound)
        return e + c * scale

    return M.map_entries(shift, deformed=True)


# ---------------------------------------------------------------------------
# weighted homogeneity

def weight_vector(M: PresentationMatrix):
    """Positive integer variable weights making every entry weighted
    homogeneous of degree row_weight + column_weight, or None.

    Finds the rational solution space of the homogeneity constraints by
    exact elimination and searches small combinations of its basis for a
    strictly positive weight vector; a None result is therefore conservative
    (used only to set the global-count caveat flag on reports).
    """
    nv = M.ring.nvars
    nr, nc = M.n_rows, M.n_cols
    # unknowns: variable weights, then row weights, then column weights
    unknowns = nv + nr + nc
    rows = []
    for i, row in enumerate(M.entries):
        for j, e in enumerate(row):
            monos = list(e.terms)
            if not monos:
                continue
            # weight of each monomial equals r_i + c_j
            for m in monos:
                vec = [Fraction(0)] * unknowns
                for v, exp in enumerate(m):
                    vec[v] = Fraction(exp)
                vec[nv + i] -= 1
                vec[nv + nr + j] -= 1
                rows.append(vec)
    basis = _nullspace(rows, unknowns)
    if not basis:
        return None
    # search small integer combinations for strictly positive var weights
    span = [b[:nv] for b in basis]
    coeff_range = range(-3, 4)
    for combo in itertools.product(coeff_range, repeat=len(span)):
        if not any(combo):
            continue
        w = [sum(c * b[i] for c, b in zip(combo, span)) for i in range(nv)]
        if all(x > 0 for x in w):
            den = 1
            for x in w:
                den = den * x.denominator // _gcd(den, x.denominator)
            wi = [int(x * den) for x in w]
            g = 0
            for x in wi:
                g = _gcd(g, x)
            return tuple(x // g for x in wi)
    return None


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _nullspace(rows, n):
    """Basis of the nullspace of a rational matrix given as row vectors."""
    mat = [list(r) for r in rows]
    pivots = []
    rank = 0
    for col in range(n):
        piv = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        lead = mat[rank][col]
        mat[rank] = [x / lead for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col]:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -mat[r][fc]
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# matrix input files

def matrix_to_document(M: PresentationMatrix,
                       params: Optional[Mapping[str, int]] = None,
                       template: Optional[DeformationTemplate] = None) -> dict:
    doc = {
        "variables": list(M.ring.variables),
        "entries": M.to_grid(),
    }
    if params:
        doc["params"] = dict(params)
    if template is not None:
        doc["deformation"] = {
            "parameters": list(template.parameters),
            "entries": [[e.to_string() for e in row] for row in template.family],
            "assignment": {k: str(v) for k, v in template.assignment.items()},
        }
    return doc


def matrix_from_document(doc: Mapping) -> tuple:
    """(matrix, params, template-or-None) from a parsed input document."""
    try:
        variables = tuple(doc["variables"])
        grid = doc["entries"]
    except KeyError as e:
        raise ValueError(f"matrix document is missing field {e}") from None
    ring = Ring(variables)
    M = PresentationMatrix.parse(ring, grid)
    params = dict(doc.get("params", {}))
    template = None
    if "deformation" in doc:
        block = doc["deformation"]
        if isinstance(block, list):
            block = {"entries": block}
        family_grid = block["entries"]
        names = block.get("parameters")
        if names is None:
            names = sorted({tok for row in family_grid for s in row
                            for tok in _names_in(s)} - set(variables))
        family_ring = Ring(variables + tuple(names))
        family = tuple(tuple(family_ring.parse(s) for s in row) for row in family_grid)
        assignment = {k: Fraction(v) for k, v in block.get("assignment", {}).items()}
        for name in names:
            assignment.setdefault(name, Fraction(1))
        template = DeformationTemplate(ring, family_ring, family, tuple(names), assignment)
    return M, params, template


def _names_in(text: str):
    out, i = set(), 0
    while i < len(text):
        if text[i].isalpha() or text[i] == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.add(text[i:j])
            i = j
        else:
            i += 1
    return out


def load_matrix_file(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    return matrix_from_document(doc)


def save_matrix_file(path: str, M: PresentationMatrix, params=None, template=None):
    doc = matrix_to_document(M, params, template)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
