"""The smoothing-and-counting pipeline: isolated-singularity checks,
certified smoothings, critical-point counts of generic linear projections,
and the Milnor-number bookkeeping for curves, surfaces, and 3-folds.

Counting strategy.  Critical points are counted globally over affine space
with exact certificates (zero-dimensionality plus a squarefree separating
eliminant, which proves the critical scheme is reduced, i.e. every critical
point is nondegenerate).  Individual counts depend on the chosen projection
and perturbation: a projection can trade critical points against extra
topology of its own hyperplane section.  The Euler characteristic of the
smoothed fiber,

    chi(X_t) = chi(p^-1(0) /\ X_t) + n_sigma(p),

is what all choices agree on, so the pipeline evaluates the right-hand side
for independently sampled generic data until two trials agree, and reads the
invariants off chi: mu(X) = chi(X_t) - 1 for surfaces (the fiber is
connected with first Betti number zero), mu(C) = 1 - chi(C_t) for curves.
The top polar multiplicity and Poincare-Hopf index are then m_2 = ind_PH =
mu(X) + mu(C) for a generic hyperplane section C.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import matgerm
from .gbasis import (
    GroebnerBasis,
    buchberger,
    groebner,
    ideal_dimension,
    is_unit_ideal,
    minimal_polynomial,
    quotient_dimension,
)
from .matgerm import (
    DeformationTemplate,
    IdealGens,
    PresentationMatrix,
    ProjectionData,
    hyperplane_section,
    jacobian,
    bordered_matrix,
    kxk_minors,
    maximal_minors,
    perturb,
    weight_vector,
)
from .polycore import Polynomial, Ring, degrevlex, negdegrevlex, squarefree

DEFAULT_RETRIES = 8
PROJECTION_BOUND = 9
SEPARATOR_BOUND = 60


class CheckFailedError(ValueError):
    """The input matrix is not a valid codimension-2 isolated germ."""


class CertificationError(RuntimeError):
    """A certification stage exhausted its retry budget."""

    def __init__(self, stage, detail=""):
        self.stage = stage
        super().__init__(f"certification failed at stage {stage!r}" + (f": {detail}" if detail else ""))


def subseed(seed: int, *labels) -> int:
    """Stable derived seed; keeps independent sampling stages decoupled."""
    text = repr((seed,) + labels).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


def _random_projection(ring: Ring, rng: random.Random) -> ProjectionData:
    while True:
        coeffs = tuple(Fraction(rng.randint(-PROJECTION_BOUND, PROJECTION_BOUND))
                       for _ in ring.variables)
        if any(coeffs):
            return ProjectionData(ring, coeffs)


def _random_form(ring: Ring, rng: random.Random, bound: int) -> Polynomial:
    while True:
        p = ring.zero()
        nonzero = False
        for v in ring.variables:
            c = rng.randint(-bound, bound)
            if c:
                nonzero = True
                p = p + ring.var(v) * c
        if nonzero:
            return p


# ---------------------------------------------------------------------------
# input checking

@dataclass(frozen=True)
class CheckReport:
    shape_ok: bool
    codim2: bool
    isolated: bool
    bound_ok: bool
    dimension: Optional[int]
    singular_dimension: Optional[int]
    message: str = ""

    @property
    def ok(self):
        return self.shape_ok and self.codim2 and self.isolated and self.bound_ok

    def to_dict(self):
        return {
            "ok": self.ok,
            "shape_ok": self.shape_ok,
            "codim2": self.codim2,
            "isolated": self.isolated,
            "bound_ok": self.bound_ok,
            "dimension": self.dimension,
            "singular_dimension": self.singular_dimension,
            "message": self.message,
        }


def singular_locus_ideal(M: PresentationMatrix) -> IdealGens:
    """Minors together with the rank <= 1 locus of their Jacobian: the
    Jacobian-criterion singular locus of a codimension-2 determinantal
    variety."""
    f = maximal_minors(M)
    J = jacobian(f)
    return IdealGens.of(M.ring, list(f) + list(kxk_minors(J, 2)))


def check_input(M: PresentationMatrix) -> CheckReport:
    """Shape, codimension-2, isolated-singularity, and size-bound checks."""
    if not M.is_presentation_shape():
        return CheckReport(False, False, False, False, None, None,
                           f"expected an (n+1) x n matrix, got {M.n_rows} x {M.n_cols}")
    r = M.ring.nvars
    t = M.minor_size
    bound_ok = r <= (M.n_rows - t + 2) * (M.n_cols - t + 2)
    f = maximal_minors(M)
    if not f.generators:
        return CheckReport(True, False, False, bound_ok, None, None, "zero minor ideal")
    dim = ideal_dimension(groebner(list(f)))
    codim2 = dim == r - 2
    sing = singular_locus_ideal(M)
    sdim = ideal_dimension(groebner(list(sing)))
    isolated = sdim <= 0
    msg = ""
    if not codim2:
        msg = f"minor ideal has dimension {dim}, expected {r - 2}"
    elif not isolated:
        msg = f"singular locus has dimension {sdim}"
    elif not bound_ok:
        msg = "variable count exceeds the isolated-singularity bound"
    return CheckReport(True, codim2, isolated, bound_ok, dim, sdim, msg)


def require_valid(M: PresentationMatrix) -> CheckReport:
    report = check_input(M)
    if not report.ok:
        raise CheckFailedError(report.message or "input check failed")
    return report


# ---------------------------------------------------------------------------
# smoothings

@dataclass(frozen=True)
class SmoothingFamily:
    base: PresentationMatrix
    deformed: PresentationMatrix
    seed: int
    smooth_certificate: bool
    retries_used: int
    template_used: bool

    def to_dict(self):
        return {
            "seed": self.seed,
            "smooth_certificate": self.smooth_certificate,
            "retries_used": self.retries_used,
            "template_used": self.template_used,
            "deformed_entries": self.deformed.to_grid(),
        }


def is_smooth(M: PresentationMatrix) -> bool:
    return is_unit_ideal(groebner(list(singular_locus_ideal(M))))


def make_smoothing(M: PresentationMatrix,
                   template: Optional[DeformationTemplate] = None,
                   seed: int = 0,
                   retries: int = DEFAULT_RETRIES) -> SmoothingFamily:
    """Perturb and certify: the singular locus of the deformed variety must
    be the unit ideal.  Auto mode re-seeds on failure; a failing explicit
    template is an error (there is nothing to resample)."""
    if template is not None:
        member = perturb(M, template=template)
        cert = is_smooth(member)
        if not cert:
            raise CertificationError("smoothing", "template member is not smooth")
        return SmoothingFamily(M, member, seed, True, 0, True)
    for attempt in range(max(1, retries)):
        member = perturb(M, seed=subseed(seed, "perturb", attempt))
        if is_smooth(member):
            return SmoothingFamily(M, member, seed, True, attempt, False)
    raise CertificationError("smoothing", f"no smooth member in {retries} attempts")


# ---------------------------------------------------------------------------
# critical points

@dataclass(frozen=True)
class CriticalCount:
    count: int
    certified_nondegenerate: bool
    projection: ProjectionData
    seed: int
    retries_used: int

    def to_dict(self):
        return {
            "count": self.count,
            "certified_nondegenerate": self.certified_nondegenerate,
            "projection": self.projection.to_string(),
            "seed": self.seed,
            "retries_used": self.retries_used,
        }


def critical_ideal(M_l: PresentationMatrix, p: ProjectionData) -> IdealGens:
    """Maximal minors of the deformed matrix together with the 3x3 minors of
    the bordered Jacobian [Jf; omega]: rank <= 2 encodes dp vanishing on the
    tangent spaces of a codimension-2 smooth fiber."""
    f = maximal_minors(M_l)
    B = bordered_matrix(jacobian(f), p)
    return IdealGens.of(M_l.ring, list(f) + list(kxk_minors(B, 3)))


def _certified_point_count(gens: Sequence[Polynomial], ring: Ring,
                           rng: random.Random, tries: int = 4) -> Optional[int]:
    """Number of distinct solutions, certified: finite quotient and a
    squarefree separating eliminant of full degree (so the solution scheme
    is reduced).  None when certification fails."""
    G = groebner(list(gens))
    info = quotient_dimension(G)
    if not info.zero_dimensional:
        return None
    if info.dimension == 0:
        return 0
    for _ in range(tries):
        ell = _random_form(ring, rng, SEPARATOR_BOUND)
        m = minimal_polynomial(ell, G)
        if m.degree() == info.dimension:
            return info.dimension if squarefree(m) else None
        # squarefree of lower degree: the form failed to separate, resample
        if not squarefree(m):
            return None
    return None


def count_critical_points(M_l: PresentationMatrix,
                          p: Optional[ProjectionData] = None,
                          seed: int = 0,
                          retries: int = DEFAULT_RETRIES) -> CriticalCount:
    """Certified number of critical points of the projection on the deformed
    variety.  The first attempt uses ``p`` (when given); later attempts
    resample the projection.  Fails only when the budget is exhausted."""
    rng = random.Random(subseed(seed, "count"))
    for attempt in range(max(1, retries)):
        proj = p if (attempt == 0 and p is not None) else _random_projection(M_l.ring, rng)
        n = _certified_point_count(list(critical_ideal(M_l, proj)), M_l.ring, rng)
        if n is not None:
            return CriticalCount(n, True, proj, seed, attempt)
    raise CertificationError("critical-count", f"no certified count in {retries} attempts")


def _section_point_count(M_l: PresentationMatrix, rng: random.Random) -> Optional[int]:
    """Certified number of points cut on the deformed variety by a random
    hyperplane through the origin (the variety misses the origin)."""
    f = list(maximal_minors(M_l))
    ell = _random_form(M_l.ring, rng, PROJECTION_BOUND)
    return _certified_point_count(f + [ell], M_l.ring, rng)


def _curve_fiber_euler(C_l: PresentationMatrix, rng: random.Random,
                       tries: int = 6) -> Optional[int]:
    """chi of a smooth affine determinantal curve: points of a generic
    hyperplane section minus critical points of a generic projection."""
    for _ in range(tries):
        proj = _random_projection(C_l.ring, rng)
        m1 = _certified_point_count(list(critical_ideal(C_l, proj)), C_l.ring, rng)
        if m1 is None:
            continue
        m0 = _section_point_count(C_l, rng)
        if m0 is None:
            continue
        return m0 - m1
    return None


def _agreed(values, needed=2):
    for v in values:
        if v is not None and values.count(v) >= needed:
            return v
    return None


# ---------------------------------------------------------------------------
# curves

@dataclass(frozen=True)
class CurveReport:
    mu: int
    m0: int                    # local multiplicity at the origin
    m1: int                    # local polar count: mu + m0 - 1
    euler_fiber: int           # 1 - mu
    smoothing: SmoothingFamily
    trials: tuple
    caveat_global_count: bool
    seed: int

    @property
    def ind_ph(self):
        return self.m1

    def to_dict(self):
        return {
            "kind": "curve",
            "mu": self.mu,
            "m0": self.m0,
            "m1": self.m1,
            "ind_PH": self.ind_ph,
            "euler_fiber": self.euler_fiber,
            "seed": self.seed,
            "smoothing": self.smoothing.to_dict(),
            "trials": list(self.trials),
            "caveat_global_count": self.caveat_global_count,
        }


def multiplicity_m0(M_C: PresentationMatrix, seed: int = 0,
                    retries: int = DEFAULT_RETRIES) -> int:
    """Local multiplicity of the curve germ: Mora quotient dimension of the
    minor ideal plus a generic hyperplane, retried while infinite."""
    f = list(maximal_minors(M_C))
    G = groebner(f)
    if ideal_dimension(G) != 1:
        raise CheckFailedError("multiplicity_m0 expects a curve (dimension 1)")
    return local_degree(f, seed=seed, retries=retries)


def local_degree(gens: Sequence[Polynomial], seed: int = 0,
                 retries: int = DEFAULT_RETRIES) -> int:
    """Mora quotient dimension of ideal + <generic linear form> at the
    origin; the multiplicity when the ideal defines a curve through 0."""
    ring = gens[0].ring
    rng = random.Random(subseed(seed, "m0"))
    for _ in range(max(1, retries)):
        ell = _random_form(ring, rng, PROJECTION_BOUND)
        G = buchberger(list(gens) + [ell], negdegrevlex(ring))
        info = quotient_dimension(G)
        if info.zero_dimensional:
            return info.dimension
    raise CertificationError("multiplicity", "no finite local quotient found")


def milnor_curve(M_C: PresentationMatrix, seed: int = 0,
                 retries: int = DEFAULT_RETRIES) -> CurveReport:
    """Milnor number of a determinantal curve germ.

    Smooths the matrix and evaluates chi of the smooth fiber as (hyperplane
    section points) - (critical points of a generic projection), accepting
    the value once two independently sampled trials agree; mu = 1 - chi.
    """
    f = list(maximal_minors(M_C))
    if ideal_dimension(groebner(f)) != 1:
        raise CheckFailedError("milnor_curve expects a curve (dimension 1)")
    caveat = weight_vector(M_C) is None
    trials = []
    for attempt in range(max(1, retries)):
        fam = make_smoothing(M_C, seed=subseed(seed, "curve", attempt), retries=retries)
        rng = random.Random(subseed(seed, "curve-trials", attempt))
        chis = []
        for _ in range(4):
            chi = _curve_fiber_euler(fam.deformed, rng)
            chis.append(chi)
            trials.append({"attempt": attempt, "chi": chi})
            agreed = _agreed(chis)
            if agreed is not None and 1 - agreed >= 0:
                mu = 1 - agreed
                m0 = multiplicity_m0(M_C, seed=subseed(seed, "curve-m0"), retries=retries)
                return CurveReport(mu, m0, mu + m0 - 1, agreed, fam, tuple(trials),
                                   caveat, seed)
    raise CertificationError("curve-euler", "no two trials agreed")


# ---------------------------------------------------------------------------
# surfaces

@dataclass(frozen=True)
class SurfaceReport:
    mu: int
    mu_section: int
    m2: int                    # = ind_PH = mu + mu_section
    n_sigma: int               # raw certified count of the accepted trial
    euler_fiber: int           # 1 + mu
    euler_section_fiber: int   # chi of the accepted section fiber
    projection: ProjectionData
    section_curve: PresentationMatrix
    section_report: CurveReport
    smoothing: SmoothingFamily
    trials: tuple
    caveat_global_count: bool
    seed: int
    conjecture: Optional[dict] = None

    @property
    def ind_ph(self):
        return self.m2

    def consistency_identity(self) -> bool:
        return 1 + self.mu == (1 - self.mu_section) + self.m2

    def to_dict(self):
        out = {
            "kind": "surface",
            "mu": self.mu,
            "mu_section": self.mu_section,
            "m2": self.m2,
            "ind_PH": self.ind_ph,
            "n_sigma": self.n_sigma,
            "euler_fiber": self.euler_fiber,
            "euler_section_fiber": self.euler_section_fiber,
            "projection": self.projection.to_string(),
            "section_curve": self.section_curve.to_grid(),
            "section": self.section_report.to_dict(),
            "smoothing": self.smoothing.to_dict(),
            "trials": list(self.trials),
            "caveat_global_count": self.caveat_global_count,
            "consistency_identity": self.consistency_identity(),
            "seed": self.seed,
        }
        if self.conjecture is not None:
            out["conjecture"] = self.conjecture
        return out


def milnor_surface(M: PresentationMatrix, seed: int = 0,
                   retries: int = DEFAULT_RETRIES,
                   projection: Optional[ProjectionData] = None,
                   template: Optional[DeformationTemplate] = None) -> SurfaceReport:
    """Milnor number, section Milnor number, and polar multiplicity of a
    determinantal surface germ in C^4.

    chi(X_t) is evaluated as chi(section fiber) + (critical count) over
    independently sampled projections until two trials agree; then
    mu = chi - 1, mu(C) comes from the curve pipeline on a hyperplane
    section of the germ, and m_2 = ind_PH = mu + mu(C).
    """
    if M.ring.nvars != 4:
        raise CheckFailedError("milnor_surface expects a surface in C^4")
    require_valid(M)
    caveat = weight_vector(M) is None
    trials = []
    for attempt in range(max(1, retries)):
        fam = make_smoothing(M, template=template,
                             seed=subseed(seed, "surface", attempt), retries=retries)
        rng = random.Random(subseed(seed, "surface-trials", attempt))
        candidates = []
        used = []
        for trial in range(5):
            proj = projection if (attempt == 0 and trial == 0 and projection is not None) \
                else _random_projection(M.ring, rng)
            chi = _surface_fiber_euler(fam.deformed, proj, rng)
            candidates.append(None if chi is None else chi[0])
            used.append((proj, chi))
            trials.append({
                "attempt": attempt,
                "projection": proj.to_string(),
                "euler_fiber": None if chi is None else chi[0],
                "n_sigma": None if chi is None else chi[1],
                "euler_section_fiber": None if chi is None else chi[2],
            })
            agreed = _agreed(candidates)
            if agreed is not None and agreed - 1 >= 0:
                mu = agreed - 1
                proj0, data0 = next(u for u in used
                                    if u[1] is not None and u[1][0] == agreed)
                section = hyperplane_section(M, proj0)
                try:
                    section_report = milnor_curve(section, seed=subseed(seed, "section"),
                                                  retries=retries)
                except (CertificationError, CheckFailedError):
                    break  # bad section direction; re-smooth and restart
                mu_c = section_report.mu
                if mu < 0 or mu_c < 0:
                    break
                return SurfaceReport(
                    mu=mu, mu_section=mu_c, m2=mu + mu_c,
                    n_sigma=data0[1], euler_fiber=agreed,
                    euler_section_fiber=data0[2],
                    projection=proj0, section_curve=section,
                    section_report=section_report, smoothing=fam,
                    trials=tuple(trials), caveat_global_count=caveat, seed=seed)
        if template is not None:
            raise CertificationError("surface-euler",
                                     "no agreement on the template smoothing")
    raise CertificationError("surface-euler", "no two trials agreed")


def _surface_fiber_euler(M_l: PresentationMatrix, proj: ProjectionData,
                         rng: random.Random):
    """(chi(X_t), n_sigma, chi(section fiber)) for one projection, or None."""
    n = _certified_point_count(list(critical_ideal(M_l, proj)), M_l.ring, rng)
    if n is None:
        return None
    C_l = hyperplane_section(M_l, proj)
    if not is_smooth(C_l):
        return None
    chi_c = _curve_fiber_euler(C_l, rng)
    if chi_c is None:
        return None
    return (chi_c + n, n, chi_c)


def ph_index(M: PresentationMatrix, seed: int = 0,
             retries: int = DEFAULT_RETRIES,
             projection: Optional[ProjectionData] = None) -> int:
    """Poincare-Hopf index of the differential of a generic linear
    projection; equals the top polar multiplicity m_d."""
    r = M.ring.nvars
    if r == 4:
        return milnor_surface(M, seed=seed, retries=retries, projection=projection).m2
    if r == 3:
        rep = milnor_curve(M, seed=seed, retries=retries)
        return rep.m1
    if r == 5:
        return threefold_combined(M, seed=seed, retries=retries).m3
    raise CheckFailedError(f"unsupported ambient dimension {r}")


# ---------------------------------------------------------------------------
# 3-folds

@dataclass(frozen=True)
class ThreefoldReport:
    m3: int
    mu_section: int
    combined: int              # mu(X) + b_2(X_t); not separated here
    projection: ProjectionData
    section_report: SurfaceReport
    smoothing: SmoothingFamily
    caveat_global_count: bool
    seed: int

    def to_dict(self):
        return {
            "kind": "threefold",
            "m3": self.m3,
            "mu_section": self.mu_section,
            "combined_mu_plus_b2": self.combined,
            "projection": self.projection.to_string(),
            "section": self.section_report.to_dict(),
            "smoothing": self.smoothing.to_dict(),
            "caveat_global_count": self.caveat_global_count,
            "seed": self.seed,
        }


def threefold_combined(M: PresentationMatrix, seed: int = 0,
                       retries: int = DEFAULT_RETRIES,
                       projection: Optional[ProjectionData] = None) -> ThreefoldReport:
    """Top polar count of a 3-fold in C^5 and the combined invariant
    mu + b_2 = m_3 - mu(section surface); b_2 is not separated from mu."""
    if M.ring.nvars != 5:
        raise CheckFailedError("threefold_combined expects a 3-fold in C^5")
    require_valid(M)
    caveat = weight_vector(M) is None
    for attempt in range(max(1, retries)):
        fam = make_smoothing(M, seed=subseed(seed, "threefold", attempt), retries=retries)
        rng = random.Random(subseed(seed, "threefold-trials", attempt))
        counts = []
        projs = []
        for trial in range(5):
            proj = projection if (attempt == 0 and trial == 0 and projection is not None) \
                else _random_projection(M.ring, rng)
            n = _certified_point_count(list(critical_ideal(fam.deformed, proj)),
                                       M.ring, rng)
            counts.append(n)
            projs.append(proj)
            agreed = _agreed(counts)
            if agreed is not None:
                proj0 = projs[counts.index(agreed)]
                section = hyperplane_section(M, proj0)
                try:
                    sec = milnor_surface(section, seed=subseed(seed, "threefold-section"),
                                         retries=retries)
                except (CertificationError, CheckFailedError):
                    break
                combined = agreed - sec.mu
                if combined < 0:
                    break
                return ThreefoldReport(agreed, sec.mu, combined, proj0, sec, fam,
                                       caveat, seed)
    raise CertificationError("threefold", "no two certified counts agreed")


# ---------------------------------------------------------------------------
# singular locus diagnostics and the conjecture check

@dataclass(frozen=True)
class SingularLocusReport:
    generators: tuple
    dimension: int
    degree: Optional[int]      # quotient dimension when zero-dimensional

    def to_dict(self):
        return {
            "generators": [g.to_string() for g in self.generators],
            "dimension": self.dimension,
            "degree": self.degree,
        }


def singular_locus_report(M_t: PresentationMatrix) -> SingularLocusReport:
    """The singular-locus ideal of V(minors), its dimension, and (when
    zero-dimensional) the number of singular points with multiplicity."""
    sing = singular_locus_ideal(M_t)
    G = groebner(list(sing))
    dim = ideal_dimension(G)
    degree = None
    if dim <= 0:
        info = quotient_dimension(G)
        degree = info.dimension
    return SingularLocusReport(sing.generators, dim, degree)


def conjecture_check(M: PresentationMatrix, tau: int, seed: int = 0,
                     retries: int = DEFAULT_RETRIES) -> dict:
    """Compare the computed Milnor number with tau - 1 (the mu = tau - 1
    equality observed for the simple normal forms)."""
    report = milnor_surface(M, seed=seed, retries=retries)
    return {
        "mu": report.mu,
        "tau": tau,
        "equal_to_tau_minus_1": report.mu == tau - 1,
    }
