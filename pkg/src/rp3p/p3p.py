"""Distance solver for the perspective-three-point system.

Three LEDs at known mutual distances are observed along three bearings from
the camera center; the law of cosines couples the unknown ranges d1, d2, d3
through the inter-bearing angles:

    d_i^2 + d_j^2 - 2 d_i d_j cos(alpha_ij) = d_ij^2.

Substituting d1 = x d3, d2 = y d3 and eliminating the scale leaves a bivariate
quadratic system in (x, y).  Taking the resultant in x yields a univariate
quartic in y, whose real roots are extracted through the companion-matrix
eigenvalue method and polished on the bivariate system by Newton iteration.
Up to four positive solutions exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InvalidProblemError, NoCandidateError

# Bearings spanning less than this angle are treated as degenerate rather
# than yielding wildly ill-conditioned range candidates.
MIN_BEARING_ANGLE = 1e-3

# Complex quartic roots with relative imaginary part below this are accepted
# as real.  Exact double roots (symmetric geometries) split into conjugate
# pairs with imaginary parts of order sqrt(eps) ~ 1e-7 under the companion
# eigensolve, so the filter must sit above that; Newton polish plus the
# residual bound reject anything that is not a genuine solution.
IMAG_TOLERANCE = 1e-6

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 10

# Two (x, y) roots closer than this are duplicates of one solution.
ROOT_DEDUP_EPS = 1e-8

# Law-of-cosines residual bound, relative to d_ij^2, that every returned
# candidate must satisfy.
RESIDUAL_REL_BOUND = 1e-6


@dataclass(frozen=True)
class P3PProblem:
    """Known inter-LED distances and measured inter-bearing angles."""

    d12: float
    d13: float
    d23: float
    alpha12: float
    alpha13: float
    alpha23: float

    def __post_init__(self):
        sides = (self.d12, self.d13, self.d23)
        if min(sides) <= 0:
            raise InvalidProblemError("inter-LED distances must be positive")
        d12, d13, d23 = sides
        if d12 >= d13 + d23 or d13 >= d12 + d23 or d23 >= d12 + d13:
            raise InvalidProblemError("inter-LED distances violate the triangle inequality")
        for alpha in (self.alpha12, self.alpha13, self.alpha23):
            if not (0.0 < alpha < math.pi):
                raise InvalidProblemError("inter-bearing angles must lie in (0, pi)")

    def cosines(self) -> tuple[float, float, float]:
        return math.cos(self.alpha12), math.cos(self.alpha13), math.cos(self.alpha23)


@dataclass(frozen=True)
class NormalizedP3P:
    """Dimensionless form: doubled cosines and squared side ratios.

    r = 2 cos(alpha12), q = 2 cos(alpha13), p = 2 cos(alpha23),
    a = d23^2 / d12^2,  b = d13^2 / d12^2.
    """

    r: float
    q: float
    p: float
    a: float
    b: float


@dataclass(frozen=True)
class DistanceCandidate:
    """One solution: ranges (d1, d2, d3) with the (x, y, v) auxiliaries."""

    d1: float
    d2: float
    d3: float
    x: float
    y: float
    v: float

    @property
    def distances(self) -> tuple[float, float, float]:
        return (self.d1, self.d2, self.d3)


@dataclass(frozen=True)
class DistanceCandidateSet:
    candidates: tuple[DistanceCandidate, ...]

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)


def normalize(problem: P3PProblem) -> NormalizedP3P:
    """Reduce a problem to doubled cosines and squared side ratios."""
    c12, c13, c23 = problem.cosines()
    return NormalizedP3P(
        r=2.0 * c12,
        q=2.0 * c13,
        p=2.0 * c23,
        a=problem.d23**2 / problem.d12**2,
        b=problem.d13**2 / problem.d12**2,
    )


def law_of_cosines_residual(
    candidate: tuple[float, float, float], problem: P3PProblem
) -> float:
    """Max absolute law-of-cosines defect of a range triple over the three pairs."""
    d1, d2, d3 = candidate
    c12, c13, c23 = problem.cosines()
    return max(
        abs(d1 * d1 + d2 * d2 - 2.0 * d1 * d2 * c12 - problem.d12**2),
        abs(d1 * d1 + d3 * d3 - 2.0 * d1 * d3 * c13 - problem.d13**2),
        abs(d2 * d2 + d3 * d3 - 2.0 * d2 * d3 * c23 - problem.d23**2),
    )


def _poly_real_roots(coeffs: np.ndarray):
    """Roots of a polynomial given low-to-high coefficients.

    Eigenvalues of the monic companion matrix; built directly for the
    degree-4 fast path.  Returns None when the polynomial is constant.
    """
    c = np.asarray(coeffs, dtype=float)
    degree = len(c) - 1
    while degree > 0 and c[degree] == 0.0:
        degree -= 1
    if degree < 1:
        return None
    if degree == 1:
        return np.array([-c[0] / c[1]], dtype=complex)
    monic = c[:degree] / c[degree]
    companion = np.zeros((degree, degree))
    companion[1:, :-1] = np.eye(degree - 1)
    companion[:, -1] = -monic
    return np.linalg.eigvals(companion)


def _system(norm: NormalizedP3P, x: float, y: float) -> tuple[float, float]:
    """The two scale-free quadratics whose common roots are the solutions."""
    r, q, p, a, b = norm.r, norm.q, norm.p, norm.a, norm.b
    f1 = (1.0 - a) * y * y - a * x * x + a * x * y * r - y * p + 1.0
    f2 = (1.0 - b) * x * x - b * y * y + b * x * y * r - x * q + 1.0
    return f1, f2


def _newton_polish(norm: NormalizedP3P, x: float, y: float) -> tuple[float, float]:
    r, q, p, a, b = norm.r, norm.q, norm.p, norm.a, norm.b
    for _ in range(NEWTON_MAX_ITER):
        f1, f2 = _system(norm, x, y)
        if max(abs(f1), abs(f2)) < NEWTON_TOL:
            break
        j11 = -2.0 * a * x + a * y * r
        j12 = 2.0 * (1.0 - a) * y + a * x * r - p
        j21 = 2.0 * (1.0 - b) * x + b * y * r - q
        j22 = -2.0 * b * y + b * x * r
        det = j11 * j22 - j12 * j21
        if abs(det) < 1e-15:
            break
        x -= (f1 * j22 - f2 * j12) / det
        y -= (j11 * f2 - j21 * f1) / det
    return x, y


def _resultant_coefficients(norm: NormalizedP3P):
    """Quartic in y obtained as the resultant in x of the bivariate system.

    Writing f1 = A1 x^2 + B1(y) x + C1(y) and f2 = A2 x^2 + B2(y) x + C2(y)
    with A1 = -a, B1 = a r y, C1 = (1-a) y^2 - p y + 1, A2 = 1-b,
    B2 = b r y - q, C2 = 1 - b y^2, the resultant is
    Res_x(f1, f2) = (A1 C2 - A2 C1)^2 - (A1 B2 - A2 B1)(B1 C2 - B2 C1).
    The products are expanded explicitly; generic polynomial arithmetic on
    length-3 arrays costs more than the quartic eigensolve itself.  Also
    returns t0 = A1 C2 - A2 C1, needed to pair x with each root y through
    x = t0(y) / (A2 B1 - A1 B2)(y).
    """
    r, q, p, a, b = norm.r, norm.q, norm.p, norm.a, norm.b
    # t0 = A1*C2 - A2*C1, degree 2 in y
    t0 = (
        -a - (1.0 - b),
        (1.0 - b) * p,
        a * b - (1.0 - b) * (1.0 - a),
    )
    # t1 = A1*B2 - A2*B1, degree 1 in y
    t1 = (a * q, -a * r)
    # t2 = B1*C2 - B2*C1, degree 3 in y
    t2 = (
        q,
        a * r - q * p - b * r,
        q * (1.0 - a) + b * r * p,
        -a * b * r - b * r * (1.0 - a),
    )
    res = np.array([
        t0[0] * t0[0] - t1[0] * t2[0],
        2.0 * t0[0] * t0[1] - (t1[0] * t2[1] + t1[1] * t2[0]),
        t0[1] * t0[1] + 2.0 * t0[0] * t0[2] - (t1[0] * t2[2] + t1[1] * t2[1]),
        2.0 * t0[1] * t0[2] - (t1[0] * t2[3] + t1[1] * t2[2]),
        t0[2] * t0[2] - t1[1] * t2[3],
    ])
    return res, t0


def _recover_x(norm: NormalizedP3P, y: float, t0) -> float | None:
    """x coordinate paired with a resultant root y."""
    r, q, b = norm.r, norm.q, norm.b
    den = norm.a * (r * y - q)
    if abs(den) > 1e-12:
        return (t0[0] + y * (t0[1] + y * t0[2])) / den
    # Shared-root formula degenerates; fall back to f2's quadratic in x and
    # keep the branch that best satisfies f1.
    coeffs = [(1.0 - b), b * r * y - q, 1.0 - b * y * y]
    roots = np.roots(coeffs) if abs(coeffs[0]) > 1e-15 else (
        np.array([-coeffs[2] / coeffs[1]]) if abs(coeffs[1]) > 1e-15 else np.array([])
    )
    real = [z.real for z in np.atleast_1d(roots) if abs(z.imag) < 1e-6]
    if not real:
        return None
    return min(real, key=lambda xx: abs(_system(norm, xx, y)[0]))


def solve_candidates(norm: NormalizedP3P, d12: float) -> DistanceCandidateSet:
    """All positive range triples consistent with the normalized system.

    Raises DegenerateGeometryError when any inter-bearing angle is below
    MIN_BEARING_ANGLE, and NoCandidateError when no positive real solution
    exists (inconsistent measurements).
    """
    if d12 <= 0:
        raise InvalidProblemError("d12 must be positive")
    for doubled in (norm.r, norm.q, norm.p):
        # |2 cos alpha| -> 2 as alpha -> 0 or pi; the small-angle side is the
        # collapsed-bearing degeneracy.
        if doubled >= 2.0 * math.cos(MIN_BEARING_ANGLE):
            raise DegenerateGeometryError("bearings nearly coincide (alpha < 1e-3 rad)")

    res, t0 = _resultant_coefficients(norm)
    roots = _poly_real_roots(res)
    if roots is None:
        raise NoCandidateError("resultant collapsed to a constant")

    d13 = math.sqrt(norm.b) * d12
    d23 = math.sqrt(norm.a) * d12
    c12, c13, c23 = norm.r / 2.0, norm.q / 2.0, norm.p / 2.0
    residual_bound = RESIDUAL_REL_BOUND * max(d12, d13, d23) ** 2

    accepted: list[DistanceCandidate] = []
    for root in roots:
        if abs(root.imag) > IMAG_TOLERANCE * (1.0 + abs(root.real)):
            continue
        y = float(root.real)
        if y <= 0.0:
            continue
        x = _recover_x(norm, y, t0)
        if x is None:
            continue
        x, y = _newton_polish(norm, x, y)
        if x <= 0.0 or y <= 0.0:
            continue
        v = x * x + y * y - x * y * norm.r
        if v <= 0.0:
            continue
        if any(abs(x - c.x) < ROOT_DEDUP_EPS and abs(y - c.y) < ROOT_DEDUP_EPS
               for c in accepted):
            continue
        d3 = d12 / math.sqrt(v)
        d1, d2 = x * d3, y * d3
        residual = max(
            abs(d1 * d1 + d2 * d2 - 2.0 * d1 * d2 * c12 - d12 * d12),
            abs(d1 * d1 + d3 * d3 - 2.0 * d1 * d3 * c13 - d13 * d13),
            abs(d2 * d2 + d3 * d3 - 2.0 * d2 * d3 * c23 - d23 * d23),
        )
        if residual > residual_bound:
            continue
        accepted.append(DistanceCandidate(d1=d1, d2=d2, d3=d3, x=x, y=y, v=v))

    if not accepted:
        raise NoCandidateError("no positive real solution to the range system")
    accepted.sort(key=lambda c: (c.d1, c.d2, c.d3))
    return DistanceCandidateSet(tuple(accepted[:4]))


def solve_problem(problem: P3PProblem) -> DistanceCandidateSet:
    """Convenience wrapper: normalize then solve."""
    return solve_candidates(normalize(problem), problem.d12)
