"""Lattice-point projective embedding, balanced weights and saturation.

An integral Delzant polytope with lattice points m_0, ..., m_N embeds the
manifold into CP^N through the monomial sections; only the magnitudes
|Z_m|^2 matter here.  For the canonical potential they close up to the
boundary as the product  prod_i L_i(x)^{L_i(m)};  for a general potential the
interior formula  |Z_m|^2 = exp(2 m . du/dx)  (normalized so the distinguished
point m_0 = 0 gives 1) is used.

The diagonal moment-map components

    Psi_mm = alpha_m^2 |Z_m|^2 / sum_j alpha_j^2 |Z_j|^2

sum to one pointwise.  `balance` finds positive weights alpha making every
Psi_mm average to vol/(N+1) by a damped multiplicative fixed point, and
`saturation_check` tests the identities that characterize equality in the
lattice-point eigenvalue bound (they force the standard simplex and the
canonical metric).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polytope import LabelledPolytope, PolytopeError, _fraction_to_json
from .potential import SymplecticPotential
from .quadrature import QuadratureRule
from .sampling import interior_points, polytope_scale

__all__ = [
    "ProjectiveError",
    "NoConvergence",
    "EmbeddingData",
    "BalanceWeights",
    "SaturationReport",
    "BoundReport",
    "build_embedding",
    "z_squared",
    "psi_mm",
    "psi_diag",
    "balance",
    "saturation_check",
    "bound_report",
    "is_standard_simplex",
]


class ProjectiveError(Exception):
    pass


class NoConvergence(ProjectiveError):
    """The balance iteration did not reach the tolerance; the existence proof
    is non-constructive, so this signals the need for smaller damping."""


@dataclass(frozen=True)
class EmbeddingData:
    """Lattice embedding data, in coordinates translated so the
    lexicographically smallest lattice point m0 sits at the origin."""

    polytope: LabelledPolytope  # translated copy
    original: LabelledPolytope
    m0: tuple  # distinguished point in the original coordinates
    points: tuple  # translated lattice points, sorted, points[0] = 0
    exponents: np.ndarray  # exponents[m, i] = L_i(points[m]), nonnegative ints

    @property
    def n(self) -> int:
        return self.polytope.dim

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def N(self) -> int:
        return len(self.points) - 1


def build_embedding(P: LabelledPolytope) -> EmbeddingData:
    """Embedding data for an integral Delzant polytope."""
    if not P.is_delzant():
        raise PolytopeError("embedding needs a Delzant polytope")
    if not P.is_integral():
        raise PolytopeError("embedding needs an integral polytope")
    lattice = P.lattice_points(1)
    if lattice.n_k + 1 < 2:
        raise PolytopeError("need at least two lattice points")
    m0 = lattice.points[0]
    translated = P.translated(m0)
    points = tuple(
        tuple(int(c - s) for c, s in zip(p, m0)) for p in lattice.points
    )
    exponents = np.array(
        [[int(v) for v in translated.defining_values(p)] for p in points],
        dtype=np.int64,
    )
    return EmbeddingData(
        polytope=translated,
        original=P,
        m0=tuple(int(v) for v in m0),
        points=points,
        exponents=exponents,
    )


def _point_index(E: EmbeddingData, m) -> int:
    if isinstance(m, (int, np.integer)):
        return int(m)
    key = tuple(int(v) for v in m)
    try:
        return E.points.index(key)
    except ValueError as exc:
        raise ValueError(f"{key} is not a lattice point of the embedding") from exc


def _log_z2_nodes(E: EmbeddingData, u: SymplecticPotential, X: np.ndarray) -> np.ndarray:
    """log |Z_m|^2 at the rows of X, shape (len(X), N+1).

    Guillemin kind: sum_i L_i(m) log L_i(x) (continuous up to the boundary,
    with 0 * log 0 = 0).  Other kinds: 2 m . du/dx, interior only.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if u.kind == "guillemin":
        L = u.facet_values(X)  # (q, d)
        with np.errstate(divide="ignore"):
            logL = np.where(L > 0, np.log(np.maximum(L, 1e-300)), -np.inf)
        expo = E.exponents.astype(float)  # (N+1, d)
        out = np.empty((X.shape[0], E.count))
        for m in range(E.count):
            mask = expo[m] > 0
            if not mask.any():
                out[:, m] = 0.0
                continue
            contrib = logL[:, mask] * expo[m, mask]
            out[:, m] = np.sum(contrib, axis=1)
        return out
    grads = np.array([u.gradient(x) for x in X])  # raises BoundaryPoint near dP
    pts = np.array(E.points, dtype=float)
    return 2.0 * grads @ pts.T


def z_squared(E: EmbeddingData, u: SymplecticPotential, m, x) -> float:
    """|Z_m|^2 at x (translated coordinates); m is an index or a lattice point."""
    if u.polytope != E.polytope:
        raise ValueError("potential must live on the embedding's translated polytope")
    idx = _point_index(E, m)
    log_z2 = _log_z2_nodes(E, u, np.asarray(x, dtype=float)[None, :])[0, idx]
    return float(np.exp(log_z2))


def _normalized_alpha(alpha, count: int) -> np.ndarray:
    if isinstance(alpha, BalanceWeights):
        alpha = alpha.alpha
    a = np.asarray(alpha, dtype=float)
    if a.shape != (count,):
        raise ValueError(f"need {count} weights, got shape {a.shape}")
    if np.any(a <= 0):
        raise ValueError("weights must be positive")
    return a


def psi_diag(E: EmbeddingData, u: SymplecticPotential, alpha, x) -> np.ndarray:
    """All diagonal components Psi_mm(x); they sum to 1."""
    if u.polytope != E.polytope:
        raise ValueError("potential must live on the embedding's translated polytope")
    a = _normalized_alpha(alpha, E.count)
    logw = _log_z2_nodes(E, u, np.asarray(x, dtype=float)[None, :])[0] + 2.0 * np.log(a)
    logw -= np.max(logw)
    w = np.exp(logw)
    return w / np.sum(w)


def psi_mm(E: EmbeddingData, u: SymplecticPotential, alpha, m, x) -> float:
    """One diagonal component Psi_mm(x) in [0, 1]."""
    return float(psi_diag(E, u, alpha, x)[_point_index(E, m)])


@dataclass(frozen=True)
class BalanceWeights:
    """Positive weights with sum(alpha) = 1 and the achieved balance residual
    max_m |(1/vol) integral Psi_mm - 1/(N+1)|."""

    alpha: np.ndarray
    residual: float
    iterations: int

    def to_dict(self) -> dict:
        a0 = float(self.alpha[0])
        return {
            "alpha": [float(v) for v in self.alpha],
            "alpha_over_alpha0": [float(v) / a0 for v in self.alpha],
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _psi_averages(
    E: EmbeddingData, u: SymplecticPotential, alpha: np.ndarray, Q: QuadratureRule
) -> np.ndarray:
    logz2 = _log_z2_nodes(E, u, Q.nodes)
    logw = logz2 + 2.0 * np.log(alpha)
    logw -= np.max(logw, axis=1, keepdims=True)
    w = np.exp(logw)
    psi = w / np.sum(w, axis=1, keepdims=True)
    return Q.weights @ psi


def balance(
    E: EmbeddingData,
    u: SymplecticPotential,
    Q: QuadratureRule,
    tol: float = 1e-10,
    max_iter: int = 200,
    damping: float = 0.5,
    start=None,
) -> BalanceWeights:
    """Damped multiplicative fixed point for the balanced weights:
    alpha_m^2 <- alpha_m^2 * (target / integral Psi_mm)^damping, renormalized
    to sum(alpha) = 1, until every average matches 1/(N+1)."""
    if u.polytope != E.polytope or Q.polytope != E.polytope:
        raise ValueError("potential, quadrature and embedding must share one polytope")
    count = E.count
    if start is None:
        alpha = np.full(count, 1.0 / count)
    else:
        alpha = _normalized_alpha(start, count)
        alpha = alpha / np.sum(alpha)
    vol = float(Q.exact_volume)
    target = vol / count
    for iteration in range(max_iter + 1):
        averages = _psi_averages(E, u, alpha, Q)
        residual = float(np.max(np.abs(averages / vol - 1.0 / count)))
        if residual < tol:
            return BalanceWeights(alpha=alpha, residual=residual, iterations=iteration)
        alpha = alpha * (target / averages) ** (damping / 2.0)
        alpha = alpha / np.sum(alpha)
    raise NoConvergence(
        f"balance residual {residual:.3e} after {max_iter} iterations; reduce damping"
    )


@dataclass(frozen=True)
class SaturationReport:
    """Residuals of the equality-case identities.

    r1: the slope identity  dPsi_00(m) = -n/N  over lattice directions.
    r2: affineness of Psi_mm for lattice points adjacent to the origin vertex.
    Both vanish exactly when the bound is saturated, which forces the standard
    simplex and the canonical (Fubini-Study) metric.
    """

    r1: float
    r2: float
    saturated: bool
    classification: str
    tol: float

    def to_dict(self) -> dict:
        return {
            "r1": self.r1,
            "r2": self.r2,
            "saturated": self.saturated,
            "classification": self.classification,
            "tol": self.tol,
        }


def is_standard_simplex(P: LabelledPolytope) -> bool:
    """True iff P is a unimodular image of the standard simplex: a simplex
    whose only lattice points are its n+1 vertices."""
    if P.num_facets != P.dim + 1:
        return False
    if not (P.is_delzant() and P.is_integral()):
        return False
    return P.lattice_points(1).n_k == P.dim


def saturation_check(
    E: EmbeddingData,
    u: SymplecticPotential,
    alpha,
    Q: QuadratureRule,
    tol: float | None = None,
    samples: int = 60,
) -> SaturationReport:
    """Numerical test of the saturation identities under balanced weights."""
    if u.polytope != E.polytope:
        raise ValueError("potential must live on the embedding's translated polytope")
    if tol is None:
        tol = 1e-6 if u.closed_derivatives else 1e-4
    a = _normalized_alpha(alpha, E.count)
    P = E.polytope
    n, N = E.n, E.N
    pts = interior_points(P, samples, min_facet=polytope_scale(P) * 2e-2)
    pts_arr = np.array(E.points, dtype=float)

    logz2 = _log_z2_nodes(E, u, pts)
    logw = logz2 + 2.0 * np.log(a)
    logw -= np.max(logw, axis=1, keepdims=True)
    w = np.exp(logw)
    psi = w / np.sum(w, axis=1, keepdims=True)  # (q, N+1)

    # gradient of log |Z_m|^2 at each sample
    if u.kind == "guillemin":
        A = np.array(P.normals, dtype=float)
        L = u.facet_values(pts)  # (q, d)
        glog = np.einsum("md,qd,di->qmi", E.exponents.astype(float), 1.0 / L, A)
    else:
        G = np.array([u.sample(x).G for x in pts])  # (q, n, n)
        glog = 2.0 * np.einsum("qij,mj->qmi", G, pts_arr)

    grad_psi00 = psi[:, 0:1] * (glog[:, 0, :] - np.einsum("qm,qmi->qi", psi, glog))
    directional = np.einsum("qi,mi->qm", grad_psi00, pts_arr[1:])  # skip m = 0
    r1 = float(np.max(np.abs(directional + n / N)))

    # Psi_mm should be affine for lattice points adjacent to the origin vertex
    verts = P.vertices()
    origin = next(v for v in verts if all(c == 0 for c in v.coords))
    adjacent = [
        v.coords
        for v in verts
        if v is not origin and len(set(v.active) & set(origin.active)) == n - 1
    ]
    design = np.hstack([np.ones((len(pts), 1)), pts])
    r2 = 0.0
    for m in adjacent:
        idx = _point_index(E, m)
        y = psi[:, idx]
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        r2 = max(r2, float(np.max(np.abs(y - design @ coef))))

    saturated = r1 < tol and r2 < tol
    if saturated:
        classification = "fubini-study" if is_standard_simplex(P) else "contradiction"
    else:
        classification = "none"
    return SaturationReport(
        r1=r1, r2=r2, saturated=saturated, classification=classification, tol=tol
    )


@dataclass(frozen=True)
class BoundReport:
    """Eigenvalue bounds 2nk(N_k+1)/N_k tabulated for k = k0 .. k0+4."""

    k0: int
    bounds: tuple
    integral_bound: object
    recommended: Fraction

    def to_dict(self) -> dict:
        return {
            "k0": self.k0,
            "bounds": [b.to_dict() for b in self.bounds],
            "integral_bound": self.integral_bound.to_dict() if self.integral_bound else None,
            "recommended": _fraction_to_json(self.recommended),
        }


def bound_report(P: LabelledPolytope, k_max: int = 64) -> BoundReport:
    """Tabulate the lattice-point bound over k0 .. k0+4 (exact rationals)."""
    k_first = P.k0(k_max)
    bounds = tuple(P.bly_bound(k) for k in range(k_first, k_first + 5))
    integral = P.bly_bound(1) if P.is_integral() else None
    recommended = min(b.bound for b in bounds)
    return BoundReport(
        k0=k_first, bounds=bounds, integral_bound=integral, recommended=recommended
    )
