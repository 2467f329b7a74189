"""Symplectic potentials on a labelled polytope.

A potential u is a strictly convex function on the interior of P whose
Hessian G = Hess u and inverse H = G^{-1} encode a torus-invariant Kahler
metric.  Four kinds are provided:

* ``guillemin``            -- the canonical u0 = 1/2 sum (L_k log L_k - L_k);
* ``quadratic_perturbed``  -- u0 + (c/2) x_i^2, which degenerates H along
                              axis i as c grows;
* ``dilation``             -- u0 - u0^s / s built from the dilated polytope sP,
                              which blows H up as s drops to 1;
* ``guillemin_plus_poly``  -- u0 + v for a polynomial v, validity checked by
                              sampling.

All evaluation happens at strictly interior points (every L_i >= EPS_INTERIOR)
because G entries scale like 1/L_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polynomials import MultiPoly
from .polytope import LabelledPolytope
from .sampling import (
    facet_proximal_points,
    facet_tangent_basis,
    facet_values,
    interior_points,
    polytope_scale,
)

EPS_INTERIOR = 1e-10

__all__ = [
    "EPS_INTERIOR",
    "PotentialError",
    "BoundaryPoint",
    "NotPositiveDefinite",
    "OriginNotInterior",
    "HessianSample",
    "SymplecticPotential",
    "GuilleminPotential",
    "QuadraticPerturbedPotential",
    "DilationPotential",
    "GuilleminPlusPolyPotential",
    "guillemin",
    "quadratic_perturbed",
    "dilation",
    "guillemin_plus_poly",
    "potential_from_spec",
    "eval_grad_hess",
    "validate",
    "hc_diag",
    "dilation_limit_B",
]


class PotentialError(Exception):
    pass


class BoundaryPoint(PotentialError):
    """Evaluation point violates the interior guard L_i >= EPS_INTERIOR."""


class NotPositiveDefinite(PotentialError):
    """The Hessian failed to be positive definite at an evaluation point."""


class OriginNotInterior(PotentialError):
    """The dilation limit needs 0 in the interior of P (all c_k > 0)."""


@dataclass(frozen=True)
class HessianSample:
    """Hessian G, inverse H and log det G of a potential at one point."""

    x: np.ndarray
    G: np.ndarray
    H: np.ndarray
    logdetG: float


class SymplecticPotential:
    """Common evaluation machinery; subclasses supply the Hessian pieces."""

    kind = "abstract"
    closed_derivatives = True  # dG, d2G available in closed form

    def __init__(self, polytope: LabelledPolytope):
        self.polytope = polytope
        self._A = np.array(polytope.normals, dtype=float)  # d x n
        self._c = np.array([float(v) for v in polytope.offsets])

    # -- interior guard -------------------------------------------------------

    def facet_values(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self._A.T + self._c

    def _interior_L(self, x) -> np.ndarray:
        L = self.facet_values(x)
        if np.min(L) < EPS_INTERIOR:
            raise BoundaryPoint(
                f"point {np.asarray(x, float)} has facet value {np.min(L):.3e} < {EPS_INTERIOR}"
            )
        return L

    # -- values, gradients, Hessians -------------------------------------------

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian_derivative(self, x) -> np.ndarray:
        """dG[i, j, m] = d G_ij / d x_m (closed-form kinds only)."""
        raise NotImplementedError

    def hessian_second_derivative(self, x) -> np.ndarray:
        """d2G[i, j, m, l] = d^2 G_ij / d x_m d x_l (closed-form kinds only)."""
        raise NotImplementedError

    def sample(self, x) -> HessianSample:
        """G, H = G^{-1} and log det G at an interior point.

        H is produced by a symmetric (Cholesky) factorization; a nonpositive
        pivot raises NotPositiveDefinite.
        """
        x = np.asarray(x, dtype=float)
        G = self.hessian(x)
        G = 0.5 * (G + G.T)
        try:
            chol = np.linalg.cholesky(G)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"Hessian not positive definite at {x}") from exc
        inv_chol = np.linalg.inv(chol)
        H = inv_chol.T @ inv_chol
        H = 0.5 * (H + H.T)
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        return HessianSample(x=x, G=G, H=H, logdetG=logdet)


class GuilleminPotential(SymplecticPotential):
    kind = "guillemin"

    def value(self, x) -> float:
        L = self._interior_L(x)
        return 0.5 * float(np.sum(L * np.log(L) - L))

    def gradient(self, x) -> np.ndarray:
        L = self._interior_L(x)
        return 0.5 * (np.log(L) @ self._A)

    def hessian(self, x) -> np.ndarray:
        L = self._interior_L(x)
        return 0.5 * np.einsum("k,ki,kj->ij", 1.0 / L, self._A, self._A)

    def hessian_derivative(self, x) -> np.ndarray:
        L = self._interior_L(x)
        return -0.5 * np.einsum("k,ki,kj,km->ijm", 1.0 / L**2, self._A, self._A, self._A)

    def hessian_second_derivative(self, x) -> np.ndarray:
        L = self._interior_L(x)
        return np.einsum(
            "k,ki,kj,km,kl->ijml", 1.0 / L**3, self._A, self._A, self._A, self._A
        )


class QuadraticPerturbedPotential(GuilleminPotential):
    """u0 + (c/2) x_axis^2.  The Hessian gains c on the (axis, axis) entry;
    all higher derivatives coincide with the Guillemin ones."""

    kind = "quadratic_perturbed"

    def __init__(self, polytope: LabelledPolytope, axis: int, c: float):
        super().__init__(polytope)
        if not 0 <= axis < polytope.dim:
            raise ValueError(f"axis {axis} out of range for dim {polytope.dim}")
        if c < 0:
            raise ValueError("perturbation strength c must be >= 0")
        self.axis = axis
        self.c = float(c)

    def value(self, x) -> float:
        return super().value(x) + 0.5 * self.c * float(np.asarray(x, float)[self.axis]) ** 2

    def gradient(self, x) -> np.ndarray:
        g = super().gradient(x)
        g[self.axis] += self.c * float(np.asarray(x, float)[self.axis])
        return g

    def hessian(self, x) -> np.ndarray:
        G = super().hessian(x)
        G[self.axis, self.axis] += self.c
        return G


class DilationPotential(SymplecticPotential):
    """u0 - u0^s / s where u0^s is the Guillemin potential of the dilated
    polytope sP (s > 1).

    Needs 0 in the interior of P; if it is not, the polytope is translated by
    its vertex barycenter and the shift recorded in ``shift``.  All evaluation
    is in the translated coordinates (``self.polytope`` is the centered copy).
    """

    kind = "dilation"

    def __init__(self, polytope: LabelledPolytope, s: float):
        if not s > 1:
            raise ValueError("dilation parameter s must be > 1")
        centered, shift = center_polytope(polytope)
        super().__init__(centered)
        self.s = float(s)
        self.shift = shift

    def _Ls(self, L: np.ndarray) -> np.ndarray:
        # L^s = <x, nu> + s c = L + (s-1) c
        return L + (self.s - 1.0) * self._c

    def value(self, x) -> float:
        L = self._interior_L(x)
        Ls = self._Ls(L)
        u0 = 0.5 * float(np.sum(L * np.log(L) - L))
        u0s = 0.5 * float(np.sum(Ls * np.log(Ls) - Ls))
        return u0 - u0s / self.s

    def gradient(self, x) -> np.ndarray:
        L = self._interior_L(x)
        Ls = self._Ls(L)
        return 0.5 * ((np.log(L) - np.log(Ls) / self.s) @ self._A)

    def hessian(self, x) -> np.ndarray:
        L = self._interior_L(x)
        Ls = self._Ls(L)
        coeff = 1.0 / L - 1.0 / (self.s * Ls)
        return 0.5 * np.einsum("k,ki,kj->ij", coeff, self._A, self._A)

    def hessian_derivative(self, x) -> np.ndarray:
        L = self._interior_L(x)
        Ls = self._Ls(L)
        coeff = -1.0 / L**2 + 1.0 / (self.s * Ls**2)
        return 0.5 * np.einsum("k,ki,kj,km->ijm", coeff, self._A, self._A, self._A)

    def hessian_second_derivative(self, x) -> np.ndarray:
        L = self._interior_L(x)
        Ls = self._Ls(L)
        coeff = 1.0 / L**3 - 1.0 / (self.s * Ls**3)
        return np.einsum(
            "k,ki,kj,km,kl->ijml", coeff, self._A, self._A, self._A, self._A
        )


class GuilleminPlusPolyPotential(GuilleminPotential):
    """u0 + v for a polynomial v.  There is no algorithmic membership test for
    the valid-potential class, so positivity of the Hessian is checked by
    sampling at construction (disable with check=False to inspect a bad v via
    validate()).  Derivatives of H go through finite differences."""

    kind = "guillemin_plus_poly"
    closed_derivatives = False

    def __init__(self, polytope: LabelledPolytope, poly: MultiPoly, check: bool = True):
        super().__init__(polytope)
        if poly.nvars != polytope.dim:
            raise ValueError("polynomial variable count must match the polytope dimension")
        self.poly = poly
        if check:
            report = validate(self, samples=40)
            if not report["passed"]:
                raise NotPositiveDefinite(
                    f"Hessian of u0 + v fails positivity: worst margin {report['worst_margin']:.3e}"
                )

    def value(self, x) -> float:
        return super().value(x) + self.poly.value(x)

    def gradient(self, x) -> np.ndarray:
        return super().gradient(x) + self.poly.gradient(x)

    def hessian(self, x) -> np.ndarray:
        return super().hessian(x) + self.poly.hessian(x)

    def hessian_derivative(self, x):
        raise NotImplementedError("guillemin_plus_poly uses finite differences for dH")

    def hessian_second_derivative(self, x):
        raise NotImplementedError("guillemin_plus_poly uses finite differences for d2H")


# -- constructors -------------------------------------------------------------


def guillemin(P: LabelledPolytope) -> GuilleminPotential:
    return GuilleminPotential(P)


def quadratic_perturbed(P: LabelledPolytope, axis: int, c: float) -> QuadraticPerturbedPotential:
    return QuadraticPerturbedPotential(P, axis, c)


def dilation(P: LabelledPolytope, s: float) -> DilationPotential:
    return DilationPotential(P, s)


def guillemin_plus_poly(
    P: LabelledPolytope, poly: MultiPoly, check: bool = True
) -> GuilleminPlusPolyPotential:
    return GuilleminPlusPolyPotential(P, poly, check=check)


def center_polytope(P: LabelledPolytope):
    """(centered polytope, shift) with 0 interior; shift=0 when P already is."""
    zero = (Fraction(0),) * P.dim
    vals = P.defining_values(zero)
    if all(v > 0 for v in vals):
        return P, tuple(Fraction(0) for _ in range(P.dim))
    shift = P.vertex_barycenter()
    return P.translated(shift), shift


def potential_from_spec(P: LabelledPolytope, spec: str) -> SymplecticPotential:
    """Parse a CLI potential description.

    Accepted forms: "guillemin", "uc:i=<axis>,c=<float>", "dilation:s=<float>",
    "poly:<coefficient JSON file>".  The polynomial file holds a list of
    {"exponents": [...], "coeff": <float>} entries.
    """
    spec = spec.strip()
    if spec == "guillemin":
        return guillemin(P)
    if spec.startswith("uc:"):
        axis, c = None, None
        for part in spec[3:].split(","):
            key, _, value = part.partition("=")
            if key.strip() == "i":
                axis = int(value)
            elif key.strip() == "c":
                c = float(value)
        if axis is None or c is None:
            raise ValueError(f"bad potential spec {spec!r}: need uc:i=<axis>,c=<float>")
        return quadratic_perturbed(P, axis, c)
    if spec.startswith("dilation:"):
        key, _, value = spec[len("dilation:") :].partition("=")
        if key.strip() != "s":
            raise ValueError(f"bad potential spec {spec!r}: need dilation:s=<float>")
        return dilation(P, float(value))
    if spec.startswith("poly:"):
        import json

        path = spec[len("poly:") :]
        with open(path, "r", encoding="utf-8") as fh:
            entries = json.load(fh)
        terms = {tuple(e["exponents"]): float(e["coeff"]) for e in entries}
        return guillemin_plus_poly(P, MultiPoly(P.dim, terms))
    raise ValueError(f"unknown potential spec {spec!r}")


# -- operations ----------------------------------------------------------------


def eval_grad_hess(u: SymplecticPotential, x) -> HessianSample:
    """G, H and log det G of u at the interior point x."""
    return u.sample(x)


def validate(u: SymplecticPotential, samples: int = 40) -> dict:
    """Sample-based validity report for u.

    Checks G > 0 at deterministic interior points and at probes approaching
    each facet (distances 1e-2 .. 1e-6), and that the restriction of G to the
    facet-tangent directions stays positive definite there.  Failures are
    collected in the report, never raised.
    """
    if samples < 10:
        raise ValueError("samples must be >= 10")
    P = u.polytope
    failures = []
    worst = np.inf

    def check_full(x, tag):
        nonlocal worst
        try:
            G = u.hessian(np.asarray(x, dtype=float))
        except BoundaryPoint:
            return
        eig = np.linalg.eigvalsh(0.5 * (G + G.T))
        worst = min(worst, float(eig[0]))
        if eig[0] <= 0:
            failures.append({"point": list(map(float, x)), "where": tag, "margin": float(eig[0])})

    for x in interior_points(P, samples):
        check_full(x, "interior")

    distances = [polytope_scale(P) * 10.0**-e for e in range(2, 7)]
    for facet, dist, x in facet_proximal_points(P, distances):
        check_full(x, f"near facet {facet} (distance {dist:.1e})")
        basis = facet_tangent_basis(P, facet)
        if basis.shape[0] == 0:
            continue
        try:
            G = u.hessian(x)
        except BoundaryPoint:
            continue
        Gt = basis @ (0.5 * (G + G.T)) @ basis.T
        eig = np.linalg.eigvalsh(Gt)
        worst = min(worst, float(eig[0]))
        if eig[0] <= 0:
            failures.append(
                {
                    "point": list(map(float, x)),
                    "where": f"tangent to facet {facet} (distance {dist:.1e})",
                    "margin": float(eig[0]),
                }
            )

    return {"passed": not failures, "worst_margin": float(worst), "failures": failures}


def hc_diag(u_c: QuadraticPerturbedPotential, x) -> float:
    """H[i][i] of a quadratic perturbation through the minor formula
    det M_ii / (det G0 + c det M_ii), where M_ii deletes row and column i of
    the unperturbed Hessian G0.  Deliberately independent of the inversion in
    eval_grad_hess, as a cross-check."""
    if not isinstance(u_c, QuadraticPerturbedPotential):
        raise TypeError("hc_diag expects a quadratic_perturbed potential")
    base = GuilleminPotential(u_c.polytope)
    G0 = base.hessian(x)
    i = u_c.axis
    minor = np.delete(np.delete(G0, i, axis=0), i, axis=1)
    det_minor = float(np.linalg.det(minor)) if minor.size else 1.0
    det_G0 = float(np.linalg.det(G0))
    return det_minor / (det_G0 + u_c.c * det_minor)


def dilation_limit_B(P: LabelledPolytope, x) -> np.ndarray:
    """The s->1 limit of G^s/(s-1): B_x = 1/2 sum (L_k + c_k)/L_k^2 nu_k nu_k^T.

    Requires 0 interior to P (all offsets positive)."""
    if any(c <= 0 for c in P.offsets):
        raise OriginNotInterior("all offsets must be positive (translate P first)")
    A = np.array(P.normals, dtype=float)
    c = np.array([float(v) for v in P.offsets])
    L = facet_values(P, x)[0]
    if np.min(L) < EPS_INTERIOR:
        raise BoundaryPoint(f"point {x} is not interior")
    coeff = (L + c) / L**2
    return 0.5 * np.einsum("k,ki,kj->ij", coeff, A, A)
