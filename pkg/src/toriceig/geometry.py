"""Pointwise metric geometry of a symplectic potential.

The inverse Hessian H drives everything here: the invariant Laplacian acting
on functions of the moment coordinates,

    Lap f = - sum_ij ( dH_ij/dx_i * df/dx_j + H_ij * d2f/dx_i dx_j ),

the scalar curvature  scal = - sum_ij d^2 H_ij / dx_i dx_j,  the Ricci
coefficients  rho_kl = -1/2 sum_i d^2 H_li / dx_i dx_k,  and the
Kahler-Einstein residual test: the metric is Einstein with constant lam
exactly when  Lap x_i = 2 lam (x_i - xbar_i)  for every coordinate.

Signs follow the positive-Laplacian convention, pinned by the sphere metric
on the interval [0, 1] where H = 2x(1-x), Lap x = 4x - 2 and scal = 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polynomials import MultiPoly
from .potential import (
    EPS_INTERIOR,
    BoundaryPoint,
    PotentialError,
    SymplecticPotential,
)
from .sampling import interior_points, polytope_scale

__all__ = [
    "StepUnderflow",
    "CurvatureSample",
    "KEReport",
    "hessian_inverse_derivatives",
    "laplacian_invariant",
    "scalar_curvature",
    "ke_check",
]


class StepUnderflow(PotentialError):
    """A finite-difference stencil left the interior guard."""


@dataclass(frozen=True)
class CurvatureSample:
    """Scalar curvature, Ricci coefficients and the H-derivatives behind them."""

    x: np.ndarray
    scal: float
    ricci: np.ndarray  # rho[k, l]: coefficient of dx_k ^ dtheta_l
    dH: np.ndarray  # dH[i, j, k]   = d H_ij / d x_k
    d2H: np.ndarray  # d2H[i, j, k, l] = d^2 H_ij / d x_k d x_l


@dataclass(frozen=True)
class KEReport:
    lambda_hat: float
    xbar: np.ndarray
    residual_max: float
    residual_l2: float
    is_ke: bool

    def to_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "xbar": [float(v) for v in self.xbar],
            "residual_max": self.residual_max,
            "residual_l2": self.residual_l2,
            "is_ke": self.is_ke,
        }


def _resolve_method(u: SymplecticPotential, method: str) -> str:
    if method == "auto":
        return "closed" if u.closed_derivatives else "fd"
    if method in ("closed", "fd"):
        if method == "closed" and not u.closed_derivatives:
            raise ValueError(f"{u.kind} has no closed-form Hessian derivatives")
        return method
    raise ValueError(f"unknown derivative method {method!r}")


def _fd_step(u: SymplecticPotential, x: np.ndarray) -> float:
    L = u.facet_values(x)
    h = 1e-4 * float(np.min(L))
    if h <= 0:
        raise StepUnderflow(f"finite-difference step underflows at {x}")
    return h


def _H_at(u: SymplecticPotential, x: np.ndarray) -> np.ndarray:
    return u.sample(x).H


def _check_stencil(u: SymplecticPotential, pts) -> None:
    for p in pts:
        if np.min(u.facet_values(p)) < EPS_INTERIOR:
            raise StepUnderflow("finite-difference stencil left the interior guard")


def hessian_inverse_derivatives(
    u: SymplecticPotential, x, method: str = "auto", second: bool = True
):
    """(H, dH, d2H) of u at x.

    Closed path: dH = -H (dG) H and the corresponding product rule for d2H.
    FD path: central differences of H with step 1e-4 * min_i L_i(x).
    With second=False, d2H is returned as None.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    how = _resolve_method(u, method)
    H = _H_at(u, x)

    if how == "closed":
        dG = u.hessian_derivative(x)  # (n, n, m)
        dH = -np.einsum("ia,abm,bj->ijm", H, dG, H)
        if not second:
            return H, dH, None
        d2G = u.hessian_second_derivative(x)  # (n, n, m, l)
        term_cross = np.einsum("ia,abl,bc,cdm,dj->ijml", H, dG, H, dG, H)
        d2H = (
            term_cross
            + np.transpose(term_cross, (0, 1, 3, 2))
            - np.einsum("ia,abml,bj->ijml", H, d2G, H)
        )
        return H, dH, d2H

    h = _fd_step(u, x)
    basis = np.eye(n)
    plus = [x + h * basis[k] for k in range(n)]
    minus = [x - h * basis[k] for k in range(n)]
    _check_stencil(u, plus + minus)
    Hp = [_H_at(u, p) for p in plus]
    Hm = [_H_at(u, p) for p in minus]
    dH = np.stack([(Hp[k] - Hm[k]) / (2 * h) for k in range(n)], axis=-1)
    if not second:
        return H, dH, None
    d2H = np.empty((n, n, n, n))
    for k in range(n):
        d2H[:, :, k, k] = (Hp[k] - 2 * H + Hm[k]) / h**2
    for k in range(n):
        for l in range(k + 1, n):
            pts = [
                x + h * basis[k] + h * basis[l],
                x + h * basis[k] - h * basis[l],
                x - h * basis[k] + h * basis[l],
                x - h * basis[k] - h * basis[l],
            ]
            _check_stencil(u, pts)
            Hpp, Hpm, Hmp, Hmm = (_H_at(u, p) for p in pts)
            mixed = (Hpp - Hpm - Hmp + Hmm) / (4 * h**2)
            d2H[:, :, k, l] = mixed
            d2H[:, :, l, k] = mixed
    return H, dH, d2H


def _as_function(f, nvars: int):
    """Normalize f to (gradient, hessian) callables.

    Accepts a MultiPoly (exact derivatives) or any object exposing
    gradient(x) and hessian(x).
    """
    if isinstance(f, MultiPoly):
        if f.nvars != nvars:
            raise ValueError("polynomial variable count does not match the polytope")
        return f.gradient, f.hessian
    if hasattr(f, "gradient") and hasattr(f, "hessian"):
        return f.gradient, f.hessian
    raise TypeError("f must be a MultiPoly or expose gradient(x) and hessian(x)")


def laplacian_invariant(u: SymplecticPotential, f, x, method: str = "auto") -> float:
    """The invariant Laplacian of f at x:
    - sum_ij ( dH_ij/dx_i * df/dx_j + H_ij * d2f/dx_i dx_j )."""
    x = np.asarray(x, dtype=float)
    grad_f, hess_f = _as_function(f, x.size)
    H, dH, _ = hessian_inverse_derivatives(u, x, method=method, second=False)
    g = np.asarray(grad_f(x), dtype=float)
    Hf = np.asarray(hess_f(x), dtype=float)
    div_H = np.einsum("iji->j", dH)  # sum_i dH_ij/dx_i
    return -float(div_H @ g + np.einsum("ij,ij->", H, Hf))


def scalar_curvature(u: SymplecticPotential, x, method: str = "auto") -> CurvatureSample:
    """Scalar curvature and Ricci coefficients at x.

    Requires min_i L_i(x) >= 1e-4: second derivatives of H amplify boundary
    ill-conditioning.
    """
    x = np.asarray(x, dtype=float)
    if float(np.min(u.facet_values(x))) < 1e-4:
        raise BoundaryPoint(f"curvature needs min L_i >= 1e-4, got {np.min(u.facet_values(x)):.2e}")
    _, dH, d2H = hessian_inverse_derivatives(u, x, method=method, second=True)
    scal = -float(np.einsum("ijij->", d2H))
    ricci = -0.5 * np.einsum("liik->kl", d2H)
    return CurvatureSample(x=x, scal=scal, ricci=ricci, dH=dH, d2H=d2H)


def ke_check(
    u: SymplecticPotential,
    samples: int = 40,
    tol: float | None = None,
    method: str = "auto",
) -> KEReport:
    """Fit Lap x_i = 2 lam (x_i - xbar_i) over deterministic interior samples.

    lam and the additive constants are fitted by least squares (a common slope
    2 lam across coordinates, one intercept per coordinate), which makes the
    test translation-invariant.  The report carries the max and rms residuals;
    is_ke holds when residual_max < tol.
    """
    if samples < 20:
        raise ValueError("samples must be >= 20")
    how = _resolve_method(u, method)
    if tol is None:
        tol = 1e-6 if how == "closed" else 1e-4
    P = u.polytope
    n = P.dim
    pts = interior_points(P, samples, min_facet=polytope_scale(P) * 5e-3)
    lap = np.empty((samples, n))
    coords = [MultiPoly.coordinate(n, i) for i in range(n)]
    for q, x in enumerate(pts):
        for i in range(n):
            lap[q, i] = laplacian_invariant(u, coords[i], x, method=how)

    # least squares for Lap x_i ~ a * x_i + b_i with one slope a = 2 lam
    xc = pts - pts.mean(axis=0)
    yc = lap - lap.mean(axis=0)
    denom = float(np.sum(xc * xc))
    a = float(np.sum(xc * yc)) / denom
    b = lap.mean(axis=0) - a * pts.mean(axis=0)
    residuals = lap - (a * pts + b)
    lambda_hat = 0.5 * a
    xbar = -b / a if a != 0 else np.zeros(n)
    res_max = float(np.max(np.abs(residuals)))
    res_l2 = float(np.sqrt(np.mean(residuals**2)))
    return KEReport(
        lambda_hat=lambda_hat,
        xbar=xbar,
        residual_max=res_max,
        residual_l2=res_l2,
        is_ke=res_max < tol,
    )
