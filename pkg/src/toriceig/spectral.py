"""Rayleigh-Ritz computation of the first invariant eigenvalue.

The smallest nonzero eigenvalue of the invariant Laplacian reduces to the
minimum of the Rayleigh quotient

    R(f) = integral_P H(df, df) / integral_P (f - fbar)^2

over functions on the polytope.  The trial space is the span of monomials of
total degree <= D (affinely normalized to the bounding box and mean-centered
against the quadrature), so every computed value is an upper bound for the
true eigenvalue.  The generalized problem is reduced by a pivoted Cholesky
factorization of the mass matrix and solved with a cyclic Jacobi iteration;
everything is deterministic, so identical inputs give bit-identical output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .parallel import pmap_chunks
from .polytope import LabelledPolytope
from .potential import (
    SymplecticPotential,
    center_polytope,
    dilation,
    guillemin,
    quadratic_perturbed,
)
from .quadrature import QuadratureRule, build_quadrature

__all__ = [
    "SpectralError",
    "ZeroDenominator",
    "MassSingular",
    "QuadratureTooCoarse",
    "TrialFunction",
    "RitzResult",
    "SweepResult",
    "rayleigh_quotient",
    "lambda1_invariant",
    "sweep_uc",
    "sweep_dilation",
]


class SpectralError(Exception):
    pass


class ZeroDenominator(SpectralError):
    """The test function is quadrature-constant."""


class MassSingular(SpectralError):
    """The mass matrix collapsed entirely under the pivot drop threshold."""


class QuadratureTooCoarse(SpectralError):
    """Assembled stiffness lost symmetry beyond tolerance."""


PIVOT_DROP = 1e-10
JACOBI_TOL = 1e-12


class TrialFunction:
    """Polynomial in normalized coordinates xhat = (x - center)/halfwidth,
    determined by monomial exponents and a coefficient vector."""

    def __init__(self, coeffs, exponents, center, halfwidth):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.exponents = tuple(tuple(e) for e in exponents)
        self.center = np.asarray(center, dtype=float)
        self.halfwidth = np.asarray(halfwidth, dtype=float)

    def _monomials(self, xhat: np.ndarray) -> np.ndarray:
        cols = [np.prod(xhat ** np.array(e), axis=-1) for e in self.exponents]
        return np.stack(cols, axis=-1)

    def value(self, x) -> float:
        xhat = (np.asarray(x, dtype=float) - self.center) / self.halfwidth
        return float(self._monomials(xhat) @ self.coeffs)

    def values(self, x: np.ndarray) -> np.ndarray:
        xhat = (np.atleast_2d(np.asarray(x, dtype=float)) - self.center) / self.halfwidth
        return self._monomials(xhat) @ self.coeffs

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.gradients(x[None, :])[0]

    def gradients(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        xhat = (x - self.center) / self.halfwidth
        m, n = xhat.shape
        out = np.zeros((m, n))
        for coef, expo in zip(self.coeffs, self.exponents):
            if coef == 0:
                continue
            for j, ej in enumerate(expo):
                if ej == 0:
                    continue
                term = np.full(m, coef * ej / self.halfwidth[j])
                for i, ei in enumerate(expo):
                    power = ei - 1 if i == j else ei
                    if power:
                        term = term * xhat[:, i] ** power
                out[:, j] += term
        return out


@dataclass(frozen=True)
class RitzResult:
    """Output of one Ritz solve: ascending eigenvalues on the mean-zero trial
    space, the extracted upper bound lambda1T and its minimizer."""

    degree: int
    basis_size: int
    eigenvalues: np.ndarray
    lambda1T: float
    eigvec: np.ndarray
    mass_condition: float
    stiffness_condition: float
    exponents: tuple
    center: np.ndarray
    halfwidth: np.ndarray
    quad_nodes: int

    def eigenfunction(self) -> TrialFunction:
        return TrialFunction(self.eigvec, self.exponents, self.center, self.halfwidth)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "basis_size": self.basis_size,
            "lambda1T": self.lambda1T,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "mass_condition": self.mass_condition,
            "stiffness_condition": self.stiffness_condition,
            "quad_nodes": self.quad_nodes,
        }


def _require_matching(u: SymplecticPotential, Q: QuadratureRule):
    if Q.polytope != u.polytope:
        raise ValueError(
            "quadrature was built for a different polytope than the potential "
            "(dilation potentials live on the auto-centered copy)"
        )


def _hessian_inverses(u: SymplecticPotential, nodes: np.ndarray) -> np.ndarray:
    def block(rows):
        return [u.sample(x).H for x in rows]

    return np.array(pmap_chunks(block, list(nodes), min_chunk=64))


def rayleigh_quotient(u: SymplecticPotential, f, Q: QuadratureRule) -> float:
    """integral H(df, df) / integral (f - fbar)^2 by quadrature; an upper
    bound for lambda1T up to quadrature error."""
    _require_matching(u, Q)
    w = Q.weights
    if hasattr(f, "values"):
        vals = np.asarray(f.values(Q.nodes), dtype=float)
    else:
        vals = np.array([f.value(x) for x in Q.nodes])
    if hasattr(f, "gradients"):
        grads = np.asarray(f.gradients(Q.nodes), dtype=float)
    else:
        grads = np.array([f.gradient(x) for x in Q.nodes])
    Hs = _hessian_inverses(u, Q.nodes)
    numerator = float(np.einsum("q,qi,qij,qj->", w, grads, Hs, grads))
    fbar = float(w @ vals) / float(np.sum(w))
    centered = vals - fbar
    denominator = float(w @ centered**2)
    scale = float(np.sum(w)) * max(1.0, float(np.max(np.abs(vals))) ** 2)
    if denominator <= 1e-24 * scale:
        raise ZeroDenominator("test function is constant on the quadrature nodes")
    return numerator / denominator


def _monomial_exponents(n: int, degree: int) -> list:
    out = [
        e
        for e in itertools.product(range(degree + 1), repeat=n)
        if 1 <= sum(e) <= degree
    ]
    out.sort(key=lambda e: (sum(e), e))
    return out


def _pivoted_cholesky(M: np.ndarray, rel_drop: float):
    """Diagonal-pivoted Cholesky; returns (L11, kept) where kept lists the
    retained basis indices in pivot order and M[kept][:, kept] = L11 L11^T."""
    n = M.shape[0]
    A = np.array(M, dtype=float, copy=True)
    perm = np.arange(n)
    threshold = rel_drop * float(np.max(np.diag(A)))
    L = np.zeros((n, n))
    rank = 0
    for k in range(n):
        d = np.diag(A)[k:]
        j = k + int(np.argmax(d))
        if A[j, j] <= threshold:
            break
        if j != k:
            A[[k, j], :] = A[[j, k], :]
            A[:, [k, j]] = A[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
            L[[k, j], :] = L[[j, k], :]
        pivot = np.sqrt(A[k, k])
        L[k, k] = pivot
        L[k + 1 :, k] = A[k + 1 :, k] / pivot
        A[k + 1 :, k + 1 :] -= np.outer(L[k + 1 :, k], L[k + 1 :, k])
        rank += 1
    if rank == 0:
        raise MassSingular("mass matrix is numerically zero")
    return L[:rank, :rank], perm[:rank]


def _jacobi_eigh(C: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization of a symmetric matrix; returns ascending
    eigenvalues and the matching orthonormal eigenvectors (columns)."""
    A = np.array(C, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    norm = float(np.sqrt(np.sum(A**2)))
    for _ in range(max_sweeps):
        off = float(np.sqrt(2.0 * np.sum(np.tril(A, -1) ** 2)))
        if off <= tol * max(norm, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for M in (A,):
                    col_p = M[:, p].copy()
                    col_q = M[:, q].copy()
                    M[:, p] = c * col_p - s * col_q
                    M[:, q] = s * col_p + c * col_q
                    row_p = M[p, :].copy()
                    row_q = M[q, :].copy()
                    M[p, :] = c * row_p - s * row_q
                    M[q, :] = s * row_p + c * row_q
                col_p = V[:, p].copy()
                col_q = V[:, q].copy()
                V[:, p] = c * col_p - s * col_q
                V[:, q] = s * col_p + c * col_q
    eigs = np.diag(A).copy()
    order = np.argsort(eigs, kind="stable")
    return eigs[order], V[:, order]


def lambda1_invariant(u: SymplecticPotential, degree: int, Q: QuadratureRule) -> RitzResult:
    """Ritz upper bound for the first invariant eigenvalue on the span of
    mean-centered monomials of total degree <= degree."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    _require_matching(u, Q)
    P = u.polytope
    n = P.dim
    lo, hi = P.bounding_box()
    lo_f = np.array([float(v) for v in lo])
    hi_f = np.array([float(v) for v in hi])
    center = (lo_f + hi_f) / 2.0
    halfwidth = np.maximum((hi_f - lo_f) / 2.0, 1e-12)

    exponents = _monomial_exponents(n, degree)
    w = Q.weights
    total_w = float(np.sum(w))
    xhat = (Q.nodes - center) / halfwidth
    vals = np.stack(
        [np.prod(xhat ** np.array(e), axis=-1) for e in exponents], axis=-1
    )  # (m, B)
    vals = vals - (w @ vals) / total_w  # mean-zero against the rule

    grads = np.zeros((len(w), len(exponents), n))
    for b, expo in enumerate(exponents):
        basis_fn = TrialFunction(
            np.eye(len(exponents))[b], exponents, center, halfwidth
        )
        grads[:, b, :] = basis_fn.gradients(Q.nodes)

    Hs = _hessian_inverses(u, Q.nodes)
    M = np.einsum("q,qa,qb->ab", w, vals, vals)
    A = np.einsum("q,qai,qij,qbj->ab", w, grads, Hs, grads)

    asym = float(np.max(np.abs(A - A.T)))
    if asym > 1e-8 * max(1.0, float(np.max(np.abs(A)))):
        raise QuadratureTooCoarse(f"stiffness asymmetry {asym:.3e}")
    A = 0.5 * (A + A.T)
    M = 0.5 * (M + M.T)

    L11, kept = _pivoted_cholesky(M, PIVOT_DROP)
    A_kept = A[np.ix_(kept, kept)]
    M_kept = M[np.ix_(kept, kept)]
    Y = solve_triangular(L11, A_kept, lower=True)
    C = solve_triangular(L11, Y.T, lower=True).T
    C = 0.5 * (C + C.T)
    eigs, vecs = _jacobi_eigh(C)
    z = solve_triangular(L11.T, vecs[:, 0], lower=False)
    coeffs = np.zeros(len(exponents))
    coeffs[kept] = z

    return RitzResult(
        degree=degree,
        basis_size=len(kept),
        eigenvalues=eigs,
        lambda1T=float(eigs[0]),
        eigvec=coeffs,
        mass_condition=float(np.linalg.cond(M_kept)),
        stiffness_condition=float(np.linalg.cond(A_kept)),
        exponents=tuple(exponents),
        center=center,
        halfwidth=halfwidth,
        quad_nodes=len(w),
    )


@dataclass(frozen=True)
class SweepResult:
    """Table of (family parameter, lambda1T) rows from one sweep."""

    parameter: str
    rows: tuple
    degree: int
    quad_nodes: int
    trend_violations: tuple

    def to_csv(self) -> str:
        lines = ["param,lambda1T,degree,quad_nodes"]
        for param, lam in self.rows:
            lines.append(f"{param!r},{lam!r},{self.degree},{self.quad_nodes}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "rows": [{self.parameter: p, "lambda1T": lam} for p, lam in self.rows],
            "degree": self.degree,
            "quad_nodes": self.quad_nodes,
            "trend_violations": list(self.trend_violations),
        }


def sweep_uc(
    P: LabelledPolytope,
    axis: int,
    c_list,
    degree: int = 6,
    Q: QuadratureRule | None = None,
    order: int = 3,
    depth: int = 2,
) -> SweepResult:
    """lambda1T along the quadratic perturbation family; the values decrease
    toward 0 as c grows.  Rows violating the decreasing trend are flagged,
    not rejected."""
    c_list = [float(c) for c in c_list]
    if any(c < 0 for c in c_list) or sorted(c_list) != c_list:
        raise ValueError("c_list must be nonnegative and ascending")
    if Q is None:
        Q = build_quadrature(P, order, depth)
    rows = []
    for c in c_list:
        u = guillemin(P) if c == 0 else quadratic_perturbed(P, axis, c)
        rows.append((c, lambda1_invariant(u, degree, Q).lambda1T))
    violations = tuple(
        i for i in range(1, len(rows)) if not rows[i][1] < rows[i - 1][1] + 1e-8
    )
    return SweepResult(
        parameter="c",
        rows=tuple(rows),
        degree=degree,
        quad_nodes=len(Q),
        trend_violations=violations,
    )


def sweep_dilation(
    P: LabelledPolytope,
    s_list,
    degree: int = 6,
    Q: QuadratureRule | None = None,
    order: int = 3,
    depth: int = 2,
) -> SweepResult:
    """lambda1T along the dilation family for s decreasing toward 1.

    The polytope is auto-centered.  Values stay above the Guillemin lambda1T
    and grow as s drops to 1; the growth need not be monotone, so violations
    are flagged rather than raised.
    """
    s_list = [float(s) for s in s_list]
    if any(s <= 1 for s in s_list):
        raise ValueError("dilation parameters must satisfy s > 1")
    if sorted(s_list, reverse=True) != s_list:
        raise ValueError("s_list must be strictly decreasing toward 1")
    Pc, _shift = center_polytope(P)
    if Q is None:
        Q = build_quadrature(Pc, order, depth)
    elif Q.polytope != Pc:
        raise ValueError("quadrature must be built on the centered polytope")
    rows = []
    for s in s_list:
        u = dilation(Pc, s)
        rows.append((s, lambda1_invariant(u, degree, Q).lambda1T))
    violations = tuple(
        i for i in range(1, len(rows)) if not rows[i][1] > rows[i - 1][1] - 1e-8
    )
    return SweepResult(
        parameter="s",
        rows=tuple(rows),
        degree=degree,
        quad_nodes=len(Q),
        trend_violations=violations,
    )
