"""Sparse multivariate polynomials with exact derivatives.

Used for test functions fed to the Laplacian and for the polynomial
perturbation term of a symplectic potential.  Coefficients are plain floats;
differentiation is exact term manipulation.
"""

from __future__ import annotations

import numpy as np


class MultiPoly:
    """Polynomial sum_a  c_a * x^a  stored as {exponent tuple: coefficient}."""

    def __init__(self, nvars: int, terms: dict):
        self.nvars = nvars
        self.terms = {
            tuple(int(e) for e in expo): float(c)
            for expo, c in terms.items()
            if c != 0
        }
        for expo in self.terms:
            if len(expo) != nvars or any(e < 0 for e in expo):
                raise ValueError(f"bad exponent tuple {expo} for {nvars} variables")

    @classmethod
    def coordinate(cls, nvars: int, axis: int, shift: float = 0.0) -> "MultiPoly":
        """The polynomial x_axis - shift."""
        terms = {tuple(1 if j == axis else 0 for j in range(nvars)): 1.0}
        if shift:
            terms[(0,) * nvars] = -float(shift)
        return cls(nvars, terms)

    @classmethod
    def constant(cls, nvars: int, value: float) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: float(value)})

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for expo, c in self.terms.items():
            term = c
            for xi, e in zip(x, expo):
                if e:
                    term *= xi**e
            total += term
        return total

    def derivative(self, axis: int) -> "MultiPoly":
        out: dict = {}
        for expo, c in self.terms.items():
            e = expo[axis]
            if e == 0:
                continue
            new = list(expo)
            new[axis] = e - 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + c * e
        return MultiPoly(self.nvars, out)

    def gradient(self, x) -> np.ndarray:
        return np.array([self.derivative(i).value(x) for i in range(self.nvars)])

    def hessian(self, x) -> np.ndarray:
        n = self.nvars
        H = np.empty((n, n))
        firsts = [self.derivative(i) for i in range(n)]
        for i in range(n):
            for j in range(i, n):
                H[i, j] = H[j, i] = firsts[i].derivative(j).value(x)
        return H

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __repr__(self):
        return f"MultiPoly(nvars={self.nvars}, terms={len(self.terms)})"
