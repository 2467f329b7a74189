"""Polytope quadrature for n <= 3.

The polytope is triangulated exactly (rational vertices) by coning its vertex
barycenter over the triangulated facets, each simplex optionally red-refined
``depth`` times, and a conical-product Gauss-Jacobi rule of degree 2*order - 1
is mapped onto every simplex.  The rule has strictly interior nodes and
positive weights, and its total weight reproduces the exact rational volume
of the triangulation.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import roots_jacobi

from .polytope import LabelledPolytope, PolytopeError

__all__ = ["DimUnsupported", "QuadratureRule", "triangulate", "build_quadrature"]

RULE_DEGREES = {1: 1, 2: 3, 3: 5, 4: 7}


class DimUnsupported(PolytopeError):
    """Quadrature is implemented for polytope dimension 1, 2, 3."""


@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule: nodes (m, n), positive weights (m,) and the exact
    rational triangulation it was built on."""

    polytope: LabelledPolytope
    nodes: np.ndarray
    weights: np.ndarray
    triangulation: tuple
    order: int
    depth: int
    exact_volume: Fraction

    @property
    def degree(self) -> int:
        return RULE_DEGREES[self.order]

    def __len__(self) -> int:
        return len(self.weights)


def _facet_vertices(P: LabelledPolytope, facet: int) -> list:
    return [v.coords for v in P.vertices() if facet in v.active]


def _cyclic_order_2d(points: list, drop_axis: int) -> list:
    """Order coplanar 3D points cyclically around their centroid, exactly.

    The coordinate `drop_axis` is projected out; comparisons use half-plane
    classification plus rational cross products.
    """
    keep = [i for i in range(3) if i != drop_axis]
    centroid = tuple(
        sum(p[i] for p in points) / len(points) for i in range(3)
    )
    rel = [
        ((p[keep[0]] - centroid[keep[0]], p[keep[1]] - centroid[keep[1]]), p)
        for p in points
    ]

    def half(v):
        # 0 for the upper half plane (y > 0, or y = 0 and x > 0), 1 below
        return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1

    def compare(a, b):
        va, vb = a[0], b[0]
        ha, hb = half(va), half(vb)
        if ha != hb:
            return -1 if ha < hb else 1
        cross = va[0] * vb[1] - va[1] * vb[0]
        if cross > 0:
            return -1
        if cross < 0:
            return 1
        return 0

    rel.sort(key=functools.cmp_to_key(compare))
    return [p for _, p in rel]


def triangulate(P: LabelledPolytope) -> tuple:
    """Exact simplicial decomposition: cone the vertex barycenter over each
    facet (facets themselves fanned into simplices for n = 3).  Simplices are
    returned in canonical (sorted) order."""
    n = P.dim
    if n > 3:
        raise DimUnsupported(f"dimension {n} > 3")
    bary = P.vertex_barycenter()
    simplices = []
    if n == 1:
        for v in P.vertices():
            simplices.append((bary, v.coords))
    elif n == 2:
        for facet in range(P.num_facets):
            edge = _facet_vertices(P, facet)
            simplices.append((bary, edge[0], edge[1]))
    else:
        for facet in range(P.num_facets):
            poly = _facet_vertices(P, facet)
            nu = P.normals[facet]
            drop = max(range(3), key=lambda i: abs(nu[i]))
            ring = _cyclic_order_2d(poly, drop)
            for i in range(1, len(ring) - 1):
                simplices.append((bary, ring[0], ring[i], ring[i + 1]))
    canon = [tuple(sorted(s)) for s in simplices]
    return tuple(sorted(canon))


def _midpoint(a, b):
    return tuple((ai + bi) / 2 for ai, bi in zip(a, b))


def _refine(simplex: tuple) -> list:
    """One red refinement step with rational midpoints."""
    n = len(simplex) - 1
    if n == 1:
        a, b = simplex
        m = _midpoint(a, b)
        return [(a, m), (m, b)]
    if n == 2:
        a, b, c = simplex
        mab, mac, mbc = _midpoint(a, b), _midpoint(a, c), _midpoint(b, c)
        return [(a, mab, mac), (b, mab, mbc), (c, mac, mbc), (mab, mbc, mac)]
    a, b, c, d = simplex
    mab, mac, mad = _midpoint(a, b), _midpoint(a, c), _midpoint(a, d)
    mbc, mbd, mcd = _midpoint(b, c), _midpoint(b, d), _midpoint(c, d)
    return [
        (a, mab, mac, mad),
        (mab, b, mbc, mbd),
        (mac, mbc, c, mcd),
        (mad, mbd, mcd, d),
        (mab, mac, mad, mbd),
        (mab, mac, mbc, mbd),
        (mac, mad, mbd, mcd),
        (mac, mbc, mbd, mcd),
    ]


def _simplex_volume(simplex: tuple) -> Fraction:
    n = len(simplex) - 1
    base = simplex[0]
    rows = [[v[i] - base[i] for i in range(n)] for v in simplex[1:]]
    if n == 1:
        det = rows[0][0]
    elif n == 2:
        det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    else:
        det = (
            rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
            - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
            + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0])
        )
    factorial = (1, 1, 2, 6)[n]
    return abs(det) / factorial if isinstance(det, Fraction) else Fraction(abs(det), factorial)


@functools.lru_cache(maxsize=None)
def _unit_simplex_rule(n: int, q: int):
    """Conical-product rule on the unit simplex, exact for total degree
    <= 2q - 1, q^n interior nodes, positive weights."""
    axes = []
    for i in range(n):
        alpha = n - 1 - i  # weight (1 - xi)^alpha from the collapsed Jacobian
        t, w = roots_jacobi(q, alpha, 0)
        axes.append(((t + 1.0) / 2.0, w / 2.0 ** (alpha + 1)))
    nodes = np.empty((q**n, n))
    weights = np.empty(q**n)
    for row, combo in enumerate(itertools.product(range(q), repeat=n)):
        rem = 1.0
        wgt = 1.0
        for i, ci in enumerate(combo):
            xi, wi = axes[i]
            nodes[row, i] = xi[ci] * rem
            rem *= 1.0 - xi[ci]
            wgt *= wi[ci]
        weights[row] = wgt
    return nodes, weights


def build_quadrature(P: LabelledPolytope, order: int = 3, depth: int = 2) -> QuadratureRule:
    """Composite rule on P.  order in 1..4 selects base degree 1/3/5/7;
    depth >= 0 uniform red refinements of the triangulation."""
    if P.dim > 3:
        raise DimUnsupported(f"dimension {P.dim} > 3")
    if order not in RULE_DEGREES:
        raise ValueError(f"order must be one of {sorted(RULE_DEGREES)}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    simplices = list(triangulate(P))
    for _ in range(depth):
        refined = []
        for s in simplices:
            refined.extend(_refine(s))
        simplices = [tuple(sorted(s)) for s in refined]
    simplices.sort()

    n = P.dim
    lam, base_w = _unit_simplex_rule(n, order)
    exact_volume = Fraction(0)
    all_nodes = []
    all_weights = []
    for s in simplices:
        vol = _simplex_volume(s)
        exact_volume += vol
        v0 = np.array([float(c) for c in s[0]])
        J = np.array([[float(s[i + 1][j] - s[0][j]) for i in range(n)] for j in range(n)])
        # columns of J are edge vectors; x = v0 + J @ lam
        nodes = v0 + lam @ J.T
        scale = float(vol) * (1, 1, 2, 6)[n]  # |det J| recovered from the volume
        all_nodes.append(nodes)
        all_weights.append(base_w * scale)
    return QuadratureRule(
        polytope=P,
        nodes=np.vstack(all_nodes),
        weights=np.concatenate(all_weights),
        triangulation=tuple(simplices),
        order=order,
        depth=depth,
        exact_volume=exact_volume,
    )
