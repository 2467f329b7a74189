"""Deterministic point sets on a polytope: Halton interior samples and
facet-proximal probes.  No RNG anywhere, so reruns are identical."""

from __future__ import annotations

import numpy as np

from .polytope import LabelledPolytope

_PRIMES = (2, 3, 5, 7, 11)


def _radical_inverse(index: int, base: int) -> float:
    inv = 0.0
    f = 1.0 / base
    i = index
    while i > 0:
        inv += f * (i % base)
        i //= base
        f /= base
    return inv


def halton(count: int, dim: int, skip: int = 20) -> np.ndarray:
    """`count` Halton points in [0,1)^dim (leading entries skipped)."""
    pts = np.empty((count, dim))
    for j in range(dim):
        base = _PRIMES[j]
        pts[:, j] = [_radical_inverse(i + skip, base) for i in range(count)]
    return pts


def polytope_scale(P: LabelledPolytope) -> float:
    lo, hi = P.bounding_box()
    return max(float(h - l) for l, h in zip(lo, hi))


def facet_values(P: LabelledPolytope, x: np.ndarray) -> np.ndarray:
    """L_i(x) for every facet, float, vectorized over rows of x."""
    A = np.array(P.normals, dtype=float)
    c = np.array([float(v) for v in P.offsets])
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return x @ A.T + c


def interior_points(
    P: LabelledPolytope, count: int, min_facet: float | None = None
) -> np.ndarray:
    """`count` deterministic interior points with all L_i >= min_facet.

    Halton points in the bounding box are filtered by margin; the margin is
    halved (at most 12 times) if the polytope is too thin for the default.
    """
    lo, hi = P.bounding_box()
    lo_f = np.array([float(v) for v in lo])
    hi_f = np.array([float(v) for v in hi])
    margin = polytope_scale(P) * 1e-2 if min_facet is None else float(min_facet)
    for _ in range(12):
        accepted = []
        idx = 0
        block = 256
        while len(accepted) < count and idx < 200_000:
            unit = halton(block, P.dim, skip=20 + idx)
            pts = lo_f + unit * (hi_f - lo_f)
            vals = facet_values(P, pts)
            good = pts[np.min(vals, axis=1) >= margin]
            accepted.extend(map(tuple, good))
            idx += block
        if len(accepted) >= count:
            return np.array(accepted[:count])
        margin *= 0.5
    raise RuntimeError(f"could not place {count} interior points in {P!r}")


def facet_proximal_points(P: LabelledPolytope, distances) -> list:
    """Points at prescribed L_i-distances inward of each facet's centroid.

    Returns (facet_index, distance, point) triples; a probe is skipped when
    the inward step leaves the polytope (very thin polytopes).
    """
    verts = P.vertices()
    out = []
    for i, nu in enumerate(P.normals):
        on_facet = [v.coords for v in verts if i in v.active]
        centroid = np.array(
            [float(sum(c[j] for c in on_facet)) / len(on_facet) for j in range(P.dim)]
        )
        nu_f = np.array(nu, dtype=float)
        nsq = float(nu_f @ nu_f)
        for dist in distances:
            x = centroid + (dist / nsq) * nu_f
            vals = facet_values(P, x)[0]
            if np.min(vals) <= 0:
                continue
            out.append((i, float(dist), x))
    return out


def facet_tangent_basis(P: LabelledPolytope, facet_index: int) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to normal i (rows)."""
    nu = np.array(P.normals[facet_index], dtype=float)
    n = P.dim
    if n == 1:
        return np.zeros((0, 1))
    basis = []
    for e in np.eye(n):
        v = e - (e @ nu) / (nu @ nu) * nu
        for b in basis:
            v = v - (v @ b) * b
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            basis.append(v / norm)
        if len(basis) == n - 1:
            break
    return np.array(basis)
