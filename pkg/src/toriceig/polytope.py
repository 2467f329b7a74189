"""Labelled polytopes with exact rational arithmetic.

A labelled polytope is the data (P, nu): a compact simple polytope cut out
by affine inequalities L_i(x) = <x, nu_i> + c_i >= 0 with primitive integer
inward normals nu_i and rational offsets c_i.  Everything in this module
(membership, vertices, lattice enumeration, the shrunk polytopes P_k and the
eigenvalue bound they produce) is computed over `fractions.Fraction`, so
results are exact and reruns are bit-identical.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .parallel import pmap_chunks

__all__ = [
    "PolytopeError",
    "InvalidPolytope",
    "UnboundedOrEmpty",
    "NonSimple",
    "MismatchedNormals",
    "EmptyLattice",
    "K0NotFound",
    "PrematureK",
    "DegenerateN",
    "Vertex",
    "LatticeData",
    "BlyBound",
    "LabelledPolytope",
    "same_combinatorial_type",
    "polytope_from_dict",
    "polytope_to_dict",
    "load_polytope",
]


class PolytopeError(Exception):
    """Base class for polytope failures."""


class InvalidPolytope(PolytopeError):
    """Construction-time rejection (non-primitive normal, redundant facet, ...)."""


class UnboundedOrEmpty(PolytopeError):
    """The feasible set is empty, unbounded, or has empty interior."""


class NonSimple(PolytopeError):
    """Some vertex lies on more than `dim` facets."""


class MismatchedNormals(PolytopeError):
    """Combinatorial comparison requires identical normal lists."""


class EmptyLattice(PolytopeError):
    """P contains no point of Z^n/k."""


class K0NotFound(PolytopeError):
    """No k <= k_max produced a shrunk polytope of the right combinatorial type."""


class PrematureK(PolytopeError):
    """Requested refinement k is below k0(P)."""


class DegenerateN(PolytopeError):
    """The lattice count N_k vanishes, so the bound formula is undefined."""


# ---------------------------------------------------------------------------
# exact linear algebra over Fraction


def _solve_square(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve an n x n rational system; None if singular."""
    n = len(rows)
    aug = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(aug[i][n] for i in range(n))


def _rank(rows: Sequence[Sequence[Fraction]]) -> int:
    mat = [[Fraction(v) for v in row] for row in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        pv = mat[rank][col]
        mat[rank] = [v / pv for v in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


def _nullspace_vector(rows: Sequence[Sequence[Fraction]], n: int):
    """One nonzero rational vector orthogonal to all rows, or None."""
    mat = [[Fraction(v) for v in row] for row in rows]
    pivots: list[int] = []
    rank = 0
    for col in range(n):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        pv = mat[rank][col]
        mat[rank] = [v / pv for v in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    f0 = free[0]
    vec = [Fraction(0)] * n
    vec[f0] = Fraction(1)
    for r, pc in enumerate(pivots):
        vec[pc] = -mat[r][f0]
    return tuple(vec)


def _det_int(rows: Sequence[Sequence[int]]) -> int:
    """Integer determinant by expansion (n <= 3 in practice, generic fallback)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    det = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        det += (-1) ** j * rows[0][j] * _det_int(minor)
    return det


def _affine_rank(points: Sequence[Sequence[Fraction]]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    diffs = [[p[i] - base[i] for i in range(len(base))] for p in points[1:]]
    return _rank(diffs)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vertex:
    """A vertex with the sorted indices of the facets it saturates."""

    coords: tuple
    active: tuple


@dataclass(frozen=True)
class LatticeData:
    """P intersected with Z^n/k: the points, the count N_k, the facet minima
    L_min(i, k) and the shrunk polytope P_k = {L_i >= L_min(i, k)}."""

    k: int
    points: tuple
    n_k: int
    l_min: tuple
    shrunk: "LabelledPolytope"


@dataclass(frozen=True)
class BlyBound:
    """One evaluation of the lattice-point eigenvalue bound 2nk(N_k+1)/N_k."""

    k_used: int
    n_k: int
    bound: Fraction
    is_integer_bound: bool

    def to_dict(self) -> dict:
        return {
            "k_used": self.k_used,
            "n_k": self.n_k,
            "bound": _fraction_to_json(self.bound),
            "is_integer_bound": self.is_integer_bound,
        }


def _gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, abs(v))
    return g


class LabelledPolytope:
    """Compact simple polytope {x : <x, nu_i> + c_i >= 0} with integer normals.

    Normals must be primitive; offsets are rationals.  Construction validates
    boundedness, nonempty interior, simplicity and facet non-redundancy unless
    ``validate=False`` (used internally for candidate shrunk polytopes that may
    be degenerate).
    """

    def __init__(self, dim: int, facets: Sequence[tuple], validate: bool = True):
        if dim < 1:
            raise InvalidPolytope("dimension must be >= 1")
        normals = []
        offsets = []
        for idx, (normal, offset) in enumerate(facets):
            nvec = tuple(int(v) for v in normal)
            if len(nvec) != dim:
                raise InvalidPolytope(f"facet {idx}: normal has length {len(nvec)}, expected {dim}")
            if any(int(v) != v for v in normal):
                raise InvalidPolytope(f"facet {idx}: normal entries must be integers")
            if _gcd_all(nvec) != 1:
                raise InvalidPolytope(f"facet {idx}: normal {nvec} is not primitive")
            normals.append(nvec)
            offsets.append(Fraction(offset))
        self.dim = dim
        self.normals = tuple(normals)
        self.offsets = tuple(offsets)
        self._vertices: Optional[tuple] = None
        if validate:
            if len(normals) < dim + 1:
                raise InvalidPolytope(f"need at least {dim + 1} facets, got {len(normals)}")
            self._validate()

    # -- basic geometry -----------------------------------------------------

    @property
    def num_facets(self) -> int:
        return len(self.normals)

    def defining_values(self, x: Sequence) -> tuple:
        """The tuple (L_1(x), ..., L_d(x))."""
        return tuple(
            sum(Fraction(xi) * ni for xi, ni in zip(x, nu)) + c
            for nu, c in zip(self.normals, self.offsets)
        )

    def contains(self, x: Sequence) -> bool:
        return all(v >= 0 for v in self.defining_values(x))

    def vertices(self) -> tuple:
        """All vertices as `Vertex` objects, sorted lexicographically.

        Raises UnboundedOrEmpty / NonSimple when the halfspace data does not
        describe a compact simple polytope with interior.
        """
        if self._vertices is not None:
            return self._vertices
        n, d = self.dim, self.num_facets
        ray = _recession_ray(self.normals, n)
        if ray is not None:
            raise UnboundedOrEmpty(f"recession direction {ray} exists; polytope is unbounded")
        found: dict = {}
        for subset in itertools.combinations(range(d), n):
            rows = [self.normals[i] for i in subset]
            rhs = [-self.offsets[i] for i in subset]
            x = _solve_square(rows, rhs)
            if x is None:
                continue
            vals = self.defining_values(x)
            if any(v < 0 for v in vals):
                continue
            found[x] = tuple(i for i, v in enumerate(vals) if v == 0)
        if not found:
            raise UnboundedOrEmpty("no feasible vertex; polytope is empty")
        for coords, active in found.items():
            if len(active) > n:
                raise NonSimple(f"vertex {coords} lies on facets {active}")
        coords_sorted = sorted(found)
        bary = tuple(
            sum(c[i] for c in coords_sorted) / len(coords_sorted) for i in range(n)
        )
        if any(v <= 0 for v in self.defining_values(bary)):
            raise UnboundedOrEmpty("empty interior: vertex barycenter lies on a facet")
        self._vertices = tuple(Vertex(c, found[c]) for c in coords_sorted)
        return self._vertices

    def _validate(self):
        verts = self.vertices()
        for i in range(self.num_facets):
            on_facet = [v.coords for v in verts if i in v.active]
            if _affine_rank(on_facet) != self.dim - 1:
                raise InvalidPolytope(
                    f"facet {i} is redundant: it does not carry a {self.dim - 1}-dimensional face"
                )

    def bounding_box(self) -> tuple:
        """Exact per-axis (min, max) over the vertices."""
        verts = self.vertices()
        lo = tuple(min(v.coords[i] for v in verts) for i in range(self.dim))
        hi = tuple(max(v.coords[i] for v in verts) for i in range(self.dim))
        return lo, hi

    def vertex_barycenter(self) -> tuple:
        verts = self.vertices()
        return tuple(
            sum(v.coords[i] for v in verts) / len(verts) for i in range(self.dim)
        )

    def translated(self, shift: Sequence) -> "LabelledPolytope":
        """The polytope P - shift (so x=0 corresponds to x=shift in P)."""
        shift = tuple(Fraction(s) for s in shift)
        facets = [
            (nu, c + sum(s * v for s, v in zip(shift, nu)))
            for nu, c in zip(self.normals, self.offsets)
        ]
        return LabelledPolytope(self.dim, facets)

    # -- lattice combinatorics ----------------------------------------------

    def is_delzant(self) -> bool:
        """True iff the active normals at every vertex have determinant +-1."""
        for v in self.vertices():
            rows = [self.normals[i] for i in v.active]
            if abs(_det_int(rows)) != 1:
                return False
        return True

    def is_integral(self) -> bool:
        """True iff every vertex has integer coordinates."""
        return all(
            all(c.denominator == 1 for c in v.coords) for v in self.vertices()
        )

    def lattice_points(self, k: int) -> LatticeData:
        """Enumerate P  intersect  Z^n/k and derive L_min and the shrunk P_k."""
        if k < 1:
            raise ValueError("k must be a positive integer")
        lo, hi = self.bounding_box()
        ranges = [
            range(math.ceil(k * lo[i]), math.floor(k * hi[i]) + 1)
            for i in range(self.dim)
        ]

        def scan(first_values):
            pts = []
            for j0 in first_values:
                for rest in itertools.product(*ranges[1:]):
                    cand = tuple(Fraction(j, k) for j in (j0, *rest))
                    if self.contains(cand):
                        pts.append(cand)
            return pts

        points = pmap_chunks(scan, list(ranges[0]))
        if not points:
            raise EmptyLattice(f"P contains no point of Z^{self.dim}/{k}")
        points = tuple(sorted(points))
        values = [self.defining_values(p) for p in points]
        l_min = tuple(min(v[i] for v in values) for i in range(self.num_facets))
        shrunk = LabelledPolytope(
            self.dim,
            [(nu, c - m) for nu, c, m in zip(self.normals, self.offsets, l_min)],
            validate=False,
        )
        return LatticeData(k=k, points=points, n_k=len(points) - 1, l_min=l_min, shrunk=shrunk)

    def k0(self, k_max: int = 64) -> int:
        """Smallest k <= k_max whose shrunk polytope P_k matches P combinatorially."""
        if not self.is_delzant():
            raise InvalidPolytope("k0 is defined for Delzant polytopes")
        for k in range(1, k_max + 1):
            try:
                data = self.lattice_points(k)
            except EmptyLattice:
                continue
            if same_combinatorial_type(self, data.shrunk):
                return k
        raise K0NotFound(f"no k <= {k_max} reproduces the combinatorial type; raise k_max")

    def check_kpk_integral(self, k: int, k_max: int = 64) -> dict:
        """Build kP_k and report integrality, the Delzant test and the count match."""
        threshold = self.k0(k_max)
        if k < threshold:
            raise PrematureK(f"k={k} is below k0={threshold}")
        data = self.lattice_points(k)
        kpk = LabelledPolytope(
            self.dim,
            [
                (nu, k * (c - m))
                for nu, c, m in zip(self.normals, self.offsets, data.l_min)
            ],
        )
        count = len(kpk.lattice_points(1).points)
        return {
            "k": k,
            "is_integral": kpk.is_integral(),
            "is_delzant": kpk.is_delzant(),
            "lattice_count_matches": count == data.n_k + 1,
            "n_k": data.n_k,
        }

    def bly_bound(self, k: Optional[int] = None, k_max: int = 64) -> BlyBound:
        """The exact rational eigenvalue bound 2nk(N_k+1)/N_k.

        With no k the integral case uses k=1 and the non-integral case k=k0(P).
        """
        integral = self.is_integral()
        threshold = 1 if integral else self.k0(k_max)
        if k is None:
            k = threshold
        elif k < threshold:
            raise PrematureK(f"k={k} is below k0={threshold}")
        data = self.lattice_points(k)
        if data.n_k == 0:
            raise DegenerateN(f"N_{k} = 0: the bound formula is undefined")
        bound = Fraction(2 * self.dim * k * (data.n_k + 1), data.n_k)
        return BlyBound(
            k_used=k,
            n_k=data.n_k,
            bound=bound,
            is_integer_bound=bound.denominator == 1,
        )

    # -- misc -----------------------------------------------------------------

    def __repr__(self):
        return f"LabelledPolytope(dim={self.dim}, facets={self.num_facets})"

    def __eq__(self, other):
        return (
            isinstance(other, LabelledPolytope)
            and self.dim == other.dim
            and self.normals == other.normals
            and self.offsets == other.offsets
        )

    def __hash__(self):
        return hash((self.dim, self.normals, self.offsets))


def _recession_ray(normals: Sequence[Sequence[int]], n: int):
    """A nonzero direction v with <nu_i, v> >= 0 for all i, or None if bounded."""
    frac_rows = [[Fraction(v) for v in nu] for nu in normals]
    if _rank(frac_rows) < n:
        return _nullspace_vector(frac_rows, n)  # common line direction
    if n == 1:
        for v in ((Fraction(1),), (Fraction(-1),)):
            if all(nu[0] * v[0] >= 0 for nu in normals):
                return v
        return None
    for subset in itertools.combinations(range(len(normals)), n - 1):
        sub = [frac_rows[i] for i in subset]
        vec = _nullspace_vector(sub, n)
        if vec is None:
            continue
        for cand in (vec, tuple(-v for v in vec)):
            if all(sum(a * b for a, b in zip(nu, cand)) >= 0 for nu in frac_rows):
                return cand
    return None


def same_combinatorial_type(P: LabelledPolytope, Q: LabelledPolytope) -> bool:
    """True iff Q is simple, keeps every facet of P and pairs up the vertex
    active-sets one to one.  Requires identical normal lists (parallel facets
    give the canonical facet correspondence)."""
    if P.dim != Q.dim or P.normals != Q.normals:
        raise MismatchedNormals("combinatorial comparison needs identical normal lists")
    try:
        verts_q = Q.vertices()
    except (UnboundedOrEmpty, NonSimple):
        return False
    for i in range(Q.num_facets):
        on_facet = [v.coords for v in verts_q if i in v.active]
        if _affine_rank(on_facet) != Q.dim - 1:
            return False
    family_p = {frozenset(v.active) for v in P.vertices()}
    family_q = {frozenset(v.active) for v in verts_q}
    return family_p == family_q


# ---------------------------------------------------------------------------
# JSON interface


def _offset_from_json(value, index: int) -> Fraction:
    if isinstance(value, bool):
        raise InvalidPolytope(f"facet {index}: offset must be an integer or a rational string")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidPolytope(f"facet {index}: cannot parse offset {value!r}") from exc
    raise InvalidPolytope(
        f"facet {index}: offset must be an integer, a decimal string or 'p/q', got {value!r}"
    )


def _fraction_to_json(value: Fraction):
    return int(value) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def polytope_from_dict(data: dict) -> LabelledPolytope:
    """Parse {"dim": n, "facets": [{"normal": [...], "offset": ...}, ...]}."""
    try:
        dim = int(data["dim"])
        raw_facets = data["facets"]
    except (KeyError, TypeError) as exc:
        raise InvalidPolytope("polytope JSON needs 'dim' and 'facets'") from exc
    facets = []
    for idx, entry in enumerate(raw_facets):
        try:
            normal = entry["normal"]
        except (KeyError, TypeError) as exc:
            raise InvalidPolytope(f"facet {idx}: missing 'normal'") from exc
        for v in normal:
            if isinstance(v, bool) or not isinstance(v, int):
                raise InvalidPolytope(f"facet {idx}: normal entries must be integers")
        facets.append((normal, _offset_from_json(entry.get("offset", 0), idx)))
    return LabelledPolytope(dim, facets)


def polytope_to_dict(P: LabelledPolytope) -> dict:
    return {
        "dim": P.dim,
        "facets": [
            {"normal": list(nu), "offset": _fraction_to_json(c)}
            for nu, c in zip(P.normals, P.offsets)
        ],
    }


def load_polytope(path) -> LabelledPolytope:
    with open(path, "r", encoding="utf-8") as fh:
        return polytope_from_dict(json.load(fh))
