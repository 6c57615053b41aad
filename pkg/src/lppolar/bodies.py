"""Convex bodies: V-polytopes, balls, affine images, and exact operations.

Bodies are immutable after construction.  V-polytopes are canonicalized to
their extreme points (qhull), which keeps Steiner symmetrization exact: the
symmetral of a polytope is again the hull of finitely many computable points.
Volumes and barycenters are exact per-simplex sums over a centroid-fan
triangulation; chord (fiber) queries are solved by a small dense LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.special import betainc, gamma

from .errors import BallNonOrthogonal, DegenerateBody, NonInvertible, UnsupportedKind
from .linprog import line_body_extent

__all__ = [
    "VPolytope",
    "Ball",
    "AffineImage",
    "ConvexBody",
    "Direction",
    "Simplex",
    "vpolytope",
    "direction",
    "dim",
    "volume",
    "barycenter",
    "triangulate",
    "support",
    "contains",
    "strictly_inside",
    "fiber_extent",
    "steiner_symmetral",
    "transform",
    "translate",
    "reflect",
    "halfspace_split_volume",
    "materialize",
    "unit_ball_volume",
    "hull_basis",
    "bodies_equal",
    "body_to_dict",
    "body_from_dict",
    "regular_polygon",
]

_DEDUP_TOL = 1e-12
_COPLANAR_TOL = 1e-10


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class VPolytope:
    """Full-dimensional convex hull of a finite vertex list.

    vertices holds only extreme points; facet data (outward normals n with
    <n, x> + off <= 0 inside) is cached at construction for interior tests.
    """

    vertices: np.ndarray  # (m, n)
    facet_normals: np.ndarray  # (F, n)
    facet_offsets: np.ndarray  # (F,)
    facet_indices: Tuple[Tuple[int, ...], ...]  # simplicial facets into vertices

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(frozen=True)
class Ball:
    """Euclidean ball, kept symbolic so reference values stay exact."""

    center: np.ndarray
    radius: float

    @property
    def dim(self) -> int:
        return self.center.shape[0]


@dataclass(frozen=True)
class AffineImage:
    """x -> A x + shift applied to a base body, A invertible."""

    base: "ConvexBody"
    matrix: np.ndarray  # (n, n)
    shift: np.ndarray  # (n,)

    @property
    def dim(self) -> int:
        return self.shift.shape[0]


ConvexBody = Union[VPolytope, Ball, AffineImage]


@dataclass(frozen=True)
class Direction:
    """Unit vector; u and -u define the same hyperplane u^perp but swap the
    labels of the two half-spaces."""

    u: np.ndarray

    def __post_init__(self):
        u = _freeze(self.u)
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("direction must be unit length within 1e-12")
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.u.shape[0]


def direction(v) -> Direction:
    """Normalize v to a Direction."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("zero vector has no direction")
    return Direction(v / nrm)


@dataclass(frozen=True)
class Simplex:
    """n+1 affinely independent points in R^n."""

    vertices: np.ndarray  # (n+1, n)

    def __post_init__(self):
        object.__setattr__(self, "vertices", _freeze(self.vertices))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def volume(self) -> float:
        v = self.vertices
        n = v.shape[1]
        det = np.linalg.det(v[1:] - v[0])
        return abs(det) / math.factorial(n)


def _dedupe_points(points: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(points).max()))
    seen = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= _DEDUP_TOL * scale for q in seen):
            seen.append(p)
    return np.array(seen)


def vpolytope(points) -> VPolytope:
    """Canonicalize a point cloud to its extreme points with facet data.

    Raises DegenerateBody when the hull is not full-dimensional.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a (m, n) array")
    m, n = pts.shape
    if n < 1:
        raise ValueError("dimension must be >= 1")
    pts = _dedupe_points(pts)
    if pts.shape[0] < n + 1:
        raise DegenerateBody("fewer than n+1 distinct vertices")

    if n == 1:
        lo, hi = float(pts.min()), float(pts.max())
        if hi - lo <= _COPLANAR_TOL * max(1.0, abs(lo), abs(hi)):
            raise DegenerateBody("interval of zero length")
        verts = np.array([[lo], [hi]])
        normals = np.array([[-1.0], [1.0]])
        offsets = np.array([lo, -hi])
        return VPolytope(_freeze(verts), _freeze(normals), _freeze(offsets), ((0,), (1,)))

    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateBody(f"degenerate hull: {exc}") from exc

    if n == 2:
        order = hull.vertices  # counter-clockwise in 2-D
        start = int(np.lexsort((pts[order, 1], pts[order, 0]))[0])
        order = np.roll(order, -start)
        verts = pts[order]
    else:
        idx = np.sort(hull.vertices)
        verts = pts[idx]

    # Re-run qhull on the extreme points so facet indices refer to them.
    hull = ConvexHull(verts)
    normals = hull.equations[:, :-1]
    offsets = hull.equations[:, -1]
    facets = tuple(tuple(int(i) for i in f) for f in hull.simplices)
    return VPolytope(_freeze(verts), _freeze(normals), _freeze(offsets), facets)


def ball(center, radius: float) -> Ball:
    center = _freeze(np.atleast_1d(np.asarray(center, dtype=float)))
    if radius <= 0:
        raise ValueError("radius must be positive")
    return Ball(center, float(radius))


def affine_image(base: ConvexBody, matrix, shift) -> AffineImage:
    A = _freeze(np.asarray(matrix, dtype=float))
    s = _freeze(np.asarray(shift, dtype=float))
    if abs(np.linalg.det(A)) <= 1e-12:
        raise NonInvertible("affine map must be invertible")
    return AffineImage(base, A, s)


def dim(K: ConvexBody) -> int:
    return K.dim


def unit_ball_volume(n: int) -> float:
    """kappa_n = pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2.0) / float(gamma(n / 2.0 + 1.0))


def triangulate(K: ConvexBody) -> List[Simplex]:
    """Partition a polytope into simplices (centroid fan over facets).

    Simplex volumes sum to volume(K) up to float rounding.
    """
    if isinstance(K, AffineImage):
        return triangulate(materialize(K))
    if isinstance(K, Ball):
        raise UnsupportedKind("balls are not triangulated; use a polytope approximation")
    v = K.vertices
    n = K.dim
    if n == 1:
        return [Simplex(v)]
    if len(v) == n + 1:
        return [Simplex(v)]
    c = v.mean(axis=0)
    out = []
    for f in K.facet_indices:
        pts = np.vstack([v[list(f)], c])
        s = Simplex(pts)
        if s.volume > 0.0:
            out.append(s)
    if not out:
        raise DegenerateBody("triangulation produced no simplices")
    return out


def volume(K: ConvexBody) -> float:
    if isinstance(K, VPolytope):
        return float(sum(s.volume for s in triangulate(K)))
    if isinstance(K, Ball):
        return unit_ball_volume(K.dim) * K.radius**K.dim
    return abs(float(np.linalg.det(K.matrix))) * volume(K.base)


def barycenter(K: ConvexBody) -> np.ndarray:
    if isinstance(K, VPolytope):
        tot = 0.0
        acc = np.zeros(K.dim)
        for s in triangulate(K):
            w = s.volume
            tot += w
            acc += w * s.vertices.mean(axis=0)
        return acc / tot
    if isinstance(K, Ball):
        return K.center.copy()
    return K.matrix @ barycenter(K.base) + K.shift


def support(K: ConvexBody, y) -> float:
    """Classical support function h_K(y) = sup_{x in K} <x, y>."""
    y = np.asarray(y, dtype=float)
    if isinstance(K, VPolytope):
        return float(np.max(K.vertices @ y))
    if isinstance(K, Ball):
        return float(K.center @ y + K.radius * np.linalg.norm(y))
    return support(K.base, K.matrix.T @ y) + float(K.shift @ y)


def contains(K: ConvexBody, x, tol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=float)
    if isinstance(K, VPolytope):
        scale = max(1.0, float(np.abs(K.vertices).max()))
        return bool(np.all(K.facet_normals @ x + K.facet_offsets <= tol * scale))
    if isinstance(K, Ball):
        return bool(np.linalg.norm(x - K.center) <= K.radius + tol)
    return contains(K.base, np.linalg.solve(K.matrix, x - K.shift), tol)


def strictly_inside(K: ConvexBody, x, rel_margin: float = 1e-12) -> bool:
    """True when x lies in the interior with a relative safety margin."""
    x = np.asarray(x, dtype=float)
    if isinstance(K, VPolytope):
        scale = max(1.0, float(np.abs(K.vertices).max()))
        return bool(np.all(K.facet_normals @ x + K.facet_offsets < -rel_margin * scale))
    if isinstance(K, Ball):
        return bool(np.linalg.norm(x - K.center) < K.radius * (1.0 - rel_margin))
    z = np.linalg.solve(K.matrix, x - K.shift)
    return strictly_inside(K.base, z, rel_margin)


def _flatten_affine(K: ConvexBody) -> Tuple[np.ndarray, np.ndarray, ConvexBody]:
    """Compose nested affine wrappers into a single (A, shift, base)."""
    n = K.dim
    A = np.eye(n)
    s = np.zeros(n)
    while isinstance(K, AffineImage):
        s = s + A @ K.shift
        A = A @ K.matrix
        K = K.base
    return A, s, K


def materialize(K: ConvexBody) -> ConvexBody:
    """Resolve AffineImage wrappers to a concrete VPolytope or Ball."""
    if isinstance(K, (VPolytope, Ball)):
        return K
    base = materialize(K.base)
    if isinstance(base, VPolytope):
        return vpolytope(base.vertices @ K.matrix.T + K.shift)
    # A ball maps to a ball only under a scaled-orthogonal matrix.
    A = K.matrix
    AtA = A.T @ A
    c2 = AtA[0, 0]
    if not np.allclose(AtA, c2 * np.eye(A.shape[0]), atol=1e-12 * max(1.0, c2)):
        raise BallNonOrthogonal(
            "ellipsoid (non-orthogonal image of a ball); approximate it by a polytope first"
        )
    return ball(A @ base.center + K.shift, math.sqrt(c2) * base.radius)


def transform(K: ConvexBody, A, shift=None) -> ConvexBody:
    """Apply x -> A x + shift.  Balls require scaled-orthogonal A."""
    A = np.asarray(A, dtype=float)
    n = K.dim
    if shift is None:
        shift = np.zeros(n)
    shift = np.asarray(shift, dtype=float)
    if abs(np.linalg.det(A)) <= 1e-12:
        raise NonInvertible("transform matrix is singular")
    if isinstance(K, VPolytope):
        return vpolytope(K.vertices @ A.T + shift)
    if isinstance(K, Ball):
        AtA = A.T @ A
        c2 = AtA[0, 0]
        if not np.allclose(AtA, c2 * np.eye(n), atol=1e-12 * max(1.0, c2)):
            raise BallNonOrthogonal("ball transforms exactly only under scaled-orthogonal maps")
        return ball(A @ K.center + shift, math.sqrt(c2) * K.radius)
    return affine_image(K.base, A @ K.matrix, A @ K.shift + shift)


def translate(K: ConvexBody, x) -> ConvexBody:
    """K - x is translate(K, -x); this returns K + x."""
    x = np.asarray(x, dtype=float)
    if isinstance(K, VPolytope):
        return vpolytope(K.vertices + x)
    if isinstance(K, Ball):
        return ball(K.center + x, K.radius)
    return affine_image(K.base, K.matrix, K.shift + x)


def reflect(K: ConvexBody, u: Direction) -> ConvexBody:
    """Mirror image across the hyperplane u^perp (through the origin)."""
    n = K.dim
    H = np.eye(n) - 2.0 * np.outer(u.u, u.u)
    return transform(K, H)


def fiber_extent(K: ConvexBody, u: Direction, x) -> Optional[Tuple[float, float]]:
    """Chord of K along direction u through the point x.

    Returns (g, f) with g = min{t : x + t u in K}, f = max{...}, or None when
    the line misses K (x outside the shadow of K on u^perp).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(K, VPolytope):
        return line_body_extent(K.vertices, x, u.u)
    if isinstance(K, Ball):
        d = x - K.center
        bq = float(d @ u.u)
        cq = float(d @ d) - K.radius**2
        disc = bq * bq - cq
        if disc < 0:
            return None
        root = math.sqrt(disc)
        return (-bq - root, -bq + root)
    # Ellipsoid or affine polytope: pull the line back through the map.
    A, s, base = _flatten_affine(K)
    if isinstance(base, VPolytope):
        return fiber_extent(vpolytope(base.vertices @ A.T + s), u, x)
    Ainv = np.linalg.inv(A)
    p0 = Ainv @ (x - s)
    dvec = Ainv @ u.u
    # Solve |p0 + t dvec - c|^2 = r^2 for the base ball.
    c = base.center
    d = p0 - c
    aq = float(dvec @ dvec)
    bq = float(d @ dvec)
    cq = float(d @ d) - base.radius**2
    disc = bq * bq - aq * cq
    if disc < 0:
        return None
    root = math.sqrt(disc)
    return ((-bq - root) / aq, (-bq + root) / aq)


def hull_basis(u: Direction) -> np.ndarray:
    """Deterministic orthonormal basis (columns) of u^perp."""
    n = u.dim
    M = np.eye(n)
    M[:, 0] = u.u
    q, _ = np.linalg.qr(M)
    # Ensure the first column is +u, then drop it.
    if q[:, 0] @ u.u < 0:
        q = -q
    return q[:, 1:]


def _projected_edges(K: VPolytope, u: Direction, basis: np.ndarray) -> np.ndarray:
    """Unique hull edges projected onto u^perp coordinates, shape (E, 2, n-1)."""
    edges = set()
    for f in K.facet_indices:
        k = len(f)
        for a in range(k):
            for b in range(a + 1, k):
                edges.add((min(f[a], f[b]), max(f[a], f[b])))
    proj = K.vertices @ basis  # (m, n-1)
    return np.array([[proj[a], proj[b]] for a, b in sorted(edges)])


def _segment_crossings(edges: np.ndarray) -> np.ndarray:
    """Pairwise interior intersection points of 2-D segments."""
    out = []
    E = len(edges)
    for i in range(E):
        p, q = edges[i]
        dpq = q - p
        for j in range(i + 1, E):
            r, s = edges[j]
            drs = s - r
            denom = dpq[0] * drs[1] - dpq[1] * drs[0]
            if abs(denom) < 1e-14:
                continue
            rhs = r - p
            t = (rhs[0] * drs[1] - rhs[1] * drs[0]) / denom
            w = (rhs[0] * dpq[1] - rhs[1] * dpq[0]) / denom
            if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= w <= 1 + 1e-12:
                out.append(p + t * dpq)
    return np.array(out) if out else np.zeros((0, 2))


def steiner_symmetral(K: ConvexBody, u: Direction) -> ConvexBody:
    """Steiner symmetral: every chord parallel to u recentered on u^perp.

    Exact for V-polytopes (n <= 3) and balls; volume is preserved and the
    result is symmetric with respect to u^perp.
    """
    if isinstance(K, AffineImage):
        raise UnsupportedKind("materialize affine images (or approximate ellipsoids) first")
    if isinstance(K, Ball):
        c = K.center - (K.center @ u.u) * u.u
        return ball(c, K.radius)

    n = K.dim
    if n == 1:
        half = 0.5 * (K.vertices.max() - K.vertices.min())
        return vpolytope([[-half], [half]])

    basis = hull_basis(u)  # (n, n-1)
    proj = K.vertices @ basis  # vertices in u^perp coordinates
    candidates = [proj]
    if n == 3:
        # The chord-length function can kink where projected upper and lower
        # hull edges cross, not only at projected vertices.
        edges = _projected_edges(K, u, basis)
        candidates.append(_segment_crossings(edges))
    cand = _dedupe_points(np.vstack([c for c in candidates if len(c)]))

    pts = []
    for xi in cand:
        x = basis @ xi
        ext = fiber_extent(K, u, x)
        if ext is None:
            continue
        half = 0.5 * (ext[1] - ext[0])
        pts.append(x + half * u.u)
        pts.append(x - half * u.u)
    return vpolytope(np.array(pts))


def _hull_volume(points: np.ndarray) -> float:
    n = points.shape[1]
    if points.shape[0] < n + 1:
        return 0.0
    if n == 1:
        return float(points.max() - points.min())
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        return 0.0


def _clip_simplex(verts: np.ndarray, u: np.ndarray, scale: float) -> Tuple[float, float]:
    """Volumes of a simplex on the two sides of the hyperplane <x, u> = 0."""
    d = verts @ u
    tol = 1e-13 * max(scale, 1.0)
    if np.all(d >= -tol):
        v = Simplex(verts).volume
        return (v, 0.0) if np.any(d > tol) else (v / 2.0, v / 2.0)
    if np.all(d <= tol):
        return 0.0, Simplex(verts).volume
    crossings = []
    k = len(verts)
    for i in range(k):
        for j in range(i + 1, k):
            di, dj = d[i], d[j]
            if (di > tol and dj < -tol) or (di < -tol and dj > tol):
                t = di / (di - dj)
                crossings.append(verts[i] + t * (verts[j] - verts[i]))
    crossings = np.array(crossings)
    plus_pts = np.vstack([verts[d >= -tol], crossings])
    minus_pts = np.vstack([verts[d <= tol], crossings])
    return _hull_volume(plus_pts), _hull_volume(minus_pts)


def halfspace_split_volume(K: ConvexBody, u: Direction) -> Tuple[float, float]:
    """Volumes of K on the two closed sides of the hyperplane u^perp."""
    if isinstance(K, AffineImage):
        return halfspace_split_volume(materialize(K), u)
    if isinstance(K, Ball):
        n = K.dim
        dhat = float(K.center @ u.u) / K.radius
        vol = volume(K)
        if dhat >= 1.0:
            return vol, 0.0
        if dhat <= -1.0:
            return 0.0, vol
        frac_inner = 0.5 * float(betainc(0.5, (n + 1) / 2.0, dhat * dhat))
        plus = vol * (0.5 + math.copysign(frac_inner, dhat))
        return plus, vol - plus
    scale = float(np.abs(K.vertices).max())
    plus = minus = 0.0
    for s in triangulate(K):
        p, m = _clip_simplex(s.vertices, u.u, scale)
        plus += p
        minus += m
    return plus, minus


def bodies_equal(K1: ConvexBody, K2: ConvexBody, tol: float = 1e-9) -> bool:
    """Hull equality: identical vertex sets up to tolerance (polytopes), or
    matching center/radius (balls)."""
    K1, K2 = materialize(K1), materialize(K2)
    if isinstance(K1, Ball) and isinstance(K2, Ball):
        return (
            np.linalg.norm(K1.center - K2.center) <= tol
            and abs(K1.radius - K2.radius) <= tol
        )
    if not (isinstance(K1, VPolytope) and isinstance(K2, VPolytope)):
        return False
    a, b = K1.vertices, K2.vertices
    if a.shape != b.shape:
        return False
    scale = max(1.0, float(np.abs(a).max()))
    used = np.zeros(len(b), dtype=bool)
    for p in a:
        dist = np.max(np.abs(b - p), axis=1)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] > tol * scale:
            return False
        used[j] = True
    return True


def body_to_dict(K: ConvexBody) -> dict:
    K = materialize(K)
    if isinstance(K, VPolytope):
        return {"kind": "vpolytope", "vertices": K.vertices.tolist()}
    return {"kind": "ball", "center": K.center.tolist(), "radius": K.radius}


def body_from_dict(d: dict) -> ConvexBody:
    kind = d.get("kind")
    if kind == "vpolytope":
        return vpolytope(d["vertices"])
    if kind == "ball":
        return ball(d["center"], d["radius"])
    raise ValueError(f"unknown body kind: {kind!r}")


def regular_polygon(m: int, radius: float = 1.0, center=(0.0, 0.0)) -> VPolytope:
    """Regular m-gon inscribed in the circle of the given radius."""
    ang = 2.0 * math.pi * np.arange(m) / m
    pts = np.stack([np.cos(ang), np.sin(ang)], axis=1) * radius + np.asarray(center)
    return vpolytope(pts)
