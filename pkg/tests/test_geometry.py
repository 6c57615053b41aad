import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from lppolar import bodies as bd
from lppolar.errors import (
    BallNonOrthogonal,
    DegenerateBody,
    NonInvertible,
    UnsupportedKind,
)

E1 = bd.direction([1.0, 0.0])
E2 = bd.direction([0.0, 1.0])


def shoelace(pts):
    pts = np.asarray(pts, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def random_hull_nd(rng, n, n_points):
    while True:
        pts = rng.normal(size=(n_points, n))
        try:
            return bd.vpolytope(pts)
        except DegenerateBody:
            continue


# ---------------------------------------------------------------------------
# construction and canonicalization
# ---------------------------------------------------------------------------

def test_canonicalization_drops_interior_and_duplicate_points():
    K = bd.vpolytope([[-1, -1], [1, -1], [1, 1], [-1, 1], [0, 0], [1, 1], [0.5, 0.2]])
    assert len(K.vertices) == 4


def test_degenerate_bodies_rejected():
    with pytest.raises(DegenerateBody):
        bd.vpolytope([[0, 0], [1, 1], [2, 2]])  # collinear
    with pytest.raises(DegenerateBody):
        bd.vpolytope([[0, 0], [1, 0]])  # too few points
    with pytest.raises(ValueError):
        bd.ball([0, 0], 0.0)


def test_affine_image_requires_invertible_matrix(square):
    with pytest.raises(NonInvertible):
        bd.affine_image(square, [[1, 0], [2, 0]], [0, 0])


def test_direction_normalization():
    u = bd.direction([3.0, 4.0])
    assert np.allclose(u.u, [0.6, 0.8])
    with pytest.raises(ValueError):
        bd.Direction(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        bd.direction([0.0, 0.0])


def test_direction_sign_swaps_halfspace_labels(paper_triangle):
    plus, minus = bd.halfspace_split_volume(paper_triangle, E2)
    minus2, plus2 = bd.halfspace_split_volume(
        paper_triangle, bd.direction([0.0, -1.0])
    )
    assert plus == pytest.approx(plus2)
    assert minus == pytest.approx(minus2)


# ---------------------------------------------------------------------------
# volume / barycenter / triangulate
# ---------------------------------------------------------------------------

def test_volume_square(square):
    assert bd.volume(square) == pytest.approx(4.0, rel=1e-12)


def test_volume_triangle_matches_shoelace(paper_triangle):
    expected = shoelace(paper_triangle.vertices)
    assert expected == pytest.approx(1.5)
    assert bd.volume(paper_triangle) == pytest.approx(expected, rel=1e-12)


def test_volume_unit_disk(unit_disk):
    assert bd.volume(unit_disk) == pytest.approx(math.pi, rel=1e-14)


def test_volume_affine_image(square):
    A = np.array([[2.0, 1.0], [0.0, 1.0]])
    K = bd.affine_image(square, A, [5.0, -1.0])
    assert bd.volume(K) == pytest.approx(abs(np.linalg.det(A)) * 4.0, rel=1e-12)


def test_barycenter_square(square):
    assert np.allclose(bd.barycenter(square), [0.0, 0.0], atol=1e-14)


def test_barycenter_unit_simplex():
    K = bd.vpolytope([[0, 0], [1, 0], [0, 1]])
    assert np.allclose(bd.barycenter(K), [1 / 3, 1 / 3], atol=1e-12)


def test_barycenter_triangle_is_vertex_average(paper_triangle):
    assert np.allclose(bd.barycenter(paper_triangle), [1 / 3, 4 / 3], atol=1e-12)


def test_triangulate_simplex_is_identity(paper_triangle):
    pieces = bd.triangulate(paper_triangle)
    assert len(pieces) == 1
    assert pieces[0].volume == pytest.approx(1.5, rel=1e-12)


def test_triangulate_square(square):
    pieces = bd.triangulate(square)
    assert len(pieces) in (2, 4)
    assert sum(s.volume for s in pieces) == pytest.approx(4.0, rel=1e-12)


def test_triangulate_3d_hull_matches_qhull_volume(rng):
    K = random_hull_nd(rng, 3, 10)
    oracle = ConvexHull(K.vertices).volume
    total = sum(s.volume for s in bd.triangulate(K))
    assert total == pytest.approx(oracle, rel=1e-10)


# ---------------------------------------------------------------------------
# fiber extent
# ---------------------------------------------------------------------------

def test_fiber_extent_square(square):
    assert bd.fiber_extent(square, E2, [0.5, 0.0]) == pytest.approx((-1.0, 1.0))


def test_fiber_extent_paper_triangle(paper_triangle):
    # chord over x = 0 runs from the base y=1 to the apex y=2
    g, f = bd.fiber_extent(paper_triangle, E2, [0.0, 0.0])
    assert (g, f) == pytest.approx((1.0, 2.0), abs=1e-9)


def test_fiber_extent_ball(unit_disk):
    g, f = bd.fiber_extent(unit_disk, E1, [0.0, 0.6])
    assert (g, f) == pytest.approx((-0.8, 0.8), abs=1e-12)


def test_fiber_extent_outside_shadow_is_empty(paper_triangle):
    assert bd.fiber_extent(paper_triangle, E2, [5.0, 0.0]) is None


def test_fiber_extent_vertex_consistency(rng):
    for n, m in ((2, 8), (3, 9)):
        K = random_hull_nd(rng, n, m)
        u = bd.direction(rng.normal(size=n))
        for v in K.vertices:
            proj = v - (v @ u.u) * u.u
            g, f = bd.fiber_extent(K, u, proj)
            assert g - 1e-9 <= v @ u.u <= f + 1e-9


# ---------------------------------------------------------------------------
# Steiner symmetrization
# ---------------------------------------------------------------------------

def test_steiner_paper_triangle(paper_triangle):
    sym = bd.steiner_symmetral(paper_triangle, E2)
    expected = bd.vpolytope([[-1, 0], [0, 0.5], [2, 0], [0, -0.5]])
    assert bd.bodies_equal(sym, expected, tol=1e-12)


def test_steiner_fixed_point_for_symmetric_body(square):
    assert bd.bodies_equal(bd.steiner_symmetral(square, E2), square, tol=1e-12)


def test_steiner_ignores_translation_along_u(square):
    shifted = bd.translate(square, [0.0, 5.0])
    assert bd.bodies_equal(bd.steiner_symmetral(shifted, E2), square, tol=1e-12)


def test_steiner_of_ball_recenters(unit_disk):
    moved = bd.ball([0.7, 1.3], 1.0)
    sym = bd.steiner_symmetral(moved, E2)
    assert isinstance(sym, bd.Ball)
    assert np.allclose(sym.center, [0.7, 0.0])


def test_steiner_affine_image_unsupported(square):
    K = bd.affine_image(square, np.eye(2), [0, 0])
    with pytest.raises(UnsupportedKind):
        bd.steiner_symmetral(K, E2)


def test_steiner_3d_skew_tetrahedron_volume():
    # upper edge along x, lower edge along y: the chord-length function kinks
    # at the projected edge crossing, not at any projected vertex
    K = bd.vpolytope([[1, 0, 1], [-1, 0, 1], [0, 1, -1], [0, -1, -1]])
    sym = bd.steiner_symmetral(K, bd.direction([0, 0, 1]))
    assert bd.volume(sym) == pytest.approx(bd.volume(K), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.sampled_from([2, 3]))
def test_steiner_preserves_volume_and_symmetry(seed, n):
    rng = np.random.default_rng(seed)
    K = random_hull_nd(rng, n, 6 + n)
    u = bd.direction(rng.normal(size=n))
    sym = bd.steiner_symmetral(K, u)
    assert bd.volume(sym) == pytest.approx(bd.volume(K), rel=1e-9)
    assert bd.bodies_equal(bd.reflect(sym, u), sym, tol=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_steiner_translation_laws(seed):
    rng = np.random.default_rng(seed)
    K = random_hull_nd(rng, 2, 8)
    u = bd.direction(rng.normal(size=2))
    x = rng.normal(size=2)
    x_perp = x - (x @ u.u) * u.u
    lhs = bd.steiner_symmetral(bd.translate(K, -x_perp), u)
    rhs = bd.translate(bd.steiner_symmetral(K, u), -x_perp)
    assert bd.bodies_equal(lhs, rhs, tol=1e-9)
    t = rng.normal() * 3.0
    assert bd.bodies_equal(
        bd.steiner_symmetral(bd.translate(K, -t * u.u), u),
        bd.steiner_symmetral(K, u),
        tol=1e-9,
    )


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.sampled_from([2, 3]))
def test_steiner_orthogonal_conjugation(seed, n):
    rng = np.random.default_rng(seed)
    K = random_hull_nd(rng, n, 6 + n)
    u = bd.direction(rng.normal(size=n))
    A, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lhs = bd.steiner_symmetral(K, u)
    Au = bd.direction(A @ u.u)
    rhs = bd.transform(bd.steiner_symmetral(bd.transform(K, A), Au), A.T)
    assert bd.bodies_equal(lhs, rhs, tol=1e-8)


def test_steiner_symmetry_propagation(kite):
    # kite is symmetric w.r.t. e2-perp; symmetrize along e1 (orthogonal to e2)
    sym = bd.steiner_symmetral(kite, E1)
    assert bd.bodies_equal(bd.reflect(sym, E2), sym, tol=1e-9)


# ---------------------------------------------------------------------------
# transform
# ---------------------------------------------------------------------------

def test_transform_identity_shift(square):
    K = bd.transform(square, np.eye(2), [1.0, 0.0])
    expected = bd.vpolytope([[0, -1], [2, -1], [2, 1], [0, 1]])
    assert bd.bodies_equal(K, expected, tol=1e-12)


def test_transform_rotation_fixes_square(square):
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert bd.bodies_equal(bd.transform(square, R), square, tol=1e-12)


def test_transform_scaling_volume(square):
    K = bd.transform(square, np.diag([2.0, 1.0]))
    assert bd.volume(K) == pytest.approx(8.0, rel=1e-12)


def test_transform_singular_raises(square):
    with pytest.raises(NonInvertible):
        bd.transform(square, np.zeros((2, 2)))


def test_transform_ball_requires_scaled_orthogonal(unit_disk):
    R = 2.0 * np.array([[0.6, -0.8], [0.8, 0.6]])
    K = bd.transform(unit_disk, R, [1.0, 2.0])
    assert isinstance(K, bd.Ball)
    assert K.radius == pytest.approx(2.0)
    with pytest.raises(BallNonOrthogonal):
        bd.transform(unit_disk, np.diag([2.0, 1.0]))


# ---------------------------------------------------------------------------
# halfspace splits
# ---------------------------------------------------------------------------

def test_halfspace_split_square(square):
    assert bd.halfspace_split_volume(square, E2) == pytest.approx((2.0, 2.0))


def test_halfspace_split_triangle_above_axis(paper_triangle):
    plus, minus = bd.halfspace_split_volume(paper_triangle, E2)
    assert plus == pytest.approx(1.5, rel=1e-12)
    assert minus == pytest.approx(0.0, abs=1e-12)


def test_halfspace_split_shifted_simplex_vs_rejection_oracle(rng):
    K = bd.vpolytope([[0, -0.5], [1, -0.5], [0, 0.5]])
    plus, minus = bd.halfspace_split_volume(K, E2)
    assert plus + minus == pytest.approx(bd.volume(K), rel=1e-10)
    # rejection sampling in the bounding box, membership via cached facets
    N = 400_000
    pts = rng.uniform([0, -0.5], [1, 0.5], size=(N, 2))
    inside = np.all(pts @ K.facet_normals.T + K.facet_offsets <= 1e-12, axis=1)
    frac_plus = np.mean(inside & (pts[:, 1] >= 0))
    est_plus = frac_plus * 1.0  # box area = 1
    se = math.sqrt(frac_plus * (1 - frac_plus) / N)
    assert abs(est_plus - plus) < max(3 * se, 1e-3)


def test_halfspace_split_ball_caps():
    K = bd.ball([0.0, 0.25], 1.0)
    plus, minus = bd.halfspace_split_volume(K, E2)
    # circular segment below the chord at distance 0.25 from the center
    a = 0.25
    minus_exact = math.acos(a) - a * math.sqrt(1 - a * a)
    assert minus == pytest.approx(minus_exact, rel=1e-12)
    assert plus + minus == pytest.approx(math.pi, rel=1e-12)
    K3 = bd.ball([0.0, 0.0, 0.0], 2.0)
    p3, m3 = bd.halfspace_split_volume(K3, bd.direction([0, 0, 1.0]))
    assert p3 == pytest.approx(m3) == pytest.approx(0.5 * bd.volume(K3), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_halfspace_split_sums_to_volume(seed):
    rng = np.random.default_rng(seed)
    K = random_hull_nd(rng, 2, 9)
    u = bd.direction(rng.normal(size=2))
    plus, minus = bd.halfspace_split_volume(K, u)
    assert plus + minus == pytest.approx(bd.volume(K), rel=1e-10)


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

def test_body_json_roundtrip(square, unit_disk):
    for K in (square, unit_disk):
        K2 = bd.body_from_dict(bd.body_to_dict(K))
        assert bd.bodies_equal(K, K2, tol=0.0)
    with pytest.raises(ValueError):
        bd.body_from_dict({"kind": "mystery"})
