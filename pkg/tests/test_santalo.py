import math

import numpy as np
import pytest

from lppolar import bodies as bd
from lppolar import santalo as st
from lppolar import support as sp
from lppolar import verify as vf
from lppolar.corpus import corpus
from lppolar.errors import BracketFailure

E1 = bd.direction([1.0, 0.0])
E2 = bd.direction([0.0, 1.0])


@pytest.fixture(scope="module")
def quad_body():
    return bd.vpolytope([[-1.0, -0.5], [2.0, 0.0], [0.5, 1.5], [-0.8, 0.9]])


# ---------------------------------------------------------------------------
# Santalo point
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p", [0.5, 2.0, math.inf])
def test_santalo_symmetric_square(square, p):
    res = st.santalo_point(square, p)
    assert res.converged
    assert np.linalg.norm(res.point) <= 1e-7


def test_santalo_gl_equivariance(quad_body, rng):
    base = st.santalo_point(quad_body, 1.0)
    for _ in range(3):
        while True:
            A = rng.normal(size=(2, 2))
            if abs(np.linalg.det(A)) > 0.3:
                break
        res = st.santalo_point(bd.transform(quad_body, A), 1.0)
        assert np.abs(res.point - A @ base.point).max() <= 1e-5


def test_santalo_on_symmetry_hyperplane(kite):
    # kite is symmetric w.r.t. e2-perp, so s_p lies on that hyperplane
    for p in (1.0, math.inf):
        res = st.santalo_point(kite, p)
        assert abs(res.point @ E2.u) <= 1e-6
        assert abs(res.point @ E1.u) > 1e-3  # genuinely off-origin sideways


def test_santalo_simplices_fix_barycenter(paper_triangle):
    # all simplices are affine images of each other, so s_p = barycenter
    for p in (0.7, 3.0, math.inf):
        res = st.santalo_point(paper_triangle, p)
        assert np.allclose(res.point, [1 / 3, 4 / 3], atol=2e-7)


def test_santalo_objective_monotone_and_optimal(quad_body, rng):
    res = st.santalo_point(quad_body, 2.0)
    assert res.converged and res.grad_norm <= 1e-7
    assert all(a >= b - 1e-12 for a, b in zip(res.trajectory, res.trajectory[1:]))
    m0 = sp.mahler_volume(quad_body, 2.0, x=res.point)
    for _ in range(5):
        delta = rng.normal(size=2) * 1e-3
        assert sp.mahler_volume(quad_body, 2.0, x=res.point + delta) >= m0 * (1 - 1e-9)


def test_santalo_ball_is_center():
    res = st.santalo_point(bd.ball([0.4, -1.2], 0.7), 1.5)
    assert np.allclose(res.point, [0.4, -1.2], atol=1e-7)


# ---------------------------------------------------------------------------
# separating translation
# ---------------------------------------------------------------------------

def test_separation_symmetric_body_is_untranslated(square):
    res = st.separating_translation(square, 1.0, E2, 0.5)
    assert abs(res.t) <= 1e-4
    assert abs(res.split - 0.5) <= 1e-4


def test_separation_triangle_recentered(paper_triangle):
    res1 = st.santalo_point(paper_triangle, 1.0)
    K = bd.translate(paper_triangle, -res1.point)
    res = st.separating_translation(K, 1.0, E2, 0.5)
    # post-hoc at full accuracy through the public half-space op
    pf = sp.PolarFunctional.at(K, 1.0, x=res.t * E2.u)
    plus, minus = pf.halfspace_volumes(E2)
    assert abs(plus / (plus + minus) - 0.5) <= 1e-4


@pytest.mark.parametrize("lam", [0.3, 0.5])
def test_separation_lambda_targets(quad_body, lam):
    res0 = st.santalo_point(quad_body, 1.0)
    K = bd.translate(quad_body, -res0.point)
    res = st.separating_translation(K, 1.0, E2, lam)
    assert abs(res.split - lam) <= 1e-3 or abs(res.split - (1 - lam)) <= 1e-3
    a, b = res.search.bracket
    assert a < 0.0 < b


def test_separation_endpoint_limits(quad_body):
    res0 = st.santalo_point(quad_body, 1.0)
    K = bd.translate(quad_body, -res0.point)
    ev = sp.LpSupportEvaluator(K, 1.0)
    g, f = bd.fiber_extent(K, E2, np.zeros(2))
    width = f - g
    lows, highs = [], []
    for frac in (1e-2, 1e-3, 1e-4):
        lows.append(st.split_fraction(ev, E2, g + frac * width))
        highs.append(st.split_fraction(ev, E2, f - frac * width))
    assert all(a > b for a, b in zip(lows, lows[1:]))  # decreasing toward 0
    assert all(a < b for a, b in zip(highs, highs[1:]))  # increasing toward 1
    assert lows[-1] < 0.02 and highs[-1] > 0.98


def test_separation_requires_chord(paper_triangle):
    # triangle sits above the x-axis: the horizontal line through 0 misses it
    with pytest.raises(BracketFailure):
        st.separating_translation(paper_triangle, 1.0, E1, 0.5)


def test_finiteness_frontier(quad_body):
    res0 = st.santalo_point(quad_body, 1.0)
    K = bd.translate(quad_body, -res0.point)
    g, f = bd.fiber_extent(K, E2, np.zeros(2))
    inside = 0.5 * (g + f)
    assert math.isfinite(sp.mahler_volume(K, 1.0, x=inside * E2.u))
    outside = f + 0.1 * (f - g)
    assert math.isinf(sp.mahler_volume(K, 1.0, x=outside * E2.u))


# ---------------------------------------------------------------------------
# volume lemma
# ---------------------------------------------------------------------------

def test_volume_lemma_symmetric_square_equality(square):
    rep = vf.verify_volume_lemma(square, 1.0, E2)
    assert rep.verdict in ("pass", "inconclusive")
    assert rep.details["lam"] == pytest.approx(0.5, abs=1e-9)
    # sigma_u K = K: the bound holds with equality
    assert abs(rep.slack) <= 1e-5 * rep.rhs


def test_volume_lemma_random_hull(quad_body):
    res = st.santalo_point(quad_body, 1.0)
    K = bd.translate(quad_body, -res.point)
    u = bd.direction([0.3, 1.0])
    rep = vf.verify_volume_lemma(K, 1.0, u)
    assert rep.verdict == "pass"
    assert rep.slack >= -1e-5


# ---------------------------------------------------------------------------
# slice inclusion and h_p inequality
# ---------------------------------------------------------------------------

def test_slice_inclusion_square(square):
    rep = vf.verify_slice_inclusion(square, 1.0, 0.5, 1.0, samples=100, seed=5)
    assert rep.verdict == "pass"
    assert rep.details["pointwise_slack"] >= -1e-6


def test_slice_inclusion_symmetric_equal_heights(square):
    # t = s on a symmetric body: r = t and both sides coincide
    rep = vf.verify_slice_inclusion(square, 2.0, 0.7, 0.7, samples=20, seed=1)
    assert rep.verdict == "pass"
    assert abs(rep.lhs - rep.rhs) <= 1e-6


def test_slice_norm_degenerate_sample(square):
    pf = sp.PolarFunctional.at(square, 2.0)
    t = 0.6
    xi = 0.31
    lhs = pf.norm(np.array([xi, t]))
    rhs = 0.5 * pf.norm(np.array([xi, t])) + 0.5 * pf.norm(np.array([xi, -t]))
    assert lhs == pytest.approx(rhs, abs=1e-8)  # symmetric body, equal heights


def test_hp_inequality_alpha_equals_beta(square):
    rep = vf.verify_hp_inequality(square, 2.0, 0.2, -0.4, 1.0, 2.0, 0.9, 0.9)
    assert rep.details["gamma"] == pytest.approx(0.9, rel=1e-12)
    assert rep.verdict == "pass"


def test_hp_inequality_symmetric_body(square):
    rep = vf.verify_hp_inequality(square, 1.0, 0.1, 0.3, 0.8, 0.8, 1.1, 0.7)
    assert rep.verdict == "pass"


def test_hp_inequality_random_body(quad_body):
    res = st.santalo_point(quad_body, 2.0)
    K = bd.translate(quad_body, -res.point)
    rep = vf.verify_hp_inequality(K, 2.0, 0.15, -0.2, 1.0, 2.0, 0.7, 1.3)
    assert rep.verdict == "pass"


# ---------------------------------------------------------------------------
# generalized Ball inequality
# ---------------------------------------------------------------------------

def test_ball_corollary_exponential_equality():
    f = lambda r: np.exp(-r)
    for lam in (0.2, 0.5, 0.8):
        rep = vf.verify_ball_corollary(f, f, f, lam, 2)
        assert abs(rep.slack) <= 1e-9


def test_ball_corollary_square_profiles(square):
    F, G, H, tau = vf.hp_profiles(square, 1.0, 0.3, -0.2, 0.5, 1.0)
    rep = vf.verify_ball_corollary(F, G, H, tau, 2)
    assert rep.verdict == "pass"
    assert rep.slack >= -1e-7
    # lam = 1/2 (Ball's original normalization) via t = s
    F, G, H, tau = vf.hp_profiles(square, 1.0, 0.3, -0.2, 0.8, 0.8)
    assert tau == pytest.approx(0.5)
    rep = vf.verify_ball_corollary(F, G, H, tau, 2)
    assert rep.verdict == "pass"


def test_sinh_log_convexity():
    grid = np.linspace(0.05, 6.0, 200)
    for x in (0.3, 1.0, 4.0):
        assert vf.sinh_log_convexity_slack(x, grid) >= -1e-9


# ---------------------------------------------------------------------------
# pipeline and main theorem
# ---------------------------------------------------------------------------

def test_pipeline_symmetric_body(square):
    res = st.steiner_pipeline(square, 1.0)
    assert len(res.trace) == 3
    for a, b in zip(res.trace, res.trace[1:]):
        assert b >= a * (1 - 1e-5)
    final = res.final_body
    assert bd.bodies_equal(bd.reflect(final, E1), final, tol=1e-6)
    assert bd.bodies_equal(bd.reflect(final, E2), final, tol=1e-6)


def test_pipeline_triangle(paper_triangle):
    res = st.steiner_pipeline(paper_triangle, 1.0)
    for a, b in zip(res.trace, res.trace[1:]):
        assert b >= a * (1 - 1e-5)
    assert res.trace[-1] <= st.ball_reference(2, 1.0) * (1 + 1e-3)
    final = res.final_body
    assert bd.bodies_equal(bd.reflect(final, E1), final, tol=1e-6)
    assert bd.bodies_equal(bd.reflect(final, E2), final, tol=1e-6)


def test_main_theorem_ball_equality():
    for p in (1.0, math.inf):
        rep = vf.verify_main_theorem(bd.ball([0.2, 0.4], 1.3), p)
        assert rep.verdict in ("pass", "inconclusive")
        assert abs(rep.lhs - rep.rhs) <= 1e-6 * rep.rhs


def test_main_theorem_square(square):
    rep = vf.verify_main_theorem(square, math.inf)
    assert rep.verdict == "pass"
    assert rep.lhs == pytest.approx(16.0, rel=1e-5)
    assert rep.rhs == pytest.approx(2 * math.pi**2, rel=1e-12)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, math.inf])
def test_main_theorem_random_hulls(p):
    for K in corpus(11, count=2):
        rep = vf.verify_main_theorem(K, p)
        assert rep.verdict == "pass"


# ---------------------------------------------------------------------------
# ball reference and Bergman bound
# ---------------------------------------------------------------------------

def test_ball_reference_closed_form():
    assert st.ball_reference(2, math.inf) == pytest.approx(2 * math.pi**2, rel=1e-14)
    assert st.ball_reference(1, math.inf) == pytest.approx(4.0, rel=1e-14)
    assert st.ball_reference(3, math.inf) == pytest.approx(
        6 * (4 * math.pi / 3) ** 2, rel=1e-14
    )


def test_ball_reference_n1_generic_cross_check():
    seg = bd.vpolytope([[-1.0], [1.0]])
    assert sp.mahler_volume(seg, math.inf) == pytest.approx(
        st.ball_reference(1, math.inf), rel=1e-6
    )
    assert sp.mahler_volume(seg, 1.0) == pytest.approx(
        st.ball_reference(1, 1.0), rel=1e-6
    )


def test_ball_reference_monotone_and_matches_generic():
    vals = [st.ball_reference(2, p) for p in (1.0, 2.0, 4.0, math.inf)]
    assert all(a >= b - 1e-10 for a, b in zip(vals, vals[1:]))
    disk = bd.ball([0.0, 0.0], 1.0)
    for p, v in zip((1.0, 2.0, 4.0), vals):
        assert sp.mahler_volume(disk, p) == pytest.approx(v, rel=1e-5)


def test_bergman_bound_formula_and_scaling(square):
    s1, bound = st.bergman_bound(square)
    assert np.linalg.norm(s1) <= 1e-7  # symmetric body
    assert bound == pytest.approx(
        st.ball_reference(2, 1.0) / ((4 * math.pi) ** 2 * 16.0), rel=1e-12
    )
    s1b, bound2 = st.bergman_bound(bd.transform(square, 2.0 * np.eye(2)))
    assert bound2 == pytest.approx(bound / 2 ** (2 * 2), rel=1e-9)


def test_bergman_bound_interval():
    seg = bd.vpolytope([[-1.0], [1.0]])
    s1, bound = st.bergman_bound(seg)
    assert abs(s1[0]) <= 1e-7
    assert bound == pytest.approx(st.ball_reference(1, 1.0) / (4 * math.pi * 4.0), rel=1e-9)
