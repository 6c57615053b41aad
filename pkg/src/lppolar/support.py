"""Lp-support functions, the polar near-norm, polar volumes, and moments.

For a body K and finite p, h is (1/p) log of the exponential average of
p<x, y> over K.  Polytopes evaluate it exactly through per-simplex divided
differences in log space; balls through a Bessel profile in |y|; affine
images delegate to their base through the adjoint.  The polar quantities are
radial integrals of e^{-h} assembled over sphere rules:

    norm(y)   = ((1/(n-1)!) int_0^inf r^{n-1} e^{-h(r y)} dr)^(-1/n)
    |K^polar| = (1/n) int_{S^{n-1}} norm(theta)^{-n} dtheta
    V(h)      = int_{R^n} e^{-h} = n! |K^polar|

Primary volumes use an offset angular grid, the V(h) moment route uses an
unshifted one, so the two act as independent discretizations of the same
quantity and cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, ive, logsumexp

from . import bodies as bd
from .errors import NonIntegrable
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    SphereRule,
    _dd_exp_shifted,
    gauss_arc_nodes,
    radial_moments,
    sphere_nodes,
    uniform_circle_nodes,
)

__all__ = [
    "PExponent",
    "P_INF",
    "LpSupportEvaluator",
    "PolarFunctional",
    "h_p",
    "polar_norm",
    "polar_volume",
    "polar_halfspace_volumes",
    "mahler_volume",
    "exp_moment",
    "lp_polar_transform_check",
    "polar_slice_length",
]

_FACT = [math.factorial(i) for i in range(64)]


@dataclass(frozen=True)
class PExponent:
    """p in (0, inf]; math.inf selects the classical support function."""

    value: float

    def __post_init__(self):
        if not (self.value > 0):
            raise ValueError("p must be positive (math.inf allowed)")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @classmethod
    def coerce(cls, p) -> "PExponent":
        if isinstance(p, PExponent):
            return p
        if isinstance(p, str):
            return cls(math.inf) if p in ("inf", "infinity") else cls(float(p))
        return cls(float(p))

    def label(self) -> str:
        return "inf" if not self.is_finite else repr(self.value)


P_INF = PExponent(math.inf)


class LpSupportEvaluator:
    """Cached h evaluations for one (body, p) pair.

    Immutable after construction apart from internal sphere-grid memoization;
    safe to share across threads.
    """

    def __init__(self, body: bd.ConvexBody, p, spec: QuadratureSpec = DEFAULT_SPEC):
        self.body = body
        self.p = PExponent.coerce(p)
        self.spec = spec
        self.n = body.dim
        self.vol = bd.volume(body)
        self._grids: dict = {}

        inner = body
        self._affine_chain = None
        if isinstance(body, bd.AffineImage):
            A, s, inner = bd._flatten_affine(body)
            self._affine_chain = (A, s)
        if isinstance(inner, bd.VPolytope):
            simplices = bd.triangulate(inner)
            self._sv = np.stack([s.vertices for s in simplices])  # (S, k, n)
            dets = np.abs(np.linalg.det(self._sv[:, 1:] - self._sv[:, :1]))
            self._logcoef = np.log(dets)  # integral over simplex = det * DD
            self._log_inner_vol = math.log(dets.sum() / _FACT[self.n])
            self._kind = "polytope"
        else:
            self._ball = inner
            self._nu = (self.n - 1) / 2.0
            self._kind = "ball"
        self._inner = inner

    # -- support function (p = inf) ------------------------------------
    def support_batch(self, Y: np.ndarray) -> np.ndarray:
        return _support_batch(self.body, np.atleast_2d(Y))

    # -- h for finite and infinite p ------------------------------------
    def h_batch(self, Y) -> np.ndarray:
        """h_{p,K} at each row of Y."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if not self.p.is_finite:
            return self.support_batch(Y)
        if self._affine_chain is not None:
            A, s = self._affine_chain
            return self._h_inner(Y @ A) + Y @ s
        return self._h_inner(Y)

    def h(self, y) -> float:
        return float(self.h_batch(np.asarray(y, dtype=float)[None, :])[0])

    def _h_inner(self, Y: np.ndarray) -> np.ndarray:
        p = self.p.value
        if self._kind == "polytope":
            nodes = np.moveaxis(self._sv @ (p * Y).T, -1, 1)  # (S, M, k)
            dd, shift = _dd_exp_shifted(nodes)
            logterms = self._logcoef[:, None] + shift + np.log(dd)
            return (logsumexp(logterms, axis=0) - self._log_inner_vol) / p
        c, R = self._ball.center, self._ball.radius
        norms = np.linalg.norm(Y, axis=1)
        return Y @ c + _ball_log_profile(p * R * norms, self._nu) / p

    # -- ray data for radial integration --------------------------------
    def ray_phi(self, rays: np.ndarray, lin: np.ndarray):
        """Callable phi(lane_ids, r) = h(r * rays[lane]) - r * lin[lane].

        rays may be any vectors (not necessarily unit); affine wrappers are
        folded into the rays once so the hot path hits the base body.
        """
        rays = np.asarray(rays, dtype=float)
        lin = np.asarray(lin, dtype=float)
        if self._affine_chain is not None:
            A, s = self._affine_chain
            lin = lin - rays @ s
            rays = rays @ A
        p = self.p.value
        if self._kind == "polytope":
            dots = np.einsum("skn,ln->skl", self._sv, rays)  # (S, k, L)
            logcoef = self._logcoef[:, None]
            log_vol = self._log_inner_vol

            def phi(lane_ids, r):
                nodes = np.moveaxis(p * r * dots[:, :, lane_ids], -1, 1)  # (S,B,k)
                dd, shift = _dd_exp_shifted(nodes)
                h = (logsumexp(logcoef + shift + np.log(dd), axis=0) - log_vol) / p
                return h - r * lin[lane_ids]

            return phi

        c, R = self._ball.center, self._ball.radius
        cdot = rays @ c
        rnorm = np.linalg.norm(rays, axis=1)
        nu = self._nu

        def phi(lane_ids, r):
            kappa = p * R * rnorm[lane_ids] * r
            h = cdot[lane_ids] * r + _ball_log_profile(kappa, nu) / p
            return h - r * lin[lane_ids]

        return phi

    # -- cached sphere grids --------------------------------------------
    def grid(self, variant: str, u: Optional[np.ndarray] = None, m: Optional[int] = None):
        """Sphere rule plus cached per-node support values.

        variant "primary"/"cross" are the two full-sphere discretizations;
        "hemi" builds split quadrature aligned with direction u.
        """
        key = (variant, None if u is None else (tuple(np.round(u, 14)), m))
        hit = self._grids.get(key)
        if hit is not None:
            return hit
        n = self.n
        spec = self.spec
        m_full = spec.sphere_nodes if self.p.is_finite else spec.sphere_nodes_inf
        if variant in ("primary", "cross"):
            offset = 0.5 if variant == "primary" else 0.0
            if n == 2:
                rule = uniform_circle_nodes(m_full, offset)
            elif n == 1:
                rule = sphere_nodes(1, spec)
            else:
                mm = m_full if variant == "primary" else int(m_full * 1.37) + 1
                rule = sphere_nodes(n, spec.with_(sphere_nodes=mm))
        elif variant == "hemi":
            rule = _hemisphere_rule(n, np.asarray(u), m or m_full, spec)
        else:
            raise ValueError(variant)
        sup = _support_batch(self.body, rule.nodes)
        self._grids[key] = (rule, sup)
        return rule, sup


def _support_batch(K: bd.ConvexBody, Y: np.ndarray) -> np.ndarray:
    if isinstance(K, bd.VPolytope):
        return (Y @ K.vertices.T).max(axis=1)
    if isinstance(K, bd.Ball):
        return Y @ K.center + K.radius * np.linalg.norm(Y, axis=1)
    return _support_batch(K.base, Y @ K.matrix) + Y @ K.shift


def _ball_log_profile(kappa: np.ndarray, nu: float) -> np.ndarray:
    """log of the normalized profile int e^{kappa x} w / int w with weight
    w = (1-x^2)^nu on [-1, 1]; equals log(sinh k / k) for nu = 0."""
    kappa = np.asarray(kappa, dtype=float)
    out = np.empty_like(kappa)
    small = kappa < 1e-4
    out[small] = kappa[small] ** 2 / (2.0 * (2.0 * nu + 3.0))
    k = kappa[~small]
    mu = nu + 0.5
    out[~small] = (
        float(gammaln(nu + 1.5))
        + mu * (math.log(2.0) - np.log(k))
        + np.log(ive(mu, k))
        + k
    )
    return out


def _hemisphere_rule(n: int, u: np.ndarray, m: int, spec: QuadratureSpec) -> SphereRule:
    """Nodes ordered so the first half lies in <theta, u> > 0 (n=2 uses
    Gauss-Legendre arcs aligned with u; other n split a full rule by sign)."""
    if n == 2:
        alpha = math.atan2(u[1], u[0])
        plus = gauss_arc_nodes(alpha, math.pi / 2.0, m // 2)
        minus = gauss_arc_nodes(alpha + math.pi, math.pi / 2.0, m // 2)
        return SphereRule(
            np.vstack([plus.nodes, minus.nodes]),
            np.concatenate([plus.weights, minus.weights]),
            f"gauss_hemi({m})",
            False,
        )
    rule = sphere_nodes(n, spec.with_(sphere_nodes=m))
    s = rule.nodes @ u
    order = np.argsort(-s, kind="stable")
    return SphereRule(rule.nodes[order], rule.weights[order], rule.rule + "+split", rule.stochastic)


@dataclass(frozen=True)
class PolarFunctional:
    """The polar-side quantities of K - x through phi = h_{p, K-x}.

    The translation enters h exactly (h_{p,K-x}(y) = h_{p,K}(y) - <x, y>), so
    one evaluator serves every translate of its body.
    """

    evaluator: LpSupportEvaluator
    x: np.ndarray

    @classmethod
    def at(cls, K, p, x=None, spec: QuadratureSpec = DEFAULT_SPEC) -> "PolarFunctional":
        ev = LpSupportEvaluator(K, p, spec)
        return cls(ev, np.zeros(ev.n) if x is None else np.asarray(x, dtype=float))

    @property
    def n(self) -> int:
        return self.evaluator.n

    def h(self, y) -> float:
        return self.evaluator.h(y) - float(np.asarray(y) @ self.x)

    # -- near-norm -------------------------------------------------------
    def norm(self, y) -> float:
        """Near-norm of the Lp-polar of K - x at y."""
        y = np.asarray(y, dtype=float)
        ev = self.evaluator
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0
        if not ev.p.is_finite:
            val = bd.support(ev.body, y) - float(y @ self.x)
            if val <= 0.0:
                raise NonIntegrable("support <= 0: polar radial integral diverges")
            return val
        c_inf = np.array([bd.support(ev.body, y) - float(y @ self.x)])
        if c_inf[0] <= 0.0:
            raise NonIntegrable("polar radial integral diverges along y")
        phi = ev.ray_phi(y[None, :], np.array([float(y @ self.x)]))
        res = radial_moments(
            phi, 1, [self.n], ev.spec, c_inf=c_inf, r_scale=(self.n + 6.0) / c_inf
        )
        integral = float(res.values[0, 0]) / _FACT[self.n - 1]
        return integral ** (-1.0 / self.n)

    # -- lane integrals shared by volume/moment assemblies ----------------
    def _lane_integrals(self, variant: str, q_list: Sequence[int],
                        u: Optional[np.ndarray] = None, m: Optional[int] = None):
        ev = self.evaluator
        rule, sup = ev.grid(variant, u=u, m=m)
        c_inf = sup - rule.nodes @ self.x
        if not ev.p.is_finite:
            vals = np.empty((len(rule.weights), len(q_list)))
            with np.errstate(divide="ignore", over="ignore"):
                for j, q in enumerate(q_list):
                    vals[:, j] = np.where(c_inf > 0.0, _FACT[q - 1] / c_inf**q, np.inf)
            errs = np.zeros_like(vals)
            return rule, vals, errs, c_inf
        phi = ev.ray_phi(rule.nodes, rule.nodes @ self.x)
        with np.errstate(divide="ignore"):
            r0 = np.where(c_inf > 0, (max(q_list) + 6.0) / np.maximum(c_inf, 1e-300), 1.0)
        res = radial_moments(phi, len(rule.weights), q_list, ev.spec, c_inf=c_inf, r_scale=r0)
        return rule, res.values, res.errors, c_inf

    def volume(self, with_error: bool = False):
        """|(K - x)^{o,p}| by the radial-norm route (primary discretization)."""
        rule, vals, errs, c_inf = self._lane_integrals("primary", [self.n])
        if np.any(c_inf <= 0.0):
            raise NonIntegrable("0 not in the interior of K - x")
        w = rule.weights
        total = float(w @ vals[:, 0]) / _FACT[self.n]
        if not with_error:
            return total
        err = float(w @ errs[:, 0]) / _FACT[self.n]
        # Angular estimate: compare against the half grid (Richardson-style).
        half = float(w[::2] @ vals[::2, 0]) * 2.0 / _FACT[self.n]
        err += abs(total - half) / 3.0
        return total, err

    def halfspace_volumes(self, u: bd.Direction, m: Optional[int] = None,
                          with_error: bool = False):
        """Volumes of (K-x)^{o,p} on the two sides of u^perp.

        A side whose lanes diverge is reported as math.inf (the overflow
        flag); this happens exactly when 0 leaves the interior of K - x.
        """
        ev = self.evaluator
        mm = m or (ev.spec.sphere_nodes if ev.p.is_finite else ev.spec.sphere_nodes_inf)
        rule, vals, errs, c_inf = self._lane_integrals("hemi", [self.n], u=u.u, m=mm)
        sgn = rule.nodes @ u.u
        out = []
        err_out = []
        for side in (1.0, -1.0):
            mask = sgn * side > 1e-12
            half_mask = np.abs(sgn) <= 1e-12
            if np.any(~np.isfinite(vals[mask, 0])):
                out.append(math.inf)
                err_out.append(math.inf)
                continue
            v = float(rule.weights[mask] @ vals[mask, 0])
            v += 0.5 * float(rule.weights[half_mask] @ vals[half_mask, 0])
            out.append(v / _FACT[self.n])
            err_out.append(float(rule.weights[mask] @ errs[mask, 0]) / _FACT[self.n])
        if with_error:
            # angular error: re-evaluate on a thinner grid
            coarse = self.halfspace_volumes(u, m=max(8, mm // 2))
            err = [
                e + (abs(a - b) / 3.0 if math.isfinite(a) and math.isfinite(b) else 0.0)
                for e, a, b in zip(err_out, out, coarse)
            ]
            return (out[0], out[1]), (err[0], err[1])
        return out[0], out[1]

    def exp_moment(self, with_cov: bool = False):
        """(V, b) of phi = h_{p, K-x}: V = int e^{-phi}, b its barycenter.

        Uses the unshifted ("cross") angular grid so it is an independent
        discretization from volume().  with_cov adds the covariance matrix of
        the probability density e^{-phi}/V (the Hessian of x -> log V).
        """
        n = self.n
        qs = [n, n + 1, n + 2] if with_cov else [n, n + 1]
        rule, vals, errs, c_inf = self._lane_integrals("cross", qs)
        if np.any(c_inf <= 0.0):
            raise NonIntegrable("0 not in the interior of K - x")
        w = rule.weights
        V = float(w @ vals[:, 0])
        first = (w[:, None] * rule.nodes).T @ vals[:, 1]  # (n,)
        b = first / V
        if not with_cov:
            return V, b
        second = np.einsum("l,ln,lm,l->nm", w, rule.nodes, rule.nodes, vals[:, 2])
        cov = second / V - np.outer(b, b)
        err_b = float(w @ errs[:, 1]) / V
        return V, b, cov, err_b


# ---------------------------------------------------------------------------
# Operation-style wrappers
# ---------------------------------------------------------------------------

def h_p(K: bd.ConvexBody, p, y, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Lp-support function of K at y (p = math.inf gives the classical one)."""
    return LpSupportEvaluator(K, p, spec).h(y)


def polar_norm(K, p, y, x=None, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return PolarFunctional.at(K, p, x, spec).norm(y)


def polar_volume(K, p, x=None, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return PolarFunctional.at(K, p, x, spec).volume()


def polar_halfspace_volumes(K, p, u: bd.Direction, x=None, spec=DEFAULT_SPEC):
    return PolarFunctional.at(K, p, x, spec).halfspace_volumes(u)


def exp_moment(K, p, x=None, spec: QuadratureSpec = DEFAULT_SPEC):
    return PolarFunctional.at(K, p, x, spec).exp_moment()


def mahler_volume(K, p, x=None, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """M_p(K - x) = n! |K| |(K-x)^{o,p}|; math.inf when 0 is not interior.

    Infinity is returned as an explicit value (never reached by overflow):
    the finiteness of the polar volume is decided geometrically first.
    """
    n = K.dim
    x = np.zeros(n) if x is None else np.asarray(x, dtype=float)
    if not bd.strictly_inside(K, x, rel_margin=1e-13):
        return math.inf
    pf = PolarFunctional.at(K, p, x, spec)
    return _FACT[n] * bd.volume(K) * pf.volume()


def lp_polar_transform_check(K, A, p, y, spec: QuadratureSpec = DEFAULT_SPEC):
    """Returns (lhs, rhs) = (norm of y in (AK)^{o,p}, norm of A^T y in K^{o,p});
    the polar transforms by the inverse adjoint, so these must agree."""
    A = np.asarray(A, dtype=float)
    lhs = PolarFunctional.at(bd.transform(K, A), p, spec=spec).norm(y)
    rhs = PolarFunctional.at(K, p, spec=spec).norm(A.T @ np.asarray(y, dtype=float))
    return lhs, rhs


def polar_slice_length(pf: PolarFunctional, height: float) -> float:
    """Length of the 1-D slice {xi : norm((xi, height)) <= 1} (bodies in R^2)."""
    if pf.n != 2:
        raise ValueError("slice length is implemented for n = 2")

    def g(xi: float) -> float:
        return pf.norm(np.array([xi, height])) - 1.0

    # The norm is convex in xi, so widen the window until both endpoints are
    # safely outside the slice, then scan for the sublevel interval.
    lo, hi = -1.0, 1.0
    for _ in range(60):
        if g(lo) > 1.0 and g(hi) > 1.0:
            break
        lo *= 2.0
        hi *= 2.0
    grid = np.linspace(lo, hi, 129)
    vals = np.array([g(x) for x in grid])
    i = int(np.argmin(vals))
    if vals[i] > 0.0:
        return 0.0
    from scipy.optimize import brentq

    left = brentq(g, lo, grid[i], xtol=1e-12)
    right = brentq(g, grid[i], hi, xtol=1e-12)
    return right - left
