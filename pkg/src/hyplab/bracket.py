"""Canonical coordinates: [p, q] = W^s(p, eps) meet W^u(q, eps).

Convention: the first argument contributes the stable manifold.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import CalibrationFailed, NoIntersection, TooFarApart, ValidationError
from .hyperbolicity import frame_coords, orbit_frames
from .manifolds import Flavor, local_manifold
from .torus import INJECTIVITY_RADIUS, TorusPoint, as_array, distance, exp, log

PROJECTION_TOL = 1e-11
PROJECTION_MAX_ITER = 100
SPLIT_DEPTH = 30


@dataclass(frozen=True)
class BracketParams:
    epsilon: float
    delta: float
    alpha: float = 0.25

    def __post_init__(self):
        if not (0 < self.delta < self.epsilon / 4 < INJECTIVITY_RADIUS / 16):
            raise ValidationError("need 0 < delta < epsilon/4 < 1/32")
        if self.alpha <= 0:
            raise ValidationError("alpha must be positive")


@dataclass(frozen=True)
class Cone:
    """Cone around the stable or unstable axis in the splitting frame at some point."""

    e_s: tuple
    e_u: tuple
    axis: Flavor
    opening: float

    def contains(self, v, slack=1e-12):
        a, b = frame_coords(np.asarray(self.e_s), np.asarray(self.e_u), as_array(v))
        axial, transverse = (a, b) if self.axis is Flavor.STABLE else (b, a)
        return bool(abs(transverse) <= self.opening * abs(axial) + slack)


def frame_at(f, i, p, depth=SPLIT_DEPTH):
    _, e_s, e_u = orbit_frames(f, i, p, 0, 0, depth)
    return e_s[0], e_u[0]


def cone_at(f, i, p, axis, opening):
    e_s, e_u = frame_at(f, i, p)
    return Cone(tuple(e_s), tuple(e_u), Flavor(axis), opening)


@lru_cache(maxsize=2048)
def _manifold(f, i, p, flavor, epsilon, depth):
    return local_manifold(f, i, p, flavor, epsilon, depth)


def bracket_solve(f, i, p, q, params, depth=SPLIT_DEPTH):
    """Bracket point plus its stable parameter t at p and unstable parameter u at q."""
    p, q = TorusPoint.of(as_array(p)), TorusPoint.of(as_array(q))
    d = distance(p, q)
    if not d < params.delta:
        raise TooFarApart(f"d(p, q) = {d!r} is not below delta = {params.delta!r}")
    v = as_array(log(p, q))
    eps = params.epsilon
    if f.is_linear:
        es_p, _ = frame_at(f, i, p, depth)
        _, eu_q = frame_at(f, i, q, depth)
        M = np.column_stack([es_p, -eu_q])
        if abs(np.linalg.det(M)) < 1e-14:
            raise NoIntersection("stable and unstable directions are parallel")
        # p + t e_s(p) = q + u e_u(q)
        t, u = np.linalg.solve(M, v)
        if abs(t) > eps or abs(u) > eps:
            raise NoIntersection("intersection leaves the epsilon-chart")
        return exp(p, t * es_p), float(t), float(u)
    ms = _manifold(f, i, p, Flavor.STABLE, eps, depth)
    mu = _manifold(f, i, q, Flavor.UNSTABLE, eps, depth)
    x_p = as_array(p)
    x_q = x_p + v
    s = u = 0.0
    for _ in range(PROJECTION_MAX_ITER):
        Q = x_q + u * mu.axis + mu.g(u) * mu.transverse
        s_new = frame_coords(ms.axis, ms.transverse, Q - x_p)[0]
        if abs(s_new) > eps:
            raise NoIntersection("iteration left the epsilon-chart")
        P = x_p + s_new * ms.axis + ms.g(s_new) * ms.transverse
        u_new = frame_coords(mu.axis, mu.transverse, P - x_q)[0]
        if abs(u_new) > eps:
            raise NoIntersection("iteration left the epsilon-chart")
        done = abs(u_new - u) < PROJECTION_TOL and abs(s_new - s) < PROJECTION_TOL
        s, u = s_new, u_new
        if done:
            z = TorusPoint.of(P)
            if ms.transverse_distance(z) > 1e-9 or mu.transverse_distance(z) > 1e-9:
                raise NoIntersection("bracket point is not on both manifolds")
            return z, float(s), float(u)
    raise NoIntersection(f"alternate projection did not converge in {PROJECTION_MAX_ITER} rounds")


def bracket(f, i, p, q, params, depth=SPLIT_DEPTH):
    return bracket_solve(f, i, p, q, params, depth)[0]


def in_cones(f, i, p, q, z, alpha):
    """Chart of z at p lies in the stable cone; chart of z at q lies in the unstable cone."""
    return cone_at(f, i, p, Flavor.STABLE, alpha).contains(log(p, z)) and cone_at(
        f, i, q, Flavor.UNSTABLE, alpha
    ).contains(log(q, z))


def calibrate_delta(f, params_in, trials=100, seed=0, i=0):
    """Halve delta until every random pair closer than delta brackets inside the eps-box."""
    if trials < 100:
        raise ValidationError("calibration needs at least 100 trials")
    rng = np.random.default_rng(seed)
    delta = params_in.delta
    while delta >= 1e-6:
        params = replace(params_in, delta=delta)
        if _all_succeed(f, params, trials, rng, i):
            return params
        delta /= 2
    raise CalibrationFailed("delta underflowed 1e-6")


def _all_succeed(f, params, trials, rng, i):
    for _ in range(trials):
        p = TorusPoint.of(rng.random(2))
        r = params.delta * rng.random()
        ang = 2 * math.pi * rng.random()
        q = exp(p, (r * math.cos(ang), r * math.sin(ang)))
        if not distance(p, q) < params.delta:
            continue
        try:
            _, t, u = bracket_solve(f, i, p, q, params)
        except (NoIntersection, TooFarApart):
            return False
        if abs(t) > params.epsilon or abs(u) > params.epsilon:
            return False
    return True
