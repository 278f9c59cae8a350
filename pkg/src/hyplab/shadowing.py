"""Pseudo-orbits, the bracket-recursion shadowing solver, an exact linear oracle
and expansiveness bounds."""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bracket import BracketParams, _manifold, bracket, bracket_solve, frame_at
from .errors import (
    BetaExceeded,
    BracketFailed,
    InvalidGap,
    JumpTooLarge,
    NoIntersection,
    NotLinear,
    ParamsInfeasible,
    TooFarApart,
    ValidationError,
)
from .family import apply, apply_inverse, compose, step_lift
from .hyperbolicity import _linear_frame, frame_coords
from .manifolds import Flavor
from .torus import TorusPoint, as_array, distance, distances, exp, wrap

PROBES = 200


@dataclass(frozen=True)
class PseudoOrbit:
    start_index: int
    points: tuple
    alpha: float
    jumps: tuple = ()

    def __len__(self):
        return len(self.points)

    def array(self):
        return np.array([as_array(p) for p in self.points])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "x", "y"])
        for k, p in enumerate(self.points):
            w.writerow([self.start_index + k, repr(p.x), repr(p.y)])
        return buf.getvalue()


def validate_pseudo_orbit(f, start, pts, alpha):
    if len(pts) == 0:
        raise ValidationError("pseudo-orbit must be nonempty")
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    pts = tuple(TorusPoint.of(as_array(p)) for p in pts)
    jumps = []
    for k in range(len(pts) - 1):
        d = distance(apply(f, start + k, pts[k]), pts[k + 1])
        if not d < alpha:
            raise JumpTooLarge(k, d)
        jumps.append(d)
    return PseudoOrbit(int(start), pts, float(alpha), tuple(jumps))


def read_pseudo_orbit_csv(text):
    """Parse ``index,x,y`` rows with consecutive indices; returns (start, points)."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"index", "x", "y"}:
        raise ValidationError("pseudo-orbit CSV needs header index,x,y and at least one row")
    idx = [int(r["index"]) for r in rows]
    if idx != list(range(idx[0], idx[0] + len(idx))):
        raise ValidationError("pseudo-orbit indices must be consecutive")
    return idx[0], [(float(r["x"]), float(r["y"])) for r in rows]


def noisy_orbit(f, start, p, n, noise, rng):
    """True orbit of length n+1 with every point after the first moved by < noise.

    Each point is the image of the previous noisy point plus a displacement drawn
    uniformly from the disc of radius ``noise``.
    """
    pts = [TorusPoint.of(as_array(p))]
    for k in range(n):
        r = noise * math.sqrt(rng.random()) * (1 - 1e-12)
        a = 2 * math.pi * rng.random()
        pts.append(exp(apply(f, start + k, pts[-1]), (r * math.cos(a), r * math.sin(a))))
    return pts


@dataclass(frozen=True)
class ShadowParams:
    beta: float
    epsilon1: float
    eta: float
    delta: float
    alpha: float
    lambda_: float
    bracket: BracketParams

    def __post_init__(self):
        lam, eps = self.lambda_, self.bracket.epsilon
        ok = (
            0 < lam < 1
            and min(self.beta, self.epsilon1, self.eta, self.delta, self.alpha) > 0
            and self.epsilon1 < (1 - lam) * min(eps, self.beta)
            and math.isclose(self.eta, self.epsilon1 / (1 - lam), rel_tol=1e-12)
            and self.delta < self.beta - self.eta
        )
        if not ok:
            raise ParamsInfeasible("shadowing parameter chain violated")

    def to_dict(self):
        return {
            "beta": self.beta,
            "epsilon1": self.epsilon1,
            "eta": self.eta,
            "delta": self.delta,
            "alpha": self.alpha,
            "lambda": self.lambda_,
            "bracket": {"epsilon": self.bracket.epsilon, "delta": self.bracket.delta, "alpha": self.bracket.alpha},
        }


def _stable_point(f, i, w, s, bp):
    """Point of W^s(w) with arc parameter s."""
    if f.is_linear:
        return exp(w, s * frame_at(f, i, w)[0])
    return _manifold(f, i, w, Flavor.STABLE, bp.epsilon, 30).point(s)


def _continuity_holds(f, i, alpha, eps1, lam, bp, rng, probes):
    """[z, W^s(w, lam eps1)] inside W^s(z, eps1) for random z, w with d(z, w) < alpha."""
    for _ in range(probes):
        z = TorusPoint.of(rng.random(2))
        r, a = alpha * rng.random(), 2 * math.pi * rng.random()
        w = exp(z, (r * math.cos(a), r * math.sin(a)))
        w2 = _stable_point(f, i, w, lam * eps1 * (2 * rng.random() - 1), bp)
        try:
            _, t, _ = bracket_solve(f, i, z, w2, bp)
        except (NoIntersection, TooFarApart):
            return False
        if abs(t) > eps1:
            return False
    return True


def choose_params(f, beta, est, bracket_params, probes=PROBES, seed=0, max_halvings=30):
    if not beta > 0:
        raise ValidationError("beta must be positive")
    lam, eps = est.lambda_, bracket_params.epsilon
    eps1 = 0.5 * (1 - lam) * min(eps, beta)
    eta = eps1 / (1 - lam)
    delta = 0.5 * (beta - eta)
    # the first bracket of each step joins points up to alpha + lam * eta apart
    if not lam * eta < bracket_params.delta:
        raise ParamsInfeasible(f"beta = {beta!r} is too large for bracket delta {bracket_params.delta!r}")
    i = int(f.window[0])
    rng = np.random.default_rng(seed)
    alpha = delta
    for _ in range(max_halvings):
        if alpha + lam * eta < bracket_params.delta and _continuity_holds(f, i, alpha, eps1, lam, bracket_params, rng, probes):
            return ShadowParams(beta, eps1, eta, delta, alpha, lam, bracket_params)
        alpha /= 2
    raise ParamsInfeasible("no admissible alpha found")


@dataclass(frozen=True)
class ShadowResult:
    shadow_point: TorusPoint
    max_error: float
    per_step_error: tuple
    start_index: int = 0
    orbit: np.ndarray = field(default=None, repr=False, compare=False)

    def point_at(self, level):
        return TorusPoint.of(self.orbit[level - self.start_index])

    def to_dict(self):
        return {
            "shadow_point": [self.shadow_point.x, self.shadow_point.y],
            "start_index": self.start_index,
            "max_error": self.max_error,
            "per_step_error": list(self.per_step_error),
            "orbit": self.orbit.tolist() if self.orbit is not None else None,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _result(po, orbit):
    err = distances(orbit, po.array())
    return ShadowResult(TorusPoint.of(orbit[0]), float(err.max()), tuple(map(float, err)), po.start_index, orbit)


def shadow(f, po, params):
    """Bracket recursion y_k = [x_k, f(y_{k-1})], then pull y_n back to the start level.

    The pull-back re-projects each preimage onto W^u(y_k), which it lies on
    exactly; this removes round-off that would otherwise grow like the inverse
    stable rate.
    """
    if po.alpha > params.alpha:
        raise ValidationError(f"pseudo-orbit alpha {po.alpha!r} exceeds admissible {params.alpha!r}")
    bp, s0, n = params.bracket, po.start_index, len(po) - 1
    ys = [po.points[0]]
    for k in range(1, n + 1):
        fy = apply(f, s0 + k - 1, ys[-1])
        try:
            ys.append(bracket(f, s0 + k, po.points[k], fy, bp))
        except (NoIntersection, TooFarApart) as e:
            raise BracketFailed(k, str(e)) from e
    z = ys[-1]
    orbit = np.empty((n + 1, 2))
    orbit[n] = as_array(z)
    for k in range(n, 0, -1):
        w = apply_inverse(f, s0 + k - 1, z)
        try:
            z = bracket(f, s0 + k - 1, w, ys[k - 1], bp)
        except (NoIntersection, TooFarApart) as e:
            raise BracketFailed(k - 1, "pull-back: " + str(e)) from e
        orbit[k - 1] = as_array(z)
    res = _result(po, orbit)
    if not res.max_error < params.beta:
        raise BetaExceeded(res.max_error)
    return res


def shadow_reindexed(f, po, params):
    """Shadow through the family shifted so the window starts at level 0."""
    g = f.shifted(po.start_index)
    moved = PseudoOrbit(0, po.points, po.alpha, po.jumps)
    res = shadow(g, moved, params)
    return ShadowResult(res.shadow_point, res.max_error, res.per_step_error, po.start_index, res.orbit)


def shadow_oracle_linear(f, po):
    """Exact shadow for linear windows.

    With defects d_k = f(x_k) - x_{k+1} and corrections c_k = y_k - x_k on the
    cover, c_{k+1} = A_k c_k + d_k.  In splitting coordinates the stable part runs
    forward from 0 and the unstable part runs backward from 0.
    """
    s0, n = po.start_index, len(po) - 1
    maps = [f.resolve(s0 + k) for k in range(n)]
    if not all(m.is_linear for m in maps):
        raise NotLinear("oracle needs linear maps on the whole window")
    X = po.array()
    frames = [_linear_frame(f, f.canonical_level(s0 + k), 30) for k in range(n + 1)]
    sig = np.zeros(n + 1)
    tau = np.zeros(n + 1)
    mu = np.empty(n)
    nu = np.empty(n)
    a = np.empty(n)
    b = np.empty(n)
    for k, m in enumerate(maps):
        es, eu = frames[k]
        es1, eu1 = frames[k + 1]
        mu[k] = frame_coords(es1, eu1, m.A @ es)[0]
        nu[k] = frame_coords(es1, eu1, m.A @ eu)[1]
        fx = m.forward_lift(X[k])
        d = wrap(fx - X[k + 1])
        a[k], b[k] = frame_coords(es1, eu1, d)
    for k in range(n):
        sig[k + 1] = mu[k] * sig[k] + a[k]
    for k in range(n - 1, -1, -1):
        tau[k] = (tau[k + 1] - b[k]) / nu[k]
    corr = np.array([sig[k] * frames[k][0] + tau[k] * frames[k][1] for k in range(n + 1)])
    orbit = np.mod(X + corr, 1.0)
    orbit[orbit >= 1.0 - 1e-15] = 0.0
    return _result(po, orbit)


@dataclass(frozen=True)
class ExpansivenessBound:
    r: float
    eta: float
    zeta: float
    N: int
    bound: float


def expansiveness_bound(r, eta, zeta, N):
    gap = 1.0 / eta - zeta
    if not gap > 0:
        raise InvalidGap(f"1/eta - zeta = {gap!r} must be positive")
    return ExpansivenessBound(r, eta, zeta, N, 2.0 * math.sqrt(2.0) * r * gap ** (-N))


def default_expansion_rates(lam):
    """Heuristic (eta, zeta) with 1/eta = (1 - 1e-3)/lam and zeta = lam."""
    return lam / (1 - 1e-3), lam


def expansiveness_witness(f, p, q, delta, n_max, i=0):
    """Smallest |n| <= n_max (order 0, 1, -1, 2, -2, ...) with d(F^n p, F^n q) >= delta."""
    if distance(p, q) == 0:
        raise ValidationError("p and q must differ")
    for n in [0] + [s * k for k in range(1, n_max + 1) for s in (1, -1)]:
        if distance(compose(f, i, n, p), compose(f, i, n, q)) >= delta:
            return n
    return None


def uniqueness_check(f, po, res, probes, beta, seed=0):
    """Random y' farther than 2 beta from the shadow point must break beta-shadowing."""
    rng = np.random.default_rng(seed)
    x = po.array()
    s0, n = po.start_index, len(po) - 1
    y0 = as_array(res.shadow_point)
    for _ in range(probes):
        while True:
            r = 2 * beta + (0.25 - 2 * beta) * rng.random()
            a = 2 * math.pi * rng.random()
            y = exp(res.shadow_point, (r * math.cos(a), r * math.sin(a)))
            if distance(y, y0) > 2 * beta:
                break
        rejected = False
        pt = as_array(y)
        for k in range(n + 1):
            if distance(pt, x[k]) >= beta:
                rejected = True
                break
            if k < n:
                pt = np.mod(step_lift(f, s0 + k, pt), 1.0)
        if not rejected:
            return False
    return True
