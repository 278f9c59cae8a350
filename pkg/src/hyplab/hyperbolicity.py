"""Invariant splitting E^s + E^u, hyperbolicity constants and the C^2 certificate."""

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .errors import DepthInsufficient, NotHyperbolic
from .family import TWO_PI, op_norm, orbit
from .torus import TorusPoint, TorusVector, as_array

ANGLE_FLOOR = 1e-10


def sign_normalize(v):
    v = np.asarray(v, dtype=float)
    lead = v[..., 0]
    lead = np.where(np.abs(lead) > 0, lead, v[..., 1])
    return v * np.where(lead < 0, -1.0, 1.0)[..., None]


def _push(jacobians, seed, forward):
    """Normalized power iteration of a unit seed through a list of Jacobians."""
    n = len(jacobians) + 1
    out = np.empty((n, 2))
    v = np.asarray(seed, dtype=float)
    growth = 0.0
    order = range(n) if forward else range(n - 1, -1, -1)
    for k in order:
        out[k] = v
        if forward and k < n - 1:
            w = jacobians[k] @ v
        elif not forward and k > 0:
            w = np.linalg.solve(jacobians[k - 1], v)
        else:
            break
        norm = math.hypot(*w)
        growth += math.log(norm) if norm > 0 else -math.inf
        v = w / norm
    return out, growth


def _frames_from_orbit(f, first_level, points):
    jac = [f.resolve(first_level + k).jacobian(points[k]) for k in range(len(points) - 1)]
    best = None
    for forward in (True, False):
        a, ga = _push(jac, (1.0, 0.0), forward)
        b, gb = _push(jac, (0.0, 1.0), forward)
        # the (1,0) seed is degenerate when it (almost) lies in the other subspace
        vecs = b if gb > ga + 1.0 else a
        best = (vecs,) if best is None else (best[0], vecs)
    e_u, e_s = best
    return sign_normalize(e_s), sign_normalize(e_u)


@lru_cache(maxsize=4096)
def _linear_frame(f, level, depth):
    pts = np.zeros((2 * depth + 1, 2))
    e_s, e_u = _frames_from_orbit(f, level - depth, pts)
    return e_s[depth], e_u[depth]


def orbit_frames(f, i, p, n_back, n_fwd, depth):
    """Orbit points and unit stable/unstable directions on levels i-n_back .. i+n_fwd.

    Returns ``(points, e_s, e_u)``, each of shape (n_back + n_fwd + 1, 2).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if f.is_linear:
        levels = range(i - n_back, i + n_fwd + 1)
        pts = orbit(f, i, p, n_back, n_fwd)
        frames = [_linear_frame(f, f.canonical_level(j), depth) for j in levels]
        e_s = np.array([fr[0] for fr in frames])
        e_u = np.array([fr[1] for fr in frames])
    else:
        full = orbit(f, i, p, n_back + depth, n_fwd + depth)
        e_s, e_u = _frames_from_orbit(f, i - n_back - depth, full)
        sl = slice(depth, depth + n_back + n_fwd + 1)
        pts, e_s, e_u = full[sl], e_s[sl], e_u[sl]
    cos = np.abs(np.sum(e_s * e_u, axis=1))
    angles = np.arccos(np.clip(cos, 0.0, 1.0))
    if np.min(angles) <= ANGLE_FLOOR:
        raise DepthInsufficient(f"stable and unstable directions not separated (angle {np.min(angles)!r})")
    return pts, e_s, e_u


@dataclass(frozen=True)
class Splitting:
    index: int
    point: TorusPoint
    e_s: TorusVector
    e_u: TorusVector
    angle: float

    @property
    def frame(self):
        """Columns (e_s, e_u)."""
        return np.column_stack([as_array(self.e_s), as_array(self.e_u)])


def splitting_at(f, i, p, depth=30):
    _, e_s, e_u = orbit_frames(f, i, p, 0, 0, depth)
    es, eu = e_s[0], e_u[0]
    angle = math.acos(min(1.0, abs(float(es @ eu))))
    return Splitting(i, TorusPoint.of(as_array(p)), TorusVector(*map(float, es)), TorusVector(*map(float, eu)), angle)


def frame_coords(e_s, e_u, v):
    """Coefficients (a, b) with v = a e_s + b e_u; rows of v may be stacked."""
    B = np.column_stack([e_s, e_u])
    return np.linalg.solve(B, np.asarray(v, dtype=float).T).T


@dataclass(frozen=True)
class HyperbolicityEstimate:
    lambda_: float
    c: float
    angle_inf: float
    window: tuple
    sample_count: int

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["window"] = list(self.window)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["lambda"]), float(d["c"]), float(d["angle_inf"]), tuple(d["window"]), int(d["sample_count"]))


def stretch_profiles(f, i, p, depth):
    """Norms of D F_i^n e_s and D F_i^{-n} e_u for n = 1..depth.

    Computed as products of one-step stretch factors of the invariant lines,
    which avoids the round-off blow-up of pushing a stable vector forward.
    """
    pts, e_s, e_u = orbit_frames(f, i, p, depth, depth, depth)
    s_steps = np.empty(depth)
    u_steps = np.empty(depth)
    for n in range(depth):
        k = depth + n  # level i + n
        s_steps[n] = np.linalg.norm(f.resolve(i + n).jacobian(pts[k]) @ e_s[k])
        kb = depth - n  # level i - n
        J = f.resolve(i - n - 1).jacobian(pts[kb - 1])
        u_steps[n] = np.linalg.norm(np.linalg.solve(J, e_u[kb]))
    angle = float(np.arccos(min(1.0, abs(float(e_s[depth] @ e_u[depth])))))
    return np.cumprod(s_steps), np.cumprod(u_steps), angle


def estimate_constants(f, window, grid=4, depth=30):
    """Fit (lambda, c) on a sample; lambda by log-linear regression of the worst
    stretch over n, then c as the smallest constant valid on the whole sample."""
    if grid < 1 or depth < 2:
        raise ValueError("need grid >= 1 and depth >= 2")
    lo, hi = int(window[0]), int(window[1])
    worst = np.zeros(depth)
    angle_inf = math.inf
    count = 0
    for i in range(lo, hi + 1):
        for a in range(grid):
            for b in range(grid):
                p = TorusPoint((a + 0.5) / grid, (b + 0.5) / grid)
                try:
                    s, u, ang = stretch_profiles(f, i, p, depth)
                except DepthInsufficient as e:
                    raise NotHyperbolic(str(e)) from e
                worst = np.maximum(worst, np.maximum(s, u))
                angle_inf = min(angle_inf, ang)
                count += 1
    n = np.arange(1, depth + 1)
    slope = np.polyfit(n, np.log(worst), 1)[0]
    lam = math.exp(slope)
    if not lam < 1.0 - 1e-6:
        raise NotHyperbolic(f"fitted lambda {lam!r} is not below 1")
    c = float(np.max(worst / lam**n))
    return HyperbolicityEstimate(lam, c, angle_inf, (lo, hi), count)


@dataclass(frozen=True)
class C2Certificate:
    sup_norm: float
    is_member: bool
    df: float = 0.0
    df_inv: float = 0.0
    d2f: float = 0.0
    d2f_inv: float = 0.0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _map_bounds(m):
    A, Ainv = m.A, m.A_inv
    if m.is_linear:
        return op_norm(A), op_norm(Ainv), 0.0, 0.0
    kappa = m.amplitude * TWO_PI
    rank_one = np.outer([1.0, 0.0], m.mode)
    # ||A + t kappa e1 m^T|| is convex in t, so the sup over t in [-1,1] is at an end
    df = max(op_norm(A + kappa * rank_one), op_norm(A - kappa * rank_one))
    df_inv = op_norm(Ainv) / (1.0 - m.kappa * op_norm(Ainv))
    d2f = m.second_derivative_bound()
    return df, df_inv, d2f, df_inv**3 * d2f


def c2_certificate(f):
    bounds = np.array([_map_bounds(m) for m in f.pattern])
    top = bounds.max(axis=0)
    sup = float(top.max())
    return C2Certificate(sup, math.isfinite(sup), *map(float, top))
