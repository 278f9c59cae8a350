"""Local stable/unstable manifolds as Lipschitz graphs, decay rates and the
orbit-proximity classifier."""

import csv
import enum
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EpsilonTooLarge, NoConvergence, NotOnManifold, ValidationError
from .family import compose, orbit, step_inverse_lift, step_lift
from .hyperbolicity import c2_certificate, estimate_constants, frame_coords, orbit_frames
from .torus import TorusPoint, as_array, distance, distances, wrap

GRID_POINTS = 65
GRAPH_TOL = 1e-10


class Flavor(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@lru_cache(maxsize=64)
def family_constants(f):
    """(lambda, c) from a small sample, used for configuration defaults."""
    est = estimate_constants(f, f.window, grid=2, depth=12)
    return est.lambda_, est.c


def default_alpha(f):
    lam, _ = family_constants(f)
    return 0.25 * (1.0 / lam - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class LocalManifold:
    """Graph over the arc parameter s in [-epsilon, epsilon].

    A point with parameter s is ``base + s * axis + graph(s) * transverse`` where
    (axis, transverse) is (e_u, e_s) for unstable manifolds and (e_s, e_u) for
    stable ones.
    """

    index: int
    base: TorusPoint
    flavor: Flavor
    epsilon: float
    s: np.ndarray
    graph: np.ndarray
    axis: np.ndarray
    transverse: np.ndarray
    alpha: float

    @property
    def lipschitz(self):
        return float(np.max(np.abs(np.diff(self.graph) / np.diff(self.s))))

    def g(self, s):
        return np.interp(s, self.s, self.graph)

    def lift_points(self, s):
        """Lifts (near the base) of the manifold points with parameters s."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return as_array(self.base) + np.outer(s, self.axis) + np.outer(self.g(s), self.transverse)

    def point(self, s):
        return TorusPoint.of(self.lift_points([s])[0])

    def coords(self, q):
        """(s, t) chart coordinates of q in the frame at the base."""
        v = wrap(np.atleast_2d(as_array(q)) - as_array(self.base))
        st = frame_coords(self.axis, self.transverse, v)
        return st[..., 0], st[..., 1]

    def transverse_distance(self, q):
        s, t = self.coords(q)
        out = np.abs(t - self.g(s))
        out = np.where(np.abs(s) <= self.epsilon * (1 + 1e-12), out, np.inf)
        return out if out.size > 1 else float(out[0])

    def contains(self, q, tol=1e-8):
        return bool(np.all(self.transverse_distance(q) <= tol))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "transverse"])
        for s, t in zip(self.s, self.graph):
            w.writerow([repr(float(s)), repr(float(t))])
        return buf.getvalue()


def _transform(m_step, forward, x0, axis0, trans0, x1, axis1, trans1, grid, g, eps):
    """Image of the graph g (frame at x0) re-expressed as a graph in the frame at x1."""
    pts = x0 + np.outer(grid, axis0) + np.outer(g, trans0)
    if forward:
        img = m_step.forward_lift(pts) - m_step.forward_lift(x0)
    else:
        img = m_step.inverse_lift(pts) - m_step.inverse_lift(x0)
    # anchor the image orbit point onto x1's lift
    st = frame_coords(axis1, trans1, img)
    s_new, t_new = st[:, 0], st[:, 1]
    order = np.argsort(s_new)
    s_new, t_new = s_new[order], t_new[order]
    if s_new[0] > -eps or s_new[-1] < eps:
        raise EpsilonTooLarge("graph image does not cover the chart; epsilon too large or weak expansion")
    out = np.interp(grid, s_new, t_new)
    if np.max(np.abs(out)) > eps:
        raise EpsilonTooLarge("graph left the epsilon-chart")
    return out


def local_manifold(f, i, p, flavor, epsilon, depth=30, alpha=None):
    flavor = Flavor(flavor)
    if not 0 < epsilon < 0.125:
        raise ValidationError("epsilon must lie in (0, 1/8)")
    alpha = default_alpha(f) if alpha is None else alpha
    grid = np.linspace(-epsilon, epsilon, GRID_POINTS)
    unstable = flavor is Flavor.UNSTABLE
    if unstable:
        pts, e_s, e_u = orbit_frames(f, i, p, depth, 0, depth)
        axis, trans = e_u, e_s
    else:
        pts, e_s, e_u = orbit_frames(f, i, p, 0, depth, depth)
        axis, trans = e_s, e_u
    home = depth if unstable else 0

    def make(g):
        m = LocalManifold(i, TorusPoint.of(as_array(p)), flavor, float(epsilon), grid, g, axis[home], trans[home], alpha)
        if m.lipschitz > alpha:
            raise EpsilonTooLarge(f"graph Lipschitz constant {m.lipschitz!r} exceeds alpha {alpha!r}")
        return m

    if f.is_linear:
        return make(np.zeros(GRID_POINTS))

    prev = None
    for K in range(1, depth + 1):
        g = np.zeros(GRID_POINTS)
        if unstable:
            for j in range(depth - K, depth):
                m_step = f.resolve(i - depth + j)
                g = _transform(m_step, True, pts[j], axis[j], trans[j], pts[j + 1], axis[j + 1], trans[j + 1], grid, g, epsilon)
        else:
            for j in range(K, 0, -1):
                m_step = f.resolve(i + j - 1)
                g = _transform(m_step, False, pts[j], axis[j], trans[j], pts[j - 1], axis[j - 1], trans[j - 1], grid, g, epsilon)
        if prev is not None and np.max(np.abs(g - prev)) < GRAPH_TOL:
            return make(g)
        prev = g
    raise NoConvergence(f"graph transform did not converge in {depth} iterations")


@dataclass(frozen=True)
class ContractionRow:
    n: int
    measured: float
    ratio: float
    bound: float
    violated: bool


def contraction_check(f, m, q, n_max, K=None, zeta=None):
    """Compare d(F^{+-n} q, F^{+-n} p) with K zeta^n d(q, p) along the manifold m.

    q carries the graph's sampling error, which the opposite direction amplifies;
    past roughly log(d / err) / (2 log(1/zeta)) steps a flagged row measures that
    error rather than a contraction failure.  Rows allow for the floating-point
    resolution of F^n, about eps * sup||Df||^n.
    """
    if not m.contains(q, 1e-8):
        raise NotOnManifold("q is not on the manifold within 1e-8")
    lam, c = family_constants(f)
    zeta = lam if zeta is None else zeta
    K = c * (1.0 + m.alpha) if K is None else K
    sign = 1 if m.flavor is Flavor.STABLE else -1
    d0 = distance(m.base, q)
    lip = c2_certificate(f).sup_norm
    rows = []
    for n in range(n_max + 1):
        d = distance(compose(f, m.index, sign * n, m.base), compose(f, m.index, sign * n, q))
        bound = K * zeta**n * d0
        slack = 4 * np.finfo(float).eps * lip**n
        rows.append(ContractionRow(n, d, d / d0 if d0 > 0 else 0.0, bound, d > bound * (1 + 1e-9) + slack))
    return rows


@dataclass(frozen=True)
class RateEstimate:
    theta: float
    delta: float
    horizon: int


def rates(f, i, p, q, horizon):
    """Finite-horizon surrogates of the forward/backward exponential rates."""
    fp, fq = orbit(f, i, p, horizon, horizon), orbit(f, i, q, horizon, horizon)
    d = distances(fp, fq)
    ns = np.arange(max(1, horizon // 2), horizon + 1)
    with np.errstate(divide="ignore"):
        theta = float(np.max(np.log(d[horizon + ns]) / ns))
        delta = float(np.max(np.log(d[horizon - ns]) / ns))
    return RateEstimate(theta, delta, horizon)


class PairRelation(str, enum.Enum):
    STABLE = "stable_related"
    UNSTABLE = "unstable_related"
    NEITHER = "neither"
    BOTH = "both"


def classify_pair(f, i, p, q, beta, horizon, epsilon=None):
    if epsilon is not None and not beta < epsilon / 2:
        raise ValidationError("beta must be below epsilon / 2")
    fp, fq = orbit(f, i, p, horizon, horizon), orbit(f, i, q, horizon, horizon)
    d = distances(fp, fq)
    fwd = bool(np.all(d[horizon:] < beta))
    bwd = bool(np.all(d[: horizon + 1] < beta))
    if fwd and bwd:
        return PairRelation.BOTH
    if fwd:
        return PairRelation.STABLE
    if bwd:
        return PairRelation.UNSTABLE
    return PairRelation.NEITHER
