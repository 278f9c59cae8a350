"""Dense sets, symbolic coding, rectangles, refinement into Markov partitions,
the Markov-condition audit and transition matrices.

Partitions are supported for linear families, where the splitting is constant on
each level and rectangles are parallelograms in the (e_s, e_u) frame.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon, box
from shapely.ops import unary_union

from .errors import BudgetExceeded, NotLinear, RefinementExplosion, SymbolMismatch, ValidationError
from .family import CAT, apply, apply_inverse, orbit
from .hyperbolicity import _linear_frame, c2_certificate, frame_coords
from .shadowing import shadow, validate_pseudo_orbit
from .torus import TorusPoint, as_array, distance, exp, wrap

FIBER_POINTS = 33
MARKOV_TOL = 1e-7
BOUNDARY_MARGIN = 1e-6
AREA_EPS = 1e-9
MAX_SOLVES = 4000
SPLIT_DEPTH = 30


def _require_linear(f):
    if not f.is_linear:
        raise NotLinear("partitions are built for linear families only")


# dense sets


@dataclass(frozen=True)
class DenseSet:
    """Hexagonal lattice on the torus; member k sits in row k // nx, column k % nx.

    Rows are offset by half a column on odd rows.  The lattice is stretched
    slightly so that nx columns and an even number ny of rows close up on the
    torus; stretching only shrinks the spacing.
    """

    gamma: float
    nx: int
    ny: int
    offset: tuple = (0.0, 0.0)

    def __len__(self):
        return self.nx * self.ny

    def coords(self, k):
        k = np.asarray(k)
        row, col = np.divmod(k, self.nx)
        x = self.offset[0] + (col + 0.5 * (row % 2)) / self.nx
        y = self.offset[1] + row / self.ny
        return np.mod(np.stack([x, y], axis=-1), 1.0)

    def point(self, k):
        return TorusPoint.of(self.coords(int(k)))

    @property
    def points(self):
        return [TorusPoint.of(c) for c in self.coords(np.arange(len(self)))]

    def nearest(self, x):
        """Index of the nearest member for each row of x (shape (..., 2))."""
        x = np.asarray(x, dtype=float)
        base = np.floor((x[..., 1] - self.offset[1]) * self.ny).astype(int)
        best_d = np.full(base.shape, np.inf)
        best_k = np.zeros(base.shape, dtype=int)
        for dr in (-1, 0, 1, 2):
            row = np.mod(base + dr, self.ny)
            col = np.round((x[..., 0] - self.offset[0]) * self.nx - 0.5 * (row % 2)).astype(int)
            col = np.mod(col, self.nx)
            k = row * self.nx + col
            d = np.hypot(*np.moveaxis(wrap(self.coords(k) - x), -1, 0))
            better = d < best_d
            best_d = np.where(better, d, best_d)
            best_k = np.where(better, k, best_k)
        return best_k

    def covering_radius(self, grid):
        g = (np.arange(grid) + 0.5) / grid
        probes = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
        d = np.hypot(*wrap(self.coords(self.nearest(probes)) - probes).T)
        return float(d.max())


def dense_set(gamma, seed=0):
    if not 0 < gamma <= 0.25:
        raise ValidationError("gamma must lie in (0, 1/4]")
    spacing = gamma * math.sqrt(3) / 2
    nx = math.ceil(1 / spacing)
    ny = math.ceil(1 / (spacing * math.sqrt(3) / 2))
    ny += ny % 2
    off = np.random.default_rng(seed).random(2) * (1 / nx, 1 / ny)
    return DenseSet(float(gamma), nx, ny, (float(off[0]), float(off[1])))


def choose_gamma(f, alpha, beta):
    lip = c2_certificate(f).df
    return min(beta, alpha / 2, alpha / (2 * lip)) * (1 - 1e-6)


# symbolic coding


@dataclass(frozen=True)
class SymbolSequence:
    """Symbols for levels start_index .. start_index + len - 1; position 0 is ``center``."""

    start_index: int
    symbols: tuple
    center: int

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if not self.start_index <= self.center < self.start_index + len(self.symbols):
            raise ValidationError("center level outside the window")

    @property
    def stop_index(self):
        return self.start_index + len(self.symbols)

    def at(self, level):
        return self.symbols[level - self.start_index]

    def shift(self, k):
        """Same symbols with position 0 moved k levels forward."""
        return SymbolSequence(self.start_index, self.symbols, self.center + k)


def sequence_bracket(a, b):
    """Splice taking a's symbols at and after position 0 and b's at and before it."""
    if a.center != b.center or a.at(a.center) != b.at(b.center):
        raise SymbolMismatch("sequences must share the symbol at position 0")
    c = a.center
    head = b.symbols[: c - b.start_index + 1]
    tail = a.symbols[c - a.start_index + 1 :]
    return SymbolSequence(b.start_index, head + tail, c)


def pseudo_orbit_of(f, seq, P, alpha):
    return validate_pseudo_orbit(f, seq.start_index, P.coords(np.array(seq.symbols)), alpha)


def theta(f, seq, P, params, level=None):
    """Point at ``level`` (default position 0) of the orbit shadowing the coded pseudo-orbit."""
    res = shadow(f, pseudo_orbit_of(f, seq, P, params.alpha), params)
    return res.point_at(seq.center if level is None else level)


def code_point(f, x, level, N, P):
    """Nearest-member coding of the true orbit of x on levels level-N .. level+N."""
    pts = orbit(f, level, x, N, N)
    return SymbolSequence(level - N, tuple(P.nearest(pts)), level)


def _step_forward(f, P, level, a, alpha, rng):
    target = apply(f, level, P.point(a))
    for _ in range(100):
        r, ang = 0.5 * alpha * math.sqrt(rng.random()), 2 * math.pi * rng.random()
        b = int(P.nearest(as_array(exp(target, (r * math.cos(ang), r * math.sin(ang))))))
        if distance(target, P.point(b)) < alpha:
            return b
    return int(P.nearest(as_array(target)))


def _step_backward(f, P, level, a, alpha, lip, rng):
    """Random b with d(f_{level-1}(p_b), p_a) < alpha."""
    here = P.point(a)
    pre = apply_inverse(f, level - 1, here)
    for _ in range(100):
        r, ang = alpha / (4 * lip) * math.sqrt(rng.random()), 2 * math.pi * rng.random()
        b = int(P.nearest(as_array(exp(pre, (r * math.cos(ang), r * math.sin(ang))))))
        if distance(apply(f, level - 1, P.point(b)), here) < alpha:
            return b
    return int(P.nearest(as_array(pre)))


def random_sequence(f, P, alpha, center_symbol, center, n_before, n_after, rng):
    """Random admissible window with a fixed symbol at position 0."""
    lip = c2_certificate(f).df
    fwd = [int(center_symbol)]
    for k in range(n_after):
        fwd.append(_step_forward(f, P, center + k, fwd[-1], alpha, rng))
    back = []
    a = int(center_symbol)
    for k in range(n_before):
        a = _step_backward(f, P, center - k, a, alpha, lip, rng)
        back.append(a)
    return SymbolSequence(center - n_before, tuple(reversed(back)) + tuple(fwd), center)


def resample_outside(f, seq, P, alpha, N, rng):
    """Keep symbols within N levels of position 0; redraw the rest at random."""
    c = seq.center
    inner = seq.symbols[c - N - seq.start_index : c + N + 1 - seq.start_index]
    fwd = list(inner)
    for k in range(seq.stop_index - (c + N + 1)):
        fwd.append(_step_forward(f, P, c + N + k, fwd[-1], alpha, rng))
    lip = c2_certificate(f).df
    back = []
    a = inner[0]
    for k in range(c - N - seq.start_index):
        a = _step_backward(f, P, c - N - k, a, alpha, lip, rng)
        back.append(a)
    return SymbolSequence(seq.start_index, tuple(reversed(back)) + tuple(fwd), c)


def truncation_bound(params, N, eta=None, zeta=None):
    """2 sqrt 2 (1/eta - zeta)^-N r with r = 2 beta and the default (eta, zeta)."""
    from .shadowing import default_expansion_rates, expansiveness_bound

    d_eta, d_zeta = default_expansion_rates(params.lambda_)
    return expansiveness_bound(2 * params.beta, eta or d_eta, d_zeta if zeta is None else zeta, N).bound


# rectangles


_SHIFTS = np.array([(m, n) for m in range(-2, 3) for n in range(-2, 3)], dtype=float)


@dataclass(frozen=True)
class Rectangle:
    """Parallelogram {anchor + s e_s + u e_u : s in s_extent, u in u_extent}."""

    index: int
    anchor: TorusPoint
    s_extent: tuple
    u_extent: tuple
    e_s: tuple
    e_u: tuple

    @property
    def frame(self):
        return np.column_stack([self.e_s, self.e_u])

    @property
    def boundary(self):
        """Corner lifts near the anchor, counter-clockwise in (s, u)."""
        (s0, s1), (u0, u1) = self.s_extent, self.u_extent
        st = np.array([(s0, u0), (s1, u0), (s1, u1), (s0, u1)])
        return as_array(self.anchor) + st @ self.frame.T

    @property
    def area(self):
        ws = self.s_extent[1] - self.s_extent[0]
        wu = self.u_extent[1] - self.u_extent[0]
        return float(abs(np.linalg.det(self.frame)) * ws * wu)

    @property
    def diameter(self):
        b = self.boundary
        return float(max(np.hypot(*(b[0] - b[2])), np.hypot(*(b[1] - b[3]))))

    def polygon(self, shift=(0.0, 0.0)):
        return Polygon(self.boundary + np.asarray(shift))

    def local_coords(self, z):
        """(s, u) of the lift of z that is least outside the rectangle, and that defect."""
        z = np.atleast_2d(as_array(z))
        rel = wrap(z - as_array(self.anchor))[:, None, :] + _SHIFTS[None]
        su = frame_coords(np.asarray(self.e_s), np.asarray(self.e_u), rel.reshape(-1, 2)).reshape(rel.shape)
        d = self._defect(su)
        best = np.argmin(d, axis=1)
        rows = np.arange(len(z))
        return su[rows, best], d[rows, best]

    def _defect(self, su):
        (s0, s1), (u0, u1) = self.s_extent, self.u_extent
        s, u = su[..., 0], su[..., 1]
        return np.maximum.reduce([s0 - s, s - s1, u0 - u, u - u1, np.zeros_like(s)])

    def defect(self, z):
        return self.local_coords(z)[1]

    def contains(self, z, tol=0.0):
        return bool(np.all(self.defect(z) <= tol))

    def margin(self, z):
        """Distance (in frame units) from the best lift of z to the boundary; negative outside."""
        su, d = self.local_coords(z)
        (s0, s1), (u0, u1) = self.s_extent, self.u_extent
        inner = np.minimum.reduce([su[:, 0] - s0, s1 - su[:, 0], su[:, 1] - u0, u1 - su[:, 1]])
        return np.where(d > 0, -d, inner)

    def point(self, s, u):
        return TorusPoint.of(as_array(self.anchor) + s * np.asarray(self.e_s) + u * np.asarray(self.e_u))

    def moved(self, displacement):
        return Rectangle(self.index, TorusPoint.of(as_array(self.anchor) + displacement), self.s_extent, self.u_extent, self.e_s, self.e_u)

    def to_dict(self):
        return {
            "index": self.index,
            "anchor": [self.anchor.x, self.anchor.y],
            "s_extent": list(self.s_extent),
            "u_extent": list(self.u_extent),
            "e_s": list(self.e_s),
            "e_u": list(self.e_u),
            "vertices": self.boundary.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["index"]),
            TorusPoint.of(d["anchor"]),
            tuple(map(float, d["s_extent"])),
            tuple(map(float, d["u_extent"])),
            tuple(map(float, d["e_s"])),
            tuple(map(float, d["e_u"])),
        )


def _level_frame(f, level):
    e_s, e_u = _linear_frame(f, f.canonical_level(level), SPLIT_DEPTH)
    return tuple(map(float, e_s)), tuple(map(float, e_u))


def check_budget(P, levels, sample_budget, max_solves=MAX_SOLVES):
    solves = len(P) * levels * sample_budget
    if solves > max_solves:
        raise BudgetExceeded(
            f"{len(P)} symbols x {levels} levels x {sample_budget} samples = {solves} shadowing solves "
            f"exceeds the budget of {max_solves}"
        )


def build_T_rectangles(f, i, P, params, sample_budget, N=20, symbols=None, seed=0):
    """Smallest frame-aligned parallelogram around p_k holding sampled theta values
    of admissible windows with symbol k at level i."""
    _require_linear(f)
    e_s, e_u = _level_frame(f, i)
    rng = np.random.default_rng(seed)
    rects = []
    for k in range(len(P)) if symbols is None else symbols:
        anchor = P.point(k)
        pts = []
        for _ in range(sample_budget):
            seq = random_sequence(f, P, params.alpha, k, i, N, N, rng)
            pts.append(as_array(theta(f, seq, P, params)))
        if not pts:
            continue
        su = frame_coords(np.asarray(e_s), np.asarray(e_u), wrap(np.array(pts) - as_array(anchor)))
        lo, hi = su.min(axis=0), su.max(axis=0)
        rects.append(Rectangle(int(k), anchor, (float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1])), e_s, e_u))
    return rects


# refinement


def _box_in(ref, r):
    """Extents of r in ref's (s, u) chart, using the lift of r's anchor nearest ref's."""
    o = frame_coords(np.asarray(ref.e_s), np.asarray(ref.e_u), wrap(as_array(r.anchor) - as_array(ref.anchor)))
    return (o[0] + r.s_extent[0], o[0] + r.s_extent[1]), (o[1] + r.u_extent[0], o[1] + r.u_extent[1])


def _overlap(a, b):
    return min(a[1], b[1]) - max(a[0], b[0]) > 1e-12


def _component(iv, other, x):
    """Connected piece of iv containing x after splitting iv at other's endpoints."""
    lo, hi = iv
    if other[0] <= x <= other[1]:
        return max(lo, other[0]), min(hi, other[1])
    if x < other[0]:
        return lo, min(hi, other[0])
    return max(lo, other[1]), hi


def refine_level(rects, max_pieces=None):
    """Split overlapping rectangles into the distinct sets R(x); all share one frame."""
    if not rects:
        return []
    if max(r.diameter for r in rects) >= 0.25:
        raise ValidationError("refinement needs rectangles smaller than a quarter of the torus")
    n = len(rects)
    cap = 10 * n * n if max_pieces is None else max_pieces
    pieces = {}
    for j, Tj in enumerate(rects):
        boxes = [_box_in(Tj, r) for r in rects]
        near = [k for k in range(n) if _overlap(boxes[j][0], boxes[k][0]) and _overlap(boxes[j][1], boxes[k][1])]
        near2 = set(near)
        for k in near:
            near2.update(m for m in range(n) if _overlap(boxes[k][0], boxes[m][0]) and _overlap(boxes[k][1], boxes[m][1]))
        (S0, S1), (U0, U1) = boxes[j]
        s_cuts = sorted({S0, S1} | {v for m in near2 for v in boxes[m][0] if S0 < v < S1})
        u_cuts = sorted({U0, U1} | {v for m in near2 for v in boxes[m][1] if U0 < v < U1})
        for s_lo, s_hi in zip(s_cuts, s_cuts[1:]):
            for u_lo, u_hi in zip(u_cuts, u_cuts[1:]):
                if min(s_hi - s_lo, u_hi - u_lo) < 2 * BOUNDARY_MARGIN:
                    continue
                xs, xu = 0.5 * (s_lo + s_hi), 0.5 * (u_lo + u_hi)
                rs, ru = boxes[j]
                for jp in near:
                    bs, bu = boxes[jp]
                    if not (bs[0] < xs < bs[1] and bu[0] < xu < bu[1]):
                        continue
                    rs = (max(rs[0], bs[0]), min(rs[1], bs[1]))
                    ru = (max(ru[0], bu[0]), min(ru[1], bu[1]))
                    for k in range(n):
                        if _overlap(bs, boxes[k][0]) and _overlap(bu, boxes[k][1]):
                            rs = _component(rs, boxes[k][0], xs)
                            ru = _component(ru, boxes[k][1], xu)
                corner = TorusPoint.of(as_array(Tj.anchor) + rs[0] * np.asarray(Tj.e_s) + ru[0] * np.asarray(Tj.e_u))
                key = (round(corner.x, 9) % 1.0, round(corner.y, 9) % 1.0, round(rs[1] - rs[0], 9), round(ru[1] - ru[0], 9))
                if key not in pieces:
                    pieces[key] = (corner, rs[1] - rs[0], ru[1] - ru[0])
                    if len(pieces) > cap:
                        raise RefinementExplosion(f"more than {cap} pieces from {n} rectangles")
    e_s, e_u = rects[0].e_s, rects[0].e_u
    out = [Rectangle(0, c, (0.0, float(ws)), (0.0, float(wu)), e_s, e_u) for c, ws, wu in pieces.values() if ws * wu > 1e-10]
    out.sort(key=lambda r: (r.anchor.y, r.anchor.x, r.s_extent[1], r.u_extent[1]))
    return [Rectangle(idx, r.anchor, r.s_extent, r.u_extent, r.e_s, r.e_u) for idx, r in enumerate(out)]


@dataclass(frozen=True)
class PartitionSequence:
    levels: dict
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def max_cardinality(self):
        return max((len(v) for v in self.levels.values()), default=0)

    def to_dict(self):
        return {
            "levels": {str(i): [r.to_dict() for r in rs] for i, rs in sorted(self.levels.items())},
            "max_cardinality": self.max_cardinality,
            "meta": self.meta,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d):
        levels = {int(i): tuple(Rectangle.from_dict(r) for r in rs) for i, rs in d["levels"].items()}
        return cls(levels, dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_svg(self, level, size=512):
        """Static SVG of the rectangles on one level, folded into the unit square."""
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 1 1">',
            '<g transform="translate(0,1) scale(1,-1)" stroke="black" stroke-width="0.002">',
        ]
        for r in self.levels[level]:
            for piece in _folded(r):
                for poly in getattr(piece, "geoms", [piece]):
                    pts = " ".join(f"{x:.6f},{y:.6f}" for x, y in list(poly.exterior.coords)[:-1])
                    hue = (r.index * 47) % 360
                    parts.append(f'<polygon data-index="{r.index}" points="{pts}" fill="hsl({hue},60%,70%)"/>')
        parts.append("</g></svg>")
        return "\n".join(parts) + "\n"


def _folded(r):
    """Pieces of the rectangle's lifts clipped to the unit square."""
    return _folded_polygon(r.boundary)


def refine(f, rects_by_level, max_pieces=None):
    _require_linear(f)
    return PartitionSequence({i: tuple(refine_level(list(rs), max_pieces)) for i, rs in rects_by_level.items()})


def build_partition(f, P, params, N=20, sample_budget=8, seed=0, max_solves=MAX_SOLVES):
    """Full pipeline on the levels of f's window plus the following level."""
    _require_linear(f)
    lo, hi = int(f.window[0]), int(f.window[1])
    canon = sorted({f.canonical_level(i) for i in range(lo, hi + 2)})
    check_budget(P, len(canon), sample_budget, max_solves)
    per_canon = {
        c: refine_level(build_T_rectangles(f, c, P, params, sample_budget, N, seed=seed + c)) for c in canon
    }
    levels = {i: tuple(per_canon[f.canonical_level(i)]) for i in range(lo, hi + 2)}
    meta = {"gamma": P.gamma, "N": N, "truncation_bound": truncation_bound(params, N)}
    return PartitionSequence(levels, meta)


def eigen_partition(f, levels=(0, 1)):
    """Two-rectangle partition of the cat map bounded by eigen-segments through 0.

    In the orthonormal eigenframe the integer lattice is a square lattice spanned
    by (a, b) and (-b, a), with a = phi c and b = c, so the torus is tiled by one
    square of side a and one of side b.
    """
    _require_linear(f)
    if any(m.matrix != CAT for m in f.pattern):
        raise ValidationError("the eigen-segment partition is implemented for the cat map only")
    phi = (1 + math.sqrt(5)) / 2
    c = 1 / math.sqrt(1 + phi * phi)
    a, b = phi * c, c
    e_s, e_u = _level_frame(f, levels[0])
    origin = TorusPoint(0.0, 0.0)
    rects = (
        Rectangle(0, origin, (0.0, a), (0.0, a), e_s, e_u),
        Rectangle(1, origin, (0.0, b), (a, a + b), e_s, e_u),
    )
    return PartitionSequence({i: rects for i in levels}, {"kind": "eigen"})


# audits


@dataclass(frozen=True)
class CoverageReport:
    total_area: float
    union_area: float
    area_defect: float
    overlap_area: float


def coverage(rects):
    pieces = [p for r in rects for p in _folded(r)]
    union = unary_union(pieces).area if pieces else 0.0
    total = float(sum(p.area for p in pieces))
    return CoverageReport(total, float(union), float(abs(1.0 - union)), float(total - union))


@dataclass(frozen=True)
class MarkovReport:
    probes: int
    violations: int
    worst_defect: float
    uncovered: int = 0

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return {"probes": self.probes, "violations": self.violations, "worst_defect": self.worst_defect, "uncovered": self.uncovered, "passed": self.passed}


def _find_rect(rects, z):
    margins = np.array([r.margin(z)[0] for r in rects])
    return int(np.argmax(margins)), float(margins.max())


def check_markov(f, part, probes, seed=0, tol=MARKOV_TOL):
    """Sample x in R_j^i with f_i(x) in R_k^{i+1} and test both fiber conditions on 33 points."""
    _require_linear(f)
    pairs = [i for i in sorted(part.levels) if i + 1 in part.levels and part.levels[i]]
    if probes == 0 or not pairs:
        return MarkovReport(0, 0, 0.0)
    rng = np.random.default_rng(seed)
    violations = uncovered = 0
    worst = 0.0
    done = 0
    while done < probes:
        i = pairs[rng.integers(len(pairs))]
        src, dst = part.levels[i], part.levels[i + 1]
        weights = np.array([r.area for r in src])
        j = int(rng.choice(len(src), p=weights / weights.sum()))
        Rj = src[j]
        s = Rj.s_extent[0] + (Rj.s_extent[1] - Rj.s_extent[0]) * rng.random()
        u = Rj.u_extent[0] + (Rj.u_extent[1] - Rj.u_extent[0]) * rng.random()
        x = as_array(Rj.anchor) + s * np.asarray(Rj.e_s) + u * np.asarray(Rj.e_u)
        if Rj.margin(x)[0] < BOUNDARY_MARGIN:
            continue
        m = f.resolve(i)
        y = m.forward_lift(x)
        k, margin = _find_rect(dst, y)
        if margin < 0:
            violations += 1
            uncovered += 1
            worst = max(worst, -margin)
            done += 1
            continue
        if margin < BOUNDARY_MARGIN:
            continue
        done += 1
        Rk = dst[k]
        yc = Rk.local_coords(y)[0][0]
        # (a) image of the stable fiber of x stays in the stable fiber of f(x)
        ss = np.linspace(Rj.s_extent[0], Rj.s_extent[1], FIBER_POINTS)
        fiber = x + np.outer(ss - s, Rj.e_s)
        img = m.forward_lift(fiber) - y
        su = yc + frame_coords(np.asarray(Rk.e_s), np.asarray(Rk.e_u), img)
        d_a = Rk._defect(su)
        # (b) unstable fiber of f(x) is covered by the image of the unstable fiber of x
        uu = np.linspace(Rk.u_extent[0], Rk.u_extent[1], FIBER_POINTS)
        ufib = y + np.outer(uu - yc[1], Rk.e_u)
        pre = m.inverse_lift(ufib) - x
        su_b = np.array([s, u]) + frame_coords(np.asarray(Rj.e_s), np.asarray(Rj.e_u), pre)
        d_b = Rj._defect(su_b)
        d = float(max(d_a.max(), d_b.max()))
        worst = max(worst, d)
        if d > tol:
            violations += 1
    return MarkovReport(done, violations, worst, uncovered)


@dataclass(frozen=True)
class TransitionMatrixSequence:
    matrices: dict

    def to_dict(self):
        return {str(i): np.asarray(B).tolist() for i, B in sorted(self.matrices.items())}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d):
        return cls({int(i): np.array(B, dtype=int) for i, B in d.items()})

    def nondegenerate(self):
        return all(np.all(B.sum(axis=0) > 0) and np.all(B.sum(axis=1) > 0) for B in self.matrices.values())


def transition_matrices(f, part):
    _require_linear(f)
    out = {}
    for i in sorted(part.levels):
        if i + 1 not in part.levels:
            continue
        src, dst = part.levels[i], part.levels[i + 1]
        m = f.resolve(i)
        dst_folded = [unary_union(_folded(r)) for r in dst]
        B = np.zeros((len(src), len(dst)), dtype=int)
        for j, r in enumerate(src):
            img_folded = unary_union(_folded_polygon(m.forward_lift(r.boundary)))
            for k, target in enumerate(dst_folded):
                if img_folded.intersection(target).area > AREA_EPS:
                    B[j, k] = 1
        out[i] = B
    return TransitionMatrixSequence(out)


def _folded_polygon(corners):
    unit = box(0, 0, 1, 1)
    out = []
    for m in range(int(np.floor(-corners[:, 0].max())), int(np.ceil(1 - corners[:, 0].min())) + 1):
        for n in range(int(np.floor(-corners[:, 1].max())), int(np.ceil(1 - corners[:, 1].min())) + 1):
            piece = Polygon(corners + (m, n)).intersection(unit)
            if piece.area > 0:
                out.append(piece)
    return out
