"""Flat unit torus T^2 = R^2 / Z^2: points, lifts, distance, exp and log."""

from dataclasses import dataclass

import numpy as np

from .errors import NormTooLarge, TooFarApart

INJECTIVITY_RADIUS = 0.5
SNAP = 1e-15


def _canon(x):
    x = float(x) % 1.0
    if x >= 1.0 - SNAP:
        return 0.0
    return x


@dataclass(frozen=True)
class TorusPoint:
    """Canonical representative in [0,1)^2."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", _canon(self.x))
        object.__setattr__(self, "y", _canon(self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype or float)

    @classmethod
    def of(cls, xy):
        return cls(xy[0], xy[1])


@dataclass(frozen=True)
class TorusVector:
    dx: float
    dy: float

    def __iter__(self):
        yield self.dx
        yield self.dy

    def __array__(self, dtype=None, copy=None):
        return np.array([self.dx, self.dy], dtype=dtype or float)

    @property
    def norm(self):
        return float(np.hypot(self.dx, self.dy))


@dataclass(frozen=True)
class Lift:
    base: TorusPoint
    rep: tuple

    def __post_init__(self):
        r = np.asarray(self.rep, dtype=float)
        if np.max(np.abs(wrap(r - np.asarray(self.base)))) > 1e-12:
            raise ValueError("lift does not project to its base point")
        object.__setattr__(self, "rep", (float(r[0]), float(r[1])))

    @classmethod
    def of(cls, rep):
        rep = np.asarray(rep, dtype=float)
        return cls(TorusPoint.of(rep), tuple(rep))


def as_array(p):
    return np.asarray(p, dtype=float)


def wrap(d):
    """Nearest-integer-shift representative of a displacement, in (-1/2, 1/2]."""
    d = np.asarray(d, dtype=float)
    return d - np.ceil(d - 0.5)


def distance(p, q):
    return float(np.hypot(*wrap(as_array(q) - as_array(p))))


def distances(p, q):
    """Row-wise distance for arrays of shape (n, 2)."""
    d = wrap(np.asarray(q, dtype=float) - np.asarray(p, dtype=float))
    return np.hypot(d[..., 0], d[..., 1])


def exp(p, v):
    v = as_array(v)
    if np.hypot(*v) >= INJECTIVITY_RADIUS:
        raise NormTooLarge(f"|v| = {np.hypot(*v)!r} >= {INJECTIVITY_RADIUS}")
    return TorusPoint.of(as_array(p) + v)


def log(p, q):
    v = wrap(as_array(q) - as_array(p))
    if np.hypot(*v) >= INJECTIVITY_RADIUS:
        raise TooFarApart(f"d(p, q) = {np.hypot(*v)!r} >= {INJECTIVITY_RADIUS}")
    return TorusVector(float(v[0]), float(v[1]))


def lift_near(q, ref):
    """Representative of q in R^2 nearest to the planar point ref."""
    ref = as_array(ref)
    return ref + wrap(as_array(q) - ref)
