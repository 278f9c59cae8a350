"""Non-stationary dynamical systems on T^2 and their composition law.

A family is a finitely described bi-infinite sequence of torus maps
``f_i: M_i -> M_{i+1}``.  ``pattern[k]`` is the map at level ``window[0] + k``;
levels outside the window are resolved by the extension rule.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoConvergence
from .torus import TorusPoint, as_array

TWO_PI = 2.0 * math.pi
INVERSE_TOL = 1e-12
INVERSE_MAX_ITER = 200


def _int_matrix(m, path="matrix"):
    try:
        rows = tuple(tuple(int(v) for v in row) for row in m)
    except (TypeError, ValueError):
        raise ConfigError(path, "expected a 2x2 integer matrix")
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ConfigError(path, "expected a 2x2 integer matrix")
    for row, orig in zip(rows, m):
        for v, o in zip(row, orig):
            if v != o:
                raise ConfigError(path, "matrix entries must be integers")
    det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if det not in (1, -1):
        raise ConfigError(path, f"determinant must be +-1, got {det}")
    return rows


def _int_inverse(m):
    (a, b), (c, d) = m
    det = a * d - b * c
    return ((d * det, -b * det), (-c * det, a * det))


def _int_matmul(m, n):
    return tuple(
        tuple(sum(m[r][k] * n[k][c] for k in range(2)) for c in range(2)) for r in range(2)
    )


def op_norm(m):
    return float(np.linalg.norm(np.asarray(m, dtype=float), 2))


@dataclass(frozen=True)
class LinearToral:
    matrix: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", _int_matrix(self.matrix))

    is_linear = True

    @property
    def A(self):
        return np.asarray(self.matrix, dtype=float)

    @property
    def A_inv(self):
        return np.asarray(_int_inverse(self.matrix), dtype=float)

    def forward_lift(self, x):
        return np.asarray(x, dtype=float) @ self.A.T

    def inverse_lift(self, y):
        return np.asarray(y, dtype=float) @ self.A_inv.T

    def jacobian(self, x):
        return self.A

    def second_derivative_bound(self):
        return 0.0

    def to_dict(self):
        return {"kind": "linear", "matrix": [list(r) for r in self.matrix]}


@dataclass(frozen=True)
class PerturbedLinear:
    """``f(p) = A p + amplitude * (sin(2 pi (mode . p + phase)), 0)`` mod 1."""

    matrix: tuple
    amplitude: float
    mode: tuple
    phase: float = 0.0

    is_linear = False

    def __post_init__(self):
        object.__setattr__(self, "matrix", _int_matrix(self.matrix))
        mode = tuple(int(v) for v in self.mode)
        if len(mode) != 2 or mode == (0, 0):
            raise ConfigError("mode", "mode must be a nonzero integer pair")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "phase", float(self.phase))
        if self.amplitude < 0:
            raise ConfigError("amplitude", "amplitude must be >= 0")
        # Picard contraction for the inverse: ||A^-1|| * amp * 2 pi |mode| < 1.
        if self.kappa * op_norm(self.A_inv) >= 1.0:
            raise ConfigError("amplitude", "amplitude too large for a diffeomorphism")

    @property
    def A(self):
        return np.asarray(self.matrix, dtype=float)

    @property
    def A_inv(self):
        return np.asarray(_int_inverse(self.matrix), dtype=float)

    @property
    def kappa(self):
        """Lipschitz constant of the perturbation."""
        return self.amplitude * TWO_PI * math.hypot(*self.mode)

    def _angle(self, x):
        x = np.asarray(x, dtype=float)
        return TWO_PI * (x[..., 0] * self.mode[0] + x[..., 1] * self.mode[1] + self.phase)

    def _bump(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        out[..., 0] = self.amplitude * np.sin(self._angle(x))
        return out

    def forward_lift(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.A.T + self._bump(x)

    def inverse_lift(self, y):
        y = np.asarray(y, dtype=float)
        Ainv = self.A_inv
        x = y @ Ainv.T
        for _ in range(INVERSE_MAX_ITER):
            nxt = (y - self._bump(x)) @ Ainv.T
            if np.max(np.abs(nxt - x)) < INVERSE_TOL:
                return nxt
            x = nxt
        raise NoConvergence(f"inverse did not converge in {INVERSE_MAX_ITER} iterations")

    def jacobian(self, x):
        c = self.amplitude * TWO_PI * math.cos(float(self._angle(x)))
        J = self.A.copy()
        J[0, 0] += c * self.mode[0]
        J[0, 1] += c * self.mode[1]
        return J

    def second_derivative_bound(self):
        return self.amplitude * TWO_PI**2 * (self.mode[0] ** 2 + self.mode[1] ** 2)

    def to_dict(self):
        return {
            "kind": "perturbed",
            "matrix": [list(r) for r in self.matrix],
            "amplitude": self.amplitude,
            "mode": list(self.mode),
            "phase": self.phase,
        }


EXTENSIONS = ("periodic", "constant_tails")


@dataclass(frozen=True)
class FamilySpec:
    pattern: tuple
    extension: str = "periodic"
    window: tuple = None

    def __post_init__(self):
        pattern = tuple(self.pattern)
        if not pattern:
            raise ConfigError("pattern", "pattern must be nonempty")
        object.__setattr__(self, "pattern", pattern)
        if self.extension not in EXTENSIONS:
            raise ConfigError("extension", f"expected one of {EXTENSIONS}")
        window = self.window if self.window is not None else (0, len(pattern) - 1)
        window = (int(window[0]), int(window[1]))
        if window[1] - window[0] + 1 != len(pattern):
            raise ConfigError("window", "window length must equal pattern length")
        object.__setattr__(self, "window", window)

    def resolve(self, i):
        lo, hi = self.window
        if self.extension == "periodic":
            return self.pattern[(i - lo) % len(self.pattern)]
        return self.pattern[min(max(i, lo), hi) - lo]

    @property
    def is_linear(self):
        return all(m.is_linear for m in self.pattern)

    def shifted(self, k):
        """Family g with g_j = f_{j+k}."""
        return FamilySpec(self.pattern, self.extension, (self.window[0] - k, self.window[1] - k))

    def canonical_level(self, i):
        """A level with identical future and past maps, for caching splittings."""
        if self.extension == "periodic":
            return self.window[0] + (i - self.window[0]) % len(self.pattern)
        return i

    def to_dict(self):
        return {
            "pattern": [m.to_dict() for m in self.pattern],
            "extension": self.extension,
            "window": list(self.window),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc, path="family"):
        if not isinstance(doc, dict):
            raise ConfigError(path, "expected an object")
        unknown = set(doc) - {"pattern", "extension", "window"}
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")
        if "pattern" not in doc or not isinstance(doc["pattern"], list):
            raise ConfigError(f"{path}.pattern", "expected a list")
        maps = [map_from_dict(m, f"{path}.pattern[{k}]") for k, m in enumerate(doc["pattern"])]
        window = doc.get("window")
        if window is not None and (
            not isinstance(window, list) or len(window) != 2 or not all(isinstance(v, int) for v in window)
        ):
            raise ConfigError(f"{path}.window", "expected [i_min, i_max]")
        try:
            return cls(tuple(maps), doc.get("extension", "periodic"), tuple(window) if window else None)
        except ConfigError as e:
            raise ConfigError(f"{path}.{e.path}", str(e).split(": ", 1)[-1])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def map_from_dict(doc, path):
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    kind = doc.get("kind")
    allowed = {"linear": {"kind", "matrix"}, "perturbed": {"kind", "matrix", "amplitude", "mode", "phase"}}
    if kind not in allowed:
        raise ConfigError(f"{path}.kind", "expected 'linear' or 'perturbed'")
    unknown = set(doc) - allowed[kind]
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")
    if "matrix" not in doc:
        raise ConfigError(f"{path}.matrix", "missing")
    try:
        matrix = _int_matrix(doc["matrix"], f"{path}.matrix")
        if kind == "linear":
            return LinearToral(matrix)
        return PerturbedLinear(matrix, doc.get("amplitude", 0.0), tuple(doc.get("mode", (1, 0))), doc.get("phase", 0.0))
    except ConfigError as e:
        if e.path.startswith(path):
            raise
        raise ConfigError(f"{path}.{e.path}", str(e).split(": ", 1)[-1])


# reference families

CAT = ((2, 1), (1, 1))


def cat_family():
    return FamilySpec((LinearToral(CAT),), "periodic", (0, 0))


def shear_family(ns=(1, 1)):
    """Alternating shears: lower-triangular at even levels, upper at odd levels."""
    if len(ns) % 2:
        ns = tuple(ns) * 2
    pattern = tuple(
        LinearToral(((1, 0), (n, 1)) if k % 2 == 0 else ((1, n), (0, 1))) for k, n in enumerate(ns)
    )
    return FamilySpec(pattern, "periodic", (0, len(pattern) - 1))


def identity_family():
    return FamilySpec((LinearToral(((1, 0), (0, 1))),), "periodic", (0, 0))


def perturbed_cat_family(amplitude, mode=(1, 0), phase=0.0):
    return FamilySpec((PerturbedLinear(CAT, amplitude, mode, phase),), "periodic", (0, 0))


# composition law

@dataclass(frozen=True)
class Jet:
    value: TorusPoint
    derivative: np.ndarray
    second_derivative_bound: float


def step_lift(f, i, x):
    return f.resolve(i).forward_lift(x)


def step_inverse_lift(f, i, y):
    """Lift of f_i^{-1} applied to a lift of a point of M_{i+1}."""
    return f.resolve(i).inverse_lift(y)


def apply(f, i, p):
    return TorusPoint.of(step_lift(f, i, as_array(p)))


def apply_inverse(f, i, p):
    return TorusPoint.of(step_inverse_lift(f, i, as_array(p)))


def compose_lift(f, i, n, x):
    """Lift of F_i^n; exact integer matrix product when the segment is linear."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return x.copy()
    levels = range(i, i + n) if n > 0 else range(i - 1, i + n - 1, -1)
    maps = [f.resolve(j) for j in levels]
    if all(m.is_linear for m in maps):
        M = ((1, 0), (0, 1))
        for m in maps:
            M = _int_matmul(m.matrix if n > 0 else _int_inverse(m.matrix), M)
        return x @ np.asarray(M, dtype=float).T
    for m in maps:
        x = m.forward_lift(x) if n > 0 else m.inverse_lift(x)
    return x


def compose(f, i, n, p):
    if n == 0:
        return TorusPoint.of(as_array(p))
    x = as_array(p)
    if f.is_linear:
        return TorusPoint.of(compose_lift(f, i, n, x))
    for k in range(abs(n)):
        x = np.mod(step_lift(f, i + k, x) if n > 0 else step_inverse_lift(f, i - 1 - k, x), 1.0)
    return TorusPoint.of(x)


def orbit(f, i, p, n_back, n_fwd):
    """Points of the orbit of p (at level i) on levels i-n_back .. i+n_fwd, shape (n, 2)."""
    out = np.empty((n_back + n_fwd + 1, 2))
    x = as_array(p)
    out[n_back] = x
    y = x
    for k in range(n_back):
        y = np.mod(step_inverse_lift(f, i - 1 - k, y), 1.0)
        out[n_back - 1 - k] = y
    y = x
    for k in range(n_fwd):
        y = np.mod(step_lift(f, i + k, y), 1.0)
        out[n_back + 1 + k] = y
    return out


def jet(f, i, p):
    m = f.resolve(i)
    x = as_array(p)
    return Jet(TorusPoint.of(m.forward_lift(x)), m.jacobian(x), m.second_derivative_bound())


def derivative_cocycle(f, i, n, p):
    """D_p(F_i^n) by the chain rule along the orbit segment."""
    D = np.eye(2)
    x = as_array(p)
    if n > 0:
        for k in range(n):
            m = f.resolve(i + k)
            D = m.jacobian(x) @ D
            x = np.mod(m.forward_lift(x), 1.0)
    elif n < 0:
        for k in range(-n):
            m = f.resolve(i - 1 - k)
            x = np.mod(m.inverse_lift(x), 1.0)
            D = np.linalg.inv(m.jacobian(x)) @ D
    return D
