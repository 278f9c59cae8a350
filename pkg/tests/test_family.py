import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyplab.errors import ConfigError
from hyplab.family import (
    FamilySpec,
    LinearToral,
    PerturbedLinear,
    apply,
    apply_inverse,
    compose,
    derivative_cocycle,
    jet,
    orbit,
)
from hyplab.torus import TorusPoint, distance

coord = st.floats(0, 1, exclude_max=True, allow_nan=False)


def test_cat_fixes_origin(cat):
    assert tuple(apply(cat, 0, TorusPoint(0, 0))) == (0.0, 0.0)
    assert tuple(apply_inverse(cat, 0, TorusPoint(0, 0))) == (0.0, 0.0)


def test_shear_step(shear):
    assert tuple(apply(shear, 0, TorusPoint(0.5, 0.25))) == pytest.approx((0.5, 0.75))


def test_cat_inverse_matrix(cat):
    assert cat.pattern[0].A_inv.tolist() == [[1, -1], [-1, 2]]


@pytest.mark.parametrize("fam", ["cat", "shear", "perturbed"])
def test_apply_inverse_roundtrip(fam, request, rng):
    f = request.getfixturevalue(fam)
    for p in rng.random((100, 2)):
        i = int(rng.integers(-5, 6))
        assert distance(apply(f, i, apply_inverse(f, i, p)), p) < 1e-10


def test_compose_zero_is_identity(shear):
    p = TorusPoint(0.123, 0.456)
    assert compose(shear, 3, 0, p) == p


def test_two_shears_make_cat(shear, cat, rng):
    for p in rng.random((100, 2)):
        assert distance(compose(shear, 0, 2, p), apply(cat, 0, p)) == 0.0


@pytest.mark.parametrize("fam", ["cat", "shear", "perturbed"])
def test_composition_law(fam, request, rng):
    f = request.getfixturevalue(fam)
    for _ in range(50):
        i, m, n = (int(v) for v in rng.integers(-5, 6, 3))
        p = rng.random(2)
        assert distance(compose(f, i, m + n, p), compose(f, i + m, n, compose(f, i, m, p))) < 1e-9
        assert distance(compose(f, i, n, compose(f, i + n, -n, p)), p) < 1e-9


def test_orbit_layout(shear):
    p = TorusPoint(0.2, 0.7)
    pts = orbit(shear, 3, p, 2, 4)
    assert pts.shape == (7, 2)
    for k in range(-2, 5):
        assert distance(pts[2 + k], compose(shear, 3, k, p)) < 1e-12


def test_cat_jet(cat):
    j = jet(cat, 0, (0.3, 0.1))
    assert j.derivative.tolist() == [[2, 1], [1, 1]]
    assert j.second_derivative_bound == 0


def test_perturbed_jet_at_origin():
    eps = 1e-3
    m = PerturbedLinear(((2, 1), (1, 1)), eps, (1, 0), 0.0)
    expected = np.array([[2 + 2 * np.pi * eps, 1], [1, 1]])
    assert np.allclose(m.jacobian(np.zeros(2)), expected, atol=1e-15)


def test_perturbed_jacobian_finite_difference(perturbed, rng):
    m = perturbed.pattern[0]
    h = 1e-6
    for x in rng.random((100, 2)):
        fd = np.column_stack([(m.forward_lift(x + h * e) - m.forward_lift(x - h * e)) / (2 * h) for e in np.eye(2)])
        assert np.abs(fd - m.jacobian(x)).max() < 1e-6


def test_perturbed_amplitude_check():
    with pytest.raises(ConfigError):
        PerturbedLinear(((2, 1), (1, 1)), 0.2, (1, 0), 0.0)


def test_cocycle_examples(cat, shear):
    assert np.array_equal(derivative_cocycle(cat, 0, 0, (0.1, 0.2)), np.eye(2))
    assert derivative_cocycle(cat, 0, 3, (0.1, 0.2)).tolist() == [[13, 8], [8, 5]]
    D = derivative_cocycle(shear, 1, -3, (0.4, 0.9))
    assert np.linalg.det(D) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("fam", ["shear", "perturbed"])
def test_cocycle_property(fam, request, rng):
    f = request.getfixturevalue(fam)
    for _ in range(100):
        i, m, n = (int(v) for v in rng.integers(-5, 6, 3))
        p = rng.random(2)
        lhs = derivative_cocycle(f, i, m + n, p)
        rhs = derivative_cocycle(f, i + m, n, compose(f, i, m, p)) @ derivative_cocycle(f, i, m, p)
        assert np.abs(lhs - rhs).max() < 1e-8 * max(1.0, np.abs(lhs).max())


def test_constant_tails_extension():
    f = FamilySpec((LinearToral(((1, 0), (1, 1))), LinearToral(((1, 1), (0, 1)))), "constant_tails", (-1, 0))
    assert f.resolve(-7).matrix == ((1, 0), (1, 1))
    assert f.resolve(9).matrix == ((1, 1), (0, 1))


def test_json_roundtrip(shear, perturbed):
    for f in (shear, perturbed):
        assert FamilySpec.from_json(f.to_json()) == f


@pytest.mark.parametrize(
    "doc, path",
    [
        ({"pattern": [{"kind": "linear", "matrix": [[2, 1], [1, 1], [0, 0]]}]}, "family.pattern[0].matrix"),
        ({"pattern": [{"kind": "linear", "matrix": [[2, 0], [0, 1]]}]}, "family.pattern[0].matrix"),
        ({"pattern": [{"kind": "linear", "matrix": [[2, 1], [1, 1]], "bogus": 1}]}, "family.pattern[0].bogus"),
        ({"pattern": [{"kind": "linear", "matrix": [[2, 1], [1, 1]]}], "window": [0, 3]}, "family.window"),
        ({"pattern": [], "extension": "periodic"}, "family.pattern"),
    ],
)
def test_config_errors_carry_field_paths(doc, path):
    with pytest.raises(ConfigError) as e:
        FamilySpec.from_dict(json.loads(json.dumps(doc)))
    assert e.value.path == path


@given(coord, coord, st.integers(-4, 4))
def test_shifted_family(a, b, k):
    from hyplab.family import shear_family

    f = shear_family((1, 2))
    g = f.shifted(k)
    assert distance(apply(g, 0, (a, b)), apply(f, k, (a, b))) == 0.0
