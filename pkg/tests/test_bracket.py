import math

import numpy as np
import pytest

from hyplab.bracket import BracketParams, bracket, bracket_solve, calibrate_delta, cone_at, in_cones
from hyplab.errors import TooFarApart, ValidationError
from hyplab.hyperbolicity import splitting_at
from hyplab.manifolds import Flavor
from hyplab.torus import TorusPoint, as_array, distance, exp, log

PARAMS = BracketParams(0.05, 0.012)
PHI = (1 + math.sqrt(5)) / 2


def random_pairs(rng, n, delta):
    for _ in range(n):
        p = TorusPoint.of(rng.random(2))
        r, a = delta * 0.999 * rng.random(), 2 * math.pi * rng.random()
        yield p, exp(p, (r * math.cos(a), r * math.sin(a)))


def test_params_invariants():
    with pytest.raises(ValidationError):
        BracketParams(0.05, 0.0125)
    with pytest.raises(ValidationError):
        BracketParams(0.2, 0.01)


@pytest.mark.parametrize("fam", ["cat", "shear", "perturbed"])
def test_bracket_of_point_with_itself(fam, request):
    p = TorusPoint(0.3, 0.4)
    assert bracket(request.getfixturevalue(fam), 0, p, p, PARAMS) == p


def test_stable_neighbour_is_its_own_bracket(cat):
    p = TorusPoint(0.3, 0.4)
    q = exp(p, 0.004 * as_array(splitting_at(cat, 0, p).e_s))
    assert distance(bracket(cat, 0, p, q, PARAMS), q) < 1e-10


def test_cat_linear_solve_oracle(cat):
    e_s = np.array([1.0, -PHI]) / math.hypot(1, PHI)
    e_u = np.array([1.0, PHI - 1]) / math.hypot(1, PHI - 1)
    t, u = np.linalg.solve(np.column_stack([e_s, -e_u]), [0.01, 0.0])
    z = bracket(cat, 0, TorusPoint(0, 0), TorusPoint(0.01, 0), PARAMS)
    assert distance(z, TorusPoint.of(t * e_s)) < 1e-12
    assert distance(z, TorusPoint.of(np.array([0.01, 0.0]) + u * e_u)) < 1e-12


def test_too_far_apart(cat):
    with pytest.raises(TooFarApart):
        bracket(cat, 0, TorusPoint(0, 0), TorusPoint(0.02, 0), PARAMS)


@pytest.mark.parametrize("fam, n", [("cat", 200), ("shear", 200), ("perturbed", 40)])
def test_idempotence_and_cones(fam, n, request, rng):
    f = request.getfixturevalue(fam)
    for p, q in random_pairs(rng, n, PARAMS.delta):
        i = int(rng.integers(0, 2))
        z = bracket(f, i, p, q, PARAMS)
        assert distance(bracket(f, i, p, z, PARAMS), z) < 1e-9
        assert in_cones(f, i, p, q, z, PARAMS.alpha)


def test_perturbed_bracket_lies_on_both_manifolds(perturbed, rng):
    from hyplab.manifolds import local_manifold

    for p, q in random_pairs(rng, 10, PARAMS.delta):
        z = bracket(perturbed, 0, p, q, PARAMS)
        assert local_manifold(perturbed, 0, p, "stable", 0.05).transverse_distance(z) < 1e-9
        assert local_manifold(perturbed, 0, q, "unstable", 0.05).transverse_distance(z) < 1e-9


@pytest.mark.parametrize("fam", ["cat", "perturbed"])
def test_continuity(fam, request, rng):
    f = request.getfixturevalue(fam)
    for p, q in random_pairs(rng, 20, 0.01):
        z = bracket(f, 0, p, q, PARAMS)
        p2, q2 = exp(p, (7e-4, 7e-4)), exp(q, (-7e-4, 7e-4))
        if distance(p2, q2) < PARAMS.delta:
            assert distance(bracket(f, 0, p2, q2, PARAMS), z) < 1e-2


def test_cone_membership_is_exact(cat):
    cone = cone_at(cat, 0, (0.1, 0.1), Flavor.STABLE, 0.25)
    e_s, e_u = np.asarray(cone.e_s), np.asarray(cone.e_u)
    assert cone.contains(e_s + 0.25 * e_u)
    assert not cone.contains(e_s + 0.2501 * e_u)


def test_calibration_linear(cat):
    out = calibrate_delta(cat, BracketParams(0.05, 0.0124))
    assert out.delta >= 0.05 / 8


def test_calibration_rejects_few_trials(cat):
    with pytest.raises(ValidationError):
        calibrate_delta(cat, PARAMS, trials=0)


def test_calibration_perturbed_close_to_linear(cat, perturbed):
    lin = calibrate_delta(cat, BracketParams(0.05, 0.0124))
    per = calibrate_delta(perturbed, BracketParams(0.05, 0.0124))
    assert lin.delta / 4 <= per.delta <= lin.delta * 4


def test_solve_returns_chart_parameters(cat):
    p, q = TorusPoint(0.2, 0.2), TorusPoint(0.205, 0.2)
    z, t, u = bracket_solve(cat, 0, p, q, PARAMS)
    e = splitting_at(cat, 0, p)
    assert np.allclose(as_array(log(p, z)), t * as_array(e.e_s), atol=1e-15)
    assert np.allclose(as_array(log(q, z)), u * as_array(e.e_u), atol=1e-15)
