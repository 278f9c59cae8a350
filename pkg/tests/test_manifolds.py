import numpy as np
import pytest

from hyplab.errors import EpsilonTooLarge, NotOnManifold, ValidationError
from hyplab.family import apply, apply_inverse, compose
from hyplab.hyperbolicity import splitting_at
from hyplab.manifolds import (
    Flavor,
    PairRelation,
    classify_pair,
    contraction_check,
    default_alpha,
    family_constants,
    local_manifold,
    rates,
)
from hyplab.torus import TorusPoint, distance, exp

CAT_LAMBDA = 0.3819660112501051
P = TorusPoint(0.3, 0.4)


def test_linear_manifold_is_straight(cat):
    m = local_manifold(cat, 0, P, "unstable", 0.05)
    assert np.all(m.graph == 0)
    assert m.axis[1] / m.axis[0] == pytest.approx(0.6180339887, abs=1e-10)


def test_linear_unstable_contracts_backward(cat):
    m = local_manifold(cat, 0, P, Flavor.UNSTABLE, 0.05)
    q = m.point(0.01)
    for n in range(11):
        d = distance(compose(cat, 0, -n, P), compose(cat, 0, -n, q))
        assert d == pytest.approx(0.01 * CAT_LAMBDA**n, abs=1e-9)


@pytest.mark.parametrize("flavor", ["stable", "unstable"])
def test_perturbed_graph_small_and_lipschitz(perturbed, flavor):
    m = local_manifold(perturbed, 0, P, flavor, 0.05)
    lam, _ = family_constants(perturbed)
    assert m.g(0.0) == 0.0
    assert np.max(np.abs(m.graph)) <= 0.05 * m.epsilon
    assert m.lipschitz < (1 / lam - 1) / 2
    assert m.lipschitz <= m.alpha


@pytest.mark.parametrize("flavor", ["stable", "unstable"])
def test_tangency(perturbed, flavor):
    m = local_manifold(perturbed, 0, P, flavor, 0.05)
    h = m.epsilon / 64
    assert abs(m.g(h) - m.g(0)) / h < 1e-3


def test_unstable_localization_invariance(perturbed):
    m = local_manifold(perturbed, 0, P, "unstable", 0.05)
    back = local_manifold(perturbed, -1, apply_inverse(perturbed, -1, P), "unstable", 0.05)
    s = np.linspace(-0.05, 0.05, 33)
    pre = [apply_inverse(perturbed, -1, TorusPoint.of(x)) for x in m.lift_points(s)]
    assert max(back.transverse_distance(q) for q in pre) < 1e-8


def test_stable_localization_invariance(perturbed):
    # interpolation error scales with epsilon^2 and is larger on this side
    m = local_manifold(perturbed, 0, P, "stable", 0.025)
    fwd = local_manifold(perturbed, 1, apply(perturbed, 0, P), "stable", 0.025)
    s = np.linspace(-0.025, 0.025, 33)
    img = [apply(perturbed, 0, TorusPoint.of(x)) for x in m.lift_points(s)]
    assert max(fwd.transverse_distance(q) for q in img) < 1e-8


def test_continuity_in_base_point(perturbed):
    a = local_manifold(perturbed, 0, P, "unstable", 0.05)
    b = local_manifold(perturbed, 0, exp(P, (1e-3, 0)), "unstable", 0.05)
    assert np.max(np.abs(a.graph - b.graph)) < 1e-2


def test_manifold_csv(perturbed):
    lines = local_manifold(perturbed, 0, P, "stable", 0.02).to_csv().splitlines()
    assert lines[0] == "s,transverse"
    assert len(lines) == 66


def test_epsilon_validation(cat):
    with pytest.raises(ValidationError):
        local_manifold(cat, 0, P, "stable", 0.2)


def test_epsilon_too_large_for_alpha(perturbed):
    with pytest.raises(EpsilonTooLarge):
        local_manifold(perturbed, 0, P, "unstable", 0.05, alpha=1e-6)


def test_default_alpha(cat):
    assert default_alpha(cat) == pytest.approx(0.25 * (1 / CAT_LAMBDA - 1) / 2, rel=1e-6)


def test_contraction_check_cat_stable_is_tight(cat):
    m = local_manifold(cat, 0, P, "stable", 0.05)
    rows = contraction_check(cat, m, m.point(0.02), 12, K=1.0, zeta=CAT_LAMBDA)
    assert rows[0].measured == pytest.approx(0.02) and not rows[0].violated
    for r in rows:
        assert r.measured == pytest.approx(0.02 * CAT_LAMBDA**r.n, abs=1e-11)
        assert not r.violated


def test_contraction_check_perturbed_defaults(perturbed):
    m = local_manifold(perturbed, 0, P, "unstable", 0.05)
    rows = contraction_check(perturbed, m, m.point(-0.03), 7)
    assert not any(r.violated for r in rows)


def test_contraction_check_degenerate_and_off_manifold(cat):
    m = local_manifold(cat, 0, P, "stable", 0.05)
    assert all(r.measured == 0 for r in contraction_check(cat, m, P, 5))
    with pytest.raises(NotOnManifold):
        contraction_check(cat, m, exp(P, (0.0, 0.01)), 5)


def test_classify_pair(cat):
    s = splitting_at(cat, 0, P)
    assert classify_pair(cat, 0, P, P, 0.01, 20) is PairRelation.BOTH
    assert classify_pair(cat, 0, P, exp(P, 1e-3 * np.asarray(s.e_s)), 0.01, 20) is PairRelation.STABLE
    assert classify_pair(cat, 0, P, exp(P, 1e-3 * np.asarray(s.e_u)), 0.01, 20) is PairRelation.UNSTABLE
    assert classify_pair(cat, 0, P, exp(P, (0.1, 0.1)), 0.01, 20) is PairRelation.NEITHER
    with pytest.raises(ValidationError):
        classify_pair(cat, 0, P, P, 0.03, 20, epsilon=0.05)


def test_rates_recover_exponents(cat):
    s = splitting_at(cat, 0, P)
    r = rates(cat, 0, P, exp(P, 1e-3 * np.asarray(s.e_s)), 8)
    assert r.theta == pytest.approx(np.log(1e-3) / 8 + np.log(CAT_LAMBDA), rel=1e-6)
    assert r.delta > r.theta
