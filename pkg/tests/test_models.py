import numpy as np
import pytest
from pytest import raises

from ffmonodromy import (
    PendulumPotential,
    PhasePoint,
    builtin_system,
    classify_singular_point,
    pendulum_system,
    singular_fiber_census,
)
from ffmonodromy.errors import NotCritical, NotSingular, UnsupportedPotential
from ffmonodromy.models import (
    fd_gradient,
    fd_hessian,
    focus_focus_values,
    gram_determinant,
    poisson_bracket,
    weight_rule,
    weights_from_generator,
)

SYSTEMS = ["linear", "pendulum", "pendulum2", "modified"]


def random_points(system, rng, n):
    """Random chart-valid points; spherical chart for pendulums."""
    out = []
    while len(out) < n:
        if system.name == "linear":
            out.append(PhasePoint(rng.normal(size=4)))
        else:
            z = rng.uniform(-0.95, 0.95)
            out.append(PhasePoint(np.array([z, rng.normal(), rng.uniform(-np.pi, np.pi), rng.normal()]),
                                  "spherical"))
    return out


class TestPotential:
    def test_trailing_zeros_trimmed(self):
        assert PendulumPotential((0.0, 1.0, 0.0)).coefficients == (0.0, 1.0)

    def test_degree_limit(self):
        with raises(UnsupportedPotential):
            PendulumPotential(tuple(range(1, 9)))

    def test_modified(self):
        V = PendulumPotential.modified(2.0)
        assert V(1.0) == pytest.approx(0.75)
        with raises(UnsupportedPotential):
            PendulumPotential.modified(0.0)

    def test_non_finite(self):
        with raises(UnsupportedPotential):
            PendulumPotential((np.nan,))


class TestMomentMap:
    @pytest.mark.parametrize("name", SYSTEMS)
    def test_gradients_match_finite_differences(self, name, rng):
        system = builtin_system(name)
        for p in random_points(system, rng, 20):
            exact = system.gradients(p)
            fd = fd_gradient(system, p)
            assert np.allclose(fd, exact, rtol=1e-6, atol=1e-6 * max(1.0, np.abs(exact).max()))

    @pytest.mark.parametrize("name", SYSTEMS)
    def test_poisson_commutation(self, name, rng):
        system = builtin_system(name)
        for p in random_points(system, rng, 100):
            g = system.gradients(p)
            assert abs(poisson_bracket(g[0], g[1])) < 1e-8

    def test_hemisphere_and_spherical_agree(self, pendulum, rng):
        for p in random_points(pendulum, rng, 20):
            q = pendulum.to_hemisphere(p)
            assert np.allclose(pendulum.moment_map(q), pendulum.moment_map(p), atol=1e-12)
            back = pendulum.to_spherical(q)
            assert np.allclose(pendulum.wrap_difference(back.coords, p.coords), 0.0, atol=1e-10)

    def test_linear_values(self, linear):
        assert np.allclose(linear.moment_map(PhasePoint(np.zeros(4))), 0.0)
        assert np.allclose(linear.moment_map(PhasePoint([1.0, 1.0, 0.0, 0.0])), [1.0, 0.0])
        assert np.allclose(linear.moment_map(PhasePoint([1.0, 0.0, 0.0, 1.0])), [0.0, 1.0])

    @pytest.mark.parametrize("name", SYSTEMS)
    def test_point_on_fiber(self, name):
        system = builtin_system(name)
        value = np.array(focus_focus_values(system)[0]) + [0.1, 0.05]
        for phase in (0.0, 0.3, 0.8):
            p = system.point_on_fiber(value, phase=phase, angle=0.4)
            assert np.allclose(system.moment_map(p), value, atol=1e-10)

    def test_pole_values_and_stability(self, pendulum, pendulum2, modified1):
        assert pendulum.pole_is_unstable(1) and not pendulum.pole_is_unstable(-1)
        assert pendulum2.pole_is_unstable(1) and pendulum2.pole_is_unstable(-1)
        assert np.allclose(modified1.pole_values(), [[0.5, 0.0], [-1.5, 0.0]])

    def test_instability_hessian_oracle(self, pendulum2):
        # the position block of the pole Hessian is negative definite
        for sp in pendulum2.singular_points:
            hess = fd_hessian(pendulum2, sp)[0]
            block = hess[np.ix_([0, 2], [0, 2])]
            assert np.all(np.linalg.eigvalsh(block) < -1.0)

    def test_relative_equilibria_are_critical(self, pendulum, rng):
        for j in rng.uniform(-1.0, 1.0, 5):
            for z in pendulum.relative_equilibria(j):
                dV = pendulum.potential.derivative(z) + j * j * z / (1 - z * z) ** 2
                assert abs(dV) < 1e-9


class TestClassification:
    def test_linear_origin_is_exact(self, linear):
        rep = classify_singular_point(linear, linear.singular_points[0])
        assert rep.classification == "nondegenerate-focus-focus"
        assert np.allclose(rep.quadratic_coefficients, (1, 0, 0, 1), atol=1e-12)
        assert abs(rep.determinant - 1.0) < 1e-10
        assert rep.weights == (1, -1)

    def test_standard_pendulum_north_pole(self, pendulum):
        rep = classify_singular_point(pendulum, pendulum.singular_points[0])
        assert rep.classification == "nondegenerate-focus-focus"
        assert rep.weights == (1, -1)

    def test_standard_pendulum_fd_hessian_agrees(self, pendulum):
        p = pendulum.singular_points[0]
        exact = classify_singular_point(pendulum, p)
        fd = classify_singular_point(pendulum, p, use_exact=False)
        assert fd.classification == exact.classification
        assert abs(fd.determinant - exact.determinant) < 1e-6

    def test_modified_pole_is_degenerate(self, modified1):
        p = modified1.singular_points[0]
        rep = classify_singular_point(modified1, p)
        assert rep.classification == "degenerate"
        assert abs(rep.determinant) < 1e-8
        assert rep.weights == (1, -1)

    def test_modified_pole_hessian_oracle(self, modified1):
        # central differences reproduce the exact quadratic part, whose
        # position block vanishes: the source of the degeneracy
        p = modified1.singular_points[0]
        fd = fd_hessian(modified1, p)
        exact = modified1.hessians(p)
        assert np.max(np.abs(fd - exact)) < 1e-7
        assert np.max(np.abs(exact[0][np.ix_([0, 2], [0, 2])])) < 1e-14
        assert abs(gram_determinant(exact)) < 1e-16

    def test_regular_point_raises(self, pendulum):
        with raises(NotSingular):
            classify_singular_point(pendulum, pendulum.point_on_fiber((1.2, 0.1)))

    def test_generator_weights(self):
        assert weights_from_generator(np.eye(4)) == (1, 1)
        assert weights_from_generator(np.diag([1.0, 1.0, 4.0, 4.0])) == (4, 1)

    def test_weight_rule(self):
        assert weight_rule((1, -1)) is None
        assert "definite" in weight_rule((1, 1))
        assert "free" in weight_rule((2, -1))
        assert "isolated" in weight_rule((1, 0))


class TestCensus:
    def test_standard(self, pendulum):
        assert singular_fiber_census(pendulum, (1.0, 0.0)) == (1, [1])

    def test_two_poles(self, pendulum2):
        assert singular_fiber_census(pendulum2, (1.0, 0.0)) == (2, [1, 1])

    def test_linear(self, linear):
        assert singular_fiber_census(linear, (0.0, 0.0)) == (1, [1])

    def test_not_critical(self, pendulum):
        with raises(NotCritical):
            singular_fiber_census(pendulum, (0.5, 0.0))

    def test_two_distinct_values(self):
        system = pendulum_system((0.0, 0.2, 1.0))
        vals = sorted(v[0] for v in focus_focus_values(system))
        assert vals == pytest.approx([0.8, 1.2])
        assert singular_fiber_census(system, (1.2, 0.0)) == (1, [1])

    @pytest.mark.parametrize("eps", [1e-11, -3e-11])
    def test_stable_under_tiny_perturbation(self, eps):
        std = pendulum_system((eps, 1.0 + eps))
        assert singular_fiber_census(std, std.moment_map(std.singular_points[0]))[0] == 1
        sq = pendulum_system((0.0, eps, 1.0))
        assert singular_fiber_census(sq, (1.0, 0.0))[0] == 2
