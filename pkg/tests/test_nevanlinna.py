import math
import random
from fractions import Fraction

import numpy as np
import pytest

from nevanlinna import (
    EllipticModel,
    HolomorphicSample,
    NevanlinnaError,
    calculus_lemma_probe,
    characteristic,
    circle_average,
    counting_function,
    curvature_identity_check,
    defect_estimate,
    first_main_theorem_gap,
    fit_slope,
    green_identity_check,
    integrated_average,
    log_circle_average,
    log_derivative_ratio,
    plugin_sample,
    polynomial_roots,
    proximity_function,
    radius_grid,
    rational_sample,
    sample_from_text,
    shifted_reciprocal,
)
from polycore import Polynomial
from polytext import parse_polynomial


def _rational(num, den="1"):
    return rational_sample(parse_polynomial(num), parse_polynomial(den))


# ----------------------------
# Grids and averages
# ----------------------------


def test_radius_grid_forms():
    log_grid = radius_grid("log:4", 1.0, 1000.0)
    assert log_grid == pytest.approx([1.0, 10.0, 100.0, 1000.0])
    assert radius_grid("lin:3", 1.0, 3.0) == pytest.approx([1.0, 2.0, 3.0])
    assert radius_grid("5, 10,20") == [5.0, 10.0, 20.0]
    for bad in ["log:4", "3,2", "abc", "lin:1", "0,1"]:
        with pytest.raises(NevanlinnaError):
            radius_grid(bad, 1.0, None if bad == "log:4" else 10.0)


def test_circle_average_basics():
    assert circle_average(lambda z: 3.0, 2.0, 64).value == pytest.approx(3.0)
    avg = circle_average(lambda z: z.real, 5.0, 64)
    assert abs(avg.value) < 1e-12
    assert avg.error < 1e-12
    with pytest.raises(NevanlinnaError):
        circle_average(lambda z: 1.0, 1.0, 5)
    with pytest.raises(NevanlinnaError):
        circle_average(lambda z: 1.0, 0.0, 8)


def test_jensen_average_of_log_modulus():
    value = circle_average(lambda z: np.log(np.abs(z**2 + 1)), 2.0).value
    assert value == pytest.approx(math.log(4.0), abs=1e-10)


def test_radial_nudge_on_a_zero():
    # log|zeta - 1| is -inf at the node zeta = 1
    avg = circle_average(lambda z: np.log(np.abs(z - 1)), 1.0, 512)
    assert abs(avg.value) < 0.05
    with pytest.raises(NevanlinnaError):
        circle_average(lambda z: np.full(z.shape, np.inf), 1.0, 16)


def test_log_circle_average():
    assert log_circle_average(lambda z: np.abs(z) ** 2, 3.0, 64) == pytest.approx(9.0)
    with pytest.raises(NevanlinnaError):
        log_circle_average(lambda z: np.log(np.abs(z - 1)), 1.0, 8)


def test_fit_slope():
    assert fit_slope([0, 1, 2], [1, 3, 5]) == pytest.approx(2.0)
    with pytest.raises(NevanlinnaError):
        fit_slope([1], [1])


# ----------------------------
# Samples
# ----------------------------


def test_polynomial_roots_with_origin():
    roots = polynomial_roots(parse_polynomial("z^3 - z^2"))
    assert roots[0] == (0j, 2)
    assert len(roots) == 2
    assert roots[1][0] == pytest.approx(1.0)
    assert roots[1][1] == 1


def test_rational_sample_reduces_common_factors():
    F = _rational("z^2 - 1", "z - 1")
    assert F.denominator.is_constant()
    assert F.poles == []
    assert F.degree == 1
    assert F(np.array([2.0]))[0] == pytest.approx(3.0)
    with pytest.raises(NevanlinnaError):
        rational_sample(parse_polynomial("z"), Polynomial.zero(("z",)))
    with pytest.raises(NevanlinnaError):
        rational_sample(parse_polynomial("z*w"))


def test_sample_from_text():
    F = sample_from_text("rational:(z^2+1)/(z-3)")
    assert F.degree == 2
    assert [m for _, m in F.poles] == [1]
    assert F.poles[0][0] == pytest.approx(3.0)
    G = sample_from_text("rational:1/2*z")
    assert G.poles == [] and G.degree == 1
    with pytest.raises(NevanlinnaError):
        sample_from_text("poly:z")
    with pytest.raises(NevanlinnaError):
        sample_from_text("rational:z +")


def test_plugin_sample_validation():
    F = plugin_sample(lambda z: 1 / (z - 0.5), [(0.5, 1)], 10.0, label="simple pole")
    assert counting_function(F, 1.0) == pytest.approx(math.log(2.0))
    with pytest.raises(NevanlinnaError):
        counting_function(F, 20.0)
    with pytest.raises(NevanlinnaError):
        plugin_sample(lambda z: z, [(0.5, 0)], 10.0)
    with pytest.raises(NevanlinnaError):
        plugin_sample(lambda z: z, [], 0.0)
    assert F.to_json()["poles"] == [{"re": 0.5, "im": 0.0, "mult": 1}]


def test_shifted_reciprocal_of_constant_is_undefined():
    with pytest.raises(NevanlinnaError):
        shifted_reciprocal(_rational("2"), 2)
    with pytest.raises(NevanlinnaError):
        shifted_reciprocal(plugin_sample(lambda z: z, [], 5.0), 1)


# ----------------------------
# Counting, proximity, characteristic
# ----------------------------


def test_counting_function_examples():
    assert counting_function(_rational("1", "z - 1"), math.e) == pytest.approx(1.0)
    cubed = _rational("1", "(z - 1)^3")
    assert counting_function(cubed, math.e) == pytest.approx(3.0)
    assert counting_function(cubed, math.e, truncation=2) == pytest.approx(2.0)
    two = _rational("1", "(z - 1)^2*(z - 2)")
    assert counting_function(two, 4.0) == pytest.approx(2 * math.log(4.0) + math.log(2.0))
    assert counting_function(two, 0.5) == 0.0
    origin = _rational("1", "z^2")
    assert counting_function(origin, 3.0) == pytest.approx(2 * math.log(3.0))
    with pytest.raises(NevanlinnaError):
        counting_function(cubed, 1.0, truncation=0)


def test_proximity_function():
    F = _rational("z")
    assert proximity_function(F, 2.0).value == pytest.approx(math.log(2.0))
    assert proximity_function(F, 2.0, a=0).value == pytest.approx(0.0, abs=1e-12)
    assert proximity_function(F, 0.5, a=0).value == pytest.approx(math.log(2.0))


def test_characteristic_of_identity_and_inverse():
    radii = [2.0, 5.0]
    for F in (_rational("z"), _rational("1", "z")):
        profile = characteristic(F, radii, 256)
        assert profile.t == pytest.approx([math.log(r) for r in radii], abs=1e-10)


def test_characteristic_degree_slope():
    F = sample_from_text("rational:(z^2+1)/(z-3)")
    radii = radius_grid("log:32", 1.0, 1000.0)
    profile = characteristic(F, radii, truncation=1, proximity_to=None)
    check = profile.degree_check
    assert check["ok"] and check["expected"] == 2 and check["points"] == 8
    assert check["slope"] == pytest.approx(2.0, abs=1e-6)
    # T = 2 log r - log 3 once r > 3
    assert profile.t[-1] == pytest.approx(2 * math.log(1000.0) - math.log(3.0), abs=1e-8)
    rec = profile.records()[-1]
    assert rec["N_truncated"] == pytest.approx(rec["N_term"])
    assert rec["m"] is None


@pytest.mark.parametrize("a", [2, 1j])
def test_first_main_theorem_gap_is_bounded(a):
    F = _rational("20*(z - 1/8)*(z + 1/4)", "z - 1/5")
    report = first_main_theorem_gap(F, a, [1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    assert abs(report["slope"]) < 0.02
    assert max(report["gaps"]) - min(report["gaps"]) < 0.05


def _random_rational(rng):
    z = Polynomial.variable("z")
    used = set()

    def roots(count):
        out = []
        while len(out) < count:
            r = Fraction(rng.randint(-9, 9), rng.randint(2, 12))
            if r not in used:
                used.add(r)
                out.append(r)
        return out

    num = Polynomial.constant(Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 2)), ("z",))
    degree = rng.randint(1, 3)
    for r in roots(degree):
        num = num * (z - r)
    den = Polynomial.constant(1, ("z",))
    for s in roots(rng.randint(0, degree - 1)):
        den = den * (z - s)
    return rational_sample(num, den)


RANDOM_RATIONALS = [_random_rational(random.Random(31 + i)) for i in range(20)]


@pytest.mark.parametrize("a", [0, 1, 1j])
@pytest.mark.parametrize("index", range(len(RANDOM_RATIONALS)))
def test_first_main_theorem_gap_on_random_rationals(index, a):
    F = RANDOM_RATIONALS[index]
    report = first_main_theorem_gap(F, a, radius_grid("log:32", 1.0, 1000.0))
    # |T(r, 1/(F - a)) - T(r, F) + log|c|| <= log+|a| + log 2
    assert max(report["gaps"]) - min(report["gaps"]) <= 2 * math.log(2.0) + 0.05
    assert abs(report["slope"]) < 0.35
    # the error term settles once r clears every zero and pole
    tail = report["gaps"][-8:]
    assert max(tail) - min(tail) < 0.05


def test_log_derivative_is_small_against_characteristic():
    F = sample_from_text("rational:(z^2+1)/(z-3)")
    ratios = log_derivative_ratio(F, [4.0, 10.0, 100.0])
    assert ratios[-1] < 0.01
    assert all(r >= 0 for r in ratios)


# ----------------------------
# Elliptic model
# ----------------------------


def test_theta_quasi_periodicity():
    report = EllipticModel(tau=1j).transformation_residual(count=20)
    assert report["residual_1"] < 1e-12
    assert report["residual_tau"] < 1e-12
    assert report["series_gap"] < 1e-8
    skew = EllipticModel(tau=0.3 + 1.1j, point=0.25 + 0.1j).transformation_residual(count=10)
    assert skew["residual_tau"] < 1e-12


def test_theta_vanishes_on_the_divisor():
    model = EllipticModel(tau=1j, point=0.2 + 0.3j)
    assert abs(model.theta(np.array([model.point + model.shift]))[0]) < 1e-12
    assert model.log_section_norm(np.array([1.7 + 0.4j]))[0] <= model.norm_constant() + 0.05
    with pytest.raises(NevanlinnaError):
        EllipticModel(tau=-1j)
    with pytest.raises(NevanlinnaError):
        model.transformation_exponent(0j, "2")


def test_defect_ratio_decreases():
    profile = defect_estimate(EllipticModel(tau=1j), 1.0, [5.0, 10.0, 20.0, 40.0])
    ratios = profile.ratios
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.05
    assert 1.9 <= profile.growth_exponent() <= 2.1
    # T = pi (r^2 / 2 + 1/4) for tau = i, c = 1
    assert profile.T[-1] == pytest.approx(math.pi * (40.0**2 / 2 + 0.25), rel=1e-9)
    assert profile.records()[0]["o1"] == profile.norm_constant
    with pytest.raises(NevanlinnaError):
        defect_estimate(EllipticModel(), 0, [1.0])


@pytest.mark.parametrize("tau", [1j, 0.3 + 1.1j])
@pytest.mark.parametrize("c", [1.0, 0.5 + 0.5j, 2j])
def test_defect_ratios_nonnegative_and_bounded(tau, c):
    profile = defect_estimate(EllipticModel(tau=tau, point=0.1 + 0.2j), c, radius_grid("log:8", 5.0, 80.0))
    assert all(0.0 <= ratio <= 0.5 for ratio in profile.ratios)
    assert profile.ratios[-1] < profile.ratios[0]
    assert all(m >= 0 for m in profile.m)


# ----------------------------
# Identity checks
# ----------------------------


@pytest.mark.parametrize(
    "sample",
    [
        HolomorphicSample.from_coefficients([0, 1], "z"),
        HolomorphicSample.from_polynomial(parse_polynomial("z^2")),
        HolomorphicSample(np.exp, np.exp, "exp"),
    ],
)
def test_curvature_identity(sample):
    report = curvature_identity_check(sample)
    assert report["residual"] < 1e-4
    assert report["points"] > 1000


def test_curvature_identity_detects_wrong_derivative():
    wrong = HolomorphicSample(lambda z: z, lambda z: 2 * z, "z with a bad derivative")
    assert curvature_identity_check(wrong)["residual"] > 0.1
    with pytest.raises(NevanlinnaError):
        curvature_identity_check(wrong, h=0)


def test_green_identity_for_squared_modulus():
    for r in (1.0, 3.0):
        report = green_identity_check(lambda z: np.abs(z) ** 2, lambda z: 4.0 + 0 * z.real, r, 64)
        assert report["lhs"] == pytest.approx(r * r / 2, rel=1e-4)
        assert report["residual"] < 1e-4 * r * r


def test_integrated_average_of_constant():
    # I_r(1) = pi r^2 / 2
    assert integrated_average(lambda z: 1.0 + 0 * z.real, 2.0, 16) == pytest.approx(2 * math.pi, rel=1e-4)


def test_calculus_lemma_probe():
    report = calculus_lemma_probe(lambda z: np.abs(z) ** 2, [1.0, 2.0, 5.0, 10.0, 20.0], nodes=64, radial_nodes=64)
    assert report.violating_radii == []
    assert 1.0 < report.empirical_constant < 2.0
    assert report.lhs == pytest.approx([1.0, 4.0, 25.0, 100.0, 400.0])
    strict = calculus_lemma_probe(lambda z: np.abs(z) ** 2, [1.0, 2.0], constant=0.5, nodes=64, radial_nodes=64)
    assert strict.violating_radii
    assert strict.to_json()["constant"] == 0.5
