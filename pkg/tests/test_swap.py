import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvswap.channels import ChannelSpec, lossy_tmss
from cvswap.errors import NonPhysicalState, NotEntangled, SingularConditioning
from cvswap.gaussian import SimpleFormParams, StandardFormParams, random_physical_params, random_physical_simple
from cvswap.measures import epr_opt, log_negativity, purity
from cvswap.swap import (
    BellOutcome,
    GainSetting,
    beam_splitter_cm,
    bell_measurement,
    condition_on_homodyne,
    conditional_cm,
    conditional_mean,
    critical_gain_path,
    critical_path_direction,
    ensemble_cm,
    four_mode_input_cm,
    linear_coefficients,
    optimal_gains,
    optimal_gains_general,
    swap_optimal,
)

SQ2 = np.sqrt(2.0)


def _tmss(r):
    return SimpleFormParams(np.cosh(2 * r), np.cosh(2 * r), np.sinh(2 * r))


def _joint_schur(p, outcome, gains):
    """Reference conditioning written from scratch on (q1, p1, q4, p4, q_u, p_v)."""
    cm = p.cm()
    z = np.zeros((4, 4))
    big = np.block([[cm, z], [z, cm]])
    # rows pick q1, p1, q4, p4, q_u = (q2 - q3)/sqrt2, p_v = (p2 + p3)/sqrt2
    m = np.zeros((6, 8))
    m[0, 0] = m[1, 1] = m[2, 6] = m[3, 7] = 1
    m[4, 2], m[4, 4] = 1 / SQ2, -1 / SQ2
    m[5, 3], m[5, 5] = 1 / SQ2, 1 / SQ2
    j = m @ big @ m.T
    k = j[4:, 4:]
    reg = j[:4, 4:] @ np.linalg.inv(k)
    cond = j[:4, :4] - reg @ j[4:, :4]
    disp = SQ2 * np.array([[-gains.g1q, 0], [0, gains.g1p], [gains.g4q, 0], [0, gains.g4p]])
    return cond, reg @ outcome + disp @ outcome


# gains --------------------------------------------------------------------


def test_gain_setting_variants():
    assert GainSetting.symmetric(0.2).g1 == GainSetting.symmetric(0.2).g4 == 0.2
    one = GainSetting.one_sided(0.4)
    assert (one.g1, one.g4) == (0.0, 0.4)
    assert GainSetting.one_sided(0.4, mode=1).g4 == 0.0
    with pytest.raises(ValueError):
        GainSetting.per_quadrature(0.1, 0.2, 0.1, 0.1).g1
    with pytest.raises(ValueError):
        GainSetting.per_mode(np.inf, 0.0)
    with pytest.raises(ValueError):
        GainSetting.one_sided(0.1, mode=2)


def test_bell_outcome_fields():
    o = BellOutcome(1.0, -2.0)
    assert (o.qu, o.pv) == (1.0, -2.0)


# conditional state ---------------------------------------------------------


def test_conditional_cm_vacuum():
    assert np.allclose(conditional_cm(StandardFormParams(1, 1, 0, 0)), np.eye(4))


def test_conditional_cm_tmss():
    r = 0.5
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    cm = conditional_cm(_tmss(r))
    d = ch - sh**2 / (2 * ch)
    k = sh**2 / (2 * ch)
    assert np.allclose(np.diag(cm), d, atol=1e-14)
    assert cm[0, 2] == pytest.approx(k) and cm[1, 3] == pytest.approx(-k)


def test_conditional_cm_matches_reference_conditioning(rng):
    for _ in range(50):
        p = random_physical_params(rng)
        ref, _ = _joint_schur(p, np.zeros(2), GainSetting.per_mode(0, 0))
        assert np.abs(conditional_cm(p) - ref).max() < 1e-9


def test_conditional_cm_rejects_unphysical():
    with pytest.raises(NonPhysicalState):
        conditional_cm(StandardFormParams(1, 1, 0.5, -0.5))


def test_conditional_mean_zero_record(rng):
    p = random_physical_params(rng)
    assert np.allclose(conditional_mean(p, (0, 0), GainSetting.per_mode(0.3, -0.7)), 0)


def test_conditional_mean_vanishes_at_optimal_gains(rng):
    p = lossy_tmss(ChannelSpec(1.0, 1.0, np.exp(-0.5)))
    g = optimal_gains(p)
    for _ in range(20):
        assert np.abs(conditional_mean(p, rng.normal(scale=3, size=2), g)).max() < 1e-12


def test_conditional_mean_matches_reference_conditioning(rng):
    for _ in range(50):
        p = random_physical_params(rng)
        out = rng.normal(scale=2, size=2)
        g = GainSetting.per_mode(*rng.uniform(-1, 1, size=2))
        _, ref = _joint_schur(p, out, g)
        assert np.abs(conditional_mean(p, out, g) - ref).max() < 1e-9
        _, ref0 = _joint_schur(p, out, GainSetting.per_mode(0, 0))
        assert np.abs(conditional_mean(p, out, GainSetting.per_mode(0, 0)) - ref0).max() < 1e-9


def test_linear_coefficients_equal_inverse_cm_times_mean(rng):
    # the closed-form linear terms of the Wigner exponent are inv(cm) @ mean
    for _ in range(50):
        p = random_physical_params(rng)
        out = rng.normal(scale=2, size=2)
        g = GainSetting.per_mode(*rng.uniform(-1, 1, size=2))
        lhs = np.linalg.solve(conditional_cm(p), conditional_mean(p, out, g))
        assert np.allclose(lhs, linear_coefficients(p, out, g), atol=1e-10)


# constructive route -------------------------------------------------------


def test_constructive_route_vacuum():
    res = bell_measurement(StandardFormParams(1, 1, 0, 0))
    assert np.allclose(res.state.cm, np.eye(4))
    assert np.allclose(res.measured_cm, np.eye(2))


def test_constructive_route_matches_closed_form(rng):
    for _ in range(100):
        p = random_physical_params(rng)
        built = condition_on_homodyne(beam_splitter_cm(four_mode_input_cm(p))).state.cm
        assert np.abs(built - conditional_cm(p)).max() < 1e-12


def test_measured_pair_covariance_for_tmss():
    r = 0.7
    res = bell_measurement(_tmss(r))
    assert np.allclose(np.diag(res.measured_cm), np.cosh(2 * r))
    assert res.measured_cm[0, 1] == pytest.approx(0.0)
    assert res.outcome_density((0, 0)) == pytest.approx(1 / (2 * np.pi * np.cosh(2 * r)))


def test_beam_splitter_is_symplectic():
    from cvswap.swap import beam_splitter_symplectic

    s = beam_splitter_symplectic()
    omega = np.kron(np.eye(4), np.array([[0, 1], [-1, 0]]))
    assert np.allclose(s @ omega @ s.T, omega)


def test_singular_conditioning():
    cm = np.eye(8)
    cm[2, 2] = cm[5, 5] = 0.0
    with pytest.raises(SingularConditioning):
        condition_on_homodyne(cm)


# ensemble state ------------------------------------------------------------


def test_ensemble_zero_gains_decorrelates(rng):
    p = random_physical_params(rng)
    assert np.allclose(ensemble_cm(p, GainSetting.per_mode(0, 0)), np.diag([p.a, p.a, p.b, p.b]))


def test_ensemble_entries_per_mode():
    a, b, c = 3.0, 2.0, 1.5
    g1, g4 = 0.2, -0.4
    cm = ensemble_cm(SimpleFormParams(a, b, c), GainSetting.per_mode(g1, g4))
    assert cm[0, 0] == pytest.approx(a + (a + b) * g1**2 - 2 * c * g1)
    assert cm[0, 2] == pytest.approx(c * (g1 + g4) - g1 * g4 * (a + b))
    assert cm[1, 3] == pytest.approx(-c * (g1 + g4) + g1 * g4 * (a + b))
    assert cm[3, 3] == pytest.approx(b + (a + b) * g4**2 - 2 * c * g4)


def test_ensemble_equals_conditional_at_optimal_gains(rng):
    for _ in range(20):
        p = random_physical_simple(rng)
        assert np.abs(ensemble_cm(p, optimal_gains(p)) - conditional_cm(p)).max() < 1e-12


def test_ensemble_equals_average_over_records(rng):
    # Law of total covariance: conditional cm + covariance of the displaced mean
    p = random_physical_params(rng)
    g = GainSetting.per_quadrature(0.3, -0.1, 0.5, 0.2)
    res = bell_measurement(p)
    lin = res.gain + g.displacement_matrix()
    assert np.allclose(ensemble_cm(p, g), conditional_cm(p) + lin @ res.measured_cm @ lin.T, atol=1e-12)


def test_averaging_only_adds_noise(rng):
    for _ in range(100):
        p = random_physical_params(rng)
        g = GainSetting.per_quadrature(*rng.uniform(-1.5, 1.5, size=4))
        assert np.linalg.eigvalsh(ensemble_cm(p, g) - conditional_cm(p)).min() >= -1e-9


# optimal gains -------------------------------------------------------------


def test_optimal_gains_examples():
    g = optimal_gains(SimpleFormParams(1, 1, 0))
    assert (g.g1, g.g4) == (0.0, 0.0)
    r = 0.4
    g = optimal_gains(_tmss(r))
    assert g.g1 == pytest.approx(np.sinh(2 * r) / (2 * np.cosh(2 * r)))
    assert g.g4 == g.g1


def test_optimal_gains_general_examples(rng):
    g = optimal_gains_general(StandardFormParams(2, 3, 1, -0.5))
    assert (g.g1q, g.g1p, g.g4q, g.g4p) == pytest.approx((0.2, 0.1, 0.2, 0.1))
    for _ in range(10):
        assert np.abs(conditional_mean(StandardFormParams(2, 3, 1, -0.5), rng.normal(size=2), g)).max() < 1e-12
    g0 = optimal_gains_general(StandardFormParams(1, 1, 0, 0))
    assert (g0.g1q, g0.g1p, g0.g4q, g0.g4p) == (0, 0, 0, 0)
    simple = SimpleFormParams(2, 3, 1.2)
    gs, gg = optimal_gains(simple), optimal_gains_general(simple)
    assert (gg.g1q, gg.g1p, gg.g4q, gg.g4p) == pytest.approx((gs.g1, gs.g1, gs.g4, gs.g4))


def test_swap_optimal_examples(rng):
    assert swap_optimal(SimpleFormParams(1, 1, 0)) == SimpleFormParams(1, 1, 0)
    for _ in range(20):
        p = random_physical_simple(rng)
        out = swap_optimal(p)
        assert np.allclose(out.cm(), ensemble_cm(p, optimal_gains(p)), atol=1e-12)
        assert purity(out) == pytest.approx(purity(p), abs=1e-12)


def test_conditional_purity_formula(rng):
    for _ in range(50):
        p = random_physical_params(rng)
        mu = 1 / np.sqrt((p.a * p.b - p.c_minus**2) * (p.a * p.b - p.c_plus**2))
        assert purity(conditional_cm(p)) == pytest.approx(mu, abs=1e-12)


def test_one_sided_gain_matches_epr_but_loses_purity():
    # the best one-sided gain g4 = 2c/(a+b) lies on the critical path; for a
    # pure two-mode squeezed input it reaches the optimal EPR variance, and
    # the price is paid in purity only
    from cvswap.experiment import best_one_sided_gain

    p = _tmss(1.0)
    g = best_one_sided_gain(p)
    assert g.g4 == pytest.approx(np.tanh(2.0), abs=1e-8)
    one = ensemble_cm(p, g)
    best = ensemble_cm(p, optimal_gains(p))
    margin = epr_opt(one).value - epr_opt(best).value
    assert abs(margin) < 1e-9
    assert purity(one) < purity(best) - 0.4


def test_one_sided_gain_loses_entanglement_for_asymmetric_input():
    from cvswap.experiment import best_one_sided_gain
    from cvswap.measures import gaussian_eof

    p = lossy_tmss(ChannelSpec(1.5, 0.8, 0.6))
    one = ensemble_cm(p, best_one_sided_gain(p))
    best = swap_optimal(p)
    assert gaussian_eof(one) < gaussian_eof(best) - 0.05
    assert log_negativity(one) < log_negativity(best) - 0.05


# critical path -------------------------------------------------------------


def test_critical_path_through_optimum():
    p = SimpleFormParams(3.0, 2.0, 2.0)
    g0, gopt = critical_gain_path(p, 0.0), optimal_gains(p)
    assert (g0.g1, g0.g4) == pytest.approx((gopt.g1, gopt.g4))


def test_critical_path_symmetric_case():
    a, c, t = 2.0, 1.5, 0.03
    g = critical_gain_path(SimpleFormParams(a, a, c), t)
    assert (g.g1, g.g4) == pytest.approx((c / (2 * a) + 2 * c**2 * t, c / (2 * a) - 2 * c**2 * t))


def test_critical_path_keeps_log_negativity():
    p = lossy_tmss(ChannelSpec(0.8, 0.9, 0.6))
    ts = np.linspace(-0.1, 0.1, 11) * (p.a + p.b) / p.c**2
    vals = [log_negativity(ensemble_cm(p, critical_gain_path(p, t))) for t in ts]
    assert np.ptp(vals) < 1e-9
    n = critical_path_direction(p)
    assert np.dot(n, [1.0, 0.0]) != 0


def test_critical_path_requires_entanglement():
    with pytest.raises(NotEntangled):
        critical_gain_path(SimpleFormParams(2, 2, 0.5), 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_general_gains_reproduce_conditional_state(seed):
    p = random_physical_params(np.random.default_rng(seed))
    assert np.abs(ensemble_cm(p, optimal_gains_general(p)) - conditional_cm(p)).max() < 1e-12
