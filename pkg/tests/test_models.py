import numpy as np
import pytest

from mixedsde import (
    CoefficientField,
    CoupledModelSpec,
    DomainError,
    DriverSpec,
    ModelSpec,
    model_zoo,
    coupled_growth_power_bound,
    validate_assumptions,
)


def zero_rough(dim=1):
    def evaluate(t, x):
        return np.zeros((len(x), dim, 1))

    def derivative(t, x):
        return np.zeros((len(x), dim, 1, dim))

    return CoefficientField("zero-rough", "state", dim, 1, evaluate, derivative)


def state_model(drift=None, wiener=None, rough=None, dim=1, claimed=None, claimed_set="A"):
    m = 1 if wiener is not None else 0
    l = 1 if rough is not None else 0
    if l == 0:
        rough = zero_rough(dim)
        l = 1
    return ModelSpec(
        name="adhoc",
        state_dim=dim,
        initial_value=np.zeros(dim),
        horizon=1.0,
        drift=drift or CoefficientField("zero-drift", "state", dim, 0, lambda t, x: np.zeros_like(x)),
        wiener=wiener,
        rough=rough,
        driver=DriverSpec(m, l, (0.75,) * l),
        claimed_set=claimed_set,
        claimed_constants=claimed or {},
    )


# ------------------------------------------------------------------ validators


def test_linear_growth_ratio_saturates_at_box_edge():
    # a(t,x) = x: the A1 ratio |x|/(1+|x|) climbs to R/(1+R) on the box
    drift = CoefficientField("identity", "state", 1, 0, lambda t, x: x)
    model = state_model(drift=drift)
    report = validate_assumptions(model, "A", box_radius=10.0, samples=2000, seed=1)
    assert report.constant("A1") == pytest.approx(10.0 / 11.0, rel=1e-3)
    assert report.verdict == "no-violation-found"


def test_sin_coefficient_bound_and_derivative_constants():
    def c_eval(t, x):
        return np.sin(x)[:, :, None]

    def c_deriv(t, x):
        return np.cos(x)[:, :, None, None]

    model = state_model(
        rough=CoefficientField("sin", "state", 1, 1, c_eval, c_deriv), claimed_set="B"
    )
    report = validate_assumptions(model, "B", box_radius=2.0, samples=2000, seed=2)
    assert 0.99 <= report.constant("B1") <= 1.0
    assert 0.99 <= report.constant("B2") <= 1.0


def test_quadratic_diffusion_lipschitz_constant_is_two_r():
    # b(t,x) = x^2 on the box R=2: sup |x1 + x2| = 4
    def b_eval(t, x):
        return (x * x)[:, :, None]

    model = state_model(wiener=CoefficientField("square", "state", 1, 1, b_eval))
    report = validate_assumptions(model, "A", box_radius=2.0, samples=2000, seed=3)
    assert report.constant("A3") == pytest.approx(4.0, rel=0.02)
    assert report.constant("A3") <= 4.0 + 1e-9


def test_finite_difference_fallback_matches_analytic_derivative():
    def c_eval(t, x):
        return np.sin(x)[:, :, None]

    without = state_model(rough=CoefficientField("sin", "state", 1, 1, c_eval))
    rep_fd = validate_assumptions(without, "A", box_radius=2.0, samples=1000, seed=4)
    assert rep_fd.constant("A2") == pytest.approx(1.0, abs=1e-3)


def test_every_zoo_model_passes_its_claimed_set():
    checks = [
        (model_zoo("linear_mixed"), "A"),
        (model_zoo("bounded_trig"), "B"),
        (model_zoo("geometric_mixed"), "A"),
        (model_zoo("stochvol")[1], "C"),
    ]
    for model, set_id in checks:
        report = validate_assumptions(model, set_id, box_radius=10.0, samples=10_000, seed=5)
        assert report.verdict == "no-violation-found", (
            model.name,
            [(c.condition, c.constant, c.claimed) for c in report.violations()],
        )


def test_validator_raw_maximum_is_monotone_in_samples():
    model = model_zoo("bounded_trig")
    previous = None
    for samples in (1000, 2000, 4000, 8000):
        report = validate_assumptions(model, "B", samples=samples, seed=77)
        raw = {c.condition: c.raw_constant for c in report.conditions}
        if previous is not None:
            for key, value in raw.items():
                assert value >= previous[key] - 1e-12
        previous = raw


def test_planted_violation_is_flagged_with_witness():
    drift = CoefficientField("quad", "state", 1, 0, lambda t, x: x * x)
    model = state_model(drift=drift, claimed={"A1": 1.0})
    report = validate_assumptions(model, "A", box_radius=10.0, samples=2000, seed=6)
    assert report.verdict == "violated"
    bad = {c.condition: c for c in report.conditions}["A1"]
    assert bad.violated
    assert bad.constant > 5.0
    assert abs(bad.witness["x"][0]) > 5.0  # witness sits at large |x|


def test_non_finite_evaluator_is_reported_with_witness():
    def exploding(t, x):
        with np.errstate(over="ignore"):
            return np.exp(x * 50.0)

    model = state_model(drift=CoefficientField("explode", "state", 1, 0, exploding))
    report = validate_assumptions(model, "A", box_radius=10.0, samples=1000, seed=7)
    bad = {c.condition: c for c in report.conditions}["A1"]
    assert bad.violated
    assert bad.constant == float("inf")
    assert "x" in bad.witness


def test_validator_rejects_low_sample_budget_and_wrong_arity():
    model = model_zoo("linear_mixed")
    with pytest.raises(DomainError):
        validate_assumptions(model, "A", samples=10)
    with pytest.raises(DomainError):
        validate_assumptions(model, "C", samples=2000)
    with pytest.raises(DomainError):
        validate_assumptions(model_zoo("stochvol")[1], "B", samples=2000)


# ------------------------------------------------------------------- the zoo


def test_zoo_rejects_unknown_name():
    with pytest.raises(DomainError):
        model_zoo("heston")


def test_geometric_zero_vol_is_constant_model():
    model = model_zoo("geometric_mixed", mu=0.0, sigma_w=0.0, sigma_b=0.0, initial_value=1.0)
    x = np.array([[2.0], [3.0]])
    assert np.all(model.drift(0.3, x) == 0.0)
    assert np.all(model.wiener(0.3, x) == 0.0)
    assert np.all(model.rough(0.3, x) == 0.0)


def test_linear_mixed_zero_matrices_reduce_to_constant_coefficients():
    model = model_zoo(
        "linear_mixed", drift_matrix=0.0, wiener_matrix=0.0, rough_matrix=0.0,
        drift_offset=0.5, wiener_offset=0.25, rough_offset=0.125,
    )
    x = np.array([[1.0], [-7.0]])
    np.testing.assert_allclose(model.drift(0.1, x), 0.5)
    np.testing.assert_allclose(model.wiener(0.1, x), 0.25)
    np.testing.assert_allclose(model.rough(0.1, x), 0.125)


def test_stochvol_pair_wiring():
    vol, price = model_zoo("stochvol", rho_power=0.2)
    assert vol.state_dim == 2
    assert isinstance(price, CoupledModelSpec)
    assert price.base_dim == 2
    assert price.declared_rho == 0.2
    assert not price.share_drivers
    # price coefficients are linear in y
    x = np.array([[0.1, 0.4], [0.2, -1.0]])
    y = np.array([[2.0], [3.0]])
    doubled = price.rough(0.0, x, 2 * y)
    np.testing.assert_allclose(doubled, 2 * price.rough(0.0, x, y))


def test_malliavin_linearized_shares_drivers_and_is_linear():
    base, sens = model_zoo("malliavin_linearized", mu=0.1, sigma_w=0.2, sigma_b=0.3)
    assert sens.share_drivers
    assert sens.driver == base.driver
    x = np.array([[1.5]])
    y = np.array([[4.0]])
    np.testing.assert_allclose(sens.drift(0.0, x, y), 0.1 * y)
    np.testing.assert_allclose(sens.wiener(0.0, x, y)[:, :, 0], 0.2 * y)
    np.testing.assert_allclose(sens.rough(0.0, x, y)[:, :, 0], 0.3 * y)


def test_rho_outside_admissible_range_warns_not_errors():
    bound = coupled_growth_power_bound(0.74)
    with pytest.warns(UserWarning, match="admissible range"):
        model_zoo("stochvol", rho_power=round(bound + 0.05, 3))
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        model_zoo("stochvol", rho_power=0.2)  # inside the range: silent


def test_rho_cap_is_hard_at_two_thirds():
    with pytest.raises(DomainError):
        model_zoo("stochvol", rho_power=0.7)


def test_model_spec_validation():
    with pytest.raises(DomainError):
        ModelSpec(
            name="bad",
            state_dim=1,
            initial_value=[np.nan],
            horizon=1.0,
            drift=CoefficientField("d", "state", 1, 0, lambda t, x: x),
            wiener=None,
            rough=zero_rough(),
            driver=DriverSpec(0, 1, (0.75,)),
        )
    with pytest.raises(DomainError):
        # beta outside (1 - mu, 1/2)
        ModelSpec(
            name="bad-beta",
            state_dim=1,
            initial_value=[0.0],
            horizon=1.0,
            drift=CoefficientField("d", "state", 1, 0, lambda t, x: x),
            wiener=None,
            rough=zero_rough(),
            driver=DriverSpec(0, 1, (0.75,), holder_order=0.74),
            holder_beta=0.1,
        )


def test_probe_catches_shape_bugs():
    broken = ModelSpec(
        name="broken",
        state_dim=2,
        initial_value=[0.0, 0.0],
        horizon=1.0,
        drift=CoefficientField("d", "state", 2, 0, lambda t, x: x[:, :1]),  # wrong width
        wiener=None,
        rough=zero_rough(2),
        driver=DriverSpec(0, 1, (0.75,)),
    )
    with pytest.raises(DomainError):
        broken.probe()
