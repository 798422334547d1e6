import numpy as np
import pytest

from mixedsde import (
    CoefficientField,
    DomainError,
    DriverSpec,
    GeometricParams,
    GridMismatchError,
    ModelSpec,
    TimeGrid,
    closed_form_geometric,
    closed_form_geometric_batch,
    euler_mixed,
    generate_drivers,
    geometric_convergence_study,
    model_zoo,
    solve_coupled,
    solve_model,
)


def constant_field(value, dim=1, columns=0):
    value = float(value)

    def evaluate(t, x):
        if columns:
            return np.full((len(x), dim, columns), value)
        return np.full((len(x), dim), value)

    return CoefficientField(f"const-{value}", "state", dim, columns, evaluate)


def simple_model(a=0.0, b=0.0, c=0.0, x0=1.0, horizon=1.0):
    return ModelSpec(
        name="simple",
        state_dim=1,
        initial_value=[x0],
        horizon=horizon,
        drift=constant_field(a),
        wiener=constant_field(b, columns=1),
        rough=constant_field(c, columns=1),
        driver=DriverSpec(1, 1, (0.75,)),
    )


# --------------------------------------------------------------------- euler


def test_zero_coefficients_keep_initial_value():
    grid = TimeGrid(1.0, 64)
    out = solve_model(simple_model(), grid, 20, seed=1)
    assert np.all(out.paths.values == 1.0)
    assert out.blowup_count == 0


def test_unit_drift_reproduces_time_exactly():
    grid = TimeGrid(1.0, 128)
    out = solve_model(simple_model(a=1.0, x0=0.0), grid, 5, seed=2)
    for i in range(5):
        np.testing.assert_allclose(out.paths.values[i, :, 0], grid.points, atol=1e-12)


def test_dimension_mismatch_raises():
    grid = TimeGrid(1.0, 16)
    model = simple_model()
    w, z = generate_drivers(model.driver, grid, 4, seed=3)
    with pytest.raises(DomainError):
        euler_mixed(model, grid, w, None)
    other = TimeGrid(1.0, 32)
    w2, z2 = generate_drivers(model.driver, other, 4, seed=3)
    with pytest.raises(GridMismatchError):
        euler_mixed(model, grid, w2, z2)


def test_geometric_euler_tracks_closed_form():
    params = GeometricParams(1.0, 0.1, 0.2, 0.3)
    model = model_zoo("geometric_mixed", mu=0.1, sigma_w=0.2, sigma_b=0.3)
    grid = TimeGrid(1.0, 2**12)
    out = solve_model(model, grid, 100, seed=42)
    exact = closed_form_geometric_batch(params, out.wiener, out.rough)
    rel = np.abs(out.paths.values[:, -1, 0] - exact.values[:, -1, 0]) / exact.values[:, -1, 0]
    assert rel.mean() < 0.01


def test_closed_form_reductions():
    grid = TimeGrid(1.0, 64)
    w, z = generate_drivers(DriverSpec(1, 1, (0.75,)), grid, 1, seed=5)
    flat = closed_form_geometric(
        GeometricParams(2.0, 0.3, 0.0, 0.0), w.path(0), z.path(0)
    )
    np.testing.assert_allclose(flat.values[:, 0], 2.0 * np.exp(0.3 * grid.points))
    gbm = closed_form_geometric(
        GeometricParams(1.0, 0.0, 0.5, 0.0), w.path(0), z.path(0)
    )
    expected = np.exp(-0.125 * grid.points + 0.5 * w.values[0, :, 0])
    np.testing.assert_allclose(gbm.values[:, 0], expected)


def test_malliavin_sensitivity_tracks_price_ratio():
    base, sens = model_zoo("malliavin_linearized", mu=0.1, sigma_w=0.2, sigma_b=0.3)
    grid = TimeGrid(1.0, 512)
    out_x, out_y = solve_coupled(base, sens, grid, seed=7, count=30)
    # the linearized equation shares the linear closed form: Y_t/Y_0 == S_t/S_0
    ratio = out_y.paths.values[:, :, 0] / out_x.paths.values[:, :, 0]
    assert np.abs(ratio / ratio[:, :1] - 1.0).max() < 1e-9


def test_stochvol_with_frozen_volatility_reduces_to_geometric():
    vol, price = model_zoo("stochvol", rho_power=0.2)
    frozen_vol = model_zoo(
        "bounded_trig", state_dim=2, drift_amp=0.0, wiener_amp=0.0, rough_amp=0.0,
        initial_value=np.array([0.2, 0.3]),
    )
    grid = TimeGrid(1.0, 256)
    out_x, out_y = solve_coupled(frozen_vol, price, grid, seed=8, count=40)
    assert np.all(out_x.paths.values[:, -1, 0] == 0.2)
    # constant volatility state: the price stage is the geometric equation
    sigma_w = 0.5 * np.tanh(0.2)
    sigma_b = 0.4 * (1.0 + 0.3**2) ** 0.1
    geom = model_zoo("geometric_mixed", mu=0.05, sigma_w=sigma_w, sigma_b=sigma_b)
    replay = euler_mixed(geom, grid, out_y.wiener, out_y.rough)
    np.testing.assert_allclose(out_y.paths.values, replay.paths.values, rtol=1e-12)


def _zeroed_coupled_fields(price):
    from dataclasses import replace

    def zero_drift(t, x, y):
        return np.zeros_like(y)

    def zero_block(t, x, y):
        return np.zeros((len(y), 1, 1))

    return replace(
        price,
        drift=CoefficientField("zero", "coupled", 1, 0, zero_drift),
        wiener=CoefficientField("zero", "coupled", 1, 1, zero_block),
        rough=CoefficientField("zero", "coupled", 1, 1, zero_block),
        claimed_constants={},
    )


def test_zero_coupled_coefficients_keep_initial_value():
    vol, price = model_zoo("stochvol")
    grid = TimeGrid(1.0, 64)
    _, out_y = solve_coupled(vol, _zeroed_coupled_fields(price), grid, seed=9, count=10)
    assert np.all(out_y.paths.values == 1.0)


def test_grid_halving_errors_shrink():
    rows = geometric_convergence_study(
        GeometricParams(1.0, 0.1, 0.2, 0.3), 0.75, [2**6, 2**7, 2**8, 2**9], 500, seed=42
    )
    errors = [r.mean_abs_terminal_error for r in rows]
    for a, b in zip(errors, errors[1:]):
        assert b < 1.1 * a  # monotone within a 10% noise allowance


def test_positivity_of_geometric_paths():
    model = model_zoo("geometric_mixed", mu=0.5, sigma_w=0.5, sigma_b=0.5)
    out = solve_model(model, TimeGrid(1.0, 1024), 500, seed=10)
    assert out.blowup_count == 0
    assert out.paths.values.min() > 0.0


def test_solution_is_adapted_to_past_increments():
    model = model_zoo("linear_mixed")
    grid = TimeGrid(1.0, 64)
    w, z = generate_drivers(model.driver, grid, 8, seed=11)
    base = euler_mixed(model, grid, w, z)
    cut = 32
    tampered_w = w.values.copy()
    tampered_w[:, cut + 1:, :] += 5.0  # future increments only
    from mixedsde import PathBatch

    out = euler_mixed(model, grid, PathBatch(grid, tampered_w), z)
    np.testing.assert_array_equal(
        base.paths.values[:, : cut + 1, :], out.paths.values[:, : cut + 1, :]
    )
    assert not np.array_equal(base.paths.values[:, cut + 1, :], out.paths.values[:, cut + 1, :])


def test_blowup_is_flagged_not_raised():
    def quad(t, x):
        return x * x

    model = ModelSpec(
        name="quad",
        state_dim=1,
        initial_value=[1.0],
        horizon=1.0,
        drift=CoefficientField("quad", "state", 1, 0, quad),
        wiener=constant_field(0.5, columns=1),
        rough=constant_field(0.0, columns=1),
        driver=DriverSpec(1, 1, (0.75,)),
    )
    out = solve_model(model, TimeGrid(1.0, 1024), 200, seed=9)
    assert 0 < out.blowup_count < 200
    for i in np.flatnonzero(out.blown):
        k = out.first_nonfinite_index[i]
        assert k > 0
        assert np.isfinite(out.paths.values[i, :k, 0]).all()
        assert np.isnan(out.paths.values[i, k:, 0]).all()
    survivors = out.paths.values[~out.blown]
    assert np.isfinite(survivors).all()
