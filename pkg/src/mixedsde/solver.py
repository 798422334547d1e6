"""Euler scheme for mixed equations and the coupled second stage.

One left-point scheme serves both integral types: it matches the Ito
convention for the Wiener increments and converges to the pathwise Young
integral against the rough increments whenever their Holder order exceeds
1/2. Blowup is data, not an exception: a path that leaves the finite range
is truncated (NaN from the first bad index on) and flagged, so moment
studies can count and exclude it honestly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatchError
from .fbm import generate_drivers
from .grids import TimeGrid
from .models import CoupledModelSpec, ModelSpec
from .paths import DiscretePath, PathBatch

__all__ = [
    "SolveOutput",
    "GeometricParams",
    "ConvergenceRow",
    "euler_mixed",
    "euler_coupled",
    "solve_model",
    "solve_coupled",
    "coupled_drivers",
    "closed_form_geometric",
    "closed_form_geometric_batch",
    "geometric_convergence_study",
]


@dataclass(frozen=True)
class SolveOutput:
    """Solution batch plus per-path blowup bookkeeping and the drivers used."""

    paths: PathBatch
    blown: np.ndarray
    first_nonfinite_index: np.ndarray
    wiener: PathBatch | None
    rough: PathBatch | None

    @property
    def count(self) -> int:
        return self.paths.count

    @property
    def blowup_count(self) -> int:
        return int(self.blown.sum())

    def survivor_sup_norms(self) -> np.ndarray:
        """Sup of the Euclidean norm over the grid, survivors only."""
        alive = self.paths.values[~self.blown]
        if alive.shape[0] == 0:
            return np.empty(0)
        if alive.shape[2] == 1:
            return np.abs(alive[:, :, 0]).max(axis=1)
        with np.errstate(over="ignore"):
            return np.linalg.norm(alive, axis=2).max(axis=1)


def _check_driver_batch(batch: PathBatch | None, dim: int, grid: TimeGrid, count: int | None, label: str):
    if dim == 0:
        if batch is not None:
            raise DomainError(f"model declares no {label} components but a batch was supplied")
        return count
    if batch is None:
        raise DomainError(f"model declares {dim} {label} component(s) but no batch was supplied")
    if batch.grid != grid:
        raise GridMismatchError(f"{label} batch grid {batch.grid} does not match solve grid {grid}")
    if batch.dim != dim:
        raise DomainError(f"{label} batch has dim {batch.dim}, model declares {dim}")
    if count is not None and batch.count != count:
        raise DomainError(f"driver batches disagree on path count: {batch.count} vs {count}")
    return batch.count


def _euler_loop(grid, x0, count, drift, wiener_field, rough_field, w_values, z_values, x_states=None):
    n = grid.step_count
    dt = grid.dt
    dim = len(x0)
    out = np.empty((count, n + 1, dim))
    out[:, 0, :] = x0
    blown = np.zeros(count, dtype=bool)
    first_bad = np.full(count, -1, dtype=np.int64)
    state = np.repeat(x0[None, :], count, axis=0)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            t = k * dt
            xk = x_states[:, k, :] if x_states is not None else None
            if x_states is None:
                step = drift(t, state) * dt
            else:
                step = drift(t, xk, state) * dt
            if wiener_field is not None:
                dw = w_values[:, k + 1, :] - w_values[:, k, :]
                bval = wiener_field(t, state) if x_states is None else wiener_field(t, xk, state)
                step += np.einsum("pdc,pc->pd", bval, dw)
            if rough_field is not None:
                dz = z_values[:, k + 1, :] - z_values[:, k, :]
                cval = rough_field(t, state) if x_states is None else rough_field(t, xk, state)
                step += np.einsum("pdc,pc->pd", cval, dz)
            state = state + step
            newly_bad = ~blown & ~np.isfinite(state).all(axis=1)
            if newly_bad.any():
                first_bad[newly_bad] = k + 1
                blown |= newly_bad
                state[blown] = np.nan
            out[:, k + 1, :] = state
    return out, blown, first_bad


def euler_mixed(
    model: ModelSpec,
    grid: TimeGrid,
    wiener: PathBatch | None = None,
    rough: PathBatch | None = None,
) -> SolveOutput:
    """Left-point Euler step of the mixed equation along supplied drivers.

    X_{k+1} = X_k + a(t_k, X_k) dt + b(t_k, X_k) dW_k + c(t_k, X_k) dZ_k,
    evaluated at the left endpoint of every cell for both noise terms.
    """
    model.probe()
    count = _check_driver_batch(wiener, model.driver.wiener_dim, grid, None, "wiener")
    count = _check_driver_batch(rough, model.driver.rough_dim, grid, count, "rough")
    if count is None:
        raise DomainError("at least one driver batch is required")
    values, blown, first_bad = _euler_loop(
        grid,
        model.initial_value,
        count,
        model.drift,
        model.wiener,
        model.rough,
        wiener.values if wiener is not None else None,
        rough.values if rough is not None else None,
    )
    return SolveOutput(
        paths=PathBatch(grid, values, provenance={"kind": "solution", "model": model.name}),
        blown=blown,
        first_nonfinite_index=first_bad,
        wiener=wiener,
        rough=rough,
    )


def solve_model(
    model: ModelSpec,
    grid: TimeGrid,
    count: int,
    seed: int,
    method: str = "auto",
    path_offset: int = 0,
) -> SolveOutput:
    """Generate the model's drivers from the seed, then run the Euler scheme."""
    w, z = generate_drivers(model.driver, grid, count, seed, stage="x", method=method, path_offset=path_offset)
    return euler_mixed(model, grid, w, z)


def euler_coupled(
    model_y: CoupledModelSpec,
    grid: TimeGrid,
    base_states: PathBatch,
    wiener: PathBatch | None = None,
    rough: PathBatch | None = None,
) -> SolveOutput:
    """Euler step of the coupled stage along a solved primary-stage batch.

    Y_{k+1} = Y_k + a~(t_k, X_k, Y_k) dt + b~ dW~_k + c~ dZ~_k; the primary
    state enters the coefficients but is never modified.
    """
    if base_states.grid != grid:
        raise GridMismatchError("base state batch must live on the solve grid")
    if base_states.dim != model_y.base_dim:
        raise DomainError(
            f"coupled model reads a base state of dim {model_y.base_dim}, got {base_states.dim}"
        )
    count = _check_driver_batch(wiener, model_y.driver.wiener_dim, grid, base_states.count, "wiener")
    count = _check_driver_batch(rough, model_y.driver.rough_dim, grid, count, "rough")
    values, blown, first_bad = _euler_loop(
        grid,
        model_y.initial_value,
        count,
        model_y.drift,
        model_y.wiener,
        model_y.rough,
        wiener.values if wiener is not None else None,
        rough.values if rough is not None else None,
        x_states=base_states.values,
    )
    return SolveOutput(
        paths=PathBatch(grid, values, provenance={"kind": "solution", "model": model_y.name}),
        blown=blown,
        first_nonfinite_index=first_bad,
        wiener=wiener,
        rough=rough,
    )


def coupled_drivers(
    model_x: ModelSpec,
    model_y: CoupledModelSpec,
    out_x: SolveOutput,
    grid: TimeGrid,
    count: int,
    seed: int,
    method: str = "auto",
    path_offset: int = 0,
) -> tuple[PathBatch | None, PathBatch | None]:
    """Second-stage drivers: the primary ones when shared, fresh ones otherwise."""
    if model_y.share_drivers:
        if (model_y.driver.wiener_dim, model_y.driver.rough_dim) != (
            model_x.driver.wiener_dim,
            model_x.driver.rough_dim,
        ) or model_y.driver.rough_hurst != model_x.driver.rough_hurst:
            raise DomainError("shared drivers require identical driver specs on both stages")
        return out_x.wiener, out_x.rough
    return generate_drivers(
        model_y.driver, grid, count, seed, stage="y", method=method, path_offset=path_offset
    )


def solve_coupled(
    model_x: ModelSpec,
    model_y: CoupledModelSpec,
    grid: TimeGrid,
    seed: int,
    count: int,
    method: str = "auto",
    path_offset: int = 0,
) -> tuple[SolveOutput, SolveOutput]:
    """Solve the primary stage, then the coupled stage along its state.

    The coupled stage never feeds back: X is solved completely first, then Y
    along it on the same clock. Drivers for the second stage are independent
    of the first unless the coupled model requests shared ones (the
    linearized sensitivity equation does).
    """
    if model_y.base_dim != model_x.state_dim:
        raise DomainError(
            f"coupled model reads a base state of dim {model_y.base_dim}, "
            f"primary model has dim {model_x.state_dim}"
        )
    out_x = solve_model(model_x, grid, count, seed, method=method, path_offset=path_offset)
    w_y, z_y = coupled_drivers(model_x, model_y, out_x, grid, count, seed, method, path_offset)
    out_y = euler_coupled(model_y, grid, out_x.paths, w_y, z_y)
    return out_x, out_y


@dataclass(frozen=True)
class GeometricParams:
    """Constant-coefficient price equation dS = mu S dt + s_W S dW + s_B S dZ."""

    initial_value: float = 1.0
    drift: float = 0.1
    wiener_vol: float = 0.2
    rough_vol: float = 0.3


def closed_form_geometric_batch(
    params: GeometricParams, wiener: PathBatch, rough: PathBatch
) -> PathBatch:
    """S_t = S_0 exp((mu - s_W^2/2) t + s_W W_t + s_B Z_t) on the grid.

    Only the Ito part carries the -s_W^2/2 correction; the Young part obeys
    the first-order chain rule, so the rough volatility enters plainly.
    """
    if wiener.dim != 1 or rough.dim != 1:
        raise DomainError("the closed form needs scalar drivers")
    if wiener.grid != rough.grid:
        raise GridMismatchError("driver batches must share the grid")
    t = wiener.grid.points[None, :]
    log_s = (
        (params.drift - 0.5 * params.wiener_vol**2) * t
        + params.wiener_vol * wiener.values[:, :, 0]
        + params.rough_vol * rough.values[:, :, 0]
    )
    return PathBatch(
        wiener.grid,
        params.initial_value * np.exp(log_s),
        provenance={"kind": "closed-form-geometric"},
    )


def closed_form_geometric(
    params: GeometricParams, wiener_path: DiscretePath, rough_path: DiscretePath
) -> DiscretePath:
    """Single-path version of :func:`closed_form_geometric_batch`."""
    batch = closed_form_geometric_batch(
        params,
        PathBatch(wiener_path.grid, wiener_path.values[None, :, :]),
        PathBatch(rough_path.grid, rough_path.values[None, :, :]),
    )
    return batch.path(0)


@dataclass(frozen=True)
class ConvergenceRow:
    step_count: int
    mean_abs_terminal_error: float
    mean_rel_terminal_error: float


def geometric_convergence_study(
    params: GeometricParams,
    hurst: float,
    levels,
    paths: int,
    seed: int,
    horizon: float = 1.0,
    method: str = "auto",
    workers: int = 1,
) -> list[ConvergenceRow]:
    """Euler terminal error against the closed form over dyadic grid levels.

    Common random numbers: drivers are generated once on the finest grid and
    restricted to the coarser levels, so the rows isolate discretization
    error from sampling noise. The closed-form reference is evaluated on the
    finest grid.
    """
    from . import parallel
    from .models import model_zoo

    levels = [int(n) for n in levels]
    if levels != sorted(levels) or len(set(levels)) != len(levels):
        raise DomainError("levels must be strictly increasing")
    for n in levels:
        if n < 1 or n & (n - 1):
            raise DomainError(f"levels must be powers of two, got {n}")
    model = model_zoo(
        "geometric_mixed",
        mu=params.drift,
        sigma_w=params.wiener_vol,
        sigma_b=params.rough_vol,
        initial_value=params.initial_value,
        hurst=hurst,
        horizon=horizon,
    )
    grid_finest = TimeGrid(horizon, levels[-1])

    def job(lo, hi):
        w, z = generate_drivers(
            model.driver, grid_finest, hi - lo, seed, stage="x", method=method, path_offset=lo
        )
        exact_terminal = closed_form_geometric_batch(params, w, z).values[:, -1, 0]
        errors = {}
        for n in levels:
            stride = levels[-1] // n
            out = euler_mixed(model, grid_finest.coarsen(stride), w.restrict(stride), z.restrict(stride))
            errors[n] = np.abs(out.paths.values[:, -1, 0] - exact_terminal)
        return errors, np.abs(exact_terminal)

    chunks = parallel.chunk_ranges(paths)
    results = parallel.run_jobs([lambda lo=lo, hi=hi: job(lo, hi) for lo, hi in chunks], workers)
    abs_exact = np.concatenate([r[1] for r in results])
    rows = []
    for n in levels:
        err = np.concatenate([r[0][n] for r in results])
        rows.append(
            ConvergenceRow(
                step_count=n,
                mean_abs_terminal_error=float(err.mean()),
                mean_rel_terminal_error=float(err.mean() / abs_exact.mean()),
            )
        )
    return rows
