"""Exact synthesis of fractional Brownian motion and Wiener paths.

Two synthesis routes with identical distributions on the grid:

* ``cholesky`` — factor the exact grid covariance; O(n^2) memory, O(n^3)
  setup. The correctness oracle for small n.
* ``circulant`` — Davies–Harte-style circulant embedding of fractional
  Gaussian noise; O(n log n) per path. The production route for large n.
  The embedding eigenvalues are non-negative for fGn; this is still
  verified at runtime and a failure raises rather than silently clipping
  anything beyond rounding noise.

``method="auto"`` picks cholesky below ``CIRCULANT_THRESHOLD`` steps and
circulant at or above it.
"""

from __future__ import annotations

import numpy as np

from . import randomness as rnd
from .errors import DomainError, ResourceError, SynthesisError
from .grids import DriverSpec, TimeGrid, check_hurst
from .paths import PathBatch

__all__ = [
    "fbm_covariance",
    "fbm_covariance_matrix",
    "fgn_circulant_eigenvalues",
    "generate_fbm",
    "generate_wiener",
    "generate_drivers",
    "CHOLESKY_CAP",
    "CIRCULANT_THRESHOLD",
]

CHOLESKY_CAP = 4096
CIRCULANT_THRESHOLD = 512
_EIG_TOLERANCE = -1e-9
_CHUNK_VALUES = 2**22  # cap scratch blocks at ~32 MB of float64


def fbm_covariance(t: float, s: float, hurst: float) -> float:
    """Cov(B^H_t, B^H_s) = (t^2H + s^2H - |t-s|^2H) / 2 for one component.

    Distinct components are independent, so the cross-covariance is zero;
    this scalar form is the caller's building block.
    """
    h = check_hurst(hurst)
    if t < 0 or s < 0:
        raise DomainError(f"times must be non-negative, got ({t}, {s})")
    return 0.5 * (t ** (2 * h) + s ** (2 * h) - abs(t - s) ** (2 * h))


def fbm_covariance_matrix(grid: TimeGrid, hurst: float) -> np.ndarray:
    """Exact (n, n) covariance of B^H over t_1..t_n (t_0 = 0 is degenerate)."""
    h = check_hurst(hurst)
    t = grid.points[1:]
    tt, ss = t[:, None], t[None, :]
    return 0.5 * (tt ** (2 * h) + ss ** (2 * h) - np.abs(tt - ss) ** (2 * h))


def fgn_circulant_eigenvalues(step_count: int, hurst: float) -> np.ndarray:
    """Eigenvalues of the 2n circulant embedding of unit-step fGn covariance."""
    h = check_hurst(hurst)
    k = np.arange(step_count + 1, dtype=float)
    gamma = 0.5 * ((k + 1) ** (2 * h) - 2 * k ** (2 * h) + np.abs(k - 1) ** (2 * h))
    first_row = np.concatenate([gamma, gamma[-2:0:-1]])
    return np.fft.fft(first_row).real


def _chunks(count: int, row_width: int):
    size = max(1, _CHUNK_VALUES // max(1, row_width))
    for lo in range(0, count, size):
        yield lo, min(count, lo + size)


def _fbm_cholesky(grid, hurst, count, seed, tag, offset):
    n = grid.step_count
    if n > CHOLESKY_CAP:
        raise ResourceError(
            f"cholesky synthesis is capped at n={CHOLESKY_CAP} (requested {n}); use method='circulant'"
        )
    factor = np.linalg.cholesky(fbm_covariance_matrix(grid, hurst))
    out = np.zeros((count, n + 1))
    for lo, hi in _chunks(count, n):
        z = rnd.normal_matrix(seed, tag, n, hi - lo, offset=offset + lo)
        out[lo:hi, 1:] = z @ factor.T
    return out


def _fbm_circulant(grid, hurst, count, seed, tag, offset):
    n = grid.step_count
    lam = fgn_circulant_eigenvalues(n, hurst)
    if lam.min() < _EIG_TOLERANCE:
        raise SynthesisError(
            f"circulant embedding failed: min eigenvalue {lam.min():.3e} < {_EIG_TOLERANCE}"
            f" for n={n}, H={hurst}"
        )
    weights = np.sqrt(np.clip(lam, 0.0, None) / (2 * (2 * n)))
    scale = grid.dt ** check_hurst(hurst)
    out = np.zeros((count, n + 1))
    for lo, hi in _chunks(count, 4 * n):
        z = rnd.normal_matrix(seed, tag, 2 * n, hi - lo, offset=offset + lo)
        spectrum = np.empty((hi - lo, 2 * n), dtype=np.complex128)
        spectrum[:, 0] = z[:, 0] * np.sqrt(2.0)
        spectrum[:, n] = z[:, 1] * np.sqrt(2.0)
        spectrum[:, 1:n] = z[:, 2::2] + 1j * z[:, 3::2]
        spectrum[:, n + 1:] = np.conj(spectrum[:, 1:n][:, ::-1])
        spectrum *= weights[None, :]
        fgn = np.fft.fft(spectrum, axis=1).real[:, :n]
        np.cumsum(fgn, axis=1, out=out[lo:hi, 1:])
    out[:, 1:] *= scale
    return out


def generate_fbm(
    grid: TimeGrid,
    hurst: float,
    count: int,
    seed: int,
    method: str = "auto",
    *,
    stream_role: int = rnd.ROUGH_X,
    component: int = 0,
    path_offset: int = 0,
) -> PathBatch:
    """``count`` independent fBm paths started at 0, exact on the grid.

    Deterministic given (seed, method, grid, H): path i is produced from the
    counter-based stream keyed by (seed, stream tag, path_offset + i), so any
    partition of the batch across workers yields identical values. The two
    methods share the law, not the realizations.
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if method == "auto":
        method = "cholesky" if grid.step_count < CIRCULANT_THRESHOLD else "circulant"
    tag = rnd.stream_tag(stream_role, component)
    if method == "cholesky":
        values = _fbm_cholesky(grid, hurst, count, seed, tag, path_offset)
    elif method == "circulant":
        values = _fbm_circulant(grid, hurst, count, seed, tag, path_offset)
    else:
        raise DomainError(f"unknown synthesis method {method!r}")
    return PathBatch(
        grid,
        values,
        provenance={
            "kind": "fbm",
            "hurst": float(hurst),
            "seed": int(seed),
            "method": method,
            "stream_role": stream_role,
            "component": component,
            "path_offset": path_offset,
        },
    )


def generate_wiener(
    grid: TimeGrid,
    dim: int,
    count: int,
    seed: int,
    *,
    stream_role: int = rnd.WIENER_X,
    path_offset: int = 0,
) -> PathBatch:
    """Standard Wiener batch: independent coordinates, N(0, T/n) increments."""
    if dim < 1:
        raise DomainError(f"dim must be >= 1, got {dim}")
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    n = grid.step_count
    root_dt = np.sqrt(grid.dt)
    values = np.zeros((count, n + 1, dim))
    for component in range(dim):
        tag = rnd.stream_tag(stream_role, component)
        for lo, hi in _chunks(count, n):
            z = rnd.normal_matrix(seed, tag, n, hi - lo, offset=path_offset + lo)
            np.cumsum(z * root_dt, axis=1, out=values[lo:hi, 1:, component])
    return PathBatch(
        grid,
        values,
        provenance={
            "kind": "wiener",
            "seed": int(seed),
            "dim": dim,
            "stream_role": stream_role,
            "path_offset": path_offset,
        },
    )


def generate_drivers(
    spec: DriverSpec,
    grid: TimeGrid,
    count: int,
    seed: int,
    *,
    stage: str = "x",
    method: str = "auto",
    path_offset: int = 0,
) -> tuple[PathBatch | None, PathBatch | None]:
    """(Wiener, rough) batches for one equation stage.

    ``stage`` selects the stream roles, so the coupled stage ("y") draws
    noise independent of the primary stage ("x") under the same seed.
    """
    if stage == "x":
        wiener_role, rough_role = rnd.WIENER_X, rnd.ROUGH_X
    elif stage == "y":
        wiener_role, rough_role = rnd.WIENER_Y, rnd.ROUGH_Y
    else:
        raise DomainError(f"stage must be 'x' or 'y', got {stage!r}")

    wiener = None
    if spec.wiener_dim > 0:
        wiener = generate_wiener(
            grid, spec.wiener_dim, count, seed, stream_role=wiener_role, path_offset=path_offset
        )
    rough = None
    if spec.rough_dim > 0:
        columns = [
            generate_fbm(
                grid,
                h,
                count,
                seed,
                method,
                stream_role=rough_role,
                component=j,
                path_offset=path_offset,
            ).values[:, :, 0]
            for j, h in enumerate(spec.rough_hurst)
        ]
        rough = PathBatch(
            grid,
            np.stack(columns, axis=2),
            provenance={
                "kind": "fbm",
                "hurst": list(spec.rough_hurst),
                "seed": int(seed),
                "method": method,
                "stream_role": rough_role,
                "path_offset": path_offset,
            },
        )
    return wiener, rough
