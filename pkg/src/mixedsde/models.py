"""Coefficient fields, the model zoo, and numerical assumption validators.

A coefficient field evaluates vectorized over a batch of states at one
time: ``evaluate(t, x)`` for state coefficients, ``evaluate(t, x, y)`` for
coupled ones. Drift fields return (batch, d); diffusion fields return
(batch, d, columns) with one column per driver component.

Validators estimate the defining constant of each condition in a set by
Monte Carlo maximization over the time horizon and a state box, refined by
local search around the best sample. Finite sampling can only falsify a
claimed constant, never certify it; the verdict wording reflects that.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import randomness as rnd
from .errors import DomainError
from .grids import DriverSpec

__all__ = [
    "CoefficientField",
    "ModelSpec",
    "CoupledModelSpec",
    "ConditionEstimate",
    "AssumptionReport",
    "validate_assumptions",
    "model_zoo",
    "coupled_growth_power_bound",
    "ZOO_MODELS",
]


# --------------------------------------------------------------------------
# coefficient fields and model specs


@dataclass(frozen=True)
class CoefficientField:
    """One evaluatable coefficient of a mixed equation.

    ``columns == 0`` marks a drift field (plain vector output); diffusion
    fields carry one output column per driver component. ``derivative`` is
    the state Jacobian (w.r.t. x for state arity, w.r.t. y for coupled) and
    is optional: validators fall back to central finite differences.
    """

    name: str
    arity: str  # "state" | "coupled"
    out_dim: int
    columns: int
    evaluate: Callable[..., np.ndarray]
    derivative: Callable[..., np.ndarray] | None = None

    def __post_init__(self):
        if self.arity not in ("state", "coupled"):
            raise DomainError(f"arity must be 'state' or 'coupled', got {self.arity!r}")
        if self.out_dim < 1 or self.columns < 0:
            raise DomainError(f"bad field dimensions for {self.name!r}")

    def __call__(self, t, x, y=None) -> np.ndarray:
        if self.arity == "state":
            return np.asarray(self.evaluate(t, x), dtype=float)
        if y is None:
            raise DomainError(f"coupled field {self.name!r} needs the y argument")
        return np.asarray(self.evaluate(t, x, y), dtype=float)

    def jacobian(self, t, x, y=None, step: float = 1e-6) -> np.ndarray:
        """State Jacobian, analytic when supplied, else central differences."""
        if self.derivative is not None:
            if self.arity == "state":
                return np.asarray(self.derivative(t, x), dtype=float)
            return np.asarray(self.derivative(t, x, y), dtype=float)
        target = x if self.arity == "state" else y
        target = np.asarray(target, dtype=float)
        cols = []
        for axis in range(target.shape[1]):
            bump = np.zeros_like(target)
            bump[:, axis] = step
            if self.arity == "state":
                hi, lo = self(t, x + bump), self(t, x - bump)
            else:
                hi, lo = self(t, x, target + bump), self(t, x, target - bump)
            cols.append((hi - lo) / (2 * step))
        return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class ModelSpec:
    """A mixed equation: drift a, Wiener block b, rough block c, and drivers."""

    name: str
    state_dim: int
    initial_value: np.ndarray
    horizon: float
    drift: CoefficientField
    wiener: CoefficientField | None
    rough: CoefficientField | None
    driver: DriverSpec
    claimed_set: str | None = None
    claimed_constants: Mapping[str, float] = field(default_factory=dict)
    holder_beta: float | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.initial_value, dtype=float))
        if x0.shape != (self.state_dim,) or not np.isfinite(x0).all():
            raise DomainError(
                f"initial value must be a finite vector of length {self.state_dim}, got {x0}"
            )
        object.__setattr__(self, "initial_value", x0)
        if self.horizon <= 0:
            raise DomainError("horizon must be positive")
        if (self.wiener is None) != (self.driver.wiener_dim == 0):
            raise DomainError("wiener coefficient and wiener_dim must agree")
        if (self.rough is None) != (self.driver.rough_dim == 0):
            raise DomainError("rough coefficient and rough_dim must agree")
        if self.holder_beta is not None and self.driver.rough_dim > 0:
            mu = self.driver.holder_order
            if not (1 - mu) < self.holder_beta < 0.5:
                raise DomainError(
                    f"time-Holder exponent beta must lie in (1-mu, 1/2) = "
                    f"({1 - mu:.3f}, 0.5), got {self.holder_beta}"
                )

    def probe(self) -> None:
        """Evaluate every field at (0, x0) and check output shapes."""
        x = np.repeat(self.initial_value[None, :], 2, axis=0)
        got = self.drift(0.0, x)
        if got.shape != (2, self.state_dim):
            raise DomainError(f"drift returned shape {got.shape}, expected (2, {self.state_dim})")
        for fld, cols in ((self.wiener, self.driver.wiener_dim), (self.rough, self.driver.rough_dim)):
            if fld is None:
                continue
            got = fld(0.0, x)
            if got.shape != (2, self.state_dim, cols):
                raise DomainError(
                    f"{fld.name} returned shape {got.shape}, expected (2, {self.state_dim}, {cols})"
                )


def coupled_growth_power_bound(mu: float) -> float:
    """Admissible growth-power bound 2*mu*(2*mu - 1)/(2*mu + 1) for coupled runs."""
    return 2 * mu * (2 * mu - 1) / (2 * mu + 1)


@dataclass(frozen=True)
class CoupledModelSpec:
    """Second-stage equation whose coefficients read the first-stage state."""

    name: str
    state_dim: int  # k
    base_dim: int  # d of the driving stage
    initial_value: np.ndarray
    horizon: float
    drift: CoefficientField
    wiener: CoefficientField | None
    rough: CoefficientField | None
    driver: DriverSpec
    share_drivers: bool = False
    declared_rho: float = 0.0
    claimed_set: str | None = None
    claimed_constants: Mapping[str, float] = field(default_factory=dict)
    holder_beta: float | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        y0 = np.atleast_1d(np.asarray(self.initial_value, dtype=float))
        if y0.shape != (self.state_dim,) or not np.isfinite(y0).all():
            raise DomainError(
                f"initial value must be a finite vector of length {self.state_dim}, got {y0}"
            )
        object.__setattr__(self, "initial_value", y0)
        if not 0.0 <= self.declared_rho < 2.0 / 3.0:
            raise DomainError(f"growth power rho must lie in [0, 2/3), got {self.declared_rho}")
        if (self.wiener is None) != (self.driver.wiener_dim == 0):
            raise DomainError("wiener coefficient and wiener_dim must agree")
        if (self.rough is None) != (self.driver.rough_dim == 0):
            raise DomainError("rough coefficient and rough_dim must agree")
        if self.driver.rough_dim > 0:
            # rho = 0 only strengthens the growth conditions; warn above the bound.
            bound = coupled_growth_power_bound(self.driver.holder_order)
            if not 0.0 <= self.declared_rho < bound:
                warnings.warn(
                    f"declared rho={self.declared_rho} is outside the admissible range "
                    f"(0, {bound:.4f}) for holder order {self.driver.holder_order}; "
                    "moment finiteness is not covered there",
                    stacklevel=2,
                )


# --------------------------------------------------------------------------
# assumption validators


@dataclass(frozen=True)
class ConditionEstimate:
    """Maximized defining ratio of one condition, with its witness point."""

    condition: str
    constant: float
    raw_constant: float
    claimed: float | None
    violated: bool
    witness: dict


@dataclass(frozen=True)
class AssumptionReport:
    set_id: str
    box_radius: float
    samples: int
    conditions: tuple[ConditionEstimate, ...]

    @property
    def verdict(self) -> str:
        return "violated" if any(c.violated for c in self.conditions) else "no-violation-found"

    def violations(self) -> tuple[ConditionEstimate, ...]:
        return tuple(c for c in self.conditions if c.violated)

    def constant(self, condition: str) -> float:
        for c in self.conditions:
            if c.condition == condition:
                return c.constant
        raise KeyError(condition)


def _row_norm(v: np.ndarray) -> np.ndarray:
    """Euclidean norm for vectors, operator (spectral) norm for matrices."""
    if v.ndim == 2:
        return np.linalg.norm(v, axis=1)
    flat = v.reshape(v.shape[0], v.shape[1], -1) if v.ndim > 3 else v
    if v.ndim == 4:  # Jacobian of a diffusion block: stack output columns
        flat = v.reshape(v.shape[0], v.shape[1] * v.shape[2], v.shape[3])
    return np.linalg.svd(flat, compute_uv=False)[:, 0]


def _pair_ratio(numerator: np.ndarray, separation: np.ndarray) -> np.ndarray:
    """Difference-quotient candidates; coincident pairs carry no information."""
    out = np.full(len(numerator), -np.inf)
    ok = separation > 0
    out[ok] = numerator[ok] / separation[ok]
    return out


def _box_samples(gen, count: int, dim: int, radius: float) -> np.ndarray:
    """Uniform box samples; row i depends only on draw i (prefix-stable)."""
    return radius * (2.0 * gen.random((count, dim)) - 1.0)


def _partner_samples(gen, base: np.ndarray, radius: float) -> np.ndarray:
    """Pair partners: even rows independent, odd rows perturb their base row.

    Lipschitz-type suprema are often attained by nearby pairs; the odd rows
    place partners at log-uniform distances from the base points. Row i
    still depends only on draw i and base row i, so estimates stay monotone
    in the sample count.
    """
    count, dim = base.shape
    u = gen.random((count, dim + 1))
    pts = radius * (2.0 * u[:, :dim] - 1.0)
    scale = radius * 10.0 ** (-3.0 * u[1::2, dim])  # log-uniform in [R/1000, R]
    pts[1::2] = np.clip(
        base[1::2] + scale[:, None] * (2.0 * u[1::2, :dim] - 1.0), -radius, radius
    )
    return pts


class _RatioSet:
    """The conditions of one assumption set as vectorized ratio closures."""

    def __init__(self, model, set_id: str, mu: float | None):
        self.model = model
        self.set_id = set_id
        beta = model.holder_beta
        if beta is None:
            beta = 0.75 - 0.5 * mu if mu is not None else 0.25  # midpoint of (1-mu, 1/2)
        self.beta = beta
        self.rho = getattr(model, "declared_rho", 0.0)

    def _norm_of(self, fld, t, x, y=None):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld(t, x) if y is None else fld(t, x, y))

    def _jac_norm(self, fld, t, x, y=None):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld.jacobian(t, x) if y is None else fld.jacobian(t, x, y))

    def conditions(self):
        m = self.model
        if self.set_id == "A":
            return [
                ("A1", "point", lambda t, x: (
                    self._norm_of(m.drift, t, x) + self._norm_of(m.wiener, t, x)
                    + self._norm_of(m.rough, t, x)) / (1.0 + np.linalg.norm(x, axis=1))),
                ("A2", "point", lambda t, x: self._jac_norm(m.rough, t, x)),
                ("A3", "xpair", lambda t, x1, x2: _pair_ratio(
                    _row_norm(m.drift(t, x1) - m.drift(t, x2))
                    + self._pair_diff(m.wiener, t, x1, x2)
                    + self._pair_jac_diff(m.rough, t, x1, x2),
                    np.linalg.norm(x1 - x2, axis=1))),
                ("A4-c", "tpair", lambda t, s, x: self._pair_time_diff(m.rough, t, s, x)
                    / (abs(t - s) ** self.beta * (1.0 + np.linalg.norm(x, axis=1)))),
                ("A4-cx", "tpair", lambda t, s, x: self._pair_time_jac_diff(m.rough, t, s, x)
                    / abs(t - s) ** self.beta),
            ]
        if self.set_id == "B":
            return [
                ("B1", "point", lambda t, x: (
                    self._norm_of(m.drift, t, x) + self._norm_of(m.wiener, t, x)
                    + self._norm_of(m.rough, t, x))),
                ("B2", "point", lambda t, x: self._jac_norm(m.rough, t, x)),
                ("B3", "xpair", lambda t, x1, x2: _pair_ratio(
                    _row_norm(m.drift(t, x1) - m.drift(t, x2))
                    + self._pair_diff(m.wiener, t, x1, x2)
                    + self._pair_jac_diff(m.rough, t, x1, x2),
                    np.linalg.norm(x1 - x2, axis=1))),
                ("B4-c", "tpair", lambda t, s, x: self._pair_time_diff(m.rough, t, s, x)
                    / abs(t - s) ** self.beta),
                ("B4-cx", "tpair", lambda t, s, x: self._pair_time_jac_diff(m.rough, t, s, x)
                    / abs(t - s) ** self.beta),
            ]
        if self.set_id == "C":
            rho = self.rho
            xfac = lambda x: 1.0 + np.linalg.norm(x, axis=1) ** rho
            yfac = lambda y: 1.0 + np.linalg.norm(y, axis=1)
            return [
                ("C1", "cpoint", lambda t, x, y: (
                    self._norm_of(m.drift, t, x, y) + self._norm_of(m.rough, t, x, y))
                    / (xfac(x) * yfac(y))),
                ("C2", "cpoint", lambda t, x, y: self._norm_of(m.wiener, t, x, y) / yfac(y)),
                ("C3", "cpoint", lambda t, x, y: self._jac_norm(m.rough, t, x, y) / xfac(x)),
                ("C4", "ypair", lambda t, x, y1, y2: _pair_ratio(
                    _row_norm(m.drift(t, x, y1) - m.drift(t, x, y2))
                    + self._pair_diff_y(m.wiener, t, x, y1, y2)
                    + self._pair_jac_diff_y(m.rough, t, x, y1, y2),
                    np.linalg.norm(y1 - y2, axis=1))),
                ("C5", "cxpair", lambda t, x1, x2, y: _pair_ratio(
                    self._pair_diff_x_coupled(m.rough, t, x1, x2, y),
                    np.linalg.norm(x1 - x2, axis=1) * yfac(y))),
                ("C6-c", "ctpair", lambda t, s, x, y: self._pair_time_diff_coupled(m.rough, t, s, x, y)
                    / (abs(t - s) ** self.beta * xfac(x) * yfac(y))),
                ("C6-cy", "ctpair", lambda t, s, x, y: self._pair_time_jac_diff_coupled(m.rough, t, s, x, y)
                    / (abs(t - s) ** self.beta * yfac(y))),
            ]
        raise DomainError(f"unknown assumption set {self.set_id!r}")

    def _pair_diff(self, fld, t, x1, x2):
        if fld is None:
            return np.zeros(len(x1))
        return _row_norm(fld(t, x1) - fld(t, x2))

    def _pair_diff_y(self, fld, t, x, y1, y2):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld(t, x, y1) - fld(t, x, y2))

    def _pair_jac_diff(self, fld, t, x1, x2):
        if fld is None:
            return np.zeros(len(x1))
        return _row_norm(fld.jacobian(t, x1) - fld.jacobian(t, x2))

    def _pair_jac_diff_y(self, fld, t, x, y1, y2):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld.jacobian(t, x, y1) - fld.jacobian(t, x, y2))

    def _pair_diff_x_coupled(self, fld, t, x1, x2, y):
        if fld is None:
            return np.zeros(len(x1))
        return _row_norm(fld(t, x1, y) - fld(t, x2, y))

    def _pair_time_diff(self, fld, t, s, x):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld(t, x) - fld(s, x))

    def _pair_time_diff_coupled(self, fld, t, s, x, y):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld(t, x, y) - fld(s, x, y))

    def _pair_time_jac_diff(self, fld, t, s, x):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld.jacobian(t, x) - fld.jacobian(s, x))

    def _pair_time_jac_diff_coupled(self, fld, t, s, x, y):
        if fld is None:
            return np.zeros(len(x))
        return _row_norm(fld.jacobian(t, x, y) - fld.jacobian(s, x, y))


_TIME_SAMPLES = 33
_REFINE_ROUNDS = 4
_REFINE_POINTS = 48


def validate_assumptions(
    model,
    set_id: str,
    box_radius: float = 10.0,
    samples: int = 10_000,
    seed: int = 0,
) -> AssumptionReport:
    """Estimate the defining constants of an assumption set on a state box.

    Monte Carlo maximization over [0, T] x box(R) (times share a fixed grid,
    states are prefix-stable draws so estimates are monotone in ``samples``),
    refined by shrinking local search around the best sample. A condition is
    flagged violated only when its claimed constant is exceeded by more than
    a factor 1.01, or when an evaluator returns a non-finite value.
    """
    if samples < 1000:
        raise DomainError(f"validators need at least 1000 samples, got {samples}")
    set_id = set_id.upper()
    coupled = set_id == "C"
    if coupled and not isinstance(model, CoupledModelSpec):
        raise DomainError("set C applies to coupled models")
    if not coupled and isinstance(model, CoupledModelSpec):
        raise DomainError(f"set {set_id} applies to single-stage models")

    mu = model.driver.holder_order if model.driver.rough_dim > 0 else None
    ratios = _RatioSet(model, set_id, mu)
    ts = np.linspace(0.0, model.horizon, _TIME_SAMPLES)
    per_t = max(8, -(-samples // _TIME_SAMPLES))
    xdim = model.base_dim if coupled else model.state_dim

    def sampler(component):
        return rnd.path_stream(seed, 0, rnd.stream_tag(rnd.VALIDATOR, component))

    xs = _box_samples(sampler(0), per_t, xdim, box_radius)
    xs2 = _partner_samples(sampler(1), xs, box_radius)
    if coupled:
        ys = _box_samples(sampler(2), per_t, model.state_dim, box_radius)
        ys2 = _partner_samples(sampler(3), ys, box_radius)
    refine_gen = sampler(9)

    estimates = []
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for cond_id, kind, ratio in ratios.conditions():
            best, witness = -np.inf, None
            non_finite_witness = None

            def consider(cands, points):
                nonlocal best, witness, non_finite_witness
                cands = np.asarray(cands, dtype=float)
                # -inf marks an uninformative candidate (coincident pair);
                # NaN or +inf means the evaluator itself misbehaved.
                bad = np.isnan(cands) | np.isposinf(cands)
                if bad.any() and non_finite_witness is None:
                    non_finite_witness = points(int(np.argmax(bad)))
                usable = np.where(bad, -np.inf, cands)
                i = int(np.argmax(usable))
                if usable[i] > best:
                    best, witness = float(usable[i]), points(i)

            # pass 1: Monte Carlo sampling over the shared time grid
            for t in ts:
                if kind == "point":
                    consider(ratio(t, xs), lambda i, t=t: {"t": t, "x": xs[i].copy()})
                elif kind == "cpoint":
                    consider(ratio(t, xs, ys), lambda i, t=t: {"t": t, "x": xs[i].copy(), "y": ys[i].copy()})
                elif kind == "xpair":
                    consider(ratio(t, xs, xs2), lambda i, t=t: {"t": t, "x1": xs[i].copy(), "x2": xs2[i].copy()})
                elif kind == "cxpair":
                    consider(ratio(t, xs, xs2, ys), lambda i, t=t: {"t": t, "x1": xs[i].copy(), "x2": xs2[i].copy(), "y": ys[i].copy()})
                elif kind == "ypair":
                    consider(ratio(t, xs, ys, ys2), lambda i, t=t: {"t": t, "x": xs[i].copy(), "y1": ys[i].copy(), "y2": ys2[i].copy()})
                elif kind in ("tpair", "ctpair"):
                    continue
                else:  # pragma: no cover
                    raise DomainError(f"unknown condition kind {kind!r}")
            if kind in ("tpair", "ctpair"):
                for it in range(len(ts)):
                    for jt in range(it + 1, len(ts)):
                        t, s = ts[jt], ts[it]
                        if kind == "tpair":
                            consider(ratio(t, s, xs), lambda i, t=t, s=s: {"t": t, "s": s, "x": xs[i].copy()})
                        else:
                            consider(ratio(t, s, xs, ys), lambda i, t=t, s=s: {"t": t, "s": s, "x": xs[i].copy(), "y": ys[i].copy()})
            raw_best = best

            # pass 2: shrinking local search around the witness
            if witness is not None and np.isfinite(best):
                for round_idx in range(_REFINE_ROUNDS):
                    radius = box_radius * 0.25 ** (round_idx + 1)
                    local = {}
                    for key in ("x", "x1", "x2", "y", "y1", "y2"):
                        if key in witness:
                            center = witness[key]
                            pts = center[None, :] + radius * (
                                2.0 * refine_gen.random((_REFINE_POINTS, len(center))) - 1.0
                            )
                            local[key] = np.clip(pts, -box_radius, box_radius)
                    t, s = witness["t"], witness.get("s")
                    if kind == "point":
                        cands = ratio(t, local["x"])
                        pick = lambda i: {"t": t, "x": local["x"][i].copy()}
                    elif kind == "cpoint":
                        cands = ratio(t, local["x"], local["y"])
                        pick = lambda i: {"t": t, "x": local["x"][i].copy(), "y": local["y"][i].copy()}
                    elif kind == "xpair":
                        cands = ratio(t, local["x1"], local["x2"])
                        pick = lambda i: {"t": t, "x1": local["x1"][i].copy(), "x2": local["x2"][i].copy()}
                    elif kind == "cxpair":
                        cands = ratio(t, local["x1"], local["x2"], local["y"])
                        pick = lambda i: {"t": t, "x1": local["x1"][i].copy(), "x2": local["x2"][i].copy(), "y": local["y"][i].copy()}
                    elif kind == "ypair":
                        cands = ratio(t, local["x"], local["y1"], local["y2"])
                        pick = lambda i: {"t": t, "x": local["x"][i].copy(), "y1": local["y1"][i].copy(), "y2": local["y2"][i].copy()}
                    elif kind == "tpair":
                        cands = ratio(t, s, local["x"])
                        pick = lambda i: {"t": t, "s": s, "x": local["x"][i].copy()}
                    else:
                        cands = ratio(t, s, local["x"], local["y"])
                        pick = lambda i: {"t": t, "s": s, "x": local["x"][i].copy(), "y": local["y"][i].copy()}
                    consider(cands, pick)

            claimed = model.claimed_constants.get(cond_id)
            if non_finite_witness is not None:
                estimates.append(
                    ConditionEstimate(cond_id, float("inf"), raw_best, claimed, True, non_finite_witness)
                )
                continue
            violated = claimed is not None and best > claimed * 1.01
            estimates.append(
                ConditionEstimate(cond_id, best, raw_best, claimed, bool(violated), witness or {})
            )

    return AssumptionReport(
        set_id=set_id,
        box_radius=box_radius,
        samples=samples,
        conditions=tuple(estimates),
    )


# --------------------------------------------------------------------------
# model zoo


def _linear_fields(d, mats, offsets, columns, name):
    """Fields x -> M_j x + m0_j, one column per driver component."""
    mats = np.asarray(mats, dtype=float).reshape(columns, d, d)
    offsets = np.asarray(offsets, dtype=float).reshape(columns, d)

    def evaluate(t, x):
        out = np.einsum("cde,pe->pdc", mats, x)
        out += offsets.T[None, :, :]
        return out

    def derivative(t, x):
        return np.broadcast_to(mats.transpose(1, 0, 2)[None], (len(x), d, columns, d)).copy()

    return CoefficientField(name, "state", d, columns, evaluate, derivative)


def _linear_drift(d, A, a0):
    A = np.asarray(A, dtype=float).reshape(d, d)
    a0 = np.asarray(a0, dtype=float).reshape(d)

    def evaluate(t, x):
        return x @ A.T + a0

    return CoefficientField("linear-drift", "state", d, 0, evaluate)


def _as_matrix_stack(value, columns, d):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.stack([np.eye(d) * float(arr)] * columns) if columns else np.eye(d) * float(arr)
    return arr.reshape(columns, d, d) if columns else arr.reshape(d, d)


def _as_vector_stack(value, columns, d):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full((columns, d) if columns else (d,), float(arr))
    return arr.reshape(columns, d) if columns else arr.reshape(d)


def _op_norm(mat):
    return float(np.linalg.norm(mat, 2))


def _linear_mixed(
    state_dim=1,
    wiener_dim=1,
    rough_dim=1,
    hurst=0.75,
    drift_matrix=0.5,
    drift_offset=0.1,
    wiener_matrix=0.3,
    wiener_offset=0.2,
    rough_matrix=0.4,
    rough_offset=0.3,
    initial_value=1.0,
    horizon=1.0,
    holder_order=None,
):
    d, m, l = state_dim, wiener_dim, rough_dim
    hs = (hurst,) * l if np.isscalar(hurst) else tuple(hurst)
    driver = DriverSpec(m, l, hs, holder_order)
    A = _as_matrix_stack(drift_matrix, 0, d)
    a0 = _as_vector_stack(drift_offset, 0, d)
    B = _as_matrix_stack(wiener_matrix, m, d)
    b0 = _as_vector_stack(wiener_offset, m, d)
    C = _as_matrix_stack(rough_matrix, l, d)
    c0 = _as_vector_stack(rough_offset, l, d)
    growth = (
        _op_norm(A) + float(np.linalg.norm(a0))
        + sum(_op_norm(B[i]) + float(np.linalg.norm(b0[i])) for i in range(m))
        + sum(_op_norm(C[j]) + float(np.linalg.norm(c0[j])) for j in range(l))
    )
    lipschitz = (
        _op_norm(A)
        + float(np.sqrt(sum(_op_norm(B[i]) ** 2 for i in range(m))))
    )
    deriv_bound = float(np.sqrt(sum(_op_norm(C[j]) ** 2 for j in range(l))))
    return ModelSpec(
        name="linear_mixed",
        state_dim=d,
        initial_value=_as_vector_stack(initial_value, 0, d),
        horizon=horizon,
        drift=_linear_drift(d, A, a0),
        wiener=_linear_fields(d, B, b0, m, "linear-wiener") if m else None,
        rough=_linear_fields(d, C, c0, l, "linear-rough") if l else None,
        driver=driver,
        claimed_set="A",
        claimed_constants={
            "A1": growth,
            "A2": deriv_bound,
            "A3": lipschitz,
            "A4-c": 0.0,
            "A4-cx": 0.0,
        },
        params={
            "state_dim": d, "wiener_dim": m, "rough_dim": l, "hurst": hs,
            "initial_value": float(np.atleast_1d(initial_value).ravel()[0]),
            "horizon": horizon,
        },
    )


def _trig_drift(d, amp, rate):
    def evaluate(t, x):
        return amp * np.sin(x + rate * t)

    return CoefficientField("trig-drift", "state", d, 0, evaluate)


def _trig_diffusion(d, columns, amp, rate, phase_step, kind, name):
    phases = phase_step * np.arange(columns)
    fn = np.cos if kind == "cos" else np.sin
    dfn = (lambda v: -np.sin(v)) if kind == "cos" else np.cos

    def evaluate(t, x):
        return amp * fn(x[:, :, None] + rate * t + phases[None, None, :])

    def derivative(t, x):
        batch = len(x)
        core = amp * dfn(x[:, :, None] + rate * t + phases[None, None, :])
        jac = np.zeros((batch, d, columns, d))
        for i in range(d):
            jac[:, i, :, i] = core[:, i, :]
        return jac

    return CoefficientField(name, "state", d, columns, evaluate, derivative)


def _bounded_trig(
    state_dim=1,
    wiener_dim=1,
    rough_dim=1,
    hurst=0.75,
    drift_amp=0.3,
    wiener_amp=0.4,
    rough_amp=0.5,
    drift_rate=0.5,
    wiener_rate=0.3,
    rough_rate=0.2,
    initial_value=0.5,
    horizon=1.0,
    holder_order=None,
    holder_beta=None,
):
    d, m, l = state_dim, wiener_dim, rough_dim
    hs = (hurst,) * l if np.isscalar(hurst) else tuple(hurst)
    driver = DriverSpec(m, l, hs, holder_order)
    if holder_beta is None and l > 0:
        holder_beta = 0.75 - 0.5 * driver.holder_order
    beta = holder_beta if holder_beta is not None else 0.25
    bound = (
        drift_amp * np.sqrt(d) + wiener_amp * np.sqrt(d * m) + rough_amp * np.sqrt(d * l)
    )
    lipschitz = drift_amp + wiener_amp * np.sqrt(m) + rough_amp * np.sqrt(l)
    time_const = rough_amp * rough_rate * np.sqrt(d * l) * horizon ** (1 - beta)
    return ModelSpec(
        name="bounded_trig",
        state_dim=d,
        initial_value=_as_vector_stack(initial_value, 0, d),
        horizon=horizon,
        drift=_trig_drift(d, drift_amp, drift_rate),
        wiener=_trig_diffusion(d, m, wiener_amp, wiener_rate, 0.7, "cos", "trig-wiener") if m else None,
        rough=_trig_diffusion(d, l, rough_amp, rough_rate, 0.9, "sin", "trig-rough") if l else None,
        driver=driver,
        claimed_set="B",
        claimed_constants={
            "B1": float(bound),
            "B2": float(rough_amp * np.sqrt(l)),
            "B3": float(lipschitz),
            "B4-c": float(time_const),
            "B4-cx": float(rough_amp * rough_rate * np.sqrt(l) * horizon ** (1 - beta)),
        },
        holder_beta=holder_beta,
        params={
            "state_dim": d, "wiener_dim": m, "rough_dim": l, "hurst": hs,
            "drift_amp": drift_amp, "wiener_amp": wiener_amp, "rough_amp": rough_amp,
            "horizon": horizon,
        },
    )


def _geometric_mixed(mu=0.1, sigma_w=0.2, sigma_b=0.3, initial_value=1.0, hurst=0.75, horizon=1.0, holder_order=None):
    spec = _linear_mixed(
        state_dim=1,
        wiener_dim=1,
        rough_dim=1,
        hurst=hurst,
        drift_matrix=mu,
        drift_offset=0.0,
        wiener_matrix=sigma_w,
        wiener_offset=0.0,
        rough_matrix=sigma_b,
        rough_offset=0.0,
        initial_value=initial_value,
        horizon=horizon,
        holder_order=holder_order,
    )
    params = {
        "mu": mu, "sigma_w": sigma_w, "sigma_b": sigma_b,
        "initial_value": initial_value, "hurst": hurst, "horizon": horizon,
    }
    return ModelSpec(
        name="geometric_mixed",
        state_dim=1,
        initial_value=spec.initial_value,
        horizon=horizon,
        drift=spec.drift,
        wiener=spec.wiener,
        rough=spec.rough,
        driver=spec.driver,
        claimed_set="A",
        claimed_constants=spec.claimed_constants,
        params=params,
    )


def _power_envelope_lipschitz(rho: float) -> float:
    """sup_v |d/dv (1+v^2)^(rho/2)|, evaluated numerically with a cushion."""
    v = np.linspace(0.0, 50.0, 200_001)
    g = rho * v * (1.0 + v * v) ** (rho / 2.0 - 1.0)
    return float(g.max()) * 1.05


def _stochvol(
    rho_power=0.2,
    price_drift=0.05,
    wiener_price_vol=0.5,
    rough_price_vol=0.4,
    initial_price=1.0,
    vol_initial=(0.2, 0.3),
    hurst=0.75,
    horizon=1.0,
    holder_order=None,
):
    vol_model = _bounded_trig(
        state_dim=2,
        wiener_dim=1,
        rough_dim=1,
        hurst=hurst,
        drift_amp=0.3,
        wiener_amp=0.4,
        rough_amp=0.2,
        initial_value=np.asarray(vol_initial, dtype=float),
        horizon=horizon,
        holder_order=holder_order,
    )
    mu_p, s_w, s_b, rho = price_drift, wiener_price_vol, rough_price_vol, rho_power

    def price_drift_eval(t, x, y):
        return mu_p * y

    def price_wiener_eval(t, x, y):
        return (s_w * np.tanh(x[:, 0:1]) * y)[:, :, None]

    def envelope(x):
        return (1.0 + x[:, 1:2] ** 2) ** (rho / 2.0)

    def price_rough_eval(t, x, y):
        return (s_b * envelope(x) * y)[:, :, None]

    def price_rough_dy(t, x, y):
        return (s_b * envelope(x))[:, :, None, None]

    driver = DriverSpec(1, 1, (hurst,), holder_order)
    coupled = CoupledModelSpec(
        name="stochvol",
        state_dim=1,
        base_dim=2,
        initial_value=np.asarray([initial_price], dtype=float),
        horizon=horizon,
        drift=CoefficientField("price-drift", "coupled", 1, 0, price_drift_eval),
        wiener=CoefficientField("price-wiener", "coupled", 1, 1, price_wiener_eval),
        rough=CoefficientField("price-rough", "coupled", 1, 1, price_rough_eval, price_rough_dy),
        driver=driver,
        share_drivers=False,
        declared_rho=rho,
        claimed_set="C",
        claimed_constants={
            "C1": mu_p + s_b,
            "C2": s_w,
            "C3": s_b,
            "C4": mu_p + s_w,
            "C5": s_b * _power_envelope_lipschitz(rho),
            "C6-c": 0.0,
            "C6-cy": 0.0,
        },
        params={
            "rho_power": rho, "price_drift": mu_p, "wiener_price_vol": s_w,
            "rough_price_vol": s_b, "initial_price": initial_price,
            "hurst": hurst, "horizon": horizon,
        },
    )
    return vol_model, coupled


def _malliavin_linearized(base: ModelSpec | None = None, initial_value=1.0, **base_params):
    """Linearized sensitivity equation of a differentiable zoo base model.

    Coefficients are the base model's state derivatives applied linearly to
    y, supplied here analytically (no automatic differentiation); the stage
    shares the base model's drivers.
    """
    if base is None:
        base = _geometric_mixed(**base_params)
    if base.name not in ("geometric_mixed", "linear_mixed"):
        raise DomainError(
            "malliavin_linearized needs a base model with analytic derivatives; "
            f"got {base.name!r}"
        )
    d = base.state_dim
    m, l = base.driver.wiener_dim, base.driver.rough_dim
    # Recover the constant Jacobians of the linear base fields.
    probe = np.eye(d)
    zero = np.zeros((1, d))
    drift_jac = np.stack([(base.drift(0.0, probe[i][None, :]) - base.drift(0.0, zero))[0] for i in range(d)], axis=1)

    def lin_drift(t, x, y):
        return y @ drift_jac.T

    def make_block(fld, cols):
        jac0 = fld.jacobian(0.0, zero)[0]  # (d, cols, d), constant in x

        def evaluate(t, x, y):
            return np.einsum("dce,pe->pdc", jac0, y)

        def derivative(t, x, y):
            return np.broadcast_to(jac0[None], (len(y), d, cols, d)).copy()

        return evaluate, derivative

    wiener_field = None
    if m:
        ev, dv = make_block(base.wiener, m)
        wiener_field = CoefficientField("sensitivity-wiener", "coupled", d, m, ev, dv)
    rough_field = None
    if l:
        ev, dv = make_block(base.rough, l)
        rough_field = CoefficientField("sensitivity-rough", "coupled", d, l, ev, dv)

    coupled = CoupledModelSpec(
        name="malliavin_linearized",
        state_dim=d,
        base_dim=d,
        initial_value=_as_vector_stack(initial_value, 0, d),
        horizon=base.horizon,
        drift=CoefficientField("sensitivity-drift", "coupled", d, 0, lin_drift),
        wiener=wiener_field,
        rough=rough_field,
        driver=base.driver,
        share_drivers=True,
        declared_rho=0.0,
        claimed_set=None,
        params={"base": base.name, **dict(base.params)},
    )
    return base, coupled


ZOO_MODELS = (
    "linear_mixed",
    "bounded_trig",
    "geometric_mixed",
    "stochvol",
    "malliavin_linearized",
)


def model_zoo(name: str, **params):
    """Ready-made models for the studies; coupled entries return a pair.

    ``linear_mixed`` satisfies A1–A4, ``bounded_trig`` satisfies B1–B4,
    ``geometric_mixed`` is the constant-volatility price equation with a
    closed form, ``stochvol`` couples a bounded-trig volatility pair to a
    price stage whose coefficients satisfy C1–C6 with the declared growth
    power, and ``malliavin_linearized`` is the linearized sensitivity
    equation of a differentiable base model on shared drivers.
    """
    builders = {
        "linear_mixed": _linear_mixed,
        "bounded_trig": _bounded_trig,
        "geometric_mixed": _geometric_mixed,
        "stochvol": _stochvol,
        "malliavin_linearized": _malliavin_linearized,
    }
    if name not in builders:
        raise DomainError(f"unknown zoo model {name!r}; choose from {sorted(builders)}")
    return builders[name](**params)
