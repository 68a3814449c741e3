"""Shape reconstruction from phaseless (modulus-only) far-field data.

The modulus of the far field is translation invariant, so a lone obstacle
cannot be located from |u_inf| alone. Scattering the incident wave off the
unknown obstacle together with a known, well-separated reference ball
breaks that invariance: the cross term between the two far-field
contributions carries the obstacle's position. The iteration linearizes
|u_inf|^2 about the current guess (ball fixed, obstacle boundary and
densities updated each step) and takes Tikhonov-regularized steps in the
same center-plus-trig-polynomial parameter space as the phased algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import IncidentWave, MaterialParams
from .geometry import NodeGrid, StarlikeCurve, make_circle
from .inverse_phased import (
    BoundaryUpdate,
    InverseConfig,
    IterationRecord,
    apply_update,
    boundary_error,
    frechet_columns,
    initial_curve,
    noise_samples,
    tikhonov_step,
    trapezoid_norm,
)
from .multibody import (
    TwoBodyDensities,
    far_field_sum,
    separation,
    solve_two_body_forward,
)

__all__ = [
    "PhaselessData",
    "ReferenceBallSpec",
    "add_noise_phaseless",
    "phaseless_residual",
    "phaseless_columns",
    "exact_phaseless_jacobian",
    "run_phaseless",
]

_MIN_BALL_SEPARATION = 0.1
_STEP_SCALES = (1.0, 0.5, 0.25, 0.125, 0.0625)


@dataclass(frozen=True)
class PhaselessData:
    """Squared modulus of the total far field at the observation angles."""

    angles: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "angles", np.asarray(self.angles, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.angles.shape != self.values.shape:
            raise ValueError("angles and values must have matching shapes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("phaseless data must be finite")
        if np.any(self.values < 0.0):
            raise ValueError("squared-modulus data must be non-negative")


@dataclass(frozen=True)
class ReferenceBallSpec:
    """Known circular reference scatterer placed away from the obstacle."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")

    def curve(self) -> StarlikeCurve:
        return make_circle(self.center, self.radius)


def add_noise_phaseless(
    data: PhaselessData, delta: float, seed: int, model: str = "uniform"
) -> PhaselessData:
    """Multiplicative real noise |u|^2 (1 + delta * eta), eta in [-1, 1].

    delta must stay below 1 so the perturbed squared modulus cannot turn
    negative.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError("phaseless noise level must satisfy 0 <= delta < 1")
    rng = np.random.default_rng(seed)
    eta = noise_samples(rng, len(data.values), model)
    return PhaselessData(angles=data.angles, values=data.values * (1.0 + delta * eta))


def phaseless_residual(
    curve_d: StarlikeCurve,
    ball: ReferenceBallSpec,
    densities: TwoBodyDensities,
    params: MaterialParams,
    data: PhaselessData,
    grid: NodeGrid | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Data misfit w and the predicted total far field it was formed from.

    w = |u_inf|^2_observed - |S_inf,D + S_inf,B|^2 at the current guess.
    """
    total = far_field_sum(
        densities, curve_d, ball.curve(), params, data.angles, grid, grid
    )
    return data.values - np.abs(total.values) ** 2, total.values


def phaseless_columns(
    curve_d: StarlikeCurve,
    densities: TwoBodyDensities,
    params: MaterialParams,
    total_values: np.ndarray,
    obs_angles,
    M: int,
    grid: NodeGrid | None = None,
) -> np.ndarray:
    """Real sensitivity matrix of |u_inf|^2 to the obstacle parameters.

    Only the obstacle boundary moves; the chain rule through the squared
    modulus gives 2 Re{conj(total) * dS_inf,D}, where dS_inf,D are the
    phased Frechet columns built from the obstacle's acoustic density.
    """
    B = frechet_columns(curve_d, densities.body_d, params, obs_angles, M, grid)
    return 2.0 * (np.conj(total_values)[:, None] * B).real


def _predicted_modulus(
    curve_d: StarlikeCurve,
    ball_curve: StarlikeCurve,
    params: MaterialParams,
    wave: IncidentWave,
    angles: np.ndarray,
    grid: NodeGrid,
) -> np.ndarray:
    densities = solve_two_body_forward(curve_d, ball_curve, params, wave, grid)
    total = far_field_sum(densities, curve_d, ball_curve, params, angles, grid, grid)
    return np.abs(total.values) ** 2


def exact_phaseless_jacobian(
    curve_d: StarlikeCurve,
    ball_curve: StarlikeCurve,
    params: MaterialParams,
    wave: IncidentWave,
    angles: np.ndarray,
    M: int,
    grid: NodeGrid,
    step: float = 1e-6,
) -> np.ndarray:
    """Central-difference Jacobian of the predicted |u_inf|^2, 2n x (2M+3).

    ``curve_d`` must carry a trigonometric radial profile (every iterate
    of the reconstruction does), since the perturbations go through
    ``apply_update``. Unlike ``phaseless_columns`` the densities are re-solved on every
    perturbed boundary, so the density response to the shape change is
    included. The squared modulus is quadratic in the fields and the
    density response is not a small correction there: the frozen-density
    matrix can point uphill, while this one is the true derivative.
    """
    n_par = 2 * M + 3
    cols = np.empty((len(angles), n_par))
    for i in range(n_par):
        xi = np.zeros(n_par)
        xi[i] = step
        bump = BoundaryUpdate(xi[:2], xi[2 : 3 + M], xi[3 + M :])
        plus = _predicted_modulus(
            apply_update(curve_d, bump), ball_curve, params, wave, angles, grid
        )
        minus = _predicted_modulus(
            apply_update(curve_d, bump.scaled(-1.0)), ball_curve, params, wave, angles, grid
        )
        cols[:, i] = (plus - minus) / (2.0 * step)
    return cols


def run_phaseless(
    data: PhaselessData,
    ball: ReferenceBallSpec,
    params: MaterialParams,
    wave: IncidentWave,
    config: InverseConfig,
    ground_truth: StarlikeCurve | None = None,
) -> list[IterationRecord]:
    """Full reconstruction loop from phaseless total-field data.

    Only the obstacle is updated; the reference ball is trusted as given,
    and every iterate is checked to stay clear of it. Each step solves the
    Tikhonov system with the exact differenced Jacobian of |u_inf|^2 and
    lambda_k equal to the residual norm, then scales the step down (rho,
    rho/2, ...) until the residual actually decreases; candidates that
    pinch the curve, collide with the ball, or break the forward solve are
    skipped. Stops at E_k <= epsilon, at the iteration cap, or when no
    admissible step decreases the residual (stagnation).
    """
    curve = initial_curve(config)
    ball_curve = ball.curve()
    grid = NodeGrid(config.n_forward)
    sep = separation(curve, ball_curve)
    if sep < _MIN_BALL_SEPARATION:
        raise ValueError(
            f"initial guess approaches the reference ball "
            f"(separation {sep:.3f} < {_MIN_BALL_SEPARATION})"
        )
    obs_norm = trapezoid_norm(data.values)
    predicted = _predicted_modulus(curve, ball_curve, params, wave, data.angles, grid)
    residual = trapezoid_norm(data.values - predicted)
    records: list[IterationRecord] = []
    for k in range(config.max_iter + 1):
        E_k = residual / obs_norm
        err = boundary_error(curve, ground_truth) if ground_truth is not None else None
        records.append(IterationRecord(k=k, E_k=E_k, Err_k=err, curve=curve))
        if E_k <= config.epsilon or k == config.max_iter:
            break
        A = exact_phaseless_jacobian(
            curve, ball_curve, params, wave, data.angles, config.M, grid
        )
        w = data.values - predicted
        update = tikhonov_step(A, w, residual, config.M, config.rho)
        accepted = False
        for scale in _STEP_SCALES:
            try:
                candidate = apply_update(curve, update.scaled(scale))
            except ValueError:
                continue
            if separation(candidate, ball_curve) < _MIN_BALL_SEPARATION:
                continue
            try:
                cand_pred = _predicted_modulus(
                    candidate, ball_curve, params, wave, data.angles, grid
                )
            except FloatingPointError:
                continue
            cand_res = trapezoid_norm(data.values - cand_pred)
            if cand_res < residual:
                curve, predicted, residual = candidate, cand_pred, cand_res
                accepted = True
                break
        if not accepted:
            break
    return records
