"""Two-body forward solver for an obstacle together with a reference ball.

The coupled system on Gamma_D and Gamma_B reuses the single-body assembly
for the self-interaction blocks; the cross-interaction kernels are smooth
(the bodies are disjoint) and are discretized by the plain trapezoid rule,
with the traction terms built from the closed-form Hessian of the
fundamental solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import (
    DensitySet,
    FarField,
    IncidentWave,
    MaterialParams,
    assemble_system,
    far_field,
    gamma_far,
    rhs_plane_wave,
    solve_densities,
)
from .geometry import NodeGrid, StarlikeCurve, jet
from .kernels import grad_phi, hess_phi, phi

__all__ = [
    "TwoBodyDensities",
    "separation",
    "assemble_two_body",
    "solve_two_body",
    "solve_two_body_forward",
    "far_field_sum",
]

_MIN_SEPARATION = 0.1


@dataclass(frozen=True)
class TwoBodyDensities:
    """Scaled layer densities on the obstacle (D) and the ball (B)."""

    body_d: DensitySet
    body_b: DensitySet


def separation(curve_a: StarlikeCurve, curve_b: StarlikeCurve, samples: int = 256) -> float:
    """Minimum point-to-point distance between two boundary curves."""
    t = 2.0 * np.pi * np.arange(samples) / samples
    pa, pb = curve_a.point(t), curve_b.point(t)
    return float(np.min(np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=-1)))


def _cross_blocks(
    jets_t, jets_s, grid_s: NodeGrid, params: MaterialParams
) -> np.ndarray:
    """Rows: three equations at the target body's nodes; columns: the
    source body's three densities. All kernels are evaluated pointwise and
    weighted by the trapezoid rule with the source Jacobian squared (the
    densities are scaled by 1/G)."""
    kp, ks, ka = params.kappa_p, params.kappa_s, params.kappa_a
    lam, mu = params.lam, params.mu
    w2r = params.omega**2 * params.rho_a
    x, y = jets_t.p, jets_s.p
    nu, tau = jets_t.nu, jets_t.tau
    wj = (np.pi / grid_s.n) * jets_s.G**2

    Hp = hess_phi(x[:, None, :], y[None, :, :], kp)
    Hs = hess_phi(x[:, None, :], y[None, :, :], ks)
    nuHp_nu = np.einsum("ik,ijkl,il->ij", nu, Hp, nu)
    tauHs_nu = np.einsum("ik,ijkl,il->ij", tau, Hs, nu)
    tauHp_nu = np.einsum("ik,ijkl,il->ij", tau, Hp, nu)
    nuHs_nu = np.einsum("ik,ijkl,il->ij", nu, Hs, nu)

    phi_p = phi(x[:, None, :], y[None, :, :], kp)
    phi_a = phi(x[:, None, :], y[None, :, :], ka)
    gp = grad_phi(x[:, None, :], y[None, :, :], kp)
    gs = grad_phi(x[:, None, :], y[None, :, :], ks)
    ga = grad_phi(x[:, None, :], y[None, :, :], ka)
    nu_gp = np.einsum("ik,ijk->ij", nu, gp)
    tau_gs = np.einsum("ik,ijk->ij", tau, gs)
    nu_ga = np.einsum("ik,ijk->ij", nu, ga)

    A11 = 2.0 * (mu * nuHp_nu - (lam + mu) * kp**2 * phi_p) * wj
    A12 = 2.0 * mu * tauHs_nu * wj
    A13 = 2.0 * phi_a * wj
    A21 = 2.0 * tauHp_nu * wj
    A22 = -2.0 * nuHs_nu * wj
    A23 = np.zeros_like(A13)
    A31 = 2.0 * nu_gp * wj
    A32 = 2.0 * tau_gs * wj
    A33 = -2.0 * nu_ga * wj / w2r
    return np.block([[A11, A12, A13], [A21, A22, A23], [A31, A32, A33]])


def assemble_two_body(
    curve_d: StarlikeCurve,
    curve_b: StarlikeCurve,
    params: MaterialParams,
    grid_d: NodeGrid,
    grid_b: NodeGrid | None = None,
) -> np.ndarray:
    """Block system for the coupled obstacle-ball scattering problem.

    Unknown ordering is [densities on D, densities on B]; self-blocks are
    exactly the single-body system matrices.
    """
    if grid_b is None:
        grid_b = NodeGrid(grid_d.n)
    sep = separation(curve_d, curve_b)
    if sep < _MIN_SEPARATION:
        raise ValueError(
            f"bodies too close (separation {sep:.3f} < {_MIN_SEPARATION}); "
            "the cross kernels would be nearly singular"
        )
    jets_d = jet(curve_d, grid_d.nodes)
    jets_b = jet(curve_b, grid_b.nodes)
    A_dd = assemble_system(curve_d, params, grid_d)
    A_bb = assemble_system(curve_b, params, grid_b)
    A_db = _cross_blocks(jets_d, jets_b, grid_b, params)
    A_bd = _cross_blocks(jets_b, jets_d, grid_d, params)
    return np.block([[A_dd, A_db], [A_bd, A_bb]])


def solve_two_body(system: np.ndarray, rhs_d, rhs_b) -> TwoBodyDensities:
    """Direct solve; splits the solution back into per-body densities."""
    b_d = np.concatenate([np.asarray(r, dtype=complex) for r in rhs_d])
    b_b = np.concatenate([np.asarray(r, dtype=complex) for r in rhs_b])
    combined = solve_densities(system, (np.concatenate([b_d, b_b]),))
    x = np.concatenate([combined.phi1_tilde, combined.phi2_tilde, combined.phi3_tilde])
    Nd, Nb = len(b_d) // 3, len(b_b) // 3
    xd, xb = x[: 3 * Nd], x[3 * Nd :]
    return TwoBodyDensities(
        body_d=DensitySet(xd[:Nd], xd[Nd : 2 * Nd], xd[2 * Nd :]),
        body_b=DensitySet(xb[:Nb], xb[Nb : 2 * Nb], xb[2 * Nb :]),
    )


def solve_two_body_forward(
    curve_d: StarlikeCurve,
    curve_b: StarlikeCurve,
    params: MaterialParams,
    wave: IncidentWave,
    grid_d: NodeGrid,
    grid_b: NodeGrid | None = None,
) -> TwoBodyDensities:
    """Assemble and solve the two-body plane-wave scattering problem."""
    if grid_b is None:
        grid_b = NodeGrid(grid_d.n)
    A = assemble_two_body(curve_d, curve_b, params, grid_d, grid_b)
    rhs_d = rhs_plane_wave(curve_d, params, wave, grid_d)
    rhs_b = rhs_plane_wave(curve_b, params, wave, grid_b)
    return solve_two_body(A, rhs_d, rhs_b)


def far_field_sum(
    densities: TwoBodyDensities,
    curve_d: StarlikeCurve,
    curve_b: StarlikeCurve,
    params: MaterialParams,
    obs_angles,
    grid_d: NodeGrid | None = None,
    grid_b: NodeGrid | None = None,
) -> FarField:
    """Total far field: sum of the two single-layer far-field quadratures."""
    ff_d = far_field(densities.body_d, curve_d, params, obs_angles, grid_d)
    ff_b = far_field(densities.body_b, curve_b, params, obs_angles, grid_b)
    return FarField(
        angles=ff_d.angles,
        values=ff_d.values + ff_b.values,
        gamma_a=gamma_far(params.kappa_a),
    )
