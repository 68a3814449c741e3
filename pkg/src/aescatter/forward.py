"""Single-obstacle forward solver.

Assembles the 6n x 6n Nystrom system for the three coupled boundary
densities (compressional potential, shear potential, exterior acoustic
field), solves it directly, and evaluates far and near fields. Also
provides numerical verification of the layer-potential jump relations and
of the boundary conditions on a shifted collocation grid.

The unknowns are the scaled densities phi_tilde = (g o p) / G, which keeps
third derivatives of the radial function out of the kernels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from .geometry import CurveJet, NodeGrid, StarlikeCurve, jet
from .kernels import grad_phi, hess_phi, kernel_tables, phi
from .quadrature import (
    cauchy_weight_table,
    diff_matrix,
    lagrange_basis_matrix,
    log_weight_table,
)

__all__ = [
    "MaterialParams",
    "IncidentWave",
    "DensitySet",
    "FarField",
    "gamma_far",
    "rhs_plane_wave",
    "assemble_system",
    "solve_densities",
    "solve_forward",
    "far_field",
    "near_field",
    "NearField",
    "jump_check",
    "boundary_residual",
]

_COND_WARN_RCOND = 1e-12
_NEAR_FIELD_CLEARANCE = 1e-3


@dataclass(frozen=True)
class MaterialParams:
    """Physical constants of the fluid-solid configuration.

    Wavenumbers: kappa_p = omega sqrt(rho_e/(lam+2 mu)) (compressional),
    kappa_s = omega sqrt(rho_e/mu) (shear), kappa_a = omega/c (acoustic).
    """

    lam: float
    mu: float
    rho_e: float = 1.0
    rho_a: float = 1.0
    omega: float = 0.7 * np.pi
    c: float = 1.0

    def __post_init__(self):
        if self.mu <= 0.0 or self.lam + self.mu <= 0.0:
            raise ValueError("need mu > 0 and lam + mu > 0")
        if min(self.rho_e, self.rho_a, self.omega, self.c) <= 0.0:
            raise ValueError("densities, frequency and sound speed must be positive")

    @property
    def kappa_p(self) -> float:
        return self.omega * np.sqrt(self.rho_e / (self.lam + 2.0 * self.mu))

    @property
    def kappa_s(self) -> float:
        return self.omega * np.sqrt(self.rho_e / self.mu)

    @property
    def kappa_a(self) -> float:
        return self.omega / self.c

    @staticmethod
    def default() -> "MaterialParams":
        """Configuration used throughout the numerical experiments."""
        return MaterialParams(lam=3.88, mu=2.56)


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave exp(i kappa_a x . d) with direction d = (cos theta, sin theta)."""

    theta: float

    @property
    def direction(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta)])


@dataclass(frozen=True)
class DensitySet:
    """Scaled layer densities sampled at the 2n collocation nodes."""

    phi1_tilde: np.ndarray
    phi2_tilde: np.ndarray
    phi3_tilde: np.ndarray

    def __post_init__(self):
        sizes = {len(self.phi1_tilde), len(self.phi2_tilde), len(self.phi3_tilde)}
        if len(sizes) != 1:
            raise ValueError("density arrays must have equal length")
        for a in (self.phi1_tilde, self.phi2_tilde, self.phi3_tilde):
            if not np.all(np.isfinite(a)):
                raise ValueError("density arrays must be finite")


def gamma_far(kappa: float) -> complex:
    """Far-field normalization e^{i pi/4} / sqrt(8 pi kappa)."""
    return np.exp(0.25j * np.pi) / np.sqrt(8.0 * np.pi * kappa)


@dataclass(frozen=True)
class FarField:
    """Complex far-field samples at the observation angles."""

    angles: np.ndarray
    values: np.ndarray
    gamma_a: complex

    def __post_init__(self):
        if len(self.angles) != len(self.values):
            raise ValueError("angles and values must match in length")


def rhs_plane_wave(
    curve: StarlikeCurve,
    params: MaterialParams,
    wave: IncidentWave,
    grid: NodeGrid,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-hand sides (w1, w2, w3) of the discretized system.

    w1 = -2 u_inc on the boundary, w2 = 0, and w3 carries the normal
    derivative of the incident wave scaled by 1/(omega^2 rho_a).
    """
    jets = jet(curve, grid.nodes)
    d = wave.direction
    uinc = np.exp(1j * params.kappa_a * (jets.p @ d))
    w1 = -2.0 * uinc
    w2 = np.zeros_like(w1)
    w3 = 2j * params.kappa_a * (jets.nu @ d) * uinc / (params.omega**2 * params.rho_a)
    return w1, w2, w3


def _ops(jets: CurveJet, grid: NodeGrid, kappa: float):
    """Quadrature-operator builders for one wavenumber on one grid.

    Returns (S, K, H) where each maps a weight matrix Q[i, j] to the dense
    matrix acting on node samples of the (scaled) density. K and H carry
    the 1/G(t) factor of the parametrized operators.
    """
    n = grid.n
    R = log_weight_table(n)
    T = cauchy_weight_table(n)
    tab = kernel_tables(jets, grid, kappa)
    pin = np.pi / n
    s_core = R * tab.m1 + pin * tab.m2
    k_core = (R * tab.k1 + pin * tab.k2) / jets.G[:, None]
    h_core = (T * tab.h1 + R * tab.h2 + pin * tab.h3) / jets.G[:, None]

    def S(Q):
        return s_core * Q

    def K(Q):
        return k_core * Q

    def H(Q):
        return h_core * Q

    return S, K, H


def assemble_system(
    curve: StarlikeCurve, params: MaterialParams, grid: NodeGrid
) -> np.ndarray:
    """Dense 6n x 6n system matrix on the given collocation grid.

    Row blocks are the three boundary equations at the 2n nodes; column
    blocks are the three scaled densities.
    """
    if grid.n < 8:
        raise ValueError("grid too coarse for the singular quadrature (need n >= 8)")
    jets = jet(curve, grid.nodes)
    N = grid.size
    lam, mu = params.lam, params.mu
    kp, ks, ka = params.kappa_p, params.kappa_s, params.kappa_a
    D = diff_matrix(grid.n)

    nu, tau = jets.nu, jets.tau
    nn, npq = jets.n, jets.n_perp
    nd, npd = jets.n_prime, jets.n_perp_prime
    G = jets.G

    # Q[i, j] geometry factors; source quantities in column index j.
    nu_n = nu @ nn.T          # nu(t_i) . n(s_j)
    nu_np = nu @ npq.T
    nu_npd = nu @ npd.T
    nu_nd = nu @ nd.T
    tau_n = tau @ nn.T
    tau_np = tau @ npq.T
    tau_npd = tau @ npd.T
    tau_nd = tau @ nd.T
    G2 = np.broadcast_to(G**2, (N, N))

    Sp, Kp, Hp = _ops(jets, grid, kp)
    Ss, Ks, Hs = _ops(jets, grid, ks)
    Sa, Ka, Ha = _ops(jets, grid, ka)

    A11 = (
        -mu * kp**2 * Sp(nu_n**2)
        + mu * Kp(nu_np) @ D
        + mu * Kp(nu_npd)
        - mu * Hp(nu_n) @ D
        - mu * Hp(nu_nd)
        - (lam + mu) * kp**2 * Sp(G2)
        + np.diag(mu * np.einsum("ik,ik->i", nu, npd) / G)
    )
    A12 = (
        mu * ks**2 * Ss(nu_np * nu_n)
        + mu * Ks(nu_n) @ D
        + mu * Ks(nu_nd)
        + mu * Hs(nu_np) @ D
        + mu * Hs(nu_npd)
        + mu * D
        + np.diag(mu * np.einsum("ik,ik->i", nu, nd) / G)
    )
    A13 = Sa(G2)

    A21 = (
        -kp**2 * Sp(tau_n * nu_n)
        + Kp(tau_np) @ D
        + Kp(tau_npd)
        - Hp(tau_n) @ D
        - Hp(tau_nd)
        + D
        + np.diag(np.einsum("ik,ik->i", tau, npd) / G)
    )
    A22 = (
        ks**2 * Ss(tau_np * nu_n)
        + Ks(tau_n) @ D
        + Ks(tau_nd)
        + Hs(tau_np) @ D
        + Hs(tau_npd)
        + np.diag(np.einsum("ik,ik->i", tau, nd) / G)
    )
    A23 = np.zeros((N, N), dtype=complex)

    w2r = params.omega**2 * params.rho_a
    A31 = Kp(G2) + np.diag(G)
    A32 = Hs(G2)
    A33 = -Ka(G2) / w2r + np.diag(G / w2r)

    A = np.block([[A11, A12, A13], [A21, A22, A23], [A31, A32, A33]])
    if not np.all(np.isfinite(A)):
        raise FloatingPointError("non-finite entries during system assembly")
    return A


def solve_densities(system: np.ndarray, rhs) -> DensitySet:
    """Direct dense solve of the Nystrom system.

    Warns when the reciprocal condition estimate drops below 1e-12 (an
    interior eigenvalue or a Jones-adjacent frequency can do this).
    """
    b = np.concatenate([np.asarray(r, dtype=complex) for r in rhs])
    if system.shape[0] != system.shape[1] or system.shape[0] != len(b):
        raise ValueError("system and right-hand side sizes do not match")
    lu, piv = lu_factor(system)
    x = lu_solve((lu, piv), b)
    gecon = get_lapack_funcs("gecon", (system,))
    rcond, _ = gecon(lu, np.linalg.norm(system, 1))
    if rcond < _COND_WARN_RCOND:
        warnings.warn(
            f"system is nearly singular (rcond ~ {rcond:.2e}); "
            "possible interior eigenvalue or Jones-adjacent frequency",
            RuntimeWarning,
        )
    resid = np.linalg.norm(system @ x - b)
    bnorm = np.linalg.norm(b)
    if bnorm > 0 and resid / bnorm > 1e-10:
        raise FloatingPointError(f"linear solve residual too large: {resid / bnorm:.2e}")
    N = len(b) // 3
    return DensitySet(x[:N], x[N : 2 * N], x[2 * N :])


def solve_forward(
    curve: StarlikeCurve,
    params: MaterialParams,
    wave: IncidentWave,
    grid: NodeGrid,
) -> DensitySet:
    """Assemble and solve in one step."""
    A = assemble_system(curve, params, grid)
    return solve_densities(A, rhs_plane_wave(curve, params, wave, grid))


def far_field(
    densities: DensitySet,
    curve: StarlikeCurve,
    params: MaterialParams,
    obs_angles,
    grid: NodeGrid | None = None,
) -> FarField:
    """Far-field pattern from the acoustic density by the trapezoidal rule."""
    obs_angles = np.atleast_1d(np.asarray(obs_angles, dtype=float))
    if grid is None:
        grid = NodeGrid(len(densities.phi3_tilde) // 2)
    jets = jet(curve, grid.nodes)
    ka = params.kappa_a
    xhat = np.stack([np.cos(obs_angles), np.sin(obs_angles)], axis=-1)
    phase = np.exp(-1j * ka * xhat @ jets.p.T)
    vals = gamma_far(ka) * (np.pi / grid.n) * (
        phase @ (densities.phi3_tilde * jets.G**2)
    )
    return FarField(angles=obs_angles, values=vals, gamma_a=gamma_far(ka))


class NearField(NamedTuple):
    """Potentials and fields at one evaluation point."""

    phi_p: complex
    psi_s: complex
    u_s: complex
    displacement: np.ndarray


def near_field(
    densities: DensitySet,
    curve: StarlikeCurve,
    params: MaterialParams,
    x,
    grid: NodeGrid | None = None,
) -> NearField:
    """Potentials and elastic displacement at a point off the boundary.

    Plain trapezoid on the smooth integrands; accuracy degrades when x
    approaches the boundary, so points closer than 1e-3 are rejected.
    The displacement is grad(phi) + curl(psi), differentiated under the
    integral sign.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    if grid is None:
        grid = NodeGrid(len(densities.phi3_tilde) // 2)
    jets = jet(curve, grid.nodes)
    dist = np.min(np.linalg.norm(jets.p - x, axis=-1))
    if dist < _NEAR_FIELD_CLEARANCE:
        raise ValueError(f"evaluation point too close to the boundary ({dist:.2e})")

    w = np.pi / grid.n
    th1 = densities.phi1_tilde * jets.G**2
    th2 = densities.phi2_tilde * jets.G**2
    th3 = densities.phi3_tilde * jets.G**2

    phi_p = w * np.sum(phi(x, jets.p, params.kappa_p) * th1)
    psi_s = w * np.sum(phi(x, jets.p, params.kappa_s) * th2)
    u_s = w * np.sum(phi(x, jets.p, params.kappa_a) * th3)

    grad_p = w * np.sum(grad_phi(x, jets.p, params.kappa_p) * th1[:, None], axis=0)
    grad_s = w * np.sum(grad_phi(x, jets.p, params.kappa_s) * th2[:, None], axis=0)
    curl_s = np.array([grad_s[1], -grad_s[0]])
    return NearField(phi_p=phi_p, psi_s=psi_s, u_s=u_s,
                     displacement=grad_p + curl_s)


# ---------------------------------------------------------------------------
# Verification helpers
# ---------------------------------------------------------------------------

def _limit_matrices(jets: CurveJet, grid: NodeGrid, kappa: float):
    """Node-to-node matrices for int Phi g ds and its nu/tau derivatives.

    Applied to samples of theta = G * g; the factor 1/2 converts the
    doubled boundary operators to plain boundary integrals.
    """
    n = grid.n
    R = log_weight_table(n)
    T = cauchy_weight_table(n)
    tab = kernel_tables(jets, grid, kappa)
    pin = np.pi / n
    Smat = 0.5 * (R * tab.m1 + pin * tab.m2)
    Kmat = 0.5 * (R * tab.k1 + pin * tab.k2) / jets.G[:, None]
    Hmat = 0.5 * (T * tab.h1 + R * tab.h2 + pin * tab.h3) / jets.G[:, None]
    return Smat, Kmat, Hmat


def _offside_grad(curve, kappa, g_fn, x_eval, h):
    """grad of the single-layer potential at a point at distance ~h off the
    boundary, by a dense trapezoid rule sized to the near-singularity."""
    N = int(min(2 ** 17, max(4096, 2 ** int(np.ceil(np.log2(60.0 / h))))))
    s = 2.0 * np.pi * np.arange(N) / N
    js = jet(curve, s)
    theta = g_fn(s) * js.G
    gp = grad_phi(x_eval, js.p, kappa)
    return (2.0 * np.pi / N) * np.sum(gp * theta[:, None], axis=0)


def _offside_hess(curve, kappa, g_fn, x_eval, h):
    N = int(min(2 ** 17, max(4096, 2 ** int(np.ceil(np.log2(60.0 / h))))))
    s = 2.0 * np.pi * np.arange(N) / N
    js = jet(curve, s)
    theta = g_fn(s) * js.G
    hp = hess_phi(x_eval, js.p, kappa)
    return (2.0 * np.pi / N) * np.einsum("jkl,j->kl", hp, theta)


def jump_check(
    curve: StarlikeCurve,
    params: MaterialParams,
    density: Callable[[np.ndarray], np.ndarray],
    h_sequence: Sequence[float] = (1e-2, 5e-3, 2.5e-3, 1.25e-3),
    n: int = 64,
    target_indices: Sequence[int] = (0, 17, 51, 90),
) -> dict:
    """Compare one-sided layer-potential derivatives to their limit formulas.

    For each h the potential gradient (and, for the second-derivative
    relations, the Hessian contracted with nu) is evaluated at x +- h nu
    by a dense trapezoid rule, and compared to the one-sided limit computed
    with the singular node quadrature. Errors should decay like h log h.
    """
    kappa = params.kappa_p
    grid = NodeGrid(n)
    jets = jet(curve, grid.nodes)
    Smat, Kmat, Hmat = _limit_matrices(jets, grid, kappa)
    D = diff_matrix(n)

    g = density(grid.nodes)
    theta = jets.G * g
    # Tangential derivatives of g nu and g tau along the curve.
    dgnu = (D @ (g[:, None] * jets.nu)) / jets.G[:, None]
    dgtau = (D @ (g[:, None] * jets.tau)) / jets.G[:, None]

    int_dnu = Kmat @ theta            # nu-component of int grad Phi g ds
    int_dtau = Hmat @ theta
    grad_int = int_dnu[:, None] * jets.nu + int_dtau[:, None] * jets.tau
    curl_int = np.stack([grad_int[:, 1], -grad_int[:, 0]], axis=-1)

    def s_vec(weight_rows, vec):
        # int Phi (vec(y) * weight(y; x_i)) g ds, componentwise
        return np.stack(
            [Smat @ (weight_rows * vec[:, l] * theta) for l in (0, 1)], axis=-1
        )

    report: dict[str, dict] = {}
    for name in ("grad", "curl", "traction_grad", "traction_curl"):
        report[name] = {"h": list(h_sequence), "plus": [], "minus": []}

    for h in h_sequence:
        errs = {name: {"plus": [], "minus": []} for name in report}
        for i in target_indices:
            x0, nu_i, tau_i = jets.p[i], jets.nu[i], jets.tau[i]
            nu_dot = jets.nu @ nu_i   # nu(y) . nu(x_i), per source node
            tau_lim_base = s_vec(nu_dot, jets.nu)      # int Phi <nu,nu> nu(x) g
            curl_lim_base = s_vec(nu_dot, jets.tau)    # int Phi <tau,nu> nu(x) g

            hess_lim = (
                -kappa**2 * tau_lim_base[i]
                - np.stack([Hmat[i] @ (jets.G * dgnu[:, l]) for l in (0, 1)])
                + np.stack([Kmat[i] @ (jets.G * dgtau[:, l]) for l in (0, 1)])
            )
            hess_curl_lim = (
                kappa**2 * curl_lim_base[i]
                + np.stack([Hmat[i] @ (jets.G * dgtau[:, l]) for l in (0, 1)])
                + np.stack([Kmat[i] @ (jets.G * dgnu[:, l]) for l in (0, 1)])
            )

            for sign, key in ((+1.0, "plus"), (-1.0, "minus")):
                xe = x0 + sign * h * nu_i
                grad_num = _offside_grad(curve, kappa, density, xe, h)
                curl_num = np.array([grad_num[1], -grad_num[0]])
                grad_lim = grad_int[i] - sign * 0.5 * nu_i * g[i]
                curl_lim = curl_int[i] + sign * 0.5 * tau_i * g[i]
                errs["grad"][key].append(np.linalg.norm(grad_num - grad_lim))
                errs["curl"][key].append(np.linalg.norm(curl_num - curl_lim))

                hess_num = _offside_hess(curve, kappa, density, xe, h) @ nu_i
                hess_curl_num = np.array([hess_num[1], -hess_num[0]])
                lim1 = hess_lim - sign * 0.5 * dgtau[i]
                lim2 = hess_curl_lim - sign * 0.5 * dgnu[i]
                errs["traction_grad"][key].append(np.linalg.norm(hess_num - lim1))
                errs["traction_curl"][key].append(
                    np.linalg.norm(hess_curl_num - lim2)
                )
        for name in report:
            report[name]["plus"].append(max(errs[name]["plus"]))
            report[name]["minus"].append(max(errs[name]["minus"]))

    for name in report:
        seq = np.maximum(report[name]["plus"], report[name]["minus"])
        report[name]["monotone"] = bool(np.all(np.diff(seq) < 0.0))
    return report


def boundary_residual(
    densities: DensitySet,
    curve: StarlikeCurve,
    params: MaterialParams,
    wave: IncidentWave,
    grid: NodeGrid | None = None,
    offset: float | None = None,
) -> np.ndarray:
    """Max-norm residuals of the three boundary equations at offset nodes.

    The solved densities are trigonometrically interpolated onto a grid
    shifted by half a node spacing, the system is re-assembled there (the
    Cauchy rule needs on-grid targets, so collocation moves with the
    nodes), and the residual against the incident-wave data is measured.
    """
    if grid is None:
        grid = NodeGrid(len(densities.phi3_tilde) // 2)
    if offset is None:
        offset = 0.5 * np.pi / grid.n
    shifted = NodeGrid(grid.n, offset=grid.offset + offset)
    P = lagrange_basis_matrix(grid.n, shifted.nodes - grid.offset)
    x = np.concatenate(
        [P @ densities.phi1_tilde, P @ densities.phi2_tilde, P @ densities.phi3_tilde]
    )
    A = assemble_system(curve, params, shifted)
    b = np.concatenate(rhs_plane_wave(curve, params, wave, shifted))
    res = A @ x - b
    N = shifted.size
    return np.array(
        [
            np.abs(res[:N]).max(),
            np.abs(res[N : 2 * N]).max(),
            np.abs(res[2 * N :]).max(),
        ]
    )
