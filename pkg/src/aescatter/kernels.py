"""Fundamental solution of the 2D Helmholtz equation and kernel splittings.

The parametrized layer kernels are split into a smooth factor times the
periodic log singularity ln(4 sin^2((t-ς)/2)) (plus, for the tangential
kernel, a 1/sin(ς-t) Cauchy factor) and an analytic remainder, so each
piece can be integrated by the matching quadrature rule. The diagonal
limits of all split parts are closed-form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CurveJet, NodeGrid, StarlikeCurve, jet
from .specfun import (
    EULER_GAMMA,
    bessel_j0,
    bessel_j1,
    hankel1_0,
    hankel1_1,
)

__all__ = [
    "phi",
    "grad_phi",
    "hess_phi",
    "KernelSplitM",
    "KernelSplitK",
    "KernelSplitH",
    "split_m",
    "split_k",
    "split_h",
    "KernelTables",
    "kernel_tables",
]

# Below this parameter separation the splits subtract two diverging terms;
# switch to the closed-form diagonal limit instead.
_DIAGONAL_SWITCH = 1e-6


def phi(x, y, kappa: float):
    """Fundamental solution (i/4) H0^(1)(kappa |x - y|); x, y may be batched."""
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    r = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), axis=-1)
    if np.any(r == 0.0):
        raise ValueError("phi is singular at coincident points")
    return 0.25j * hankel1_0(kappa * r)


def grad_phi(x, y, kappa: float):
    """Gradient of phi in x: -(i kappa / 4) H1^(1)(kappa r) (x - y)/r."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("grad_phi is singular at coincident points")
    return -0.25j * kappa * (hankel1_1(kappa * r) / r)[..., None] * d


def hess_phi(x, y, kappa: float):
    """Hessian of phi in x, in closed form.

    H = -(i kappa/4) [kappa H1'(kappa r) rr^T + H1(kappa r)(I - rr^T)/r]
    with H1'(z) = H0(z) - H1(z)/z and the unit vector r = (x-y)/|x-y|.
    Used for the cross-body traction operators, where the two bodies are
    well separated and the closed form is stable.
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("hess_phi is singular at coincident points")
    rhat = d / r[..., None]
    outer = rhat[..., :, None] * rhat[..., None, :]
    eye = np.eye(2)
    z = kappa * r
    h1 = hankel1_1(z)
    dh1 = hankel1_0(z) - h1 / z
    rad = (kappa * dh1)[..., None, None] * outer
    tan = (h1 / r)[..., None, None] * (eye - outer)
    return -0.25j * kappa * (rad + tan)


@dataclass(frozen=True)
class KernelSplitM:
    """Single-layer kernel split: M = m1 * ln(4 sin^2((t-ς)/2)) + m2."""

    m1: complex
    m2: complex


@dataclass(frozen=True)
class KernelSplitK:
    """Normal-derivative kernel split: K = k1 * ln(4 sin^2((t-ς)/2)) + k2."""

    k1: complex
    k2: complex


@dataclass(frozen=True)
class KernelSplitH:
    """Tangential-derivative kernel split.

    H = h1 / sin(ς-t) + h2 * ln(4 sin^2((t-ς)/2)) + h3.
    """

    h1: complex
    h2: complex
    h3: complex


def _wrap(angle: float) -> float:
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def _log_sing(t: float, s: float) -> float:
    return np.log(4.0 * np.sin((t - s) / 2.0) ** 2)


def split_m(curve: StarlikeCurve, t: float, s: float, kappa: float) -> KernelSplitM:
    """Split parts of the parametrized single-layer kernel at (t, ς)."""
    if abs(_wrap(t - s)) < _DIAGONAL_SWITCH:
        jt = jet(curve, t)
        m2 = 0.5j - EULER_GAMMA / np.pi - np.log(0.5 * kappa * jt.G) / np.pi
        return KernelSplitM(m1=-1.0 / (2.0 * np.pi), m2=complex(m2))
    pt, ps = curve.point(t), curve.point(s)
    r = np.linalg.norm(pt - ps)
    direct = 0.5j * hankel1_0(kappa * r)
    m1 = -bessel_j0(kappa * r) / (2.0 * np.pi)
    return KernelSplitM(m1=float(m1), m2=complex(direct - m1 * _log_sing(t, s)))


def split_k(curve: StarlikeCurve, t: float, s: float, kappa: float) -> KernelSplitK:
    """Split parts of the parametrized normal-derivative kernel at (t, ς)."""
    jt = jet(curve, t)
    if abs(_wrap(t - s)) < _DIAGONAL_SWITCH:
        k2 = (jt.n @ jt.ddp) / (2.0 * np.pi * jt.G**2)
        return KernelSplitK(k1=0.0, k2=float(k2))
    ps = curve.point(s)
    d = ps - jt.p
    r = np.linalg.norm(d)
    direct = 0.5j * kappa * (jt.n @ d) * hankel1_1(kappa * r) / r
    k1 = kappa * (jt.n @ (-d)) * bessel_j1(kappa * r) / (2.0 * np.pi * r)
    return KernelSplitK(k1=float(k1), k2=complex(direct - k1 * _log_sing(t, s)))


def split_h(curve: StarlikeCurve, t: float, s: float, kappa: float) -> KernelSplitH:
    """Split parts of the parametrized tangential-derivative kernel at (t, ς)."""
    jt = jet(curve, t)
    if abs(_wrap(t - s)) < _DIAGONAL_SWITCH:
        return KernelSplitH(h1=1.0 / np.pi, h2=0.0, h3=0.0)
    ps = curve.point(s)
    d = ps - jt.p
    r = np.linalg.norm(d)
    direct = 0.5j * kappa * (jt.n_perp @ d) * hankel1_1(kappa * r) / r
    h1_over_sin = (jt.n_perp @ d) / (np.pi * r**2)
    h1 = h1_over_sin * np.sin(s - t)
    h2 = kappa * (jt.n_perp @ (-d)) * bessel_j1(kappa * r) / (2.0 * np.pi * r)
    h3 = direct - h1_over_sin - h2 * _log_sing(t, s)
    return KernelSplitH(h1=float(h1), h2=float(h2), h3=complex(h3))


@dataclass(frozen=True)
class KernelTables:
    """All split-kernel matrices on a grid, indexed [target, source]."""

    m1: np.ndarray
    m2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    h1: np.ndarray
    h1_over_sin: np.ndarray
    h2: np.ndarray
    h3: np.ndarray


def kernel_tables(jets: CurveJet, grid: NodeGrid, kappa: float) -> KernelTables:
    """Evaluate every split part at all node pairs of the grid.

    ``jets`` must hold the curve data at the grid nodes. Diagonal entries
    are the closed-form limits; 1/sin(ς-t) is never formed near its zeros
    (the ratio h1/sin is evaluated directly, which is smooth there).
    """
    t = grid.nodes
    N = grid.size
    d = jets.p[None, :, :] - jets.p[:, None, :]        # p(ς_j) - p(t_i)
    r = np.linalg.norm(d, axis=-1)
    np.fill_diagonal(r, 1.0)                           # placeholder, overwritten

    z = kappa * r
    h0, h1b = hankel1_0(z), hankel1_1(z)
    j0, j1b = bessel_j0(z), bessel_j1(z)
    dt = t[:, None] - t[None, :]
    logsin = np.log(4.0 * np.sin(dt / 2.0) ** 2 + np.eye(N))  # diag patched below

    n_dot = np.einsum("ik,ijk->ij", jets.n, d)         # n(t_i) . (p_j - p_i)
    np_dot = np.einsum("ik,ijk->ij", jets.n_perp, d)

    m1 = -j0 / (2.0 * np.pi)
    m2 = 0.5j * h0 - m1 * logsin
    k1 = -kappa * n_dot * j1b / (2.0 * np.pi * r)
    k2 = 0.5j * kappa * n_dot * h1b / r - k1 * logsin
    h1_over_sin = np_dot / (np.pi * r**2)
    h1 = h1_over_sin * np.sin(-dt)
    h2 = -kappa * np_dot * j1b / (2.0 * np.pi * r)
    h3 = 0.5j * kappa * np_dot * h1b / r - h1_over_sin - h2 * logsin

    idx = np.arange(N)
    m1[idx, idx] = -1.0 / (2.0 * np.pi)
    m2[idx, idx] = 0.5j - EULER_GAMMA / np.pi - np.log(0.5 * kappa * jets.G) / np.pi
    k1[idx, idx] = 0.0
    k2[idx, idx] = np.einsum("ik,ik->i", jets.n, jets.ddp) / (2.0 * np.pi * jets.G**2)
    h1[idx, idx] = 1.0 / np.pi
    h1_over_sin[idx, idx] = 0.0  # unused: the Cauchy weight vanishes at its own node
    h2[idx, idx] = 0.0
    h3[idx, idx] = 0.0
    return KernelTables(m1=m1, m2=m2, k1=k1, k2=k2,
                        h1=h1, h1_over_sin=h1_over_sin, h2=h2, h3=h3)
