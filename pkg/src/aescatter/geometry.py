"""Starlike boundary curves and their parametrization data.

A curve is given by p(t) = c + r(t) (cos t, sin t) with a positive,
2pi-periodic radial function r. Everything the integral-equation kernels
need (first and second derivatives, Jacobian, normals, tangents) is
produced analytically by :func:`jet`; no finite differencing anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RadialProfile",
    "AppleProfile",
    "PeanutProfile",
    "ConstantProfile",
    "FourierProfile",
    "StarlikeCurve",
    "CurveJet",
    "NodeGrid",
    "make_apple",
    "make_peanut",
    "make_circle",
    "make_fourier",
    "jet",
    "translate",
]

_POSITIVITY_SAMPLES = 512


class RadialProfile:
    """Radial function r(t) with analytic first and second derivatives."""

    kind = "abstract"

    def radius(self, t):
        raise NotImplementedError

    def dradius(self, t):
        raise NotImplementedError

    def ddradius(self, t):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


class AppleProfile(RadialProfile):
    """r(t) = 0.55 (1 + 0.9 cos t + 0.1 sin 2t) / (1 + 0.75 cos t)."""

    kind = "apple"

    def _parts(self, t):
        num = 0.55 * (1.0 + 0.9 * np.cos(t) + 0.1 * np.sin(2.0 * t))
        dnum = 0.55 * (-0.9 * np.sin(t) + 0.2 * np.cos(2.0 * t))
        ddnum = 0.55 * (-0.9 * np.cos(t) - 0.4 * np.sin(2.0 * t))
        den = 1.0 + 0.75 * np.cos(t)
        dden = -0.75 * np.sin(t)
        ddden = -0.75 * np.cos(t)
        return num, dnum, ddnum, den, dden, ddden

    def radius(self, t):
        num, _, _, den, _, _ = self._parts(t)
        return num / den

    def dradius(self, t):
        num, dnum, _, den, dden, _ = self._parts(t)
        return (dnum * den - num * dden) / den**2

    def ddradius(self, t):
        num, dnum, ddnum, den, dden, ddden = self._parts(t)
        dr = (dnum * den - num * dden) / den**2
        return (ddnum * den - num * ddden) / den**2 - 2.0 * dden * dr / den

    def params(self):
        return {}


class PeanutProfile(RadialProfile):
    """r(t) = 0.65 sqrt(0.25 cos^2 t + sin^2 t)."""

    kind = "peanut"

    def _q(self, t):
        q = 0.25 * np.cos(t) ** 2 + np.sin(t) ** 2
        dq = 0.75 * np.sin(2.0 * t)
        ddq = 1.5 * np.cos(2.0 * t)
        return q, dq, ddq

    def radius(self, t):
        q, _, _ = self._q(t)
        return 0.65 * np.sqrt(q)

    def dradius(self, t):
        q, dq, _ = self._q(t)
        return 0.65 * dq / (2.0 * np.sqrt(q))

    def ddradius(self, t):
        q, dq, ddq = self._q(t)
        return 0.65 * (ddq / (2.0 * np.sqrt(q)) - dq**2 / (4.0 * q**1.5))

    def params(self):
        return {}


class ConstantProfile(RadialProfile):
    kind = "circle"

    def __init__(self, radius: float):
        if radius <= 0.0:
            raise ValueError(f"radius must be positive, got {radius}")
        self._r = float(radius)

    def radius(self, t):
        return np.full_like(np.asarray(t, dtype=float), self._r)

    def dradius(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    ddradius = dradius

    def params(self):
        return {"radius": self._r}


class FourierProfile(RadialProfile):
    """Truncated Fourier series r(t) = a0 + sum a_m cos mt + sum b_m sin mt."""

    kind = "fourier"

    def __init__(self, a, b):
        self.a = np.atleast_1d(np.asarray(a, dtype=float))
        self.b = np.atleast_1d(np.asarray(b, dtype=float)) if len(b) else np.zeros(0)
        if len(self.b) != len(self.a) - 1:
            raise ValueError(
                f"need M sine coefficients for M+1 cosine coefficients, "
                f"got {len(self.b)} and {len(self.a)}"
            )

    def _modes(self, t):
        t = np.asarray(t, dtype=float)
        m = np.arange(1, len(self.a))
        mt = np.multiply.outer(t, m)
        return m, np.cos(mt), np.sin(mt)

    def radius(self, t):
        m, cos_mt, sin_mt = self._modes(t)
        return self.a[0] + cos_mt @ self.a[1:] + sin_mt @ self.b

    def dradius(self, t):
        m, cos_mt, sin_mt = self._modes(t)
        return -sin_mt @ (m * self.a[1:]) + cos_mt @ (m * self.b)

    def ddradius(self, t):
        m, cos_mt, sin_mt = self._modes(t)
        return -cos_mt @ (m**2 * self.a[1:]) - sin_mt @ (m**2 * self.b)

    def params(self):
        return {"a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class StarlikeCurve:
    """Closed boundary curve p(t) = center + r(t) (cos t, sin t).

    Positivity of the radial function is verified on a fine grid at
    construction; inversion updates that pinch the curve fail loudly here.
    """

    center: np.ndarray
    radial: RadialProfile

    def __post_init__(self):
        object.__setattr__(
            self, "center", np.asarray(self.center, dtype=float).reshape(2)
        )
        grid = np.linspace(0.0, 2.0 * np.pi, _POSITIVITY_SAMPLES, endpoint=False)
        r = self.radial.radius(grid)
        if not np.all(np.isfinite(r)) or np.any(r <= 0.0):
            raise ValueError(
                f"radial profile must stay positive; min over grid is {np.min(r)}"
            )

    def point(self, t):
        """Boundary point p(t); t may be scalar or array."""
        t = np.asarray(t, dtype=float)
        r = self.radial.radius(t)
        return self.center + np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def to_dict(self) -> dict:
        return {
            "kind": self.radial.kind,
            "center": self.center.tolist(),
            "parameters": self.radial.params(),
        }

    @staticmethod
    def from_dict(record: dict) -> "StarlikeCurve":
        kind = record["kind"]
        center = record["center"]
        params = record.get("parameters", {})
        if kind == "apple":
            return StarlikeCurve(center, AppleProfile())
        if kind == "peanut":
            return StarlikeCurve(center, PeanutProfile())
        if kind == "circle":
            return StarlikeCurve(center, ConstantProfile(params["radius"]))
        if kind == "fourier":
            return StarlikeCurve(center, FourierProfile(params["a"], params["b"]))
        raise ValueError(f"unknown curve kind {kind!r}")


@dataclass(frozen=True)
class CurveJet:
    """Pointwise curve data used by the kernels.

    ``n = (p2', -p1')`` is the unnormalized outward normal (length G),
    ``n_perp = (p1', p2')`` the unnormalized tangent; ``n_prime`` and
    ``n_perp_prime`` are their derivatives built from p''.
    """

    p: np.ndarray
    dp: np.ndarray
    ddp: np.ndarray
    G: np.ndarray
    n: np.ndarray
    n_perp: np.ndarray
    nu: np.ndarray
    tau: np.ndarray
    n_prime: np.ndarray
    n_perp_prime: np.ndarray


def jet(curve: StarlikeCurve, t) -> CurveJet:
    """Evaluate the curve and all derived frame quantities at angle(s) t."""
    t = np.asarray(t, dtype=float)
    r = curve.radial.radius(t)
    dr = curve.radial.dradius(t)
    ddr = curve.radial.ddradius(t)
    c, s = np.cos(t), np.sin(t)
    e_r = np.stack([c, s], axis=-1)
    e_t = np.stack([-s, c], axis=-1)

    p = curve.center + r[..., None] * e_r
    dp = dr[..., None] * e_r + r[..., None] * e_t
    ddp = (ddr - r)[..., None] * e_r + (2.0 * dr)[..., None] * e_t

    G = np.sqrt(dr**2 + r**2)
    n = np.stack([dp[..., 1], -dp[..., 0]], axis=-1)
    n_perp = dp
    n_prime = np.stack([ddp[..., 1], -ddp[..., 0]], axis=-1)
    n_perp_prime = ddp
    nu = n / G[..., None]
    tau = n_perp / G[..., None]
    return CurveJet(
        p=p, dp=dp, ddp=ddp, G=G, n=n, n_perp=n_perp,
        nu=nu, tau=tau, n_prime=n_prime, n_perp_prime=n_perp_prime,
    )


@dataclass(frozen=True)
class NodeGrid:
    """Equispaced collocation grid with 2n angles pi*j/n, j = 0..2n-1.

    ``offset`` shifts every node by the same amount; the quadrature rules
    only need the grid to be equispaced and the target to sit on it.
    """

    n: int
    offset: float = 0.0
    nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid size n must be >= 1")
        nodes = np.pi * np.arange(2 * self.n) / self.n + self.offset
        object.__setattr__(self, "nodes", nodes)

    @property
    def size(self) -> int:
        return 2 * self.n


def make_apple() -> StarlikeCurve:
    """Apple-shaped test obstacle centered at the origin."""
    return StarlikeCurve(np.zeros(2), AppleProfile())


def make_peanut() -> StarlikeCurve:
    """Peanut-shaped test obstacle centered at the origin."""
    return StarlikeCurve(np.zeros(2), PeanutProfile())


def make_circle(center, radius: float) -> StarlikeCurve:
    return StarlikeCurve(center, ConstantProfile(radius))


def make_fourier(center, a, b) -> StarlikeCurve:
    """Curve with radial profile a[0] + sum a[m] cos mt + sum b[m] sin mt."""
    return StarlikeCurve(center, FourierProfile(a, b))


def translate(curve: StarlikeCurve, h) -> StarlikeCurve:
    """Shift the whole curve by h, keeping the radial profile."""
    return StarlikeCurve(curve.center + np.asarray(h, dtype=float), curve.radial)
