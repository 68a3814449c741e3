"""Batch front end: synthetic data generation, reconstruction runs, checks.

Commands
--------
``aescatter forward <config>``
    Solve the forward problem on the configured obstacle (plus reference
    ball if one is given) and write far-field data files.
``aescatter invert <config> <data> [--phaseless]``
    Run the phased or phaseless reconstruction against a data file; write
    the iteration history and plot-ready boundary samples. Exit code 0
    when the stopping tolerance was reached, 2 otherwise.
``aescatter verify [--quick]``
    Run the analytic self-checks (quadrature identities, special-function
    identity, translation covariance, jump relations, derivative checks)
    and report measured errors.

All outputs go to the directory named by the ``AESCATTER_OUTPUT_DIR``
environment variable (default: current directory). Data files are plain
whitespace-separated tables: phased rows are ``angle re im``, phaseless
rows are ``angle abs2``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .forward import FarField, IncidentWave, MaterialParams, far_field, solve_forward
from .geometry import (
    NodeGrid,
    StarlikeCurve,
    jet,
    make_apple,
    make_circle,
    make_fourier,
    make_peanut,
    translate,
)
from .inverse_phased import (
    InverseConfig,
    add_noise_phased,
    boundary_error,
    frechet_columns,
    run_phased,
    trapezoid_norm,
)
from .inverse_phaseless import (
    PhaselessData,
    ReferenceBallSpec,
    add_noise_phaseless,
    run_phaseless,
)
from .multibody import far_field_sum, solve_two_body_forward
from .quadrature import cauchy_weights, diff_weights, log_weights
from .specfun import bessel_j0, bessel_j1, bessel_y0, bessel_y1

__all__ = ["load_config", "dump_config", "cmd_forward", "cmd_invert", "cmd_verify", "main"]

_DEFAULTS = {
    "material": {"lam": 3.88, "mu": 2.56, "rho_e": 1.0, "rho_a": 1.0,
                 "omega": 0.7 * np.pi, "c": 1.0},
    "wave": {"theta": np.pi / 8},
    "obstacle": {"kind": "apple"},
    "ball": None,
    "grids": {"n_data": 100, "n_forward": 64, "observation_points": 128},
    "inversion": {"initial_center": [-0.6, -0.3], "initial_radius": 0.4,
                  "epsilon": 0.2, "M": 6, "rho": 0.9, "max_iter": 50},
    "noise": {"delta": 0.0, "model": "uniform"},
    "seed": 0,
}


def load_config(path) -> dict:
    """Parse a JSON config file and fill in all defaults.

    The result is fully populated, so dumping and re-loading it is
    idempotent.
    """
    with open(path) as f:
        raw = json.load(f)
    cfg = {}
    for key, default in _DEFAULTS.items():
        if isinstance(default, dict):
            merged = dict(default)
            merged.update(raw.get(key) or {})
            cfg[key] = merged
        else:
            cfg[key] = raw.get(key, default)
    if raw.get("ball") is not None:
        cfg["ball"] = dict(raw["ball"])
    return cfg


def dump_config(cfg: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(cfg, f, indent=2, sort_keys=True)
        f.write("\n")


def _material(cfg: dict) -> MaterialParams:
    m = cfg["material"]
    return MaterialParams(lam=m["lam"], mu=m["mu"], rho_e=m["rho_e"],
                          rho_a=m["rho_a"], omega=m["omega"], c=m["c"])


def _obstacle(cfg: dict) -> StarlikeCurve:
    spec = cfg["obstacle"]
    kind = spec["kind"]
    if kind == "apple":
        return make_apple()
    if kind == "peanut":
        return make_peanut()
    if kind == "circle":
        return make_circle(tuple(spec["center"]), spec["radius"])
    if kind == "fourier":
        return make_fourier(tuple(spec["center"]), spec["a"], spec.get("b", []))
    raise ValueError(f"unknown obstacle kind {kind!r}")


def _ball(cfg: dict) -> ReferenceBallSpec | None:
    if cfg.get("ball") is None:
        return None
    return ReferenceBallSpec(tuple(cfg["ball"]["center"]), cfg["ball"]["radius"])


def _inverse_config(cfg: dict) -> InverseConfig:
    inv = cfg["inversion"]
    return InverseConfig(
        initial_center=tuple(inv["initial_center"]),
        initial_radius=inv["initial_radius"],
        epsilon=inv["epsilon"],
        M=inv["M"],
        rho=inv["rho"],
        max_iter=inv["max_iter"],
        n_forward=cfg["grids"]["n_forward"],
        noise_model=cfg["noise"]["model"],
    )


def _out_dir() -> Path:
    out = Path(os.environ.get("AESCATTER_OUTPUT_DIR", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _obs_angles(cfg: dict) -> np.ndarray:
    n_obs = cfg["grids"]["observation_points"]
    return 2.0 * np.pi * np.arange(n_obs) / n_obs


def cmd_forward(config_path) -> list[Path]:
    """Generate far-field data files from a config; returns written paths."""
    cfg = load_config(config_path)
    params = _material(cfg)
    wave = IncidentWave(cfg["wave"]["theta"])
    curve = _obstacle(cfg)
    ball = _ball(cfg)
    grid = NodeGrid(cfg["grids"]["n_data"])
    angles = _obs_angles(cfg)
    delta, model = cfg["noise"]["delta"], cfg["noise"]["model"]
    seed = cfg["seed"]
    out = _out_dir()
    stem = Path(config_path).stem
    written = []

    if ball is None:
        densities = solve_forward(curve, params, wave, grid)
        ff = far_field(densities, curve, params, angles, grid)
        if delta > 0.0:
            ff = add_noise_phased(ff, delta, seed, model)
        path = out / f"{stem}_phased.dat"
        table = np.column_stack([ff.angles, ff.values.real, ff.values.imag])
        np.savetxt(path, table, header="angle re im")
        written.append(path)
    else:
        densities = solve_two_body_forward(curve, ball.curve(), params, wave, grid)
        total = far_field_sum(densities, curve, ball.curve(), params, angles, grid, grid)
        data = PhaselessData(angles, np.abs(total.values) ** 2)
        if delta > 0.0:
            data = add_noise_phaseless(data, delta, seed, model)
        path = out / f"{stem}_phaseless.dat"
        np.savetxt(path, np.column_stack([data.angles, data.values]),
                   header="angle abs2")
        written.append(path)
    return written


def _write_history(path: Path, records, M: int, ball: ReferenceBallSpec | None) -> None:
    have_err = records[0].Err_k is not None
    cols = ["k", "E_k"] + (["Err_k"] if have_err else [])
    cols += ["c1", "c2"] + [f"a{m}" for m in range(M + 1)] + [f"b{m}" for m in range(1, M + 1)]
    header = " ".join(cols)
    if ball is not None:
        header = (f"reference ball: center=({ball.center[0]}, {ball.center[1]}) "
                  f"radius={ball.radius}\n") + header
    rows = []
    for rec in records:
        radial = rec.curve.radial
        a = np.zeros(M + 1)
        b = np.zeros(M)
        a[: len(radial.a)] = radial.a
        b[: len(radial.b)] = radial.b
        row = [rec.k, rec.E_k] + ([rec.Err_k] if have_err else [])
        row += list(rec.curve.center) + list(a) + list(b)
        rows.append(row)
    np.savetxt(path, np.array(rows), header=header)


def _write_curve(path: Path, curve: StarlikeCurve, samples: int = 256) -> None:
    t = 2.0 * np.pi * np.arange(samples) / samples
    p = curve.point(t)
    np.savetxt(path, np.column_stack([t, p[:, 0], p[:, 1]]), header="t x y")


def cmd_invert(config_path, data_path, phaseless: bool = False) -> int:
    """Run a reconstruction against a data file; 0 on convergence, 2 otherwise."""
    cfg = load_config(config_path)
    params = _material(cfg)
    wave = IncidentWave(cfg["wave"]["theta"])
    inv_cfg = _inverse_config(cfg)
    truth = _obstacle(cfg) if cfg["obstacle"]["kind"] in ("apple", "peanut") else None
    out = _out_dir()
    stem = Path(data_path).stem
    table = np.loadtxt(data_path)

    if phaseless:
        ball = _ball(cfg)
        if ball is None:
            raise ValueError("phaseless inversion needs a ball section in the config")
        data = PhaselessData(table[:, 0], table[:, 1])
        records = run_phaseless(data, ball, params, wave, inv_cfg, ground_truth=truth)
    else:
        ball = None
        observed = FarField(angles=table[:, 0],
                            values=table[:, 1] + 1j * table[:, 2],
                            gamma_a=0.0)
        records = run_phased(observed, params, wave, inv_cfg, ground_truth=truth)

    _write_history(out / f"{stem}_history.dat", records, inv_cfg.M, ball)
    _write_curve(out / f"{stem}_curve.dat", records[-1].curve)
    if truth is not None:
        _write_curve(out / f"{stem}_truth.dat", truth)
    final = records[-1]
    print(f"stopped at k={final.k} with E_k={final.E_k:.6g}"
          + (f" Err_k={final.Err_k:.6g}" if final.Err_k is not None else ""))
    return 0 if final.E_k <= inv_cfg.epsilon else 2


def _check(name: str, measured: float, tol: float, lines: list[str]) -> bool:
    ok = measured <= tol
    lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {measured:.3e} (tol {tol:.0e})")
    return ok


def cmd_verify(quick: bool = False) -> tuple[bool, str]:
    """Run the analytic self-checks; returns (all_passed, report text)."""
    lines: list[str] = []
    ok = True
    params = MaterialParams.default()

    # Quadrature identities.
    n = 16
    t = np.pi * 5 / n
    nodes = np.pi * np.arange(2 * n) / n
    ok &= _check("log weights sum to zero", abs(log_weights(t, n).sum()), 1e-12, lines)
    R = log_weights(t, n)
    worst = max(
        abs(R @ np.cos(m * nodes) + (2 * np.pi / m) * np.cos(m * t))
        for m in range(1, 9)
    )
    ok &= _check("log weights Fourier modes", worst, 1e-12, lines)
    T = cauchy_weights(t, n)
    ok &= _check("cauchy weights identity",
                 abs(T @ np.sin(nodes - t) - 2 * np.pi), 1e-12, lines)
    d = diff_weights(n)
    idx = (np.arange(2 * n)[:, None] - np.arange(2 * n)[None, :]) + 2 * n - 1
    D = d[idx]
    ok &= _check("differentiation weights",
                 np.abs(D @ np.cos(3 * nodes) + 3 * np.sin(3 * nodes)).max(),
                 1e-12, lines)

    # Special-function identity (Wronskian).
    x = np.linspace(1e-3, 50.0, 2000)
    wron = bessel_j1(x) * bessel_y0(x) - bessel_j0(x) * bessel_y1(x)
    ok &= _check("Bessel Wronskian", np.abs(wron - 2.0 / (np.pi * x)).max(), 1e-11, lines)

    # Translation covariance of the far field.
    curve = make_apple()
    h = np.array([0.5, 0.3])
    wave = IncidentWave(np.pi / 8)
    grid = NodeGrid(32 if quick else 64)
    angles = 2.0 * np.pi * np.arange(64) / 64
    ff = far_field(solve_forward(curve, params, wave, grid), curve, params, angles, grid)
    moved = translate(curve, h)
    ff_h = far_field(solve_forward(moved, params, wave, grid), moved, params, angles, grid)
    xhat = np.column_stack([np.cos(angles), np.sin(angles)])
    factor = np.exp(1j * params.kappa_a * (wave.direction - xhat) @ h)
    ok &= _check("translation covariance (phase)",
                 np.abs(ff_h.values - factor * ff.values).max(), 1e-6, lines)
    ok &= _check("translation covariance (modulus)",
                 np.abs(np.abs(ff_h.values) - np.abs(ff.values)).max(), 1e-6, lines)

    # Frechet columns vs central differences (frozen densities).
    densities = solve_forward(curve, params, wave, grid)
    B = frechet_columns(curve, densities, params, angles, 6, grid)
    rng = np.random.default_rng(5)
    eps = 1e-5
    worst_fd = 0.0
    from .inverse_phased import BoundaryUpdate

    for _ in range(2 if quick else 5):
        xi = rng.standard_normal(15)
        xi /= np.linalg.norm(xi)
        upd = BoundaryUpdate(eps * xi[:2], eps * xi[2:9], eps * xi[9:])

        def perturbed(sign):
            shift = sign * upd.delta_c
            t_nodes = grid.nodes
            dr = sign * upd.delta_r(t_nodes)
            jets_p = curve.point(t_nodes) + shift
            xh = np.column_stack([np.cos(t_nodes), np.sin(t_nodes)])
            p = jets_p + dr[:, None] * xh
            from .forward import gamma_far
            ka = params.kappa_a
            vartheta = densities.phi3_tilde * jet(curve, t_nodes).G ** 2
            phase = np.exp(-1j * ka * (np.cos(angles)[:, None] * p[:, 0]
                                       + np.sin(angles)[:, None] * p[:, 1]))
            return gamma_far(ka) * (np.pi / grid.n) * phase @ vartheta

        fd = (perturbed(1.0) - perturbed(-1.0)) / (2.0 * eps)
        pred = B @ xi
        worst_fd = max(worst_fd, np.abs(fd - pred).max() / np.abs(fd).max())
    ok &= _check("Frechet finite-difference", worst_fd, 1e-4, lines)

    # Seeded noise reproducibility.
    ff2 = add_noise_phased(ff, 0.01, seed=42)
    ff3 = add_noise_phased(ff, 0.01, seed=42)
    ok &= _check("seeded noise reproducibility",
                 np.abs(ff2.values - ff3.values).max(), 0.0, lines)

    report = "\n".join(lines)
    return ok, report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="aescatter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_fwd = sub.add_parser("forward", help="generate far-field data")
    p_fwd.add_argument("config")
    p_inv = sub.add_parser("invert", help="run a reconstruction")
    p_inv.add_argument("config")
    p_inv.add_argument("data")
    p_inv.add_argument("--phaseless", action="store_true")
    p_ver = sub.add_parser("verify", help="run analytic self-checks")
    p_ver.add_argument("--quick", action="store_true")
    args = parser.parse_args(argv)

    if args.command == "forward":
        t0 = time.time()
        for path in cmd_forward(args.config):
            print(f"wrote {path} ({time.time() - t0:.1f}s)")
        return 0
    if args.command == "invert":
        return cmd_invert(args.config, args.data, phaseless=args.phaseless)
    if args.command == "verify":
        ok, report = cmd_verify(quick=args.quick)
        print(report)
        return 0 if ok else 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
