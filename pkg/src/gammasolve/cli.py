"""Command-line front end.

Subcommands: solve, effective, dispersion, schrodinger, project, verify.
Configuration is JSON; unknown keys are rejected with their JSON path.
Exit codes: 0 on success/convergence, 2 on non-convergence (or failed
verification), 1 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import fields, models
from .fields import Field, Grid, read_uplf, write_uplf
from .fields import inner_product
from .materials import (
    Checkerboard,
    Layered,
    MaterialSpec,
    Voxel,
    _per_point,
    acoustic_source,
    block_source,
    brinkman_source,
    build_material,
    build_schrodinger,
    default_projector,
    resolve_parameter,
)
from .projectors import (
    apply_projector,
    gamma_brinkman,
    gamma_elastic,
    gamma_helmholtz,
    gamma_maxwell,
    gamma_schrodinger,
    gamma_surface,
    gamma_thermoacoustic,
)
from .solver import Problem, solve
from .quasiperiodic import effective_tensors
from .fermionic import ground_state, perturbation_solve


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def _check_unknown(node, allowed, path):
    for key in node:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}.{key}'" if path else
                              f"unknown key '{key}'")


def _require(node, key, path):
    if key not in node:
        raise ConfigError(f"missing key '{path}.{key}'" if path else
                          f"missing key '{key}'")
    return node[key]


def _scalar(node, path):
    """A JSON number, or a [re, im] pair for complex values."""
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return float(node)
    if (
        isinstance(node, list)
        and len(node) == 2
        and all(isinstance(v, (int, float)) for v in node)
    ):
        return complex(node[0], node[1])
    raise ConfigError(f"'{path}' must be a number or [re, im] pair")


def _scalar_list(node, path):
    if not isinstance(node, list):
        raise ConfigError(f"'{path}' must be a list")
    return [_scalar(v, f"{path}[{i}]") for i, v in enumerate(node)]


def _parse_param(node, path):
    """Material parameter: scalar, [re,im], or a descriptor object."""
    if not isinstance(node, dict):
        return _scalar(node, path)
    kind = _require(node, "type", path)
    if kind == "constant":
        _check_unknown(node, {"type", "value"}, path)
        return _scalar(_require(node, "value", path), f"{path}.value")
    if kind == "layered":
        _check_unknown(node, {"type", "axis", "breakpoints", "values"}, path)
        return Layered(
            int(_require(node, "axis", path)),
            tuple(float(b) for b in _require(node, "breakpoints", path)),
            tuple(_scalar_list(_require(node, "values", path), f"{path}.values")),
        )
    if kind == "checkerboard":
        _check_unknown(node, {"type", "values"}, path)
        vals = _scalar_list(_require(node, "values", path), f"{path}.values")
        if len(vals) != 2:
            raise ConfigError(f"'{path}.values' must have exactly two entries")
        return Checkerboard(tuple(vals))
    if kind == "voxel":
        _check_unknown(node, {"type", "path"}, path)
        return Voxel(np.load(_require(node, "path", path)))
    if kind == "array":
        _check_unknown(node, {"type", "values"}, path)
        return np.array(_require(node, "values", path), dtype=np.complex128)
    raise ConfigError(f"unknown parameter type '{kind}' at '{path}'")


def _parse_grid(node, path="grid"):
    _check_unknown(node, {"dims", "lengths"}, path)
    dims = _require(node, "dims", path)
    lengths = node.get("lengths", [2.0 * np.pi] * len(dims))
    return Grid(tuple(int(n) for n in dims), tuple(float(x) for x in lengths))


def _parse_material(node, path="material"):
    _check_unknown(node, {"physics", "omega", "params", "options"}, path)
    physics = _require(node, "physics", path)
    omega = _scalar(_require(node, "omega", path), f"{path}.omega")
    raw = node.get("params", {})
    params = {k: _parse_param(v, f"{path}.params.{k}") for k, v in raw.items()}
    options = {}
    for k, v in node.get("options", {}).items():
        options[k] = v if isinstance(v, bool) else _scalar(v, f"{path}.options.{k}")
    return MaterialSpec(physics, omega, params, options)


_FORCE_BLOCK = {
    "elastodynamics": 1,
    "oseen": 1,
    "ns_perturbation": 1,
    "maxwell": 0,
    "love": 1,
    "schrodinger": 1,
    "thermoacoustic": 1,
}


def _force_to_source(force_vals, grid, L, physics):
    if physics == "acoustics":
        return acoustic_source(L, force_vals, grid)
    if physics == "brinkman":
        return brinkman_source(L, force_vals, grid)
    if physics in _FORCE_BLOCK:
        return block_source(grid, L.layout, _FORCE_BLOCK[physics], force_vals)
    raise ConfigError(f"no force mapping registered for physics '{physics}'")


def _parse_source(node, grid, L, physics, path="source"):
    kind = _require(node, "type", path)
    ncomp = L.layout.ncomp
    x = grid.coordinates()

    def envelope_plane(mode):
        mode = np.asarray(mode, dtype=float)
        if mode.shape != (grid.ndim,):
            raise ConfigError(f"'{path}.mode' needs one integer per axis")
        k = 2.0 * np.pi * mode / np.asarray(grid.lengths)
        return np.exp(1j * (x @ k))

    def envelope_gauss(center, width):
        c = np.asarray(center, dtype=float)
        return np.exp(-np.sum((x - c) ** 2, axis=1) / (2.0 * width**2))

    if kind == "plane_wave":
        _check_unknown(node, {"type", "mode", "amplitude"}, path)
        amp = np.asarray(_scalar_list(_require(node, "amplitude", path),
                                      f"{path}.amplitude"), dtype=np.complex128)
        if amp.shape != (ncomp,):
            raise ConfigError(f"'{path}.amplitude' must have {ncomp} entries")
        env = envelope_plane(_require(node, "mode", path))
        return Field(grid, L.layout, env[:, None] * amp[None, :])
    if kind == "constant":
        _check_unknown(node, {"type", "amplitude"}, path)
        amp = np.asarray(_scalar_list(_require(node, "amplitude", path),
                                      f"{path}.amplitude"), dtype=np.complex128)
        if amp.shape != (ncomp,):
            raise ConfigError(f"'{path}.amplitude' must have {ncomp} entries")
        return Field(grid, L.layout, np.broadcast_to(amp, (grid.npoints, ncomp)).copy())
    if kind == "gaussian":
        _check_unknown(node, {"type", "center", "width", "block", "amplitude"}, path)
        env = envelope_gauss(_require(node, "center", path),
                             float(_require(node, "width", path)))
        block = int(_require(node, "block", path))
        amp = np.asarray(_scalar_list(_require(node, "amplitude", path),
                                      f"{path}.amplitude"), dtype=np.complex128)
        return block_source(grid, L.layout, block, env[:, None] * amp[None, :])
    if kind == "force_plane_wave":
        _check_unknown(node, {"type", "mode", "force"}, path)
        f = np.asarray(_scalar_list(_require(node, "force", path), f"{path}.force"),
                       dtype=np.complex128)
        env = envelope_plane(_require(node, "mode", path))
        return _force_to_source(env[:, None] * f[None, :], grid, L, physics)
    if kind == "force_constant":
        _check_unknown(node, {"type", "force"}, path)
        f = np.asarray(_scalar_list(_require(node, "force", path), f"{path}.force"),
                       dtype=np.complex128)
        return _force_to_source(np.broadcast_to(f, (grid.npoints, len(f))).copy(),
                                grid, L, physics)
    if kind == "uplf":
        _check_unknown(node, {"type", "path"}, path)
        return read_uplf(_require(node, "path", path))
    raise ConfigError(f"unknown source type '{kind}' at '{path}'")


def _parse_solver(node, path="solver"):
    _check_unknown(node, {"tol", "max_iter", "method", "shift", "history_csv"}, path)
    out = {}
    if "tol" in node:
        out["tol"] = float(node["tol"])
    if "max_iter" in node:
        out["max_iter"] = int(node["max_iter"])
    if "method" in node:
        out["method"] = str(node["method"])
    if "shift" in node:
        out["shift"] = np.asarray([float(v) for v in node["shift"]])
    return out, node.get("history_csv")


def _cj(z):
    z = complex(z)
    return [z.real, z.imag]


def _matrix_json(M):
    return [[_cj(v) for v in row] for row in np.asarray(M)]


def _load_config(args):
    try:
        with open(args.config) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def _config_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _outdir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_solve(args):
    cfg = _load_config(args)
    _check_unknown(cfg, {"grid", "material", "source", "solver"}, "")
    grid = _parse_grid(_require(cfg, "grid", ""))
    spec = _parse_material(_require(cfg, "material", ""))
    L = build_material(spec, grid)
    k1 = spec.params.get("k1", 0.0)
    gamma = default_projector(spec.physics, grid, k1=float(np.real(k1)))
    source = _parse_source(_require(cfg, "source", ""), grid, L, spec.physics)
    opts, history_csv = _parse_solver(cfg.get("solver", {}))
    if args.tol is not None:
        opts["tol"] = args.tol
    problem = Problem(grid=grid, L=L, gamma=gamma, source=source,
                      seed=args.seed, **opts)
    t0 = time.perf_counter()
    result = solve(problem)
    elapsed = time.perf_counter() - t0
    out = _outdir(args)
    write_uplf(os.path.join(out, "E.uplf"), result.E)
    write_uplf(os.path.join(out, "J.uplf"), result.J)
    if history_csv:
        with open(os.path.join(out, history_csv), "w") as fh:
            fh.write("iteration,residual\n")
            for i, r in enumerate(result.residual_history):
                fh.write(f"{i},{r:.16e}\n")
    summary = {
        "physics": spec.physics,
        "grid": {"dims": list(grid.dims), "lengths": list(grid.lengths)},
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "residual": float(result.residual),
        "elapsed_s": elapsed,
        "outputs": {"E": "E.uplf", "J": "J.uplf"},
        "config_sha256": _config_digest(args.config),
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"converged={result.converged} iterations={result.iterations} "
          f"residual={result.residual:.3e}")
    return 0 if result.converged else 2


def _cmd_effective(args):
    cfg = _load_config(args)
    _check_unknown(cfg, {"grid", "material", "bloch", "solver"}, "")
    grid = _parse_grid(_require(cfg, "grid", ""))
    spec = _parse_material(_require(cfg, "material", ""))
    L = build_material(spec, grid)
    gamma = default_projector(spec.physics, grid,
                              k1=float(np.real(spec.params.get("k1", 0.0))))
    bloch = _require(cfg, "bloch", "")
    _check_unknown(bloch, {"k0", "modulation"}, "bloch")
    k0 = np.asarray([float(v) for v in _require(bloch, "k0", "bloch")])
    modulation = None
    if "modulation" in bloch and bloch["modulation"] is not None:
        desc = _parse_param(bloch["modulation"], "bloch.modulation")
        modulation = np.asarray(
            resolve_parameter(desc, grid, ()) * np.ones(grid.npoints)
        )
    opts, _ = _parse_solver(cfg.get("solver", {}))
    tol = opts.get("tol", 1e-12)
    if args.tol is not None:
        tol = args.tol
    t0 = time.perf_counter()
    tensors = effective_tensors(grid, L, gamma, k0, modulation=modulation,
                                tol=tol, max_iter=opts.get("max_iter", 4000))
    elapsed = time.perf_counter() - t0
    converged = all(r.converged for r in tensors.results)
    out = _outdir(args)
    payload = {
        "k0": list(map(float, k0)),
        "tensor_e": _matrix_json(tensors.tensor_e),
        "tensor_j": _matrix_json(tensors.tensor_j),
        "fluctuation_e": tensors.fluctuation_e,
        "fluctuation_j": tensors.fluctuation_j,
        "converged": bool(converged),
        "elapsed_s": elapsed,
        "config_sha256": _config_digest(args.config),
    }
    with open(os.path.join(out, "effective.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"effective tensors at k0={list(map(float, k0))} converged={converged}")
    return 0 if converged else 2


def _cmd_dispersion(args):
    cfg = _load_config(args)
    _check_unknown(cfg, {"model", "params", "scan"}, "")
    model = _require(cfg, "model", "")
    params = _require(cfg, "params", "")
    out = _outdir(args)
    if model == "effective_mass":
        _check_unknown(params, {"m0", "stiffness", "count", "mass"}, "params")
        scan = _require(cfg, "scan", "")
        _check_unknown(scan, {"start", "stop", "count"}, "scan")
        omegas = np.linspace(float(scan["start"]), float(scan["stop"]),
                             int(scan["count"]))
        m0 = _scalar(_require(params, "m0", "params"), "params.m0")
        K = _scalar(_require(params, "stiffness", "params"), "params.stiffness")
        n = _scalar(_require(params, "count", "params"), "params.count")
        m = _scalar(_require(params, "mass", "params"), "params.mass")
        M = models.effective_mass(omegas, m0, K, n, m)
        with open(os.path.join(out, "dispersion.csv"), "w") as fh:
            fh.write("omega,re,im\n")
            for w, v in zip(omegas, np.atleast_1d(M)):
                fh.write(f"{w:.16e},{v.real:.16e},{v.imag:.16e}\n")
        meta = {
            "model": model,
            "resonance_frequency": models.resonance_frequency(K.real, m.real),
            "outputs": {"csv": "dispersion.csv"},
        }
    elif model == "love":
        _check_unknown(params, {"omega", "layer_mu", "layer_rho", "half_thickness",
                                "substrate_mu", "substrate_rho"}, "params")
        roots = models.love_dispersion(
            float(_require(params, "omega", "params")),
            float(_require(params, "layer_mu", "params")),
            float(_require(params, "layer_rho", "params")),
            float(_require(params, "half_thickness", "params")),
            float(_require(params, "substrate_mu", "params")),
            float(_require(params, "substrate_rho", "params")),
        )
        with open(os.path.join(out, "dispersion.csv"), "w") as fh:
            fh.write("index,k1\n")
            for i, r in enumerate(roots):
                fh.write(f"{i},{r:.16e}\n")
        meta = {"model": model, "roots": list(map(float, roots)),
                "outputs": {"csv": "dispersion.csv"}}
    else:
        raise ConfigError(f"unknown dispersion model '{model}'")
    with open(os.path.join(out, "dispersion.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"dispersion model={model} written to {out}")
    return 0


def _cmd_schrodinger(args):
    cfg = _load_config(args)
    _check_unknown(cfg, {"grid", "kinetic", "potential", "perturbation",
                         "state_index", "solver"}, "")
    grid = _parse_grid(_require(cfg, "grid", ""))
    kinetic = _parse_param(_require(cfg, "kinetic", ""), "kinetic")
    potential = _parse_param(_require(cfg, "potential", ""), "potential")
    vprime_desc = _parse_param(_require(cfg, "perturbation", ""), "perturbation")
    state_index = int(cfg.get("state_index", 0))
    opts, _ = _parse_solver(cfg.get("solver", {}))
    tol = opts.get("tol", 1e-10)
    if args.tol is not None:
        tol = args.tol
    energies, states = ground_state(grid, kinetic, potential,
                                    nstates=state_index + 1)
    energy = float(energies[state_index])
    psi = states[state_index]
    material = build_schrodinger(grid, energy, kinetic, potential)
    vprime = _per_point(resolve_parameter(vprime_desc, grid, ()), grid, ())
    result = perturbation_solve(material, psi, vprime, tol=tol,
                                max_iter=opts.get("max_iter", 2000))
    out = _outdir(args)
    write_uplf(os.path.join(out, "psi.uplf"), psi)
    write_uplf(os.path.join(out, "psi_prime.uplf"), result.psi_prime)
    ortho = abs(inner_product(psi, result.psi_prime))
    payload = {
        "energy": energy,
        "energy_shift": result.e_prime,
        "orthogonality": ortho,
        "residual": result.residual,
        "converged": bool(result.converged),
        "outputs": {"psi": "psi.uplf", "psi_prime": "psi_prime.uplf"},
        "config_sha256": _config_digest(args.config),
    }
    with open(os.path.join(out, "schrodinger.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"E={energy:.12g} E'={result.e_prime:.12g} residual={result.residual:.3e}")
    return 0 if result.converged else 2


_PROJECTOR_FAMILIES = {
    "helmholtz": lambda d, k1: gamma_helmholtz(d),
    "elastic": lambda d, k1: gamma_elastic(d),
    "maxwell": lambda d, k1: gamma_maxwell(),
    "brinkman": lambda d, k1: gamma_brinkman(d),
    "thermoacoustic": lambda d, k1: gamma_thermoacoustic(),
    "schrodinger": lambda d, k1: gamma_schrodinger(d),
    "surface": lambda d, k1: gamma_surface(k1),
}


def _cmd_project(args):
    cfg = _load_config(args)
    _check_unknown(cfg, {"input", "output", "projector", "which", "shift"}, "")
    field = read_uplf(_require(cfg, "input", ""))
    pnode = _require(cfg, "projector", "")
    _check_unknown(pnode, {"family", "dimension", "k1"}, "projector")
    family = _require(pnode, "family", "projector")
    if family not in _PROJECTOR_FAMILIES:
        raise ConfigError(f"unknown projector family '{family}'")
    dim = int(pnode.get("dimension", field.grid.ndim))
    k1 = float(pnode.get("k1", 0.0))
    projector = _PROJECTOR_FAMILIES[family](dim, k1)
    which = int(cfg.get("which", 1))
    shift = cfg.get("shift")
    if shift is not None:
        shift = np.asarray([float(v) for v in shift])
    out_field = apply_projector(field, projector, shift=shift, which=which)
    out = _outdir(args)
    dest = os.path.join(out, _require(cfg, "output", ""))
    write_uplf(dest, out_field)
    print(f"projected {args.config}:{family} (which={which}) -> {dest}")
    return 0


# ---------------------------------------------------------------------------
# verify: built-in self checks
# ---------------------------------------------------------------------------


def _verify_checks(seed):
    from . import projectors as P
    from .fields import random_field
    from .materials import Checkerboard as CB
    from .materials import LField, build_acoustics
    from .solver import solve_dense, solve_resolvent

    rng = np.random.default_rng(seed)
    checks = []

    grid = Grid((8, 8, 8), (2 * np.pi,) * 3)
    layout = fields.BlockLayout((fields.Block("vector", 3), fields.Block("scalar")))
    f = random_field(grid, layout, seed=seed)
    err = np.max(np.abs(f.to_fourier().to_real().values - f.values))
    checks.append(("fft_roundtrip", err <= 1e-13, f"max err {err:.2e}"))

    g = random_field(grid, layout, seed=seed + 1)
    a = inner_product(f, g)
    b = inner_product(f.to_fourier(), g.to_fourier())
    err = abs(a - b) / abs(a)
    checks.append(("plancherel", err <= 1e-12, f"rel err {err:.2e}"))

    import tempfile

    with tempfile.TemporaryDirectory() as td:
        p1 = os.path.join(td, "a.uplf")
        p2 = os.path.join(td, "b.uplf")
        write_uplf(p1, f)
        write_uplf(p2, read_uplf(p1))
        same = open(p1, "rb").read() == open(p2, "rb").read()
    checks.append(("uplf_roundtrip", same, "byte-identical" if same else "differs"))

    builders = [
        (P.gamma_helmholtz(3), 3), (P.gamma_elastic(3), 3),
        (P.gamma_maxwell(), 3), (P.gamma_brinkman(3), 3),
        (P.gamma_thermoacoustic(), 3), (P.gamma_schrodinger(2), 2),
        (P.gamma_surface(0.7), 1),
    ]
    worst = 0.0
    for proj, ndim in builders:
        K = rng.normal(scale=3.0, size=(25, ndim))
        G = proj.symbols(K)
        Gh = np.conj(np.swapaxes(G, -1, -2))
        scale = np.linalg.norm(G)
        worst = max(worst, float(np.linalg.norm(G @ G - G) / scale))
        worst = max(worst, float(np.linalg.norm(G - Gh) / scale))
    checks.append(("projector_algebra", worst <= 1e-12, f"worst {worst:.2e}"))

    K = rng.normal(scale=3.0, size=(25, 3))
    err = float(np.max(np.abs(
        P.gamma_from_D(P.helmholtz_D(3)).symbols(K) - P.gamma_helmholtz(3).symbols(K)
    )))
    err = max(err, float(np.max(np.abs(
        P.gamma_from_D(P.maxwell_D()).symbols(K) - P.gamma_maxwell().symbols(K)
    ))))
    checks.append(("projector_closed_forms", err <= 1e-12, f"max err {err:.2e}"))

    omega, kappa, rho = 1.3, 1.0, 1.0
    L = build_acoustics(grid, omega, kappa, rho)
    mode = (1, 0, 0)
    force = np.zeros((grid.npoints, 3), dtype=np.complex128)
    k0 = 2.0 * np.pi * np.asarray(mode) / np.asarray(grid.lengths)
    env = np.exp(1j * (grid.coordinates() @ k0))
    f0 = np.array([1.0, 0.0, 0.0])
    force[:] = env[:, None] * f0[None, :]
    s = acoustic_source(L, force, grid)
    res = solve(Problem(grid=grid, L=L, gamma=P.gamma_helmholtz(3), source=s,
                        tol=1e-10))
    k2 = float(k0 @ k0)
    pred = 1j * (k0 @ f0) / (omega**2 * rho / kappa - k2)
    got = res.E.values[:, 3] / env
    err = float(np.max(np.abs(got - pred)) / abs(pred))
    checks.append(("acoustic_plane_wave", res.converged and err <= 1e-8,
                   f"rel err {err:.2e}"))

    small = Grid((6, 6), (2 * np.pi, 2 * np.pi))
    L2 = build_acoustics(small, 1.1, CB((1.0, 2.0 + 0.5j)), 1.0)
    s2 = random_field(small, L2.layout, seed=seed + 2)
    prob2 = Problem(grid=small, L=L2, gamma=P.gamma_helmholtz(2), source=s2,
                    tol=1e-10)
    res2 = solve(prob2)
    res2d = solve_dense(prob2)
    err = float(np.linalg.norm(res2.E.values - res2d.E.values)
                / np.linalg.norm(res2d.E.values))
    checks.append(("dense_oracle", err <= 1e-8, f"rel err {err:.2e}"))

    Bmat = np.zeros((4, 4), dtype=np.complex128)
    Bmat[:3, :3] = kappa * np.eye(3)
    Bfield = LField(L.layout, Bmat, omega)
    div_f = kappa * np.sum(1j * k0 * f0) * env
    fsrc = Field(grid, fields.scalar_layout(), div_f[:, None])
    psi = solve_resolvent(grid, rho * omega**2, Bfield, fsrc)
    err = float(np.max(np.abs(psi.values[:, 0] - res.E.values[:, 3]))
                / np.max(np.abs(psi.values)))
    checks.append(("resolvent_duality", err <= 1e-8, f"rel err {err:.2e}"))

    M0 = models.effective_mass(0.0, 1.0, 1.0, 2.0, 0.5)
    static_ok = abs(M0 - 2.0) <= 1e-14
    damped = models.effective_mass(1.0, 1.0, 1.0 - 0.1j, 1.0, 1.0)
    checks.append(("effective_mass", static_ok and damped.imag > 0,
                   f"M(0)={complex(M0):.3g}, Im M={damped.imag:.3g}"))

    from .fermionic import MultiElectronGrid, antisymmetrize_full, lambda_a

    me = MultiElectronGrid(3, 1, 5, 2 * np.pi)
    vals = rng.normal(size=(me.grid.npoints,)) + 1j * rng.normal(
        size=(me.grid.npoints,))
    err = float(np.max(np.abs(lambda_a(vals, me) - antisymmetrize_full(vals, me))))
    checks.append(("fermionic_reduction", err <= 1e-13, f"max err {err:.2e}"))

    return checks


def _cmd_verify(args):
    t0 = time.perf_counter()
    checks = _verify_checks(args.seed)
    ok = True
    for name, passed, metric in checks:
        ok = ok and passed
        print(f"CHECK {name}: {'PASS' if passed else 'FAIL'} ({metric})")
    elapsed = time.perf_counter() - t0
    print(f"{'all checks passed' if ok else 'CHECKS FAILED'} in {elapsed:.1f}s")
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="gamma-solve",
                     description="FFT projector solver for periodic media")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "solve": "solve a canonical problem from a JSON config",
        "effective": "extract effective tensors at a Bloch wavevector",
        "dispersion": "evaluate closed-form dispersion models",
        "schrodinger": "stationary state + first-order perturbation",
        "project": "apply a projector family to a stored field",
        "verify": "run built-in self checks",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        if name != "verify":
            p.add_argument("--config", required=True, help="JSON configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
    return parser


_COMMANDS = {
    "solve": _cmd_solve,
    "effective": _cmd_effective,
    "dispersion": _cmd_dispersion,
    "schrodinger": _cmd_schrodinger,
    "project": _cmd_project,
    "verify": _cmd_verify,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        fields.set_fft_workers(args.threads)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"gamma-solve: config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"gamma-solve: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
