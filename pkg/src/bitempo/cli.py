"""Scenario runner: every check in the package behind one command.

Scenarios are flat INI files, one scenario per file, with a [scenario]
section naming the command and further sections holding parameters.  Each
run writes a JSON report whose "scenario" and "comparable" sections are
bit-identical across repeated runs (timestamps and durations live in
"meta"), plus optional delimited data files with one-line headers and
17-significant-digit floats.

Exit codes: 0 success, 2 usage or unreadable/unrecognized config,
3 domain or precondition error (including missing parameter keys),
4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone

import numpy as np

from . import classical, continuity, dirac, quantum
from .core import (
    BitempoError,
    ConfigError,
    DomainError,
    EvaluationError,
    Grid2T,
    TimePlanePoint,
    Tolerances,
    central_difference,
)

__all__ = ["main", "run_scenario", "validate_config", "load_config", "COMMANDS"]

COMMANDS = (
    "classical-check",
    "classical-integrate",
    "quantum-fluct",
    "uncertainty",
    "continuity",
    "dirac",
    "mass-spectrum",
)

FORCE_FAMILIES = ("rank_one", "polynomial", "affine", "zero")

_REQUIRED = object()


# ---------------------------------------------------------------------------
# config access
# ---------------------------------------------------------------------------

def load_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not parser.has_section("scenario"):
        raise ConfigError(f"config {path} has no [scenario] section")
    command = parser.get("scenario", "command", fallback=None)
    if command not in COMMANDS:
        raise ConfigError(
            f"config {path} names unknown command {command!r}; known: {', '.join(COMMANDS)}")
    return parser


def _get(cfg, section: str, key: str, cast=str, default=_REQUIRED):
    if not cfg.has_option(section, key):
        if default is _REQUIRED:
            raise DomainError(f"missing required key [{section}] {key}")
        return default
    raw = cfg.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"bad value for [{section}] {key}: {raw!r} ({exc})") from exc


def _floats(raw: str) -> list:
    parts = raw.replace(",", " ").split()
    return [float(p) for p in parts]


def _tolerances(cfg) -> Tolerances:
    return Tolerances(
        fd_step=_get(cfg, "tolerances", "fd_step", float, 1e-5),
        abs_tol=_get(cfg, "tolerances", "abs_tol", float, 1e-10),
        rel_tol=_get(cfg, "tolerances", "rel_tol", float, 1e-9),
    )


def _grid(cfg, need_space: bool = False) -> Grid2T:
    kwargs = dict(
        t1_min=_get(cfg, "grid", "t1_min", float),
        t1_max=_get(cfg, "grid", "t1_max", float),
        t2_min=_get(cfg, "grid", "t2_min", float),
        t2_max=_get(cfg, "grid", "t2_max", float),
        n1=_get(cfg, "grid", "n1", int),
        n2=_get(cfg, "grid", "n2", int),
    )
    if need_space or cfg.has_option("grid", "nx"):
        kwargs.update(
            x_min=_get(cfg, "grid", "x_min", float),
            x_max=_get(cfg, "grid", "x_max", float),
            nx=_get(cfg, "grid", "nx", int),
        )
    return Grid2T(**kwargs)


def _force(cfg) -> classical.ForceTensorField:
    family = _get(cfg, "force", "family")
    if family not in FORCE_FAMILIES:
        raise DomainError(
            f"unknown force family {family!r}; known families: {', '.join(FORCE_FAMILIES)}")
    d = _get(cfg, "force", "dimension", int)
    if family == "zero":
        return classical.zero_force(d)
    if family == "rank_one":
        c = _floats(_get(cfg, "force", "c"))
        if len(c) != 2:
            raise DomainError(f"[force] c needs 2 entries, got {len(c)}")
        if d == 1:
            coeffs = np.asarray(_floats(_get(cfg, "force", "g_poly")))
            return classical.rank_one_force(c, lambda x: np.polyval(coeffs, x), d=1)
        g_const = np.asarray(_floats(_get(cfg, "force", "g_const")))
        g_linear = np.asarray(_floats(_get(cfg, "force", "g_linear"))).reshape(d, d)
        if g_const.size != d:
            raise DomainError(f"[force] g_const needs {d} entries")
        return classical.rank_one_force(c, lambda p: g_const + g_linear @ p, d=d)
    if family == "polynomial":
        if d != 1:
            raise DomainError("polynomial forces are d=1; use affine for d >= 2")
        coeffs = {}
        for key in ("11", "12", "21", "22"):
            raw = _get(cfg, "force", f"f{key}_poly", str, None)
            if raw is not None:
                coeffs[key] = _floats(raw)
        if not coeffs:
            raise DomainError("polynomial force needs at least one fjk_poly key")
        return classical.polynomial_force_1d(coeffs)
    linear = np.asarray(_floats(_get(cfg, "force", "linear")))
    if linear.size != d * 2 * 2 * d:
        raise DomainError(f"[force] linear needs {d * 4 * d} entries, got {linear.size}")
    const_raw = _get(cfg, "force", "const", str, None)
    const = None if const_raw is None else np.asarray(_floats(const_raw)).reshape(d, 2, 2)
    return classical.affine_force(d, linear.reshape(d, 2, 2, d), const)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_table(path: str, columns: list, rows, fmt: str):
    if fmt == "json":
        payload = {"columns": list(columns),
                   "rows": [[_fmt(v) for v in row] for row in rows]}
        _atomic_write(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")
    else:
        lines = [",".join(columns)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        _atomic_write(path, "\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _echo_config(cfg) -> dict:
    return {section: dict(cfg.items(section)) for section in cfg.sections()}


# ---------------------------------------------------------------------------
# command runners: each returns (comparable_payload, data_files)
# data_files: list of (config_key, default_name, columns, rows)
# ---------------------------------------------------------------------------

def _run_classical_check(cfg):
    tol = _tolerances(cfg)
    force = _force(cfg)
    x = _floats(_get(cfg, "point", "x"))
    if len(x) != force.d:
        raise DomainError(f"[point] x needs {force.d} coordinates, got {len(x)}")
    point = x[0] if force.d == 1 else np.asarray(x)
    report = classical.classify(force, point, tol=tol)
    payload = {
        "dimension": force.d,
        "point": x,
        "verdict": report.verdict.value,
        "determinant": report.determinant_value,
        "kernel_dim": report.kernel_dim,
        "parallelism_defect": report.parallelism_defect,
        "fields": [list(map(float, v)) for v in report.fields.vectors],
        "fields_degenerate": list(report.fields.degenerate),
        "orthogonality_residual": report.orthogonality_residual,
        "discrepancy": report.discrepancy,
    }
    if force.d == 1:
        payload["consistency_residual"] = classical.consistency_residual_1d(force, None, point, tol)
    return payload, []


def _run_classical_integrate(cfg):
    tol = _tolerances(cfg)
    family = _get(cfg, "force", "family")
    d = _get(cfg, "force", "dimension", int)
    if family != "rank_one" or d != 1:
        raise DomainError("classical-integrate needs a rank_one force with dimension 1")
    c = _floats(_get(cfg, "force", "c"))
    coeffs = np.asarray(_floats(_get(cfg, "force", "g_poly")))
    g = lambda x: np.polyval(coeffs, x)
    x0 = _get(cfg, "initial", "x0", float)
    v0 = _get(cfg, "initial", "v0", float)
    grid = _grid(cfg)
    surface = classical.integrate_rank_one_1d(g, c, x0, v0, grid, tol=tol)
    force = classical.rank_one_force(c, g, d=1)

    t1v, t2v = grid.t1_values, grid.t2_values
    step1 = tol.fd_step * max(1.0, abs(grid.t1_max - grid.t1_min))
    step2 = tol.fd_step * max(1.0, abs(grid.t2_max - grid.t2_min))
    T1, T2 = np.meshgrid(t1v[1:-1], t2v[1:-1], indexing="ij")
    grad1 = (surface.position(T1 + step1, T2) - surface.position(T1 - step1, T2)) / (2 * step1)
    grad2 = (surface.position(T1, T2 + step2) - surface.position(T1, T2 - step2)) / (2 * step2)

    ortho = 0.0
    orbit_res = 0.0
    rows = []
    for i, t1 in enumerate(t1v):
        for j, t2 in enumerate(t2v):
            xval = surface.values[i, j]
            p1, p2 = c[0] * surface.velocity[i, j], c[1] * surface.velocity[i, j]
            phi = ratio = resid = float("nan")
            try:
                orb = classical.orbit_relation_1d(force, None, xval, (p1, p2), tol)
                phi, ratio, resid = orb.phi, orb.ratio_squared, orb.residual
            except DomainError:
                pass
            rows.append((t1, t2, xval, p1, p2, phi, ratio, resid))
            if 0 < i < grid.n1 - 1 and 0 < j < grid.n2 - 1:
                field = classical.characteristic_field_1d(force, xval, tol)
                vec = field.vectors[0]
                norm = float(np.linalg.norm(vec))
                if norm > 0:
                    grad = np.array([grad1[i - 1, j - 1], grad2[i - 1, j - 1]])
                    denom = norm * max(1.0, float(np.linalg.norm(grad)))
                    ortho = max(ortho, abs(float(vec @ grad)) / denom)
                if math.isfinite(resid):
                    orbit_res = max(orbit_res, resid)
    payload = {
        "c": c,
        "x0": x0,
        "v0": v0,
        "max_abs_x": float(np.max(np.abs(surface.values))),
        "orthogonality_residual": ortho,
        "orbit_residual": orbit_res,
        "grid": [grid.n1, grid.n2],
    }
    columns = ["t1", "t2", "x", "p1", "p2", "phi", "ratio_squared", "orbit_residual"]
    return payload, [("surface", "surface.csv", columns, rows)]


def _run_quantum_fluct(cfg):
    e1 = _floats(_get(cfg, "system", "e1"))
    e2 = _floats(_get(cfg, "system", "e2"))
    n = len(e1)
    x0 = np.asarray(_floats(_get(cfg, "system", "x0_real")), dtype=complex)
    if x0.size != n * n:
        raise DomainError(f"[system] x0_real needs {n * n} entries, got {x0.size}")
    x0 = x0.reshape(n, n)
    imag_raw = _get(cfg, "system", "x0_imag", str, None)
    if imag_raw is not None:
        x0 = x0 + 1j * np.asarray(_floats(imag_raw)).reshape(n, n)
    psi = np.asarray(_floats(_get(cfg, "system", "psi_real")), dtype=complex)
    psi_imag_raw = _get(cfg, "system", "psi_imag", str, None)
    if psi_imag_raw is not None:
        psi = psi + 1j * np.asarray(_floats(psi_imag_raw))
    hbar = _get(cfg, "system", "hbar", float, 1.0)
    system = quantum.TwoTimeQuantumSystem(e1, e2, x0)
    state = quantum.StateVector.normalized(psi)
    grid = _grid(cfg)
    trace = quantum.variance_trace(system, state, grid, hbar)

    tau2_dep = 0.0
    for a in range(n):
        for b in range(n):
            ec = quantum.element_characteristic(system, a, b)
            if ec.degenerate:
                continue
            tau1 = 0.37
            pt1 = quantum.inverse_rotate_times(ec, tau1, 0.21)
            pt2 = quantum.inverse_rotate_times(ec, tau1, -0.83)
            va = quantum.evolve_element(system, a, b, pt1, hbar)
            vb = quantum.evolve_element(system, a, b, pt2, hbar)
            tau2_dep = max(tau2_dep, abs(va - vb))

    rows = []
    for i, t1 in enumerate(grid.t1_values):
        for j, t2 in enumerate(grid.t2_values):
            rows.append((t1, t2, trace.mean[i, j].real, trace.mean[i, j].imag,
                         trace.second_moment[i, j], trace.variance[i, j]))
    payload = {
        "n_levels": n,
        "hbar": hbar,
        "variance_min": float(np.min(trace.variance)),
        "variance_max": float(np.max(trace.variance)),
        "mean_imag_max": float(np.max(np.abs(trace.mean.imag))),
        "tau2_dependence": tau2_dep,
        "grid": [grid.n1, grid.n2],
    }
    columns = ["t1", "t2", "mean_re", "mean_im", "second_moment", "variance"]
    return payload, [("trace", "trace.csv", columns, rows)]


def _run_uncertainty(cfg):
    budget = quantum.UncertaintyBudget(
        dE1=_get(cfg, "budget", "de1", float),
        dE2=_get(cfg, "budget", "de2", float),
        ddE1=_get(cfg, "budget", "dde1", float),
        ddE2=_get(cfg, "budget", "dde2", float),
        t=TimePlanePoint(_get(cfg, "budget", "t1", float), _get(cfg, "budget", "t2", float)),
        hbar=_get(cfg, "budget", "hbar", float, 1.0),
    )
    vis = quantum.uncertainty_visibility(budget)
    swept = abs(budget.dE1 * budget.t.t1 + budget.dE2 * budget.t.t2) / budget.hbar
    payload = {
        "visibility": vis.value,
        "swept_phase_over_two_pi": swept / (2.0 * math.pi),
    }
    report = quantum.angle_and_width(budget)
    payload.update(
        phi=report.phi,
        cos_phi=math.cos(report.phi),
        dphi_exact=report.dphi_exact,
        dphi_lowest_order=report.dphi_lowest_order,
        bound=report.bound,
        singular=report.singular,
    )
    return payload, []


def _load_current_file(path: str, grid: Grid2T) -> continuity.CurrentField:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1)
    except OSError as exc:
        raise DomainError(f"cannot read current samples from {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 6:
        raise DomainError("current sample file needs columns x,t1,t2,j1,j2,jx")
    expected = grid.nx * grid.n1 * grid.n2
    if data.shape[0] != expected:
        raise DomainError(f"current sample file has {data.shape[0]} rows, grid needs {expected}")
    shape = (grid.nx, grid.n1, grid.n2)
    order = np.lexsort((data[:, 2], data[:, 1], data[:, 0]))
    data = data[order]
    return continuity.CurrentField(
        grid=grid,
        j1=data[:, 3].reshape(shape),
        j2=data[:, 4].reshape(shape),
        j_space=data[:, 5].reshape(shape),
    )


def _run_continuity(cfg):
    tol = _tolerances(cfg)
    grid = _grid(cfg, need_space=True)
    source = _get(cfg, "current", "source", str, "builtin")
    if source == "builtin":
        current, _ = continuity.manufactured_current(grid)
    elif source == "builtin-sourced":
        current, _ = continuity.manufactured_current(grid, with_source=True)
    elif source.startswith("file:"):
        current = _load_current_file(source[5:], grid)
    else:
        raise DomainError(f"unknown current source {source!r}; "
                          "use builtin, builtin-sourced or file:<path>")
    report = continuity.charges(current, tol=tol)
    payload = {
        "source": source,
        "dQ1_residual": report.dQ1_residual,
        "dQ2_residual": report.dQ2_residual,
        "alpha": report.alpha,
        "beta": report.beta,
        "boundary_warnings": list(report.boundary_warnings),
        "grid": [grid.nx, grid.n1, grid.n2],
    }
    if source.startswith("builtin"):
        fine, _ = continuity.manufactured_current(
            grid.refined(), with_source=source == "builtin-sourced")
        fine_report = continuity.charges(fine, tol=tol)
        payload["dQ1_residual_refined"] = fine_report.dQ1_residual
        payload["dQ2_residual_refined"] = fine_report.dQ2_residual
        if fine_report.dQ1_residual > 0:
            payload["refinement_ratio_Q1"] = report.dQ1_residual / fine_report.dQ1_residual
        if fine_report.dQ2_residual > 0:
            payload["refinement_ratio_Q2"] = report.dQ2_residual / fine_report.dQ2_residual
    rows = []
    for i, t1 in enumerate(grid.t1_values):
        rows.append((t1, report.Q1[i]))
    return payload, [("charge_q1", "charge_q1.csv", ["t1", "Q1"], rows)]


def _run_dirac(cfg):
    tol = _tolerances(cfg)
    k = _floats(_get(cfg, "wave", "k"))
    if len(k) != 3:
        raise DomainError(f"[wave] k needs 3 components, got {len(k)}")
    m = _get(cfg, "wave", "m", float)
    part = _get(cfg, "wave", "part", str, "imaginary")
    sol = dirac.solve_plane_wave(k, m, tol)
    for key, attr in (("rescale_plus", "plus"), ("rescale_minus", "minus")):
        raw = _get(cfg, "wave", key, str, None)
        if raw is not None:
            re_im = _floats(raw)
            if len(re_im) != 2:
                raise DomainError(f"[wave] {key} needs 're im', got {raw!r}")
            sol = sol.rescaled(**{attr: complex(re_im[0], re_im[1])})
    grid = _grid(cfg, need_space=True)

    conservation = 0.0
    probes = [(-0.4, 0.3, 0.7), (0.9, -0.6, 0.1), (0.2, 0.8, -0.9)]
    for pos in probes:
        div = 0.0
        for mu, sgn in ((0, 1.0), (1, 1.0), (2, -1.0)):
            def comp(u, mu=mu, pos=pos):
                q = list(pos)
                q[mu] = u
                return dirac.dirac_current(sol, q, part)[mu]
            div += sgn * central_difference(comp, pos[mu], tol.step_for(pos))
        conservation = max(conservation, abs(div))

    pos_report = dirac.positivity_check(sol, grid, tol)
    density = dirac.dirac_density_separability(sol, grid, part=part, tol=tol)
    gset = dirac.gamma_set()
    payload = {
        "k": k,
        "m": m,
        "part": part,
        "on_shell_residual": float(k[0] ** 2 + k[1] ** 2 - k[2] ** 2 - m ** 2),
        "clifford_defect": gset.clifford_defect(),
        "psi_plus": [[sol.psi_plus[i].real, sol.psi_plus[i].imag] for i in range(2)],
        "psi_minus": [[sol.psi_minus[i].real, sol.psi_minus[i].imag] for i in range(2)],
        "conservation_residual": conservation,
        "positivity": {
            "lhs_im": pos_report.lhs_im, "rhs_im": pos_report.rhs_im,
            "lhs_re": pos_report.lhs_re, "rhs_re": pos_report.rhs_re,
            "holds_im": bool(pos_report.holds[0]), "holds_re": bool(pos_report.holds[1]),
            "min_j1": pos_report.min_j1, "min_j2": pos_report.min_j2,
        },
        "density_separability_residual": density.separability.residual,
        "total_charge_fit_residual": density.total_fit.residual,
        "charge_boundary_warnings": len(density.charge_report.boundary_warnings),
        "hermiticity_defect_origin": dirac.hermiticity_defect([(0.0, 0.0)], m),
        "hermiticity_defect_wave": dirac.hermiticity_defect([(k[1], k[2])], m),
        "hermiticity_defect_generic": dirac.hermiticity_defect(m=m),
    }
    j1, j2, j3 = dirac.current_grid(sol, grid, part)
    rows = []
    xv = grid.x_values
    for ix, x in enumerate(xv):
        for i, t1 in enumerate(grid.t1_values):
            for j, t2 in enumerate(grid.t2_values):
                rows.append((x, t1, t2, j1[ix, i, j], j2[ix, i, j], j3[ix, i, j]))
    columns = ["x", "t1", "t2", "j1", "j2", "jx"]
    return payload, [("current", "current.csv", columns, rows)]


def _run_mass_spectrum(cfg):
    m = _get(cfg, "sweep", "m", float)
    hbar = _get(cfg, "sweep", "hbar", float, 1.0)
    c = _get(cfg, "sweep", "c", float, 1.0)
    omega_min = _get(cfg, "sweep", "omega_min", float, 0.0)
    omega_max = _get(cfg, "sweep", "omega_max", float)
    count = _get(cfg, "sweep", "count", int, 41)
    if count < 2:
        raise DomainError("[sweep] count must be at least 2")
    omegas = np.linspace(omega_min, omega_max, count)
    rows = []
    consistent = True
    tachyon_count = 0
    for omega in omegas:
        mode = dirac.effective_mode_mass(m, float(omega), hbar, c)
        consistent = consistent and mode.classification_consistent
        tachyon_count += int(mode.tachyonic)
        rows.append((
            omega,
            mode.m_eff if not mode.tachyonic else float("nan"),
            float(mode.tachyonic),
            mode.tau if math.isfinite(mode.tau) else float("inf"),
            mode.R if math.isfinite(mode.R) else float("inf"),
            float(mode.c_tau_gt_R) if mode.c_tau_gt_R is not None else float("nan"),
        ))
    payload = {
        "m": m,
        "hbar": hbar,
        "c": c,
        "boundary_omega": m * c ** 2 / hbar,
        "tachyonic_count": tachyon_count,
        "classification_consistent": consistent,
        "count": count,
    }
    columns = ["omega", "m_eff", "tachyonic", "tau", "R", "c_tau_gt_R"]
    return payload, [("table", "mass_spectrum.csv", columns, rows)]


_RUNNERS = {
    "classical-check": _run_classical_check,
    "classical-integrate": _run_classical_integrate,
    "quantum-fluct": _run_quantum_fluct,
    "uncertainty": _run_uncertainty,
    "continuity": _run_continuity,
    "dirac": _run_dirac,
    "mass-spectrum": _run_mass_spectrum,
}


# ---------------------------------------------------------------------------
# run / validate
# ---------------------------------------------------------------------------

def run_scenario(config_path: str, out_dir: str | None = None, fmt: str = "csv",
                 expected_command: str | None = None) -> dict:
    """Execute one scenario file and write its report and data files.

    Returns the full report dictionary; the "scenario" and "comparable"
    sections are deterministic for a fixed config.
    """
    cfg = load_config(config_path)
    command = cfg.get("scenario", "command")
    if expected_command is not None and command != expected_command:
        raise ConfigError(
            f"config names command {command!r} but {expected_command!r} was invoked")
    started = time.perf_counter()
    payload, tables = _RUNNERS[command](cfg)

    directory = out_dir or os.path.dirname(os.path.abspath(config_path))
    artifacts = []
    for key, default_name, columns, rows in tables:
        name = _get(cfg, "output", key, str, default_name)
        if fmt == "json" and name.endswith(".csv"):
            name = name[:-4] + ".json"
        path = os.path.join(directory, name)
        _write_table(path, columns, rows, fmt)
        artifacts.append(name)

    report_name = _get(cfg, "output", "report", str, "report.json")
    report_path = os.path.join(directory, report_name)
    report = {
        "scenario": _echo_config(cfg),
        "comparable": _jsonable({"command": command, "results": payload,
                                 "artifacts": sorted(artifacts)}),
        "meta": {
            "duration_s": time.perf_counter() - started,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "report_file": report_name,
        },
    }
    _atomic_write(report_path, json.dumps(report, indent=1, sort_keys=True) + "\n")
    return report


def validate_config(config_path: str) -> list:
    """Schema diagnostics for a scenario file without running it."""
    diagnostics = []
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        return [str(exc)]
    command = cfg.get("scenario", "command")

    def probe(fn):
        try:
            fn()
        except (DomainError, ConfigError) as exc:
            diagnostics.append(str(exc))
        except BitempoError as exc:
            diagnostics.append(f"unexpected: {exc}")

    if command in ("classical-check", "classical-integrate"):
        probe(lambda: _force(cfg))
        if command == "classical-check":
            probe(lambda: _floats(_get(cfg, "point", "x")))
        else:
            probe(lambda: (_get(cfg, "initial", "x0", float),
                           _get(cfg, "initial", "v0", float)))
            probe(lambda: _grid(cfg))
    elif command == "quantum-fluct":
        probe(lambda: _grid(cfg))
        probe(lambda: (_floats(_get(cfg, "system", "e1")),
                       _floats(_get(cfg, "system", "e2")),
                       _floats(_get(cfg, "system", "x0_real")),
                       _floats(_get(cfg, "system", "psi_real"))))
    elif command == "uncertainty":
        probe(lambda: [_get(cfg, "budget", key, float) for key in
                       ("de1", "de2", "dde1", "dde2", "t1", "t2")])
    elif command == "continuity":
        probe(lambda: _grid(cfg, need_space=True))
        def check_source():
            source = _get(cfg, "current", "source", str, "builtin")
            if not (source in ("builtin", "builtin-sourced") or source.startswith("file:")):
                raise DomainError(f"unknown current source {source!r}")
        probe(check_source)
    elif command == "dirac":
        probe(lambda: _grid(cfg, need_space=True))
        probe(lambda: (_floats(_get(cfg, "wave", "k")), _get(cfg, "wave", "m", float)))
    elif command == "mass-spectrum":
        probe(lambda: (_get(cfg, "sweep", "m", float),
                       _get(cfg, "sweep", "omega_max", float)))
    probe(lambda: _tolerances(cfg))
    return diagnostics


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bitempo",
        description="Scenario runner for two-time dynamics checks.")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} scenario")
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="csv")
    pv = sub.add_parser("validate", help="check a scenario file without running it")
    pv.add_argument("--config", required=True)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        if args.command == "validate":
            diagnostics = validate_config(args.config)
            if diagnostics:
                for line in diagnostics:
                    print(f"invalid: {line}", file=sys.stderr)
                return 2
            print("ok")
            return 0
        report = run_scenario(args.config, args.out, args.format,
                              expected_command=args.command)
        results = report["comparable"]["results"]
        summary = {k: v for k, v in results.items() if not isinstance(v, (list, dict))}
        print(json.dumps({"command": args.command, **summary}, sort_keys=True))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except EvaluationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except BitempoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
