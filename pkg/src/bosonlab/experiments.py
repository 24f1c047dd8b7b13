"""Experiment orchestration: config ingestion, scenario runners, CSV output.

Determinism contract: a given config (including its seed) produces
byte-identical output files.  All randomness flows through counter-based
Philox streams keyed by (seed, purpose, index); floats are written with 17
significant digits; rows are emitted in a fixed nested loop order; line
endings are LF.  The first line of every CSV is a comment carrying the
config hash (sha256 over a canonical re-serialization of the effective
config, output path excluded) and the package version.
"""

import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version as _dist_version
from pathlib import Path

import numpy as np

from .bounds import (
    BoundCurve,
    commutator_growth_bound,
    correlation_gap_bound,
    mean_field_error_bound,
    trace_distance,
    telescoping_residual,
)
from .exact_dynamics import ObservableOnSubset, bbgky_rhs, commutator_growth, correlation_gap, evolve_exact
from .hartree import DensityMatrix, hartree_evolve, pure_state_density
from .operators import HamiltonianSpec, PotentialTerm, bound_constants, operator_norm, vtilde
from .symmetric_space import build_hamiltonian, embed_product_state, enumerate_basis, rdm

try:
    VERSION = _dist_version("bosonlab")
except PackageNotFoundError:  # running from a source tree without metadata
    VERSION = "0.0.0+local"

SCENARIOS = ("converge", "lr", "corr", "bbgky", "bounds")

# slack added to every lhs <= rhs check before it counts as a violation
VIOLATION_ATOL = 1e-9

# distances below this are treated as exactly zero when fitting log-log slopes
SLOPE_FLOOR = 1e-13

_U64 = 2**64


class ConfigError(ValueError):
    """Config rejected; the message carries a field path."""


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    spec: HamiltonianSpec
    scenario: str
    n_values: tuple
    time_grid: tuple
    initial_phi: np.ndarray
    integrator_tol: float
    seed: int
    vtilde_strategy: str
    output_path: str
    obs_m: int
    obs_n: int
    n_samples: int
    bbgky_dt: float
    k_values: tuple
    telescope_orders: tuple
    vtilde_restarts: int
    config_hash: str


def _complex_matrix(node, path):
    try:
        arr = np.array(node, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected nested arrays of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(
            f"{path}: expected a square matrix of [re, im] pairs, got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_vector(node, path):
    try:
        arr = np.array(node, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError(f"{path}: expected a list of [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def _require(data, key, kind, path):
    if key not in data:
        raise ConfigError(f"{path}{key}: required field is missing")
    value = data[key]
    if kind is int:
        # bool is an int subclass but never a valid config integer
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}{key}: expected an integer, got {value!r}")
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}{key}: expected a number, got {value!r}")
        value = float(value)
    elif kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{path}{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _int_list(node, path, minimum=1, strictly_increasing=True):
    if not isinstance(node, list) or not node:
        raise ConfigError(f"{path}: expected a non-empty list of integers")
    out = []
    for i, x in enumerate(node):
        if isinstance(x, bool) or not isinstance(x, int):
            raise ConfigError(f"{path}[{i}]: expected an integer, got {x!r}")
        if x < minimum:
            raise ConfigError(f"{path}[{i}]: must be >= {minimum}")
        out.append(x)
    if strictly_increasing and any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"{path}: values must be strictly increasing")
    return tuple(out)


_KNOWN_KEYS = {
    "spec",
    "scenario",
    "n_values",
    "time_grid",
    "initial_phi",
    "integrator_tol",
    "seed",
    "vtilde_strategy",
    "output_path",
    "obs_m",
    "obs_n",
    "n_samples",
    "bbgky_dt",
    "k_values",
    "telescope_orders",
    "vtilde_restarts",
}


def config_from_dict(data, overrides=None):
    """Validate a parsed config mapping and freeze it into ExperimentConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    if overrides:
        data.update(overrides)
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    scenario = _require(data, "scenario", str, "")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: {scenario!r} is not one of {', '.join(SCENARIOS)}")

    spec_node = _require(data, "spec", dict, "")
    d = _require(spec_node, "d", int, "spec.")
    max_order = _require(spec_node, "max_order", int, "spec.")
    terms_node = _require(spec_node, "terms", dict, "spec.")
    unknown_spec = sorted(set(spec_node) - {"d", "max_order", "terms"})
    if unknown_spec:
        raise ConfigError(f"spec: unknown key(s): {', '.join(unknown_spec)}")
    terms = {}
    for key, matrix_node in terms_node.items():
        try:
            order = int(key)
        except (TypeError, ValueError):
            raise ConfigError(f"spec.terms.{key}: key must be an integer order") from None
        mat = _complex_matrix(matrix_node, f"spec.terms.{key}")
        try:
            terms[order] = PotentialTerm(order, mat)
        except ValueError as exc:
            raise ConfigError(f"spec.terms.{key}: {exc}") from None
    try:
        spec = HamiltonianSpec(d, max_order, terms)
    except ValueError as exc:
        raise ConfigError(f"spec: {exc}") from None

    n_values = _int_list(_require(data, "n_values", list, ""), "n_values")

    grid_node = _require(data, "time_grid", list, "")
    if not grid_node:
        raise ConfigError("time_grid: must be non-empty")
    time_grid = []
    for i, x in enumerate(grid_node):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"time_grid[{i}]: expected a number, got {x!r}")
        time_grid.append(float(x))
    if time_grid[0] < 0 or any(b <= a for a, b in zip(time_grid, time_grid[1:])):
        raise ConfigError("time_grid: values must be non-negative and strictly increasing")
    time_grid = tuple(time_grid)

    phi = _complex_vector(_require(data, "initial_phi", list, ""), "initial_phi")
    if phi.size != d:
        raise ConfigError(f"initial_phi: length {phi.size} does not match spec.d = {d}")
    norm_dev = abs(np.linalg.norm(phi) - 1.0)
    if norm_dev > 1e-10:
        raise ConfigError(f"initial_phi: norm deviates from 1 by {norm_dev:.3e}")

    tol = float(data.get("integrator_tol", 1e-9))
    if not (isinstance(data.get("integrator_tol", 1e-9), (int, float)) and tol > 0):
        raise ConfigError("integrator_tol: must be a positive number")

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not (0 <= seed < _U64):
        raise ConfigError("seed: must be an unsigned 64-bit integer")

    strategy = data.get("vtilde_strategy", "canonical")
    if strategy not in ("canonical", "search"):
        raise ConfigError(f"vtilde_strategy: {strategy!r} is not 'canonical' or 'search'")

    output_path = data.get("output_path", "results.csv")
    if not isinstance(output_path, str) or not output_path:
        raise ConfigError("output_path: must be a non-empty string")

    def _opt_int(key, default, minimum):
        value = data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigError(f"{key}: must be an integer >= {minimum}")
        return value

    obs_m = _opt_int("obs_m", 1, 1)
    obs_n = _opt_int("obs_n", 1, 1)
    n_samples = _opt_int("n_samples", 16, 1)
    vtilde_restarts = _opt_int("vtilde_restarts", 8, 0)
    bbgky_dt = data.get("bbgky_dt", 1e-3)
    if isinstance(bbgky_dt, bool) or not isinstance(bbgky_dt, (int, float)) or bbgky_dt <= 0:
        raise ConfigError("bbgky_dt: must be a positive number")
    bbgky_dt = float(bbgky_dt)
    k_values = _int_list(data.get("k_values", [1]), "k_values")
    telescope_orders = _int_list(data.get("telescope_orders", [1, 2]), "telescope_orders")

    normalized = {
        "scenario": scenario,
        "spec": {
            "d": d,
            "max_order": max_order,
            "terms": {
                str(m): [
                    [[float(x.real), float(x.imag)] for x in row] for row in terms[m].matrix
                ]
                for m in sorted(terms)
            },
        },
        "n_values": list(n_values),
        "time_grid": list(time_grid),
        "initial_phi": [[float(x.real), float(x.imag)] for x in phi],
        "integrator_tol": tol,
        "seed": seed,
        "vtilde_strategy": strategy,
        "obs_m": obs_m,
        "obs_n": obs_n,
        "n_samples": n_samples,
        "bbgky_dt": bbgky_dt,
        "k_values": list(k_values),
        "telescope_orders": list(telescope_orders),
        "vtilde_restarts": vtilde_restarts,
    }
    digest = hashlib.sha256(
        json.dumps(normalized, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()[:16]

    return ExperimentConfig(
        spec=spec,
        scenario=scenario,
        n_values=n_values,
        time_grid=time_grid,
        initial_phi=phi,
        integrator_tol=tol,
        seed=seed,
        vtilde_strategy=strategy,
        output_path=output_path,
        obs_m=obs_m,
        obs_n=obs_n,
        n_samples=n_samples,
        bbgky_dt=bbgky_dt,
        k_values=k_values,
        telescope_orders=telescope_orders,
        vtilde_restarts=vtilde_restarts,
        config_hash=digest,
    )


def load_config(text, overrides=None):
    """Parse a JSON config document and validate it."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(data, overrides=overrides)


def _substream(seed, purpose, index):
    digest = hashlib.sha256(f"{purpose}:{index}".encode()).digest()
    word = int.from_bytes(digest[:8], "big")
    key = np.array([seed % _U64, word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def random_unit_hermitian(rng, dim):
    """Hermitian with standard-normal re/im entries, unit spectral norm."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + g.conj().T) / 2
    return h / operator_norm(h)


def _fit_slope(ns, values):
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    xc = x - x.mean()
    return float((xc @ (y - y.mean())) / (xc @ xc))


def _slope_points(pairs, min_n):
    return [(n, v) for n, v in pairs if n >= min_n and v > SLOPE_FLOOR]


# ---------------------------------------------------------------------------
# scenario runners


def run_convergence(config):
    """Exact one-particle RDM vs mean-field evolution across N."""
    spec = config.spec
    gamma0 = pure_state_density(config.initial_phi)
    traj = hartree_evolve(gamma0, spec, config.time_grid, config.integrator_tol)
    consts = bound_constants(
        spec,
        vtilde(spec, config.vtilde_strategy, config.vtilde_restarts, config.seed),
    )
    rows = []
    by_time = {i: [] for i in range(len(config.time_grid))}
    for n in config.n_values:
        basis = enumerate_basis(spec.d, n)
        hamiltonian = build_hamiltonian(spec, n, basis)
        psi0 = embed_product_state(config.initial_phi, n)
        states = evolve_exact(hamiltonian, psi0, config.time_grid)
        for i, (t, state) in enumerate(zip(config.time_grid, states)):
            dist = trace_distance(rdm(state, 1), traj.states[i])
            bound = mean_field_error_bound(consts, n, t)
            by_time[i].append((n, dist))
            rows.append(
                {
                    "config_hash": config.config_hash,
                    "kind": "point",
                    "N": n,
                    "t": t,
                    "trace_distance": dist,
                    "mean_field_error_bound": bound,
                    "ratio": dist * n,
                    "violation": int(dist > bound + VIOLATION_ATOL),
                }
            )
    for i, t in enumerate(config.time_grid):
        if t <= 0:
            continue
        pts = _slope_points(by_time[i], 2 * spec.max_order)
        slope = _fit_slope(*zip(*pts)) if len(pts) >= 2 else float("nan")
        rows.append(
            {"config_hash": config.config_hash, "kind": "slope", "t": t, "slope": slope}
        )
    return rows


def run_lr(config):
    """Heisenberg commutator growth against its closed-form bound."""
    spec = config.spec
    m, n = config.obs_m, config.obs_n
    consts = bound_constants(
        spec,
        vtilde(spec, config.vtilde_strategy, config.vtilde_restarts, config.seed),
    )
    support_b = tuple(range(1, n + 1))
    support_a = tuple(range(n + 1, n + m + 1))
    rows = []
    for n_particles in config.n_values:
        if m + n > n_particles:
            raise ValueError(f"obs_m + obs_n = {m + n} exceeds N = {n_particles}")
        for s in range(config.n_samples):
            a = random_unit_hermitian(_substream(config.seed, "lr:a", s), spec.d**m)
            b = random_unit_hermitian(_substream(config.seed, "lr:b", s), spec.d**n)
            norm_a = operator_norm(a)
            norm_b = operator_norm(b)
            lhs_values = commutator_growth(
                spec,
                n_particles,
                ObservableOnSubset(support_a, a),
                ObservableOnSubset(support_b, b),
                config.time_grid,
            )
            for t, lhs in zip(config.time_grid, lhs_values):
                rhs = commutator_growth_bound(m, n, norm_a, norm_b, consts, n_particles, t)
                rows.append(
                    {
                        "config_hash": config.config_hash,
                        "N": n_particles,
                        "m": m,
                        "n": n,
                        "sample": s,
                        "t": t,
                        "lhs": lhs,
                        "rhs": rhs,
                        "violation": int(lhs > rhs + VIOLATION_ATOL),
                    }
                )
    return rows


def run_corr(config):
    """Correlation gap of evolved product states against its bound."""
    spec = config.spec
    m, n = config.obs_m, config.obs_n
    consts = bound_constants(
        spec,
        vtilde(spec, config.vtilde_strategy, config.vtilde_restarts, config.seed),
    )
    samples = [
        (
            random_unit_hermitian(_substream(config.seed, "corr:a", s), spec.d**m),
            random_unit_hermitian(_substream(config.seed, "corr:b", s), spec.d**n),
        )
        for s in range(config.n_samples)
    ]
    rows = []
    mean_by_time = {i: [] for i in range(len(config.time_grid))}
    for n_particles in config.n_values:
        if m + n > n_particles:
            raise ValueError(f"obs_m + obs_n = {m + n} exceeds N = {n_particles}")
        basis = enumerate_basis(spec.d, n_particles)
        hamiltonian = build_hamiltonian(spec, n_particles, basis)
        psi0 = embed_product_state(config.initial_phi, n_particles)
        states = evolve_exact(hamiltonian, psi0, config.time_grid)
        for i, (t, state) in enumerate(zip(config.time_grid, states)):
            sample_lhs = []
            for s, (a, b) in enumerate(samples):
                lhs = correlation_gap(state, m, n, a, b)
                rhs = correlation_gap_bound(
                    m, n, operator_norm(a), operator_norm(b), consts, n_particles, t
                )
                sample_lhs.append(lhs)
                rows.append(
                    {
                        "config_hash": config.config_hash,
                        "kind": "point",
                        "N": n_particles,
                        "m": m,
                        "n": n,
                        "sample": s,
                        "t": t,
                        "lhs": lhs,
                        "rhs": rhs,
                        "violation": int(lhs > rhs + VIOLATION_ATOL),
                    }
                )
            mean_by_time[i].append((n_particles, float(np.mean(sample_lhs))))
    for i, t in enumerate(config.time_grid):
        if t <= 0:
            continue
        pts = _slope_points(mean_by_time[i], 2 * spec.max_order)
        slope = _fit_slope(*zip(*pts)) if len(pts) >= 2 else float("nan")
        rows.append(
            {"config_hash": config.config_hash, "kind": "slope", "t": t, "slope": slope}
        )
    return rows


def run_bbgky(config):
    """Finite-difference residuals of the hierarchy RHS, plus telescoping rows."""
    spec = config.spec
    dt = config.bbgky_dt
    max_present = max(spec.present_orders, default=1)
    gamma0 = pure_state_density(config.initial_phi)
    traj = hartree_evolve(gamma0, spec, config.time_grid, config.integrator_tol)
    rows = []
    for n_particles in config.n_values:
        basis = enumerate_basis(spec.d, n_particles)
        hamiltonian = build_hamiltonian(spec, n_particles, basis)
        psi0 = embed_product_state(config.initial_phi, n_particles)
        fd_times = [t for t in config.time_grid if t >= dt]
        needed = list(config.time_grid)
        for t in fd_times:
            needed.extend((t - dt, t - dt / 2, t + dt / 2, t + dt))
        needed = sorted(set(needed))
        states = dict(zip(needed, evolve_exact(hamiltonian, psi0, needed)))
        for k in config.k_values:
            if k + max_present - 1 > n_particles:
                raise ValueError(
                    f"k_values entry {k} needs RDM order {k + max_present - 1} > N = {n_particles}"
                )
            for t in fd_times:
                rdms_t = {
                    offset: rdm(states[t], k + offset) for offset in range(max_present)
                }
                rhs = bbgky_rhs(spec, n_particles, k, rdms_t)
                residuals = []
                for step in (dt, dt / 2):
                    fd = (
                        rdm(states[t + step], k).matrix - rdm(states[t - step], k).matrix
                    ) / (2 * step)
                    residuals.append(float(np.max(np.abs(fd - rhs))))
                    rows.append(
                        {
                            "config_hash": config.config_hash,
                            "kind": "residual",
                            "N": n_particles,
                            "k": k,
                            "t": t,
                            "dt": step,
                            "value": residuals[-1],
                        }
                    )
                order = (
                    math.log2(residuals[0] / residuals[1])
                    if residuals[1] > 0
                    else float("nan")
                )
                rows.append(
                    {
                        "config_hash": config.config_hash,
                        "kind": "order",
                        "N": n_particles,
                        "k": k,
                        "t": t,
                        "dt": dt,
                        "value": order,
                    }
                )
        unit = DensityMatrix(0, spec.d, np.array([[1.0 + 0.0j]]))
        for m_tel in config.telescope_orders:
            if m_tel + 1 > n_particles:
                continue
            for i, t in enumerate(config.time_grid):
                exact = {0: unit}
                for order in range(1, m_tel + 2):
                    exact[order] = rdm(states[t], order)
                value = telescoping_residual(exact, traj.states[i], m_tel)
                rows.append(
                    {
                        "config_hash": config.config_hash,
                        "kind": "telescope",
                        "N": n_particles,
                        "m": m_tel,
                        "t": t,
                        "value": value,
                    }
                )
    return rows


def run_bounds(config):
    """Bound constants under both vtilde strategies, plus bound curves."""
    spec = config.spec
    constants = {
        "canonical": bound_constants(spec, vtilde(spec, "canonical")),
        "search": bound_constants(
            spec, vtilde(spec, "search", config.vtilde_restarts, config.seed)
        ),
    }
    rows = []
    for strategy in ("canonical", "search"):
        c = constants[strategy]
        rows.append(
            {
                "config_hash": config.config_hash,
                "kind": "constants",
                "strategy": strategy,
                "m_max": c.m_max,
                "sum_l1_v": c.sum_l1_v,
                "sum_l2_v": c.sum_l2_v,
                "vtilde": c.vtilde,
                "lambda_v": c.lambda_v,
            }
        )
    selected = constants[config.vtilde_strategy]
    for n_particles in config.n_values:
        for t in config.time_grid:
            rows.append(
                {
                    "config_hash": config.config_hash,
                    "kind": "curve",
                    "strategy": config.vtilde_strategy,
                    "N": n_particles,
                    "t": t,
                    "mean_field_error_bound": mean_field_error_bound(
                        selected, n_particles, t
                    ),
                    "commutator_growth_bound": commutator_growth_bound(
                        1, 1, 1.0, 1.0, selected, n_particles, t
                    ),
                    "correlation_gap_bound": correlation_gap_bound(
                        1, 1, 1.0, 1.0, selected, n_particles, t
                    ),
                }
            )
    return rows


RUNNERS = {
    "converge": run_convergence,
    "lr": run_lr,
    "corr": run_corr,
    "bbgky": run_bbgky,
    "bounds": run_bounds,
}

COLUMNS = {
    "converge": [
        "config_hash",
        "kind",
        "N",
        "t",
        "trace_distance",
        "mean_field_error_bound",
        "ratio",
        "slope",
        "violation",
    ],
    "lr": ["config_hash", "N", "m", "n", "sample", "t", "lhs", "rhs", "violation"],
    "corr": [
        "config_hash",
        "kind",
        "N",
        "m",
        "n",
        "sample",
        "t",
        "lhs",
        "rhs",
        "slope",
        "violation",
    ],
    "bbgky": ["config_hash", "kind", "N", "k", "m", "t", "dt", "value"],
    "bounds": [
        "config_hash",
        "kind",
        "strategy",
        "m_max",
        "sum_l1_v",
        "sum_l2_v",
        "vtilde",
        "lambda_v",
        "N",
        "t",
        "mean_field_error_bound",
        "commutator_growth_bound",
        "correlation_gap_bound",
    ],
}


def _cell(value):
    if value is None or value == "":
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_rows(path, config, rows):
    """Write scenario rows as CSV with the provenance comment line."""
    columns = COLUMNS[config.scenario]
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# config_hash={config.config_hash} version={VERSION}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(col)) for col in columns])


def count_violations(rows):
    return sum(int(row.get("violation") or 0) for row in rows)


def _curves_for_plot(config, rows):
    scenario = config.scenario
    curves = []
    if scenario == "converge":
        points = [r for r in rows if r.get("kind") == "point"]
        for i, t in enumerate(config.time_grid):
            at_t = [r for r in points if r["t"] == t]
            ns = [r["N"] for r in at_t]
            curves.append((f"distance_vs_N.t{i}", ns, [r["trace_distance"] for r in at_t]))
            curves.append(
                (f"bound_vs_N.t{i}", ns, [r["mean_field_error_bound"] for r in at_t])
            )
    elif scenario in ("lr", "corr"):
        points = [r for r in rows if r.get("kind", "point") == "point"]
        for n_particles in config.n_values:
            lhs_mean, rhs_vals = [], []
            for t in config.time_grid:
                at = [r for r in points if r.get("N") == n_particles and r.get("t") == t]
                lhs_mean.append(float(np.mean([r["lhs"] for r in at])))
                rhs_vals.append(at[0]["rhs"])
            curve = BoundCurve(
                np.asarray(config.time_grid), lhs_mean, rhs_vals, f"N{n_particles}"
            )
            curves.append((f"lhs_vs_t.N{n_particles}", curve.times, curve.lhs))
            curves.append((f"bound_vs_t.N{n_particles}", curve.times, curve.rhs))
    elif scenario == "bbgky":
        for n_particles in config.n_values:
            for k in config.k_values:
                at = [
                    r
                    for r in rows
                    if r.get("kind") == "residual"
                    and r.get("N") == n_particles
                    and r.get("k") == k
                    and r.get("dt") == config.bbgky_dt
                ]
                if at:
                    curves.append(
                        (
                            f"residual_vs_t.N{n_particles}.k{k}",
                            [r["t"] for r in at],
                            [r["value"] for r in at],
                        )
                    )
    elif scenario == "bounds":
        for n_particles in config.n_values:
            at = [r for r in rows if r.get("kind") == "curve" and r.get("N") == n_particles]
            ts = [r["t"] for r in at]
            for col in (
                "mean_field_error_bound",
                "commutator_growth_bound",
                "correlation_gap_bound",
            ):
                curves.append((f"{col}_vs_t.N{n_particles}", ts, [r[col] for r in at]))
    return curves


def write_plot_data(path, config, rows):
    """Two-column .dat files per curve, next to the CSV; returns the paths."""
    stem = str(Path(path).with_suffix(""))
    written = []
    for name, xs, ys in _curves_for_plot(config, rows):
        out = f"{stem}.{name}.dat"
        with open(out, "w", encoding="utf-8", newline="") as f:
            for x, y in zip(xs, ys):
                f.write(f"{_cell(float(x))} {_cell(float(y))}\n")
        written.append(out)
    return written
