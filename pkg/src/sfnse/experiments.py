"""Orchestrated reproductions of the desk-scale numerical studies.

Four drivers: the per-exponent mass-conservation table, the coupled-path
strong-convergence study for the splitting scheme, the energy ensemble under
noise, and single-trajectory field-evolution snapshot runs.  Monte Carlo
paths are independent work items keyed by (master seed, path index); results
are aggregated in fixed path order so serial and parallel execution agree
bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from .config import RunConfig
from .diagnostics import energy, mass
from .dynamics import ModelParams, Observer, SchemeParams, evolve
from .errors import ConfigError
from .noise import NoiseModel, build_noise_model, coarsen_path, sample_wiener_path
from .output import write_snapshot
from .spectral import ComplexField, GridSpec, build_grid


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-level strong errors of the splitting scheme and fitted orders.

    ``errors[r]`` is the Monte Carlo mean over paths of the max-in-time
    discrete l2 distance to the shared-path reference; ``orders[r]`` is
    log2(errors[r] / errors[r+1]); ``ci_halfwidths`` are 95% normal
    confidence half-widths on each error.
    """

    dts: tuple[float, ...]
    errors: tuple[float, ...]
    orders: tuple[float, ...]
    n_paths: int
    seed: int
    ci_halfwidths: tuple[float, ...]


@dataclass(frozen=True)
class EnsembleReport:
    """Energy time series per path plus their columnwise mean."""

    times: tuple[float, ...]
    per_path_energy: np.ndarray
    mean_energy: tuple[float, ...]


def sech_carrier_initial(grid: GridSpec) -> ComplexField:
    """Reference initial profile: sech envelope with carrier wavenumber 2.

    The envelope is centered at the domain midpoint so its periodic extension
    is smooth; on domains symmetric about zero this is exactly sech(x) e^(2ix).
    """
    x = grid.nodes()
    centre = 0.5 * (grid.a + grid.b)
    return ComplexField(np.exp(2j * x) / np.cosh(x - centre), time=0.0)


def path_seed(master_seed: int, index: int) -> int:
    """Stable per-path seed derived from the master seed and path index."""
    return int(np.random.SeedSequence(entropy=[int(master_seed), int(index)]).generate_state(1, np.uint64)[0])


def steps_for_horizon(T: float, dt: float, key: str) -> int:
    steps = round(T / dt)
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ConfigError(f"{key}: horizon T={T} is not an integral number of steps of dt={dt}")
    return steps


def model_from_config(config: RunConfig, alpha: float | None = None) -> ModelParams:
    return ModelParams(
        alpha=config.alpha if alpha is None else alpha,
        lam=config.lam,
        sigma=config.sigma,
        epsilon=config.epsilon,
    )


def scheme_from_config(config: RunConfig, dt: float | None = None) -> SchemeParams:
    return SchemeParams(
        dt=config.dt if dt is None else dt,
        fp_tol=config.fp_tol,
        fp_max_iter=config.fp_max_iter,
        splitting_nonlinear=config.splitting_nonlinear,
    )


def _grid_and_noise(config: RunConfig) -> tuple[GridSpec, NoiseModel]:
    grid = build_grid(config.grid_a, config.grid_b, config.grid_n)
    noise = build_noise_model(config.noise_k, grid, epsilon=config.epsilon, profile=config.noise_profile)
    return grid, noise


def run_mass_table(config: RunConfig) -> list[tuple[float, float, float]]:
    """Midpoint mass-conservation table: one (time, alpha, mass) row per sample.

    Each exponent in ``config.mass_alphas`` is evolved over [0, T] on a single
    noise path (the same path for every alpha), with the norm-form mass
    sampled every ``config.mass_sample_dt`` of model time.
    """
    grid, noise = _grid_and_noise(config)
    steps = steps_for_horizon(config.horizon_t, config.dt, "horizon.T")
    stride = steps_for_horizon(config.mass_sample_dt, config.dt, "mass.sample_dt")
    scheme = scheme_from_config(config)
    initial = sech_carrier_initial(grid)
    rows: list[tuple[float, float, float]] = []
    for alpha in config.mass_alphas:
        path = sample_wiener_path(noise, steps, config.dt, config.noise_seed)
        observer = Observer("mass", stride, lambda s: mass(s, grid, "norm"))
        _, records = evolve(initial, "midpoint", model_from_config(config, alpha), scheme, grid, path, noise, [observer])
        rows.extend((time, alpha, value) for _, time, value in records["mass"])
    return rows


def _convergence_path_errors(
    index: int,
    config: RunConfig,
) -> np.ndarray:
    """Max-in-time errors of every test level against the reference, one path."""
    grid, noise = _grid_and_noise(config)
    model = model_from_config(config)
    levels = config.converge_levels
    ref = config.converge_ref_level
    base_dt = config.converge_base_dt
    fine_dt = base_dt / 2**ref
    fine_steps = steps_for_horizon(config.horizon_t, fine_dt, "horizon.T")
    seed = path_seed(config.noise_seed, index)
    fine = sample_wiener_path(noise, fine_steps, fine_dt, seed, level=ref)
    initial = sech_carrier_initial(grid)

    # reference states stored on the finest test level's time grid, which
    # contains every coarser level's grid
    ref_stride = 2 ** (ref - (levels - 1))
    snap = Observer("snap", ref_stride, lambda s: s.values)
    _, ref_records = evolve(
        initial, "splitting", model, scheme_from_config(config, fine_dt), grid, fine, noise, [snap]
    )
    ref_states = [value for _, _, value in ref_records["snap"]]

    errors = np.empty(levels)
    for r in range(levels):
        dt_r = base_dt / 2**r
        path_r = coarsen_path(fine, 2 ** (ref - r))
        snap_r = Observer("snap", 1, lambda s: s.values)
        _, records_r = evolve(
            initial, "splitting", model, scheme_from_config(config, dt_r), grid, path_r, noise, [snap_r]
        )
        spacing = 2 ** ((levels - 1) - r)  # level-r times on the stored reference grid
        worst = 0.0
        for n, (_, _, values) in enumerate(records_r["snap"]):
            diff = values - ref_states[n * spacing]
            err = np.sqrt(grid.h * float(np.sum(np.abs(diff) ** 2)))
            worst = max(worst, err)
        errors[r] = worst
    return errors


def run_convergence_study(config: RunConfig) -> ConvergenceReport:
    """Strong-convergence study of the splitting scheme on coupled noise paths.

    For each path, the finest-level increments are sampled once and every
    coarser level is an exact block sum of them, so all levels and the
    reference see the same Brownian path.  The per-level error is the Monte
    Carlo mean over paths of the max-in-time l2 distance to the reference
    run, sampled at the coarse level's own step times; orders are log2 ratios
    of successive errors.
    """
    if config.sigma != 0.0:
        raise ConfigError("convergence study requires model.sigma = 0")
    levels = config.converge_levels
    if levels < 2:
        raise ConfigError("convergence study needs at least 2 levels")
    if config.converge_ref_level <= levels - 1:
        raise ConfigError(
            f"reference level {config.converge_ref_level} must be strictly finer than "
            f"the finest test level {levels - 1}"
        )
    steps_for_horizon(config.horizon_t, config.converge_base_dt, "converge.base_dt")
    n_paths = config.converge_n_paths
    worker = partial(_convergence_path_errors, config=config)
    per_path = np.empty((n_paths, levels))
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for i, errs in enumerate(pool.map(worker, range(n_paths))):
                per_path[i] = errs
    else:
        for i in range(n_paths):
            per_path[i] = worker(i)

    errors = per_path.mean(axis=0)
    if n_paths > 1:
        ci = 1.96 * per_path.std(axis=0, ddof=1) / np.sqrt(n_paths)
    else:
        ci = np.zeros(levels)
    orders = np.log2(errors[:-1] / errors[1:])
    dts = tuple(config.converge_base_dt / 2**r for r in range(levels))
    return ConvergenceReport(
        dts=dts,
        errors=tuple(float(e) for e in errors),
        orders=tuple(float(o) for o in orders),
        n_paths=n_paths,
        seed=config.noise_seed,
        ci_halfwidths=tuple(float(c) for c in ci),
    )


def _energy_path_series(index: int, config: RunConfig) -> tuple[tuple[float, ...], np.ndarray]:
    grid, noise = _grid_and_noise(config)
    model = model_from_config(config)
    steps = steps_for_horizon(config.horizon_t, config.dt, "horizon.T")
    path = sample_wiener_path(noise, steps, config.dt, path_seed(config.noise_seed, index))
    observer = Observer("energy", config.energy_stride, lambda s: energy(s, grid, model))
    _, records = evolve(
        sech_carrier_initial(grid), "midpoint", model, scheme_from_config(config), grid, path, noise, [observer]
    )
    times = tuple(time for _, time, _ in records["energy"])
    values = np.array([value for _, _, value in records["energy"]])
    return times, values


def run_energy_ensemble(config: RunConfig) -> EnsembleReport:
    """Midpoint energy series over an ensemble of independent noise paths."""
    n_paths = config.energy_n_paths
    worker = partial(_energy_path_series, config=config)
    times: tuple[float, ...] | None = None
    series = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(worker, range(n_paths)))
    else:
        results = [worker(i) for i in range(n_paths)]
    for t, values in results:
        times = t if times is None else times
        series.append(values)
    per_path = np.vstack(series)
    per_path.setflags(write=False)
    mean = per_path.mean(axis=0)
    return EnsembleReport(times=times, per_path_energy=per_path, mean_energy=tuple(float(m) for m in mean))


def run_field_evolution(
    config: RunConfig, write_files: bool = True
) -> list[tuple[float, int, ComplexField]]:
    """Single-trajectory snapshot runs for each configured exponent.

    Snapshots land in ``config.out_dir`` as
    ``field_alpha<alpha>_step<step>.sfns`` (plot-ready binary fields), unless
    ``write_files`` is off.  Returns the (alpha, step, field) series in run
    order; a snapshot stride of zero disables snapshots and yields an empty
    series.
    """
    if config.snapshot_stride <= 0:
        return []
    grid, noise = _grid_and_noise(config)
    steps = steps_for_horizon(config.horizon_t, config.dt, "horizon.T")
    scheme = scheme_from_config(config)
    out_dir = Path(config.out_dir)
    if write_files:
        out_dir.mkdir(parents=True, exist_ok=True)
    snapshots: list[tuple[float, int, ComplexField]] = []
    for alpha in config.field_alphas:
        path = sample_wiener_path(noise, steps, config.dt, config.noise_seed)
        observer = Observer("snap", config.snapshot_stride, lambda s: s)
        _, records = evolve(
            sech_carrier_initial(grid), config.integrator, model_from_config(config, alpha), scheme, grid, path, noise, [observer]
        )
        for step, _, state in records["snap"]:
            if write_files:
                write_snapshot(out_dir / f"field_alpha{alpha:g}_step{step:06d}.sfns", state, grid)
            snapshots.append((alpha, step, state))
    return snapshots
