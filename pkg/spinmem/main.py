"""Command implementations behind the spinmem CLI.

Each ``cmd_*`` function reads a :class:`RunConfig`, writes its results into a
:class:`Workspace` and returns the summary it wrote.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np
from colorama import Fore

from spinmem.cache import ResultCache
from spinmem.config import Config, RunConfig
from spinmem.distributions import (
    HOMOGENEOUS,
    build_model,
    characteristic_width,
    frequency_bins,
)
from spinmem.dynamics import ControlSchedule, integrate
from spinmem.errors import ChannelError, SpinMemError
from spinmem.logs import logger
from spinmem.metrics import (
    CLASSICAL_FIDELITY,
    channel_metrics,
    fit_gain,
    fid_analytic_compare,
    fid_initial_state,
    gain_decomposition,
    inversion_summary,
    max_nonclassical_time,
)
from spinmem.model import TWO_PI, EnsembleModel
from spinmem.oracle import SmallSystem, compare_with_moments, spin_fid_check
from spinmem.protocol import (
    ExperimentSetup,
    MemoryResult,
    PreparedProtocol,
    calibrate_pulses,
    capacity,
    fix_t_cav_eff,
    optimize_tswap,
    plan_multimode,
    prepare_protocol,
    run_memory,
    run_multimode,
)
from spinmem.protocol.memory import pulse_drives
from spinmem.protocol.multimode import mode_wait
from spinmem.protocol.schedule import part_label
from spinmem.workspace import Workspace

RESOLVED_CONFIG_FILE = "resolved_config.json"
EXIT_ERROR = 2
# FID check: a wide line so the folded tails stay below one percent
FID_HALF_SPAN_HZ = 150e6
FID_BINS = 1201
FID_TAIL_MASS = 1e-2
SWEEP_COLUMNS = ("coupling", "p_peak_w", "gain", "var_sum", "fq")

global_config = Config()


def run_command(
    command: Callable[[RunConfig, Workspace], dict],
    run_config: RunConfig,
    workspace: Workspace,
) -> int:
    """Run one command and map domain errors to ``error.json`` plus exit code 2."""
    workspace.write_summary(RESOLVED_CONFIG_FILE, run_config.resolved)
    try:
        command(run_config, workspace)
    except SpinMemError as e:
        logger.error(f"{type(e).__name__}: ", e.message)
        workspace.write_error(e)
        return EXIT_ERROR
    logger.typewriter_log("Results written to ", Fore.GREEN, str(workspace.root))
    return 0


def result_cache(workspace: Workspace) -> ResultCache:
    return ResultCache(global_config.cache_dir or workspace.cache_dir)


def tuned_setup(
    run_config: RunConfig,
    cache: ResultCache,
    t_mem: float,
    model: EnsembleModel | None = None,
    variant: str = "configured",
) -> ExperimentSetup:
    """Experiment setup with swap time, pulse amplitudes and t_cav_eff filled in.

    Each tuning result is cached under the configuration subset it depends on;
    ``variant`` tells apart models that the configuration alone does not name.
    """
    setup = run_config.experiment_setup(model)
    p_peak = setup.model.params.p_peak
    extra = {"p_peak_w": p_peak, "variant": variant}

    t_swap = setup.t_swap
    if t_swap is None:
        subset = {**run_config.cache_subset("t_swap"), "variant": variant}
        t_swap = cache.get_or_compute("t_swap", subset, lambda: optimize_tswap(setup))
    setup = setup.replace(t_swap=float(t_swap))

    subset = {**run_config.cache_subset("a_max"), **extra}
    a_max = cache.get_or_compute(
        f"a_max:{p_peak!r}", subset, lambda: list(calibrate_pulses(setup))
    )
    setup = setup.replace(a_max=(float(a_max[0]), float(a_max[1])))

    if setup.t_cav_eff is None:
        subset = {**run_config.cache_subset("t_cav_eff"), **extra, "t_mem_s": t_mem}

        def compute_t_cav() -> float:
            drives = pulse_drives(setup, setup.a_max)
            return fix_t_cav_eff(setup, t_mem, t_swap, drives)

        setup = setup.replace(
            t_cav_eff=float(cache.get_or_compute("t_cav_eff", subset, compute_t_cav))
        )
    return setup


def _memory_job(
    setup: ExperimentSetup, prepared: PreparedProtocol, alpha: complex, mode: str
) -> MemoryResult:
    return run_memory(alpha, prepared.timing.t_mem, setup.replace(mode=mode), prepared)


def run_memory_jobs(
    setup: ExperimentSetup,
    prepared: PreparedProtocol,
    jobs: Sequence[tuple[complex, str]],
) -> list[MemoryResult]:
    """Independent memory runs, spread over the worker pool when it has workers."""
    workers = min(global_config.workers, len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_memory_job, setup, prepared, alpha, mode)
                for alpha, mode in jobs
            ]
            return [f.result() for f in futures]
    return [_memory_job(setup, prepared, alpha, mode) for alpha, mode in jobs]


def timing_rows(prepared: PreparedProtocol) -> list[tuple]:
    timing = prepared.timing
    return [
        (part, part_label(part), timing.start(part), timing.duration(part))
        for part in range(1, len(timing.durations) + 1)
    ]


def cmd_distribution(run_config: RunConfig, workspace: Workspace) -> dict:
    """Frequency bins, coupling bins and the line's effective width."""
    params = run_config.physical_params()
    disc = run_config["discretization"]
    line = run_config.frequency_line()
    fbins = frequency_bins(
        line,
        disc["n_freq_bins"],
        TWO_PI * disc["freq_half_span_hz"],
        disc["max_tail_mass"],
    )
    workspace.write_rows(
        "freq_bins.csv",
        ["delta_hz", "weight"],
        [(b.delta / TWO_PI, b.weight) for b in fbins],
    )

    cbins = run_config.coupling_bins()
    if cbins is None:
        rows = [(params.g_bar / TWO_PI, 1.0, 1.0)]
    else:
        rows = [(b.g / TWO_PI, b.mass, b.g2_mass) for b in cbins]
    workspace.write_rows("coupling_bins.csv", ["g_hz", "mass", "g2_mass"], rows)

    gamma = characteristic_width(line)
    model = run_config.build_model(params, cbins)
    summary = {
        "gamma_hz": gamma / TWO_PI,
        "cooperativity": params.cooperativity(gamma),
        "n_total": params.n_total,
        "g_bar_hz": params.g_bar / TWO_PI,
        "n_freq_bins": len(fbins),
        "n_coupling_bins": len(rows),
        "n_sub_ensembles": model.size,
    }
    workspace.write_summary("distribution.json", summary)
    logger.typewriter_log(
        "Distribution: ",
        Fore.GREEN,
        f"Gamma/2pi = {gamma / TWO_PI / 1e6:.3f} MHz,"
        f" C = {summary['cooperativity']:.3f}, M = {model.size}",
    )
    return summary


def cmd_schedule(run_config: RunConfig, workspace: Workspace) -> dict:
    """Timing table and sampled controls, without integrating the protocol."""
    t_mem = run_config["protocol"]["t_mem_s"]
    setup = tuned_setup(run_config, result_cache(workspace), t_mem)
    prepared = prepare_protocol(setup, t_mem)
    workspace.write_rows(
        "timing.csv", ["part", "label", "start_s", "duration_s"], timing_rows(prepared)
    )
    stride = run_config["integrator"]["sample_stride_s"]
    workspace.write_table("controls.csv", prepared.schedule.table(stride))
    summary = {**prepared.timing.to_dict(), "a_max": list(prepared.a_max)}
    workspace.write_summary("timing.json", summary)
    return summary


def cmd_run(run_config: RunConfig, workspace: Workspace) -> dict:
    """Single-mode store and retrieve at the configured memory time."""
    t_mem = run_config["protocol"]["t_mem_s"]
    metrics_cfg = run_config["metrics"]
    setup = tuned_setup(run_config, result_cache(workspace), t_mem)
    prepared = prepare_protocol(setup, t_mem)
    alpha = run_config.alpha_in
    jobs = [(alpha, setup.mode), (0j, "means_only"), (2 * alpha, "means_only")]
    main, vacuum, double = run_memory_jobs(setup, prepared, jobs)
    workspace.write_table("trajectory.csv", main.trajectory.observables(setup.model))

    inputs = [0j, alpha, 2 * alpha]
    outputs = [vacuum.alpha_out, main.alpha_out, double.alpha_out]
    params = setup.model.params
    summary = {
        "alpha_in": alpha,
        "alpha_out": main.alpha_out,
        "timing": prepared.timing.to_dict(),
        "a_max": list(prepared.a_max),
        "inversion": inversion_summary(main.trajectory, setup.model, prepared.timing),
        "psd_ratios": main.trajectory.psd_ratios,
    }
    summary.update(
        _channel_summary(
            inputs,
            outputs,
            main.var_sum,
            metrics_cfg["fock_dim"],
            metrics_cfg["hermite_points"],
        )
    )
    gain = summary["metrics"]["gain"]
    summary["gain_decomposition"] = gain_decomposition(
        gain,
        params.kappa_min,
        params.gens,
        params.gamma_perp,
        t_mem,
        setup.constants.t_delta_t,
    ).to_dict()
    summary.update(
        _nonclassical_summary(
            run_config, setup, gain, main.var_sum, t_mem, metrics_cfg
        )
    )
    workspace.write_summary("summary.json", summary)
    return summary


def _channel_summary(inputs, outputs, var_sum, dim, points) -> dict:
    if not math.isfinite(var_sum):
        fit = fit_gain(inputs, outputs)
        logger.warn("means-only run: var_sum and fidelities are not available")
        return {
            "metrics": {
                "gain": fit.gain,
                "phase": fit.phase,
                "var_sum": None,
                "fq": None,
                "fq_haar": None,
                "linearity_residual": fit.linearity_residual,
                "offset": fit.offset,
            }
        }
    metrics = channel_metrics(inputs, outputs, var_sum, dim, points)
    logger.typewriter_log(
        "Channel: ",
        Fore.GREEN,
        f"G = {metrics.gain:.4f}, 2sigma^2 = {metrics.var_sum:.4f},"
        f" F_q = {metrics.fq:.4f}",
    )
    return {"metrics": metrics.to_dict()}


def _nonclassical_summary(
    run_config: RunConfig,
    setup: ExperimentSetup,
    gain: float,
    var_sum: float,
    t_mem: float,
    metrics_cfg: dict,
) -> dict:
    if not math.isfinite(var_sum) or not 0.0 < gain <= 1.0:
        return {"max_nonclassical_t_mem_s": None, "multimode_capacity": None}
    t2 = 1.0 / setup.model.params.gamma_perp
    try:
        t_max = max_nonclassical_time(
            gain,
            var_sum,
            t_mem,
            t2,
            dim=metrics_cfg["fock_dim"],
            points=metrics_cfg["hermite_points"],
        )
    except SpinMemError as e:
        logger.warn(f"no non-classical memory time: {e.message}")
        return {"max_nonclassical_t_mem_s": None, "multimode_capacity": None}
    modes = capacity(
        t_max,
        run_config["multimode"]["spacing_s"],
        setup.t_swap,
        setup.t_cav_eff,
        setup.model.params,
        setup.constants,
    )
    logger.info(
        f"F_q > {CLASSICAL_FIDELITY:.3f} up to T_mem = {t_max * 1e6:.2f} us"
        f" ({modes} modes)",
        title="Extrapolation",
    )
    return {"max_nonclassical_t_mem_s": t_max, "multimode_capacity": modes}


def cmd_multimode(run_config: RunConfig, workspace: Workspace) -> dict:
    """Store a train of fields, retrieve them in order and measure cross-talk."""
    mm = run_config["multimode"]
    t_mem = mm["t_mem_s"]
    alphas = run_config.multimode_alphas
    setup = tuned_setup(run_config, result_cache(workspace), t_mem)
    plan = plan_multimode(setup, t_mem, len(alphas), mm["spacing_s"], mm["q_between"])
    wait = mode_wait(mm["spacing_s"], plan.t_swap, setup.model.params, setup.constants)
    if mm["initial_wait_s"] is not None and abs(mm["initial_wait_s"] - wait) > 1e-9:
        logger.warn(
            f"initial_wait_s={mm['initial_wait_s']:.4g} s is derived from the spacing;"
            f" using {wait:.4g} s"
        )
    result = run_multimode(
        alphas,
        mm["spacing_s"],
        t_mem,
        setup,
        mm["q_between"],
        workers=global_config.workers,
        plan=plan,
    )
    workspace.write_table("trajectory.csv", result.trajectory.observables(setup.model))
    n_modes = len(alphas)
    workspace.write_rows(
        "cross_talk.csv",
        ["mode_out"] + [f"in_{k}" for k in range(n_modes)],
        [(j, *np.abs(result.response[j])) for j in range(n_modes)],
    )
    summary = {
        "alphas_in": list(result.alphas_in),
        "alphas_out": list(result.alphas_out),
        "var_sums": list(result.var_sums),
        "gains": result.gains,
        "cross_talk": result.cross_talk,
        "wait_s": wait,
        "timing": result.timing.to_dict(),
        "capacity": capacity(
            t_mem,
            mm["spacing_s"],
            plan.t_swap,
            plan.t_cav_eff,
            setup.model.params,
            setup.constants,
        ),
    }
    workspace.write_summary("multimode.json", summary)
    return summary


def _sweep_point(
    run_config: RunConfig,
    cache: ResultCache,
    model: EnsembleModel,
    t_mem: float,
    variant: str,
) -> tuple[float, float, float]:
    metrics_cfg = run_config["metrics"]
    setup = tuned_setup(run_config, cache, t_mem, model, variant)
    prepared = prepare_protocol(setup, t_mem)
    jobs = [(0j, "full"), (1.0 + 0j, "means_only"), (2.0 + 0j, "means_only")]
    vacuum, one, two = run_memory_jobs(setup, prepared, jobs)
    metrics = channel_metrics(
        [0j, 1.0, 2.0],
        [vacuum.alpha_out, one.alpha_out, two.alpha_out],
        vacuum.var_sum,
        metrics_cfg["fock_dim"],
        metrics_cfg["hermite_points"],
    )
    return metrics.gain, metrics.var_sum, metrics.fq


def cmd_metrics(run_config: RunConfig, workspace: Workspace) -> dict:
    """Channel metrics over the input grid and over the peak-power sweep."""
    t_mem = run_config["protocol"]["t_mem_s"]
    metrics_cfg = run_config["metrics"]
    cache = result_cache(workspace)
    setup = tuned_setup(run_config, cache, t_mem)
    prepared = prepare_protocol(setup, t_mem)

    grid = run_config.alpha_grid
    jobs = [(a, "full" if a == 0 else "means_only") for a in grid]
    results = run_memory_jobs(setup, prepared, jobs)
    vacuum = next((r for r in results if r.alpha_in == 0), None)
    if vacuum is None:
        raise ChannelError("the input grid needs the vacuum input 0")
    sigma = math.sqrt(vacuum.var_sum / 2.0)
    workspace.write_rows(
        "channel_table.csv",
        ["alpha_in_re", "alpha_in_im", "alpha_out_re", "alpha_out_im", "sigma"],
        [
            (r.alpha_in.real, r.alpha_in.imag, r.alpha_out.real, r.alpha_out.imag)
            + (sigma,)
            for r in results
        ],
    )
    metrics = channel_metrics(
        grid,
        [r.alpha_out for r in results],
        vacuum.var_sum,
        metrics_cfg["fock_dim"],
        metrics_cfg["hermite_points"],
    )
    summary = {"metrics": metrics.to_dict(), "timing": prepared.timing.to_dict()}

    sweep = metrics_cfg["p_peak_sweep_w"]
    if sweep:
        rows = []
        for p_peak in sweep:
            model = setup.model.with_params(run_config.physical_params(p_peak))
            point = _sweep_point(run_config, cache, model, t_mem, "configured")
            gain, var_sum, fq = point
            rows.append(("inhomogeneous", p_peak, gain, var_sum, fq))
            logger.info(
                f"P_peak={p_peak * 1e6:.1f} uW: G={gain:.4f}, 2sigma^2={var_sum:.4f},"
                f" F_q={fq:.4f}",
                title="Power sweep",
            )
        homogeneous = _homogeneous_model(run_config)
        rows.append(
            ("homogeneous", homogeneous.params.p_peak)
            + _sweep_point(run_config, cache, homogeneous, t_mem, "homogeneous")
        )
        workspace.write_rows(
            "p_peak_sweep.csv", SWEEP_COLUMNS, rows
        )
        summary["p_peak_sweep"] = [dict(zip(SWEEP_COLUMNS, row)) for row in rows]
    workspace.write_summary("metrics.json", summary)
    return summary


def _homogeneous_model(run_config: RunConfig) -> EnsembleModel:
    params = run_config.physical_params()
    disc = run_config["discretization"]
    return build_model(
        params,
        HOMOGENEOUS,
        run_config.frequency_line(),
        disc["n_freq_bins"],
        TWO_PI * disc["freq_half_span_hz"],
        disc["max_tail_mass"],
    )


def cmd_oracle(run_config: RunConfig, workspace: Workspace) -> dict:
    """Moment equations against the master equation, plus free-decay checks."""
    oracle = run_config["oracle"]
    params = run_config.physical_params()
    system = SmallSystem.collective(
        oracle["n_spins"],
        TWO_PI * oracle["g_sqrt_n_hz"],
        oracle["n_max"],
        params.gamma_perp,
        TWO_PI * oracle["delta_spread_hz"],
        params.gamma_par,
    )
    schedule = ControlSchedule.constant(
        oracle["t_end_s"], 0.0, params.kappa_min, oracle["dt_s"], label="swap"
    )
    comparison, reference, _ = compare_with_moments(
        system,
        schedule,
        params,
        run_config.oracle_alpha,
        dt=oracle["dt_s"],
        sample_stride=run_config["integrator"]["sample_stride_s"],
    )
    workspace.write_table(
        "oracle_trajectory.csv",
        {
            "t_s": reference.times,
            "Xc": reference.means[:, 0],
            "Pc": reference.means[:, 1],
            "var_sum": 0.5 * (reference.cov[:, 0, 0] + reference.cov[:, 1, 1]),
        },
    )
    idle = SmallSystem.collective(
        oracle["n_spins"],
        0.0,
        1,
        params.gamma_perp,
        TWO_PI * oracle["delta_spread_hz"],
        params.gamma_par,
    )
    report = {
        "comparison": comparison.to_dict(),
        "spin_decay_error": spin_fid_check(idle, oracle["t_end_s"], oracle["dt_s"]),
        "fid_envelope_error": _fid_check(run_config),
    }
    workspace.write_summary("oracle_report.json", report)
    return report


def _fid_check(run_config: RunConfig) -> float | None:
    """Free induction decay of the binned line against its closed form."""
    params = run_config.physical_params()
    line = run_config.frequency_line()
    if line.w == 0:
        return None
    model = build_model(
        params,
        HOMOGENEOUS,
        line,
        FID_BINS,
        TWO_PI * FID_HALF_SPAN_HZ,
        FID_TAIL_MASS,
    ).decoupled()
    t_end = 5.0 * 2.0 / line.w
    dt = run_config["integrator"]["dt_coarse_s"]
    trajectory = integrate(
        fid_initial_state(model),
        ControlSchedule.constant(t_end, 0.0, params.kappa_max, dt, label="fid"),
        model,
        mode="means_only",
        sample_stride=run_config["integrator"]["sample_stride_s"],
    )
    comparison = fid_analytic_compare(trajectory, model, line, t_end)
    logger.info(f"max envelope error {comparison.max_error:.2e}", title="FID check")
    return comparison.max_error
