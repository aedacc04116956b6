"""
The run configuration: a YAML or JSON file describing one memory experiment.

Every ``*_hz`` value is in cycles per second and every ``*_s`` value in seconds;
conversion to angular units happens once, in :meth:`RunConfig.physical_params`.
"""
from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Any

import orjson
import yaml
from jsonschema import Draft7Validator

from spinmem.config.config import Config
from spinmem.distributions import (
    CouplingBin,
    FrequencyLine,
    WaveguideGeometry,
    build_model,
    coupling_histogram_from_geometry,
    read_coupling_csv,
)
from spinmem.dynamics.drive import SechPulse
from spinmem.errors import ConfigError
from spinmem.logs import logger
from spinmem.model import TWO_PI, EnsembleModel, PhysicalParams, kappa_from_q
from spinmem.protocol.memory import ExperimentSetup
from spinmem.protocol.schedule import StepTiers
from spinmem.protocol.timing import TimingConstants

SCHEMA_FILE = Path(__file__).with_name("run_config_schema.json")

# sections whose value replaces the default instead of being merged into it
REPLACED_KEYS = frozenset({"coupling"})

DEFAULTS: dict[str, Any] = {
    "physics": {
        "gens_hz": 3.5e6,
        "w_hz": 2e6,
        "delta_hfs_hz": 2.2e6,
        "t2_s": 100e-6,
        "gamma_par_hz": 0.0,
        "omega_c_hz": 2.9e9,
        "q_max": 1e4,
        "q_min": 100.0,
        "delta_target_hz": 100e6,
        "delta_parked_hz": 50e6,
        "chirp_rate_hz_per_s": 1e16,
        "p_peak_w": 1e-4,
        "g_bar_hz": 12.5,
        "n_total": None,
    },
    "discretization": {
        "n_freq_bins": 33,
        "freq_half_span_hz": 12e6,
        "max_tail_mass": 0.1,
        "coupling": {"waveguide": {}},
    },
    "pulse": {"mu": 3.5, "mu_beta_hz": 7.5e6, "duration_s": 1e-6},
    "integrator": {
        "dt_fine_s": 5e-11,
        "dt_coarse_s": 2e-10,
        "dt_parked_s": 1e-9,
        "mode": "full",
        "covariance_coupling": False,
        "sample_stride_s": 1e-9,
    },
    "protocol": {
        "t_mem_s": 10e-6,
        "t_pi_s": 1e-6,
        "t_res_s": 1e-6,
        "t_kappa_s": 10e-9,
        "t_delta_p_s": 5e-9,
        "t_swap_s": None,
        "t_cav_eff_s": None,
        "field_limit": 10.0,
        "alpha_in": [1.0, 0.0],
    },
    "multimode": {
        "alphas": [[3.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
        "spacing_s": 0.29e-6,
        "t_mem_s": 12e-6,
        "q_between": 1e3,
        "initial_wait_s": None,
    },
    "metrics": {
        "alpha_grid": [
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [3.0, 0.0],
            [0.0, 1.0],
            [0.0, 2.0],
            [-1.0, 0.0],
            [-2.0, -2.0],
        ],
        "p_peak_sweep_w": [2e-5, 5e-5, 1e-4, 2e-4, 5e-4],
        "fock_dim": 20,
        "hermite_points": 16,
    },
    "oracle": {
        "n_spins": 2,
        "n_max": 5,
        "g_sqrt_n_hz": 1e6,
        "delta_spread_hz": 0.0,
        "alpha": [0.1, 0.0],
        "t_end_s": 3e-6,
        "dt_s": 1e-10,
    },
    "seed": 0,
}

GEOMETRY_KEYS = {
    "s_center_m": "s_center",
    "w_gap_m": "w_gap",
    "b_m": "b",
    "epsilon_r": "epsilon_r",
    "z0_ohms": "z0_ohms",
    "length_m": "length_l",
    "y_min_m": "y_min",
    "y_max_m": "y_max",
    "crystal_half_width_m": "crystal_half_width",
}


def _load_schema() -> dict:
    return orjson.loads(SCHEMA_FILE.read_bytes())


def validate_run_config(data: Any) -> None:
    """Check ``data`` against the run configuration schema.

    Raises:
        ConfigError: listing every violation, path first.
    """
    validator = Draft7Validator(_load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.path))
    if not errors:
        logger.debug("The run configuration is valid.")
        return
    messages = [
        f"{'/'.join(str(p) for p in error.path) or '<root>'}: {error.message}"
        for error in errors
    ]
    if Config().debug_mode:
        for message in messages:
            logger.error("Config", message)
    raise ConfigError("invalid run configuration", errors=messages)


def deep_merge(base: dict, override: dict) -> dict:
    """Recursively merge ``override`` into a copy of ``base``."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if (
            key not in REPLACED_KEYS
            and isinstance(value, dict)
            and isinstance(merged.get(key), dict)
        ):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _pair(value) -> complex:
    return complex(float(value[0]), float(value[1]))


class RunConfig:
    """A validated run configuration with every default filled in."""

    def __init__(self, data: dict | None = None, base_dir: str | Path | None = None):
        data = {} if data is None else data
        validate_run_config(data)
        self._data = deep_merge(DEFAULTS, data)
        validate_run_config(self._data)
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        coupling = self._data["discretization"]["coupling"]
        if "histogram_csv" in coupling:
            # absolute, so the resolved configuration loads from anywhere
            path = Path(coupling["histogram_csv"])
            if not path.is_absolute():
                coupling["histogram_csv"] = str((self.base_dir / path).resolve())
        self._check_consistency()

    @classmethod
    def load(cls, config_file: str | Path | None = None, seed: int | None = None):
        """Read a YAML or JSON file; no file means the reference defaults."""
        data: dict = {}
        base_dir = None
        if config_file is not None:
            path = Path(config_file)
            try:
                with open(path, encoding="utf-8") as file:
                    data = yaml.safe_load(file) or {}
            except FileNotFoundError:
                raise ConfigError("configuration file not found", path=str(path))
            except yaml.YAMLError as e:
                raise ConfigError("configuration file is not valid YAML", error=str(e))
            if not isinstance(data, dict):
                raise ConfigError("configuration must be a mapping", path=str(path))
            base_dir = path.resolve().parent
            logger.debug(f"loaded run configuration from {path}")
        if seed is not None:
            data = {**data, "seed": seed}
        return cls(data, base_dir=base_dir)

    def _check_consistency(self) -> None:
        phys = self["physics"]
        if phys["q_min"] >= phys["q_max"]:
            raise ConfigError(
                "q_min must be below q_max", q_min=phys["q_min"], q_max=phys["q_max"]
            )
        if self["discretization"]["n_freq_bins"] % 2 == 0:
            raise ConfigError(
                "n_freq_bins must be odd",
                n_freq_bins=self["discretization"]["n_freq_bins"],
            )
        if not math.isclose(self["pulse"]["duration_s"], self["protocol"]["t_pi_s"]):
            raise ConfigError(
                "pulse duration must equal the pi-pulse slot t_pi_s",
                duration_s=self["pulse"]["duration_s"],
                t_pi_s=self["protocol"]["t_pi_s"],
            )

    def __getitem__(self, section: str) -> Any:
        return self._data[section]

    @property
    def seed(self) -> int:
        return int(self._data["seed"])

    @property
    def resolved(self) -> dict:
        """The full configuration, defaults included."""
        return copy.deepcopy(self._data)

    def physical_params(self, p_peak_w: float | None = None) -> PhysicalParams:
        """Angular-unit parameters, optionally with another peak drive power."""
        phys = self["physics"]
        gens = TWO_PI * phys["gens_hz"]
        n_total = phys["n_total"]
        if n_total is None:
            n_total = (phys["gens_hz"] / phys["g_bar_hz"]) ** 2
        omega_c = TWO_PI * phys["omega_c_hz"]
        return PhysicalParams(
            gens=gens,
            w=TWO_PI * phys["w_hz"],
            delta_hfs=TWO_PI * phys["delta_hfs_hz"],
            gamma_perp=1.0 / phys["t2_s"],
            gamma_par=phys["gamma_par_hz"],
            kappa_min=kappa_from_q(omega_c, phys["q_max"]),
            kappa_max=kappa_from_q(omega_c, phys["q_min"]),
            omega_c=omega_c,
            delta_cs_target=TWO_PI * phys["delta_target_hz"],
            delta_cs_parked=TWO_PI * phys["delta_parked_hz"],
            chirp_rate=TWO_PI * phys["chirp_rate_hz_per_s"],
            p_peak=phys["p_peak_w"] if p_peak_w is None else p_peak_w,
            n_total=float(n_total),
        )

    def frequency_line(self) -> FrequencyLine:
        params = self.physical_params()
        return FrequencyLine(params.w, params.delta_hfs, params.gamma_perp)

    @property
    def homogeneous(self) -> bool:
        return "homogeneous" in self["discretization"]["coupling"]

    def geometry(self) -> tuple[WaveguideGeometry, dict]:
        """Waveguide cross-section plus the histogram settings."""
        spec = dict(self["discretization"]["coupling"].get("waveguide", {}))
        binning = {
            "n_g_bins": spec.pop("n_g_bins", 7),
            "n_grid": spec.pop("n_grid", 400),
            "monte_carlo_samples": spec.pop("monte_carlo_samples", 0),
        }
        geom = WaveguideGeometry(**{GEOMETRY_KEYS[k]: v for k, v in spec.items()})
        return geom, binning

    def coupling_bins(self) -> list[CouplingBin] | None:
        """Coupling histogram, or ``None`` for homogeneous coupling."""
        coupling = self["discretization"]["coupling"]
        if self.homogeneous:
            return None
        if "histogram_csv" in coupling:
            return read_coupling_csv(coupling["histogram_csv"])
        geom, binning = self.geometry()
        return coupling_histogram_from_geometry(
            geom, self.physical_params().omega_c, seed=self.seed, **binning
        )

    def build_model(
        self,
        params: PhysicalParams | None = None,
        coupling_bins: list[CouplingBin] | None = None,
    ) -> EnsembleModel:
        disc = self["discretization"]
        params = self.physical_params() if params is None else params
        if coupling_bins is None and not self.homogeneous:
            coupling_bins = self.coupling_bins()
        return build_model(
            params,
            coupling_bins,
            FrequencyLine(params.w, params.delta_hfs, params.gamma_perp),
            disc["n_freq_bins"],
            TWO_PI * disc["freq_half_span_hz"],
            disc["max_tail_mass"],
        )

    def timing_constants(self) -> TimingConstants:
        params = self.physical_params()
        proto = self["protocol"]
        constants = TimingConstants.from_rates(
            params.delta_cs_target,
            params.delta_cs_parked,
            params.chirp_rate,
            t_kappa=proto["t_kappa_s"],
            t_pi=proto["t_pi_s"],
            t_res=proto["t_res_s"],
        )
        return TimingConstants(
            t_delta_p=proto["t_delta_p_s"],
            t_delta_t=constants.t_delta_t,
            t_kappa=constants.t_kappa,
            t_pi=constants.t_pi,
            t_res=constants.t_res,
        )

    def step_tiers(self) -> StepTiers:
        integ = self["integrator"]
        return StepTiers(integ["dt_fine_s"], integ["dt_coarse_s"], integ["dt_parked_s"])

    def pulse_shape(self) -> SechPulse:
        pulse = self["pulse"]
        return SechPulse.from_chirp(
            pulse["mu"], TWO_PI * pulse["mu_beta_hz"], pulse["duration_s"]
        )

    def experiment_setup(self, model: EnsembleModel | None = None) -> ExperimentSetup:
        integ = self["integrator"]
        proto = self["protocol"]
        return ExperimentSetup(
            model=self.build_model() if model is None else model,
            constants=self.timing_constants(),
            pulse_shape=self.pulse_shape(),
            steps=self.step_tiers(),
            mode=integ["mode"],
            covariance_coupling=integ["covariance_coupling"],
            sample_stride=integ["sample_stride_s"],
            field_limit=proto["field_limit"],
            t_swap=proto["t_swap_s"],
            t_cav_eff=proto["t_cav_eff_s"],
        )

    @property
    def multimode_alphas(self) -> list[complex]:
        return [_pair(a) for a in self["multimode"]["alphas"]]

    @property
    def alpha_grid(self) -> list[complex]:
        return [_pair(a) for a in self["metrics"]["alpha_grid"]]

    @property
    def alpha_in(self) -> complex:
        return _pair(self["protocol"]["alpha_in"])

    @property
    def oracle_alpha(self) -> complex:
        return _pair(self["oracle"]["alpha"])

    def cache_subset(self, tag: str) -> dict:
        """The configuration sections a cached tuning result depends on."""
        disc = copy.deepcopy(self["discretization"])
        coupling = disc["coupling"]
        if "histogram_csv" in coupling:
            # the file may change under the same path
            coupling["histogram_csv"] = [[b.g, b.mass] for b in self.coupling_bins()]
        subset = {
            "physics": self["physics"],
            "discretization": disc,
            "integrator": self["integrator"],
        }
        if coupling.get("waveguide", {}).get("monte_carlo_samples", 0) > 0:
            subset["seed"] = self.seed
        if tag != "t_swap":
            subset["pulse"] = self["pulse"]
            subset["protocol"] = self["protocol"]
        return subset
