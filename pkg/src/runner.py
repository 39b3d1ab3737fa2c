"""
Simulation Runner Module
Parses run configurations and drives propagation and analysis jobs, writing
plot-ready tables and a run manifest
"""

import concurrent.futures
import logging
import math
import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

import config
from src.dicke import (
    classical_minimum,
    critical_coupling,
    dicke_curvature_at_origin,
    dicke_potential_curves,
    dicke_spectrum,
    hp_parameters,
    hp_quadratic,
    normal_modes,
    soft_mode_coupling,
)
from src.errors import (
    BoundaryLeakError,
    ConfigError,
    NumericalAbort,
    OracleError,
    StateError,
    WavePacketError,
)
from src.grid import Grid, make_grid
from src.hamiltonians import (
    DIABATIC_ROTATION,
    ModelSpec,
    adiabatic_transform,
    build_split,
    lambda_reduce,
    potential_curves,
    reduce_lambda_state,
    spectator_split,
)
from src.observables import (
    DEFAULT_OBSERVERS,
    OBSERVERS,
    ObservableSeries,
    adiabatic_populations,
    default_revival_tolerance,
    detect_revivals,
)
from src.oracles import (
    crossing_velocity,
    jc_eigensystem,
    jc_ground_energy,
    jc_inversion_exact,
    jc_revival_time,
    landau_zener_probability,
    rabi_frequency,
    released_crossing_velocity,
    time_scales,
)
from src.propagator import PropagationConfig, WavePacketPropagator, propagate
from src.states import (
    MultiChannelWavefunction,
    change_basis,
    coherent_coefficients,
    coherent_state,
    compose_initial,
    field_mean_photon_number,
    fock_coefficients,
    fock_state,
    fock_states,
)
from src.utils import format_probability, format_time, max_drift, save_to_excel, write_csv, write_json

logger = logging.getLogger(__name__)

VERSION = "1.0.0"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialState:
    """Field descriptor plus the bare-basis atomic vector"""

    field: str = "fock"
    n: int = 0
    nu: complex = 0j
    coefficients: Tuple[complex, ...] = ()
    atomic: Tuple[complex, ...] = ()


@dataclass(frozen=True)
class GridSettings:
    n_points: int = config.DEFAULT_N_POINTS
    x_max: float = config.DEFAULT_X_MAX


@dataclass(frozen=True)
class OutputSettings:
    observables: Tuple[str, ...] = DEFAULT_OBSERVERS
    density_stride: int = 0
    fock_n_max: int = 10


@dataclass(frozen=True)
class RevivalSettings:
    """Tolerances default to REVIVAL_TOLERANCE_FACTOR times the initial packet width"""

    x_tol: Optional[float] = None
    p_tol: Optional[float] = None
    envelope_window: int = config.DEFAULT_ENVELOPE_WINDOW


@dataclass(frozen=True)
class LZSettings:
    n_bar: Tuple[float, ...] = ()
    x_initial: Tuple[float, ...] = ()
    omegas: Tuple[float, ...] = ()
    window: float = math.pi


@dataclass(frozen=True)
class DickeSettings:
    g0_max: Optional[float] = None
    points: int = config.DICKE_SCAN_POINTS
    random_draws: int = config.DICKE_RANDOM_DRAWS
    seed: int = config.DICKE_SEED
    convention: str = "consistent"


@dataclass(frozen=True)
class CompareSettings:
    early_time: Optional[float] = None
    oracle: bool = True


@dataclass(frozen=True)
class CurveSettings:
    x_range: float = 6.0
    points: int = 601


@dataclass(frozen=True)
class RunConfig:
    """
    A parsed run configuration

    models holds one ModelSpec per entry of model.kind; propagation is None
    when the file sets no propagation.t_final.
    """

    name: str
    models: Tuple[ModelSpec, ...]
    basis: str = "bare"
    initial: InitialState = InitialState()
    grid: GridSettings = GridSettings()
    propagation: Optional[PropagationConfig] = None
    outputs: OutputSettings = OutputSettings()
    revival: RevivalSettings = RevivalSettings()
    lz: LZSettings = LZSettings()
    dicke: DickeSettings = DickeSettings()
    compare: CompareSettings = CompareSettings()
    curves: CurveSettings = CurveSettings()

    @property
    def model(self) -> ModelSpec:
        return self.models[0]

    def require_propagation(self) -> PropagationConfig:
        if self.propagation is None:
            raise ConfigError(f"Config '{self.name}' sets no propagation.t_final")
        return self.propagation

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered not in ("true", "false"):
        raise ValueError(f"expected true/false, got '{text}'")
    return lowered == "true"


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _parse_list(item_parser: Callable) -> Callable:
    def parse(text: str) -> tuple:
        return tuple(item_parser(part.strip()) for part in text.split(",") if part.strip())
    return parse


# key -> parser; the section prefix selects the dataclass the value lands in
CONFIG_KEYS: Dict[str, Callable] = {
    "model.kind": _parse_list(str),
    "model.omega": float,
    "model.g0": float,
    "model.lambda1": float,
    "model.lambda2": float,
    "model.n_atoms": int,
    "model.basis": str,
    "initial.field": str,
    "initial.n": int,
    "initial.nu": _parse_complex,
    "initial.coefficients": _parse_list(_parse_complex),
    "initial.atomic": _parse_list(_parse_complex),
    "grid.n_points": int,
    "grid.x_max": float,
    "propagation.dt": float,
    "propagation.t_final": float,
    "propagation.snapshot_stride": int,
    "propagation.boundary_tolerance": float,
    "outputs.observables": _parse_list(str),
    "outputs.density_stride": int,
    "outputs.fock_n_max": int,
    "revival.x_tol": float,
    "revival.p_tol": float,
    "revival.envelope_window": int,
    "lz.n_bar": _parse_list(float),
    "lz.x_initial": _parse_list(float),
    "lz.omegas": _parse_list(float),
    "lz.window": float,
    "dicke.g0_max": float,
    "dicke.points": int,
    "dicke.random_draws": int,
    "dicke.seed": int,
    "dicke.convention": str,
    "compare.early_time": float,
    "compare.oracle": _parse_bool,
    "curves.x_range": float,
    "curves.points": int,
}

FIELD_KINDS = ("fock", "coherent", "custom")


def parse_config_text(text: str, name: str = "run") -> RunConfig:
    """
    Parse the flat key = value run format

    Args:
        text: Config file contents
        name: Run name (used for the output folder)

    Returns:
        Validated RunConfig
    """
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{number}: expected 'key = value', got '{raw.strip()}'")

        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{name}:{number}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{name}:{number}: duplicate key '{key}'")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError as e:
            raise ConfigError(f"{name}:{number}: bad value for '{key}': {e}")

    return _build_config(values, name)


def _section(values: Dict[str, Any], prefix: str) -> Dict[str, Any]:
    return {
        key.split(".", 1)[1]: value
        for key, value in values.items()
        if key.startswith(prefix + ".")
    }


def _build_config(values: Dict[str, Any], name: str) -> RunConfig:
    model_values = _section(values, "model")
    kinds = model_values.pop("kind", None)
    if not kinds:
        raise ConfigError(f"Config '{name}' must set model.kind")
    basis = model_values.pop("basis", "bare")

    try:
        models = tuple(ModelSpec(kind=kind, **model_values) for kind in kinds)
        propagation = None
        propagation_values = _section(values, "propagation")
        if "t_final" in propagation_values:
            propagation = PropagationConfig(
                density_stride=values.get("outputs.density_stride", 0), **propagation_values
            )
        elif propagation_values:
            raise ConfigError(f"Config '{name}' sets propagation keys without propagation.t_final")

        output_values = _section(values, "outputs")
        observables = output_values.get("observables", DEFAULT_OBSERVERS)
        unknown = [item for item in observables if item not in OBSERVERS]
        if unknown:
            raise ConfigError(f"Unknown observables {unknown}, available: {sorted(OBSERVERS)}")

        run_config = RunConfig(
            name=name,
            models=models,
            basis=basis,
            initial=InitialState(**_section(values, "initial")),
            grid=GridSettings(**_section(values, "grid")),
            propagation=propagation,
            outputs=OutputSettings(**output_values),
            revival=RevivalSettings(**_section(values, "revival")),
            lz=LZSettings(**_section(values, "lz")),
            dicke=DickeSettings(**_section(values, "dicke")),
            compare=CompareSettings(**_section(values, "compare")),
            curves=CurveSettings(**_section(values, "curves")),
        )
    except ConfigError:
        raise
    except (WavePacketError, TypeError, ValueError) as e:
        raise ConfigError(f"Config '{name}' is invalid: {e}")

    _validate_config(run_config)
    return run_config


def _validate_config(run_config: RunConfig):
    initial = run_config.initial
    if initial.field not in FIELD_KINDS:
        raise ConfigError(f"initial.field must be one of {FIELD_KINDS}, got '{initial.field}'")
    if initial.field == "custom" and not initial.coefficients:
        raise ConfigError("initial.field = custom needs initial.coefficients")
    if run_config.basis not in ("bare", "rotated", "reduced"):
        raise ConfigError(f"model.basis must be bare, rotated or reduced, got '{run_config.basis}'")
    if run_config.grid.n_points < 2 or run_config.grid.x_max <= 0:
        raise ConfigError(f"Invalid grid settings {run_config.grid}")

    for spec in run_config.models:
        if spec.kind == "Dicke" or not initial.atomic:
            continue
        if len(initial.atomic) != spec.n_channels:
            raise ConfigError(
                f"initial.atomic has {len(initial.atomic)} components, "
                f"{spec.kind} needs {spec.n_channels}"
            )


def load_config(filepath: str) -> RunConfig:
    """
    Read and parse a run config; the file stem becomes the run name

    A path that does not exist is also looked up among the shipped configs,
    so `dicke_spectrum` resolves to configs/dicke_spectrum.cfg.
    """
    if not os.path.exists(filepath):
        stem = filepath if filepath.endswith(".cfg") else f"{filepath}.cfg"
        shipped = os.path.join(config.CONFIGS_DIR, stem)
        if os.path.exists(shipped):
            filepath = shipped
    try:
        with open(filepath, encoding="utf-8") as stream:
            text = stream.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config {filepath}: {e}")
    name = os.path.splitext(os.path.basename(filepath))[0]
    return parse_config_text(text, name=name)


# ---------------------------------------------------------------------------
# Initial states
# ---------------------------------------------------------------------------

def default_atomic(spec: ModelSpec) -> Tuple[complex, ...]:
    """Excited atom: |+> for two-level models, e for the Lambda atom"""
    return (0j, 1 + 0j, 0j) if spec.kind == "Lambda" else (1 + 0j, 0j)


def field_from_config(initial: InitialState, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """Field amplitudes on the grid together with their Fock coefficients"""
    if initial.field == "fock":
        return fock_state(initial.n, grid), fock_coefficients(initial.n)
    if initial.field == "coherent":
        return coherent_state(initial.nu, grid), coherent_coefficients(initial.nu)

    coefficients = custom_coefficients(initial)
    basis = fock_states(coefficients.size - 1, grid)
    return coefficients @ basis, coefficients


def custom_coefficients(initial: InitialState) -> np.ndarray:
    """User Fock amplitudes, checked against NORMALIZATION_TOLERANCE and rescaled to unit norm"""
    coefficients = np.asarray(initial.coefficients, dtype=complex)
    weight = float(np.sum(np.abs(coefficients) ** 2))
    if abs(weight - 1.0) > config.NORMALIZATION_TOLERANCE:
        raise StateError(f"initial.coefficients must be normalized, got weight {weight:.12g}")
    return coefficients / np.sqrt(weight)


# ---------------------------------------------------------------------------
# LZ row worker (module level so the process pool can pickle it)
# ---------------------------------------------------------------------------

def measure_landau_zener(
    spec: ModelSpec,
    grid: Grid,
    x_initial: float,
    dt: float,
    window: float = math.pi,
    stride: int = config.LZ_SNAPSHOT_STRIDE,
    boundary_tolerance: float = config.BOUNDARY_TOLERANCE,
) -> Tuple[float, float, float]:
    """
    Adiabatic following probability of a packet crossing x = 0

    A coherent packet released at rest from x_initial > 0 carries the lower
    adiabatic spinor evaluated at x_initial; for Omega = 0 that is the diabatic
    state (|-> - |+>)/sqrt 2. At the snapshot with the largest weight on x < 0
    within [0, window], the share of that weight in the lower adiabatic state
    is returned. The part that stays diabatic turns back at 2 sqrt(2) g0 - x_i,
    so the weight peaks near t = pi.

    Returns:
        (p_num, transit_time, transmitted_weight)
    """
    theta, _ = adiabatic_transform(spec, x_initial)
    lower = np.array([-math.sin(float(theta)), math.cos(float(theta))])
    psi = compose_initial(coherent_state(x_initial / math.sqrt(2.0), grid), lower, grid, n_channels=2)
    propagator = WavePacketPropagator(build_split(spec, "bare"), grid, dt)

    best = (-1.0, float("nan"), 0.0)
    n_snapshots = int(round(window / dt)) // stride
    for snapshot in range(n_snapshots + 1):
        if snapshot > 0:
            psi = propagator.step(psi, stride)
        t = snapshot * stride * dt
        reason = propagator.health_check(psi, boundary_tolerance, t)
        if reason:
            raise NumericalAbort(f"LZ run from x_i={x_initial}: {reason}")
        upper, following = adiabatic_populations(psi, spec, region="negative")
        weight = upper + following
        if weight > best[0]:
            best = (weight, following / weight if weight > 0 else float("nan"), t)

    weight, p_num, transit = best
    return p_num, transit, weight


def _lz_row(task: Dict[str, Any]) -> Dict[str, Any]:
    spec = ModelSpec(kind="Rabi", omega=task["omega"], g0=task["g0"])
    row = {
        "omega": task["omega"],
        "g0": task["g0"],
        "initial_kind": task["initial_kind"],
        "initial": task["initial"],
        "x_i": float("nan"),
        "v": float("nan"),
        "p_lz": float("nan"),
        "p_num": float("nan"),
        "relative_deviation": float("nan"),
        "transit_time": float("nan"),
        "transmitted": float("nan"),
        "status": "ok",
        "reason": "",
    }
    try:
        if task["initial_kind"] == "n_bar":
            if task["initial"] < 0:
                raise OracleError(f"n_bar must be non-negative, got {task['initial']}")
            x_i = math.sqrt(2.0 * task["initial"])
        else:
            x_i = task["initial"]
        v = released_crossing_velocity(task["g0"], x_i)
        row.update(x_i=x_i, v=v, p_lz=landau_zener_probability(spec.omega, spec.g0, v))

        grid = make_grid(task["n_points"], task["x_max"])
        p_num, transit, weight = measure_landau_zener(
            spec, grid, x_i, task["dt"], task["window"], boundary_tolerance=task["boundary_tolerance"]
        )
        row.update(p_num=p_num, transit_time=transit, transmitted=weight)
        if row["p_lz"] > 0:
            row["relative_deviation"] = abs(p_num - row["p_lz"]) / row["p_lz"]
        if weight < config.LZ_MIN_TRANSMISSION:
            row.update(
                status="partial",
                reason=f"only {weight:.4f} of the packet passed x = 0 within the window",
            )
    except OracleError as e:
        row.update(status="skipped", reason=str(e))
    except (StateError, NumericalAbort) as e:
        row.update(status="invalid", reason=str(e))
    return row


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

class SimulationRunner:
    """
    Executes one run configuration and writes its output bundle

    Every verb writes into <out_dir>/<config name>/ and finishes with
    manifest.json. An aborted propagation is recorded with status "invalid"
    and re-raised as NumericalAbort after the manifest is written.
    """

    def __init__(
        self,
        run_config: RunConfig,
        out_dir: str = config.RESULTS_DIR,
        dt_override: Optional[float] = None,
        check_convergence: bool = False,
        workers: int = 1,
        excel: bool = False,
        show_progress: bool = True,
    ):
        """
        Args:
            run_config: Parsed configuration
            out_dir: Root folder for output bundles
            dt_override: Replace propagation.dt (snapshot times are kept)
            check_convergence: Repeat every propagation at dt/2 and record deltas
            workers: Process count for lz-sweep rows
            excel: Also export all tables to one workbook
            show_progress: Display progress bars
        """
        if dt_override is not None and run_config.propagation is not None:
            if not dt_override > 0:
                raise ConfigError(f"--dt-override must be positive, got {dt_override}")
            run_config = replace(run_config, propagation=run_config.propagation.with_dt(dt_override))

        self.config = run_config
        self.bundle_dir = os.path.join(out_dir, run_config.name)
        self.check_convergence = check_convergence
        self.workers = max(1, int(workers))
        self.excel = excel
        self.show_progress = show_progress

        self.tables: Dict[str, pd.DataFrame] = {}
        self.files: List[str] = []
        self.manifest: Dict[str, Any] = {}

    # -- output -------------------------------------------------------------

    def _write_table(self, frame: pd.DataFrame, filename: str):
        write_csv(frame, os.path.join(self.bundle_dir, filename))
        self.tables[os.path.splitext(filename)[0]] = frame
        self.files.append(filename)

    def _write_density(self, series: ObservableSeries, label: str):
        if series.density is None:
            return
        stride = config.DENSITY_STRIDE
        x = series.x[::stride]
        frame = pd.DataFrame(series.density[:, ::stride], columns=[f"{value:.17g}" for value in x])
        frame.insert(0, "t", series.density_times)
        self._write_table(frame, f"density_{label}.csv")

    def _finish(self, verb: str, status: str = "ok", **sections) -> Dict[str, Any]:
        self.manifest = {
            "status": status,
            "verb": verb,
            "version": VERSION,
            "config": self.config.to_dict(),
            "files": sorted(self.files),
        }
        self.manifest.update(sections)
        write_json(self.manifest, os.path.join(self.bundle_dir, "manifest.json"))

        if self.excel and self.tables:
            save_to_excel(self.tables, f"{self.config.name}.xlsx", output_dir=self.bundle_dir)

        if status == "invalid":
            reasons = sections.get("abort_reasons", [])
            if any("Boundary" in reason for reason in reasons):
                raise BoundaryLeakError("; ".join(reasons))
            raise NumericalAbort("; ".join(reasons) or f"{verb} run is invalid")
        return self.manifest

    # -- propagation helpers --------------------------------------------------

    def _labels(self) -> List[str]:
        kinds = [spec.kind for spec in self.config.models]
        if len(set(kinds)) == len(kinds):
            return kinds
        return [f"{kind}_{index + 1}" for index, kind in enumerate(kinds)]

    def _initial_state(self, spec: ModelSpec, grid: Grid) -> Tuple[MultiChannelWavefunction, np.ndarray]:
        field, coefficients = field_from_config(self.config.initial, grid)
        atomic = self.config.initial.atomic or default_atomic(spec)
        psi = compose_initial(field, atomic, grid, n_channels=spec.n_channels)
        if self.config.basis == "rotated":
            psi = change_basis(psi, DIABATIC_ROTATION, "rotated")
        return psi, coefficients

    def _propagate_model(
        self,
        spec: ModelSpec,
        label: str,
        prop_config: PropagationConfig,
    ) -> List[Tuple[str, ObservableSeries, MultiChannelWavefunction]]:
        if spec.kind == "Dicke":
            raise ConfigError("The Dicke model has no propagation verb; use dicke-spectrum")

        grid = make_grid(self.config.grid.n_points, self.config.grid.x_max)
        psi0, _ = self._initial_state(spec, grid)
        observers = self.config.outputs.observables

        if self.config.basis != "reduced":
            split = build_split(spec, self.config.basis)
            propagator = WavePacketPropagator(split, grid, prop_config.dt)
            series = propagator.run(
                psi0, prop_config, observers, show_progress=self.show_progress,
                label=label, fock_n_max=self.config.outputs.fock_n_max,
            )
            return [(label, series, psi0)]

        if spec.kind != "Lambda":
            raise ConfigError("model.basis = reduced applies to the Lambda model only")
        active, dark = reduce_lambda_state(psi0, lambda_reduce(spec))
        runs = []
        for suffix, split, part in (
            ("active", build_split(spec, "reduced"), active),
            ("dark", spectator_split(), dark),
        ):
            sub_label = f"{label}-{suffix}"
            series = propagate(part, split, prop_config, observers, self.show_progress, sub_label)
            runs.append((sub_label, series, part))
        return runs

    @staticmethod
    def _summary(series: ObservableSeries) -> Dict[str, Any]:
        frame = series.frame
        summary = {
            "valid": series.valid,
            "abort_reason": series.abort_reason,
            "snapshots": len(frame),
        }
        for column, key in (("norm", "norm_drift"), ("energy", "energy_drift"), ("n_exc", "excitation_drift")):
            if column in frame:
                summary[key] = max_drift(frame[column])
        return summary

    def _convergence(
        self,
        spec: ModelSpec,
        label: str,
        prop_config: PropagationConfig,
        runs: List[Tuple[str, ObservableSeries, MultiChannelWavefunction]],
    ) -> Dict[str, Any]:
        halved = prop_config.with_dt(0.5 * prop_config.dt)
        logger.info(f"Convergence check for {label}: dt={prop_config.dt} vs {halved.dt}")
        report = {}
        for (sub_label, coarse, _), (_, fine, _) in zip(runs, self._propagate_model(spec, label, halved)):
            rows = min(len(coarse), len(fine))
            entry = {"dt": prop_config.dt, "dt_half": halved.dt}
            passed = coarse.valid and fine.valid
            for column, threshold in (
                ("inversion", config.CONVERGENCE_INVERSION_THRESHOLD),
                ("norm", config.CONVERGENCE_NORM_THRESHOLD),
            ):
                if column not in coarse.frame:
                    continue
                delta = float(np.max(np.abs(
                    coarse.frame[column].to_numpy()[:rows] - fine.frame[column].to_numpy()[:rows]
                )))
                entry[f"{column}_delta"] = delta
                passed = passed and delta <= threshold
            entry["passed"] = passed
            if not passed:
                logger.warning(f"Convergence check failed for {sub_label}: {entry}")
            report[sub_label] = entry
        return report

    def _run_models(self, specs: List[Tuple[ModelSpec, str]], prop_config: PropagationConfig):
        results, summaries, convergence, reasons = {}, {}, {}, []
        for spec, label in specs:
            runs = self._propagate_model(spec, label, prop_config)
            for sub_label, series, psi0 in runs:
                results[sub_label] = (series, psi0)
                summaries[sub_label] = self._summary(series)
                self._write_table(series.frame, f"series_{sub_label}.csv")
                self._write_density(series, sub_label)
                if not series.valid:
                    reasons.append(f"{sub_label}: {series.abort_reason}")
            if self.check_convergence:
                convergence.update(self._convergence(spec, label, prop_config, runs))
        return results, summaries, convergence, reasons

    # -- verbs --------------------------------------------------------------

    def run_propagate(self) -> Dict[str, Any]:
        """Propagate every configured model and write its series"""
        prop_config = self.config.require_propagation()
        specs = list(zip(self.config.models, self._labels()))
        _, summaries, convergence, reasons = self._run_models(specs, prop_config)
        return self._finish(
            "propagate",
            status="invalid" if reasons else "ok",
            models=summaries,
            convergence=convergence,
            abort_reasons=reasons,
        )

    def run_compare(self) -> Dict[str, Any]:
        """
        Propagate two two-level models from the same state and compare inversions

        A JC model in the pair is also checked against the exact Fock-basis
        solution when compare.oracle is set.
        """
        prop_config = self.config.require_propagation()
        specs = list(zip(self.config.models, self._labels()))
        if len(specs) != 2 or any(spec.kind not in ("Rabi", "JC") for spec, _ in specs):
            raise ConfigError("compare needs exactly two Rabi/JC models in model.kind")
        if "inversion" not in self.config.outputs.observables:
            raise ConfigError("compare needs the inversion observable")

        results, summaries, convergence, reasons = self._run_models(specs, prop_config)
        (label_a, _), (label_b, _) = specs[0], specs[1]
        series_a, series_b = results[label_a][0], results[label_b][0]
        rows = min(len(series_a), len(series_b))

        report = pd.DataFrame({
            "t": series_a.times[:rows],
            f"inversion_{label_a}": series_a["inversion"].to_numpy()[:rows],
            f"inversion_{label_b}": series_b["inversion"].to_numpy()[:rows],
        })
        report["difference"] = report[f"inversion_{label_a}"] - report[f"inversion_{label_b}"]

        early_time = self.config.compare.early_time or 0.1 * prop_config.t_final
        early = report["t"] <= early_time
        comparison = {
            "models": [label_a, label_b],
            "max_abs_difference": float(report["difference"].abs().max()),
            "rms_difference": float(np.sqrt(np.mean(report["difference"] ** 2))),
            "early_time": early_time,
            "early_max_abs_difference": float(report.loc[early, "difference"].abs().max()),
        }

        if self.config.compare.oracle:
            for spec, label in specs:
                if spec.kind != "JC":
                    continue
                exact = self._jc_exact(spec, report["t"].to_numpy())
                report[f"exact_{label}"] = exact
                deviation = np.abs(report[f"inversion_{label}"] - exact)
                comparison[f"oracle_max_deviation_{label}"] = float(deviation.max())

        self._write_table(report, "compare_report.csv")
        return self._finish(
            "compare",
            status="invalid" if reasons else "ok",
            models=summaries,
            comparison=comparison,
            convergence=convergence,
            abort_reasons=reasons,
        )

    def _field_coefficients(self) -> np.ndarray:
        initial = self.config.initial
        if initial.field == "fock":
            return fock_coefficients(initial.n)
        if initial.field == "coherent":
            return coherent_coefficients(initial.nu)
        return custom_coefficients(initial)

    def _jc_exact(self, spec: ModelSpec, times: np.ndarray) -> np.ndarray:
        atomic = self.config.initial.atomic or default_atomic(spec)
        return jc_inversion_exact(self._field_coefficients(), atomic, spec.omega, spec.g0, times)

    def run_lz_sweep(self) -> Dict[str, Any]:
        """Landau-Zener formula against the measured adiabatic following, one row per initial state"""
        spec = self.config.model
        if spec.kind != "Rabi":
            raise ConfigError("lz-sweep needs model.kind = Rabi")
        lz = self.config.lz
        if not lz.n_bar and not lz.x_initial:
            raise ConfigError("lz-sweep needs lz.n_bar or lz.x_initial")

        prop = self.config.propagation
        dt = prop.dt if prop else config.DEFAULT_DT
        tolerance = prop.boundary_tolerance if prop else config.BOUNDARY_TOLERANCE
        tasks = [
            {
                "omega": omega,
                "g0": spec.g0,
                "initial_kind": kind,
                "initial": value,
                "n_points": self.config.grid.n_points,
                "x_max": self.config.grid.x_max,
                "dt": dt,
                "window": lz.window,
                "boundary_tolerance": tolerance,
            }
            for omega in (lz.omegas or (spec.omega,))
            for kind, values in (("n_bar", lz.n_bar), ("x_initial", lz.x_initial))
            for value in values
        ]

        if self.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=self.workers) as executor:
                rows = list(tqdm(
                    executor.map(_lz_row, tasks), total=len(tasks),
                    desc="LZ sweep", disable=not self.show_progress,
                ))
        else:
            rows = [_lz_row(task) for task in tqdm(tasks, desc="LZ sweep", disable=not self.show_progress)]

        table = pd.DataFrame(rows)
        for row in rows:
            if row["status"] in ("skipped", "partial"):
                logger.warning(f"LZ row {row['initial_kind']}={row['initial']} {row['status']}: {row['reason']}")
            elif row["status"] == "ok":
                logger.info(
                    f"LZ omega={row['omega']} {row['initial_kind']}={row['initial']}: "
                    f"measured {format_probability(row['p_num'])}, formula {format_probability(row['p_lz'])}"
                )
        self._write_table(table, "lz_sweep.csv")

        reasons = [row["reason"] for row in rows if row["status"] == "invalid"]
        return self._finish(
            "lz-sweep",
            status="invalid" if reasons else "ok",
            rows=len(rows),
            skipped=int((table["status"] == "skipped").sum()),
            partial=int((table["status"] == "partial").sum()),
            abort_reasons=reasons,
        )

    def run_revival_scan(self) -> Dict[str, Any]:
        """Detect channel-packet revivals and compare them with the predicted times"""
        prop_config = self.config.require_propagation()
        if self.config.basis == "reduced":
            raise ConfigError("revival-scan compares two packets of one model; the reduced basis splits the run")
        specs = list(zip(self.config.models, self._labels()))
        results, summaries, convergence, reasons = self._run_models(specs, prop_config)

        report_rows = []
        for spec, label in specs:
            series, psi0 = results[label]
            if "dx" not in series.frame:
                raise ConfigError("revival-scan needs the centroids observable")

            tolerance = default_revival_tolerance(psi0)
            x_tol = self.config.revival.x_tol or tolerance
            p_tol = self.config.revival.p_tol or tolerance
            window = min(self.config.revival.envelope_window, len(series))
            events = detect_revivals(series, x_tol, p_tol, window)
            self._write_table(events, f"revivals_{label}.csv")

            prediction = self._revival_prediction(spec)
            nontrivial = events[events["t_start"] > 0]
            if nontrivial.empty:
                logger.warning(f"No revival found for {label} up to t={series.times[-1]:.6g}")
                first = float("nan")
            else:
                first = float(nontrivial["t"].iloc[0])
                logger.info(f"First revival of {label} at t={format_time(first)}, predicted {format_time(prediction)}")

            report_rows.append({
                "model": label,
                "prediction": prediction,
                "first_revival": first,
                "relative_error": abs(first - prediction) / prediction if math.isfinite(prediction) else float("nan"),
                "events": len(events),
                "x_tol": x_tol,
                "p_tol": p_tol,
                "status": "no_revival" if nontrivial.empty else "ok",
            })

        report = pd.DataFrame(report_rows)
        self._write_table(report, "revival_report.csv")
        return self._finish(
            "revival-scan",
            status="invalid" if reasons else "ok",
            models=summaries,
            revivals=report_rows,
            convergence=convergence,
            abort_reasons=reasons,
        )

    def _revival_prediction(self, spec: ModelSpec) -> float:
        """JC: revival time at the mean photon number; Rabi: the diabatic oscillator period 2 pi"""
        if spec.kind == "JC":
            n_bar = field_mean_photon_number(self._field_coefficients())
            if n_bar < 1:
                return float("nan")
            return jc_revival_time(n_bar, spec.omega, spec.g0)
        return 2.0 * math.pi

    def run_dicke_spectrum(self) -> Dict[str, Any]:
        """Normal-mode scan across the transition, soft-mode location and mean-field validation"""
        spec = self.config.model
        if spec.kind != "Dicke":
            raise ConfigError("dicke-spectrum needs model.kind = Dicke")
        settings = self.config.dicke
        g_critical = critical_coupling(spec.omega)
        g0_max = settings.g0_max or 2.0 * g_critical

        couplings = np.linspace(0.0, g0_max, settings.points)
        self._write_table(dicke_spectrum(spec.n_atoms, spec.omega, couplings), "dicke_spectrum.csv")

        x = np.linspace(-self.config.curves.x_range, self.config.curves.x_range, self.config.curves.points)
        self._write_table(
            dicke_potential_curves(x, spec.n_atoms, spec.omega, spec.g0, settings.convention),
            "dicke_ladder.csv",
        )

        rng = np.random.default_rng(settings.seed)
        rows = []
        for _ in range(settings.random_draws):
            n_atoms = int(rng.integers(1, 201))
            omega = float(rng.uniform(0.2, 3.0))
            g0 = float(rng.uniform(0.0, 4.0 * critical_coupling(omega)))
            _, alpha_s, beta_s = hp_parameters(n_atoms, omega, g0)
            alpha_c, beta_c = classical_minimum(n_atoms, omega, g0)
            rows.append({
                "n_atoms": n_atoms, "omega": omega, "g0": g0,
                "alpha_s": alpha_s, "beta_s": beta_s,
                "alpha_classical": alpha_c, "beta_classical": beta_c,
                "deviation": max(abs(alpha_s - alpha_c), abs(beta_s - beta_c)),
            })
        validation = pd.DataFrame(rows)
        self._write_table(validation, "dicke_validation.csv")

        eps_minus, eps_plus = normal_modes(hp_quadratic(spec.n_atoms, spec.omega, spec.g0))
        dicke_summary = {
            "critical_coupling": g_critical,
            "soft_mode_coupling": soft_mode_coupling(spec.omega, spec.n_atoms),
            "curvature_at_origin": dicke_curvature_at_origin(
                spec.n_atoms, spec.omega, spec.g0, settings.convention
            ),
            "eps_minus": eps_minus,
            "eps_plus": eps_plus,
            "max_validation_deviation": float(validation["deviation"].max()) if rows else float("nan"),
        }
        return self._finish("dicke-spectrum", dicke=dicke_summary)

    def run_curves(self) -> Dict[str, Any]:
        """Potential-family tables for every configured model"""
        x = np.linspace(-self.config.curves.x_range, self.config.curves.x_range, self.config.curves.points)
        for spec, label in zip(self.config.models, self._labels()):
            if spec.kind == "Dicke":
                curves = dicke_potential_curves(
                    x, spec.n_atoms, spec.omega, spec.g0, self.config.dicke.convention
                )
            elif spec.kind == "JC":
                raise ConfigError("The JC coupling depends on p; it has no x-only potential curves")
            else:
                curves = potential_curves(spec, x)
            self._write_table(curves, f"curves_{label}.csv")
        return self._finish("curves")

    def run_oracle(self) -> Dict[str, Any]:
        """Evaluate the analytic references for the configured parameters"""
        values: Dict[str, Any] = {}
        for spec, label in zip(self.config.models, self._labels()):
            entry: Dict[str, Any] = {"critical_coupling": critical_coupling(spec.omega)}
            if spec.kind == "Dicke":
                mu, alpha_s, beta_s = hp_parameters(spec.n_atoms, spec.omega, spec.g0)
                entry.update(mu=mu, alpha_s=alpha_s, beta_s=beta_s)
                try:
                    entry["normal_modes"] = normal_modes(hp_quadratic(spec.n_atoms, spec.omega, spec.g0))
                except ArithmeticError as e:
                    entry["normal_modes"] = str(e)
                values[label] = entry
                continue

            n_bar = field_mean_photon_number(self._field_coefficients())
            entry["n_bar"] = n_bar
            if spec.kind in ("Rabi", "JC"):
                try:
                    v = crossing_velocity(spec.g0, n_bar=n_bar)
                    entry["crossing_velocity"] = v
                    entry["p_lz"] = landau_zener_probability(spec.omega, spec.g0, v)
                except OracleError as e:
                    entry["landau_zener"] = str(e)

            if spec.kind == "JC":
                entry["ground_energy"] = jc_ground_energy(spec.omega)
                entry["rabi_frequency"] = float(rabi_frequency(n_bar, spec.omega, spec.g0))
                sectors = range(1, min(int(round(n_bar)) + 3, 200))
                entry["sectors"] = [asdict(jc_eigensystem(k, spec.omega, spec.g0)) for k in sectors]
                if n_bar >= 1:
                    entry["revival_time"] = jc_revival_time(n_bar, spec.omega, spec.g0)
                    logger.info(f"{label} revival time at n_bar={n_bar:.6g}: {format_time(entry['revival_time'])}")
                n0 = int(round(n_bar))
                if n0 >= 3:
                    scales = time_scales(lambda n: 2.0 * float(rabi_frequency(n, spec.omega, spec.g0)), n0)
                    entry["time_scales"] = asdict(scales)

                if self.config.propagation is not None:
                    prop_config = self.config.propagation
                    step = prop_config.snapshot_stride * prop_config.dt
                    times = np.arange(prop_config.n_steps // prop_config.snapshot_stride + 1) * step
                    self._write_table(
                        pd.DataFrame({"t": times, "inversion": self._jc_exact(spec, times)}),
                        f"oracle_inversion_{label}.csv",
                    )
            values[label] = entry

        return self._finish("oracle", oracle=values)

    VERBS = {
        "propagate": "run_propagate",
        "compare": "run_compare",
        "lz-sweep": "run_lz_sweep",
        "revival-scan": "run_revival_scan",
        "dicke-spectrum": "run_dicke_spectrum",
        "curves": "run_curves",
        "oracle": "run_oracle",
    }

    def run(self, verb: str) -> Dict[str, Any]:
        try:
            method = getattr(self, self.VERBS[verb])
        except KeyError:
            raise ConfigError(f"Unknown verb '{verb}', expected one of {sorted(self.VERBS)}")
        logger.info(f"Running {verb} for config '{self.config.name}'")
        return method()
