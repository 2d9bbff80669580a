"""
Scenario configuration: one JSON file, validated before any computation.

Every default is materialized into the stored copy, so outputs never depend on
implicit values. The config hash is SHA-256 over the canonical JSON of the
scenario (sorted keys, compact separators); the output section is excluded
because it does not change any number.
"""

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from nlsgibbs.classical.cutoff import CutoffFunction, cutoff_from_dict
from nlsgibbs.classical.observables import identity_kernel, mode_projector
from nlsgibbs.exceptions import NLSGibbsError, ValidationError
from nlsgibbs.flow import FlowConfig
from nlsgibbs.free_field import DEFAULT_CHUNK_SIZE, RngStream
from nlsgibbs.models import ModeSet
from nlsgibbs.potentials import Potential, potential_from_dict

OUTPUT_ENV = "NLSGIBBS_OUT"
CONFIG_FILENAME = "config.json"

Rule = Callable[[Any], Optional[str]]


@dataclass
class SamplerSettings:
    n_samples: int = 100_000
    seed: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE


@dataclass
class FockSettings:
    """n_max is "auto" (ceil(K tau)) or an explicit particle number."""

    n_max: Union[str, int] = "auto"
    size_limit: int = 200_000
    quadrature_order: int = 16


@dataclass
class FlowSettings:
    dt: float = 1e-3
    galerkin: bool = True
    n_x: Optional[int] = None
    t: float = 1.0
    stride: int = 100


@dataclass
class SweepSettings:
    kind: str = "tau"
    values: List[float] = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    epsilon_exponent: float = 0.25


@dataclass
class ObservableSettings:
    """Kernel xi: the projector on one mode, or the identity."""

    kernel: str = "projector"
    mode: int = 0
    p: int = 1


@dataclass
class SeriesSettings:
    orders: List[int] = field(default_factory=lambda: [0, 1, 2, 3, 4, 5, 6])
    quantum_orders: List[int] = field(default_factory=lambda: [0, 1, 2])
    zeta: float = 1.0


@dataclass
class TailSettings:
    radius: float = 1.0
    c: float = 0.5
    levels: List[int] = field(default_factory=lambda: [8, 16])
    n_thresholds: int = 12


@dataclass
class OracleSettings:
    couplings: List[float] = field(default_factory=lambda: [0.0, 0.2, 1.0])


@dataclass
class OutputSettings:
    directory: str = "results"
    formats: List[str] = field(default_factory=lambda: ["json", "csv"])


SECTIONS: Dict[str, type] = {
    "sampler": SamplerSettings,
    "fock": FockSettings,
    "flow": FlowSettings,
    "sweep": SweepSettings,
    "observable": ObservableSettings,
    "series": SeriesSettings,
    "tail": TailSettings,
    "oracle": OracleSettings,
    "output": OutputSettings,
}


def _default_potential() -> Dict[str, Any]:
    return {"kind": "constant", "value": 0.2}


def _default_cutoff() -> Dict[str, Any]:
    return {"kind": "plateau", "K": 4.0, "plateau": 0.5}


@dataclass
class ScenarioConfig:
    """
    Fully materialized scenario.

    Attributes:
        k_max: Mode-set truncation
        kappa: Positive mass parameter
        potential: Tagged potential description
        cutoff: Tagged cutoff description
        sampler, fock, flow, sweep, observable, series, tail, oracle, output:
            Per-concern settings
    """

    k_max: int = 1
    kappa: float = 1.0
    potential: Dict[str, Any] = field(default_factory=_default_potential)
    cutoff: Dict[str, Any] = field(default_factory=_default_cutoff)
    sampler: SamplerSettings = field(default_factory=SamplerSettings)
    fock: FockSettings = field(default_factory=FockSettings)
    flow: FlowSettings = field(default_factory=FlowSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    observable: ObservableSettings = field(default_factory=ObservableSettings)
    series: SeriesSettings = field(default_factory=SeriesSettings)
    tail: TailSettings = field(default_factory=TailSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def to_dict(self) -> Dict[str, Any]:
        """Materialized configuration with every default spelled out."""
        data = asdict(self)
        data["potential"] = self.build_potential().to_dict()
        data["cutoff"] = self.build_cutoff().to_dict()
        return data

    def scenario_dict(self) -> Dict[str, Any]:
        """Materialized configuration without the output section."""
        data = self.to_dict()
        data.pop("output")
        return data

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(
            self.scenario_dict(), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def mode_set(self) -> ModeSet:
        return ModeSet(self.k_max)

    def build_potential(self) -> Potential:
        return potential_from_dict(self.potential)

    def build_cutoff(self) -> CutoffFunction:
        return cutoff_from_dict(self.cutoff)

    def rng(self, stream_id: int = 0) -> RngStream:
        return RngStream(self.sampler.seed, stream_id)

    def n_max(self, tau: float) -> int:
        """
        Particle-number truncation at tau.

        Raises:
            ValidationError: If the auto policy meets a cutoff without a radius
        """
        if self.fock.n_max != "auto":
            return int(self.fock.n_max)
        radius = self.build_cutoff().radius
        if not math.isfinite(radius):
            raise ValidationError(
                ["fock.n_max: 'auto' needs a cutoff with finite radius"]
            )
        return int(math.ceil(radius * tau - 1e-9))

    def kernel(self) -> Tuple[np.ndarray, int]:
        """The observable kernel xi and its order p."""
        p = self.observable.p
        if self.observable.kernel == "identity":
            return identity_kernel(self.mode_set, p), p
        projector = mode_projector(self.mode_set, self.observable.mode)
        return (projector if p == 1 else np.kron(projector, projector)), p

    def flow_config(self, potential: Optional[Potential] = None) -> FlowConfig:
        return FlowConfig(
            dt=self.flow.dt,
            kappa=self.kappa,
            potential=potential if potential is not None else self.build_potential(),
            galerkin=self.flow.galerkin,
            n_x=self.flow.n_x,
        )

    def with_overrides(self, seed: Optional[int] = None) -> "ScenarioConfig":
        """Copy with a CLI seed override applied."""
        data = self.to_dict()
        if seed is not None:
            data["sampler"]["seed"] = seed
        return parse_config(data)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _int_at_least(minimum: int) -> Rule:
    def rule(value: Any) -> Optional[str]:
        if not _is_int(value) or value < minimum:
            return f"must be an integer >= {minimum}, got {value!r}"
        return None

    return rule


def _positive_number(value: Any) -> Optional[str]:
    if not _is_number(value) or not value > 0 or not math.isfinite(value):
        return f"must be a positive number, got {value!r}"
    return None


def _boolean(value: Any) -> Optional[str]:
    return None if isinstance(value, bool) else f"must be true or false, got {value!r}"


def _one_of(*choices: Any) -> Rule:
    def rule(value: Any) -> Optional[str]:
        if value not in choices or isinstance(value, bool):
            listed = ", ".join(str(choice) for choice in choices)
            return f"must be one of {listed}, got {value!r}"
        return None

    return rule


def _list_of(item: Rule, allow_empty: bool = False) -> Rule:
    def rule(value: Any) -> Optional[str]:
        if not isinstance(value, list):
            return f"must be a list, got {value!r}"
        if not value and not allow_empty:
            return "must not be empty"
        for i, entry in enumerate(value):
            message = item(entry)
            if message:
                return f"entry {i} {message}"
        return None

    return rule


def _non_negative_number(value: Any) -> Optional[str]:
    if not _is_number(value) or value < 0 or not math.isfinite(value):
        return f"must be a non-negative number, got {value!r}"
    return None


def _power_of_two_or_null(value: Any) -> Optional[str]:
    if value is None:
        return None
    if not _is_int(value) or value < 4 or value & (value - 1):
        return f"must be null or a power of two >= 4, got {value!r}"
    return None


def _n_max_policy(value: Any) -> Optional[str]:
    if value == "auto" or (_is_int(value) and value >= 0):
        return None
    return f"must be 'auto' or a non-negative integer, got {value!r}"


def _series_order(value: Any) -> Optional[str]:
    if not _is_int(value) or not 0 <= value <= 6:
        return f"must be an integer in 0..6, got {value!r}"
    return None


def _quantum_order(value: Any) -> Optional[str]:
    if not _is_int(value) or not 0 <= value <= 2:
        return f"must be an integer in 0..2, got {value!r}"
    return None


def _formats(value: Any) -> Optional[str]:
    return _list_of(_one_of("json", "csv"))(value)


def _string(value: Any) -> Optional[str]:
    return None if isinstance(value, str) and value else "must be a non-empty string"


RULES: Dict[str, Dict[str, Rule]] = {
    "sampler": {
        "n_samples": _int_at_least(2),
        "seed": _int_at_least(0),
        "chunk_size": _int_at_least(1),
    },
    "fock": {
        "n_max": _n_max_policy,
        "size_limit": _int_at_least(1),
        "quadrature_order": _int_at_least(16),
    },
    "flow": {
        "dt": _positive_number,
        "galerkin": _boolean,
        "n_x": _power_of_two_or_null,
        "t": lambda v: None if _is_number(v) else f"must be a number, got {v!r}",
        "stride": _int_at_least(1),
    },
    "sweep": {
        "kind": _one_of("tau", "epsilon", "time"),
        "values": _list_of(_non_negative_number),
        "epsilon_exponent": _positive_number,
    },
    "observable": {
        "kernel": _one_of("projector", "identity"),
        "mode": lambda v: None if _is_int(v) else f"must be an integer, got {v!r}",
        "p": _one_of(1, 2),
    },
    "series": {
        "orders": _list_of(_series_order),
        "quantum_orders": _list_of(_quantum_order),
        "zeta": lambda v: None if _is_number(v) else f"must be a number, got {v!r}",
    },
    "tail": {
        "radius": _positive_number,
        "c": _positive_number,
        "levels": _list_of(_int_at_least(1)),
        "n_thresholds": _int_at_least(2),
    },
    "oracle": {"couplings": _list_of(_non_negative_number)},
    "output": {"directory": _string, "formats": _formats},
}

# config_hash is written into stored copies and ignored on reading
TOP_LEVEL = {"k_max", "kappa", "potential", "cutoff", "config_hash"} | set(SECTIONS)


def validate_config(data: Any) -> List[str]:
    """
    Check a raw scenario description.

    Args:
        data: Parsed JSON

    Returns:
        Field-level error messages; empty when the scenario is valid
    """
    if not isinstance(data, dict):
        return ["configuration must be a JSON object"]
    errors: List[str] = []
    for key in sorted(set(data) - TOP_LEVEL):
        errors.append(f"{key}: unknown field")

    if "k_max" in data:
        message = _int_at_least(0)(data["k_max"])
        if message:
            errors.append(f"k_max: {message}")
    if "kappa" in data:
        message = _positive_number(data["kappa"])
        if message:
            errors.append(f"kappa: {message}")

    if "potential" in data:
        try:
            potential_from_dict(data["potential"])
        except NLSGibbsError as e:
            errors.append(f"potential: {e}")
    cutoff: Optional[CutoffFunction] = None
    try:
        cutoff = cutoff_from_dict(data.get("cutoff", _default_cutoff()))
    except (NLSGibbsError, ValueError, TypeError, AttributeError) as e:
        errors.append(f"cutoff: {e}")

    for name, rules in RULES.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            errors.append(f"{name}: must be an object")
            continue
        for key in sorted(set(section) - set(rules)):
            errors.append(f"{name}.{key}: unknown field")
        for key, rule in rules.items():
            if key in section:
                message = rule(section[key])
                if message:
                    errors.append(f"{name}.{key}: {message}")

    if not errors:
        errors.extend(_check_truncation_policy(data, cutoff))
    return errors


def _check_truncation_policy(
    data: Dict[str, Any], cutoff: Optional[CutoffFunction]
) -> List[str]:
    """K tau <= n_max for every tau of a tau sweep."""
    fock = data.get("fock", {})
    sweep = data.get("sweep", {})
    if cutoff is None or sweep.get("kind", "tau") != "tau":
        return []
    taus = sweep.get("values", SweepSettings().values)
    n_max = fock.get("n_max", "auto")
    radius = cutoff.radius
    if any(tau <= 0 for tau in taus):
        return ["sweep.values: tau values must be positive"]
    if n_max == "auto":
        if not math.isfinite(radius):
            return ["fock.n_max: 'auto' needs a cutoff with finite radius"]
        return []
    if math.isfinite(radius):
        too_large = [tau for tau in taus if radius * tau > n_max]
        if too_large:
            return [
                f"fock.n_max: {n_max} is below K*tau for tau in {too_large} "
                f"(K = {radius:g})"
            ]
    return []


def parse_config(data: Any) -> ScenarioConfig:
    """
    Validate and materialize a scenario.

    Raises:
        ValidationError: With every field-level message when invalid
    """
    errors = validate_config(data)
    if errors:
        raise ValidationError(errors)
    sections = {
        name: cls(**data.get(name, {})) for name, cls in SECTIONS.items()
    }
    config = ScenarioConfig(
        k_max=data.get("k_max", 1),
        kappa=float(data.get("kappa", 1.0)),
        potential=data.get("potential", _default_potential()),
        cutoff=data.get("cutoff", _default_cutoff()),
        **sections,
    )
    if config.observable.mode not in config.mode_set:
        raise ValidationError(
            [f"observable.mode: {config.observable.mode} outside |k| <= {config.k_max}"]
        )
    return config


def load_config(path: Union[str, Path, None]) -> ScenarioConfig:
    """
    Read a scenario file; None gives the default scenario.

    Raises:
        ValidationError: If the file is not valid JSON or fails validation
    """
    if path is None:
        return parse_config({})
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError([f"invalid JSON in {path}: {e}"]) from e
    return parse_config(data)


def output_directory(config: ScenarioConfig, override: Optional[Path] = None) -> Path:
    """--out wins over NLSGIBBS_OUT, which wins over output.directory."""
    if override is not None:
        return Path(override)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(config.output.directory)


def write_config(config: ScenarioConfig, directory: Path) -> Path:
    """Store the materialized configuration next to the run's outputs."""
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / CONFIG_FILENAME
    data = config.to_dict()
    data["config_hash"] = config.config_hash
    target.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", "utf-8")
    return target
