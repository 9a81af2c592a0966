"""Run configuration: nested dataclasses loaded from TOML with strict validation.

Every key has a default, so a file containing only ``experiment = "fig2"`` is
a complete configuration. Unknown keys and type mismatches are rejected with
the dotted key path in the message.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, get_args, get_origin, get_type_hints

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .coexistence import DEFAULT_GAMMA_MAX, DEFAULT_SPARED, CycleConfig, ThresholdTable
from .phy import DEFAULT_MCS_EFFICIENCIES, DEFAULT_MCS_THRESHOLDS_DB, CcaThresholds, McsTable
from .topology import FloorPlan, PathlossModel
from .traffic import RampProfile
from .wlan_mac import DEFAULT_WLAN_RATE_THRESHOLDS_DB, DEFAULT_WLAN_RATES_MBPS, DcfParams, WlanRateTable

MODES = ("adaptive", "fixed", "lte_only", "wlan_only")
EXPERIMENTS = ("fig2", "fig3", "fig4", "fig5", "fig6", "table3_4", "fig7")


class ConfigError(ValueError):
    """Invalid configuration file or value."""


@dataclass(frozen=True)
class PathlossConfig:
    reference_loss_db: float = 38.46
    distance_exponent: float = 2.0
    wall_loss_db: float = 5.0


@dataclass(frozen=True)
class ScenarioConfig:
    room_rows: int = 2
    rooms_per_row: int = 20
    room_size_m: float = 10.0
    corridor_width_m: float = 10.0
    n_lte_users: int = 10
    n_wlan_users: int = 10
    infra_height_m: float = 3.0
    user_height_m: float = 1.5
    min_infra_distance_m: float = 10.0
    tx_power_dbm: float = 23.0
    antenna_gain_db: float = 3.0
    noise_floor_dbm: float = -101.0
    pathloss: PathlossConfig = field(default_factory=PathlossConfig)

    def floor_plan(self) -> FloorPlan:
        return FloorPlan(self.room_rows, self.rooms_per_row, self.room_size_m, self.corridor_width_m)

    def pathloss_model(self) -> PathlossModel:
        p = self.pathloss
        return PathlossModel(reference_loss=p.reference_loss_db, distance_exponent=p.distance_exponent,
                             wall_loss=p.wall_loss_db)


@dataclass(frozen=True)
class LteConfig:
    arrival_rate_per_ms: float = 0.5
    lambda_grid: Tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)
    packet_bits: int = 20_000
    bandwidth_hz: float = 20e6
    max_retx: int = 3
    mcs_lag_ms: int = 2
    full_buffer: bool = False
    # the carrier keeps control and reference signals on air in every
    # Transmit subframe, even one without user data
    occupy_idle_subframes: bool = True
    mcs_thresholds_db: Tuple[float, ...] = DEFAULT_MCS_THRESHOLDS_DB
    mcs_efficiencies: Tuple[float, ...] = DEFAULT_MCS_EFFICIENCIES

    def mcs_table(self) -> McsTable:
        return McsTable(self.mcs_thresholds_db, self.mcs_efficiencies)


@dataclass(frozen=True)
class RampConfig:
    start_rate_per_ms: float = 0.01
    end_rate_per_ms: float = 1.5
    # 0 means "span the whole drop"
    duration_ms: int = 0


@dataclass(frozen=True)
class WlanConfig:
    payload_bits: int = 12_000
    slot_us: int = 9
    difs_us: int = 34
    sifs_us: int = 16
    cw_min: int = 15
    cw_max: int = 1023
    ack_us: int = 44
    max_backoff_level: int = 6
    preamble_us: int = 20
    retry_limit: int = 7
    rate_thresholds_db: Tuple[float, ...] = DEFAULT_WLAN_RATE_THRESHOLDS_DB
    rates_mbps: Tuple[float, ...] = DEFAULT_WLAN_RATES_MBPS
    ramp: RampConfig = field(default_factory=RampConfig)

    def dcf_params(self) -> DcfParams:
        return DcfParams(self.slot_us, self.difs_us, self.sifs_us, self.cw_min, self.cw_max,
                         self.ack_us, self.max_backoff_level, self.preamble_us, self.retry_limit)

    def rate_table(self) -> WlanRateTable:
        return WlanRateTable(self.rate_thresholds_db, self.rates_mbps)

    def ramp_profile(self, drop_duration_ms: int) -> RampProfile:
        r = self.ramp
        return RampProfile(r.start_rate_per_ms, r.end_rate_per_ms, r.duration_ms or drop_duration_ms)


@dataclass(frozen=True)
class CcaConfig:
    ed_threshold_dbm: float = -62.0
    cs_threshold_dbm: float = -82.0

    def thresholds(self) -> CcaThresholds:
        return CcaThresholds(self.ed_threshold_dbm, self.cs_threshold_dbm)


@dataclass(frozen=True)
class CoexistenceConfig:
    mode: str = "adaptive"
    fixed_mode: int = 4
    t_c_ms: int = 1000
    initial_spared: int = 5
    gamma_max: Tuple[float, ...] = DEFAULT_GAMMA_MAX
    spared: Tuple[int, ...] = DEFAULT_SPARED
    catch_all_spared: int = 9

    def threshold_table(self) -> ThresholdTable:
        return ThresholdTable(self.gamma_max, self.spared, self.catch_all_spared)

    def cycle(self) -> CycleConfig:
        return CycleConfig(self.t_c_ms, self.initial_spared)


@dataclass(frozen=True)
class EngineConfig:
    duration_ms: int = 20_000
    drops: int = 20
    seed_base: int = 1
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    cycles_csv: str = "cycles.csv"
    summary_csv: str = "summary.csv"


@dataclass(frozen=True)
class RunConfig:
    experiment: str = ""
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    lte: LteConfig = field(default_factory=LteConfig)
    wlan: WlanConfig = field(default_factory=WlanConfig)
    cca: CcaConfig = field(default_factory=CcaConfig)
    coexistence: CoexistenceConfig = field(default_factory=CoexistenceConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def with_overrides(self, **sections: Dict[str, Any]) -> "RunConfig":
        """Copy with some fields replaced, e.g. ``lte={"arrival_rate_per_ms": 1.0}``."""
        changes = {name: dataclasses.replace(getattr(self, name), **vals) for name, vals in sections.items()}
        cfg = dataclasses.replace(self, **changes)
        validate(cfg)
        return cfg

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _coerce(value: Any, tp: Any, path: str) -> Any:
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a table")
        return _build(tp, value, path)
    if get_origin(tp) is tuple:
        (item_tp, _) = get_args(tp)
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected an array")
        return tuple(_coerce(v, item_tp, f"{path}[{i}]") for i, v in enumerate(value))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{path}: unsupported type {tp}")


def _build(cls, data: Dict[str, Any], prefix: str = ""):
    hints = get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in names:
            raise ConfigError(f"unknown configuration key '{path}'")
        kwargs[key] = _coerce(value, hints[key], path)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix or 'config'}: {exc}") from exc


def validate(cfg: RunConfig) -> RunConfig:
    """Cross-field checks that single-field coercion cannot catch."""
    if cfg.experiment and cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown preset '{cfg.experiment}'; choose from {', '.join(EXPERIMENTS)}")
    co = cfg.coexistence
    if co.mode not in MODES:
        raise ConfigError(f"coexistence.mode: expected one of {', '.join(MODES)}, got '{co.mode}'")
    if co.mode == "fixed" and co.fixed_mode not in (0, 1, 2, 3, 4):
        raise ConfigError(f"coexistence.fixed_mode: expected 0..4, got {co.fixed_mode}")
    eng = cfg.engine
    if eng.duration_ms <= 0:
        raise ConfigError("engine.duration_ms: must be positive")
    if eng.drops < 1:
        raise ConfigError("engine.drops: must be at least 1")
    if eng.workers < 1:
        raise ConfigError("engine.workers: must be at least 1")
    if cfg.lte.arrival_rate_per_ms < 0 or any(v < 0 for v in cfg.lte.lambda_grid):
        raise ConfigError("lte: arrival rates must be non-negative")
    if cfg.lte.packet_bits <= 0 or cfg.wlan.payload_bits <= 0:
        raise ConfigError("packet sizes must be positive")
    if cfg.lte.mcs_lag_ms < 0 or cfg.lte.max_retx < 0:
        raise ConfigError("lte: mcs_lag_ms and max_retx must be non-negative")
    if cfg.wlan.ramp.duration_ms < 0:
        raise ConfigError("wlan.ramp.duration_ms: must be non-negative")
    sections = {
        "coexistence": lambda: (co.cycle(), co.threshold_table()),
        "lte": cfg.lte.mcs_table,
        "wlan": lambda: (cfg.wlan.dcf_params(), cfg.wlan.rate_table(), cfg.wlan.ramp_profile(eng.duration_ms)),
        "cca": cfg.cca.thresholds,
        "scenario": lambda: cfg.scenario.floor_plan(),
    }
    for name, check in sections.items():
        try:
            check()
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    if eng.duration_ms % co.t_c_ms:
        raise ConfigError(
            f"engine.duration_ms ({eng.duration_ms}) must be a multiple of coexistence.t_c_ms ({co.t_c_ms})"
        )
    return cfg


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    return validate(_build(RunConfig, data))


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def _schema_of(tp: Any) -> Dict[str, Any]:
    if dataclasses.is_dataclass(tp):
        hints = get_type_hints(tp)
        props = {}
        for f in dataclasses.fields(tp):
            sub = _schema_of(hints[f.name])
            if not dataclasses.is_dataclass(hints[f.name]):
                default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
                sub["default"] = list(default) if isinstance(default, tuple) else default
            props[f.name] = sub
        return {"type": "object", "additionalProperties": False, "properties": props}
    if get_origin(tp) is tuple:
        return {"type": "array", "items": _schema_of(get_args(tp)[0])}
    return {"type": {bool: "boolean", int: "integer", float: "number", str: "string"}[tp]}


def json_schema() -> Dict[str, Any]:
    """JSON Schema describing every accepted key and its default."""
    schema = _schema_of(RunConfig)
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema"
    schema["title"] = "ltecoex run configuration"
    schema["properties"]["experiment"]["enum"] = ["", *EXPERIMENTS]
    schema["properties"]["coexistence"]["properties"]["mode"]["enum"] = list(MODES)
    return schema
