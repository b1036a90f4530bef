"""Run configuration: TOML schema, defaults, validation and provenance.

Every key is optional; absent keys take the Table-1 style defaults below.
Numeric values may be written bare (``tx_power = -5``) or as a string with
a unit (``tx_power = "-5 dBm"``, ``bandwidth = "4 MHz"``).

Schema::

    alpha = 2.0                      # PD spreading exponent
    output_dir = "out"

    [radio]     frequency (GHz), bandwidth (Hz), temperature (K),
                noise_figure (dB), max_rate (bit/s)
    [tissue]    permittivity, conductivity (S/m), penetration_depth (m),
                mass_density (kg/m^3)
    [limits]    sar_head_fcc, sar_head_icnirp, sar_limb (W/kg), pd_limit (W/m^2)
    [antenna.tx], [antenna.relay], [antenna.rx]
                gain (dBi), beamwidth_3db (deg), max_attenuation (dB),
                element_separation (wavelengths)
    [scene]     tx, relay, rx ([x, y]; relay = [] for none),
                tx_power, relay_power (dBm), traffic ("normal" | "emergency")
    [grid]      length_cm, width_cm, cell_size_cm
    [scenario]  kind ("relay_sweep" | "tx_sweep" | "rx_sweep"), protocol (bool),
                tx, relay, rx (fixed positions; defaults depend on kind)
    [protocol]  rate_tolerance (bit/s), power_step_floor (dB), max_backoff (dB),
                backoff_nodes ("both" | "tx" | "relay"), tdd_halving (bool)
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .exposure import ExposureLimits, TissueProperties
from .geometry import GridSpec, NodePosition
from .propagation import RELAY_ANTENNA, RX_ANTENNA, TX_ANTENNA, AntennaSpec, RadioConfig
from .protocol import BACKOFF_NODES, PowerControlSettings, Scene, Traffic
from .sweep import DEFAULT_FIXED, SweepKind, SweepScenario


class ConfigError(ValueError):
    pass


# unit -> (dimension, multiplier to the canonical unit)
UNITS = {
    "dbm": ("dBm", 1.0),
    "db": ("dB", 1.0),
    "dbi": ("dBi", 1.0),
    "ghz": ("frequency", 1.0),
    "mhz": ("frequency", 1e-3),
    "hz": ("bandwidth", 1.0),
    "khz": ("bandwidth", 1e3),
    "k": ("K", 1.0),
    "bps": ("rate", 1.0),
    "bit/s": ("rate", 1.0),
    "kbps": ("rate", 1e3),
    "mbps": ("rate", 1e6),
    "s/m": ("S/m", 1.0),
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "cm": ("length", 1e-2),
    "kg/m^3": ("density", 1.0),
    "w/kg": ("W/kg", 1.0),
    "w/m^2": ("W/m^2", 1.0),
    "deg": ("deg", 1.0),
    "degrees": ("deg", 1.0),
}

# MHz means frequency in [radio].frequency but bandwidth in [radio].bandwidth
_BANDWIDTH_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}

# (section, key) -> (dimension or None, constraint)
NUMERIC = {
    ("radio", "frequency"): ("frequency", "pos"),
    ("radio", "bandwidth"): ("bandwidth", "pos"),
    ("radio", "temperature"): ("K", "pos"),
    ("radio", "noise_figure"): ("dB", "any"),
    ("radio", "max_rate"): ("rate", "pos"),
    ("tissue", "permittivity"): (None, "pos"),
    ("tissue", "conductivity"): ("S/m", "pos"),
    ("tissue", "penetration_depth"): ("length", "pos"),
    ("tissue", "mass_density"): ("density", "pos"),
    ("limits", "sar_head_fcc"): ("W/kg", "pos"),
    ("limits", "sar_head_icnirp"): ("W/kg", "pos"),
    ("limits", "sar_limb"): ("W/kg", "pos"),
    ("limits", "pd_limit"): ("W/m^2", "pos"),
    ("antenna", "gain"): ("dBi", "any"),
    ("antenna", "beamwidth_3db"): ("deg", "pos"),
    ("antenna", "max_attenuation"): ("dB", "pos"),
    ("antenna", "element_separation"): (None, "pos"),
    ("scene", "tx_power"): ("dBm", "any"),
    ("scene", "relay_power"): ("dBm", "any"),
    ("protocol", "rate_tolerance"): ("rate", "nonneg"),
    ("protocol", "power_step_floor"): ("dB", "pos"),
    ("protocol", "max_backoff"): ("dB", "pos"),
    ("", "alpha"): (None, "pos"),
}

ROLES = ("tx", "relay", "rx")

# defaults that are not Table 1 / regulatory values
ASSUMED_DEFAULTS = frozenset(
    {
        "alpha",
        "tissue.mass_density",
        "limits.pd_limit",
        "antenna.tx.element_separation",
        "antenna.relay.element_separation",
        "antenna.rx.element_separation",
        "antenna.rx.gain",
    }
)


@dataclass(frozen=True)
class RunConfig:
    radio: RadioConfig = field(default_factory=RadioConfig)
    tissue: TissueProperties = field(default_factory=TissueProperties)
    limits: ExposureLimits = field(default_factory=ExposureLimits)
    antennas: dict = field(
        default_factory=lambda: {"tx": TX_ANTENNA, "relay": RELAY_ANTENNA, "rx": RX_ANTENNA}
    )
    tx: NodePosition = NodePosition(1, 1)
    relay: Optional[NodePosition] = NodePosition(5, 6)
    rx: NodePosition = NodePosition(15, 15)
    tx_power: float = 15.0
    relay_power: float = 15.0
    traffic: Traffic = Traffic.NORMAL
    grid: GridSpec = field(default_factory=GridSpec)
    scenario_kind: SweepKind = SweepKind.RELAY
    protocol_enabled: bool = True
    fixed_positions: Optional[dict] = None
    settings: PowerControlSettings = field(default_factory=PowerControlSettings)
    alpha: float = 2.0
    output_dir: str = "out"
    provenance: dict = field(default_factory=dict, compare=False)

    def scene(self) -> Scene:
        for role in ROLES:
            p = getattr(self, role)
            if p is not None:
                self.grid.check(p, role)
        return Scene(
            tx=self.tx,
            rx=self.rx,
            relay=self.relay,
            tx_power=self.tx_power,
            relay_power=self.relay_power,
            tx_antenna=self.antennas["tx"],
            relay_antenna=self.antennas["relay"],
            rx_antenna=self.antennas["rx"],
            radio=self.radio,
            tissue=self.tissue,
            limits=self.limits,
            alpha=self.alpha,
            cell_size_cm=self.grid.cell_size_cm,
        )

    def sweep_scenario(self, kind=None, protocol_enabled=None) -> SweepScenario:
        kind = SweepKind(kind or self.scenario_kind)
        fixed = dict(DEFAULT_FIXED[kind])
        if self.fixed_positions and kind == self.scenario_kind:
            fixed.update(self.fixed_positions)
        # carrier scene for power/antenna/medium parameters only
        base = Scene(
            tx=NodePosition(1, 1),
            rx=NodePosition(2, 1),
            tx_power=self.tx_power,
            relay_power=self.relay_power,
            tx_antenna=self.antennas["tx"],
            relay_antenna=self.antennas["relay"],
            rx_antenna=self.antennas["rx"],
            radio=self.radio,
            tissue=self.tissue,
            limits=self.limits,
            alpha=self.alpha,
            cell_size_cm=self.grid.cell_size_cm,
        )
        return SweepScenario(
            kind=kind,
            fixed_positions=fixed,
            grid=self.grid,
            protocol_enabled=self.protocol_enabled if protocol_enabled is None else protocol_enabled,
            base_scene=base,
            settings=self.settings,
        )

    def assumed_defaults(self) -> list[str]:
        return sorted(k for k, v in self.provenance.items() if v == "assumed default")


_QUANTITY = re.compile(r"^\s*([-+]?(?:inf|\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?))\s*(\S*)\s*$")


def _number(path: str, value: Any, dim: Optional[str], constraint: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got a boolean")
    if isinstance(value, str):
        m = _QUANTITY.match(value)
        if not m:
            raise ConfigError(f"{path}: cannot parse quantity {value!r}")
        number, unit = float(m.group(1)), m.group(2).lower()
        if unit:
            if dim == "bandwidth" and unit in _BANDWIDTH_UNITS:
                number *= _BANDWIDTH_UNITS[unit]
            elif unit in UNITS and UNITS[unit][0] == dim:
                number *= UNITS[unit][1]
            else:
                raise ConfigError(f"{path}: unit {m.group(2)!r} does not fit this key")
        value = number
    elif isinstance(value, (int, float)):
        value = float(value)
    else:
        raise ConfigError(f"{path}: expected a number, got {type(value).__name__}")
    if value != value:
        raise ConfigError(f"{path}: NaN is not allowed")
    if constraint == "pos" and not value > 0:
        raise ConfigError(f"{path}: must be > 0, got {value}")
    if constraint == "nonneg" and not value >= 0:
        raise ConfigError(f"{path}: must be >= 0, got {value}")
    return value


def _position(path: str, value: Any, allow_none: bool = False) -> Optional[NodePosition]:
    if allow_none and (value == [] or value == "none"):
        return None
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise ConfigError(f"{path}: expected [x, y] integer grid coordinates, got {value!r}")
    return NodePosition(value[0], value[1])


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected a table")
    return sec


def _reject_unknown(prefix: str, table: dict, allowed) -> None:
    for key in table:
        if key not in allowed:
            where = f"{prefix}.{key}" if prefix else key
            raise ConfigError(f"{where}: unknown key")


def _numeric_table(name: str, table: dict, cls, provenance: dict) -> Any:
    fields = [f.name for f in dataclasses.fields(cls)]
    _reject_unknown(name, table, fields)
    kwargs = {}
    for key in fields:
        path = f"{name}.{key}"
        section = name.split(".")[0]
        if key in table:
            dim, constraint = NUMERIC[(section, key)]
            kwargs[key] = _number(path, table[key], dim, constraint)
            provenance[path] = "user"
        else:
            provenance[path] = "assumed default" if path in ASSUMED_DEFAULTS else "reference"
    return kwargs


def parse_config(text: str) -> RunConfig:
    """Parse a TOML document into a validated :class:`RunConfig`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    top_keys = {"alpha", "output_dir", "radio", "tissue", "limits", "antenna",
                "scene", "grid", "scenario", "protocol"}
    _reject_unknown("", doc, top_keys)
    prov: dict = {}

    try:
        radio = RadioConfig(**_numeric_table("radio", _section(doc, "radio"), RadioConfig, prov))
        tissue = TissueProperties(
            **_numeric_table("tissue", _section(doc, "tissue"), TissueProperties, prov)
        )
        limits = ExposureLimits(
            **_numeric_table("limits", _section(doc, "limits"), ExposureLimits, prov)
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None

    ant_doc = _section(doc, "antenna")
    _reject_unknown("antenna", ant_doc, ROLES)
    defaults = {"tx": TX_ANTENNA, "relay": RELAY_ANTENNA, "rx": RX_ANTENNA}
    antennas = {}
    for role in ROLES:
        table = ant_doc.get(role, {})
        if not isinstance(table, dict):
            raise ConfigError(f"antenna.{role}: expected a table")
        kwargs = _numeric_table(f"antenna.{role}", table, AntennaSpec, prov)
        antennas[role] = dataclasses.replace(defaults[role], **kwargs)

    scene = _section(doc, "scene")
    _reject_unknown("scene", scene, {"tx", "relay", "rx", "tx_power", "relay_power", "traffic"})
    kwargs: dict = {}
    for role in ROLES:
        if role in scene:
            kwargs[role] = _position(f"scene.{role}", scene[role], allow_none=role == "relay")
    for key in ("tx_power", "relay_power"):
        if key in scene:
            kwargs[key] = _number(f"scene.{key}", scene[key], "dBm", "any")
            prov[f"scene.{key}"] = "user"
        else:
            prov[f"scene.{key}"] = "reference"
    if "traffic" in scene:
        try:
            kwargs["traffic"] = Traffic(scene["traffic"])
        except ValueError:
            raise ConfigError(
                f"scene.traffic: must be 'normal' or 'emergency', got {scene['traffic']!r}"
            ) from None

    grid_doc = _section(doc, "grid")
    _reject_unknown("grid", grid_doc, {"length_cm", "width_cm", "cell_size_cm"})
    for key, value in grid_doc.items():
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"grid.{key}: expected an integer, got {value!r}")
    try:
        grid = GridSpec(**grid_doc)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None

    sc = _section(doc, "scenario")
    _reject_unknown("scenario", sc, {"kind", "protocol", "tx", "relay", "rx"})
    if "kind" in sc:
        try:
            kwargs["scenario_kind"] = SweepKind(sc["kind"])
        except ValueError:
            raise ConfigError(
                f"scenario.kind: must be one of {[k.value for k in SweepKind]}, got {sc['kind']!r}"
            ) from None
    if "protocol" in sc:
        if not isinstance(sc["protocol"], bool):
            raise ConfigError(f"scenario.protocol: expected true/false, got {sc['protocol']!r}")
        kwargs["protocol_enabled"] = sc["protocol"]
    fixed = {role: _position(f"scenario.{role}", sc[role]) for role in ROLES if role in sc}
    if fixed:
        kwargs["fixed_positions"] = fixed

    proto = _section(doc, "protocol")
    _reject_unknown("protocol", proto, {f.name for f in dataclasses.fields(PowerControlSettings)})
    pkw = {}
    for key in ("rate_tolerance", "power_step_floor", "max_backoff"):
        if key in proto:
            dim, constraint = NUMERIC[("protocol", key)]
            pkw[key] = _number(f"protocol.{key}", proto[key], dim, constraint)
    if "backoff_nodes" in proto:
        if proto["backoff_nodes"] not in BACKOFF_NODES:
            raise ConfigError(
                f"protocol.backoff_nodes: must be one of {BACKOFF_NODES}, "
                f"got {proto['backoff_nodes']!r}"
            )
        pkw["backoff_nodes"] = proto["backoff_nodes"]
    if "tdd_halving" in proto:
        if not isinstance(proto["tdd_halving"], bool):
            raise ConfigError("protocol.tdd_halving: expected true/false")
        pkw["tdd_halving"] = proto["tdd_halving"]

    if "alpha" in doc:
        kwargs["alpha"] = _number("alpha", doc["alpha"], None, "pos")
        prov["alpha"] = "user"
    else:
        prov["alpha"] = "assumed default"
    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str):
            raise ConfigError("output_dir: expected a string")
        kwargs["output_dir"] = doc["output_dir"]

    config = RunConfig(
        radio=radio,
        tissue=tissue,
        limits=limits,
        antennas=antennas,
        grid=grid,
        settings=PowerControlSettings(**pkw),
        provenance=prov,
        **kwargs,
    )
    for role in ROLES:
        p = getattr(config, role)
        if p is not None and not grid.contains(p):
            raise ConfigError(f"scene.{role}: position {tuple(p)} is off the grid")
    for role, p in (config.fixed_positions or {}).items():
        if not grid.contains(p):
            raise ConfigError(f"scenario.{role}: position {tuple(p)} is off the grid")
    return config


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(config: RunConfig) -> str:
    """TOML text that parses back to an equal :class:`RunConfig`."""
    doc: dict = {
        "alpha": config.alpha,
        "output_dir": config.output_dir,
        "radio": dataclasses.asdict(config.radio),
        "tissue": dataclasses.asdict(config.tissue),
        "limits": dataclasses.asdict(config.limits),
        "antenna": {role: dataclasses.asdict(a) for role, a in config.antennas.items()},
        "scene": {
            "tx": list(config.tx),
            "relay": [] if config.relay is None else list(config.relay),
            "rx": list(config.rx),
            "tx_power": config.tx_power,
            "relay_power": config.relay_power,
            "traffic": config.traffic.value,
        },
        "grid": dataclasses.asdict(config.grid),
        "scenario": {
            "kind": config.scenario_kind.value,
            "protocol": config.protocol_enabled,
        },
        "protocol": dataclasses.asdict(config.settings),
    }
    for role, p in (config.fixed_positions or {}).items():
        doc["scenario"][role] = list(p)
    return tomli_w.dumps(doc)
