"""Scenario configuration and the ``key = value`` config file format.

Defaults reproduce the evaluation setup: 30 nodes in 1000 m x 1000 m, 200 m
radio range, random waypoint at 5-20 m/s with 10 s pauses, 15 CBR flows of
2 packets/s carrying 512 bytes, two cooperating black holes, 1000 s runs.

Timer values (``route_lifetime``, ``discovery_timeout``, ``discovery_retries``,
``frp_timeout``, ``hop_budget``) and ``seq_boost`` are this simulator's own
defaults; they are not taken from any measured system.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .traffic import ConfigError

PROTOCOLS = ("aodv", "aodv-attack", "aodv-dri")
AXES = ("connections", "speed")
AXIS_ALIASES = {"max_speed": "speed"}
DEFAULT_VALUES = {
    "connections": (5, 10, 15, 20, 25, 29),
    "speed": (5.0, 10.0, 15.0, 20.0),
}


@dataclass(frozen=True)
class ScenarioConfig:
    duration: float = 1000.0
    area_width: float = 1000.0
    area_height: float = 1000.0
    node_count: int = 30
    range: float = 200.0
    v_min: float = 5.0
    v_max: float = 20.0
    pause: float = 10.0
    flow_count: int = 15
    packet_rate: float = 2.0
    payload: int = 512
    attacker_count: int = 2
    protocol: str = "aodv"
    seed: int = 1
    # medium
    per_hop_delay: float = 0.002
    broadcast_jitter_max: float = 0.010
    loss_probability: float = 0.0
    # timers
    route_lifetime: float = 10.0
    discovery_timeout: float = 1.0
    discovery_retries: int = 2
    buffer_cap: int = 64
    frp_timeout: float = 2.0
    hop_budget: int = 8
    seq_boost: int = 30
    share_dri: bool = False
    # scheduling
    warmup: float = 50.0
    flow_stagger: float = 50.0
    drain: float = 2.0
    mobility_tick: float = 0.1
    sample_interval: float = 100.0
    static: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def area(self):
        return (self.area_width, self.area_height)

    @property
    def effective_attackers(self):
        return 0 if self.protocol == "aodv" else self.attacker_count

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def validate(self):
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(key, msg)

        need(self.protocol in PROTOCOLS, "protocol", f"must be one of {', '.join(PROTOCOLS)}")
        need(self.duration > 0, "duration", "must be positive")
        need(self.area_width > 0 and self.area_height > 0, "area", "must be positive")
        need(self.node_count >= 2, "node_count", "need at least two nodes")
        need(self.range > 0, "range", "must be positive")
        need(self.v_min > 0, "v_min", "must be > 0 (zero minimum speed decays random waypoint)")
        need(self.v_max >= self.v_min, "v_max", "must be >= v_min")
        need(self.pause >= 0, "pause", "must be non-negative")
        need(self.flow_count >= 0, "flow_count", "must be non-negative")
        need(self.packet_rate > 0, "packet_rate", "must be positive")
        need(self.payload > 0, "payload", "must be positive")
        need(0 <= self.attacker_count < self.node_count, "attacker_count",
             "must be non-negative and below node_count")
        honest = self.node_count - self.attacker_count
        need(self.flow_count <= honest * (honest - 1), "flow_count",
             f"at most {honest * (honest - 1)} flows between {honest} honest nodes")
        need(self.per_hop_delay > 0, "per_hop_delay", "must be positive")
        need(self.broadcast_jitter_max >= 0, "broadcast_jitter_max", "must be non-negative")
        need(0 <= self.loss_probability <= 1, "loss_probability", "must lie in [0, 1]")
        need(self.route_lifetime > 0, "route_lifetime", "must be positive")
        need(self.discovery_timeout > 0, "discovery_timeout", "must be positive")
        need(self.discovery_retries >= 0, "discovery_retries", "must be non-negative")
        need(self.buffer_cap >= 1, "buffer_cap", "must be at least 1")
        need(self.frp_timeout > 0, "frp_timeout", "must be positive")
        need(self.hop_budget >= 1, "hop_budget", "must be at least 1")
        need(self.seq_boost >= 1, "seq_boost", "must be at least 1")
        need(self.warmup >= 0 and self.flow_stagger >= 0 and self.drain >= 0, "warmup",
             "warmup, flow_stagger and drain must be non-negative")
        need(self.mobility_tick > 0, "mobility_tick", "must be positive")
        need(self.sample_interval > 0, "sample_interval", "must be positive")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    repetitions: int = 5
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError("sweep", f"must be one of {', '.join(AXES)}")
        if self.repetitions < 1:
            raise ConfigError("repetitions", "must be at least 1")
        if not self.values:
            raise ConfigError("values", "must not be empty")
        for v in self.values:
            self.point(v, self.base.protocol)

    def point(self, value, protocol):
        if self.axis == "connections":
            return self.base.replace(flow_count=int(value), protocol=protocol)
        return self.base.replace(v_max=float(value), protocol=protocol)

    def seeds(self):
        return [self.base.seed + k for k in range(self.repetitions)]


_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(key, raw, typ):
    try:
        if typ == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(key, f"expected {typ}, got {raw!r}") from None


def parse_text(text, source="<config>"):
    """Parse config text into a ScenarioConfig, or a SweepSpec when ``sweep`` is set."""
    values = {}
    sweep = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value' in {source}")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key in ("sweep", "values", "repetitions"):
            sweep[key] = raw
        elif key == "area":
            parts = raw.lower().replace("*", "x").split("x")
            if len(parts) != 2:
                raise ConfigError("area", "expected WIDTHxHEIGHT")
            values["area_width"] = _coerce("area", parts[0].strip(), "float")
            values["area_height"] = _coerce("area", parts[1].strip(), "float")
        elif key in _TYPES:
            values[key] = _coerce(key, raw, _TYPES[key])
        else:
            raise ConfigError(key, "unknown key")
    base = ScenarioConfig(**values)
    if not sweep:
        return base
    if "sweep" not in sweep:
        raise ConfigError("sweep", "values/repetitions given without a sweep axis")
    axis = AXIS_ALIASES.get(sweep["sweep"], sweep["sweep"])
    if axis not in AXES:
        raise ConfigError("sweep", f"must be one of {', '.join(AXES)}")
    if "values" in sweep:
        vals = tuple(_coerce("values", v.strip(), "float") for v in sweep["values"].split(",") if v.strip())
    else:
        vals = DEFAULT_VALUES[axis]
    reps = _coerce("repetitions", sweep["repetitions"], "int") if "repetitions" in sweep else 5
    return SweepSpec(axis, vals, reps, base)


def parse_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config", f"no such file: {path}")
    return parse_text(p.read_text(), str(p))
