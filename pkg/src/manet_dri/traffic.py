"""CBR flows, per-run counters and aggregation."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Optional


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending setting."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class FlowSpec:
    flow_id: int
    source: int
    destination: int
    rate: float = 2.0
    payload: int = 512
    start: float = 0.0
    stop: float = math.inf

    def __post_init__(self):
        if self.source == self.destination:
            raise ConfigError("flow", "source and destination must differ")


def generate_flows(n, honest, rng, rate=2.0, payload=512, start_after=50.0,
                   stagger=50.0, stop=math.inf):
    """``n`` flows over distinct ordered (source, destination) pairs of honest nodes."""
    honest = sorted(honest)
    pairs = [(a, b) for a in honest for b in honest if a != b]
    if n < 0 or n > len(pairs):
        raise ConfigError("flow_count", f"{n} flows requested but only {len(pairs)} honest pairs")
    chosen = rng.sample(pairs, n)
    return [FlowSpec(k, s, d, rate, payload, start_after + rng.uniform(0.0, stagger), stop)
            for k, (s, d) in enumerate(chosen)]


class Stats:
    """Counters mutated by a single run's handlers."""

    def __init__(self):
        self.sent = 0
        self._delivered = set()
        self.attacker_dropped = 0
        self.overflow_dropped = 0
        self.lost_medium = 0
        self.no_route_dropped = 0
        self.forged_events = 0
        self.sessions_started = 0
        self.verdicts = {}
        self.audit = []
        self.detection_time = None
        self.found = []

    @property
    def delivered(self):
        return len(self._delivered)

    @property
    def link_lost(self):
        return self.lost_medium + self.no_route_dropped

    def record_sent(self, pkt):
        self.sent += 1

    def record_delivered(self, pkt):
        self._delivered.add((pkt.flow_id, pkt.seq))

    def attacker_drop(self, pkt):
        self.attacker_dropped += 1

    def overflow(self, pkt):
        self.overflow_dropped += 1

    def medium_loss(self, pkt):
        self.lost_medium += 1

    def lost_no_route(self, pkt):
        self.no_route_dropped += 1

    def forged_rrep(self, attacker):
        self.forged_events += 1

    def session_started(self, s):
        self.sessions_started += 1

    def session_step(self, s):
        pass

    def session_verdict(self, s, verdict, found, t):
        self.verdicts[verdict.value] = self.verdicts.get(verdict.value, 0) + 1
        chain = ">".join(map(str, s.suspects))
        line = f"t={t!r} origin={s.origin} suspects={chain} verdict={verdict.value}"
        if s.reason:
            line += f" reason={s.reason.replace(' ', '_')}"
        self.audit.append(line)
        if found:
            self.found.append((t, s.origin, frozenset(found)))
            if self.detection_time is None:
                self.detection_time = t


@dataclass
class RunMetrics:
    sent: int
    delivered: int
    pdr: Optional[float]
    false_rreps: int
    poisoned_nodes: int
    blacklisted: frozenset
    detection_time: Optional[float]
    control_packets: dict
    attacker_dropped: int = 0
    overflow_dropped: int = 0
    link_lost: int = 0
    in_flight: int = 0
    blackholes_found: int = 0
    honest_blacklisted: int = 0
    seed: int = 0
    verdicts: dict = field(default_factory=dict)

    def conserved(self):
        return self.sent == (self.delivered + self.attacker_dropped + self.overflow_dropped
                             + self.link_lost + self.in_flight)


def pdr(sent, delivered):
    return delivered / sent if sent > 0 else None


def count_poisoned_nodes(tables, attackers, now, direct_only=False):
    """Honest nodes holding an active route that leads into an attacker.

    ``tables`` maps node id to its RoutingTable. A route leads into an
    attacker when following active next hops for that destination reaches
    one; ``direct_only`` restricts this to the first hop.
    """
    attackers = set(attackers)
    poisoned = 0
    for nid in sorted(tables):
        if nid in attackers:
            continue
        for dest, e in tables[nid].entries.items():
            if not e.active(now):
                continue
            if _leads_to(tables, attackers, e, dest, now, direct_only):
                poisoned += 1
                break
    return poisoned


def _leads_to(tables, attackers, entry, dest, now, direct_only):
    hop = entry.next_hop
    seen = set()
    while True:
        if hop in attackers:
            return True
        if direct_only or hop in seen or hop == dest or hop not in tables:
            return False
        seen.add(hop)
        nxt = tables[hop].lookup(dest, now)
        if nxt is None:
            return False
        hop = nxt.next_hop


AGG_FIELDS = ("sent", "delivered", "pdr", "false_rreps", "poisoned_nodes", "blacklist_size",
              "detection_time", "attacker_dropped", "overflow_dropped", "link_lost", "in_flight")


def _field(run, name):
    if name == "blacklist_size":
        return len(run.blacklisted)
    return getattr(run, name)


def aggregate(runs):
    """Mean and sample standard deviation per field.

    PDR is the mean of per-run ratios. Fields that are absent in a run
    (PDR with nothing sent, detection time without a detection) are left
    out of that field's statistics; a field absent everywhere maps to
    ``(None, None)``.
    """
    if not runs:
        raise ValueError("aggregate needs at least one run")
    out = {}
    for name in AGG_FIELDS:
        vals = [_field(r, name) for r in runs]
        vals = [float(v) for v in vals if v is not None]
        out[name] = _mean_sd(vals)
    kinds = sorted({k for r in runs for k in r.control_packets})
    for k in kinds:
        out["ctl_" + k] = _mean_sd([float(r.control_packets.get(k, 0)) for r in runs])
    return out


def _mean_sd(vals):
    if not vals:
        return (None, None)
    m = statistics.fmean(vals)
    sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return (m, sd)
