"""Assemble and run one simulation."""
from __future__ import annotations

import random

from .adversary import BlackholeNode, pair_attackers
from .aodv import AodvNode, ProtocolParams
from .engine import MediumParams, Simulator
from .messages import DataPacket
from .traffic import RunMetrics, Stats, count_poisoned_nodes, generate_flows, pdr


class Network:
    """Nodes, medium, traffic and counters for one run.

    ``attackers`` maps node id to AttackerConfig; those nodes run the black
    hole behaviour. Honest nodes run the cross-check defence when
    ``detection`` is true.
    """

    def __init__(self, positions, *, medium=None, params=None, attackers=None,
                 detection=False, seed=0, area=(1000.0, 1000.0), trace=None):
        self.params = params or ProtocolParams()
        self.stats = Stats()
        self.sim = Simulator(positions, medium or MediumParams(), area, seed, trace)
        self.sim.on_data_lost = self.stats.medium_loss
        self.attackers = dict(attackers or {})
        self.detection = detection
        nodes = []
        for i in range(len(positions)):
            cfg = self.attackers.get(i)
            if cfg is not None:
                nodes.append(BlackholeNode(i, self.sim, cfg, self.params, self.stats,
                                           accomplices=self.attackers.keys()))
            else:
                nodes.append(AodvNode(i, self.sim, self.params, self.stats, detection))
        self.sim.attach(nodes)
        self.nodes = nodes
        self.flows = []
        self.poison_samples = []
        self.poison_direct_samples = []

    @property
    def honest(self):
        return [n.id for n in self.nodes if not n.malicious]

    def add_flow(self, flow):
        self.flows.append(flow)
        self.sim.schedule(flow.start, self._emit, flow, 0, kind="TRAFFIC", node=flow.source)

    def _emit(self, flow, seq):
        pkt = DataPacket(flow.flow_id, seq, flow.source, flow.destination, flow.payload)
        self.nodes[flow.source].originate_data(pkt)
        t = flow.start + (seq + 1) / flow.rate
        if t < flow.stop:
            self.sim.schedule(t, self._emit, flow, seq + 1, kind="TRAFFIC", node=flow.source)

    def send(self, source, destination, flow_id=0, seq=0):
        """Inject one data packet immediately (used by hand-built scenarios)."""
        pkt = DataPacket(flow_id, seq, source, destination)
        self.nodes[source].originate_data(pkt)
        return pkt

    def schedule_sampling(self, interval, t_end):
        t = interval
        while t < t_end:
            self.sim.schedule(t, self.sample_poison, kind="TIMER")
            t += interval

    def sample_poison(self):
        tables = {n.id: n.routes for n in self.nodes}
        now = self.sim.now
        self.poison_samples.append(count_poisoned_nodes(tables, self.attackers, now))
        self.poison_direct_samples.append(
            count_poisoned_nodes(tables, self.attackers, now, direct_only=True))

    def run(self, t_end):
        self.sim.run_until(t_end)

    def finish(self):
        """End-of-run bookkeeping: last poison sample, open sessions closed."""
        self.sample_poison()
        for n in self.nodes:
            if n.detector is not None:
                n.detector.close_all()

    def in_flight(self):
        n = sum(len(node.buffered()) for node in self.nodes)
        for ev in self.sim.pending_events():
            if ev.kind == "DELIVER" and isinstance(ev.args[0], DataPacket):
                n += 1
        return n

    def blacklisted(self):
        ids = set()
        for n in self.nodes:
            if not n.malicious:
                ids |= n.blacklist.ids
        return frozenset(ids)

    def false_rreps(self):
        return sum(n.count_false_rrep() for n in self.nodes if n.malicious)

    def metrics(self, seed=0):
        st = self.stats
        bl = self.blacklisted()
        return RunMetrics(
            sent=st.sent, delivered=st.delivered, pdr=pdr(st.sent, st.delivered),
            false_rreps=self.false_rreps(),
            poisoned_nodes=max(self.poison_samples, default=0),
            blacklisted=bl, detection_time=st.detection_time,
            control_packets={k: v for k, v in sorted(self.sim.tx_counts.items()) if k != "DATA"},
            attacker_dropped=st.attacker_dropped, overflow_dropped=st.overflow_dropped,
            link_lost=st.link_lost, in_flight=self.in_flight(),
            blackholes_found=st.verdicts.get("blackholes", 0),
            honest_blacklisted=len(bl - set(self.attackers)), seed=seed,
            verdicts=dict(sorted(st.verdicts.items())))


def params_from(cfg):
    return ProtocolParams(cfg.route_lifetime, cfg.discovery_timeout, cfg.discovery_retries,
                          cfg.buffer_cap, cfg.frp_timeout, cfg.hop_budget, cfg.seq_boost,
                          cfg.share_dri)


def build(cfg, trace=None):
    """Build the Network for a ScenarioConfig without running it.

    Placement, attacker identities and flows depend only on the seed and
    the shared parameters, so the three protocol variants of one seed see
    the same nodes, attackers and flows.
    """
    seed = cfg.seed
    place = random.Random(f"{seed}/placement")
    positions = [(place.uniform(0.0, cfg.area_width), place.uniform(0.0, cfg.area_height))
                 for _ in range(cfg.node_count)]
    attacker_ids = sorted(place.sample(range(cfg.node_count), cfg.attacker_count))
    honest = [i for i in range(cfg.node_count) if i not in attacker_ids]
    attackers = pair_attackers(attacker_ids, cfg.seq_boost) if cfg.effective_attackers else {}
    medium = MediumParams(cfg.range, cfg.per_hop_delay, cfg.broadcast_jitter_max,
                          cfg.loss_probability)
    net = Network(positions, medium=medium, params=params_from(cfg), attackers=attackers,
                  detection=cfg.protocol == "aodv-dri", seed=seed, area=cfg.area, trace=trace)
    net.attacker_ids = attacker_ids
    flows = generate_flows(cfg.flow_count, honest, random.Random(f"{seed}/flows"),
                           cfg.packet_rate, cfg.payload, cfg.warmup, cfg.flow_stagger,
                           stop=cfg.duration - cfg.drain)
    if not cfg.static:
        net.sim.enable_mobility(cfg.v_min, cfg.v_max, cfg.pause, cfg.mobility_tick)
    for f in flows:
        net.add_flow(f)
    net.schedule_sampling(cfg.sample_interval, cfg.duration)
    return net


def run_scenario(cfg, trace=None):
    net = build(cfg, trace)
    net.run(cfg.duration)
    net.finish()
    return net.metrics(cfg.seed)
