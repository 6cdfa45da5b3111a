"""Data-routing-information table and the cross-checking defence.

A source that receives a route reply from an intermediate node it has
never sent data through asks the claimed next hop (over a path avoiding
every suspect) what it knows about the replier. The walk follows claimed
next hops until it meets a node the source has itself routed data
through; that node's answer decides whether the chain is lying.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .messages import ZERO_DRI, Alarm, DriEntry, Frp, Frq


class DriTable:
    """Per-neighbour (From, Through) bits. Missing rows read as ``00``.

    A Through bit can come from real forwarding or from a successful
    cross-check (``mark_verified``). Both count for the owner's own trust
    decisions, but ``reported`` only exposes what the data plane observed,
    so a neighbour that was verified yet never sent data to is not
    described to others as one that was.
    """

    def __init__(self, owner):
        self.owner = owner
        self._from = set()
        self._through = set()
        self._sent = set()

    def get(self, node):
        return DriEntry(int(node in self._from), int(node in self._through))

    def reported(self, node):
        return DriEntry(int(node in self._from), int(node in self._sent))

    def record_from(self, prev_hop):
        if prev_hop is not None and prev_hop != self.owner:
            self._from.add(prev_hop)

    def record_through(self, next_hop):
        if next_hop is not None and next_hop != self.owner:
            self._through.add(next_hop)
            self._sent.add(next_hop)

    def mark_verified(self, node):
        if node is not None and node != self.owner:
            self._through.add(node)

    def items(self):
        return [(n, self.get(n)) for n in sorted(self._from | self._through)]

    def dump(self):
        return "\n".join(f"{n} {e.from_bit} {e.through_bit}" for n, e in self.items())


def record_data_from(node, prev_hop):
    node.dri.record_from(prev_hop)


def record_data_through(node, next_hop):
    node.dri.record_through(next_hop)


class Blacklist:
    def __init__(self):
        self.ids = set()
        self.first_marked = {}

    def __contains__(self, node):
        return node in self.ids  # hot paths test ``.ids`` directly

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(sorted(self.ids))

    def add(self, node, t):
        if node not in self.ids:
            self.ids.add(node)
            self.first_marked[node] = t


class Verdict(enum.Enum):
    SECURE = "secure"
    BLACKHOLES_FOUND = "blackholes"
    CONTINUE = "continue"
    UNVERIFIABLE = "unverifiable"
    ABORTED = "aborted"


@dataclass(eq=False)
class CrossCheckSession:
    session_id: int
    origin: int
    destination: int
    rrep_generator: int
    current_in: int
    current_in_claimed_dri: Optional[DriEntry]
    current_nhn: Optional[int]
    hop_budget: int
    rrep: object = None
    prev_hop: Optional[int] = None
    suspects: list = field(default_factory=list)
    reverse_path: list = field(default_factory=list)
    probe_id: Optional[int] = None
    probe_retries: int = 0
    timer: object = None
    verdict: Optional[Verdict] = None
    reason: str = ""
    started: float = 0.0


def handle_frq(node, frq):
    """Truthful answer of ``node`` to a further request."""
    nh = None
    nh_dri = None
    e = node.routes.lookup(frq.destination, node.sim.now)
    if e is not None:
        nh = e.next_hop
        nh_dri = node.dri.reported(nh)
    return Frp(frq.origin, frq.session_id, node.id, node.dri.reported(frq.queried_in), nh, nh_dri)


class CrossChecker:
    """Defence state held by one honest node acting as source."""

    def __init__(self, node):
        self.node = node
        self.sessions = {}
        self._probes = {}
        self._next_session = 0
        self._next_alarm = 0
        self.verified = set()
        self.hints = set()

    @property
    def stats(self):
        return self.node.stats

    def is_reliable(self, candidate):
        if self.node.dri.get(candidate).through_bit == 1:
            return True
        return self.node.params.share_dri and candidate in self.hints

    def update_dri_secure(self, in_node):
        self.node.dri.mark_verified(in_node)

    # -- route replies --------------------------------------------------------

    def on_rrep(self, rrep, prev_hop):
        session = self._probes.get(rrep.rreq_id)
        if session is not None:
            self._probe_answered(session, rrep)
            return
        result = self.on_rrep_received(rrep, prev_hop)
        if result is Verdict.SECURE:
            self.node.accept_route(rrep, prev_hop)

    def on_rrep_received(self, rrep, prev_hop=None):
        """Returns ``Verdict.SECURE``, a started session, or None if ignored."""
        node = self.node
        if rrep.responder in node.blacklist:
            return None
        if rrep.responder == rrep.destination or self.is_reliable(rrep.responder):
            return Verdict.SECURE
        if node.routes.lookup(rrep.destination, node.sim.now) is not None:
            # a usable route already exists; late unverified replies are dropped
            return None
        for s in self.sessions.values():
            if s.rrep_generator == rrep.responder and s.destination == rrep.destination:
                return None
        self._next_session += 1
        s = CrossCheckSession(
            session_id=self._next_session, origin=node.id, destination=rrep.destination,
            rrep_generator=rrep.responder, current_in=rrep.responder,
            current_in_claimed_dri=rrep.responder_dri_for_next_hop,
            current_nhn=rrep.responder_next_hop, hop_budget=node.params.hop_budget,
            rrep=rrep, prev_hop=prev_hop, suspects=[rrep.responder],
            reverse_path=[rrep.responder], started=node.sim.now)
        self.sessions[s.session_id] = s
        self.stats.session_started(s)
        if s.current_nhn is None or s.current_nhn == node.id:
            self._finish(s, Verdict.UNVERIFIABLE, reason="no next hop")
        else:
            self.send_frq(s)
        return s

    # -- FRq dispatch -----------------------------------------------------------

    def send_frq(self, s):
        """Discover a suspect-avoiding path to the current next hop, then query it."""
        s.probe_retries = self.node.params.discovery_retries
        self._probe(s)

    def _probe(self, s):
        node = self.node
        rreq = node.make_rreq(s.current_nhn, excluded=frozenset(s.suspects), dest_only=True)
        s.probe_id = rreq.rreq_id
        self._probes[rreq.rreq_id] = s
        node.sim.broadcast(node.id, rreq)
        s.timer = node.sim.schedule_in(node.params.discovery_timeout, self._probe_timeout, s,
                                       rreq.rreq_id, node=node.id)

    def _probe_timeout(self, s, probe_id):
        if s.verdict is not None or s.probe_id != probe_id:
            return
        self._probes.pop(probe_id, None)
        if s.probe_retries > 0:
            s.probe_retries -= 1
            self._probe(s)
        else:
            self._finish(s, Verdict.UNVERIFIABLE, reason="no path")

    def _probe_answered(self, s, rrep):
        node = self.node
        if s.verdict is not None or rrep.responder != s.current_nhn:
            return
        path = rrep.path
        if len(path) < 2 or path[0] != node.id or path[-1] != s.current_nhn:
            return
        if any(p in s.suspects for p in path):
            return
        del self._probes[rrep.rreq_id]
        s.probe_id = None
        s.timer.cancel()
        frq = Frq(node.id, s.current_nhn, s.current_in, s.destination, s.session_id, path, 0)
        if not node.sim.unicast(node.id, path[1], frq):
            self._finish(s, Verdict.UNVERIFIABLE, reason="link broken")
            return
        s.timer = node.sim.schedule_in(node.params.frp_timeout, self._frp_timeout, s,
                                       s.current_nhn, node=node.id)

    def _frp_timeout(self, s, nhn):
        if s.verdict is None and s.probe_id is None and s.current_nhn == nhn:
            self._finish(s, Verdict.UNVERIFIABLE, reason="frp timeout")

    # -- FRp evaluation ---------------------------------------------------------

    def on_frp(self, frp):
        s = self.sessions.get(frp.session_id)
        if s is None or s.verdict is not None or s.probe_id is not None:
            return
        if frp.responder != s.current_nhn:
            return
        s.timer.cancel()
        self.evaluate_frp(s, frp)

    def evaluate_frp(self, s, frp):
        if self.is_reliable(frp.responder):
            claimed = s.current_in_claimed_dri
            if claimed is not None and claimed.through_bit == 1 and frp.dri_for_in.from_bit == 0:
                self.mark_blackholes(s)
                return Verdict.BLACKHOLES_FOUND
            self._finish(s, Verdict.SECURE)
            self.update_dri_secure(s.current_in)
            self.update_dri_secure(s.rrep_generator)
            self.verified.add(s.rrep_generator)
            if (self.node.params.share_dri and frp.responder_next_hop is not None
                    and frp.dri_for_responder_next_hop is not None
                    and frp.dri_for_responder_next_hop.through_bit == 1):
                self.hints.add(frp.responder_next_hop)
            rrep = s.rrep
            if rrep is not None and rrep.responder not in self.node.blacklist:
                self.node.accept_route(rrep, s.prev_hop)
            return Verdict.SECURE
        s.suspects.append(s.current_nhn)
        s.reverse_path.append(s.current_nhn)
        s.current_in = s.current_nhn
        s.current_in_claimed_dri = frp.dri_for_responder_next_hop
        s.current_nhn = frp.responder_next_hop
        s.hop_budget -= 1
        if s.hop_budget <= 0:
            reason = "hop budget"
        elif s.current_nhn is None:
            reason = "no next hop"
        elif s.current_nhn in s.suspects or s.current_nhn == self.node.id:
            reason = "loop"
        else:
            self.stats.session_step(s)
            self.send_frq(s)
            return Verdict.CONTINUE
        self._finish(s, Verdict.UNVERIFIABLE, reason=reason)
        return Verdict.UNVERIFIABLE

    def mark_blackholes(self, s):
        """Every node on the claimed chain from the replier to ``current_in``."""
        ids = set(s.reverse_path)
        self._finish(s, Verdict.BLACKHOLES_FOUND, ids)
        node = self.node
        node.apply_blacklist(ids)
        self.broadcast_alarm(ids)
        return ids

    def broadcast_alarm(self, ids):
        if not ids:
            raise ValueError("alarm needs at least one id")
        node = self.node
        self._next_alarm += 1
        alarm = Alarm(node.id, frozenset(ids), self._next_alarm)
        node._alarms_seen.add((node.id, self._next_alarm))
        node.sim.broadcast(node.id, alarm)

    def abort_involving(self, ids):
        for s in list(self.sessions.values()):
            if s.verdict is None and (ids & set(s.suspects) or s.current_nhn in ids):
                self._finish(s, Verdict.ABORTED)

    def _finish(self, s, verdict, found=None, reason=""):
        if s.verdict is not None:
            return
        s.verdict = verdict
        s.reason = reason
        if s.timer is not None:
            s.timer.cancel()
        if s.probe_id is not None:
            self._probes.pop(s.probe_id, None)
            s.probe_id = None
        self.sessions.pop(s.session_id, None)
        self.stats.session_verdict(s, verdict, found, self.node.sim.now)

    def close_all(self, reason="run ended"):
        """Resolve whatever is still open when the run stops."""
        for s in list(self.sessions.values()):
            self._finish(s, Verdict.UNVERIFIABLE, reason=reason)

    def active(self):
        return [s for s in self.sessions.values() if s.verdict is None]
