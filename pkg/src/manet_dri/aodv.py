"""On-demand distance-vector routing state machine."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

from .dri import Blacklist, CrossChecker, DriTable, handle_frq
from .messages import Alarm, DataPacket, Frp, Frq, Rerr, Rrep, Rreq


@dataclass(frozen=True)
class ProtocolParams:
    route_lifetime: float = 10.0
    discovery_timeout: float = 1.0
    discovery_retries: int = 2
    buffer_cap: int = 64
    frp_timeout: float = 2.0
    hop_budget: int = 8
    seq_boost: int = 30
    share_dri: bool = False


@dataclass(slots=True)
class RouteEntry:
    destination: int
    next_hop: int
    hop_count: int
    dest_seq: int
    lifetime_expiry: float
    valid: bool = True

    def active(self, now):
        return self.valid and self.lifetime_expiry > now


def select_route(candidates):
    """Best route: highest sequence number, then fewest hops, then lowest next hop."""
    if not candidates:
        raise ValueError("select_route needs at least one candidate")
    return max(candidates, key=lambda r: (r.dest_seq, -r.hop_count, -r.next_hop))


class RoutingTable:
    def __init__(self, owner):
        self.owner = owner
        self.entries = {}

    def __contains__(self, dest):
        return dest in self.entries

    def get(self, dest):
        return self.entries.get(dest)

    def lookup(self, dest, now):
        e = self.entries.get(dest)
        if e is not None and e.valid and e.lifetime_expiry > now:
            return e
        return None

    def offer(self, dest, next_hop, hop_count, dest_seq, expiry, now):
        """Install or update a route; returns True if the table changed.

        An entry is only overwritten by a higher sequence number, or by an
        equal one with fewer hops (or when the current entry is inactive).
        """
        if dest == self.owner:
            return False
        e = self.entries.get(dest)
        if e is None:
            self.entries[dest] = RouteEntry(dest, next_hop, hop_count, dest_seq, expiry)
            return True
        if dest_seq > e.dest_seq or (dest_seq == e.dest_seq and (
                hop_count < e.hop_count or not e.active(now))):
            e.next_hop = next_hop
            e.hop_count = hop_count
            e.dest_seq = dest_seq
            e.lifetime_expiry = expiry
            e.valid = True
            return True
        if (dest_seq == e.dest_seq and hop_count == e.hop_count and next_hop == e.next_hop):
            e.lifetime_expiry = max(e.lifetime_expiry, expiry)
        return False

    def invalidate_via(self, next_hop, now):
        """Invalidate active routes through ``next_hop``; returns (dest, seq) pairs.

        The sequence number of each lost route is bumped so that replies
        quoting the old route (possibly through this node) are not accepted.
        """
        lost = []
        for dest in sorted(self.entries):
            e = self.entries[dest]
            if e.next_hop == next_hop and e.active(now):
                e.valid = False
                e.dest_seq += 1
                lost.append((dest, e.dest_seq))
        return lost

    def dump(self, now=None):
        """One row per entry, ordered by destination id."""
        rows = []
        for dest in sorted(self.entries):
            e = self.entries[dest]
            valid = e.valid if now is None else e.active(now)
            rows.append(f"{dest} {e.next_hop} {e.hop_count} {e.dest_seq} "
                        f"{e.lifetime_expiry:.6f} {int(valid)}")
        return "\n".join(rows)


class Discovery:
    __slots__ = ("dest", "rreq_id", "retries_left", "timer")

    def __init__(self, dest, retries):
        self.dest = dest
        self.rreq_id = None
        self.retries_left = retries
        self.timer = None


class AodvNode:
    """Honest node. ``detection`` switches on the DRI cross-check defence."""

    malicious = False

    def __init__(self, nid, sim, params=None, stats=None, detection=False):
        self.id = nid
        self.sim = sim
        self.params = params or ProtocolParams()
        self._lifetime = self.params.route_lifetime
        self.stats = stats
        self.seq = 0
        self._rreq_id = 0
        self.routes = RoutingTable(nid)
        self._seen = {}  # (origin, rreq_id) -> fewest hops heard
        self._buffers = {}
        self._pending = {}
        self.dri = DriTable(nid)
        self.blacklist = Blacklist()
        self.detector = CrossChecker(self) if detection else None
        self._alarms_seen = set()
        self._handlers = {
            Rreq: self.handle_rreq,
            Rrep: self.handle_rrep,
            Rerr: self.handle_rerr,
            DataPacket: self.handle_data,
            Frq: self.handle_frq,
            Frp: self.handle_frp,
            Alarm: self.handle_alarm,
        }

    def __repr__(self):
        return f"<{type(self).__name__} {self.id}>"

    def receive(self, msg, prev_hop):
        self._handlers[type(msg)](msg, prev_hop)

    # -- discovery ----------------------------------------------------------

    def next_rreq_id(self):
        self._rreq_id += 1
        return self._rreq_id

    def make_rreq(self, dest, excluded=frozenset(), dest_only=False):
        self.seq += 1
        rid = self.next_rreq_id()
        entry = self.routes.get(dest)
        rreq = Rreq(self.id, self.seq, rid, dest, entry.dest_seq if entry else 0, 0,
                    frozenset(excluded), dest_only, (self.id,) if dest_only else ())
        self._seen[(self.id, rid)] = -1
        return rreq

    def has_pending(self, dest):
        return dest in self._pending

    def originate_discovery(self, dest):
        if dest in self._pending:
            return
        d = self._pending[dest] = Discovery(dest, self.params.discovery_retries)
        self._send_discovery(d)

    def _send_discovery(self, d):
        rreq = self.make_rreq(d.dest)
        d.rreq_id = rreq.rreq_id
        self.sim.broadcast(self.id, rreq)
        d.timer = self.sim.schedule_in(self.params.discovery_timeout, self._discovery_timeout,
                                       d, node=self.id)

    def _discovery_timeout(self, d):
        if self._pending.get(d.dest) is not d:
            return
        if d.retries_left > 0:
            d.retries_left -= 1
            self._send_discovery(d)
            return
        del self._pending[d.dest]
        for pkt in self._take_buffered(d.dest):
            self.stats.lost_no_route(pkt)

    def discovery_resolved(self, dest):
        d = self._pending.pop(dest, None)
        if d is not None and d.timer is not None:
            d.timer.cancel()
        self._flush(dest)

    def handle_rreq(self, rreq, prev_hop):
        bl = self.blacklist.ids
        if prev_hop in bl or rreq.origin in bl:
            return
        key = (rreq.origin, rreq.rreq_id)
        best = self._seen.get(key)
        if best is not None and rreq.hop_count >= best:
            return
        # a later copy over strictly fewer hops is processed again, so the
        # reverse route and the destination's reply converge on a shortest path
        self._seen[key] = rreq.hop_count
        if self.id in rreq.excluded or rreq.origin == self.id:
            return
        now = self.sim.now
        self.routes.offer(rreq.origin, prev_hop, rreq.hop_count + 1, rreq.origin_seq,
                          now + self.params.route_lifetime, now)
        if rreq.destination == self.id:
            self.reply_as_destination(rreq)
            return
        if not rreq.dest_only:
            e = self.routes.lookup(rreq.destination, now)
            if (e is not None and e.dest_seq >= rreq.dest_seq_known
                    and e.next_hop not in rreq.excluded and e.next_hop != prev_hop
                    and e.next_hop not in bl):
                if self.detector is not None:
                    nh, nh_dri = e.next_hop, self.dri.reported(e.next_hop)
                else:
                    nh = nh_dri = None
                self.send_rrep(Rrep(rreq.destination, e.dest_seq, e.hop_count, rreq.origin,
                                    self.id, rreq.rreq_id, nh, nh_dri))
                return
        self.sim.broadcast(self.id, rreq.relayed(self.id))

    def reply_as_destination(self, rreq):
        if rreq.dest_seq_known > self.seq:
            self.seq = rreq.dest_seq_known
        path = rreq.path + (self.id,) if rreq.dest_only else ()
        self.send_rrep(Rrep(self.id, self.seq, 0, rreq.origin, self.id, rreq.rreq_id, path=path))

    def send_rrep(self, rrep):
        rev = self.routes.lookup(rrep.origin, self.sim.now)
        if rev is None:
            return False
        if self.sim.unicast(self.id, rev.next_hop, rrep):
            return True
        self.link_broken(rev.next_hop)
        return False

    def handle_rrep(self, rrep, prev_hop):
        if prev_hop in self.blacklist or rrep.responder in self.blacklist:
            return
        if rrep.origin == self.id:
            if self.detector is not None:
                self.detector.on_rrep(rrep, prev_hop)
            else:
                self.accept_route(rrep, prev_hop)
            return
        now = self.sim.now
        self.routes.offer(rrep.destination, prev_hop, rrep.hop_count + 1, rrep.dest_seq,
                          now + self.params.route_lifetime, now)
        self.send_rrep(rrep.relayed())

    def accept_route(self, rrep, prev_hop):
        """Install the forward route carried by ``rrep`` at its origin."""
        now = self.sim.now
        self.routes.offer(rrep.destination, prev_hop, rrep.hop_count + 1, rrep.dest_seq,
                          now + self.params.route_lifetime, now)
        if self.routes.lookup(rrep.destination, now) is not None:
            self.discovery_resolved(rrep.destination)

    # -- maintenance --------------------------------------------------------

    def link_broken(self, next_hop):
        lost = self.routes.invalidate_via(next_hop, self.sim.now)
        if lost:
            self.sim.broadcast(self.id, Rerr(tuple(lost)))

    def handle_rerr(self, rerr, prev_hop):
        now = self.sim.now
        gone = []
        for dest, seq in rerr.unreachable:
            e = self.routes.get(dest)
            if e is not None and e.next_hop == prev_hop and e.active(now) and e.dest_seq <= seq:
                e.valid = False
                e.dest_seq = seq
                gone.append((dest, seq))
        if gone:
            self.sim.broadcast(self.id, Rerr(tuple(gone)))

    # -- data plane -----------------------------------------------------------

    def originate_data(self, pkt):
        pkt.hop_trace.append(self.id)
        self.stats.record_sent(pkt)
        self.forward_data(pkt)

    def handle_data(self, pkt, prev_hop):
        self.dri._from.add(prev_hop)  # record_from, inlined: runs once per data hop
        pkt.hop_trace.append(self.id)
        if pkt.destination == self.id:
            self.stats.record_delivered(pkt)
            return
        self.forward_data(pkt)

    def forward_data(self, pkt):
        dest = pkt.destination
        now = self.sim.now
        e = self.routes.entries.get(dest)
        if e is not None and not (e.valid and e.lifetime_expiry > now):
            e = None
        if e is not None and e.next_hop in self.blacklist.ids:
            e.valid = False
            e = None
        if e is None:
            self._buffer(pkt)
            self.originate_discovery(dest)
            return
        nh = e.next_hop
        if self.sim.unicast(self.id, nh, pkt):
            e.lifetime_expiry = now + self._lifetime
            dri = self.dri  # record_through, inlined
            dri._through.add(nh)
            dri._sent.add(nh)
            return
        self.link_broken(nh)
        self._buffer(pkt)
        self.originate_discovery(dest)

    def _buffer(self, pkt):
        flows = self._buffers.setdefault(pkt.destination, {})
        q = flows.get(pkt.flow_id)
        if q is None:
            q = flows[pkt.flow_id] = deque()
        q.append(pkt)
        if len(q) > self.params.buffer_cap:
            self.stats.overflow(q.popleft())

    def _take_buffered(self, dest):
        flows = self._buffers.pop(dest, None)
        if not flows:
            return []
        out = []
        for fid in sorted(flows):
            out.extend(flows[fid])
        return out

    def _flush(self, dest):
        for pkt in self._take_buffered(dest):
            self.forward_data(pkt)

    def buffered(self):
        return [p for flows in self._buffers.values() for q in flows.values() for p in q]

    # -- defence messages -----------------------------------------------------

    def handle_frq(self, frq, prev_hop):
        idx = frq.hop + 1
        if idx >= len(frq.path) or frq.path[idx] != self.id:
            return
        if frq.target == self.id:
            frp = self.answer_frq(frq)
            back = tuple(reversed(frq.path))
            self.sim.unicast(self.id, back[1], replace(frp, path=back, hop=1))
            return
        self.sim.unicast(self.id, frq.path[idx + 1], replace(frq, hop=idx))

    def answer_frq(self, frq):
        return handle_frq(self, frq)

    def handle_frp(self, frp, prev_hop):
        if frp.origin == self.id:
            if self.detector is not None and frp.responder not in self.blacklist:
                self.detector.on_frp(frp)
            return
        idx = frp.hop
        if idx >= len(frp.path) or frp.path[idx] != self.id or idx + 1 >= len(frp.path):
            return
        self.sim.unicast(self.id, frp.path[idx + 1], replace(frp, hop=idx + 1))

    def handle_alarm(self, alarm, prev_hop):
        key = (alarm.reporter, alarm.alarm_id)
        if key in self._alarms_seen or alarm.reporter in self.blacklist:
            return
        self._alarms_seen.add(key)
        self.apply_blacklist(alarm.blackholes)
        self.sim.broadcast(self.id, alarm)

    def apply_blacklist(self, ids):
        now = self.sim.now
        fresh = [i for i in sorted(ids) if i != self.id and i not in self.blacklist]
        for i in fresh:
            self.blacklist.add(i, now)
            self.routes.invalidate_via(i, now)
        if fresh and self.detector is not None:
            self.detector.abort_involving(set(fresh))
        return fresh
