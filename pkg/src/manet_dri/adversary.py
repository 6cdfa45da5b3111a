"""Cooperative black hole nodes."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .aodv import AodvNode
from .messages import DriEntry, Frp, Rrep

VOUCH = DriEntry(1, 1)
CLAIM_THROUGH = DriEntry(0, 1)


@dataclass(frozen=True)
class AttackerConfig:
    node: int
    role: str = "primary"  # "primary" | "colluder"
    partner: Optional[int] = None
    fabricated_seq_boost: int = 30
    # nodes this attacker lies for when asked by a further request
    vouch_for: frozenset = frozenset()
    # next hop named in a collusive reply; None draws a random honest neighbour
    frp_next_hop: Optional[int] = None


def pair_attackers(ids, boost=30):
    """Pair attackers in order; an odd one out works alone."""
    ids = list(ids)
    cfgs = {}
    for k in range(0, len(ids) - 1, 2):
        a, b = ids[k], ids[k + 1]
        cfgs[a] = AttackerConfig(a, "primary", b, boost, frozenset({b}))
        cfgs[b] = AttackerConfig(b, "colluder", a, boost, frozenset({a}))
    if len(ids) % 2:
        a = ids[-1]
        cfgs[a] = AttackerConfig(a, "primary", None, boost)
    return cfgs


def chain_attackers(ids, boost=30):
    """Colluding chain B1 -> B2 -> ... -> Bk, each vouching for its predecessor."""
    ids = list(ids)
    cfgs = {}
    for k, a in enumerate(ids):
        nxt = ids[k + 1] if k + 1 < len(ids) else None
        prev = frozenset({ids[k - 1]}) if k > 0 else frozenset()
        role = "primary" if k == 0 else "colluder"
        cfgs[a] = AttackerConfig(a, role, nxt, boost, prev, nxt)
    return cfgs


class BlackholeNode(AodvNode):
    """Answers every route request with a forged fresh route, then drops data."""

    malicious = True

    def __init__(self, nid, sim, config, params=None, stats=None, accomplices=()):
        super().__init__(nid, sim, params, stats, detection=False)
        self.config = config
        self.accomplices = frozenset(accomplices) | {nid}
        self.forged_rreps = 0
        self.dropped = 0
        self.rng = sim.rng(f"attacker-{nid}")

    def count_false_rrep(self):
        return self.forged_rreps

    def _random_honest_neighbor(self, exclude=()):
        cands = [n for n in self.sim.neighbors(self.id)
                 if n not in self.accomplices and n not in exclude]
        if not cands:
            return None
        return cands[self.rng.randrange(len(cands))]

    def handle_rreq(self, rreq, prev_hop):
        key = (rreq.origin, rreq.rreq_id)
        if key in self._seen:
            return
        self._seen[key] = rreq.hop_count
        if self.id in rreq.excluded or rreq.origin == self.id:
            return
        now = self.sim.now
        self.routes.offer(rreq.origin, prev_hop, rreq.hop_count + 1, rreq.origin_seq,
                          now + self.params.route_lifetime, now)
        if rreq.destination == self.id:
            self.reply_as_destination(rreq)
            return
        self.send_rrep(self.forge_rrep(rreq))

    def forge_rrep(self, rreq):
        nh = self.config.partner
        if nh is None:
            nh = self._random_honest_neighbor(exclude=(rreq.origin,))
        self.forged_rreps += 1
        if self.stats is not None:
            self.stats.forged_rrep(self.id)
        path = rreq.path + (self.id,) if rreq.dest_only else ()
        return Rrep(rreq.destination, rreq.dest_seq_known + self.config.fabricated_seq_boost,
                    1, rreq.origin, self.id, rreq.rreq_id, nh, CLAIM_THROUGH, path, forged=True)

    def handle_rrep(self, rrep, prev_hop):
        pass

    def handle_rerr(self, rerr, prev_hop):
        pass

    def handle_alarm(self, alarm, prev_hop):
        pass

    def handle_frp(self, frp, prev_hop):
        pass

    def link_broken(self, next_hop):
        self.routes.invalidate_via(next_hop, self.sim.now)

    def handle_data(self, pkt, prev_hop):
        pkt.hop_trace.append(self.id)
        # keep a real From row so honest-looking answers stay consistent
        self.dri.record_from(prev_hop)
        if pkt.destination == self.id:
            self.stats.record_delivered(pkt)
            return
        self.drop_data(pkt)

    def drop_data(self, pkt):
        self.dropped += 1
        self.stats.attacker_drop(pkt)

    def handle_frq(self, frq, prev_hop):
        idx = frq.hop + 1
        if frq.target != self.id or idx >= len(frq.path) or frq.path[idx] != self.id:
            return
        frp = self.answer_frq(frq)
        back = tuple(reversed(frq.path))
        self.sim.unicast(self.id, back[1], replace(frp, path=back, hop=1))

    def answer_frq(self, frq):
        if frq.queried_in in self.config.vouch_for:
            return self.collude_frp(frq)
        return super().answer_frq(frq)

    def collude_frp(self, frq):
        nh = self.config.frp_next_hop
        if nh is None:
            nh = self._random_honest_neighbor(exclude=(frq.origin,))
        if nh is None:
            nh = frq.destination
        return Frp(frq.origin, frq.session_id, self.id, VOUCH, nh, CLAIM_THROUGH)
