"""Messages carried over the simulated medium."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional


class DriEntry(NamedTuple):
    """(From, Through) bits a node keeps about one neighbour."""

    from_bit: int = 0
    through_bit: int = 0

    def __str__(self):
        return f"{self.from_bit}{self.through_bit}"


ZERO_DRI = DriEntry(0, 0)


@dataclass(slots=True)
class Rreq:
    KIND = "RREQ"
    origin: int
    origin_seq: int
    rreq_id: int
    destination: int
    dest_seq_known: int
    hop_count: int = 0
    excluded: frozenset = frozenset()
    # probe discoveries (cross-check) are answered by the destination only
    # and record the relay path so FRq/FRp can be source routed
    dest_only: bool = False
    path: tuple = ()

    def relayed(self, relay):
        """Copy for rebroadcast by ``relay``: one more hop, path extended for probes."""
        return Rreq(self.origin, self.origin_seq, self.rreq_id, self.destination,
                    self.dest_seq_known, self.hop_count + 1, self.excluded, self.dest_only,
                    self.path + (relay,) if self.dest_only else ())

    def summary(self):
        s = f"RREQ o={self.origin} id={self.rreq_id} d={self.destination} seq>={self.dest_seq_known} hc={self.hop_count}"
        if self.excluded:
            s += " excl=" + ",".join(map(str, sorted(self.excluded)))
        return s


@dataclass(slots=True)
class Rrep:
    KIND = "RREP"
    destination: int
    dest_seq: int
    hop_count: int
    origin: int
    responder: int
    rreq_id: int
    responder_next_hop: Optional[int] = None
    responder_dri_for_next_hop: Optional[DriEntry] = None
    path: tuple = ()
    forged: bool = False  # instrumentation only; behaviours never read it

    def relayed(self):
        return Rrep(self.destination, self.dest_seq, self.hop_count + 1, self.origin,
                    self.responder, self.rreq_id, self.responder_next_hop,
                    self.responder_dri_for_next_hop, self.path, self.forged)

    def summary(self):
        s = (f"RREP o={self.origin} d={self.destination} seq={self.dest_seq} "
             f"hc={self.hop_count} by={self.responder}")
        if self.responder_next_hop is not None:
            s += f" nh={self.responder_next_hop} dri={self.responder_dri_for_next_hop}"
        if self.forged:
            s += " forged"
        return s


@dataclass(slots=True)
class Rerr:
    KIND = "RERR"
    unreachable: tuple  # ((destination, dest_seq), ...)

    def summary(self):
        return "RERR " + ",".join(f"{d}:{s}" for d, s in self.unreachable)


@dataclass(slots=True)
class Frq:
    KIND = "FRQ"
    origin: int
    target: int
    queried_in: int
    destination: int
    session_id: int
    path: tuple
    hop: int = 0

    def summary(self):
        return f"FRQ o={self.origin} to={self.target} in={self.queried_in} s={self.session_id}"


@dataclass(slots=True)
class Frp:
    KIND = "FRP"
    origin: int
    session_id: int
    responder: int
    dri_for_in: DriEntry
    responder_next_hop: Optional[int]
    dri_for_responder_next_hop: Optional[DriEntry]
    path: tuple = ()
    hop: int = 0

    def summary(self):
        return (f"FRP o={self.origin} by={self.responder} s={self.session_id} "
                f"in={self.dri_for_in} nh={self.responder_next_hop} nhdri={self.dri_for_responder_next_hop}")


@dataclass(slots=True)
class DataPacket:
    KIND = "DATA"
    flow_id: int
    seq: int
    origin: int
    destination: int
    payload_size: int = 512
    hop_trace: list = field(default_factory=list)

    def summary(self):
        return f"DATA f={self.flow_id} n={self.seq} {self.origin}->{self.destination}"


@dataclass(slots=True)
class Alarm:
    KIND = "ALARM"
    reporter: int
    blackholes: frozenset
    alarm_id: int

    def summary(self):
        return f"ALARM by={self.reporter} id={self.alarm_id} bh=" + ",".join(map(str, sorted(self.blackholes)))


CONTROL_KINDS = ("RREQ", "RREP", "RERR", "FRQ", "FRP", "ALARM")
