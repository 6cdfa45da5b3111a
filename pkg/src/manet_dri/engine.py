"""Discrete-event scheduler, unit-disk medium and random-waypoint mobility."""
from __future__ import annotations

import heapq
import random
from array import array
from dataclasses import dataclass

from . import geometry
from .geometry import within


class SimulationError(RuntimeError):
    """Raised on misuse of the engine (e.g. scheduling into the past)."""


@dataclass(frozen=True)
class MediumParams:
    range: float = 200.0
    per_hop_delay: float = 0.002
    broadcast_jitter_max: float = 0.010
    loss_probability: float = 0.0

    def __post_init__(self):
        if not self.range > 0:
            raise ValueError("range must be positive")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError("loss_probability must lie in [0, 1]")


class Event:
    """Handle on a queued entry ``[time, seq, fn, args, kind, node]``.

    Cancelling clears ``fn`` in place; the loop skips such entries.
    """

    __slots__ = ("_e",)

    def __init__(self, entry):
        self._e = entry

    time = property(lambda self: self._e[0])
    seq = property(lambda self: self._e[1])
    fn = property(lambda self: self._e[2])
    args = property(lambda self: self._e[3])
    kind = property(lambda self: self._e[4])
    node = property(lambda self: self._e[5])

    @property
    def cancelled(self):
        return self._e[2] is None

    def cancel(self):
        self._e[2] = None


def _stream_seed(seed, name):
    return f"{seed}/{name}"


class RandomWaypoint:
    """Random waypoint with a strictly positive minimum speed.

    Positions live in ``array('d')`` buffers shared with the simulator so the
    geometry kernels can work on them in place.
    """

    def __init__(self, xs, ys, area, v_min, v_max, pause_time, rng, tick=0.1):
        if v_min <= 0:
            raise ValueError("v_min must be > 0")
        if v_max < v_min:
            raise ValueError("v_max must be >= v_min")
        self.xs = xs
        self.ys = ys
        self.width, self.height = area
        self.v_min = v_min
        self.v_max = v_max
        self.pause_time = pause_time
        self.rng = rng
        self.tick = tick
        n = len(xs)
        self.wx = array("d", bytes(8 * n))
        self.wy = array("d", bytes(8 * n))
        self.speed = array("d", bytes(8 * n))
        self.pause = array("d", bytes(8 * n))
        for i in range(n):
            self.new_leg(i)

    def new_leg(self, i):
        rng = self.rng
        self.wx[i] = rng.uniform(0.0, self.width)
        self.wy[i] = rng.uniform(0.0, self.height)
        self.speed[i] = rng.uniform(self.v_min, self.v_max)

    def step(self, dt):
        for i in geometry.advance(self.xs, self.ys, self.wx, self.wy, self.speed,
                                  self.pause, dt, self.pause_time, self.width, self.height):
            self.new_leg(i)

    def mobility_step(self, node, dt):
        """Advance a single node; used for unit checks of the kinematics."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        sl = slice(node, node + 1)
        xs, ys = array("d", self.xs[sl]), array("d", self.ys[sl])
        wx, wy = array("d", self.wx[sl]), array("d", self.wy[sl])
        sp, pa = array("d", self.speed[sl]), array("d", self.pause[sl])
        expired = geometry.advance(xs, ys, wx, wy, sp, pa, dt, self.pause_time,
                                   self.width, self.height)
        self.xs[node], self.ys[node], self.pause[node] = xs[0], ys[0], pa[0]
        if expired:
            self.new_leg(node)


class Simulator:
    """Single-threaded deterministic event loop hosting node behaviours.

    ``trace`` may be a list (or anything with ``append``) that receives one
    line per fired event.
    """

    def __init__(self, positions, medium=None, area=(1000.0, 1000.0), seed=0, trace=None):
        self.medium = medium or MediumParams()
        self.area = area
        self.seed = seed
        self.now = 0.0
        self._queue = []
        self._seq = 0
        self.xs = array("d", [float(p[0]) for p in positions])
        self.ys = array("d", [float(p[1]) for p in positions])
        self.n = len(positions)
        self._r2 = self.medium.range * self.medium.range
        self.nodes = []
        self.trace = trace
        self.mobility = None
        self.tx_counts = {}
        self.lost_frames = 0
        self.on_data_lost = None
        self._streams = {}
        self._medium_rng = self.rng("medium")
        self.fired = 0

    def rng(self, name):
        """Independent seeded stream for one purpose (medium, mobility, ...)."""
        r = self._streams.get(name)
        if r is None:
            r = self._streams[name] = random.Random(_stream_seed(self.seed, name))
        return r

    def attach(self, nodes):
        if len(nodes) != self.n:
            raise SimulationError("node count does not match positions")
        self.nodes = list(nodes)

    def enable_mobility(self, v_min, v_max, pause_time, tick=0.1):
        self.mobility = RandomWaypoint(self.xs, self.ys, self.area, v_min, v_max,
                                       pause_time, self.rng("mobility"), tick)
        self.schedule(tick, self._mobility_tick, kind="MOBILITY")

    def _mobility_tick(self):
        self.mobility.step(self.mobility.tick)
        self.schedule(self.now + self.mobility.tick, self._mobility_tick, kind="MOBILITY")

    # -- scheduling -------------------------------------------------------

    def schedule(self, time, fn, *args, kind="TIMER", node=None):
        if time < self.now:
            raise SimulationError(f"cannot schedule at t={time} before now={self.now}")
        self._seq = seq = self._seq + 1
        entry = [time, seq, fn, args, kind, node]
        heapq.heappush(self._queue, entry)
        return Event(entry)

    def schedule_in(self, delay, fn, *args, kind="TIMER", node=None):
        return self.schedule(self.now + delay, fn, *args, kind=kind, node=node)

    def run_until(self, t_end):
        q = self._queue
        trace = self.trace
        pop = heapq.heappop
        fired = 0
        while q and q[0][0] <= t_end:
            entry = pop(q)
            fn = entry[2]
            if fn is None:
                continue
            self.now = entry[0]
            fired += 1
            if trace is not None:
                trace.append(self._trace_line(entry))
            fn(*entry[3])
        self.fired += fired
        if t_end > self.now:
            self.now = t_end

    def pending_events(self):
        return [Event(e) for e in sorted(self._queue) if e[2] is not None]

    def _trace_line(self, entry):
        t, _, fn, args, kind, node = entry
        node = "-" if node is None else node
        if kind == "DELIVER":
            msg, sender = args
            detail = f"from={sender} {msg.summary()}"
        elif kind == "MOBILITY":
            detail = "tick"
        else:
            detail = getattr(fn, "__name__", "event")
        return f"t={t!r} node={node} kind={kind} detail={detail}"

    # -- medium -----------------------------------------------------------

    def position(self, node):
        return (self.xs[node], self.ys[node])

    def neighbors(self, node, t=None):
        """Nodes within radio range of ``node`` (boundary inclusive)."""
        if not 0 <= node < self.n:
            raise SimulationError(f"unknown node {node}")
        return geometry.neighbors(self.xs, self.ys, node, self._r2)

    def in_range(self, a, b):
        return geometry.within(self.xs, self.ys, a, b, self._r2)

    def _count(self, msg):
        k = msg.KIND
        self.tx_counts[k] = self.tx_counts.get(k, 0) + 1

    def _lost(self, msg):
        self.lost_frames += 1
        if msg.KIND == "DATA" and self.on_data_lost is not None:
            self.on_data_lost(msg)

    def broadcast(self, sender, msg):
        self._count(msg)
        m = self.medium
        rng = self._medium_rng
        base = self.now + m.per_hop_delay
        loss = m.loss_probability
        jitter = m.broadcast_jitter_max
        nodes = self.nodes
        q = self._queue
        push = heapq.heappush
        kind = type(msg)
        args = (msg, sender)
        rand = rng.random
        seq = self._seq
        for nb in geometry.neighbors(self.xs, self.ys, sender, self._r2):
            if loss > 0.0 and rand() < loss:
                self._lost(msg)
                continue
            # same value as rng.uniform(0.0, jitter), without the call overhead
            t = base + jitter * rand() if jitter > 0.0 else base
            seq += 1
            push(q, [t, seq, nodes[nb]._handlers[kind], args, "DELIVER", nb])
        self._seq = seq

    def unicast(self, sender, receiver, msg):
        """Returns False (link broken) when ``receiver`` is out of range.

        Frames lost to ``loss_probability`` still report True: the loss is
        invisible at the link layer.
        """
        if not within(self.xs, self.ys, sender, receiver, self._r2):
            return False
        tc = self.tx_counts
        k = msg.KIND
        tc[k] = tc.get(k, 0) + 1
        m = self.medium
        if m.loss_probability > 0.0 and self._medium_rng.random() < m.loss_probability:
            self._lost(msg)
            return True
        self._seq += 1
        heapq.heappush(self._queue, [self.now + m.per_hop_delay, self._seq,
                                     self.nodes[receiver]._handlers[type(msg)], (msg, sender),
                                     "DELIVER", receiver])
        return True
