from hypothesis import given, settings
from hypothesis import strategies as st

from manet_dri.adversary import chain_attackers
from manet_dri.dri import DriTable, Verdict, handle_frq, record_data_from, record_data_through
from manet_dri.engine import MediumParams
from manet_dri.messages import DriEntry, Frp, Frq, Rrep
from manet_dri.scenario import Network

from helpers import B1, B2, D, GOLDEN_POS, N2, N4, N6, S, golden_network, grid_positions


def test_table_one_rows():
    # node 4 relays data from 3 to 6: (3: 1 0), (6: 1 1) once 6 also sent to it, B2 untouched
    t = DriTable(4)
    t.record_from(3)
    t.record_through(6)
    t.record_from(6)
    assert t.get(3) == DriEntry(1, 0)
    assert t.get(6) == DriEntry(1, 1)
    assert t.get(99) == DriEntry(0, 0)
    assert t.dump() == "3 1 0\n6 1 1"


def test_owner_has_no_row():
    t = DriTable(4)
    t.record_from(4)
    t.record_through(4)
    assert t.items() == []


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("ftv"), st.integers(0, 6))))
def test_bits_never_clear(ops):
    t = DriTable(0)
    prev = {}
    for op, n in ops:
        {"f": t.record_from, "t": t.record_through, "v": t.mark_verified}[op](n)
        for k, e in prev.items():
            now = t.get(k)
            assert now.from_bit >= e.from_bit and now.through_bit >= e.through_bit
        prev = {k: t.get(k) for k in range(7)}


def test_update_secure_sets_through_only():
    t = DriTable(0)
    t.mark_verified(5)
    assert t.get(5) == DriEntry(0, 1)
    t.record_from(6)
    t.mark_verified(6)
    assert t.get(6) == DriEntry(1, 1)
    t.mark_verified(6)
    assert t.get(6) == DriEntry(1, 1)


def test_verified_bit_is_not_reported_as_data():
    t = DriTable(0)
    t.mark_verified(5)
    assert t.get(5).through_bit == 1
    assert t.reported(5) == DriEntry(0, 0)
    t.record_through(5)
    assert t.reported(5) == DriEntry(0, 1)


def line(n=3, detection=True, **kw):
    return Network([(150.0 * i, 0.0) for i in range(n)], detection=detection, **kw)


def test_forwarding_records_both_bits():
    net = line(3)
    net.send(0, 2)
    net.run(1.0)
    assert net.nodes[1].dri.get(0) == DriEntry(1, 0)
    assert net.nodes[1].dri.get(2) == DriEntry(0, 1)
    assert net.nodes[0].dri.get(1) == DriEntry(0, 1)


def test_broken_link_records_nothing():
    net = line(3)
    net.send(0, 2, seq=0)
    net.run(1.0)
    net.sim.xs[2] = 2000.0
    net.nodes[1].dri._through.discard(2)
    net.nodes[1].dri._sent.discard(2)
    net.send(0, 2, seq=1)
    net.run(net.sim.now + 0.1)
    assert net.nodes[1].dri.get(2).through_bit == 0


def test_module_level_hooks():
    net = line(2)
    record_data_from(net.nodes[0], 1)
    record_data_through(net.nodes[1], 0)
    assert net.nodes[0].dri.get(1) == DriEntry(1, 0)
    assert net.nodes[1].dri.get(0) == DriEntry(0, 1)


def test_reliability_follows_own_through_bit():
    net = line(3)
    det = net.nodes[0].detector
    assert not det.is_reliable(1)
    net.send(0, 1)
    net.run(1.0)
    assert det.is_reliable(1)


def test_sender_to_us_is_not_reliable():
    net = line(2)
    net.send(1, 0)
    net.run(1.0)
    assert net.nodes[0].dri.get(1) == DriEntry(1, 0)
    assert not net.nodes[0].detector.is_reliable(1)


def test_reply_from_destination_is_secure():
    net = line(3)
    v = net.nodes[0].detector.on_rrep_received(Rrep(2, 1, 1, 0, 2, 1))
    assert v is Verdict.SECURE
    assert "FRQ" not in net.sim.tx_counts


def test_reply_from_reliable_node_is_secure():
    net = line(3)
    net.nodes[0].dri.record_through(1)
    v = net.nodes[0].detector.on_rrep_received(Rrep(2, 1, 1, 0, 1, 1, 2, DriEntry(0, 1)))
    assert v is Verdict.SECURE


def test_unknown_intermediate_starts_session():
    net = line(4)
    s = net.nodes[0].detector.on_rrep_received(Rrep(3, 1, 1, 0, 1, 1, 2, DriEntry(0, 1)))
    assert s.current_in == 1 and s.current_nhn == 2 and s.suspects == [1]
    assert net.sim.tx_counts == {"RREQ": 1}  # probe discovery toward 2


def test_blacklisted_responder_ignored():
    net = line(3)
    net.nodes[0].apply_blacklist({1})
    assert net.nodes[0].detector.on_rrep_received(Rrep(2, 1, 1, 0, 1, 1, 2, DriEntry(0, 1))) is None


def _session(net, claimed=DriEntry(0, 1)):
    return net.nodes[0].detector.on_rrep_received(Rrep(3, 1, 1, 0, 1, 1, 2, claimed))


def test_reliable_nhn_contradicting_claim_marks_in():
    net = line(4)
    net.nodes[0].dri.record_through(2)
    s = _session(net)
    v = net.nodes[0].detector.evaluate_frp(s, Frp(0, s.session_id, 2, DriEntry(0, 0), 3, None))
    assert v is Verdict.BLACKHOLES_FOUND
    assert 1 in net.nodes[0].blacklist and len(net.nodes[0].blacklist) == 1


def test_reliable_nhn_confirming_claim_is_secure():
    net = line(4)
    net.nodes[0].dri.record_through(2)
    s = _session(net)
    v = net.nodes[0].detector.evaluate_frp(s, Frp(0, s.session_id, 2, DriEntry(1, 0), 3, None))
    assert v is Verdict.SECURE
    assert net.nodes[0].detector.is_reliable(1)
    assert len(net.nodes[0].blacklist) == 0


def test_unreliable_nhn_continues_walk():
    net = line(5)
    s = _session(net)
    v = net.nodes[0].detector.evaluate_frp(s, Frp(0, s.session_id, 2, DriEntry(1, 1), 3, DriEntry(0, 1)))
    assert v is Verdict.CONTINUE
    assert s.current_in == 2 and s.current_nhn == 3 and s.suspects == [1, 2]
    assert s.hop_budget == net.params.hop_budget - 1


def test_one_session_per_secure_pair():
    net = line(4)
    net.nodes[0].dri.record_through(2)
    s = _session(net)
    net.nodes[0].detector.evaluate_frp(s, Frp(0, s.session_id, 2, DriEntry(1, 0), 3, None))
    started = net.stats.sessions_started
    assert _session(net) is Verdict.SECURE
    assert net.stats.sessions_started == started


def test_hop_budget_exhaustion_is_unverifiable():
    from manet_dri.aodv import ProtocolParams

    net = line(5, params=ProtocolParams(hop_budget=1))
    s = _session(net)
    v = net.nodes[0].detector.evaluate_frp(s, Frp(0, s.session_id, 2, DriEntry(1, 1), 3, DriEntry(0, 1)))
    assert v is Verdict.UNVERIFIABLE
    assert len(net.nodes[0].blacklist) == 0


def test_honest_frq_answers():
    net = line(4)
    n = net.nodes[2]
    frp = handle_frq(n, Frq(0, 2, 1, 3, 1, (0, 1, 2)))
    assert frp.dri_for_in == DriEntry(0, 0) and frp.responder_next_hop is None
    n.dri.record_from(1)
    now = net.sim.now
    n.routes.offer(3, 3, 1, 1, now + 10, now)
    frp = handle_frq(n, Frq(0, 2, 1, 3, 1, (0, 1, 2)))
    assert frp.dri_for_in.from_bit == 1 and frp.responder_next_hop == 3


def test_golden_cooperative_pair_is_caught():
    net = golden_network()
    net.send(S, D)
    net.run(1.0)
    found = [f for f in net.stats.found]
    assert len(found) == 1 and found[0][2] == {B1, B2}
    assert set(net.nodes[S].blacklist) == {B1, B2}
    assert net.stats.verdicts == {"blackholes": 1, "aborted": 1}
    assert net.blacklisted() == {B1, B2}
    # session walked B1 then B2, and the probes never passed through B1
    assert any("suspects=4>5 verdict=blackholes" in a for a in net.stats.audit)


def test_golden_probe_avoids_the_suspect():
    trace = []
    net = golden_network(trace=trace)
    net.send(S, D)
    net.run(1.0)
    frq_hops = [ln for ln in trace if "FRQ" in ln and "to=5" in ln]
    senders = {int(ln.split("from=")[1].split()[0]) for ln in frq_hops}
    assert senders == {S, N2, N4}


def test_golden_traffic_flows_after_detection():
    net = golden_network()
    net.send(S, D, seq=0)
    net.run(1.0)
    pkt = net.send(S, D, seq=1)
    net.run(3.0)
    assert pkt.hop_trace == [S, N2, N4, N6, D]


def test_golden_without_defence_poisons_source():
    net = golden_network(detection=False)
    net.send(S, D)
    net.run(0.5)
    assert net.nodes[S].routes.get(D).next_hop == B1
    net.sample_poison()
    assert net.poison_samples[-1] >= 1


def test_unreachable_nhn_is_unverifiable():
    pos = list(GOLDEN_POS)
    pos[N2] = pos[N4] = (5000.0, 5000.0)
    from manet_dri.adversary import pair_attackers

    net = Network(pos, medium=MediumParams(200.0), attackers=pair_attackers([B1, B2]),
                  detection=True, seed=3, area=(6000.0, 6000.0))
    net.send(S, D)
    net.run(10.0)
    assert net.stats.verdicts == {"unverifiable": 1}
    assert "reason=no_path" in net.stats.audit[0]
    assert len(net.nodes[S].blacklist) == 0


def test_three_colluder_chain_fully_marked():
    # S-2-4-D in a line; B1 next to S, B2 and B3 hang off D
    s, n2, n4, d, b1, b2, b3 = range(7)
    pos = [(0, 0), (150, 0), (300, 0), (450, 0), (0, 150), (450, 150), (600, 0)]
    net = Network(pos, medium=MediumParams(200.0), attackers=chain_attackers([b1, b2, b3]),
                  detection=True, seed=1, area=(700.0, 300.0))
    record_data_through(net.nodes[s], d)
    net.send(s, d)
    net.run(2.0)
    assert net.stats.verdicts == {"blackholes": 1}
    assert set(net.nodes[s].blacklist) == {b1, b2, b3}
    assert "suspects=4>5>6" in net.stats.audit[0]


def test_alarm_floods_connected_network():
    net = Network(grid_positions(6, 5, 150.0), detection=True)
    ids = {28, 29}
    net.nodes[0].apply_blacklist(ids)
    net.nodes[0].detector.broadcast_alarm(ids)
    net.run(2.0)
    for n in net.nodes:
        assert set(n.blacklist) == ids - {n.id}
    assert net.sim.tx_counts["ALARM"] == 30


def test_duplicate_alarm_processed_once():
    from manet_dri.messages import Alarm

    net = line(3)
    a = Alarm(0, frozenset({2}), 1)
    net.nodes[1].handle_alarm(a, 0)
    net.nodes[1].handle_alarm(a, 0)
    assert net.sim.tx_counts["ALARM"] == 1


def test_alarm_purges_routes_through_marked_node():
    from manet_dri.messages import Alarm

    net = line(4)
    net.send(0, 3)
    net.run(1.0)
    assert net.nodes[0].routes.get(3).active(net.sim.now)
    net.nodes[0].handle_alarm(Alarm(9, frozenset({1}), 1), 1)
    assert not net.nodes[0].routes.get(3).active(net.sim.now)


def test_blacklisted_node_never_used_as_next_hop():
    net = Network(grid_positions(3, 3, 150.0), detection=True, seed=2)
    for n in net.nodes:
        n.apply_blacklist({4})
    pkts = [net.send(0, 8, seq=k) for k in range(3)]
    net.run(5.0)
    for p in pkts:
        assert 4 not in p.hop_trace
    assert net.stats.delivered == 3


def test_sessions_closed_at_run_end():
    net = line(4)
    s = _session(net)
    net.finish()
    assert s.verdict is Verdict.UNVERIFIABLE and not net.nodes[0].detector.sessions
