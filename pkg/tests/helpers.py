"""Hand-built topologies shared by several test modules."""
from manet_dri.adversary import pair_attackers
from manet_dri.aodv import ProtocolParams
from manet_dri.dri import record_data_through
from manet_dri.engine import MediumParams
from manet_dri.scenario import Network

# seven-node cooperative black hole example: S reaches D over 2-4-6, while
# B1 (next to S) and B2 (next to 4 and 6) collude
S, N2, N4, N6, B1, B2, D = range(7)
GOLDEN_POS = [(0.0, 0.0), (150.0, -100.0), (300.0, -100.0), (450.0, 0.0),
            (150.0, 120.0), (320.0, 80.0), (600.0, 0.0)]
# seed whose attacker streams make B2 name node 6 in its collusive reply
GOLDEN_SEED = 3


def golden_network(seed=GOLDEN_SEED, detection=True, trace=None, attack=True):
    attackers = pair_attackers([B1, B2]) if attack else {}
    net = Network(GOLDEN_POS, medium=MediumParams(200.0), params=ProtocolParams(),
                  attackers=attackers, detection=detection, seed=seed,
                  area=(700.0, 400.0), trace=trace)
    # S has already routed data through node 6
    record_data_through(net.nodes[S], N6)
    return net


def grid_positions(cols, rows, spacing):
    return [(c * spacing, r * spacing) for r in range(rows) for c in range(cols)]
