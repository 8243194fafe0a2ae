import unittest

from rackshuffle.errors import ParameterError, IndexRangeError
from rackshuffle.topology import ClusterTopology, build_topology, flat_index, unflatten, same_rack


class TestClusterTopology(unittest.TestCase):

    def test_build(self):
        topology = build_topology(9, 3)
        self.assertEqual((topology.K, topology.P, topology.K_r), (9, 3, 3))
        self.assertEqual(len(topology.servers()), 9)

    def test_invalid(self):
        for K, P, condition in ((10, 4, 'P ∤ K'), (1, 1, 'K < 2'), (4, 0, 'P < 1')):
            with self.subTest(K=K, P=P):
                with self.assertRaises(ParameterError) as ctx:
                    build_topology(K, P)
                self.assertEqual(ctx.exception.condition, condition)

    def test_flat_index(self):
        topology = build_topology(16, 4)
        server = topology.server(3, 2)
        self.assertEqual(flat_index(server), (3 - 1) * 4 + 2)
        self.assertEqual(str(server), 'S(3,2)')

    def test_unflatten_roundtrip(self):
        for K in range(2, 65):
            for P in (p for p in range(1, K + 1) if K % p == 0):
                topology = build_topology(K, P)
                with self.subTest(K=K, P=P):
                    for flat in range(1, K + 1):
                        server = unflatten(flat, topology)
                        self.assertEqual(flat_index(server), flat)
                        self.assertEqual(topology.server(server.rack, server.slot), server)
                        self.assertEqual(topology.rack_of(flat), server.rack)
                        self.assertEqual(server.rack, (flat - 1) // topology.K_r + 1)

    def test_servers_in_flat_order(self):
        topology = build_topology(6, 2)
        self.assertEqual([s.flat for s in topology.servers()], list(range(1, 7)))
        self.assertEqual(sorted(topology.servers(), reverse=True)[0].flat, 6)

    def test_index_errors(self):
        topology = build_topology(6, 2)
        cases = [
            lambda: topology.server(3, 1),
            lambda: topology.server(1, 4),
            lambda: topology.unflatten(0),
            lambda: topology.unflatten(7),
            lambda: topology.rack_of(7),
            lambda: topology.rack(0),
            lambda: topology.layer(4),
        ]
        for idx, case in enumerate(cases):
            with self.subTest(case=idx):
                with self.assertRaises(IndexRangeError):
                    case()
                with self.assertRaises(IndexError):
                    case()

    def test_racks(self):
        topology = build_topology(6, 3)
        racks = list(topology.racks())
        self.assertEqual(len(racks), 3)
        self.assertEqual([s.flat for s in racks[1]], [3, 4])
        self.assertTrue(all(same_rack(a, b) for a, b in [racks[2]]))
        self.assertFalse(same_rack(racks[0][0], racks[1][0]))

    def test_layers(self):
        topology = build_topology(8, 2)
        layers = list(topology.layers())
        self.assertEqual(len(layers), 4)
        self.assertEqual([s.flat for s in layers[0].members], [1, 5])
        self.assertEqual([s.rack for s in topology.layer(3).members], [1, 2])
        self.assertTrue(all(s.slot == 3 for s in topology.layer(3).members))

    def test_single_rack(self):
        topology = build_topology(4, 1)
        self.assertEqual(topology.K_r, 4)
        self.assertEqual(len(topology.layer(2).members), 1)

    def test_contains(self):
        topology = build_topology(6, 2)
        other = build_topology(6, 3)
        self.assertTrue(topology.contains(topology.unflatten(4)))
        self.assertFalse(topology.contains(other.unflatten(4)))

    def test_equality(self):
        self.assertEqual(ClusterTopology(K=6, P=2), build_topology(6, 2))
