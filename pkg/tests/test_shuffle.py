import unittest
import io
import math
import os

import numpy as np

from rackshuffle.errors import ParameterError, SchemeMismatchError
from rackshuffle.topology import build_topology
from rackshuffle.assignment import Scheme, JobParams, LayerGrouping, assign, assign_hybrid, check_conditions
from rackshuffle.analysis import cost
from rackshuffle.reference import PUBLISHED_COSTS
from rackshuffle.shuffle import (
    CodedPacket, as_payload, payload_oracle, encode, decode,
    UnknownValueError, DeliveredStore, synth_map_outputs, verify_delivery, flip_bit, inject_fault,
    CostMeter, UncodedShuffle, run_uncoded, run_coded, run_hybrid, run_shuffle
)

# K, P, Q, N, r tuples valid for all three schemes
SWEEP = [
    (2, 2, 2, 2, 1),
    (4, 2, 4, 12, 2),
    (6, 3, 6, 60, 2),
    (6, 3, 6, 18, 1),
    (6, 2, 6, 30, 2),
    (4, 4, 4, 12, 3),
    (8, 4, 8, 168, 2),
    (9, 3, 9, 252, 3),
]

SLOW_TESTS = bool(os.environ.get('RACKSHUFFLE_SLOW_TESTS'))


def _holds(K, P, Q, N, r, scheme):
    conditions = check_conditions(build_topology(K, P), JobParams(N=N, Q=Q, r=r, scheme=scheme))
    return all(cond.holds for cond in conditions)


def _generated_sweep(count=20, limit=1200):
    ''' The smallest tuples, other than SWEEP, on which every scheme runs. '''
    found = []
    for K in range(2, 13):
        for P in (p for p in range(2, K + 1) if K % p == 0):
            for r in range(1, min(P, 3) + 1):
                N = int(np.lcm.reduce([K, r * math.comb(K, r), K // P * r * math.comb(P, r)]))
                params = (K, P, K, N, r)
                if N <= limit and params not in SWEEP and all(_holds(*params, s) for s in Scheme):
                    found.append(params)
    found.sort(key=lambda p: (p[2] * p[3], p))
    return found[:count]


GENERATED = _generated_sweep()


def _run(K, P, Q, N, r, scheme, width=1, seed=0, trace=None):
    topology = build_topology(K, P)
    assignment = assign(topology, JobParams(N=N, Q=Q, r=r, scheme=scheme))
    store = synth_map_outputs(assignment, Q, width, seed)
    delivered, report = run_shuffle(topology, assignment, store, trace=trace)
    return assignment, store, delivered, report


class TestCodec(unittest.TestCase):

    def test_oracle_deterministic(self):
        a = payload_oracle(3, 5, 42, 8)
        b = payload_oracle(3, 5, 42, 8)
        self.assertEqual(a.dtype, np.uint8)
        self.assertEqual(a.shape, (8,))
        np.testing.assert_array_equal(a, b)

    def test_oracle_distinct(self):
        base = payload_oracle(1, 1, 0, 16)
        for other in (payload_oracle(2, 1, 0, 16), payload_oracle(1, 2, 0, 16), payload_oracle(1, 1, 1, 16)):
            self.assertFalse(np.array_equal(base, other))

    def test_oracle_counter_mode(self):
        wide = payload_oracle(7, 9, 3, 200)
        self.assertEqual(wide.shape, (200,))
        np.testing.assert_array_equal(wide[:64], payload_oracle(7, 9, 3, 64))

    def test_oracle_invalid(self):
        with self.assertRaises(ParameterError):
            payload_oracle(1, 1, 0, 0)
        with self.assertRaises(ParameterError):
            payload_oracle(1, 1, -1, 4)

    def test_encode_decode(self):
        values = [payload_oracle(k, 1, 0, 8) for k in range(1, 4)]
        coded = encode(values)
        for idx in range(3):
            with self.subTest(missing=idx):
                known = [v for j, v in enumerate(values) if j != idx]
                np.testing.assert_array_equal(decode(coded, known), values[idx])

    def test_encode_decode_random(self):
        rng = np.random.default_rng(1000)
        for trial in range(1000):
            count = int(rng.integers(1, 9))
            segments = [rng.integers(0, 256, size=8, dtype=np.uint8) for _ in range(count)]
            coded = encode(segments)
            for idx in range(count):
                known = segments[:idx] + segments[idx + 1:]
                if not np.array_equal(decode(coded, known), segments[idx]):
                    self.fail(f'trial {trial}: segment {idx} of {count} not recovered')

    def test_encode_single(self):
        value = as_payload(b'\x01\x02')
        np.testing.assert_array_equal(encode([value]), value)
        np.testing.assert_array_equal(decode(value, []), value)

    def test_encode_errors(self):
        with self.assertRaises(ParameterError):
            encode([])
        with self.assertRaises(ParameterError):
            encode([b'\x00', b'\x00\x00'])
        with self.assertRaises(ParameterError):
            as_payload(np.zeros(3, dtype=np.int32))

    def test_packet_side_information(self):
        topology = build_topology(4, 2)
        packet = CodedPacket(
            keys=(1, 2, 3), subfiles=(4, 5, 6), payload=as_payload(b'\x00'),
            receivers=topology.servers()[:3], sender=topology.unflatten(4)
        )
        self.assertEqual(packet.side_information(1), ((4, 1), (6, 3)))


class TestStore(unittest.TestCase):

    def setUp(self):
        topology = build_topology(4, 2)
        self.assignment = assign(topology, JobParams(N=4, Q=4, scheme=Scheme.UNCODED))
        self.store = synth_map_outputs(self.assignment, 4, 2, 5)
        self.server = topology.unflatten(2)

    def test_table(self):
        self.assertEqual(self.store.table.shape, (4, 4, 2))
        np.testing.assert_array_equal(self.store.oracle(3, 1), payload_oracle(1, 3, 5, 2))
        self.assertFalse(self.store.table.flags.writeable)

    def test_get(self):
        np.testing.assert_array_equal(self.store.get(self.server, 2, 4), self.store.oracle(2, 4))
        with self.assertRaises(UnknownValueError):
            self.store.get(self.server, 1, 1)
        self.assertEqual(self.store.count(self.server), 4)

    def test_memory(self):
        memory = self.store.memory(self.server)
        self.assertTrue(memory.knows(2, 3))
        self.assertFalse(memory.knows(3, 3))
        with self.assertRaises(UnknownValueError):
            memory.read(3, 3)
        memory.write(3, 3, self.store.oracle(3, 3))
        np.testing.assert_array_equal(memory.read(3, 3), self.store.oracle(3, 3))

    def test_invalid(self):
        with self.assertRaises(ParameterError):
            synth_map_outputs(self.assignment, 4, 0, 0)


class TestPublishedRows(unittest.TestCase):
    ''' The metered units of the first two rows of the published cost table. '''

    ROWS = {
        (9, 3, 18, 72, 2): {
            Scheme.UNCODED: (288, 864), Scheme.CODED: (18, 486), Scheme.HYBRID: (864, 216)
        },
        (16, 4, 16, 240, 2): {
            Scheme.UNCODED: (720, 2880), Scheme.CODED: (48, 1632), Scheme.HYBRID: (2880, 960)
        },
    }

    def test_meters(self):
        for params, expected in self.ROWS.items():
            for scheme, (intra, cross) in expected.items():
                with self.subTest(params=params, scheme=scheme):
                    assignment, store, delivered, report = _run(*params, scheme)
                    self.assertEqual((report.intra_units, report.cross_units), (intra, cross))
                    breakdown = cost(scheme, *params)
                    self.assertEqual((breakdown.L_int, breakdown.L_cro), (intra, cross))
                    self.assertTrue(verify_delivery(delivered, assignment, store).ok)

    def test_stages(self):
        _, _, _, report = _run(9, 3, 18, 72, 2, Scheme.HYBRID)
        self.assertEqual(report.per_stage, {'cross-rack': (0, 216), 'intra-rack': (864, 0)})
        self.assertEqual(report.total, 1080)
        _, _, _, report = _run(9, 3, 18, 72, 2, Scheme.CODED)
        self.assertEqual(report.per_stage, {'multicast': (18, 486)})


class TestSweep(unittest.TestCase):

    def check_run(self, params, scheme, width, seed=11):
        assignment, store, delivered, report = _run(*params, scheme, width=width, seed=seed)
        breakdown = cost(scheme, *params)
        self.assertEqual(report.intra_units, breakdown.L_int)
        self.assertEqual(report.cross_units, breakdown.L_cro)
        delivery = verify_delivery(delivered, assignment, store)
        self.assertTrue(delivery.ok, str(delivery.mismatch))
        self.assertEqual(delivery.checked, params[3] * params[2])

    def test_meter_equals_formula(self):
        for params in SWEEP + GENERATED:
            for scheme in Scheme:
                for width in (1, 8, 64):
                    with self.subTest(params=params, scheme=scheme, B=width):
                        self.check_run(params, scheme, width)

    def test_generated(self):
        self.assertEqual(len(GENERATED), 20)
        self.assertEqual(len(set(GENERATED)), 20)

    def published_runs(self, slow):
        for row in PUBLISHED_COSTS:
            for scheme in Scheme:
                # the coded run of row 7 has C(25, 4) = 12650 multicast groups
                if _holds(*row.params, scheme) and (row.row == 7 and scheme is Scheme.CODED) == slow:
                    yield row, scheme

    def test_published_rows(self):
        runs = list(self.published_runs(slow=False))
        self.assertEqual(len(runs), 23)
        for row, scheme in runs:
            with self.subTest(row=row.row, scheme=scheme):
                self.check_run(row.params, scheme, 8)

    @unittest.skipUnless(SLOW_TESTS, 'set RACKSHUFFLE_SLOW_TESTS to run')
    def test_published_rows_slow(self):
        for row, scheme in self.published_runs(slow=True):
            with self.subTest(row=row.row, scheme=scheme):
                self.check_run(row.params, scheme, 8)

    def test_fault_always_detected(self):
        rng = np.random.default_rng(2024)
        for params in SWEEP[:4]:
            for scheme in Scheme:
                with self.subTest(params=params, scheme=scheme):
                    assignment, store, delivered, _ = _run(*params, scheme, width=8)
                    server, key, subfile = inject_fault(delivered, assignment, rng)
                    delivery = verify_delivery(delivered, assignment, store)
                    self.assertFalse(delivery.ok)
                    self.assertEqual(delivery.mismatch.reason, 'wrong value')
                    self.assertEqual(
                        (delivery.mismatch.server, delivery.mismatch.key, delivery.mismatch.subfile),
                        (server, key, subfile)
                    )

    def test_grouping_and_permutation(self):
        topology = build_topology(6, 3)
        params = JobParams(N=60, Q=6, r=2)
        rng = np.random.default_rng(1)
        assignment = assign_hybrid(
            topology, params,
            permutation=[int(p) + 1 for p in rng.permutation(60)],
            grouping=LayerGrouping.random(topology, rng)
        )
        store = synth_map_outputs(assignment, 6, 4, 9)
        delivered, report = run_hybrid(topology, assignment, store)
        self.assertTrue(verify_delivery(delivered, assignment, store).ok)
        breakdown = cost(Scheme.HYBRID, 6, 3, 6, 60, 2)
        self.assertEqual((report.intra_units, report.cross_units), (breakdown.L_int, breakdown.L_cro))


class TestEngines(unittest.TestCase):

    def test_minimal_uncoded(self):
        assignment, store, delivered, report = _run(2, 2, 2, 2, 1, Scheme.UNCODED)
        self.assertEqual((report.intra_units, report.cross_units), (0, 2))
        self.assertTrue(verify_delivery(delivered, assignment, store))

    def test_trace(self):
        trace = io.StringIO()
        _, _, _, report = _run(2, 2, 2, 2, 1, Scheme.UNCODED, trace=trace)
        lines = trace.getvalue().splitlines()
        self.assertEqual(len(lines), report.total)
        self.assertEqual(lines[0], 'unicast\t1\t2\t2\t1\tcross')

    def test_coded_trace_lists_receivers(self):
        trace = io.StringIO()
        _run(4, 2, 4, 12, 2, Scheme.CODED, trace=trace)
        fields = trace.getvalue().splitlines()[0].split('\t')
        self.assertEqual(fields[0], 'multicast')
        self.assertEqual(len(fields[2].split(',')), 2)
        self.assertEqual(len(fields[3].split(',')), 2)

    def test_store_unchanged(self):
        assignment, store, _, _ = _run(4, 2, 4, 12, 2, Scheme.CODED)
        fresh = synth_map_outputs(assignment, 4, 1, 0)
        np.testing.assert_array_equal(store.table, fresh.table)

    def test_full_replication_sends_nothing(self):
        _, _, _, report = _run(3, 1, 3, 2, 3, Scheme.CODED)
        self.assertEqual(report.total, 0)
        self.assertEqual(report.per_stage, {'multicast': (0, 0)})

    def test_scheme_mismatch(self):
        topology = build_topology(4, 2)
        assignment = assign(topology, JobParams(N=4, Q=4, scheme=Scheme.UNCODED))
        store = synth_map_outputs(assignment, 4, 1, 0)
        for runner in (run_coded, run_hybrid):
            with self.subTest(runner=runner.__name__):
                with self.assertRaises(SchemeMismatchError):
                    runner(topology, assignment, store)
        run_uncoded(topology, assignment, store)

    def test_multicast_condition(self):
        topology = build_topology(4, 2)
        assignment = assign(topology, JobParams(N=6, Q=4, r=2, scheme=Scheme.CODED))
        store = synth_map_outputs(assignment, 4, 1, 0)
        with self.assertRaises(ParameterError) as ctx:
            run_coded(topology, assignment, store)
        self.assertEqual(ctx.exception.condition, 'r ∤ J')

    def test_logging(self):
        topology = build_topology(4, 2)
        assignment = assign(topology, JobParams(N=4, Q=4, scheme=Scheme.UNCODED))
        store = synth_map_outputs(assignment, 4, 1, 0)
        with self.assertLogs('UncodedShuffle', level='DEBUG') as logs:
            UncodedShuffle(topology).run(assignment, store)
        self.assertTrue(any('intra=4 cross=8' in line for line in logs.output))


class TestVerification(unittest.TestCase):

    def setUp(self):
        self.assignment, self.store, self.delivered, _ = _run(4, 2, 4, 8, 1, Scheme.UNCODED, width=2)

    def test_flip_bit(self):
        server = self.assignment.topology.unflatten(3)
        flip_bit(self.delivered, server, 8, 3, bit=9)
        delivery = verify_delivery(self.delivered, self.assignment, self.store)
        self.assertFalse(delivery.ok)
        self.assertEqual(delivery.mismatch.server, server)
        self.assertEqual((delivery.mismatch.key, delivery.mismatch.subfile), (3, 8))
        self.assertIn('wrong value', str(delivery.mismatch))

    def test_missing(self):
        topology = self.assignment.topology
        empty = DeliveredStore({s.flat: self.store.memory(s) for s in topology.servers()})
        delivery = verify_delivery(empty, self.assignment, self.store)
        self.assertFalse(delivery)
        self.assertEqual(delivery.mismatch.reason, 'missing value')
        self.assertEqual((delivery.mismatch.server.flat, delivery.mismatch.key, delivery.mismatch.subfile), (1, 1, 3))

    def test_cost_meter(self):
        topology = build_topology(4, 2)
        meter = CostMeter()
        servers = topology.servers()
        self.assertTrue(meter.record('s', servers[0], [servers[1]], [1], [1]))
        self.assertFalse(meter.record('s', servers[0], [servers[1], servers[2]], [1, 2], [1, 2]))
        report = meter.report(Scheme.CODED)
        self.assertEqual((report.intra_units, report.cross_units), (1, 1))
