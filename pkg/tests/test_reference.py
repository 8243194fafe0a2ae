import unittest
import logging
from fractions import Fraction

from rackshuffle.assignment import Scheme
from rackshuffle.reference import (
    CellAnnotation, CostKind, PUBLISHED_COSTS, PUBLISHED_LOCALITY, annotation_map,
    detect_anomalies, detect_all_anomalies, find_cost_row, find_locality_row
)

TYPO_SUSPECT = {
    (3, Scheme.CODED, CostKind.CROSS),
    (3, Scheme.CODED, CostKind.INTRA),
    (5, Scheme.HYBRID, CostKind.INTRA),
    (6, Scheme.CODED, CostKind.INTRA),
    (7, Scheme.CODED, CostKind.CROSS),
    (7, Scheme.HYBRID, CostKind.INTRA),
    (8, Scheme.UNCODED, CostKind.CROSS),
    (8, Scheme.UNCODED, CostKind.INTRA),
    (8, Scheme.HYBRID, CostKind.INTRA),
}


class TestTables(unittest.TestCase):

    def test_sizes(self):
        self.assertEqual(len(PUBLISHED_COSTS), 9)
        self.assertEqual(len(PUBLISHED_LOCALITY), 10)
        self.assertEqual([row.row for row in PUBLISHED_COSTS], list(range(1, 10)))
        self.assertTrue(all(len(row.cells) == 6 for row in PUBLISHED_COSTS))

    def test_cell_values(self):
        row = find_cost_row((15, 3, 15, 210, 2))
        self.assertEqual(row.row, 4)
        self.assertEqual(row.cell(Scheme.HYBRID, CostKind.INTRA).printed, '2.520')
        self.assertEqual(row.cell(Scheme.HYBRID, CostKind.INTRA).value, 2520)
        self.assertEqual(find_cost_row((9, 3, 18, 72, 2)).cell(Scheme.CODED, CostKind.INTRA).value, 18)

    def test_find(self):
        self.assertIsNone(find_cost_row((1, 2, 3, 4, 5)))
        row = find_locality_row((8, 2, 2, 160))
        self.assertEqual((row.node_random, row.node_optimized, row.rack_random, row.rack_optimized), (25, 60, 80, 80))
        self.assertEqual(find_locality_row((10, 5, 2, 100)).rack_optimized, 92.5)
        self.assertIsNone(find_locality_row((8, 2, 2, 161)))

    def test_annotations(self):
        annotations = annotation_map()
        self.assertEqual(len(annotations), 54)
        suspects = {key for key, value in annotations.items() if value is CellAnnotation.TYPO_SUSPECT}
        self.assertEqual(suspects, TYPO_SUSPECT)


class TestAnomalies(unittest.TestCase):

    def test_consistent_rows(self):
        for number in (1, 2, 4, 9):
            with self.subTest(row=number):
                self.assertEqual(detect_anomalies(PUBLISHED_COSTS[number - 1]), [])

    def test_exact_set(self):
        anomalies = detect_all_anomalies()
        self.assertEqual({(a.row, a.scheme, a.kind) for a in anomalies}, TYPO_SUSPECT)
        self.assertEqual(len(anomalies), len(TYPO_SUSPECT))
        self.assertTrue(all(a.annotation is CellAnnotation.TYPO_SUSPECT for a in anomalies))

    def test_values(self):
        anomalies = detect_anomalies(PUBLISHED_COSTS[2])
        self.assertEqual([(a.scheme, a.kind) for a in anomalies], [
            (Scheme.CODED, CostKind.CROSS), (Scheme.CODED, CostKind.INTRA)
        ])
        cross, intra = anomalies
        self.assertEqual((cross.published, cross.expected), (6976, 7264))
        self.assertEqual((intra.published, intra.expected), (304, 16))
        self.assertEqual(str(cross), 'row 3 (16, 4, 16, 1680, 3): Cod cross published 6976 units, formula gives 7264')

    def test_invalid_row_compared(self):
        # the hybrid scheme is not defined on row 5, the formula is still evaluated
        anomaly, = detect_anomalies(PUBLISHED_COSTS[4])
        self.assertEqual((anomaly.published, anomaly.expected), (608, 6080))
        self.assertIsInstance(anomaly.expected, Fraction)

    def test_logging(self):
        logger = logging.getLogger('reference-test')
        with self.assertLogs(logger, 'WARNING') as logs:
            detect_all_anomalies(logger=logger)
        self.assertEqual(len(logs.output), len(TYPO_SUSPECT))


if __name__ == '__main__':
    unittest.main()
