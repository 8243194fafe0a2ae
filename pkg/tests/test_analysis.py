import unittest
import io
import math
from fractions import Fraction

from rackshuffle.errors import ParameterError
from rackshuffle.assignment import Scheme
from rackshuffle.analysis import (
    CostBreakdown, cost, cost_uncoded, cost_coded, cost_hybrid, coded_total,
    ratio_bounds, hybrid_vs_uncoded, binomial_bounds,
    compare, format_number, comparison_record, write_comparison_csv, CSV_HEADER
)

from .test_shuffle import SWEEP


class TestCosts(unittest.TestCase):

    EXPECTED = {
        # (K, P, Q, N, r): {scheme: (intra, cross)}
        (9, 3, 18, 72, 2): {
            Scheme.UNCODED: (288, 864), Scheme.CODED: (18, 486), Scheme.HYBRID: (864, 216)
        },
        (16, 4, 16, 240, 2): {
            Scheme.UNCODED: (720, 2880), Scheme.CODED: (48, 1632), Scheme.HYBRID: (2880, 960)
        },
        (16, 4, 16, 1680, 3): {
            Scheme.UNCODED: (5040, 20160), Scheme.CODED: (16, 7264), Scheme.HYBRID: (20160, 2240)
        },
        (15, 3, 15, 210, 2): {
            Scheme.UNCODED: (840, 2100), Scheme.CODED: (90, 1275), Scheme.HYBRID: (2520, 525)
        },
    }

    def test_published_rows(self):
        for params, expected in self.EXPECTED.items():
            for scheme, (intra, cross) in expected.items():
                with self.subTest(params=params, scheme=scheme):
                    breakdown = cost(scheme, *params)
                    self.assertIs(breakdown.scheme, scheme)
                    self.assertEqual(breakdown.L_int, intra)
                    self.assertEqual(breakdown.L_cro, cross)
                    self.assertEqual(breakdown.L_tot, intra + cross)
                    self.assertTrue(breakdown.is_integral())

    def test_coded_total(self):
        self.assertEqual(coded_total(9, 18, 72, 2), 504)
        self.assertEqual(cost_coded(9, 3, 18, 72, 2).L_tot, 504)

    def test_full_replication(self):
        breakdown = cost_coded(3, 1, 3, 2, 3)
        self.assertEqual((breakdown.L_int, breakdown.L_cro), (0, 0))

    def test_single_rack_uncoded(self):
        breakdown = cost_uncoded(4, 1, 4, 8)
        self.assertEqual((breakdown.L_int, breakdown.L_cro), (24, 0))

    def test_strict(self):
        with self.assertRaises(ParameterError) as ctx:
            cost_hybrid(20, 4, 20, 380, 2)
        self.assertEqual(ctx.exception.condition, 'C(P,r) ∤ NP/K')
        with self.assertRaises(ParameterError):
            cost_coded(4, 2, 4, 6, 2)
        with self.assertRaises(ParameterError) as ctx:
            cost_uncoded(10, 4, 20, 20)
        self.assertEqual(ctx.exception.condition, 'P ∤ K')

    def test_not_strict(self):
        breakdown = cost_uncoded(4, 2, 1, 1, strict=False)
        self.assertEqual(breakdown.L_int, Fraction(1, 4))
        self.assertFalse(breakdown.is_integral())
        self.assertEqual(cost_hybrid(20, 4, 20, 380, 2, strict=False).L_int, 6080)
        with self.assertRaises(ParameterError):
            cost_coded(4, 2, 1, 1, 0, strict=False)

    def test_weighted(self):
        breakdown = cost(Scheme.HYBRID, 9, 3, 18, 72, 2)
        self.assertEqual(breakdown.weighted(), 1080)
        self.assertEqual(breakdown.weighted(10), 864 + 2160)
        self.assertEqual(CostBreakdown(Scheme.CODED, Fraction(1), Fraction(3)).weighted(Fraction(1, 3)), 2)


class TestRatios(unittest.TestCase):

    def test_hybrid_vs_uncoded(self):
        intra, cross = hybrid_vs_uncoded(9, 3, 2)
        self.assertEqual(intra, 3)
        self.assertEqual(cross, Fraction(1, 4))
        self.assertIsNone(hybrid_vs_uncoded(4, 4, 2)[0])
        with self.assertRaises(ParameterError):
            hybrid_vs_uncoded(4, 1, 1)

    def test_ratio_bounds_row_one(self):
        bounds = ratio_bounds(9, 3, 2)
        self.assertEqual(bounds.cross_exact, Fraction(9, 4))
        self.assertEqual(bounds.intra_exact, 48)
        self.assertTrue(bounds.cross_holds)
        self.assertTrue(bounds.intra_holds)

    def test_ratio_bounds_sweep(self):
        tuples = list(SWEEP) + [(16, 4, 16, 240, 2), (16, 4, 16, 1680, 3), (25, 5, 25, 600, 2), (25, 5, 25, 6900, 3)]
        for K, P, _, _, r in tuples:
            if r >= P:
                continue
            with self.subTest(K=K, P=P, r=r):
                bounds = ratio_bounds(K, P, r)
                self.assertTrue(bounds.cross_holds)
                self.assertTrue(bounds.intra_holds)

    def test_ratio_bounds_range(self):
        for K, P, r in ((9, 3, 3), (9, 3, 0), (10, 4, 1)):
            with self.subTest(K=K, P=P, r=r):
                with self.assertRaises(ParameterError):
                    ratio_bounds(K, P, r)

    def test_no_coded_intra(self):
        self.assertIsNone(ratio_bounds(4, 4, 1).intra_exact)

    def test_binomial_bounds(self):
        for n in range(1, 30):
            for k in range(1, n + 1):
                lower, comb, upper = binomial_bounds(n, k)
                self.assertEqual(comb, math.comb(n, k))
                self.assertLessEqual(lower, comb)
                self.assertLess(comb, upper)
        with self.assertRaises(ParameterError):
            binomial_bounds(3, 4)


class TestCompare(unittest.TestCase):

    def test_rows(self):
        comparison = compare(9, 3, 18, 72, 2)
        self.assertEqual([row.scheme for row in comparison.rows], [Scheme.UNCODED, Scheme.CODED, Scheme.HYBRID])
        self.assertIsNone(comparison.row(Scheme.CODED).delta)
        self.assertEqual(comparison.rejected, ())

    def test_meters(self):
        comparison = compare(9, 3, 18, 72, 2, meters={Scheme.CODED: (18, 486), Scheme.HYBRID: (860, 216)})
        self.assertEqual(comparison.row(Scheme.CODED).delta, 0)
        self.assertEqual(comparison.row(Scheme.HYBRID).delta, 4)
        self.assertIsNone(comparison.row(Scheme.UNCODED).delta)

    def test_rejected(self):
        with self.assertRaises(ParameterError):
            compare(20, 4, 20, 380, 2)
        comparison = compare(20, 4, 20, 380, 2, skip_invalid=True)
        self.assertEqual([row.scheme for row in comparison.rows], [Scheme.UNCODED, Scheme.CODED])
        self.assertEqual(len(comparison.rejected), 1)
        rejected = comparison.rejected[0]
        self.assertEqual((rejected.params, rejected.scheme, rejected.condition),
                         ((20, 4, 20, 380, 2), Scheme.HYBRID, 'C(P,r) ∤ NP/K'))
        with self.assertRaises(KeyError):
            comparison.row(Scheme.HYBRID)


class TestCsv(unittest.TestCase):

    def test_format_number(self):
        self.assertEqual(format_number(5), '5')
        self.assertEqual(format_number(Fraction(10, 2)), '5')
        self.assertEqual(format_number(Fraction(7, 2)), '3.50')
        self.assertEqual(format_number(Fraction(1, 3)), '0.33')
        self.assertEqual(format_number(None), '')

    def test_record(self):
        row = compare(9, 3, 18, 72, 2).row(Scheme.UNCODED)
        self.assertEqual(comparison_record(row), ('9', '3', '18', '72', '2', 'Unc', '288', '864', '1152', '', '', ''))

    def test_write(self):
        comparison = compare(9, 3, 18, 72, 2, meters={s: (0, 0) for s in Scheme})
        stream = io.StringIO()
        write_comparison_csv(comparison.rows, stream)
        lines = stream.getvalue().split('\n')
        self.assertEqual(lines[0], ','.join(CSV_HEADER))
        self.assertEqual(lines[2], '9,3,18,72,2,Cod,18,486,504,0,0,504')
        self.assertEqual(lines[-1], '')
        self.assertEqual(len(lines), 5)

    def test_write_empty(self):
        stream = io.StringIO()
        write_comparison_csv([], stream)
        self.assertEqual(stream.getvalue(), ','.join(CSV_HEADER) + '\n')
