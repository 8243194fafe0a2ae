''' Closed-form communication costs of the three schemes and their comparison.

All costs are exact :class:`fractions.Fraction` values. For parameters satisfying the
divisibility conditions of the scheme they are integers, and they equal the units metered by the
shuffle engines of :mod:`rackshuffle.shuffle` exactly.

==========  =============================================  =========================================
Scheme      Intra-rack cost                                Cross-rack cost
==========  =============================================  =========================================
Uncoded     ``QN (1/P - 1/K)``                             ``QN (1 - 1/P)``
Coded       ``L_tot P C(K/P, r+1) / C(K, r+1)``            ``L_tot - L_int``
Hybrid      ``QN (1 - P/K)``                               ``(QN/r) (1 - r/P)``
==========  =============================================  =========================================

where the total coded cost is ``L_tot = (QN/r) (1 - r/K)``.
'''

from typing import Optional, Mapping, List, Tuple, Sequence, TextIO, Union
from dataclasses import dataclass
from fractions import Fraction
import csv
import math

from .errors import ParameterError
from .assignment import Scheme, SCHEME_ORDER, JobParams, ConditionKind, require_conditions
from .topology import ClusterTopology

Number = Union[int, Fraction]

ALL_CONDITIONS = (ConditionKind.STRUCTURAL, ConditionKind.KEYS, ConditionKind.MULTICAST)


@dataclass(frozen=True)
class CostBreakdown:
    ''' The communication cost of a scheme in key-value pair units.

    Args:
        scheme (Scheme): The scheme
        L_int (Fraction): The intra-rack cost
        L_cro (Fraction): The cross-rack cost
    '''

    # pylint: disable=invalid-name

    scheme: Scheme
    L_int: Fraction
    L_cro: Fraction

    @property
    def L_tot(self) -> Fraction:
        ''' The total cost. '''
        return self.L_int + self.L_cro

    def weighted(self, cross_weight: Number = 1) -> Fraction:
        ''' The total cost where every cross-rack unit counts ``cross_weight`` times.

        This is a reporting aid for links of different bandwidth; correctness checks always use
        the unweighted values.
        '''
        return self.L_int + Fraction(cross_weight) * self.L_cro

    def is_integral(self) -> bool:
        ''' True if both costs are integers. '''
        return self.L_int.denominator == 1 and self.L_cro.denominator == 1


def _checked_topology(K: int, P: int) -> ClusterTopology: # pylint: disable=invalid-name
    return ClusterTopology(K=K, P=P)


def _check(scheme: Scheme, K: int, P: int, Q: int, N: int, r: int, strict: bool) -> None: # pylint: disable=invalid-name
    if strict:
        require_conditions(
            _checked_topology(K, P), JobParams(N=N, Q=Q, r=r, scheme=scheme), kinds=ALL_CONDITIONS
        )
    elif K <= 0 or P <= 0 or r <= 0:
        raise ParameterError(f'K, P and r must be positive (K={K}, P={P}, r={r})')


def cost_uncoded(K: int, P: int, Q: int, N: int, strict: bool = True) -> CostBreakdown: # pylint: disable=invalid-name
    ''' The cost of the Uncoded scheme.

    Args:
        K: The number of servers.
        P: The number of racks.
        Q: The number of keys.
        N: The number of subfiles.
        strict: If False, the formulas are evaluated without checking the divisibility
            conditions, and the results may be fractional.

    Raises:
        ParameterError: If ``strict`` and a condition fails.
    '''
    _check(Scheme.UNCODED, K, P, Q, N, 1, strict)
    qn = Fraction(Q * N)
    return CostBreakdown(
        scheme=Scheme.UNCODED,
        L_int=qn * (Fraction(1, P) - Fraction(1, K)),
        L_cro=qn * (1 - Fraction(1, P))
    )


def coded_total(K: int, Q: int, N: int, r: int) -> Fraction: # pylint: disable=invalid-name
    ''' The total cost ``(QN/r) (1 - r/K)`` of the Coded scheme. '''
    return Fraction(Q * N, r) * (1 - Fraction(r, K))


def cost_coded(K: int, P: int, Q: int, N: int, r: int, strict: bool = True) -> CostBreakdown: # pylint: disable=invalid-name
    ''' The cost of the Coded scheme.

    A multicast group of ``r + 1`` servers sends intra-rack only if all its members are in the
    same rack, which gives the ``P C(K/P, r+1) / C(K, r+1)`` share of the total cost. For
    ``r = K`` nothing is sent.

    Raises:
        ParameterError: If ``strict`` and a condition fails.
    '''
    _check(Scheme.CODED, K, P, Q, N, r, strict)
    total = coded_total(K, Q, N, r)
    groups = math.comb(K, r + 1)
    if groups == 0:
        intra = Fraction(0)
    else:
        intra = total * P * math.comb(K // P, r + 1) / groups
    return CostBreakdown(scheme=Scheme.CODED, L_int=intra, L_cro=total - intra)


def cost_hybrid(K: int, P: int, Q: int, N: int, r: int, strict: bool = True) -> CostBreakdown: # pylint: disable=invalid-name
    ''' The cost of the Hybrid scheme.

    Raises:
        ParameterError: If ``strict`` and a condition fails.
    '''
    _check(Scheme.HYBRID, K, P, Q, N, r, strict)
    qn = Fraction(Q * N)
    return CostBreakdown(
        scheme=Scheme.HYBRID,
        L_int=qn * (1 - Fraction(P, K)),
        L_cro=qn / r * (1 - Fraction(r, P))
    )


def cost(scheme: Scheme, K: int, P: int, Q: int, N: int, r: int, strict: bool = True) -> CostBreakdown: # pylint: disable=invalid-name
    ''' Dispatches to the cost function of a scheme. ``r`` is ignored by the Uncoded scheme. '''
    if scheme is Scheme.UNCODED:
        return cost_uncoded(K, P, Q, N, strict=strict)
    if scheme is Scheme.CODED:
        return cost_coded(K, P, Q, N, r, strict=strict)
    return cost_hybrid(K, P, Q, N, r, strict=strict)


@dataclass(frozen=True)
class RatioBounds:
    ''' Exact cost ratios of the Coded and Hybrid schemes, and their analytic bounds.

    Args:
        cross_exact (Fraction): ``L_cro^Cod / L_cro^Hyb``
        cross_lower (float): The lower bound of ``cross_exact``. Informative only if positive.
        intra_exact (Optional[Fraction]): ``L_int^Hyb / L_int^Cod``, None if the coded intra-rack
            cost is zero
        intra_upper (float): The upper bound of ``intra_exact``
    '''
    cross_exact: Fraction
    cross_lower: float
    intra_exact: Optional[Fraction]
    intra_upper: float

    @property
    def cross_holds(self) -> bool:
        ''' True if the exact cross-rack ratio respects its lower bound. '''
        return float(self.cross_exact) >= self.cross_lower

    @property
    def intra_holds(self) -> bool:
        ''' True if the exact intra-rack ratio respects its upper bound, or is undefined. '''
        return self.intra_exact is None or float(self.intra_exact) <= self.intra_upper


def ratio_bounds(K: int, P: int, r: int) -> RatioBounds: # pylint: disable=invalid-name
    ''' Compares the Coded and Hybrid costs on a topology.

    The ratios do not depend on ``Q`` and ``N``. The bounds follow from
    ``(n/k)^k <= C(n, k) < (ne/k)^k``:

    - ``L_cro^Cod / L_cro^Hyb >= (1 - r/K) / (1 - r/P) * (1 - e^(r+1) / P^r)``
    - ``L_int^Hyb / L_int^Cod <= r (K - P) / (K - r) * e^(r+1) * P^r``

    Raises:
        ParameterError: If ``r >= P`` (no cross-rack hybrid traffic) or ``P`` does not divide
            ``K``.
    '''
    _checked_topology(K, P)
    if not 1 <= r < P:
        raise ParameterError(f'The ratios need 1 ≤ r < P, got r={r}, P={P}', 'r ≥ P')
    coded = cost_coded(K, P, 1, 1, r, strict=False)
    hybrid = cost_hybrid(K, P, 1, 1, r, strict=False)
    e_r1 = math.e ** (r + 1)
    return RatioBounds(
        cross_exact=coded.L_cro / hybrid.L_cro,
        cross_lower=(1 - r / K) / (1 - r / P) * (1 - e_r1 / P ** r),
        intra_exact=hybrid.L_int / coded.L_int if coded.L_int > 0 else None,
        intra_upper=r * (K - P) / (K - r) * e_r1 * P ** r
    )


def hybrid_vs_uncoded(K: int, P: int, r: int) -> Tuple[Optional[Fraction], Fraction]: # pylint: disable=invalid-name
    ''' The ratios of the Hybrid and Uncoded costs.

    Returns:
        ``(L_int^Hyb / L_int^Unc, L_cro^Hyb / L_cro^Unc)``. The intra-rack ratio is ``P``, or None
        if ``K = P``; the cross-rack ratio is ``(1/r - 1/P) / (1 - 1/P)``.

    Raises:
        ParameterError: If ``P < 2``.
    '''
    if P < 2:
        raise ParameterError(f'The cross-rack ratio needs at least two racks, got P={P}', 'P < 2')
    uncoded = cost_uncoded(K, P, 1, 1, strict=False)
    hybrid = cost_hybrid(K, P, 1, 1, r, strict=False)
    intra = hybrid.L_int / uncoded.L_int if uncoded.L_int > 0 else None
    return intra, hybrid.L_cro / uncoded.L_cro


def binomial_bounds(n: int, k: int) -> Tuple[Fraction, int, float]:
    ''' The bounds ``(n/k)^k <= C(n, k) < (ne/k)^k`` used for the ratio bounds.

    Returns:
        The lower bound, the binomial coefficient and the upper bound.

    Raises:
        ParameterError: Unless ``1 <= k <= n``.
    '''
    if not 1 <= k <= n:
        raise ParameterError(f'The bounds need 1 ≤ k ≤ n, got n={n}, k={k}', 'k out of range')
    return Fraction(n, k) ** k, math.comb(n, k), (n * math.e / k) ** k


@dataclass(frozen=True)
class ComparisonRow:
    ''' One row of a scheme comparison. The meter fields are None without a simulated run. '''

    # pylint: disable=invalid-name
    K: int
    P: int
    Q: int
    N: int
    r: int
    breakdown: CostBreakdown
    meter_int: Optional[int] = None
    meter_cro: Optional[int] = None

    @property
    def scheme(self) -> Scheme:
        return self.breakdown.scheme

    @property
    def delta(self) -> Optional[Fraction]:
        ''' ``|L_int - meter_int| + |L_cro - meter_cro|``, None without meters. '''
        if self.meter_int is None or self.meter_cro is None:
            return None
        return abs(self.breakdown.L_int - self.meter_int) + abs(self.breakdown.L_cro - self.meter_cro)


@dataclass(frozen=True)
class RejectedScheme:
    ''' A scheme whose conditions fail on a parameter tuple. '''

    params: Tuple[int, ...]
    scheme: Scheme
    condition: str


@dataclass(frozen=True)
class Comparison:
    ''' The result of :func:`compare`. '''

    rows: Tuple[ComparisonRow, ...]
    rejected: Tuple[RejectedScheme, ...] = ()

    def row(self, scheme: Scheme) -> ComparisonRow:
        ''' The row of a scheme. '''
        for row in self.rows:
            if row.scheme is scheme:
                return row
        raise KeyError(scheme)


def compare(
    K: int, P: int, Q: int, N: int, r: int, # pylint: disable=invalid-name
    meters: Optional[Mapping[Scheme, Tuple[int, int]]] = None,
    skip_invalid: bool = False
) -> Comparison:
    ''' Compares the costs of the three schemes on a parameter tuple.

    Args:
        K, P, Q, N, r: The parameters.
        meters: Optional metered ``(intra, cross)`` units per scheme, typically from the shuffle
            engines; the rows then carry the deltas.
        skip_invalid: If True, schemes with failing conditions are returned as rejected instead of
            raising.

    Returns:
        The rows in scheme order Unc, Cod, Hyb.

    Raises:
        ParameterError: If a scheme's condition fails and ``skip_invalid`` is False.
    '''
    rows: List[ComparisonRow] = []
    rejected: List[RejectedScheme] = []
    for scheme in SCHEME_ORDER:
        try:
            breakdown = cost(scheme, K, P, Q, N, r)
        except ParameterError as error:
            if not skip_invalid:
                raise
            rejected.append(RejectedScheme((K, P, Q, N, r), scheme, error.condition))
            continue
        meter = (meters or {}).get(scheme)
        rows.append(ComparisonRow(
            K=K, P=P, Q=Q, N=N, r=r,
            breakdown=breakdown,
            meter_int=None if meter is None else int(meter[0]),
            meter_cro=None if meter is None else int(meter[1])
        ))
    return Comparison(rows=tuple(rows), rejected=tuple(rejected))


CSV_HEADER = ('K', 'P', 'Q', 'N', 'r', 'scheme', 'L_int', 'L_cro', 'L_tot', 'meter_int', 'meter_cro', 'delta')


def format_number(value: Optional[Number]) -> str:
    ''' Integers as integers, other rationals with two decimals, None as an empty string. '''
    if value is None:
        return ''
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f'{float(value):.2f}'


def comparison_record(row: ComparisonRow) -> Tuple[str, ...]:
    ''' The CSV fields of a row in :data:`CSV_HEADER` order. '''
    b = row.breakdown # pylint: disable=invalid-name
    return (
        str(row.K), str(row.P), str(row.Q), str(row.N), str(row.r), row.scheme.value,
        format_number(b.L_int), format_number(b.L_cro), format_number(b.L_tot),
        format_number(row.meter_int), format_number(row.meter_cro), format_number(row.delta)
    )


def write_comparison_csv(rows: Sequence[ComparisonRow], stream: TextIO, header: bool = True) -> None:
    ''' Writes comparison rows as CSV with ``\\n`` line endings. '''
    writer = csv.writer(stream, lineterminator='\n')
    if header:
        writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(comparison_record(row))
