''' The published cost and data locality tables, and the detection of their inconsistent cells.

The published cost values are in thousands of key-value pair units. Every cell is annotated as
``consistent`` if it equals the closed-form cost of :mod:`rackshuffle.analysis`, or as
``typo-suspect`` if it does not. :func:`detect_anomalies` recomputes the comparison, so the
annotations are checked rather than trusted.
'''

from typing import List, Optional, Tuple, Dict
from enum import Enum
from fractions import Fraction
import logging

from pydantic import BaseModel

from .assignment import Scheme, SCHEME_ORDER
from .analysis import cost


class CellAnnotation(str, Enum):
    ''' The reliability of a published cell. '''

    CONSISTENT = 'consistent'
    TYPO_SUSPECT = 'typo-suspect'


class CostKind(str, Enum):
    ''' The two cost columns of the cost table. '''

    CROSS = 'cross'
    INTRA = 'intra'


class PublishedCell(BaseModel):
    ''' A cell of the published cost table. '''

    scheme: Scheme
    ''' The scheme of the column. '''

    kind: CostKind
    ''' Cross-rack or intra-rack column. '''

    printed: str
    ''' The value as printed, in thousands of units. '''

    annotation: CellAnnotation = CellAnnotation.CONSISTENT
    ''' Whether the printed value agrees with the formulas. '''

    @property
    def value(self) -> Fraction:
        ''' The printed value in units, computed exactly from the decimal text. '''
        return Fraction(self.printed) * 1000


class PublishedCostRow(BaseModel):
    ''' A row of the published cost table. '''

    row: int
    ''' The 1-based row number. '''

    K: int
    P: int
    Q: int
    N: int
    r: int

    cells: List[PublishedCell]
    ''' Cross-rack cells in scheme order, then intra-rack cells in scheme order. '''

    @property
    def params(self) -> Tuple[int, int, int, int, int]:
        ''' ``(K, P, Q, N, r)`` '''
        return (self.K, self.P, self.Q, self.N, self.r)

    def cell(self, scheme: Scheme, kind: CostKind) -> PublishedCell:
        ''' Looks up a cell. '''
        for cell in self.cells:
            if cell.scheme is scheme and cell.kind is kind:
                return cell
        raise KeyError((scheme, kind))


class PublishedLocalityRow(BaseModel):
    ''' A row of the published data locality table, percentages of Map tasks. '''

    row: int
    K: int
    P: int
    r_f: int
    N: int
    node_random: float
    node_optimized: float
    rack_random: float
    rack_optimized: float

    @property
    def params(self) -> Tuple[int, int, int, int]:
        ''' ``(K, P, r_f, N)`` '''
        return (self.K, self.P, self.r_f, self.N)


# K,P,Q,N,r | cross-rack Unc,Cod,Hyb | intra-rack Unc,Cod,Hyb
_COST_TABLE = '''
9,3,18,72,2      | 0.864,0.486,0.216 | 0.288,0.018,0.864
16,4,16,240,2    | 2.88,1.632,0.96   | 0.72,0.048,2.88
16,4,16,1680,3   | 20.16,6.976,2.24  | 5.04,0.304,20.16
15,3,15,210,2    | 2.1,1.275,0.525   | 0.84,0.09,2.520
20,4,20,380,2    | 5.7,3.3,1.9       | 1.52,0.12,0.608
25,5,25,600,2    | 12,6.75,4.5       | 2.4,1.5,12
25,5,25,6900,3   | 138,50.6,23       | 27.6,0.1,13.8
30,5,30,870,2    | 16.56,11.88,7.83  | 3.45,0.3,17.25
30,6,30,870,2    | 21.75,12,8.7      | 3.48,0.18,20.88
'''

_TYPO_SUSPECT = {
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

# K,P,r_f,N | node Ran,Opt | rack Ran,Opt
_LOCALITY_TABLE = '''
8,2,2,160  | 25,60 | 80,80
8,2,3,100  | 39,76 | 95,95
9,3,2,144  | 17,64 | 57,86
9,3,3,90   | 33,87 | 77,98
10,5,2,100 | 19,80 | 41,92.5
16,4,2,192 | 10,64 | 45,90
16,4,3,192 | 19,84 | 63,99
18,3,2,180 | 11,60 | 57,83
20,5,2,200 | 13,66 | 38,90
21,3,2,84  | 12,63 | 56,81
'''


def _table_lines(text: str) -> List[List[List[str]]]:
    return [
        [[v.strip() for v in part.split(',')] for part in line.split('|')]
        for line in text.strip().splitlines()
    ]


def _build_cost_table() -> Tuple[PublishedCostRow, ...]:
    rows = []
    for number, (params, cross, intra) in enumerate(_table_lines(_COST_TABLE), start=1):
        cells = []
        for kind, printed_values in ((CostKind.CROSS, cross), (CostKind.INTRA, intra)):
            for scheme, printed in zip(SCHEME_ORDER, printed_values):
                suspect = (number, scheme, kind) in _TYPO_SUSPECT
                cells.append({
                    'scheme': scheme.value,
                    'kind': kind.value,
                    'printed': printed,
                    'annotation': (CellAnnotation.TYPO_SUSPECT if suspect else CellAnnotation.CONSISTENT).value
                })
        rows.append(PublishedCostRow.parse_obj(
            dict(zip(('K', 'P', 'Q', 'N', 'r'), map(int, params)), row=number, cells=cells)
        ))
    return tuple(rows)


def _build_locality_table() -> Tuple[PublishedLocalityRow, ...]:
    rows = []
    for number, (params, node, rack) in enumerate(_table_lines(_LOCALITY_TABLE), start=1):
        rows.append(PublishedLocalityRow.parse_obj({
            **dict(zip(('K', 'P', 'r_f', 'N'), map(int, params))),
            'row': number,
            'node_random': node[0], 'node_optimized': node[1],
            'rack_random': rack[0], 'rack_optimized': rack[1],
        }))
    return tuple(rows)


PUBLISHED_COSTS: Tuple[PublishedCostRow, ...] = _build_cost_table()
''' The published cost table. '''

PUBLISHED_LOCALITY: Tuple[PublishedLocalityRow, ...] = _build_locality_table()
''' The published data locality table. '''


class Anomaly(BaseModel):
    ''' A published cell that disagrees with the closed-form cost. '''

    row: int
    params: Tuple[int, int, int, int, int]
    scheme: Scheme
    kind: CostKind
    published: Fraction
    expected: Fraction
    annotation: CellAnnotation

    class Config:
        arbitrary_types_allowed = True

    def __str__(self) -> str:
        return (
            f'row {self.row} {self.params}: {self.scheme.value} {self.kind.value} published '
            f'{self.published} units, formula gives {self.expected}'
        )


def detect_anomalies(row: PublishedCostRow) -> List[Anomaly]:
    ''' Compares every cell of a published row with the formulas.

    The formulas are evaluated without the divisibility conditions, so rows that violate a
    scheme's conditions are compared as well.

    Returns:
        The disagreeing cells in column order.
    '''
    anomalies = []
    for cell in row.cells:
        breakdown = cost(cell.scheme, row.K, row.P, row.Q, row.N, row.r, strict=False)
        expected = breakdown.L_cro if cell.kind is CostKind.CROSS else breakdown.L_int
        if cell.value != expected:
            anomalies.append(Anomaly(
                row=row.row,
                params=row.params,
                scheme=cell.scheme,
                kind=cell.kind,
                published=cell.value,
                expected=expected,
                annotation=cell.annotation
            ))
    return anomalies


def detect_all_anomalies(
    rows: Tuple[PublishedCostRow, ...] = PUBLISHED_COSTS,
    logger: Optional[logging.Logger] = None
) -> List[Anomaly]:
    ''' Runs :func:`detect_anomalies` on every row, logging each finding as a warning. '''
    anomalies = [anomaly for row in rows for anomaly in detect_anomalies(row)]
    if logger is not None:
        for anomaly in anomalies:
            logger.warning(f'published cost table: {anomaly}')
    return anomalies


def find_cost_row(params: Tuple[int, ...]) -> Optional[PublishedCostRow]:
    ''' The published cost row of a ``(K, P, Q, N, r)`` tuple, if there is one. '''
    for row in PUBLISHED_COSTS:
        if row.params == tuple(params):
            return row
    return None


def find_locality_row(params: Tuple[int, ...]) -> Optional[PublishedLocalityRow]:
    ''' The published locality row of a ``(K, P, r_f, N)`` tuple, if there is one. '''
    for row in PUBLISHED_LOCALITY:
        if row.params == tuple(params):
            return row
    return None


def annotation_map() -> Dict[Tuple[int, Scheme, CostKind], CellAnnotation]:
    ''' The annotation of every published cost cell by ``(row, scheme, kind)``. '''
    return {
        (row.row, cell.scheme, cell.kind): cell.annotation
        for row in PUBLISHED_COSTS for cell in row.cells
    }
