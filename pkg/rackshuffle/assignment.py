''' Map task assignment of the Uncoded, Coded and Hybrid Coded MapReduce schemes.

The input of a job is split into ``N`` subfiles, and each subfile is the input of one Map task.
An assignment tells which servers execute the Map task of each subfile:

- :func:`assign_uncoded` gives each server a block of ``N / K`` consecutive subfiles.
- :func:`assign_coded` repeats each Map task on ``r`` servers: every ``r``-subset of the ``K``
  servers receives its own block of ``J = N / C(K, r)`` subfiles.
- :func:`assign_hybrid` splits the subfiles into ``K_r`` layers, and repeats the Map tasks of a
  layer across ``r`` racks only: every ``r``-subset ``T`` of racks receives ``M`` subfiles of the
  layer, mapped by the servers of the layer in the racks of ``T``. No two servers of the same rack
  share a subfile.

All schemes reduce keys in contiguous blocks: server ``s`` reduces the keys
``((s - 1) * Q / K, s * Q / K]``, hence rack ``i`` reduces ``((i - 1) * Q / P, i * Q / P]``.
'''

from typing import Tuple, Optional, Sequence, List, Dict, FrozenSet, TextIO, Iterator, Union
from dataclasses import dataclass, field
from collections import Counter, defaultdict
from enum import Enum
import itertools
import math

import numpy as np

from . import lazy_property
from .errors import ParameterError
from .topology import ClusterTopology, ServerRef


class Scheme(Enum):
    ''' The MapReduce shuffle schemes. The value is the short tag used in reports. '''

    UNCODED = 'Unc'
    ''' No Map task replication, unicast shuffle. '''

    CODED = 'Cod'
    ''' Coded MapReduce: Map tasks repeated on ``r`` servers, coded multicast shuffle. '''

    HYBRID = 'Hyb'
    ''' Hybrid Coded MapReduce: Map tasks repeated on ``r`` racks, coded cross-rack stage followed
    by an uncoded intra-rack stage. '''

    @classmethod
    def from_value(cls, value: Union[str, 'Scheme']) -> 'Scheme':
        ''' Converts the tag (``Unc``), the name (``uncoded``) or the instance to a scheme. '''
        if isinstance(value, Scheme):
            return value
        for scheme in cls:
            if value.lower() in (scheme.value.lower(), scheme.name.lower()):
                return scheme
        raise ParameterError(f'Unknown scheme: {value}')


SCHEME_ORDER = (Scheme.UNCODED, Scheme.CODED, Scheme.HYBRID)
''' The order of the schemes in reports. '''


@dataclass(frozen=True)
class JobParams:
    ''' Parameters of a MapReduce job.

    Args:
        N (int): The number of subfiles
        Q (Optional[int]): The number of keys. Can be omitted when only the Map task assignment is
            of interest, for example in data locality studies.
        r (int): The Map task replication factor. Ignored by the Uncoded scheme, which uses 1.
        scheme (Scheme): The shuffle scheme
    '''

    # pylint: disable=invalid-name

    N: int
    Q: Optional[int] = None
    r: int = 1
    scheme: Scheme = Scheme.HYBRID

    @property
    def replication(self) -> int:
        ''' The effective Map task replication factor (1 for the Uncoded scheme). '''
        return 1 if self.scheme is Scheme.UNCODED else self.r


class ConditionKind(Enum):
    ''' Which operations a divisibility condition is required by. '''

    STRUCTURAL = 'structural'
    ''' Required to build the Map task assignment. '''

    KEYS = 'keys'
    ''' Required to distribute the reduce keys; checked whenever ``Q`` is given. '''

    MULTICAST = 'multicast'
    ''' Required to split the coded multicasts evenly among senders; checked by the shuffle. '''


@dataclass(frozen=True)
class Condition:
    ''' A named precondition and whether it holds. '''

    name: str
    ''' The condition, for example ``'K | N'``. '''

    holds: bool
    ''' True if the condition is satisfied. '''

    kind: ConditionKind = ConditionKind.STRUCTURAL
    ''' Which operations need this condition. '''

    @property
    def violation(self) -> str:
        ''' The negated form of the condition, for example ``'K ∤ N'``. '''
        if ' | ' in self.name:
            return self.name.replace(' | ', ' ∤ ')
        return f'not {self.name}'


def _divides(divisor: int, value: int) -> bool:
    return divisor != 0 and value % divisor == 0


def check_conditions(topology: ClusterTopology, params: JobParams) -> List[Condition]:
    ''' Evaluates every divisibility condition of the job's scheme.

    Args:
        topology: The cluster topology.
        params: The job parameters.

    Returns:
        The list of conditions in a fixed order. Key conditions are listed only if ``Q`` is given.
    '''
    # pylint: disable=invalid-name
    K, P, N, Q, r = topology.K, topology.P, params.N, params.Q, params.r
    conditions = [Condition('N ≥ 1', N >= 1)]
    if params.scheme is Scheme.UNCODED:
        conditions.append(Condition('K | N', _divides(K, N)))
        if Q is not None:
            conditions.append(Condition('K | Q', Q >= 1 and _divides(K, Q), ConditionKind.KEYS))
    elif params.scheme is Scheme.CODED:
        r_ok = 1 <= r <= K
        conditions.append(Condition('1 ≤ r ≤ K', r_ok))
        subsets = math.comb(K, r) if r_ok else 0
        conditions.append(Condition('C(K,r) | N', r_ok and _divides(subsets, N)))
        if Q is not None:
            conditions.append(Condition('K | Q', Q >= 1 and _divides(K, Q), ConditionKind.KEYS))
        if r_ok and r < K and _divides(subsets, N):
            J = N // subsets
            conditions.append(Condition('r | J', _divides(r, J), ConditionKind.MULTICAST))
    else:
        r_ok = 1 <= r <= P
        conditions.append(Condition('1 ≤ r ≤ P', r_ok))
        layer_ok = _divides(topology.K_r, N)
        conditions.append(Condition('K_r | N', layer_ok))
        layer_size = N // topology.K_r if layer_ok else 0
        subsets = math.comb(P, r) if r_ok else 0
        conditions.append(Condition('C(P,r) | NP/K', layer_ok and r_ok and _divides(subsets, layer_size)))
        if Q is not None:
            conditions.append(Condition('P | Q', Q >= 1 and _divides(P, Q), ConditionKind.KEYS))
            conditions.append(Condition('K | Q', Q >= 1 and _divides(K, Q), ConditionKind.KEYS))
        if layer_ok and r_ok and r < P and _divides(subsets, layer_size):
            M = layer_size // subsets
            conditions.append(Condition('r | M', _divides(r, M), ConditionKind.MULTICAST))
    return conditions


def require_conditions(
    topology: ClusterTopology,
    params: JobParams,
    kinds: Sequence[ConditionKind] = (ConditionKind.STRUCTURAL, ConditionKind.KEYS)
) -> None:
    ''' Raises an error for the first violated condition of the given kinds.

    Raises:
        ParameterError: If a condition does not hold. The ``condition`` attribute of the error
            contains the negated condition, for example ``'C(P,r) ∤ NP/K'``.
    '''
    for cond in check_conditions(topology, params):
        if cond.kind in kinds and not cond.holds:
            raise ParameterError(
                f'{cond.violation} for {params.scheme.name.lower()} scheme '
                f'(K={topology.K}, P={topology.P}, N={params.N}, Q={params.Q}, r={params.r})',
                condition=cond.violation
            )


@dataclass(frozen=True)
class SubfileLabel:
    ''' The structural position of a subfile in a Hybrid assignment.

    Args:
        layer (int): The layer of the subfile in ``[1, K_r]``
        subset (Tuple[int, ...]): The sorted ``r``-subset of racks that map the subfile
        w (int): The index of the subfile among the subfiles of ``(layer, subset)``, in ``[1, M]``
    '''
    layer: int
    subset: Tuple[int, ...]
    w: int # pylint: disable=invalid-name


@dataclass(frozen=True)
class LayerGrouping:
    ''' A partition of the servers into ``K_r`` layers with exactly one server per rack.

    ``slots[l - 1][t - 1]`` is the within-rack slot of the rack ``t`` server of layer ``l``. The
    identity grouping puts server ``S(t, l)`` in layer ``l``.

    Args:
        slots (Tuple[Tuple[int, ...], ...]): The slot table, one row per layer
    '''

    slots: Tuple[Tuple[int, ...], ...]

    @classmethod
    def identity(cls, topology: ClusterTopology) -> 'LayerGrouping':
        ''' The grouping where layer ``l`` consists of the servers in slot ``l``. '''
        return cls(tuple(
            tuple(layer for _ in range(topology.P)) for layer in range(1, topology.K_r + 1)
        ))

    @classmethod
    def from_rack_permutations(cls, perms: Sequence[Sequence[int]]) -> 'LayerGrouping':
        ''' Builds a grouping from one slot permutation per rack.

        Args:
            perms: ``perms[t - 1][l - 1]`` is the slot of the rack ``t`` server in layer ``l``.
        '''
        k_r = len(perms[0])
        return cls(tuple(tuple(int(perm[layer]) for perm in perms) for layer in range(k_r)))

    @classmethod
    def random(cls, topology: ClusterTopology, rng: np.random.Generator) -> 'LayerGrouping':
        ''' Draws a uniformly random grouping. Rack 1 keeps the identity order. '''
        perms = [list(range(1, topology.K_r + 1))]
        for _ in range(1, topology.P):
            perms.append([int(s) + 1 for s in rng.permutation(topology.K_r)])
        return cls.from_rack_permutations(perms)

    def rack_permutation(self, rack: int) -> Tuple[int, ...]:
        ''' The slots of the given rack's servers in layer order. '''
        return tuple(row[rack - 1] for row in self.slots)

    def members(self, topology: ClusterTopology, layer: int) -> Tuple[ServerRef, ...]:
        ''' The servers of a layer in rack order. '''
        return tuple(
            topology.server(rack, slot) for rack, slot in enumerate(self.slots[layer - 1], start=1)
        )

    def server(self, topology: ClusterTopology, layer: int, rack: int) -> ServerRef:
        ''' The server of the given rack in the given layer. '''
        return topology.server(rack, self.slots[layer - 1][rack - 1])

    def swap(self, rack: int, layer_a: int, layer_b: int) -> 'LayerGrouping':
        ''' Returns a new grouping where the rack's servers of two layers are exchanged. '''
        rows = [list(row) for row in self.slots]
        rows[layer_a - 1][rack - 1], rows[layer_b - 1][rack - 1] = (
            rows[layer_b - 1][rack - 1], rows[layer_a - 1][rack - 1]
        )
        return LayerGrouping(tuple(tuple(row) for row in rows))

    def canonical(self) -> 'LayerGrouping':
        ''' Relabels the layers so that layer ``l`` contains the rack 1 server of slot ``l``. '''
        return LayerGrouping(tuple(sorted(self.slots, key=lambda row: row[0])))

    def key(self) -> Tuple[int, ...]:
        ''' A sort key of the canonical form, used for deterministic tie-breaking. '''
        return tuple(itertools.chain.from_iterable(self.canonical().slots))

    def is_valid(self, topology: ClusterTopology) -> bool:
        ''' Checks that the table assigns every server to exactly one layer. '''
        if len(self.slots) != topology.K_r or any(len(row) != topology.P for row in self.slots):
            return False
        expected = list(range(1, topology.K_r + 1))
        return all(
            sorted(self.rack_permutation(rack)) == expected for rack in range(1, topology.P + 1)
        )


def enumerate_groupings(topology: ClusterTopology) -> Iterator[LayerGrouping]:
    ''' Enumerates the ``(K_r!)^(P - 1)`` canonical groupings in lexicographic order. '''
    identity = tuple(range(1, topology.K_r + 1))
    for perms in itertools.product(
        itertools.permutations(identity), repeat=topology.P - 1
    ):
        yield LayerGrouping.from_rack_permutations((identity,) + perms)


def grouping_count(topology: ClusterTopology) -> int:
    ''' The number of canonical groupings, ``(K_r!)^(P - 1)``. '''
    return math.factorial(topology.K_r) ** (topology.P - 1)


@dataclass(frozen=True)
class MapAssignment:
    ''' The servers that execute the Map task of each subfile.

    Args:
        topology (ClusterTopology): The cluster
        params (JobParams): The job parameters
        mapping (Tuple[Tuple[int, ...], ...]): ``mapping[i - 1]`` is the sorted tuple of the flat
            indices of the servers that map subfile ``i``
    '''

    topology: ClusterTopology
    params: JobParams
    mapping: Tuple[Tuple[int, ...], ...]

    @property
    def scheme(self) -> Scheme:
        ''' The scheme of the job. '''
        return self.params.scheme

    @property
    def N(self) -> int: # pylint: disable=invalid-name
        ''' The number of subfiles. '''
        return len(self.mapping)

    def servers_of(self, subfile: int) -> Tuple[ServerRef, ...]:
        ''' The servers mapping a subfile. '''
        return tuple(self.topology.unflatten(flat) for flat in self.mapping[subfile - 1])

    @lazy_property
    def _subfiles_by_server(self) -> Dict[int, Tuple[int, ...]]:
        result = defaultdict(list)
        for subfile, flats in enumerate(self.mapping, start=1):
            for flat in flats:
                result[flat].append(subfile)
        return {flat: tuple(result.get(flat, ())) for flat in range(1, self.topology.K + 1)}

    def subfiles_of(self, server: Union[int, ServerRef]) -> Tuple[int, ...]:
        ''' The sorted subfiles mapped by a server (given by flat index or reference). '''
        flat = server.flat if isinstance(server, ServerRef) else server
        return self._subfiles_by_server.get(flat, ())

    @lazy_property
    def _subfiles_by_server_set(self) -> Dict[FrozenSet[int], Tuple[int, ...]]:
        result = defaultdict(list)
        for subfile, flats in enumerate(self.mapping, start=1):
            result[frozenset(flats)].append(subfile)
        return {servers: tuple(subfiles) for servers, subfiles in result.items()}

    def subfiles_mapped_exactly_at(self, flats: Sequence[int]) -> Tuple[int, ...]:
        ''' The subfiles whose mapping server set equals the given set. '''
        return self._subfiles_by_server_set.get(frozenset(flats), ())

    def reduce_keys(self, server: Union[int, ServerRef]) -> range:
        ''' The keys reduced by a server. Requires ``Q``. '''
        flat = server.flat if isinstance(server, ServerRef) else server
        return server_keys(self.topology, self._require_q(), flat)

    def rack_keys(self, rack: int) -> range:
        ''' The keys reduced by the servers of a rack. Requires ``Q``. '''
        return rack_keys(self.topology, self._require_q(), rack)

    def _require_q(self) -> int:
        if self.params.Q is None:
            raise ParameterError('The number of keys Q is required to distribute reduce keys')
        return self.params.Q


@dataclass(frozen=True)
class HybridAssignment(MapAssignment):
    ''' A Hybrid Coded MapReduce assignment with the structural label of each subfile.

    Args:
        labels (Tuple[SubfileLabel, ...]): ``labels[i - 1]`` is the label ``F_{T,w}^{(layer)}`` of
            subfile ``i``
        permutation (Tuple[int, ...]): ``permutation[p - 1]`` is the subfile placed at structural
            position ``p``
        grouping (LayerGrouping): The layer grouping of the servers
    '''

    labels: Tuple[SubfileLabel, ...] = field(default=())
    permutation: Tuple[int, ...] = field(default=())
    grouping: Optional[LayerGrouping] = None

    @property
    def M(self) -> int: # pylint: disable=invalid-name
        ''' The number of subfiles per ``(layer, rack subset)``. '''
        return hybrid_m(self.topology, self.params)

    @lazy_property
    def _subfiles_by_class(self) -> Dict[Tuple[int, Tuple[int, ...]], Tuple[int, ...]]:
        result = defaultdict(list)
        for subfile, label in enumerate(self.labels, start=1):
            result[(label.layer, label.subset)].append((label.w, subfile))
        return {cls: tuple(s for _, s in sorted(items)) for cls, items in result.items()}

    def subfiles_of_class(self, layer: int, subset: Sequence[int]) -> Tuple[int, ...]:
        ''' The subfiles of ``(layer, subset)`` ordered by their index ``w``. '''
        return self._subfiles_by_class.get((layer, tuple(subset)), ())

    def layer_subfiles(self, layer: int) -> Tuple[int, ...]:
        ''' The sorted subfiles of a layer. '''
        return tuple(
            subfile for subfile, label in enumerate(self.labels, start=1) if label.layer == layer
        )


def server_keys(topology: ClusterTopology, Q: int, flat: int) -> range: # pylint: disable=invalid-name
    ''' The contiguous block of ``Q / K`` keys reduced by a server. '''
    size = Q // topology.K
    return range((flat - 1) * size + 1, flat * size + 1)


def rack_keys(topology: ClusterTopology, Q: int, rack: int) -> range: # pylint: disable=invalid-name
    ''' The contiguous block of ``Q / P`` keys reduced by the servers of a rack. '''
    size = Q // topology.P
    return range((rack - 1) * size + 1, rack * size + 1)


def coded_j(topology: ClusterTopology, params: JobParams) -> int:
    ''' The number of subfiles per ``r``-subset of servers, ``J = N / C(K, r)``. '''
    return params.N // math.comb(topology.K, params.r)


def hybrid_m(topology: ClusterTopology, params: JobParams) -> int:
    ''' The number of subfiles per layer and ``r``-subset of racks, ``M = (NP/K) / C(P, r)``. '''
    return params.N // topology.K_r // math.comb(topology.P, params.r)


def _check_scheme(params: JobParams, scheme: Scheme) -> None:
    if params.scheme is not scheme:
        raise ParameterError(
            f'Expected {scheme.name.lower()} job parameters, got {params.scheme.name.lower()}'
        )


def assign_uncoded(topology: ClusterTopology, params: JobParams) -> MapAssignment:
    ''' Assigns ``N / K`` consecutive subfiles to each server in flat index order.

    Raises:
        ParameterError: If a divisibility condition fails.
    '''
    _check_scheme(params, Scheme.UNCODED)
    require_conditions(topology, params)
    block = params.N // topology.K
    mapping = tuple(((subfile - 1) // block + 1,) for subfile in range(1, params.N + 1))
    return MapAssignment(topology=topology, params=params, mapping=mapping)


def assign_coded(topology: ClusterTopology, params: JobParams) -> MapAssignment:
    ''' Assigns ``J`` consecutive subfiles to each ``r``-subset of servers.

    The ``C(K, r)`` subsets are enumerated in lexicographic order of the flat indices, and the
    ``m``-th subset receives the subfiles ``((m - 1) J, m J]``.

    Raises:
        ParameterError: If a divisibility condition fails.
    '''
    _check_scheme(params, Scheme.CODED)
    require_conditions(topology, params)
    J = coded_j(topology, params) # pylint: disable=invalid-name
    mapping = []
    for subset in itertools.combinations(range(1, topology.K + 1), params.r):
        mapping.extend([subset] * J)
    return MapAssignment(topology=topology, params=params, mapping=tuple(mapping))


def _check_permutation(permutation: Sequence[int], N: int) -> Tuple[int, ...]: # pylint: disable=invalid-name
    perm = tuple(int(p) for p in permutation)
    if len(perm) != N or sorted(perm) != list(range(1, N + 1)):
        raise ParameterError(
            f'The permutation must be a bijection on [1, {N}]', condition='invalid permutation'
        )
    return perm


def assign_hybrid(
    topology: ClusterTopology,
    params: JobParams,
    permutation: Optional[Sequence[int]] = None,
    grouping: Optional[LayerGrouping] = None
) -> HybridAssignment:
    ''' Builds the Hybrid Coded MapReduce assignment.

    The structural positions ``1..N`` are split into ``K_r`` layers of ``NP / K`` consecutive
    positions. Within a layer, the ``C(P, r)`` rack subsets, in lexicographic order, receive ``M``
    consecutive positions each. Position ``p`` holds subfile ``permutation[p - 1]``, which is
    mapped by the servers of its layer in the racks of its subset.

    Args:
        topology: The cluster topology.
        params: The job parameters with ``scheme=Scheme.HYBRID``.
        permutation: A bijection on ``[1, N]``. Defaults to the identity.
        grouping: The layer grouping of the servers. Defaults to the identity grouping.

    Returns:
        The assignment with the labels of the subfiles.

    Raises:
        ParameterError: If a divisibility condition fails, or the permutation or the grouping is
            invalid.
    '''
    _check_scheme(params, Scheme.HYBRID)
    require_conditions(topology, params)
    N = params.N # pylint: disable=invalid-name
    perm = tuple(range(1, N + 1)) if permutation is None else _check_permutation(permutation, N)
    grouping = grouping or LayerGrouping.identity(topology)
    if not grouping.is_valid(topology):
        raise ParameterError('The layer grouping is not a valid partition', 'invalid grouping')

    M = hybrid_m(topology, params) # pylint: disable=invalid-name
    layer_size = N // topology.K_r
    subsets = list(itertools.combinations(range(1, topology.P + 1), params.r))
    labels: List[Optional[SubfileLabel]] = [None] * N
    mapping: List[Tuple[int, ...]] = [()] * N
    for position in range(N):
        layer = position // layer_size + 1
        offset = position % layer_size
        subset = subsets[offset // M]
        label = SubfileLabel(layer=layer, subset=subset, w=offset % M + 1)
        subfile = perm[position]
        labels[subfile - 1] = label
        mapping[subfile - 1] = tuple(sorted(
            grouping.server(topology, layer, rack).flat for rack in subset
        ))
    return HybridAssignment(
        topology=topology,
        params=params,
        mapping=tuple(mapping),
        labels=tuple(labels),
        permutation=perm,
        grouping=grouping
    )


def assign(
    topology: ClusterTopology,
    params: JobParams,
    permutation: Optional[Sequence[int]] = None,
    grouping: Optional[LayerGrouping] = None
) -> MapAssignment:
    ''' Dispatches to the assignment function of the job's scheme. '''
    if params.scheme is Scheme.UNCODED:
        return assign_uncoded(topology, params)
    if params.scheme is Scheme.CODED:
        return assign_coded(topology, params)
    return assign_hybrid(topology, params, permutation=permutation, grouping=grouping)


@dataclass(frozen=True)
class CheckResult:
    ''' The outcome of a named invariant check. '''

    name: str
    passed: bool
    detail: str = ''


@dataclass(frozen=True)
class ValidationReport:
    ''' The list of invariant checks of an assignment. '''

    checks: Tuple[CheckResult, ...]

    @property
    def ok(self) -> bool: # pylint: disable=invalid-name
        ''' True if every check passed. '''
        return all(check.passed for check in self.checks)

    def failed(self) -> List[str]:
        ''' The names of the failed checks. '''
        return [check.name for check in self.checks if not check.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


def validate(
    assignment: MapAssignment,
    topology: Optional[ClusterTopology] = None,
    params: Optional[JobParams] = None
) -> ValidationReport:
    ''' Checks every invariant of the assignment types.

    Violations are report entries, this function never raises for an invalid assignment.

    Args:
        assignment: The assignment to check.
        topology: The topology to check against, defaults to the assignment's own.
        params: The parameters to check against, defaults to the assignment's own.

    Returns:
        The report listing each named check with pass/fail.
    '''
    topology = topology or assignment.topology
    params = params or assignment.params
    checks: List[CheckResult] = []

    def add(name: str, passed: bool, detail: str = '') -> None:
        checks.append(CheckResult(name=name, passed=bool(passed), detail='' if passed else detail))

    conditions_ok = all(
        cond.holds for cond in check_conditions(topology, params)
        if cond.kind is not ConditionKind.MULTICAST
    )
    add('divisibility conditions', conditions_ok, 'a divisibility condition fails')

    in_range = len(assignment.mapping) == params.N and all(
        1 <= flat <= topology.K for flats in assignment.mapping for flat in flats
    )
    add('subfile ids', in_range, f'expected {params.N} subfiles mapped on servers [1, {topology.K}]')

    replication = params.replication
    bad = [
        subfile for subfile, flats in enumerate(assignment.mapping, start=1)
        if len(set(flats)) != replication or len(flats) != replication
    ]
    add('multiplicity', not bad,
        f'subfile {bad[0] if bad else ""} is not mapped by exactly {replication} distinct servers')

    if params.Q is not None and conditions_ok:
        Q = params.Q # pylint: disable=invalid-name
        blocks = [server_keys(topology, Q, s.flat) for s in topology.servers()]
        keys = sorted(key for block in blocks for key in block)
        add('reduce keys partition', keys == list(range(1, Q + 1)), 'key blocks do not partition [1, Q]')
        rack_sizes = {
            rack: sum(len(server_keys(topology, Q, s.flat)) for s in topology.rack(rack))
            for rack in range(1, topology.P + 1)
        }
        add('rack key sets', all(size == Q // topology.P for size in rack_sizes.values()),
            'a rack does not reduce Q/P keys')

    if not (in_range and conditions_ok):
        return ValidationReport(tuple(checks))

    loads = Counter(flat for flats in assignment.mapping for flat in set(flats))
    if params.scheme is Scheme.UNCODED:
        expected = params.N // topology.K
        add('balanced load', all(loads[s.flat] == expected for s in topology.servers()),
            f'a server does not map N/K={expected} subfiles')
    elif params.scheme is Scheme.CODED:
        J = coded_j(topology, params) # pylint: disable=invalid-name
        shared = Counter(frozenset(flats) for flats in assignment.mapping)
        add('r-subsets share J', all(
            shared[frozenset(subset)] == J
            for subset in itertools.combinations(range(1, topology.K + 1), params.r)
        ), f'an r-subset of servers does not share exactly J={J} subfiles')
        expected = math.comb(topology.K - 1, params.r - 1) * J
        add('balanced load', all(loads[s.flat] == expected for s in topology.servers()),
            f'a server does not map C(K-1,r-1)J={expected} subfiles')
    else:
        _validate_hybrid(assignment, topology, params, loads, add)
    return ValidationReport(tuple(checks))


def _validate_hybrid(assignment, topology, params, loads, add) -> None:
    # pylint: disable=invalid-name
    M = hybrid_m(topology, params)
    same_rack_pairs = [
        subfile for subfile, flats in enumerate(assignment.mapping, start=1)
        if len({topology.rack_of(flat) for flat in flats}) != len(flats)
    ]
    add('no common files in a rack', not same_rack_pairs,
        f'subfile {same_rack_pairs[0] if same_rack_pairs else ""} is mapped twice in a rack')

    if not isinstance(assignment, HybridAssignment) or len(assignment.labels) != params.N:
        add('labels', False, 'the assignment carries no hybrid labels')
        return
    grouping = assignment.grouping or LayerGrouping.identity(topology)
    add('layer grouping', grouping.is_valid(topology), 'the layer grouping is not a partition')
    add('permutation', sorted(assignment.permutation) == list(range(1, params.N + 1)),
        'the permutation is not a bijection')
    if not grouping.is_valid(topology):
        return

    layer_sizes = Counter(label.layer for label in assignment.labels)
    add('layer sizes', all(
        layer_sizes[layer] == params.N // topology.K_r for layer in range(1, topology.K_r + 1)
    ), 'a layer does not hold NP/K subfiles')
    class_sizes = Counter((label.layer, label.subset) for label in assignment.labels)
    add('subset sizes', all(
        class_sizes[(layer, subset)] == M
        for layer in range(1, topology.K_r + 1)
        for subset in itertools.combinations(range(1, topology.P + 1), params.r)
    ), f'a (layer, subset) pair does not hold M={M} subfiles')
    mismatched = [
        subfile for subfile, label in enumerate(assignment.labels, start=1)
        if tuple(sorted(grouping.server(topology, label.layer, rack).flat for rack in label.subset))
            != tuple(sorted(assignment.mapping[subfile - 1]))
    ]
    add('label consistency', not mismatched,
        f'subfile {mismatched[0] if mismatched else ""} is not mapped at the servers of its label')
    expected = math.comb(topology.P - 1, params.r - 1) * M
    add('balanced load', all(loads[s.flat] == expected for s in topology.servers()),
        f'a server does not map C(P-1,r-1)M={expected} subfiles')


def dump_assignment(assignment: MapAssignment, stream: TextIO) -> None:
    ''' Writes the assignment in the line-oriented text format.

    Each line reads ``subfile<TAB>layer<TAB>subset<TAB>w<TAB>servers`` where ``subset`` is the
    comma-separated list of rack ids and ``servers`` the comma-separated list of flat server ids.
    The structural fields are ``-`` for non-hybrid assignments.
    '''
    labels = assignment.labels if isinstance(assignment, HybridAssignment) else ()
    for subfile, flats in enumerate(assignment.mapping, start=1):
        if labels:
            label = labels[subfile - 1]
            structural = [str(label.layer), ','.join(map(str, label.subset)), str(label.w)]
        else:
            structural = ['-', '-', '-']
        stream.write('\t'.join([str(subfile)] + structural + [','.join(map(str, flats))]) + '\n')


def load_assignment(stream: TextIO, topology: ClusterTopology, params: JobParams) -> MapAssignment:
    ''' Reads an assignment written by :func:`dump_assignment`.

    Raises:
        ParameterError: If the text is malformed.
    '''
    rows = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split('\t')
        if len(parts) != 5:
            raise ParameterError(f'Line {lineno}: expected 5 tab-separated fields, got {len(parts)}')
        try:
            subfile = int(parts[0])
            flats = tuple(sorted(int(p) for p in parts[4].split(',')))
            label = None
            if parts[1] != '-':
                label = SubfileLabel(
                    layer=int(parts[1]),
                    subset=tuple(int(p) for p in parts[2].split(',')),
                    w=int(parts[3])
                )
        except ValueError as exc:
            raise ParameterError(f'Line {lineno}: {exc}') from exc
        rows[subfile] = (flats, label)
    if sorted(rows) != list(range(1, len(rows) + 1)):
        raise ParameterError('Subfile ids must be 1..N without gaps')
    mapping = tuple(rows[s][0] for s in sorted(rows))
    if params.scheme is not Scheme.HYBRID:
        return MapAssignment(topology=topology, params=params, mapping=mapping)

    labels = tuple(rows[s][1] for s in sorted(rows))
    if any(label is None for label in labels):
        raise ParameterError('Hybrid assignments need the layer, subset and w fields')
    subsets = list(itertools.combinations(range(1, topology.P + 1), params.r))
    M = hybrid_m(topology, params) # pylint: disable=invalid-name
    layer_size = params.N // topology.K_r
    permutation = [0] * len(labels)
    slots = [[0] * topology.P for _ in range(topology.K_r)]
    for subfile, label in enumerate(labels, start=1):
        position = (label.layer - 1) * layer_size + subsets.index(label.subset) * M + label.w - 1
        permutation[position] = subfile
        for flat in mapping[subfile - 1]:
            server = topology.unflatten(flat)
            slots[label.layer - 1][server.rack - 1] = server.slot
    return HybridAssignment(
        topology=topology,
        params=params,
        mapping=mapping,
        labels=labels,
        permutation=tuple(permutation),
        grouping=LayerGrouping(tuple(tuple(row) for row in slots))
    )
