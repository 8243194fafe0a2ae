''' Replica placement of the subfiles in the storage layer, and the data locality of Map tasks.

The storage layer keeps ``r_f`` replicas of every subfile on distinct servers. A Map task has
node locality if its server stores a replica of its subfile, and rack locality if some server of
its rack does. For a pair of servers ``(j, k)`` mapping subfile ``i``, the locality measure is

    ``C(i, j, k) = lambda * NodeLocality + (1 - lambda) * RackLocality``

where NodeLocality counts the servers of ``{j, k}`` storing ``i``, RackLocality counts the racks
of ``j`` and ``k`` storing ``i`` (a rack shared by ``j`` and ``k`` counts twice), and
``C(i, j, j) = 0``.
'''

from typing import Tuple, Callable, Dict, TextIO, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import lazy_property
from .errors import ParameterError
from .topology import ClusterTopology
from .assignment import MapAssignment


class PlacementPolicy(Enum):
    ''' Replica placement policies. '''

    UNIFORM = 'uniform'
    ''' Distinct servers drawn uniformly, resampled until the replicas span at least two racks. '''

    HDFS_DEFAULT = 'hdfs'
    ''' The default block placement of HDFS: the second replica goes to another rack, the third
    to the second replica's rack, further replicas to random unused servers. '''


@dataclass(frozen=True)
class ReplicaPlacement:
    ''' The servers storing each subfile.

    Args:
        topology (ClusterTopology): The cluster
        stores (Tuple[Tuple[int, ...], ...]): ``stores[i - 1]`` is the sorted tuple of the flat
            indices of the servers storing subfile ``i``
    '''

    topology: ClusterTopology
    stores: Tuple[Tuple[int, ...], ...]

    @property
    def N(self) -> int: # pylint: disable=invalid-name
        ''' The number of subfiles. '''
        return len(self.stores)

    @lazy_property
    def matrix(self) -> np.ndarray:
        ''' Boolean array of shape ``(N, K)``, true where a server stores a subfile. '''
        result = np.zeros((self.N, self.topology.K), dtype=bool)
        for idx, flats in enumerate(self.stores):
            result[idx, [f - 1 for f in flats]] = True
        result.setflags(write=False)
        return result

    @lazy_property
    def rack_matrix(self) -> np.ndarray:
        ''' Boolean array of shape ``(N, P)``, true where a rack stores a subfile. '''
        k_r = self.topology.K_r
        result = self.matrix.reshape(self.N, self.topology.P, k_r).any(axis=2)
        result.setflags(write=False)
        return result

    def servers_of(self, subfile: int) -> Tuple[int, ...]:
        ''' The flat indices of the servers storing a subfile. '''
        return self.stores[subfile - 1]

    def stored_at(self, subfile: int, flat: int) -> bool:
        ''' True if the server stores the subfile. '''
        return bool(self.matrix[subfile - 1, flat - 1])

    def stored_in_rack(self, subfile: int, rack: int) -> bool:
        ''' True if some server of the rack stores the subfile. '''
        return bool(self.rack_matrix[subfile - 1, rack - 1])


@dataclass(frozen=True)
class LocalityWeights:
    ''' The weight ``lambda`` of node locality in the locality measure.

    Args:
        lambda_ (float): In ``(0.5, 1]``, so node locality always weighs more than rack locality

    Raises:
        ParameterError: If ``lambda_`` is out of range.
    '''

    lambda_: float = 0.75

    def __post_init__(self):
        if not 0.5 < self.lambda_ <= 1.0:
            raise ParameterError(
                f'lambda must be in (0.5, 1], got {self.lambda_}', 'lambda ∉ (0.5, 1]'
            )

    def combine(self, node, rack):
        ''' ``lambda * node + (1 - lambda) * rack``, works on arrays too. '''
        return self.lambda_ * node + (1.0 - self.lambda_) * rack


def _place_uniform(topology: ClusterTopology, r_f: int, rng: np.random.Generator) -> Tuple[int, ...]:
    spread = r_f >= 2 and topology.P >= 2
    while True:
        chosen = rng.choice(topology.K, size=r_f, replace=False) + 1
        if not spread or len({topology.rack_of(int(f)) for f in chosen}) >= 2:
            return tuple(sorted(int(f) for f in chosen))


def _place_hdfs(topology: ClusterTopology, r_f: int, rng: np.random.Generator) -> Tuple[int, ...]:
    chosen = [int(rng.integers(topology.K)) + 1]

    def pick(candidates: Sequence[int]) -> None:
        candidates = [c for c in candidates if c not in chosen]
        if not candidates:
            candidates = [f for f in range(1, topology.K + 1) if f not in chosen]
        chosen.append(int(candidates[int(rng.integers(len(candidates)))]))

    first_rack = topology.rack_of(chosen[0])
    if r_f >= 2:
        pick([f for f in range(1, topology.K + 1) if topology.rack_of(f) != first_rack])
    if r_f >= 3:
        second_rack = topology.rack_of(chosen[1])
        pick([s.flat for s in topology.rack(second_rack)])
    while len(chosen) < r_f:
        pick(range(1, topology.K + 1))
    return tuple(sorted(chosen))


PLACEMENT_POLICIES: Dict[PlacementPolicy, Callable[[ClusterTopology, int, np.random.Generator], Tuple[int, ...]]] = {
    PlacementPolicy.UNIFORM: _place_uniform,
    PlacementPolicy.HDFS_DEFAULT: _place_hdfs,
}


def place_replicas(
    topology: ClusterTopology,
    N: int, # pylint: disable=invalid-name
    r_f: int,
    seed: int,
    policy: PlacementPolicy = PlacementPolicy.UNIFORM
) -> ReplicaPlacement:
    ''' Places ``r_f`` replicas of each subfile on distinct servers.

    With both policies the replicas of a subfile span at least two racks whenever ``r_f >= 2``
    and ``P >= 2``.

    Args:
        topology: The cluster.
        N: The number of subfiles.
        r_f: The file replication factor in ``[1, K]``.
        seed: The seed of the random generator.
        policy: The placement policy.

    Raises:
        ParameterError: If ``r_f`` or ``N`` is out of range.
    '''
    if not 1 <= r_f <= topology.K:
        raise ParameterError(
            f'The file replication must be in [1, K={topology.K}], got r_f={r_f}', 'r_f > K'
        )
    if N < 1:
        raise ParameterError(f'The number of subfiles must be positive, got N={N}', 'N < 1')
    rng = np.random.default_rng(seed)
    place = PLACEMENT_POLICIES[policy]
    return ReplicaPlacement(topology=topology, stores=tuple(place(topology, r_f, rng) for _ in range(N)))


def locality_measure(
    placement: ReplicaPlacement,
    weights: LocalityWeights,
    i: int,
    j: int,
    k: int
) -> float:
    ''' The locality measure ``C(i, j, k)`` of subfile ``i`` mapped by servers ``j`` and ``k``. '''
    if j == k:
        return 0.0
    topology = placement.topology
    node = int(placement.stored_at(i, j)) + int(placement.stored_at(i, k))
    rack = (
        int(placement.stored_in_rack(i, topology.rack_of(j)))
        + int(placement.stored_in_rack(i, topology.rack_of(k)))
    )
    return float(weights.combine(node, rack))


def locality_tensor(placement: ReplicaPlacement, weights: LocalityWeights) -> np.ndarray:
    ''' The locality measure of all subfiles and server pairs.

    Returns:
        A float array of shape ``(N, K, K)``; entry ``[i - 1, j - 1, k - 1]`` is ``C(i, j, k)``.
    '''
    topology = placement.topology
    node = placement.matrix.astype(np.float64)
    rack_of_server = np.repeat(np.arange(topology.P), topology.K_r)
    rack = placement.rack_matrix[:, rack_of_server].astype(np.float64)
    tensor = weights.combine(
        node[:, :, None] + node[:, None, :],
        rack[:, :, None] + rack[:, None, :]
    )
    diag = np.arange(topology.K)
    tensor[:, diag, diag] = 0.0
    return tensor


@dataclass(frozen=True)
class LocalityStats:
    ''' The share of Map tasks with node and rack locality, in percent. '''

    node_pct: float
    rack_pct: float


def locality_stats(assignment: MapAssignment, placement: ReplicaPlacement) -> LocalityStats:
    ''' Measures the data locality of the Map tasks of an assignment.

    Every ``(subfile, mapping server)`` pair is a Map task, so an ``r = 2`` assignment has
    ``2N`` of them.

    Raises:
        ParameterError: If the assignment and the placement disagree on ``N``.
    '''
    if assignment.N != placement.N:
        raise ParameterError(
            f'The assignment has {assignment.N} subfiles, the placement {placement.N}', 'N mismatch'
        )
    topology = assignment.topology
    tasks = node = rack = 0
    for subfile, flats in enumerate(assignment.mapping, start=1):
        for flat in flats:
            tasks += 1
            node += placement.stored_at(subfile, flat)
            rack += placement.stored_in_rack(subfile, topology.rack_of(flat))
    if tasks == 0:
        return LocalityStats(node_pct=0.0, rack_pct=0.0)
    return LocalityStats(node_pct=100.0 * node / tasks, rack_pct=100.0 * rack / tasks)


def dump_placement(placement: ReplicaPlacement, stream: TextIO) -> None:
    ''' Writes one ``subfile_id<TAB>servers`` line per subfile. '''
    for subfile, flats in enumerate(placement.stores, start=1):
        stream.write(f'{subfile}\t{",".join(map(str, flats))}\n')


def load_placement(stream: TextIO, topology: ClusterTopology) -> ReplicaPlacement:
    ''' Parses the format written by :func:`dump_placement`.

    Raises:
        ParameterError: If a line is malformed, the subfile ids are not ``1..N`` in order, or a
            server id is out of range or repeated.
    '''
    stores = []
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip('\n')
        if not line.strip():
            continue
        parts = line.split('\t')
        try:
            subfile = int(parts[0])
            flats = tuple(sorted(int(f) for f in parts[1].split(',')))
        except (IndexError, ValueError) as error:
            raise ParameterError(f'Malformed placement line {lineno}: {line!r}', 'malformed line') from error
        if subfile != len(stores) + 1:
            raise ParameterError(f'Unexpected subfile id {subfile} on line {lineno}', 'subfile order')
        if len(set(flats)) != len(flats) or any(not 1 <= f <= topology.K for f in flats):
            raise ParameterError(f'Invalid servers on line {lineno}: {parts[1]}', 'invalid servers')
        stores.append(flats)
    return ReplicaPlacement(topology=topology, stores=tuple(stores))
