''' Data locality optimization of Hybrid assignments with Map task replication ``r = 2``.

Every Hybrid assignment is described by the indicators

- ``X(i, j, k) = 1`` if subfile ``i`` is mapped by the server pair ``(j, k)`` (symmetric, zero on
  the diagonal), and
- ``Y(j, k) = 1`` if servers ``j`` and ``k`` share a subfile,

and maximizes the locality ``sum_i sum_j sum_k X(i, j, k) C(i, j, k)`` subject to four constraints:

1. no common files in a rack: ``X(i, j, k) = 0`` and ``Y(j, k) = 0`` for servers of the same rack,
2. common subfiles condition: ``sum_i X(i, j, k) = M Y(j, k)`` for all ``j, k``,
3. degree condition: ``sum_j Y(j, k) = P - 1`` for all ``k``,
4. transitivity: ``Y(i, j) + Y(j, k) + Y(i, k) != 2`` for distinct ``i, j, k``.

Constraints 1, 3 and 4 force the graph of ``Y`` to be a disjoint union of ``K/P`` cliques with one
server per rack, that is a :class:`~rackshuffle.assignment.LayerGrouping`. The structured solver
therefore searches over layer groupings, and for a fixed grouping places the subfiles on the
``(layer, rack pair, w)`` slots with a maximum weight bipartite assignment, which is exact.
'''

from typing import Optional, Tuple, List, Iterator
from dataclasses import dataclass
from enum import Enum
import concurrent.futures
import itertools
import logging
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError, UnsupportedParameterError, InstanceTooLargeError
from .assignment import (
    JobParams, Scheme, HybridAssignment, MapAssignment, LayerGrouping, CheckResult,
    ValidationReport, assign_hybrid, enumerate_groupings, grouping_count, hybrid_m,
    require_conditions
)
from .placement import ReplicaPlacement, LocalityWeights, LocalityStats, locality_tensor, locality_stats
from .topology import ClusterTopology
from .timepiece import Deadline, StopWatch

BRUTE_FORCE_LIMIT = 10 ** 7
''' The maximum number of candidates the brute-force oracle enumerates. '''

DEFAULT_BUDGET = 50


class SolverMethod(Enum):
    ''' The method that produced a :class:`SolverResult`. '''

    BRUTE_FORCE = 'BruteForce'
    STRUCTURED = 'Structured'
    RANDOM = 'Random'


def _same(a: float, b: float) -> bool: # pylint: disable=invalid-name
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


def _require_pairs(topology: ClusterTopology, params: JobParams) -> None:
    if params.scheme is not Scheme.HYBRID or params.r != 2:
        raise UnsupportedParameterError(
            f'Locality optimization supports hybrid assignments with r = 2 only, '
            f'got {params.scheme.name.lower()} with r = {params.r}',
            condition='r ≠ 2'
        )
    require_conditions(topology, params)


@dataclass(frozen=True)
class LocalityModel:
    ''' The variables of the locality program. All accessors take 1-based indices.

    Args:
        X (np.ndarray): ``(N, K, K)`` indicator array of the subfile pairs
        Y (np.ndarray): ``(K, K)`` indicator array of the server pairs sharing a subfile
        C (Optional[np.ndarray]): ``(N, K, K)`` locality measure, None without a placement
        M (int): The number of subfiles shared by two servers of a layer
    '''

    # pylint: disable=invalid-name
    X: np.ndarray
    Y: np.ndarray
    C: Optional[np.ndarray]
    M: int

    def x(self, i: int, j: int, k: int) -> int:
        return int(self.X[i - 1, j - 1, k - 1])

    def y(self, j: int, k: int) -> int:
        return int(self.Y[j - 1, k - 1])

    def c(self, i: int, j: int, k: int) -> float:
        if self.C is None:
            raise ParameterError('The model has no locality measure', 'no placement')
        return float(self.C[i - 1, j - 1, k - 1])

    def objective(self) -> float:
        ''' The objective value of ``X``. '''
        if self.C is None:
            raise ParameterError('The model has no locality measure', 'no placement')
        return objective(self.X, self.C)


def xy_from_assignment(assignment: MapAssignment) -> Tuple[np.ndarray, np.ndarray]:
    ''' Computes the indicator arrays of an assignment.

    Returns:
        ``X`` of shape ``(N, K, K)`` and ``Y`` of shape ``(K, K)``, both ``int8``.

    Raises:
        UnsupportedParameterError: If the Map task replication factor is not 2.
    '''
    if assignment.params.replication != 2:
        raise UnsupportedParameterError(
            f'The locality program needs r = 2, got r = {assignment.params.replication}',
            condition='r ≠ 2'
        )
    K = assignment.topology.K # pylint: disable=invalid-name
    X = np.zeros((assignment.N, K, K), dtype=np.int8) # pylint: disable=invalid-name
    for idx, flats in enumerate(assignment.mapping):
        j, k = flats
        X[idx, j - 1, k - 1] = 1
        X[idx, k - 1, j - 1] = 1
    Y = (X.sum(axis=0) > 0).astype(np.int8) # pylint: disable=invalid-name
    return X, Y


def build_model(
    assignment: HybridAssignment,
    placement: Optional[ReplicaPlacement] = None,
    weights: Optional[LocalityWeights] = None
) -> LocalityModel:
    ''' Builds the locality program variables of an assignment. '''
    X, Y = xy_from_assignment(assignment) # pylint: disable=invalid-name
    C = None # pylint: disable=invalid-name
    if placement is not None:
        C = locality_tensor(placement, weights or LocalityWeights()) # pylint: disable=invalid-name
    return LocalityModel(X=X, Y=Y, C=C, M=hybrid_m(assignment.topology, assignment.params))


def _first_index(mask: np.ndarray) -> Optional[Tuple[int, ...]]:
    hits = np.argwhere(mask)
    return tuple(int(v) + 1 for v in hits[0]) if hits.size else None


def check_constraints(X: np.ndarray, Y: np.ndarray, topology: ClusterTopology, M: int) -> ValidationReport: # pylint: disable=invalid-name
    ''' Evaluates the well-formedness of ``X`` and ``Y`` and the four constraints.

    Constraint 2 is evaluated for every ``(j, k)`` pair, same-rack pairs and ``j = k`` included.
    Failed checks carry the first violating 1-based index in their detail.

    Raises:
        ParameterError: If the array shapes do not match the topology.
    '''
    # pylint: disable=invalid-name
    X = np.asarray(X)
    Y = np.asarray(Y)
    K, P = topology.K, topology.P
    if X.ndim != 3 or X.shape[1:] != (K, K) or Y.shape != (K, K):
        raise ParameterError(
            f'Expected X of shape (N, {K}, {K}) and Y of shape ({K}, {K}), '
            f'got {X.shape} and {Y.shape}', 'shape mismatch'
        )
    checks: List[CheckResult] = []

    def add(name: str, bad: Optional[Tuple[int, ...]], what: str) -> None:
        checks.append(CheckResult(name, bad is None, '' if bad is None else f'{what} at {bad}'))

    diag = np.arange(K)
    add('X symmetric', _first_index(X != X.transpose(0, 2, 1)), 'X(i,j,k) ≠ X(i,k,j)')
    add('X diagonal', _first_index(X[:, diag, diag] != 0), 'X(i,j,j) ≠ 0')
    add('Y symmetric', _first_index(Y != Y.T), 'Y(j,k) ≠ Y(k,j)')
    add('Y diagonal', _first_index(Y[diag, diag] != 0), 'Y(j,j) ≠ 0')
    pair_counts = np.triu(X, k=1).sum(axis=(1, 2))
    add('one pair per subfile', _first_index(pair_counts != 1), 'subfile without exactly one pair')

    racks = np.repeat(np.arange(P), topology.K_r)
    same_rack = racks[:, None] == racks[None, :]
    bad_x = _first_index((X != 0) & same_rack[None, :, :])
    bad_y = _first_index((Y != 0) & same_rack)
    add('no common files in a rack', bad_x or bad_y, 'same-rack pair')
    add('common subfiles condition', _first_index(X.sum(axis=0) != M * Y), 'sum_i X(i,j,k) ≠ M Y(j,k)')
    add('degree condition', _first_index(Y.sum(axis=0) != P - 1), f'degree ≠ {P - 1}')
    Yi = Y.astype(np.int16)
    triple = Yi[:, :, None] + Yi[None, :, :] + Yi[:, None, :]
    idx = np.arange(K)
    distinct = (
        (idx[:, None, None] != idx[None, :, None])
        & (idx[None, :, None] != idx[None, None, :])
        & (idx[:, None, None] != idx[None, None, :])
    )
    add('transitivity', _first_index((triple == 2) & distinct), 'Y(i,j) + Y(j,k) + Y(i,k) = 2')
    return ValidationReport(tuple(checks))


def objective(X: np.ndarray, C: np.ndarray) -> float: # pylint: disable=invalid-name
    ''' The objective ``sum_i sum_j sum_k X(i, j, k) C(i, j, k)`` over ordered server pairs.

    Raises:
        ParameterError: If the shapes differ.
    '''
    if np.shape(X) != np.shape(C):
        raise ParameterError(f'Shape mismatch: X {np.shape(X)}, C {np.shape(C)}', 'shape mismatch')
    return float(np.sum(np.asarray(X, dtype=np.float64) * C))


def grouping_from_y(Y: np.ndarray, topology: ClusterTopology) -> Optional[LayerGrouping]: # pylint: disable=invalid-name
    ''' Recovers the layer grouping from the shared-subfile indicators.

    Returns:
        The canonical grouping if the graph of ``Y`` is a disjoint union of ``K/P`` cliques with
        one server per rack, otherwise None.
    '''
    Yb = np.asarray(Y) != 0 # pylint: disable=invalid-name
    K, P = topology.K, topology.P # pylint: disable=invalid-name
    if Yb.shape != (K, K) or (Yb != Yb.T).any() or Yb.diagonal().any():
        return None
    if int(Yb.sum()) != topology.K_r * P * (P - 1):
        return None
    rows = []
    covered = []
    for server in topology.rack(1):
        members = [server.flat] + [int(k) + 1 for k in np.flatnonzero(Yb[server.flat - 1])]
        members.sort(key=topology.rack_of)
        if [topology.rack_of(m) for m in members] != list(range(1, P + 1)):
            return None
        idx = np.array(members) - 1
        if not (Yb[np.ix_(idx, idx)] | np.eye(P, dtype=bool)).all():
            return None
        rows.append(tuple(topology.unflatten(m).slot for m in members))
        covered.extend(members)
    if sorted(covered) != list(range(1, K + 1)):
        return None
    return LayerGrouping(tuple(rows))


def assignment_from_xy(
    X: np.ndarray, # pylint: disable=invalid-name
    Y: np.ndarray, # pylint: disable=invalid-name
    topology: ClusterTopology,
    params: JobParams
) -> HybridAssignment:
    ''' Builds the Hybrid assignment described by feasible indicator arrays.

    Within a ``(layer, rack pair)`` the subfiles are ordered by id.

    Raises:
        ParameterError: If the arrays violate a constraint.
    '''
    _require_pairs(topology, params)
    report = check_constraints(X, Y, topology, hybrid_m(topology, params))
    if not report.ok or np.shape(X)[0] != params.N:
        raise ParameterError(
            f'The arrays do not describe a hybrid assignment: {", ".join(report.failed())}',
            'infeasible'
        )
    grouping = grouping_from_y(Y, topology)
    layer_of = {
        server.flat: layer
        for layer in range(1, topology.K_r + 1)
        for server in grouping.members(topology, layer)
    }
    subsets = list(itertools.combinations(range(1, topology.P + 1), 2))
    classes = [[] for _ in range(topology.K_r * len(subsets))]
    for idx in range(params.N):
        j, k = (int(v) + 1 for v in np.argwhere(np.triu(X[idx], k=1))[0])
        pair = tuple(sorted((topology.rack_of(j), topology.rack_of(k))))
        classes[(layer_of[j] - 1) * len(subsets) + subsets.index(pair)].append(idx + 1)
    permutation = [subfile for members in classes for subfile in members]
    return assign_hybrid(topology, params, permutation=permutation, grouping=grouping)


def _class_weights(tensor: np.ndarray, topology: ClusterTopology, grouping: LayerGrouping) -> np.ndarray:
    ''' Weight of each subfile on each ``(layer, rack pair)`` class, over ordered pairs. '''
    js, ks = [], []
    for layer in range(1, topology.K_r + 1):
        for a, b in itertools.combinations(range(1, topology.P + 1), 2): # pylint: disable=invalid-name
            js.append(grouping.server(topology, layer, a).flat - 1)
            ks.append(grouping.server(topology, layer, b).flat - 1)
    return tensor[:, js, ks] + tensor[:, ks, js]


def _assignment_value(tensor: np.ndarray, assignment: MapAssignment) -> float:
    return float(sum(
        tensor[idx, j - 1, k - 1] + tensor[idx, k - 1, j - 1]
        for idx, (j, k) in enumerate(assignment.mapping)
    ))


@dataclass(frozen=True)
class _Candidate:
    value: float
    grouping: LayerGrouping
    permutation: Tuple[int, ...]

    def better_than(self, other: Optional['_Candidate']) -> bool:
        ''' Larger objective first, then the smaller grouping key, then the smaller permutation. '''
        if other is None:
            return True
        if not _same(self.value, other.value):
            return self.value > other.value
        return (self.grouping.key(), self.permutation) < (other.grouping.key(), other.permutation)


def solve_for_grouping(
    tensor: np.ndarray,
    topology: ClusterTopology,
    grouping: LayerGrouping,
    M: int # pylint: disable=invalid-name
) -> Tuple[float, Tuple[int, ...]]:
    ''' The best subfile permutation for a fixed layer grouping.

    The ``N`` subfiles are matched to the ``N`` slots with :func:`scipy.optimize.linear_sum_assignment`;
    the slots of a class all carry the weight of the class.

    Returns:
        The objective value and the permutation, with the subfiles of a class in ascending order.
    '''
    weights = _class_weights(tensor, topology, grouping)
    expanded = np.repeat(weights, M, axis=1)
    rows, cols = linear_sum_assignment(expanded, maximize=True)
    value = float(expanded[rows, cols].sum())
    classes = np.empty(len(rows), dtype=np.int64)
    classes[rows] = cols // M
    order = np.lexsort((np.arange(len(classes)), classes))
    return value, tuple(int(i) + 1 for i in order)


@dataclass(frozen=True)
class SolverResult:
    ''' The outcome of a solver.

    Args:
        assignment (HybridAssignment): The assignment found
        objective (Optional[float]): Its objective value, None if no placement was given
        feasible (bool): True if the indicator arrays of the assignment satisfy the constraints
        method (SolverMethod): The solver
        seed (Optional[int]): The seed of the solver
        iterations (int): The number of evaluated candidates
        locality (Optional[LocalityStats]): The locality statistics, None without a placement
    '''
    assignment: HybridAssignment
    objective: Optional[float]
    feasible: bool
    method: SolverMethod
    seed: Optional[int] = None
    iterations: int = 0
    locality: Optional[LocalityStats] = None

    def summary_line(self) -> str:
        ''' ``objective=<value> method=<name> seed=<n> node_pct=<p> rack_pct=<p>`` '''
        def fmt(value, spec):
            return 'n/a' if value is None else format(value, spec)
        return (
            f'objective={fmt(self.objective, ".4f")} method={self.method.value} '
            f'seed={fmt(self.seed, "d")} '
            f'node_pct={fmt(self.locality and self.locality.node_pct, ".2f")} '
            f'rack_pct={fmt(self.locality and self.locality.rack_pct, ".2f")}'
        )


def _result(
    assignment: HybridAssignment,
    method: SolverMethod,
    placement: Optional[ReplicaPlacement],
    value: Optional[float],
    seed: Optional[int],
    iterations: int
) -> SolverResult:
    X, Y = xy_from_assignment(assignment) # pylint: disable=invalid-name
    feasible = check_constraints(X, Y, assignment.topology, hybrid_m(assignment.topology, assignment.params)).ok
    return SolverResult(
        assignment=assignment,
        objective=value,
        feasible=feasible,
        method=method,
        seed=seed,
        iterations=iterations,
        locality=None if placement is None else locality_stats(assignment, placement)
    )


def solve_random(
    topology: ClusterTopology,
    params: JobParams,
    seed: int,
    placement: Optional[ReplicaPlacement] = None,
    weights: Optional[LocalityWeights] = None
) -> SolverResult:
    ''' The random baseline: a uniformly random layer grouping and subfile permutation.

    The grouping is drawn first, then the permutation, from ``numpy.random.default_rng(seed)``.

    Args:
        topology: The cluster.
        params: Hybrid job parameters with ``r = 2``.
        seed: The seed.
        placement: If given, the objective and the locality statistics are computed.
        weights: The locality weights, defaults to ``lambda = 0.75``.

    Raises:
        UnsupportedParameterError: If the parameters are not hybrid with ``r = 2``.
        ParameterError: If a divisibility condition fails.
    '''
    _require_pairs(topology, params)
    rng = np.random.default_rng(seed)
    grouping = LayerGrouping.random(topology, rng)
    permutation = [int(p) + 1 for p in rng.permutation(params.N)]
    assignment = assign_hybrid(topology, params, permutation=permutation, grouping=grouping)
    value = None
    if placement is not None:
        value = _assignment_value(locality_tensor(placement, weights or LocalityWeights()), assignment)
    return _result(assignment, SolverMethod.RANDOM, placement, value, seed, 1)


class StructuredSolver:
    ''' Grouping search with an exact inner assignment.

    If the number of layer groupings does not exceed the budget, every grouping is evaluated.
    Otherwise ``budget`` steepest ascent runs are started, each moving to the best grouping that
    differs by swapping the layers of two servers of the same rack, until no swap improves. The
    first run starts from the grouping :func:`solve_random` draws for the same seed, so the result
    is never worse than the random baseline.

    Args:
        topology: The cluster.
        params: Hybrid job parameters with ``r = 2``.
        placement: The replica placement.
        weights: The locality weights.
        budget: The number of restarts, and the largest grouping count searched exhaustively.
        seed: The seed of the starting groupings.
        time_cap: Optional wall-clock cap in seconds. The first run always evaluates its start.
        executor: If specified, the restarts run on this executor.
        parent_logger: If you want to connect the logger of the solver to a parent, specify it
            here.

    Raises:
        ParameterError: If the budget is not positive, or the parameters are invalid.
    '''

    def __init__(
        self,
        topology: ClusterTopology,
        params: JobParams,
        placement: ReplicaPlacement,
        weights: Optional[LocalityWeights] = None,
        budget: int = DEFAULT_BUDGET,
        seed: int = 0,
        time_cap: Optional[float] = None,
        executor: Optional[concurrent.futures.Executor] = None,
        parent_logger: Optional[logging.Logger] = None
    ):
        _require_pairs(topology, params)
        if budget <= 0:
            raise ParameterError(f'The budget must be positive, got {budget}', 'budget ≤ 0')
        self.topology = topology
        self.params = params
        self.placement = placement
        self.weights = weights or LocalityWeights()
        self.budget = budget
        self.seed = seed
        self.time_cap = time_cap
        self.executor = executor
        self.logger = (
            logging.getLogger(self.__class__.__name__) if parent_logger is None else
            parent_logger.getChild(self.__class__.__name__)
        )
        self.M = hybrid_m(topology, params) # pylint: disable=invalid-name
        self.tensor = locality_tensor(placement, self.weights)

    def evaluate(self, grouping: LayerGrouping) -> _Candidate:
        ''' The best candidate with the given grouping. '''
        value, permutation = solve_for_grouping(self.tensor, self.topology, grouping, self.M)
        return _Candidate(value, grouping, permutation)

    def _exhaustive(self, deadline: Deadline) -> Tuple[_Candidate, int]:
        best, count = None, 0
        for grouping in enumerate_groupings(self.topology):
            if count > 0 and deadline.expired():
                self.logger.warning(f'time cap reached after {count} groupings')
                break
            candidate = self.evaluate(grouping)
            count += 1
            if candidate.better_than(best):
                best = candidate
        return best, count

    def _neighbors(self, grouping: LayerGrouping) -> Iterator[LayerGrouping]:
        for rack in range(2, self.topology.P + 1):
            for a, b in itertools.combinations(range(1, self.topology.K_r + 1), 2): # pylint: disable=invalid-name
                yield grouping.swap(rack, a, b)

    def _climb(self, restart: int, start: LayerGrouping, deadline: Deadline) -> Tuple[_Candidate, int]:
        current = self.evaluate(start)
        count = 1
        while not deadline.expired():
            best_neighbor = None
            for neighbor in self._neighbors(current.grouping):
                candidate = self.evaluate(neighbor)
                count += 1
                if candidate.better_than(best_neighbor):
                    best_neighbor = candidate
            if best_neighbor is None or best_neighbor.value <= current.value or _same(best_neighbor.value, current.value):
                break
            current = best_neighbor
            self.logger.debug(f'restart {restart}: improved to {current.value:.4f}')
        return current, count

    def _starts(self) -> List[LayerGrouping]:
        starts = [LayerGrouping.random(self.topology, np.random.default_rng(self.seed))]
        children = np.random.SeedSequence(self.seed).spawn(self.budget - 1)
        starts.extend(LayerGrouping.random(self.topology, np.random.default_rng(c)) for c in children)
        return starts

    def solve(self) -> SolverResult:
        ''' Runs the search.

        Returns:
            The best assignment found, with its objective and locality statistics.
        '''
        deadline = Deadline(self.time_cap)
        with StopWatch('structured') as stopwatch:
            if grouping_count(self.topology) <= self.budget:
                best, count = self._exhaustive(deadline)
            else:
                starts = self._starts()
                if self.executor is not None:
                    futures = [
                        self.executor.submit(self._climb, t, start, deadline)
                        for t, start in enumerate(starts)
                    ]
                    outcomes = [f.result() for f in futures]
                else:
                    outcomes = []
                    for t, start in enumerate(starts):
                        if t > 0 and deadline.expired():
                            self.logger.warning(f'time cap reached after {t} restarts')
                            break
                        outcomes.append(self._climb(t, start, deadline))
                best, count = None, 0
                for candidate, evaluated in outcomes:
                    count += evaluated
                    if candidate.better_than(best):
                        best = candidate
        assignment = assign_hybrid(
            self.topology, self.params, permutation=best.permutation, grouping=best.grouping
        )
        self.logger.info(
            f'structured solver K={self.topology.K} P={self.topology.P} N={self.params.N}: '
            f'objective={best.value:.4f} candidates={count} elapsed={stopwatch.elapsed():.3f}s'
        )
        return _result(assignment, SolverMethod.STRUCTURED, self.placement, best.value, self.seed, count)


def solve_structured(
    topology: ClusterTopology,
    params: JobParams,
    placement: ReplicaPlacement,
    weights: Optional[LocalityWeights] = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    time_cap: Optional[float] = None,
    executor: Optional[concurrent.futures.Executor] = None,
    parent_logger: Optional[logging.Logger] = None
) -> SolverResult:
    ''' Maximizes the data locality with :class:`StructuredSolver`. '''
    return StructuredSolver(
        topology, params, placement, weights=weights, budget=budget, seed=seed,
        time_cap=time_cap, executor=executor, parent_logger=parent_logger
    ).solve()


def oracle_candidates(topology: ClusterTopology, params: JobParams) -> int:
    ''' The number of candidates of the exhaustive search: the groupings times the ways to split
    the subfiles into the ``(layer, rack pair)`` classes of ``M`` subfiles each. '''
    M = hybrid_m(topology, params) # pylint: disable=invalid-name
    classes = topology.K_r * math.comb(topology.P, 2)
    splits = math.factorial(params.N) // math.factorial(M) ** classes
    return grouping_count(topology) * splits


def _best_split(weights: np.ndarray, M: int, grouping: LayerGrouping, best: Optional[_Candidate]) -> _Candidate: # pylint: disable=invalid-name
    rows = weights.tolist()
    N, L = weights.shape # pylint: disable=invalid-name
    capacity = [M] * L
    choice = [0] * N
    state = {'best': best}

    def permutation() -> Tuple[int, ...]:
        return tuple(i + 1 for i in sorted(range(N), key=lambda i: (choice[i], i)))

    def descend(i: int, acc: float) -> None:
        if i == N:
            current = state['best']
            if current is None or (not _same(acc, current.value) and acc > current.value):
                state['best'] = _Candidate(acc, grouping, permutation())
            elif _same(acc, current.value):
                candidate = _Candidate(acc, grouping, permutation())
                if candidate.better_than(current):
                    state['best'] = candidate
            return
        row = rows[i]
        for c in range(L): # pylint: disable=invalid-name
            if capacity[c]:
                capacity[c] -= 1
                choice[i] = c
                descend(i + 1, acc + row[c])
                capacity[c] += 1

    descend(0, 0.0)
    return state['best']


def brute_force_oracle(
    topology: ClusterTopology,
    params: JobParams,
    placement: ReplicaPlacement,
    weights: Optional[LocalityWeights] = None,
    limit: int = BRUTE_FORCE_LIMIT
) -> SolverResult:
    ''' Finds the optimum by enumerating every grouping and every split of the subfiles.

    Raises:
        InstanceTooLargeError: If the instance has more than ``limit`` candidates.
        UnsupportedParameterError: If the parameters are not hybrid with ``r = 2``.
    '''
    _require_pairs(topology, params)
    candidates = oracle_candidates(topology, params)
    if candidates > limit:
        raise InstanceTooLargeError(candidates, limit)
    tensor = locality_tensor(placement, weights or LocalityWeights())
    M = hybrid_m(topology, params) # pylint: disable=invalid-name
    best = None
    for grouping in enumerate_groupings(topology):
        best = _best_split(_class_weights(tensor, topology, grouping), M, grouping, best)
    assignment = assign_hybrid(topology, params, permutation=best.permutation, grouping=best.grouping)
    return _result(assignment, SolverMethod.BRUTE_FORCE, placement, best.value, None, candidates)
