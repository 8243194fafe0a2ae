''' The experiment runner of the command line.

Three modes are available:

- ``costs``: the closed-form costs of the three schemes on ``(K, P, Q, N, r)`` tuples, with the
  units metered by the shuffle engines and the cells of the published cost table that disagree
  with the formulas
- ``shuffle-verify``: runs every scheme with real payloads at several block widths and checks the
  decoded values and the metered units
- ``locality``: compares the data locality of the random and the structured Map task assignment
  on ``(K, P, r_f, N)`` tuples

The configuration is read from a ``key=value`` file (``--config`` or the ``RACKSHUFFLE_CONFIG``
environment variable) and overridden by the command-line flags. ``--describe`` prints the
documentation of all parameters.
'''

from typing import List, Tuple, Optional, Sequence, Callable, Iterable, TypeVar, TextIO, Dict, Any
from dataclasses import dataclass, field
from enum import Enum
import argparse
import concurrent.futures
import contextlib
import csv
import dataclasses
import logging
import os
import sys
import textwrap

import numpy as np

from . import __version__
from .errors import ParameterError
from .config import (
    ConfigBase, IntegerListSerDe, ParameterTupleListSerDe, BooleanSerDe, EnumSerDe
)
from .timepiece import StopWatch
from .topology import ClusterTopology, build_topology
from .assignment import Scheme, SCHEME_ORDER, JobParams, ConditionKind, assign, require_conditions
from .shuffle import synth_map_outputs, run_shuffle, verify_delivery, inject_fault
from .analysis import CSV_HEADER, compare, cost, comparison_record, format_number
from .placement import PlacementPolicy, LocalityWeights, LocalityStats, place_replicas
from .optimizer import (
    DEFAULT_BUDGET, BRUTE_FORCE_LIMIT, SolverResult,
    solve_random, solve_structured, brute_force_oracle, oracle_candidates
)
from .reference import (
    PUBLISHED_COSTS, PUBLISHED_LOCALITY, Anomaly, detect_anomalies, find_cost_row, find_locality_row
)

T = TypeVar('T')
R = TypeVar('R')

CONFIG_ENV = 'RACKSHUFFLE_CONFIG'
''' The environment variable naming the default config file. '''


class Mode(Enum):
    ''' The experiments of the runner. '''

    COSTS = 'costs'
    SHUFFLE_VERIFY = 'shuffle-verify'
    LOCALITY = 'locality'


class OutputFormat(Enum):
    ''' Output formats of the result tables. '''

    CSV = 'csv'
    TABLE = 'table'


class RejectedPolicy(Enum):
    ''' Whether rejected tuples make the run fail. '''

    FAIL = 'fail'
    WARN = 'warn'


TUPLE_ARITY = {
    Mode.COSTS: 5,
    Mode.SHUFFLE_VERIFY: 5,
    Mode.LOCALITY: 4,
}


def _enum_field(enum_cls, default, doc: str):
    return field(default=default, metadata={
        'doc': doc,
        'serde': EnumSerDe,
        'serde_metadata': {'enum': enum_cls},
        'type': ' or '.join(m.value for m in enum_cls)
    })


@dataclass
class ExperimentConfig(ConfigBase):
    ''' The configuration of an experiment run. '''

    mode: Mode = _enum_field(Mode, Mode.COSTS, 'The experiment to run.')

    tuples: Optional[List[Tuple[int, ...]]] = field(default=None, metadata={
        'doc': '''The parameter tuples: K,P,Q,N,r in the costs and shuffle-verify modes, K,P,r_f,N
            in the locality mode. Defaults to the rows of the published table of the mode; an empty
            value runs no tuples.''',
        'serde': ParameterTupleListSerDe,
        'keep_empty': True,
    })

    lambda_: float = field(default=0.75, metadata={
        'doc': 'The weight of node locality in the locality measure, in (0.5, 1].'
    })

    seeds: List[int] = field(default_factory=lambda: [0], metadata={
        'doc': '''The base seeds. The payloads of each seed are verified separately; a locality
            trial t of base seed s uses the seed s + t.''',
        'serde': IntegerListSerDe,
    })

    trials: int = field(default=10, metadata={
        'doc': 'The number of locality trials per base seed.'
    })

    budget: int = field(default=DEFAULT_BUDGET, metadata={
        'doc': '''The number of restarts of the structured solver, and the largest number of
            layer groupings it searches exhaustively.'''
    })

    time_cap: Optional[float] = field(default=None, metadata={
        'doc': 'Wall-clock cap of a structured solve in seconds. Makes the output timing dependent.'
    })

    oracle: bool = field(default=True, metadata={
        'doc': 'Run the brute-force oracle on locality instances small enough for it.',
        'serde': BooleanSerDe,
    })

    out: Optional[str] = field(default=None, metadata={
        'doc': 'The output file. The results are printed to the standard output if not given.'
    })

    format: OutputFormat = _enum_field(OutputFormat, OutputFormat.CSV, 'The output format.')

    fault_inject: bool = field(default=False, metadata={
        'doc': '''Flip one bit of the delivered values of every shuffle-verify run. The runs are
            then expected to fail.'''
    })

    rejected: RejectedPolicy = _enum_field(
        RejectedPolicy, RejectedPolicy.FAIL, 'Whether rejected tuples make the exit status nonzero.'
    )

    block_widths: List[int] = field(default_factory=lambda: [1, 8], metadata={
        'doc': 'The payload widths in bytes used by the shuffle-verify mode.',
        'serde': IntegerListSerDe,
    })

    meter: bool = field(default=True, metadata={
        'doc': 'Run the shuffle engines in the costs mode and report the metered units.',
        'serde': BooleanSerDe,
    })

    trace: Optional[str] = field(default=None, metadata={
        'doc': 'Append the transmission trace of every shuffle run to this file.'
    })

    policy: PlacementPolicy = _enum_field(
        PlacementPolicy, PlacementPolicy.UNIFORM, 'The replica placement policy of the locality mode.'
    )

    workers: int = field(default=1, metadata={
        'doc': 'The number of worker threads running tuples and trials.'
    })

    log_level: str = field(default='WARNING', metadata={
        'doc': 'The logging level.'
    })

    def validate(self) -> None:
        ''' Checks the ranges of the parameters and the arity of the tuples.

        Raises:
            ParameterError: If a parameter is out of range.
        '''
        LocalityWeights(self.lambda_)
        if self.trials < 1:
            raise ParameterError(f'trials must be positive, got {self.trials}', 'trials < 1')
        if self.budget < 1:
            raise ParameterError(f'budget must be positive, got {self.budget}', 'budget < 1')
        if self.workers < 1:
            raise ParameterError(f'workers must be positive, got {self.workers}', 'workers < 1')
        if not self.seeds or any(s < 0 for s in self.seeds):
            raise ParameterError(f'seeds must be non-negative integers, got {self.seeds}', 'bad seeds')
        if not self.block_widths or any(b < 1 for b in self.block_widths):
            raise ParameterError(f'block widths must be positive, got {self.block_widths}', 'B < 1')
        if self.time_cap is not None and self.time_cap <= 0:
            raise ParameterError(f'time_cap must be positive, got {self.time_cap}', 'time_cap ≤ 0')
        if not isinstance(logging.getLevelName(self.log_level.upper()), int):
            raise ParameterError(f'Unknown log level: {self.log_level}', 'bad log level')
        arity = TUPLE_ARITY[self.mode]
        for tup in self.tuples or ():
            if len(tup) != arity:
                raise ParameterError(
                    f'The {self.mode.value} mode needs tuples of {arity} integers, got {tup}',
                    'malformed tuple'
                )

    def resolved_tuples(self) -> List[Tuple[int, ...]]:
        ''' The configured tuples, or the rows of the published table of the mode. '''
        if self.tuples is not None:
            return [tuple(t) for t in self.tuples]
        if self.mode is Mode.LOCALITY:
            return [row.params for row in PUBLISHED_LOCALITY]
        return [row.params for row in PUBLISHED_COSTS]


@dataclass(frozen=True)
class Section:
    ''' A table of the output. '''

    title: str
    header: Tuple[str, ...]
    records: Tuple[Tuple[str, ...], ...] = ()


REJECTED_HEADER = ('params', 'scheme', 'condition')
ANOMALY_HEADER = ('row', 'K', 'P', 'Q', 'N', 'r', 'scheme', 'kind', 'published', 'expected', 'annotation')
VERIFY_HEADER = ('K', 'P', 'Q', 'N', 'r', 'scheme', 'B', 'seed', 'decode', 'meter', 'detail')
LOCALITY_HEADER = (
    'K', 'P', 'r_f', 'N', 'trials',
    'node_random', 'node_random_std', 'node_structured', 'node_structured_std',
    'rack_random', 'rack_random_std', 'rack_structured', 'rack_structured_std',
    'node_oracle', 'rack_oracle',
    'published_node_random', 'published_node_optimized',
    'published_rack_random', 'published_rack_optimized',
)


@dataclass(frozen=True)
class RunOutcome:
    ''' The result tables of a run and the counts deciding the exit status. '''

    sections: Tuple[Section, ...]
    failures: int = 0
    rejected: int = 0

    def exit_code(self, policy: RejectedPolicy = RejectedPolicy.FAIL) -> int:
        ''' 0 if nothing failed and nothing was rejected (or rejections only warn), 1 otherwise. '''
        if self.failures:
            return 1
        if self.rejected and policy is RejectedPolicy.FAIL:
            return 1
        return 0


def _params_text(params: Sequence[int]) -> str:
    return ','.join(str(p) for p in params)


def _pct(value: Optional[float]) -> str:
    return '' if value is None else f'{value:.2f}'


def _mean_std(values: Sequence[float]) -> Tuple[str, str]:
    arr = np.asarray(values, dtype=np.float64)
    return _pct(float(arr.mean())), _pct(float(arr.std()))


def _rejected_record(params: Sequence[int], scheme: Optional[Scheme], condition: Optional[str]) -> Tuple[str, ...]:
    return (_params_text(params), '' if scheme is None else scheme.value, condition or '')


def _anomaly_record(anomaly: Anomaly) -> Tuple[str, ...]:
    return (
        str(anomaly.row), *(str(p) for p in anomaly.params), anomaly.scheme.value,
        anomaly.kind.value, format_number(anomaly.published), format_number(anomaly.expected),
        anomaly.annotation.value
    )


def write_sections(sections: Sequence[Section], stream: TextIO, fmt: OutputFormat = OutputFormat.CSV) -> None:
    ''' Writes the result tables separated by blank lines.

    The first table is always written, with its header even if it has no records; the further
    tables only if they have records.
    '''
    first = True
    for section in sections:
        if not first and not section.records:
            continue
        if not first:
            stream.write('\n')
        first = False
        if fmt is OutputFormat.CSV:
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(section.header)
            writer.writerows(section.records)
        else:
            stream.write(f'### {section.title}\n\n')
            stream.write('| ' + ' | '.join(section.header) + ' |\n')
            stream.write('|' + '|'.join('---' for _ in section.header) + '|\n')
            for record in section.records:
                stream.write('| ' + ' | '.join(record) + ' |\n')


@dataclass(frozen=True)
class _TupleOutcome:
    records: Tuple[Tuple[str, ...], ...] = ()
    rejected: Tuple[Tuple[str, ...], ...] = ()
    anomalies: Tuple[Anomaly, ...] = ()
    failures: int = 0


@dataclass(frozen=True)
class _TrialOutcome:
    random: LocalityStats
    structured: LocalityStats
    oracle: Optional[LocalityStats]
    failures: int


class ExperimentRunner:
    ''' Runs the experiment of a configuration.

    The tuples are validated before any run starts; invalid tuples and invalid schemes of a tuple
    become records of the rejected table and the run continues with the rest. With more than one
    worker the tuples (in the locality mode the trials) run on a thread pool, the output keeps
    the input order.

    Args:
        config: The configuration.
        parent_logger: If you want to connect the logger of the runner to a parent, specify it
            here.

    Raises:
        ParameterError: If the configuration is invalid.
    '''

    def __init__(self, config: ExperimentConfig, parent_logger: Optional[logging.Logger] = None):
        config.validate()
        self.config = config
        self.weights = LocalityWeights(config.lambda_)
        self.logger = (
            logging.getLogger(self.__class__.__name__) if parent_logger is None else
            parent_logger.getChild(self.__class__.__name__)
        )
        self._trace: Optional[TextIO] = None
        self.stopwatch = StopWatch(config.mode.value)

    def run(self) -> RunOutcome:
        ''' Runs the configured mode. '''
        runners = {
            Mode.COSTS: self.run_costs,
            Mode.SHUFFLE_VERIFY: self.run_verify,
            Mode.LOCALITY: self.run_locality,
        }
        with contextlib.ExitStack() as stack:
            if self.config.trace:
                self._trace = stack.enter_context(open(self.config.trace, 'a', encoding='utf-8'))
            with self.stopwatch:
                outcome = runners[self.config.mode]()
            self._trace = None
        self.logger.info(
            f'{self.config.mode.value}: {len(outcome.sections[0].records)} records, '
            f'{outcome.failures} failures, {outcome.rejected} rejected in {self.stopwatch.elapsed():.3f}s'
        )
        self.logger.debug(repr(self.stopwatch))
        return outcome

    def _map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        # the trace lines of concurrent runs would interleave
        if self.config.workers <= 1 or len(items) <= 1 or self._trace is not None:
            return [func(item) for item in items]
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.config.workers) as executor:
            return list(executor.map(func, items))

    def _reject(self, params: Sequence[int], scheme: Optional[Scheme], error: ParameterError) -> Tuple[str, ...]:
        self.logger.warning(
            f'rejected {_params_text(params)}' + ('' if scheme is None else f' {scheme.value}') + f': {error}'
        )
        return _rejected_record(params, scheme, error.condition)

    def _partition(
        self,
        tuples: Sequence[Tuple[int, ...]],
        check: Callable[[Tuple[int, ...]], Any]
    ) -> Tuple[List[Tuple[Tuple[int, ...], Any]], List[Tuple[str, ...]]]:
        valid, rejected = [], []
        for params in tuples:
            try:
                valid.append((params, check(params)))
            except ParameterError as error:
                rejected.append(self._reject(params, None, error))
        return valid, rejected

    def _finish(
        self,
        main: Section,
        outcomes: Sequence[_TupleOutcome],
        rejected: List[Tuple[str, ...]]
    ) -> RunOutcome:
        records = tuple(r for o in outcomes for r in o.records)
        rejected = rejected + [r for o in outcomes for r in o.rejected]
        anomalies = tuple(_anomaly_record(a) for o in outcomes for a in o.anomalies)
        sections = (
            dataclasses.replace(main, records=records),
            Section('anomalies', ANOMALY_HEADER, anomalies),
            Section('rejected', REJECTED_HEADER, tuple(rejected)),
        )
        return RunOutcome(
            sections=sections,
            failures=sum(o.failures for o in outcomes),
            rejected=len(rejected)
        )

    def _shuffle(
        self,
        topology: ClusterTopology,
        scheme: Scheme,
        Q: int, N: int, r: int, # pylint: disable=invalid-name
        width: int,
        seed: int
    ):
        params = JobParams(N=N, Q=Q, r=r, scheme=scheme)
        assignment = assign(topology, params)
        store = synth_map_outputs(assignment, Q, width, seed)
        delivered, report = run_shuffle(
            topology, assignment, store, trace=self._trace, parent_logger=self.logger
        )
        return assignment, store, delivered, report

    # costs

    def _costs_tuple(self, item) -> _TupleOutcome:
        params, topology = item
        K, P, Q, N, r = params # pylint: disable=invalid-name
        comparison = compare(K, P, Q, N, r, skip_invalid=True)
        failures = 0
        if self.config.meter:
            meters: Dict[Scheme, Tuple[int, int]] = {}
            for row in comparison.rows:
                _, _, _, report = self._shuffle(
                    topology, row.scheme, Q, N, r, 1, self.config.seeds[0]
                )
                meters[row.scheme] = (report.intra_units, report.cross_units)
            comparison = compare(K, P, Q, N, r, meters=meters, skip_invalid=True)
            for row in comparison.rows:
                if row.delta:
                    failures += 1
                    self.logger.error(
                        f'{_params_text(params)} {row.scheme.value}: metered '
                        f'({row.meter_int}, {row.meter_cro}) differs from the formulas '
                        f'({row.breakdown.L_int}, {row.breakdown.L_cro})'
                    )
        anomalies: Tuple[Anomaly, ...] = ()
        published = find_cost_row(params)
        if published is not None:
            anomalies = tuple(detect_anomalies(published))
            for anomaly in anomalies:
                self.logger.warning(f'published cost table: {anomaly}')
        rejected = []
        for entry in comparison.rejected:
            self.logger.warning(f'rejected {_params_text(params)} {entry.scheme.value}: {entry.condition}')
            rejected.append(_rejected_record(params, entry.scheme, entry.condition))
        return _TupleOutcome(
            records=tuple(comparison_record(row) for row in comparison.rows),
            rejected=tuple(rejected),
            anomalies=anomalies,
            failures=failures
        )

    def run_costs(self) -> RunOutcome:
        ''' Compares the closed-form and the metered costs of the three schemes.

        Returns:
            The comparison table in input order then scheme order, the published cells that
            disagree with the formulas, and the rejected tuples and schemes.
        '''
        with self.stopwatch.child('validate'):
            valid, rejected = self._partition(self.config.resolved_tuples(), lambda p: build_topology(p[0], p[1]))
        with self.stopwatch.child('run'):
            outcomes = self._map(self._costs_tuple, valid)
        return self._finish(Section('costs', CSV_HEADER), outcomes, rejected)

    # shuffle-verify

    def _verify_run(
        self,
        topology: ClusterTopology,
        params: Tuple[int, ...],
        scheme: Scheme,
        width: int,
        seed: int
    ) -> Tuple[Tuple[str, ...], int]:
        K, P, Q, N, r = params # pylint: disable=invalid-name
        expected = cost(scheme, K, P, Q, N, r)
        assignment, store, delivered, report = self._shuffle(topology, scheme, Q, N, r, width, seed)
        details = []
        injected = None
        if self.config.fault_inject:
            injected = inject_fault(delivered, assignment, np.random.default_rng(seed))
        delivery = verify_delivery(delivered, assignment, store)
        if not delivery.ok:
            details.append(str(delivery.mismatch))
        if injected is not None:
            server, key, subfile = injected
            details.append(f'fault injected at {server} (flat {server.flat}), key {key}, subfile {subfile}')
        meter_ok = (report.intra_units, report.cross_units) == (expected.L_int, expected.L_cro)
        if not meter_ok:
            details.append(
                f'metered ({report.intra_units}, {report.cross_units}), '
                f'expected ({expected.L_int}, {expected.L_cro})'
            )
        failures = int(not delivery.ok) + int(not meter_ok)
        if failures:
            self.logger.error(f'{_params_text(params)} {scheme.value} B={width} seed={seed}: {"; ".join(details)}')
        record = (
            *(str(p) for p in params), scheme.value, str(width), str(seed),
            'pass' if delivery.ok else 'fail', 'pass' if meter_ok else 'fail', '; '.join(details)
        )
        return record, failures

    def _verify_tuple(self, item) -> _TupleOutcome:
        params, topology = item
        K, P, Q, N, r = params # pylint: disable=invalid-name
        records, rejected, failures = [], [], 0
        for scheme in SCHEME_ORDER:
            try:
                cost(scheme, K, P, Q, N, r)
            except ParameterError as error:
                rejected.append(self._reject(params, scheme, error))
                continue
            for seed in self.config.seeds:
                for width in self.config.block_widths:
                    record, failed = self._verify_run(topology, params, scheme, width, seed)
                    records.append(record)
                    failures += failed
        return _TupleOutcome(records=tuple(records), rejected=tuple(rejected), failures=failures)

    def run_verify(self) -> RunOutcome:
        ''' Runs every valid scheme of every tuple with real payloads and checks the decoded values
        and the metered units.

        Returns:
            One record per ``(tuple, scheme, seed, B)`` and the rejected tuples and schemes.
        '''
        with self.stopwatch.child('validate'):
            valid, rejected = self._partition(self.config.resolved_tuples(), lambda p: build_topology(p[0], p[1]))
        with self.stopwatch.child('run'):
            outcomes = self._map(self._verify_tuple, valid)
        return self._finish(Section('shuffle-verify', VERIFY_HEADER), outcomes, rejected)

    # locality

    def _locality_check(self, params: Tuple[int, ...]) -> Tuple[ClusterTopology, JobParams]:
        K, P, r_f, N = params # pylint: disable=invalid-name
        topology = build_topology(K, P)
        job = JobParams(N=N, r=2, scheme=Scheme.HYBRID)
        require_conditions(topology, job, kinds=(ConditionKind.STRUCTURAL,))
        if not 1 <= r_f <= K:
            raise ParameterError(f'The file replication must be in [1, K={K}], got r_f={r_f}', 'r_f > K')
        return topology, job

    def _locality_trial(self, topology: ClusterTopology, job: JobParams, r_f: int, seed: int, with_oracle: bool) -> _TrialOutcome:
        placement = place_replicas(topology, job.N, r_f, seed, self.config.policy)
        random = solve_random(topology, job, seed, placement=placement, weights=self.weights)
        structured = solve_structured(
            topology, job, placement, weights=self.weights, budget=self.config.budget, seed=seed,
            time_cap=self.config.time_cap, parent_logger=self.logger
        )
        oracle: Optional[SolverResult] = None
        if with_oracle:
            oracle = brute_force_oracle(topology, job, placement, weights=self.weights)
        failures = 0
        for result in (random, structured, oracle):
            if result is not None and not result.feasible:
                failures += 1
                self.logger.error(f'seed {seed}: infeasible {result.method.value} result')
        if structured.objective < random.objective - 1e-9:
            failures += 1
            self.logger.error(f'seed {seed}: structured objective below random: {structured.summary_line()}')
        if oracle is not None and structured.objective > oracle.objective + 1e-9:
            failures += 1
            self.logger.error(f'seed {seed}: structured objective above the optimum: {oracle.summary_line()}')
        self.logger.debug(f'seed {seed}: {random.summary_line()}; {structured.summary_line()}')
        return _TrialOutcome(
            random=random.locality,
            structured=structured.locality,
            oracle=None if oracle is None else oracle.locality,
            failures=failures
        )

    def run_locality(self) -> RunOutcome:
        ''' Compares the data locality of the random and the structured assignment.

        Every tuple runs ``trials`` trials per base seed; trial ``t`` of base seed ``s`` places
        the replicas and seeds both solvers with ``s + t``. The brute-force oracle runs on the
        instances small enough for it.

        Returns:
            One record per tuple with the means and standard deviations of the node and rack
            locality percentages, next to the published values when the tuple is a published row.
        '''
        with self.stopwatch.child('validate'):
            valid, rejected = self._partition(self.config.resolved_tuples(), self._locality_check)
        seeds = [s + t for s in self.config.seeds for t in range(self.config.trials)]
        records, failures = [], 0
        for params, (topology, job) in valid:
            r_f = params[2]
            with_oracle = self.config.oracle and oracle_candidates(topology, job) <= BRUTE_FORCE_LIMIT
            if self.config.oracle and not with_oracle:
                self.logger.info(f'{_params_text(params)}: too large for the brute-force oracle')
            with self.stopwatch.child('run'):
                trials = self._map(lambda s: self._locality_trial(topology, job, r_f, s, with_oracle), seeds)
            failures += sum(t.failures for t in trials)

            node_random = _mean_std([t.random.node_pct for t in trials])
            node_structured = _mean_std([t.structured.node_pct for t in trials])
            rack_random = _mean_std([t.random.rack_pct for t in trials])
            rack_structured = _mean_std([t.structured.rack_pct for t in trials])
            node_oracle = rack_oracle = ''
            if with_oracle:
                node_oracle = _pct(float(np.mean([t.oracle.node_pct for t in trials])))
                rack_oracle = _pct(float(np.mean([t.oracle.rack_pct for t in trials])))
            published = find_locality_row(params)
            published_fields = ('', '', '', '') if published is None else (
                _pct(published.node_random), _pct(published.node_optimized),
                _pct(published.rack_random), _pct(published.rack_optimized)
            )
            records.append((
                *(str(p) for p in params), str(len(seeds)),
                *node_random, *node_structured, *rack_random, *rack_structured,
                node_oracle, rack_oracle, *published_fields
            ))
        return self._finish(
            Section('locality', LOCALITY_HEADER),
            [_TupleOutcome(records=tuple(records), failures=failures)],
            rejected
        )


def run_costs(config: ExperimentConfig, parent_logger: Optional[logging.Logger] = None) -> RunOutcome:
    ''' Runs the costs mode of a configuration, whatever its ``mode`` field says. '''
    return ExperimentRunner(dataclasses.replace(config, mode=Mode.COSTS), parent_logger).run()


def run_verify(config: ExperimentConfig, parent_logger: Optional[logging.Logger] = None) -> RunOutcome:
    ''' Runs the shuffle-verify mode of a configuration. '''
    return ExperimentRunner(dataclasses.replace(config, mode=Mode.SHUFFLE_VERIFY), parent_logger).run()


def run_locality(config: ExperimentConfig, parent_logger: Optional[logging.Logger] = None) -> RunOutcome:
    ''' Runs the locality mode of a configuration. '''
    return ExperimentRunner(dataclasses.replace(config, mode=Mode.LOCALITY), parent_logger).run()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='rackshuffle',
        description=textwrap.dedent(
            '''\
            Rack-aware coded shuffle experiments.

            The configuration is read from a key=value file, then overridden by the flags below.
            Run with --describe to print the documentation of every parameter.
            '''),
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--config', type=str, default=os.environ.get(CONFIG_ENV),
        help=f'Config file of key=value lines (default: ${CONFIG_ENV})'
    )
    parser.add_argument('--describe', action='store_true',
        help='Print the markdown documentation of the parameters and exit'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    for fld in dataclasses.fields(ExperimentConfig):
        name = ConfigBase._get_param_name([fld.name]) # pylint: disable=protected-access
        flag = '--' + name.replace('_', '-')
        doc = ' '.join(fld.metadata.get('doc', '').split())
        if fld.metadata.get('serde') is None and fld.type is bool:
            parser.add_argument(flag, dest=name, action='store_const', const='true', help=doc)
        else:
            parser.add_argument(flag, dest=name, type=str, metavar='VALUE', help=doc)
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    ''' Builds the configuration from the config file and the parsed flags.

    Raises:
        ParameterError: If the config file is missing, or a value is unknown or malformed.
    '''
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {
        name: value for name, value in vars(args).items()
        if name not in ('config', 'describe') and value is not None
    }
    config.update_from_mapping(overrides)
    config.validate()
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    ''' The entry point of the ``rackshuffle`` command.

    Returns:
        0 on success, 1 if a check failed or a tuple was rejected, 2 on configuration errors.
    '''
    args = _build_parser().parse_args(argv)
    if args.describe:
        print(ExperimentConfig().get_markdown_doc())
        return 0
    try:
        config = load_config(args)
    except ParameterError as error:
        print(f'rackshuffle: error: {error}', file=sys.stderr)
        return 2
    logging.basicConfig(
        level=config.log_level.upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s'
    )
    outcome = ExperimentRunner(config).run()
    if config.out:
        with open(config.out, 'w', encoding='utf-8', newline='') as stream:
            write_sections(outcome.sections, stream, config.format)
    else:
        write_sections(outcome.sections, sys.stdout, config.format)
    return outcome.exit_code(config.rejected)
