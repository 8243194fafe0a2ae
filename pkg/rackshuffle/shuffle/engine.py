''' Shuffle engines of the three schemes, with intra-rack and cross-rack cost metering.

:class:`ShuffleEngine` is an abstract base class; :class:`UncodedShuffle`, :class:`CodedShuffle`
and :class:`HybridShuffle` implement the data shuffling of the respective schemes with real
payload bytes. Every transmission moves values from the sender's memory to the receivers'
memories, so the engines can only send what the senders computed or received earlier, and the
receivers actually decode the coded multicasts.

Cost accounting: a unicast value is one unit, a coded multicast is one unit regardless of the
number of its receivers. A transmission is intra-rack if the sender and all receivers share a
rack, and cross-rack otherwise.
'''

from typing import Dict, Optional, Sequence, TextIO, Tuple, List
from dataclasses import dataclass, field
from abc import ABC, abstractmethod
import itertools
import logging

from ..errors import SchemeMismatchError
from ..assignment import (
    MapAssignment, HybridAssignment, LayerGrouping, Scheme, ConditionKind, require_conditions,
    server_keys, rack_keys
)
from ..topology import ClusterTopology, ServerRef
from ..timepiece import StopWatch
from .codec import CodedPacket, encode, decode
from .store import MapOutputStore, ServerMemory, DeliveredStore


@dataclass(frozen=True)
class ShuffleCostReport:
    ''' Metered transmission units of a shuffle run.

    Args:
        scheme (Scheme): The scheme of the run
        intra_units (int): Units through the Top of Rack switches
        cross_units (int): Units through the root switch
        per_stage (Dict[str, Tuple[int, int]]): ``(intra, cross)`` units per stage in execution
            order
    '''
    scheme: Scheme
    intra_units: int
    cross_units: int
    per_stage: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        ''' All units. '''
        return self.intra_units + self.cross_units


class CostMeter:
    ''' Counts the transmission units of a run and optionally writes a trace.

    Each trace line reads
    ``stage<TAB>sender<TAB>receivers<TAB>keys<TAB>subfiles<TAB>class`` with flat server ids and
    comma-separated lists.

    Args:
        trace: A text stream for the trace, or None.
    '''

    def __init__(self, trace: Optional[TextIO] = None):
        self.trace = trace
        self.stages: Dict[str, List[int]] = {}

    def open_stage(self, stage: str) -> None:
        ''' Registers a stage so it is reported even if it sends nothing. '''
        self.stages.setdefault(stage, [0, 0])

    def record(
        self,
        stage: str,
        sender: ServerRef,
        receivers: Sequence[ServerRef],
        keys: Sequence[int],
        subfiles: Sequence[int]
    ) -> bool:
        ''' Counts one transmission.

        Returns:
            True if the transmission was intra-rack.
        '''
        intra = all(receiver.rack == sender.rack for receiver in receivers)
        counts = self.stages.setdefault(stage, [0, 0])
        counts[0 if intra else 1] += 1
        if self.trace is not None:
            self.trace.write('\t'.join([
                stage,
                str(sender.flat),
                ','.join(str(r.flat) for r in receivers),
                ','.join(map(str, keys)),
                ','.join(map(str, subfiles)),
                'intra' if intra else 'cross'
            ]) + '\n')
        return intra

    def report(self, scheme: Scheme) -> ShuffleCostReport:
        ''' Summarizes the counted units. '''
        per_stage = {stage: (counts[0], counts[1]) for stage, counts in self.stages.items()}
        return ShuffleCostReport(
            scheme=scheme,
            intra_units=sum(c[0] for c in per_stage.values()),
            cross_units=sum(c[1] for c in per_stage.values()),
            per_stage=per_stage
        )


class ShuffleEngine(ABC):
    ''' Abstract base class of the shuffle engines.

    Args:
        topology: The cluster topology.
        trace: A text stream for the transmission trace, or None.
        parent_logger: If you want to connect the logger of the engine to a parent, specify it
            here.
    '''

    scheme: Scheme = Scheme.UNCODED
    ''' The scheme implemented by the engine. '''

    def __init__(
        self,
        topology: ClusterTopology,
        trace: Optional[TextIO] = None,
        parent_logger: Optional[logging.Logger] = None
    ):
        self.topology = topology
        self.trace = trace
        self.logger = (
            logging.getLogger(self.__class__.__name__) if parent_logger is None else
            parent_logger.getChild(self.__class__.__name__)
        )

    def run(
        self,
        assignment: MapAssignment,
        store: MapOutputStore
    ) -> Tuple[DeliveredStore, ShuffleCostReport]:
        ''' Runs the shuffle.

        The map output store is not modified: every server starts from a copy of its own Map
        outputs.

        Args:
            assignment: The Map task assignment of the engine's scheme.
            store: The Map outputs of the assignment.

        Returns:
            The memories of the servers after the shuffle, and the metered costs.

        Raises:
            SchemeMismatchError: If the assignment belongs to another scheme.
            ParameterError: If a divisibility condition of the shuffle fails.
        '''
        if assignment.scheme is not self.scheme:
            raise SchemeMismatchError(
                f'{self.__class__.__name__} cannot shuffle a {assignment.scheme.name.lower()} '
                'assignment', condition='scheme mismatch'
            )
        require_conditions(
            self.topology, assignment.params,
            kinds=(ConditionKind.STRUCTURAL, ConditionKind.KEYS, ConditionKind.MULTICAST)
        )
        memories = {server.flat: store.memory(server) for server in self.topology.servers()}
        meter = CostMeter(self.trace)
        with StopWatch(self.scheme.name.lower()) as stopwatch:
            self._shuffle(assignment, memories, meter)
        report = meter.report(self.scheme)
        self.logger.info(
            f'{self.scheme.value} shuffle K={self.topology.K} P={self.topology.P} '
            f'N={assignment.N} Q={assignment.params.Q} r={assignment.params.replication}: '
            f'intra={report.intra_units} cross={report.cross_units} '
            f'elapsed={stopwatch.elapsed():.3f}s'
        )
        for stage, (intra, cross) in report.per_stage.items():
            self.logger.debug(f'stage {stage}: intra={intra} cross={cross}')
        return DeliveredStore(memories), report

    @abstractmethod
    def _shuffle(
        self,
        assignment: MapAssignment,
        memories: Dict[int, ServerMemory],
        meter: CostMeter
    ) -> None:
        ''' Executes the transmissions of the scheme.

        This method should be implemented in subclasses.
        '''

    @staticmethod
    def _unicast(
        stage: str,
        sender: ServerRef,
        receiver: ServerRef,
        subfile: int,
        key: int,
        memories: Dict[int, ServerMemory],
        meter: CostMeter
    ) -> None:
        value = memories[sender.flat].read(subfile, key)
        memories[receiver.flat].write(subfile, key, value)
        meter.record(stage, sender, (receiver,), (key,), (subfile,))

    @staticmethod
    def _multicast(
        stage: str,
        sender: ServerRef,
        receivers: Sequence[ServerRef],
        keys: Sequence[int],
        subfiles: Sequence[int],
        memories: Dict[int, ServerMemory],
        meter: CostMeter
    ) -> None:
        source = memories[sender.flat]
        payload = encode([source.read(s, k) for s, k in zip(subfiles, keys)])
        packet = CodedPacket(
            keys=tuple(keys),
            subfiles=tuple(subfiles),
            payload=payload,
            receivers=tuple(receivers),
            sender=sender
        )
        for idx, receiver in enumerate(receivers):
            memory = memories[receiver.flat]
            known = [memory.read(s, k) for s, k in packet.side_information(idx)]
            memory.write(subfiles[idx], keys[idx], decode(packet, known))
        meter.record(stage, sender, packet.receivers, packet.keys, packet.subfiles)


class UncodedShuffle(ShuffleEngine):
    ''' Every server unicasts the values of each subfile it maps to the reducers of the keys. '''

    scheme = Scheme.UNCODED
    STAGE = 'unicast'

    def _shuffle(self, assignment, memories, meter):
        Q = assignment.params.Q # pylint: disable=invalid-name
        meter.open_stage(self.STAGE)
        servers = self.topology.servers()
        for sender in servers:
            for subfile in assignment.subfiles_of(sender):
                for receiver in servers:
                    if receiver == sender:
                        continue
                    for key in server_keys(self.topology, Q, receiver.flat):
                        self._unicast(self.STAGE, sender, receiver, subfile, key, memories, meter)


class CodedShuffle(ShuffleEngine):
    ''' Coded MapReduce shuffle.

    For every ``(r + 1)``-subset ``S`` of servers, each member ``s`` multicasts to the other
    ``r`` members. For receiver ``z``, the subfiles mapped exactly at ``S \\ {z}`` (``J`` of them)
    are split into ``r`` chunks of ``J / r``; sender ``s`` sends the chunk indexed by its position
    in ``S \\ {z}``. Packet ``(w, u)`` combines, for each receiver ``z``, the ``u``-th key of
    ``z`` in the ``w``-th subfile of its chunk.
    '''

    scheme = Scheme.CODED
    STAGE = 'multicast'

    def _shuffle(self, assignment, memories, meter):
        # pylint: disable=invalid-name
        K, r, Q = self.topology.K, assignment.params.r, assignment.params.Q
        meter.open_stage(self.STAGE)
        if r >= K:
            return
        flats = range(1, K + 1)
        keys_of = {flat: server_keys(self.topology, Q, flat) for flat in flats}
        for group in itertools.combinations(flats, r + 1):
            for sender_flat in group:
                receivers = [z for z in group if z != sender_flat]
                chunks = []
                for z in receivers:
                    common = [s for s in group if s != z]
                    subfiles = assignment.subfiles_mapped_exactly_at(common)
                    size = len(subfiles) // r
                    pos = common.index(sender_flat)
                    chunks.append(subfiles[pos * size:(pos + 1) * size])
                self._send_chunks(sender_flat, receivers, chunks, keys_of, memories, meter)

    def _send_chunks(self, sender_flat, receivers, chunks, keys_of, memories, meter):
        sender = self.topology.unflatten(sender_flat)
        receiver_refs = [self.topology.unflatten(z) for z in receivers]
        key_count = len(keys_of[receivers[0]])
        for w in range(len(chunks[0])): # pylint: disable=invalid-name
            subfiles = [chunk[w] for chunk in chunks]
            for u in range(key_count): # pylint: disable=invalid-name
                keys = [keys_of[z][u] for z in receivers]
                self._multicast(self.STAGE, sender, receiver_refs, keys, subfiles, memories, meter)


class HybridShuffle(ShuffleEngine):
    ''' Hybrid Coded MapReduce shuffle in two strictly sequential stages.

    The cross-rack stage runs a coded shuffle independently in each layer, where the ``P``
    servers of the layer act as the servers of a Coded MapReduce job on the layer's subfiles and
    each of them reduces all ``Q / P`` keys of its rack. Packet ``(w, u)`` of a sender combines,
    for each destination rack ``z``, the ``u``-th key of rack ``z``'s key block.

    The intra-rack stage is uncoded: each server unicasts the values of its layer's subfiles to
    the reducers of the other keys of its rack.
    '''

    scheme = Scheme.HYBRID
    CROSS_STAGE = 'cross-rack'
    INTRA_STAGE = 'intra-rack'

    def _shuffle(self, assignment, memories, meter):
        if not isinstance(assignment, HybridAssignment):
            raise SchemeMismatchError('HybridShuffle needs a HybridAssignment', 'scheme mismatch')
        grouping = assignment.grouping or LayerGrouping.identity(self.topology)
        meter.open_stage(self.CROSS_STAGE)
        meter.open_stage(self.INTRA_STAGE)
        self._cross_rack_stage(assignment, grouping, memories, meter)
        self._intra_rack_stage(assignment, grouping, memories, meter)

    def _cross_rack_stage(self, assignment, grouping, memories, meter):
        # pylint: disable=invalid-name
        P, r, Q = self.topology.P, assignment.params.r, assignment.params.Q
        if r >= P:
            return
        keys_of = {rack: rack_keys(self.topology, Q, rack) for rack in range(1, P + 1)}
        for layer in range(1, self.topology.K_r + 1):
            for group in itertools.combinations(range(1, P + 1), r + 1):
                for sender_rack in group:
                    receivers = [z for z in group if z != sender_rack]
                    chunks = []
                    for z in receivers:
                        common = tuple(t for t in group if t != z)
                        subfiles = assignment.subfiles_of_class(layer, common)
                        size = len(subfiles) // r
                        pos = common.index(sender_rack)
                        chunks.append(subfiles[pos * size:(pos + 1) * size])
                    sender = grouping.server(self.topology, layer, sender_rack)
                    receiver_refs = [grouping.server(self.topology, layer, z) for z in receivers]
                    for w in range(len(chunks[0])):
                        subfiles = [chunk[w] for chunk in chunks]
                        for u in range(len(keys_of[receivers[0]])):
                            keys = [keys_of[z][u] for z in receivers]
                            self._multicast(
                                self.CROSS_STAGE, sender, receiver_refs, keys, subfiles,
                                memories, meter
                            )

    def _intra_rack_stage(self, assignment, grouping, memories, meter):
        Q = assignment.params.Q # pylint: disable=invalid-name
        layer_of = {}
        for layer in range(1, self.topology.K_r + 1):
            for server in grouping.members(self.topology, layer):
                layer_of[server.flat] = layer
        layer_subfiles = {
            layer: assignment.layer_subfiles(layer) for layer in range(1, self.topology.K_r + 1)
        }
        for sender in self.topology.servers():
            mates = [s for s in self.topology.rack(sender.rack) if s != sender]
            for subfile in layer_subfiles[layer_of[sender.flat]]:
                for receiver in mates:
                    for key in server_keys(self.topology, Q, receiver.flat):
                        self._unicast(
                            self.INTRA_STAGE, sender, receiver, subfile, key, memories, meter
                        )


ENGINES = {
    Scheme.UNCODED: UncodedShuffle,
    Scheme.CODED: CodedShuffle,
    Scheme.HYBRID: HybridShuffle,
}


def run_uncoded(
    topology: ClusterTopology,
    assignment: MapAssignment,
    store: MapOutputStore,
    trace: Optional[TextIO] = None,
    parent_logger: Optional[logging.Logger] = None
) -> Tuple[DeliveredStore, ShuffleCostReport]:
    ''' Runs the uncoded shuffle. See :class:`UncodedShuffle`. '''
    return UncodedShuffle(topology, trace, parent_logger).run(assignment, store)


def run_coded(
    topology: ClusterTopology,
    assignment: MapAssignment,
    store: MapOutputStore,
    trace: Optional[TextIO] = None,
    parent_logger: Optional[logging.Logger] = None
) -> Tuple[DeliveredStore, ShuffleCostReport]:
    ''' Runs the Coded MapReduce shuffle. See :class:`CodedShuffle`. '''
    return CodedShuffle(topology, trace, parent_logger).run(assignment, store)


def run_hybrid(
    topology: ClusterTopology,
    assignment: HybridAssignment,
    store: MapOutputStore,
    trace: Optional[TextIO] = None,
    parent_logger: Optional[logging.Logger] = None
) -> Tuple[DeliveredStore, ShuffleCostReport]:
    ''' Runs the Hybrid Coded MapReduce shuffle. See :class:`HybridShuffle`. '''
    return HybridShuffle(topology, trace, parent_logger).run(assignment, store)


def run_shuffle(
    topology: ClusterTopology,
    assignment: MapAssignment,
    store: MapOutputStore,
    trace: Optional[TextIO] = None,
    parent_logger: Optional[logging.Logger] = None
) -> Tuple[DeliveredStore, ShuffleCostReport]:
    ''' Runs the shuffle engine of the assignment's scheme. '''
    engine = ENGINES[assignment.scheme](topology, trace, parent_logger)
    return engine.run(assignment, store)
