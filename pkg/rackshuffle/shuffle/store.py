''' Intermediate value stores: the outputs of the Map phase and the memories of the reducers.

:func:`synth_map_outputs` stands in for real Map functions: every server that maps a subfile
produces the values of all ``Q`` keys in that subfile, computed by the deterministic
:func:`~rackshuffle.shuffle.codec.payload_oracle`. The shuffle engines copy these values into a
:class:`ServerMemory` per server and fill in what the servers receive.
'''

from typing import Dict, Optional, Iterator, Tuple
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..assignment import MapAssignment
from ..topology import ServerRef
from .codec import Payload, payload_oracle


class UnknownValueError(KeyError):
    ''' A server tried to use an intermediate value it neither computed nor received. '''


class MapOutputStore:
    ''' The intermediate values computed by the Map tasks of an assignment.

    Args:
        assignment: The Map task assignment.
        Q: The number of keys.
        width: The width ``B`` of the values in bytes.
        seed: The seed of the payload oracle.
    '''

    def __init__(self, assignment: MapAssignment, Q: int, width: int, seed: int): # pylint: disable=invalid-name
        if width <= 0:
            raise ParameterError(f'The value width must be positive, got B={width}', 'B = 0')
        if Q <= 0:
            raise ParameterError(f'The number of keys must be positive, got Q={Q}')
        self.assignment = assignment
        self.Q = Q # pylint: disable=invalid-name
        self.width = width
        self.seed = seed
        self.table = np.empty((assignment.N, Q, width), dtype=np.uint8)
        for subfile in range(1, assignment.N + 1):
            for key in range(1, Q + 1):
                self.table[subfile - 1, key - 1] = payload_oracle(key, subfile, seed, width)
        self.table.setflags(write=False)

    def oracle(self, subfile: int, key: int) -> Payload:
        ''' The correct value of a key in a subfile. '''
        return self.table[subfile - 1, key - 1]

    def get(self, server: ServerRef, subfile: int, key: int) -> Payload:
        ''' The value a server computed for a key of a subfile it maps.

        Raises:
            UnknownValueError: If the server does not map the subfile.
        '''
        if subfile not in self.assignment.subfiles_of(server):
            raise UnknownValueError(f'{server} does not map subfile {subfile}')
        return self.table[subfile - 1, key - 1]

    def count(self, server: ServerRef) -> int:
        ''' The number of values computed by a server. '''
        return len(self.assignment.subfiles_of(server)) * self.Q

    def memory(self, server: ServerRef) -> 'ServerMemory':
        ''' A fresh memory of a server holding the values of the subfiles it maps. '''
        memory = ServerMemory(server, self.assignment.N, self.Q, self.width)
        mapped = np.asarray(self.assignment.subfiles_of(server), dtype=np.int64) - 1
        if mapped.size:
            memory.values[mapped] = self.table[mapped]
            memory.known[mapped] = True
        return memory


def synth_map_outputs(assignment: MapAssignment, Q: int, B: int, seed: int) -> MapOutputStore: # pylint: disable=invalid-name
    ''' Computes the Map outputs of an assignment.

    Args:
        assignment: The Map task assignment.
        Q: The number of keys.
        B: The width of the values in bytes.
        seed: The seed of the payload oracle.

    Raises:
        ParameterError: If ``B`` or ``Q`` is not positive.
    '''
    return MapOutputStore(assignment, Q, B, seed)


class ServerMemory:
    ''' The intermediate values known by a server.

    Args:
        server: The owner of the memory.
        N: The number of subfiles.
        Q: The number of keys.
        width: The width of the values.
    '''

    def __init__(self, server: ServerRef, N: int, Q: int, width: int): # pylint: disable=invalid-name
        self.server = server
        self.values = np.zeros((N, Q, width), dtype=np.uint8)
        self.known = np.zeros((N, Q), dtype=bool)

    def read(self, subfile: int, key: int) -> Payload:
        ''' Reads a known value.

        Raises:
            UnknownValueError: If the server does not know the value.
        '''
        if not self.known[subfile - 1, key - 1]:
            raise UnknownValueError(
                f'{self.server} does not know key {key} of subfile {subfile}'
            )
        return self.values[subfile - 1, key - 1]

    def write(self, subfile: int, key: int, payload: Payload) -> None:
        ''' Stores a received or decoded value. '''
        self.values[subfile - 1, key - 1] = payload
        self.known[subfile - 1, key - 1] = True

    def knows(self, subfile: int, key: int) -> bool:
        ''' True if the server knows the value. '''
        return bool(self.known[subfile - 1, key - 1])


class DeliveredStore:
    ''' The memories of all servers at the end of a shuffle. '''

    def __init__(self, memories: Dict[int, ServerMemory]):
        self.memories = memories

    def __getitem__(self, server: ServerRef) -> ServerMemory:
        return self.memories[server.flat]

    def __iter__(self) -> Iterator[ServerMemory]:
        for flat in sorted(self.memories):
            yield self.memories[flat]

    def value(self, server: ServerRef, subfile: int, key: int) -> Payload:
        ''' The value of a key in a subfile as known by a server. '''
        return self.memories[server.flat].read(subfile, key)


@dataclass(frozen=True)
class Mismatch:
    ''' The first wrong or missing value found by :func:`verify_delivery`. '''

    server: ServerRef
    key: int
    subfile: int
    reason: str

    def __str__(self) -> str:
        return f'{self.reason} at {self.server} (flat {self.server.flat}), key {self.key}, subfile {self.subfile}'


@dataclass(frozen=True)
class DeliveryReport:
    ''' The outcome of :func:`verify_delivery`. '''

    ok: bool # pylint: disable=invalid-name
    checked: int
    ''' The number of ``(server, key, subfile)`` values checked. '''

    mismatch: Optional[Mismatch] = None

    def __bool__(self) -> bool:
        return self.ok


def verify_delivery(
    delivered: DeliveredStore,
    assignment: MapAssignment,
    store: MapOutputStore
) -> DeliveryReport:
    ''' Checks that every reducer holds the correct values of its keys in all subfiles.

    Servers are checked in flat order, and within a server the keys and then the subfiles in
    ascending order; the first wrong or missing value is reported.
    '''
    checked = 0
    for server in assignment.topology.servers():
        keys = assignment.reduce_keys(server)
        cols = slice(keys.start - 1, keys.stop - 1)
        memory = delivered[server]
        known = memory.known[:, cols].T
        equal = np.all(memory.values[:, cols] == store.table[:, cols], axis=2).T
        checked += known.size
        bad = np.argwhere(~(known & equal))
        if bad.size:
            key_idx, subfile_idx = (int(v) for v in bad[0])
            reason = 'missing value' if not known[key_idx, subfile_idx] else 'wrong value'
            return DeliveryReport(
                ok=False,
                checked=checked,
                mismatch=Mismatch(
                    server=server, key=keys.start + key_idx, subfile=subfile_idx + 1, reason=reason
                )
            )
    return DeliveryReport(ok=True, checked=checked)


def flip_bit(
    delivered: DeliveredStore,
    server: ServerRef,
    subfile: int,
    key: int,
    bit: int = 0
) -> None:
    ''' Flips one bit of a delivered value in place, for fault injection. '''
    memory = delivered[server]
    byte, offset = divmod(bit, 8)
    memory.values[subfile - 1, key - 1, byte] ^= np.uint8(1 << offset)


def inject_fault(
    delivered: DeliveredStore,
    assignment: MapAssignment,
    rng: np.random.Generator
) -> Tuple[ServerRef, int, int]:
    ''' Flips a random bit of a random value some reducer needs.

    Returns:
        The ``(server, key, subfile)`` of the corrupted value.
    '''
    servers = assignment.topology.servers()
    server = servers[int(rng.integers(len(servers)))]
    keys = assignment.reduce_keys(server)
    key = keys[int(rng.integers(len(keys)))]
    subfile = int(rng.integers(assignment.N)) + 1
    width = delivered[server].values.shape[2]
    flip_bit(delivered, server, subfile, key, bit=int(rng.integers(8 * width)))
    return server, key, subfile
