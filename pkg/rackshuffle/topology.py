''' Server-rack architecture of the cluster and the index conventions used by every other module.

The cluster has ``K`` servers partitioned into ``P`` racks of ``K_r = K / P`` servers each.
Server ``S(i, j)`` is the ``j``-th server of rack ``i``; its flat index is ``(i - 1) * K_r + j``.
The servers sharing the same within-rack slot ``j`` form *layer* ``j``. All indices are 1-based.
'''

from typing import Tuple, Iterator
from dataclasses import dataclass

from . import lazy_property
from .errors import ParameterError, IndexRangeError


@dataclass(frozen=True, order=True)
class ServerRef:
    ''' Reference to a server of the cluster.

    Instances are ordered by their flat index. Create them with :meth:`ClusterTopology.server` or
    :meth:`ClusterTopology.unflatten` rather than directly.

    Args:
        flat (int): The flat index of the server in ``[1, K]``
        rack (int): The rack index in ``[1, P]``
        slot (int): The within-rack index in ``[1, K_r]``
    '''

    flat: int
    ''' The flat index ``(rack - 1) * K_r + slot``. '''

    rack: int
    ''' The rack index. '''

    slot: int
    ''' The within-rack index, which is also the layer of the server. '''

    def __str__(self) -> str:
        return f'S({self.rack},{self.slot})'


@dataclass(frozen=True)
class LayerRef:
    ''' A layer of servers: one server per rack sharing the same within-rack slot.

    Args:
        layer (int): The layer index in ``[1, K_r]``
        members (Tuple[ServerRef, ...]): The ``P`` servers of the layer in rack order
    '''

    layer: int
    ''' The layer index. '''

    members: Tuple[ServerRef, ...]
    ''' The servers of the layer, the ``i``-th member lives in rack ``i``. '''


@dataclass(frozen=True)
class ClusterTopology:
    ''' An immutable cluster of ``K`` servers in ``P`` racks.

    A single rack (``P = 1``) is accepted; the cluster then has no cross-rack traffic.

    Args:
        K (int): The number of servers
        P (int): The number of racks

    Raises:
        ParameterError: If ``P`` does not divide ``K`` or the counts are out of range.
    '''

    # pylint: disable=invalid-name
    # K and P follow the usual notation of the cost formulas

    K: int
    ''' The number of servers. '''

    P: int
    ''' The number of racks. '''

    def __post_init__(self):
        if self.K < 2:
            raise ParameterError(f'The cluster needs at least two servers, got K={self.K}', 'K < 2')
        if self.P < 1:
            raise ParameterError(f'The cluster needs at least one rack, got P={self.P}', 'P < 1')
        if self.K % self.P != 0:
            raise ParameterError(f'P does not divide K (K={self.K}, P={self.P})', 'P ∤ K')

    @property
    def K_r(self) -> int: # pylint: disable=invalid-name
        ''' The number of servers in a rack. '''
        return self.K // self.P

    @lazy_property
    def _servers(self) -> Tuple[ServerRef, ...]:
        k_r = self.K_r
        return tuple(
            ServerRef(flat=(rack - 1) * k_r + slot, rack=rack, slot=slot)
            for rack in range(1, self.P + 1)
            for slot in range(1, k_r + 1)
        )

    def servers(self) -> Tuple[ServerRef, ...]:
        ''' Returns all servers in flat index order. '''
        return self._servers

    def server(self, rack: int, slot: int) -> ServerRef:
        ''' Returns the server ``S(rack, slot)``.

        Raises:
            IndexRangeError: If an index is out of range.
        '''
        if not 1 <= rack <= self.P:
            raise IndexRangeError(f'Rack index {rack} is out of range [1, {self.P}]')
        if not 1 <= slot <= self.K_r:
            raise IndexRangeError(f'Slot index {slot} is out of range [1, {self.K_r}]')
        return self._servers[(rack - 1) * self.K_r + slot - 1]

    def unflatten(self, flat: int) -> ServerRef:
        ''' Returns the server with the given flat index.

        Raises:
            IndexRangeError: If the index is out of ``[1, K]``.
        '''
        if not 1 <= flat <= self.K:
            raise IndexRangeError(f'Flat server index {flat} is out of range [1, {self.K}]')
        return self._servers[flat - 1]

    def rack_of(self, flat: int) -> int:
        ''' Returns the rack of a server given by flat index, using ``floor((flat - 1) / K_r) + 1``. '''
        if not 1 <= flat <= self.K:
            raise IndexRangeError(f'Flat server index {flat} is out of range [1, {self.K}]')
        return (flat - 1) // self.K_r + 1

    def rack(self, rack: int) -> Tuple[ServerRef, ...]:
        ''' Returns the servers of a rack in slot order. '''
        if not 1 <= rack <= self.P:
            raise IndexRangeError(f'Rack index {rack} is out of range [1, {self.P}]')
        start = (rack - 1) * self.K_r
        return self._servers[start:start + self.K_r]

    def racks(self) -> Iterator[Tuple[ServerRef, ...]]:
        ''' Iterates over the racks. '''
        for rack in range(1, self.P + 1):
            yield self.rack(rack)

    def layer(self, layer: int) -> LayerRef:
        ''' Returns a layer of servers. '''
        if not 1 <= layer <= self.K_r:
            raise IndexRangeError(f'Layer index {layer} is out of range [1, {self.K_r}]')
        return LayerRef(
            layer=layer,
            members=tuple(self.server(rack, layer) for rack in range(1, self.P + 1))
        )

    def layers(self) -> Iterator[LayerRef]:
        ''' Iterates over the layers. '''
        for layer in range(1, self.K_r + 1):
            yield self.layer(layer)

    def contains(self, server: ServerRef) -> bool:
        ''' Returns True if the server reference belongs to this topology. '''
        return 1 <= server.flat <= self.K and self._servers[server.flat - 1] == server


def build_topology(K: int, P: int) -> ClusterTopology: # pylint: disable=invalid-name
    ''' Builds the topology of ``K`` servers in ``P`` racks.

    Args:
        K: The number of servers.
        P: The number of racks, must divide ``K``.

    Returns:
        The cluster topology.

    Raises:
        ParameterError: If the divisibility condition fails.
    '''
    return ClusterTopology(K=K, P=P)


def flat_index(server: ServerRef) -> int:
    ''' Returns the flat index ``(rack - 1) * K_r + slot`` of a server. '''
    return server.flat


def unflatten(flat: int, topology: ClusterTopology) -> ServerRef:
    ''' Inverse of :func:`flat_index` on the given topology. '''
    return topology.unflatten(flat)


def same_rack(a: ServerRef, b: ServerRef) -> bool: # pylint: disable=invalid-name
    ''' Returns True if the two servers are in the same rack. '''
    return a.rack == b.rack
