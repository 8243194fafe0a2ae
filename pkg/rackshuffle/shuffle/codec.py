''' Payload generation and the linear code of the coded multicasts.

Intermediate values are opaque byte strings of a fixed width ``B``, represented as
:class:`numpy.ndarray` instances of :class:`numpy.uint8` type. A coded multicast combines ``r``
values with bytewise XOR, so a receiver that knows ``r - 1`` of them recovers the missing one.
'''

from typing import Sequence, Tuple, Union
from dataclasses import dataclass
import hashlib

import numpy as np

from ..errors import ParameterError
from ..topology import ServerRef

Payload = np.ndarray
''' A value of ``B`` bytes, a one dimensional :class:`numpy.uint8` array. '''

PayloadLike = Union[np.ndarray, bytes, bytearray, Sequence[int]]

_BLAKE2B_MAX_DIGEST = 64


def as_payload(value: PayloadLike) -> Payload:
    ''' Converts bytes, byte sequences or uint8 arrays to a payload. '''
    if isinstance(value, np.ndarray):
        if value.dtype != np.uint8 or value.ndim != 1:
            raise ParameterError(f'Payloads must be 1D uint8 arrays, got {value.dtype} {value.shape}')
        return value
    if isinstance(value, (bytes, bytearray)):
        return np.frombuffer(bytes(value), dtype=np.uint8)
    return np.asarray(value, dtype=np.uint8)


def payload_oracle(key: int, subfile: int, seed: int, width: int) -> Payload:
    ''' The intermediate value of a key in a subfile.

    The value is the first ``width`` bytes of a keyed BLAKE2b stream over ``(key, subfile)``, with
    the seed as the BLAKE2b key. Widths above 64 bytes are produced in counter mode. The result is
    stable across runs and platforms.

    Args:
        key: The key id.
        subfile: The subfile id.
        seed: A nonnegative seed.
        width: The value width ``B`` in bytes.

    Raises:
        ParameterError: If the width is not positive or the seed is negative.
    '''
    if width <= 0:
        raise ParameterError(f'The value width must be positive, got B={width}', 'B = 0')
    if seed < 0:
        raise ParameterError(f'The seed must be nonnegative, got {seed}')
    secret = seed.to_bytes(16, 'little')
    message = key.to_bytes(8, 'little') + subfile.to_bytes(8, 'little')
    chunks = []
    counter = 0
    remaining = width
    while remaining > 0:
        size = min(remaining, _BLAKE2B_MAX_DIGEST)
        digest = hashlib.blake2b(
            message + counter.to_bytes(4, 'little'), digest_size=size, key=secret
        ).digest()
        chunks.append(digest)
        remaining -= size
        counter += 1
    return np.frombuffer(b''.join(chunks), dtype=np.uint8)


def _check_widths(payloads: Sequence[Payload]) -> int:
    widths = {p.shape[0] for p in payloads}
    if len(widths) != 1:
        raise ParameterError(f'Payload width mismatch: {sorted(widths)}', 'width mismatch')
    return widths.pop()


def encode(values: Sequence[PayloadLike]) -> Payload:
    ''' Combines ``r`` values into the payload of a coded multicast.

    Args:
        values: The ``r >= 1`` values of equal width.

    Returns:
        The bytewise XOR of the values.

    Raises:
        ParameterError: If the list is empty or the widths differ.
    '''
    if len(values) == 0:
        raise ParameterError('Cannot encode an empty list of values', 'r = 0')
    payloads = [as_payload(v) for v in values]
    _check_widths(payloads)
    return np.bitwise_xor.reduce(np.stack(payloads), axis=0)


@dataclass(frozen=True)
class CodedPacket:
    ''' A coded multicast: one payload combining one value for each of ``r`` receivers.

    The ``z``-th receiver wants the value of ``keys[z]`` in ``subfiles[z]``, and knows every other
    constituent of the payload.

    Args:
        keys (Tuple[int, ...]): The key of each constituent
        subfiles (Tuple[int, ...]): The subfile of each constituent
        payload (Payload): The XOR of the constituents
        receivers (Tuple[ServerRef, ...]): The destination of each constituent
        sender (ServerRef): The sender of the packet
    '''
    keys: Tuple[int, ...]
    subfiles: Tuple[int, ...]
    payload: Payload
    receivers: Tuple[ServerRef, ...]
    sender: ServerRef

    def side_information(self, receiver_index: int) -> Tuple[Tuple[int, int], ...]:
        ''' The ``(subfile, key)`` pairs a receiver must know to decode its constituent. '''
        return tuple(
            (subfile, key)
            for idx, (subfile, key) in enumerate(zip(self.subfiles, self.keys))
            if idx != receiver_index
        )


def decode(packet: Union[CodedPacket, PayloadLike], known: Sequence[PayloadLike]) -> Payload:
    ''' Recovers the missing constituent of a coded payload.

    Args:
        packet: The coded packet, or its bare payload.
        known: The ``r - 1`` constituents known by the receiver.

    Returns:
        The XOR of the payload and the known values.

    Raises:
        ParameterError: If the widths differ.
    '''
    payload = as_payload(packet.payload if isinstance(packet, CodedPacket) else packet)
    if len(known) == 0:
        return payload.copy()
    return encode([payload] + list(known))
