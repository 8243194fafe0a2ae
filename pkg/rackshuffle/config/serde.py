''' Serializers/Deserializers (SerDe) convert between configuration strings and different Python
structures.

You should subclass :class:`ConfigSerDeBase` and override the following static fields:

- ``description``: the description of the structure this serde can convert, for example
  "Comma-separated list of integers". This text will be used in the generated documentation.
- ``serialize``: Take the Python structure and returns a string representation.
- ``deserialize``: Take a string representation of the value and return a Python structure.
'''

from typing import Any, List, Sequence, Mapping, Tuple, Type
from abc import ABC, abstractmethod
from enum import Enum

from ..errors import ParameterError


class ConfigSerDeBase(ABC):
    ''' Defines a serializer / deserializer interface. '''

    description : str = 'The base serde encodes and decodes strings to themselves.'
    ''' A textual description how the object is encoded in the string. Will be used in docs. '''

    example : str = 'abcdefgh'
    ''' Provide a textual example of the encoded string. Will be used in docs. '''

    @staticmethod
    @abstractmethod
    def serialize(value: Any, metadata: Mapping[str, Any]={}) -> str:
        ''' Serializes a config value to a string.

        Args:
            value (Any): a Python object to be serialized.
            metadata (Mapping[str, Any]): Additional metadata to be passed to SerDe implementations.

        Returns:
            The object serialized into a string.
        '''
        return str(value)

    @staticmethod
    @abstractmethod
    def deserialize(value: str, metadata: Mapping[str, Any]={}) -> Any:
        ''' Deserializes a string to a config value.

        Args:
            value (str): a Python object serialized into a string
            metadata (Mapping[str, Any]): Additional metadata to be passed to SerDe implementations.

        Returns:
            The the restored Python object.

        Raises:
            ParameterError: If the string is malformed.
        '''
        return value


def _parse_int(token: str) -> int:
    try:
        return int(token.strip())
    except ValueError as error:
        raise ParameterError(f'Not an integer: {token!r}', 'malformed integer') from error


class IntegerListSerDe(ConfigSerDeBase):
    ''' De/serializes a string containing a comma-separated list of integers.'''

    description : str = 'Comma-separated list of integers'
    example: str = '0, 1, 2'

    @staticmethod
    def serialize(value: Sequence[int], metadata: Mapping[str, Any]={}) -> str:
        sep = metadata.get('separator', ',')
        return sep.join(str(e) for e in value)

    @staticmethod
    def deserialize(value: str, metadata: Mapping[str, Any]={}) -> List[int]:
        sep = metadata.get('separator', ',')
        if not value.strip():
            return []
        return [_parse_int(e) for e in value.split(sep)]


class FloatListSerDe(ConfigSerDeBase):
    ''' De/serializes a string containing a comma-separated list of real numbers.'''

    description : str = 'Comma-separated list of real numbers'
    example: str = '0.6, 0.75, 1.0'

    @staticmethod
    def serialize(value: Sequence[float], metadata: Mapping[str, Any]={}) -> str:
        sep = metadata.get('separator', ',')
        return sep.join(repr(float(e)) for e in value)

    @staticmethod
    def deserialize(value: str, metadata: Mapping[str, Any]={}) -> List[float]:
        sep = metadata.get('separator', ',')
        if not value.strip():
            return []
        try:
            return [float(e) for e in value.split(sep)]
        except ValueError as error:
            raise ParameterError(f'Malformed list of numbers: {value!r}', 'malformed number') from error


class ParameterTupleListSerDe(ConfigSerDeBase):
    ''' De/serializes a list of integer tuples.

    Tuples are separated by semicolons, the members of a tuple by commas. Whitespace is ignored.
    An empty string is an empty list.
    '''

    description : str = 'Semicolon-separated list of comma-separated integer tuples'
    example: str = '9,3,18,72,2; 16,4,16,240,2'

    @staticmethod
    def serialize(value: Sequence[Sequence[int]], metadata: Mapping[str, Any]={}) -> str:
        return ';'.join(','.join(str(e) for e in tup) for tup in value)

    @staticmethod
    def deserialize(value: str, metadata: Mapping[str, Any]={}) -> List[Tuple[int, ...]]:
        arity = metadata.get('arity')
        result = []
        for chunk in value.split(';'):
            if not chunk.strip():
                continue
            tup = tuple(_parse_int(e) for e in chunk.split(','))
            if arity is not None and len(tup) != arity:
                raise ParameterError(
                    f'Expected tuples of {arity} integers, got {chunk.strip()!r}',
                    'malformed tuple'
                )
            result.append(tup)
        return result


class BooleanSerDe(ConfigSerDeBase):
    ''' De/serializes a boolean flag. Accepts true/false, yes/no, on/off and 1/0. '''

    description : str = 'Boolean flag'
    example: str = 'true'

    TRUE_VALUES = ('true', 'yes', 'on', '1')
    FALSE_VALUES = ('false', 'no', 'off', '0')

    @staticmethod
    def serialize(value: bool, metadata: Mapping[str, Any]={}) -> str:
        return 'true' if value else 'false'

    @staticmethod
    def deserialize(value: str, metadata: Mapping[str, Any]={}) -> bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in BooleanSerDe.TRUE_VALUES:
            return True
        if text in BooleanSerDe.FALSE_VALUES:
            return False
        raise ParameterError(f'Not a boolean: {value!r}', 'malformed boolean')


class EnumSerDe(ConfigSerDeBase):
    ''' De/serializes an :class:`enum.Enum` member by its value.

    The enum class must be passed in the ``enum`` metadata entry.
    '''

    description : str = 'One of the listed choices'
    example: str = 'csv'

    @staticmethod
    def serialize(value: Enum, metadata: Mapping[str, Any]={}) -> str:
        return str(value.value)

    @staticmethod
    def deserialize(value: str, metadata: Mapping[str, Any]={}) -> Enum:
        enum_cls: Type[Enum] = metadata['enum']
        if isinstance(value, enum_cls):
            return value
        text = str(value).strip().lower()
        for member in enum_cls:
            if text in (str(member.value).lower(), member.name.lower()):
                return member
        choices = ', '.join(str(m.value) for m in enum_cls)
        raise ParameterError(f'Invalid choice {value!r}, expected one of: {choices}', 'invalid choice')
