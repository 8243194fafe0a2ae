''' This module defines :class:`~rackshuffle.config.ConfigBase`, a base class for experiment
configurations. The class offers three basic functionalities:

- parse parameters from a flat mapping of ``key=value`` strings, for example the content of a
  config file read with :func:`dotenv.dotenv_values`, or the command-line overrides
- serialize the configuration back to such a mapping
- generate a markdown table documenting the parameters
'''

import dataclasses
from typing import Sequence, List, Any, Type, TypeVar, Mapping, Tuple, Optional, Dict, Iterator, Union
import os
import textwrap
import typing

from dotenv import dotenv_values

from ..errors import ParameterError
from .serde import ConfigSerDeBase, BooleanSerDe

T = TypeVar('T', bound='ConfigBase')


class ConfigBase:
    ''' Base class for configuration structures.

    Subclasses must be also dataclasses. Each field can carry the following metadata:

    - ``doc``: the description of the parameter
    - ``serde``: a :class:`~rackshuffle.config.serde.ConfigSerDeBase` subclass converting the
      string form of the value
    - ``serde_metadata``: extra metadata passed to the serde
    - ``type``: the type name shown in the documentation
    - ``keep_empty``: an empty string is passed to the serde instead of meaning None; a None
      value is left out of :meth:`to_mapping`
    '''

    TYPE_MAP = {
        int: 'int',
        float: 'float',
        str: 'string',
        bool: 'boolean'
    }

    def __init__(self) -> None:
        assert dataclasses.is_dataclass(self), 'ConfigBase instances must be also dataclasses.'

    @staticmethod
    def _get_param_name(full_path: Sequence[str]=()) -> str:
        # a trailing underscore escapes Python keywords, e.g. lambda_
        return '_'.join(part.rstrip('_') for part in full_path)

    @staticmethod
    def _scalar_type(field: dataclasses.Field) -> Tuple[Any, bool]:
        ''' Returns the annotated scalar type of a field, and whether it is Optional. '''
        tp = field.type
        if typing.get_origin(tp) is Union:
            args = [a for a in typing.get_args(tp) if a is not type(None)]
            return (args[0] if len(args) == 1 else tp), True
        return tp, False

    @staticmethod
    def _get_param_type(field: dataclasses.Field) -> str:
        if 'type' in field.metadata:
            return field.metadata['type']
        serde = ConfigBase._get_param_serde(field)
        if serde is not None:
            return serde.description
        scalar, optional = ConfigBase._scalar_type(field)
        typename = ConfigBase.TYPE_MAP.get(scalar)
        if typename is None:
            raise ValueError(f'Field has unsupported type: {field}')
        return f'{typename} (optional)' if optional else typename

    @staticmethod
    def _get_param_serde(field: dataclasses.Field) -> Optional[Type[ConfigSerDeBase]]:
        return field.metadata.get('serde')

    @staticmethod
    def _get_serde_metadata(
        field: dataclasses.Field,
        serde_metadata: Mapping[str, Any]
    ) -> Mapping[str, Any]:
        return {**serde_metadata, **field.metadata.get('serde_metadata', {})}

    @staticmethod
    def _serialize(field: dataclasses.Field, value: Any, serde_metadata: Mapping[str, Any]) -> str:
        if value is None:
            return ''
        serde = ConfigBase._get_param_serde(field)
        if serde is not None:
            return serde.serialize(value, metadata=ConfigBase._get_serde_metadata(field, serde_metadata))
        if isinstance(value, bool):
            return BooleanSerDe.serialize(value)
        return str(value)

    @staticmethod
    def _deserialize(
        name: str,
        field: dataclasses.Field,
        raw: Optional[str],
        serde_metadata: Mapping[str, Any]
    ) -> Any:
        scalar, optional = ConfigBase._scalar_type(field)
        keep_empty = field.metadata.get('keep_empty', False)
        if raw is None or (optional and not keep_empty and str(raw).strip() == ''):
            if optional:
                return None
            raise ParameterError(f'Missing value for parameter {name}', f'{name} missing')
        serde = ConfigBase._get_param_serde(field)
        if serde is not None:
            return serde.deserialize(raw, metadata=ConfigBase._get_serde_metadata(field, serde_metadata))
        if scalar is bool:
            return BooleanSerDe.deserialize(raw)
        try:
            return scalar(str(raw).strip())
        except (TypeError, ValueError) as error:
            raise ParameterError(
                f'Invalid value {raw!r} for parameter {name} ({ConfigBase._get_param_type(field)})',
                f'{name} malformed'
            ) from error

    @staticmethod
    def _get_param_default(
        field: dataclasses.Field,
        serde_metadata: Mapping[str, Any]
    ) -> Optional[str]:
        if field.default is not dataclasses.MISSING:
            default = field.default
        elif field.default_factory is not dataclasses.MISSING:
            default = field.default_factory()
        else:
            default = None
        return ConfigBase._serialize(field, default, serde_metadata)

    @staticmethod
    def _get_param_doc(field: dataclasses.Field) -> str:
        doc: str = field.metadata.get('__doc__', field.metadata.get('doc', ''))
        return ' '.join(textwrap.dedent(doc).split())

    def _param_walker(self, _current_path: Sequence[str]=()) -> Iterator[Tuple[List[str], dataclasses.Field]]:
        ''' Recursively walks all parameters in the config structure.

        Args:
            _current_path (Sequence[str]): The current path in the config structure. This is an
                internal recursion parameter and users should always leave the default empty
                value.

        Returns:
            A generator that yields a tuple for each parameter. The tuple consists of the
            following values:
                - full_path (List[str]): The full path of the parameter in the hierarchy
                - field (dataclasses.Field): The original field of the parameter
        '''
        for fld in dataclasses.fields(self):
            current_path = list(_current_path) + [fld.name]
            if dataclasses.is_dataclass(fld.type):
                obj = getattr(self, fld.name)
                yield from obj._param_walker(_current_path=current_path)
            else:
                yield (current_path, fld)

    def _resolve(self, full_path: Sequence[str]) -> Any:
        obj = self
        for name_part in full_path[:-1]:
            obj = getattr(obj, name_part)
        return obj

    def update_from_mapping(
        self,
        values: Mapping[str, Optional[str]],
        serde_metadata: Mapping[str, Any]={}
    ) -> None:
        ''' Overrides parameters with the values found in a ``key=value`` mapping.

        Keys may use dashes instead of underscores.

        Raises:
            ParameterError: If a key is unknown or a value is malformed.
        '''
        params: Dict[str, Tuple[List[str], dataclasses.Field]] = {
            ConfigBase._get_param_name(full_path): (full_path, fld)
            for full_path, fld in self._param_walker()
        }
        for key, raw in values.items():
            name = key.strip().replace('-', '_').lower()
            if name not in params:
                raise ParameterError(f'Unknown configuration parameter: {key}', f'unknown key {key}')
            full_path, fld = params[name]
            value = ConfigBase._deserialize(name, fld, raw, serde_metadata)
            setattr(self._resolve(full_path), full_path[-1], value)

    @classmethod
    def from_mapping(
        cls: Type[T],
        values: Mapping[str, Optional[str]],
        serde_metadata: Mapping[str, Any]={}
    ) -> T:
        ''' Creates a config with the default values overridden by a ``key=value`` mapping. '''
        result = cls()
        result.update_from_mapping(values, serde_metadata=serde_metadata)
        return result

    @classmethod
    def from_file(
        cls: Type[T],
        path: Union[str, os.PathLike],
        serde_metadata: Mapping[str, Any]={}
    ) -> T:
        ''' Reads a config from a ``key=value`` file.

        The file is parsed with :func:`dotenv.dotenv_values`, so comments, quoting and ``export``
        prefixes follow the dotenv rules.

        Raises:
            ParameterError: If the file does not exist, or contains an unknown key or a malformed
                value.
        '''
        if not os.path.isfile(path):
            raise ParameterError(f'Config file not found: {path}', 'config file missing')
        return cls.from_mapping(dotenv_values(path), serde_metadata=serde_metadata)

    def to_mapping(self, serde_metadata: Mapping[str, Any]={}) -> Dict[str, str]:
        ''' Serializes the config into a ``key=value`` mapping that :meth:`from_mapping` accepts. '''
        return {
            ConfigBase._get_param_name(full_path): ConfigBase._serialize(
                fld, getattr(self._resolve(full_path), full_path[-1]), serde_metadata
            )
            for full_path, fld in self._param_walker()
            if not (fld.metadata.get('keep_empty') and getattr(self._resolve(full_path), full_path[-1]) is None)
        }

    def get_markdown_doc(self, serde_metadata: Mapping[str, Any]={}) -> str:
        ''' Generates a markdown table of the parameters that can be used in documentation.

        Returns:
            Markdown formatted text containing the parameter documentation.
        '''
        header = (
            '| name | type    | default | description |\n'
            '|------|---------|---------|-------------|\n'
        )
        body = '\n'.join([
            f'| {ConfigBase._get_param_name(full_path=full_path)} '
            f'| {ConfigBase._get_param_type(field=field)} '
            f'| {ConfigBase._get_param_default(field=field, serde_metadata=serde_metadata)} '
            f'| {ConfigBase._get_param_doc(field=field)} |'
            for (full_path, field) in self._param_walker()
        ])
        return header + body
