import unittest
from unittest.mock import patch
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from rackshuffle.errors import ParameterError
from rackshuffle.config import (
    ConfigBase, IntegerListSerDe, FloatListSerDe, ParameterTupleListSerDe, BooleanSerDe, EnumSerDe
)

DUMMY_CONFIG_PATH = '/dummy_config_path'


class Color(Enum):
    RED = 'red'
    DARK_BLUE = 'dark-blue'


@dataclass
class DummyConfig(ConfigBase):
    ''' A config exercising every kind of field. '''

    count: int = field(default=3, metadata={'doc': 'A counter.'})
    ratio: float = 0.5
    name: str = 'foo'
    cap: Optional[float] = None
    verbose: bool = False
    lambda_: float = field(default=0.75, metadata={'doc': '''A weight
        spanning two lines.'''})
    seeds: List[int] = field(default_factory=lambda: [0, 1], metadata={'serde': IntegerListSerDe})
    tuples: Optional[List[Tuple[int, ...]]] = field(default=None, metadata={
        'serde': ParameterTupleListSerDe, 'serde_metadata': {'arity': 2}
    })
    batches: Optional[List[Tuple[int, ...]]] = field(default=None, metadata={
        'serde': ParameterTupleListSerDe, 'keep_empty': True
    })
    color: Color = field(default=Color.RED, metadata={
        'serde': EnumSerDe, 'serde_metadata': {'enum': Color}, 'type': 'red or dark-blue'
    })


class TestSerDe(unittest.TestCase):

    def test_integer_list(self):
        self.assertEqual(IntegerListSerDe.deserialize(' 1, 2 ,3'), [1, 2, 3])
        self.assertEqual(IntegerListSerDe.deserialize(''), [])
        self.assertEqual(IntegerListSerDe.serialize([4, 5]), '4,5')
        self.assertEqual(IntegerListSerDe.deserialize('4|5', metadata={'separator': '|'}), [4, 5])
        with self.assertRaises(ParameterError):
            IntegerListSerDe.deserialize('1,a')

    def test_float_list(self):
        self.assertEqual(FloatListSerDe.deserialize('0.6, 0.75,1'), [0.6, 0.75, 1.0])
        self.assertEqual(FloatListSerDe.serialize([0.5, 1]), '0.5,1.0')
        with self.assertRaises(ParameterError):
            FloatListSerDe.deserialize('0.5,x')

    def test_tuple_list(self):
        self.assertEqual(
            ParameterTupleListSerDe.deserialize('9,3,18,72,2; 16, 4, 16, 240, 2;'),
            [(9, 3, 18, 72, 2), (16, 4, 16, 240, 2)]
        )
        self.assertEqual(ParameterTupleListSerDe.deserialize(' '), [])
        self.assertEqual(ParameterTupleListSerDe.serialize([(1, 2), (3, 4)]), '1,2;3,4')
        with self.assertRaises(ParameterError) as ctx:
            ParameterTupleListSerDe.deserialize('1,2;3', metadata={'arity': 2})
        self.assertEqual(ctx.exception.condition, 'malformed tuple')

    def test_boolean(self):
        for text in ('true', 'Yes', ' on', '1'):
            with self.subTest(text=text):
                self.assertTrue(BooleanSerDe.deserialize(text))
        for text in ('false', 'NO', 'off', '0'):
            with self.subTest(text=text):
                self.assertFalse(BooleanSerDe.deserialize(text))
        with self.assertRaises(ParameterError):
            BooleanSerDe.deserialize('maybe')

    def test_enum(self):
        metadata = {'enum': Color}
        self.assertIs(EnumSerDe.deserialize('dark-blue', metadata), Color.DARK_BLUE)
        self.assertIs(EnumSerDe.deserialize('DARK_BLUE', metadata), Color.DARK_BLUE)
        self.assertEqual(EnumSerDe.serialize(Color.DARK_BLUE), 'dark-blue')
        with self.assertRaises(ParameterError) as ctx:
            EnumSerDe.deserialize('green', metadata)
        self.assertEqual(ctx.exception.condition, 'invalid choice')


class TestConfigBase(unittest.TestCase):

    def test_defaults(self):
        config = DummyConfig()
        self.assertEqual(config.seeds, [0, 1])
        self.assertIsNone(config.tuples)

    def test_from_mapping(self):
        config = DummyConfig.from_mapping({
            'count': '7', 'RATIO': '0.25', 'cap': '1.5', 'verbose': 'yes', 'lambda': '0.9',
            'seeds': '3,4', 'tuples': '1,2;3,4', 'color': 'dark-blue'
        })
        self.assertEqual(config.count, 7)
        self.assertEqual(config.ratio, 0.25)
        self.assertEqual(config.cap, 1.5)
        self.assertTrue(config.verbose)
        self.assertEqual(config.lambda_, 0.9)
        self.assertEqual(config.seeds, [3, 4])
        self.assertEqual(config.tuples, [(1, 2), (3, 4)])
        self.assertIs(config.color, Color.DARK_BLUE)

    def test_update(self):
        config = DummyConfig(cap=2.0, tuples=[(1, 2)])
        config.update_from_mapping({'cap': '', 'tuples': ''})
        self.assertIsNone(config.cap)
        self.assertIsNone(config.tuples)
        config.update_from_mapping({'name': ' bar '})
        self.assertEqual(config.name, 'bar')

    def test_keep_empty(self):
        config = DummyConfig.from_mapping({'batches': ''})
        self.assertEqual(config.batches, [])
        config.update_from_mapping({'batches': '3,4'})
        self.assertEqual(config.batches, [(3, 4)])
        self.assertEqual(config.to_mapping()['batches'], '3,4')
        self.assertIsNone(DummyConfig.from_mapping({'batches': None}).batches)

    def test_invalid(self):
        cases = [
            ({'unknown': '1'}, 'unknown key unknown'),
            ({'count': 'many'}, 'count malformed'),
            ({'count': None}, 'count missing'),
            ({'tuples': '1,2,3'}, 'malformed tuple'),
        ]
        for values, condition in cases:
            with self.subTest(values=values):
                with self.assertRaises(ParameterError) as ctx:
                    DummyConfig.from_mapping(values)
                self.assertEqual(ctx.exception.condition, condition)

    def test_to_mapping(self):
        config = DummyConfig(seeds=[5], tuples=[(1, 2)], color=Color.DARK_BLUE)
        mapping = config.to_mapping()
        self.assertEqual(mapping['lambda'], '0.75')
        self.assertEqual(mapping['cap'], '')
        self.assertEqual(mapping['verbose'], 'false')
        self.assertEqual(mapping['tuples'], '1,2')
        self.assertNotIn('batches', mapping)
        self.assertEqual(DummyConfig.from_mapping(mapping), config)

    def test_markdown_doc(self):
        doc = DummyConfig().get_markdown_doc()
        lines = doc.split('\n')
        self.assertEqual(lines[0], '| name | type    | default | description |')
        self.assertIn('| count | int | 3 | A counter. |', lines)
        self.assertIn('| cap | float (optional) |  |  |', lines)
        self.assertIn('| lambda | float | 0.75 | A weight spanning two lines. |', lines)
        self.assertIn('| seeds | Comma-separated list of integers | 0,1 |  |', lines)
        self.assertIn('| color | red or dark-blue | red |  |', lines)

    @patch('rackshuffle.config.config.os.path.isfile')
    @patch('rackshuffle.config.config.dotenv_values')
    def test_from_file(self, mock_dotenv_values, mock_isfile):
        mock_isfile.return_value = True
        mock_dotenv_values.return_value = {'count': '11', 'seeds': '9'}
        config = DummyConfig.from_file(DUMMY_CONFIG_PATH)
        mock_dotenv_values.assert_called_once_with(DUMMY_CONFIG_PATH)
        self.assertEqual(config.count, 11)
        self.assertEqual(config.seeds, [9])

    @patch('rackshuffle.config.config.os.path.isfile')
    def test_missing_file(self, mock_isfile):
        mock_isfile.return_value = False
        with self.assertRaises(ParameterError) as ctx:
            DummyConfig.from_file(DUMMY_CONFIG_PATH)
        self.assertEqual(ctx.exception.condition, 'config file missing')


if __name__ == '__main__':
    unittest.main()
