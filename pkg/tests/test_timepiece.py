import unittest
from unittest.mock import patch, Mock

from rackshuffle.errors import ParameterError
from rackshuffle.timepiece import StopWatch, Deadline

# Mock time to control its behavior
time = Mock()

MAX_INTERVALS_CNT = 10


class TestStopWatchBase(unittest.TestCase):

    def setUp(self):
        self.stopwatch = StopWatch(name='testwatch', max_intervals=MAX_INTERVALS_CNT)
        self.childwatch = self.stopwatch.child('childwatch')
        self.assertIsInstance(self.childwatch, StopWatch)

    def test_new_child_no_interval(self):
        self.assertEqual(self.childwatch.intervals.maxlen, self.stopwatch.intervals.maxlen)

    def test_new_child_new_interval(self):
        childwatch2 = self.stopwatch.child('childwatch2', max_intervals=13)
        self.assertEqual(childwatch2.intervals.maxlen, 13)

    def test_existing_child(self):
        self.assertIs(self.stopwatch.child('childwatch'), self.childwatch)

    def test_parent(self):
        self.assertTrue(self.stopwatch in self.childwatch.parents())

    def test_level(self):
        self.assertEqual(self.stopwatch.level, 0)
        self.assertEqual(self.childwatch.level, 1)

    def test_root_no_parents(self):
        self.assertEqual(list(self.stopwatch.parents()), [])

    def test_fullname(self):
        self.assertEqual(self.childwatch.full_name(), 'testwatch.childwatch')

    def test_elapsed_before_start(self):
        self.assertEqual(self.stopwatch.elapsed(), 0.0)
        self.assertEqual(self.stopwatch.total(), 0)


@patch('rackshuffle.timepiece.time')
class TestStopWatchContext(unittest.TestCase):

    def setUp(self):
        self.current_time = 0

    def _setup_mocks(self, mock_time):
        def _mock_time_sleep(secs):
            self.current_time += secs
        def _mock_time_perf_counter():
            return self.current_time
        mock_time.perf_counter.side_effect = _mock_time_perf_counter
        time.sleep.side_effect = _mock_time_sleep

    def test_context(self, mock_time):
        self._setup_mocks(mock_time)
        with StopWatch('root') as root:
            time.sleep(3)
            self.assertEqual(root.elapsed(), 3)
        self.assertEqual(root.intervals[0], 3)
        self.assertEqual(root.elapsed(), 3)

    def _do_phases(self):
        with StopWatch('run') as root:
            with root.child('assignment'):
                time.sleep(1)
            for i in range(3):
                with root.child('shuffle'):
                    time.sleep(i + 2)
            with root.child('verify'):
                time.sleep(4)
        return root

    def test_phases(self, mock_time):
        self._setup_mocks(mock_time)
        root = self._do_phases()
        self.assertEqual(root.intervals[0], 1 + 2 + 3 + 4 + 4)
        self.assertEqual(list(root.children), ['assignment', 'shuffle', 'verify'])
        self.assertEqual(list(root.child('shuffle').intervals), [2, 3, 4])
        self.assertEqual(root.child('shuffle').total(), 9)
        self.assertEqual(root.child('shuffle').elapsed(), 4)

    def test_repr(self, mock_time):
        self._setup_mocks(mock_time)
        text = repr(self._do_phases())
        self.assertTrue(text.startswith('<StopWatch name=run'))
        self.assertIn('\n    <StopWatch name=shuffle intervals=[2.0000, 3.0000, 4.0000] total=9.0000>', text)

    def test_repr_truncates_intervals(self, mock_time):
        self._setup_mocks(mock_time)
        watch = StopWatch('loop')
        for _ in range(StopWatch.MAX_REPR_INTERVALS + 2):
            with watch:
                time.sleep(1)
        self.assertIn('...', repr(watch))


@patch('rackshuffle.timepiece.time')
class TestDeadline(unittest.TestCase):

    def setUp(self):
        self.current_time = 100.0

    def _setup_mocks(self, mock_time):
        mock_time.monotonic.side_effect = lambda: self.current_time

    def test_no_cap(self, mock_time):
        self._setup_mocks(mock_time)
        deadline = Deadline()
        self.current_time += 1e6
        self.assertIsNone(deadline.remaining())
        self.assertFalse(deadline.expired())

    def test_cap(self, mock_time):
        self._setup_mocks(mock_time)
        deadline = Deadline(5)
        self.current_time += 2
        self.assertEqual(deadline.remaining(), 3)
        self.assertFalse(deadline.expired())
        self.current_time += 4
        self.assertEqual(deadline.remaining(), 0.0)
        self.assertTrue(deadline.expired())

    def test_invalid_cap(self, mock_time):
        self._setup_mocks(mock_time)
        for seconds in (0, -1.5):
            with self.subTest(seconds=seconds):
                with self.assertRaises(ParameterError):
                    Deadline(seconds)
