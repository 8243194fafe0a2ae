''' Timers for the phases of the experiments, and the wall-clock cap of the solvers. '''

import time
from collections import deque
from itertools import islice
from typing import Deque, Optional, Iterator, Dict

from .errors import ParameterError


class StopWatch:
    ''' A nested, named context-manager timer.

    Example usage::

        with StopWatch('run') as root:
            with root.child('assignment'):
                assignment = assign(topology, params)
            with root.child('shuffle'):
                delivered, report = run_shuffle(topology, assignment, store)
        logger.debug(repr(root))

    Every exit from the context manager records one interval; the child watches are kept and can
    be entered repeatedly, in which case they remember the last ``max_intervals`` intervals.

    Args:
        name: The name of this StopWatch
        max_intervals: Maximum number of intervals to be recorded.

    Attributes:
        name (str): The name of this StopWatch
        parent (Optional['StopWatch']): The parent StopWatch
        children (Dict[str, 'StopWatch']): The name-indexed dictionary of the children StopWatches
    '''

    # Print at most this many intervals in __repr__
    MAX_REPR_INTERVALS = 5

    def __init__(self, name: str, max_intervals: int = 10):
        self.name: str = name
        self.intervals: Deque[float] = deque(maxlen=max_intervals)
        self.parent: Optional['StopWatch'] = None
        self.children: Dict[str, 'StopWatch'] = {}
        self._start: Optional[float] = None

    def child(self, name: str, max_intervals: Optional[int] = None) -> 'StopWatch':
        ''' Creates a new or returns an existing child of this StopWatch.

        Args:
            name: Name of the child StopWatch.
            max_intervals: Maximum number of intervals to be recorded in the
                child. If None, max_intervals of the parent (this object) will be used.
        '''
        if name in self.children:
            return self.children[name]
        if max_intervals is None:
            max_intervals = self.intervals.maxlen
        child = self.__class__(name, max_intervals=max_intervals)
        child.parent = self
        self.children[name] = child
        return child

    def parents(self) -> Iterator['StopWatch']:
        ''' Returns a generator of all parents of this StopWatch. '''
        current = self.parent
        while current is not None:
            yield current
            current = current.parent

    def full_name(self) -> str:
        ''' Returns the dotted name of this StopWatch, including all parents' name. '''
        family = [self.name]
        family.extend(p.name for p in self.parents())
        return '.'.join(reversed(family))

    @property
    def level(self) -> int:
        ''' Returns the number of parents. '''
        return len(list(self.parents()))

    def __enter__(self) -> 'StopWatch':
        self._start = time.perf_counter()
        return self

    def __exit__(self, *_) -> None:
        self.intervals.append(time.perf_counter() - self._start)
        self._start = None

    def elapsed(self) -> float:
        ''' The running time if the watch is running, otherwise the last interval (in seconds). '''
        if self._start is not None:
            return time.perf_counter() - self._start
        return self.intervals[-1] if self.intervals else 0.0

    def total(self) -> float:
        ''' The sum of the recorded intervals (in seconds). '''
        return sum(self.intervals)

    def _repr_props(self) -> Iterator[str]:
        yield f'name={self.name}'
        if self.intervals:
            ivs = [f'{iv:.4f}' for iv in islice(self.intervals, self.MAX_REPR_INTERVALS)]
            if len(self.intervals) > self.MAX_REPR_INTERVALS:
                ivs.append('...')
            yield f'intervals=[{", ".join(ivs)}]'
            yield f'total={self.total():.4f}'

    def __repr__(self) -> str:
        ''' Indented string representation of this StopWatch.'''
        lvl = self.level
        indent = '    ' * lvl
        props = list(self._repr_props())
        if self.children:
            children = (repr(c) for c in self.children.values())
            props.append(f'children=[{", ".join(children)}\n{indent}]')
        return f'{chr(10) if lvl > 0 else ""}{indent}<{self.__class__.__name__} {" ".join(props)}>'


class Deadline:
    ''' A wall-clock cap measured from the creation of the instance.

    Args:
        seconds: The allowed running time. None means no cap.

    Raises:
        ParameterError: If the time cap is not positive.
    '''

    def __init__(self, seconds: Optional[float] = None):
        if seconds is not None and seconds <= 0:
            raise ParameterError(f'The time cap must be positive, got {seconds}', 'time cap ≤ 0')
        self.seconds = seconds
        self._start = time.monotonic()

    def remaining(self) -> Optional[float]:
        ''' The remaining seconds, never negative, or None without a cap. '''
        if self.seconds is None:
            return None
        return max(0.0, self.seconds - (time.monotonic() - self._start))

    def expired(self) -> bool:
        ''' True if the time cap has passed. '''
        return self.seconds is not None and self.remaining() <= 0.0

    def __repr__(self) -> str:
        return f'<Deadline seconds={self.seconds} remaining={self.remaining()}>'
