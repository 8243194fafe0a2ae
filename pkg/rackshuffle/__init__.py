''' Rack-aware simulator and cost analyzer for the shuffle phase of MapReduce jobs.

The package implements the Uncoded, Coded and Hybrid Coded MapReduce schemes end-to-end (Map
task assignment, coded shuffle with real payload bytes, decode verification and intra/cross-rack
cost metering), the closed-form cost model of the three schemes, and a data-locality optimizer
for the placement of Map tasks under the Hybrid scheme.
'''

__version__ = '0.1.0'

import functools

def lazy_property(func):
    ''' Caches the return value of a function, and turns it into a property.

    Works on frozen dataclasses too, since the cached value is set with
    ``object.__setattr__``::

        >>> @dataclass(frozen=True)
        >>> class Foo:
        >>>     n: int
        >>>     @lazy_property
        >>>     def table(self):
        >>>         print('expensive calculation')
        >>>         return list(range(self.n))
        >>> foo = Foo(3)
        >>> foo.table
        expensive calculation
        [0, 1, 2]
        >>> foo.table
        [0, 1, 2]
    '''
    attrib_name = '_' + func.__name__
    @property
    @functools.wraps(func)
    def lazy_wrapper(instance, *args, **kwargs):
        if attrib_name in instance.__dict__:
            return instance.__dict__[attrib_name]
        value = func(instance, *args, **kwargs)
        object.__setattr__(instance, attrib_name, value)
        return value
    return lazy_wrapper
