''' Exceptions raised by the :mod:`rackshuffle` modules.

Precondition violations are always reported with a :class:`ParameterError` (or one of its
subclasses) that names the failed condition. Failed verifications are never exceptions: they are
entries of the reports returned by the validating functions.
'''

from typing import Optional


class ParameterError(ValueError):
    ''' A parameter violates a precondition.

    Args:
        message: The error message.
        condition: The failed condition in short form, for example ``'P ∤ K'``. Defaults to the
            message.
    '''

    def __init__(self, message: str, condition: Optional[str] = None):
        super().__init__(message)
        self.condition = condition or message


class IndexRangeError(ParameterError, IndexError):
    ''' A 1-based index is out of its valid range. '''


class UnsupportedParameterError(ParameterError):
    ''' The parameters are valid but not supported by the operation. '''


class SchemeMismatchError(ParameterError):
    ''' An assignment of a different scheme was passed to a shuffle runner. '''


class InstanceTooLargeError(ParameterError):
    ''' The brute-force oracle refuses an instance with too many candidates.

    Args:
        candidates: The estimated number of candidates of the instance.
        limit: The maximum number of candidates the oracle accepts.
    '''

    def __init__(self, candidates: int, limit: int):
        super().__init__(
            f'Instance too large for exhaustive search: {candidates} candidates '
            f'(limit is {limit})',
            condition='candidates > limit'
        )
        self.candidates = candidates
        self.limit = limit
