''' This module contains code to standardize the configuration of the experiments. Configurations
are dataclasses that can be read from ``key=value`` files, overridden from the command line and
documented as a markdown table.
'''

from .config import ConfigBase
from .serde import (
    ConfigSerDeBase, IntegerListSerDe, FloatListSerDe, ParameterTupleListSerDe, BooleanSerDe,
    EnumSerDe
)
