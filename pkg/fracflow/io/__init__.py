# Licensed under the GPLv3 - see LICENSE
"""Input and output: run configurations and field dumps."""
from .config import RunConfig, load_config, SCENARIOS  # noqa
from .field import FieldDump, dump_field, load_field  # noqa
