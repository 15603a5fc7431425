# Licensed under the GPLv3 - see LICENSE
"""Sample run configurations, one per scenario, at desk-top sizes.

``CONFIGS`` maps each scenario name to the full path of its sample.
"""
from astropy.utils.data import get_pkg_data_filename

from ..io.config import SCENARIOS


__all__ = ['CONFIGS']

CONFIGS = {scenario: get_pkg_data_filename(scenario + '.yaml')
           for scenario in SCENARIOS}
