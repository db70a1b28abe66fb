"""Bootstrap percolation and kinetically constrained model laboratory."""
from .errors import ConfigError, KcmLabError
from .family import UpdateFamily, analyze_family, parse_family, zoo
from .samples import TauSample

__version__ = "0.1.0"
