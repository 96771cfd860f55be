__version__ = "0.1.0"

from .model import *
from .analytic import *
from .dynamics import *
from .simulate import *
from .sweep import SweepSpec, load_sweep, run_sweep
from .behavior import *
from .exceptions import *
