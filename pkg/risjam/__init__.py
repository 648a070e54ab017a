from risjam.__version__ import __version__
from risjam.geometry import *
from risjam.beamforming import *
from risjam.forms import *
from risjam.solver import *
from risjam.baselines import *
from risjam.harness import *
from risjam.config import *
from risjam.store import *
