from .analytical_systems import *
from .cavity_systems import *
from .interferometer_systems import *
