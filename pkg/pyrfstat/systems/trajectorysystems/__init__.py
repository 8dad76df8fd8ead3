from .trajectory_systems import *
