from .kinetic_systems import *
