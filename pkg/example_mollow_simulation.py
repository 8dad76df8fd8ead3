"""Simulation example, resonance fluorescence spectrum under strong drive"""

import numpy as np
import pyrfstat as rfs

# linewidth is hbar*gamma_sp in µeV, rabi_energy sets the side-peak splitting
system_parameters = {"linewidth": 1.1754, "rabi_energy": 26.7, "energy": np.linspace(-80.0, 80.0, 3201)}

my_system = rfs.PhotonCurve("mollow")
my_system.add_curve(system_parameters, name="26.7 µeV")
my_system.add_curve(dict(system_parameters, rabi_energy=13.35), name="13.35 µeV")
print("Side peaks at +/-", rfs.rabi_energy_to_frequency(26.7), "GHz")
my_system.show_plot(xlabel="energy (µeV)")
