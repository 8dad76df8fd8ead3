"""Simulation example, g2 of a resonantly driven emitter"""

import numpy as np
import pyrfstat as rfs

# Times are in ps and energies in µeV throughout. The emitter is defined by
# its radiative lifetime t1 and coherence time t2, the drive by the Rabi
# energy hbar*Omega.
system_parameters = {"t1": 560.0, "t2": 360.0, "rabi_energy": 0.9, "tau": 0.0}

my_system = rfs.PhotonCurve("g2")
print("Simulating the driven emitter with these parameters:")
print(system_parameters)
print("g2(0) =", my_system.query(system_parameters))

# Make tau the changing parameter to draw the correlation function
system_parameters["tau"] = np.linspace(-4000.0, 4000.0, 801)
my_system.add_curve(system_parameters, name="0.9 µeV")

# A stronger drive shows Rabi oscillations
system_parameters2 = dict(system_parameters, rabi_energy=5.0)
my_system.add_curve(system_parameters2, name="5 µeV")

# What a detector sees with 4 % uncorrelated background
system_parameters3 = dict(system_parameters, rho=0.96)
my_system.add_curve(system_parameters3, name="0.9 µeV, rho=0.96", readout=rfs.Readout.background_mixed)

my_system.show_plot(xlabel="tau (ps)")
