"""Simulation example, two-photon interference in an unbalanced Mach-Zehnder"""

import numpy as np
import pyrfstat as rfs

# The interferometer has beam splitter reflectivities r1 and r2 and a delay
# line of 13 ns. overlap is the mode overlap V of co-polarised photons.
system_parameters = {
    "t1": 560.0,
    "t2": 360.0,
    "rabi_energy": 0.9,
    "r1": 0.5,
    "r2": 0.5,
    "delay": 13000.0,
    "tau": np.linspace(-20000.0, 20000.0, 2001),
}

cross = rfs.PhotonCurve("hom cross")
cross.add_curve(system_parameters, name="cross-polarised", readout=rfs.Readout.renormalized)
cross.show_plot(xlabel="tau (ps)", show=False)

parallel = rfs.PhotonCurve("hom parallel")
parallel.add_curve(dict(system_parameters, overlap=0.9), name="co-polarised", readout=rfs.Readout.renormalized)
parallel.show_plot(xlabel="tau (ps)")

# The same curves with background and detector response, and their visibility
emitter = rfs.EmitterParams(560.0, 360.0)
drive = rfs.DriveParams(0.9)
ifo = rfs.InterferometerParams.balanced(13000.0, overlap=0.9)
g_cross, g_parallel = rfs.hom_curves(emitter, drive, ifo, rfs.GridSpec.symmetric(20000.0, 10.0), rho=0.96)
irf = rfs.IRFParams(400.0)
measured = rfs.visibility(rfs.convolve_irf(g_cross, irf), rfs.convolve_irf(g_parallel, irf))
print(f"V_HOM(0) deconvolved: {rfs.visibility(g_cross, g_parallel).value_at(0.0):.3f}")
print(f"V_HOM peak as measured: {measured.peak():.3f}")
