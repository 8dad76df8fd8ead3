"""Fitting example, Rabi energy and signal fraction from a measured g2"""

import numpy as np
import pyrfstat as rfs

# Synthetic measurement: background-mixed, IRF-convolved g2 with noise
irf = rfs.IRFParams(400.0)
grid = rfs.GridSpec.symmetric(20000.0, 100.0)
truth = {"t1": 560.0, "t2": 360.0, "rabi_energy": 0.9, "rho": 0.96, "amplitude": 1.0}
rng = np.random.default_rng(1)
values = rfs.fitting.g2_model(truth, grid, irf) * (1.0 + 0.01 * rng.standard_normal(grid.count))
data = rfs.CorrelationCurve.from_grid(grid, values)

# T1 and T2 are held at their measured values, the Rabi energy, rho and the
# amplitude are fitted from a rough starting point
result = rfs.fit_g2(data, irf, init={"rabi_energy": 0.5, "rho": 0.9})
for name in result.free:
    print(f"Fit: {name}={result[name]:.5g} +/- {result.uncertainties[name]:.2g}")
print(f"g2(0) deconvolved: {result.derived['g2_zero_deconvolved']:.4f}")
print(f"g2(0) as measured: {result.derived['g2_zero_convolved']:.4f}")

my_system = rfs.PhotonCurve("g2")
my_system.add_scatter(data.taus, data.values)
fitted = {"t1": 560.0, "t2": 360.0, "rabi_energy": result["rabi_energy"], "rho": result["rho"],
          "tau": np.linspace(-20000.0, 20000.0, 801)}
my_system.add_curve(fitted, name="fit, deconvolved", readout=rfs.Readout.background_mixed)
my_system.show_plot(xlabel="tau (ps)", ylabel="g2")
