"""Fitting example, Purcell factor from lifetimes measured against detuning"""

import numpy as np
import pyrfstat as rfs

# Lifetimes (ps) measured while tuning the emitter through a cavity mode with
# a 104.4 µeV linewidth
detuning = np.array([-300.0, -200.0, -120.0, -60.0, 0.0, 60.0, 120.0, 200.0, 300.0])
lifetime = np.array([1000.0, 707.0, 360.0, 137.0, 66.0, 141.0, 352.0, 712.0, 1010.0])

my_system = rfs.PhotonCurve("purcell")
my_system.add_scatter(detuning, lifetime)

result = rfs.fit_purcell([(d, t, 20.0) for d, t in zip(detuning, lifetime)], kappa=104.4)
for name in result.free:
    print(f"Fit: {name}={result[name]:.4g} +/- {result.uncertainties[name]:.2g}")
print(f"Resonant lifetime {result.derived['t1_resonant']:.1f} ps, Q = {result.derived['q_factor']:.0f}")

fitted = {"kappa": 104.4, "f_eff": result["f_eff"], "t1_off": result["t1_off"],
          "detuning": np.linspace(-400.0, 400.0, 401)}
my_system.add_curve(fitted, name="fit")
my_system.show_plot(xlabel="detuning (µeV)", ylabel="T1 (ps)")
