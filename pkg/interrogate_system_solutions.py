import random

import pyrfstat as rfs

# Compare the closed-form g2 with quantum regression on the Bloch equations
# over random emitters, drives and delays, one row per draw
output_file = open("system_results.csv", "w", buffering=1)
output_file.write("t1,t2,rabi_energy,tau,analytical,kinetic,difference\n")
analytical_system = rfs.PhotonCurve(rfs.systems.System_analytical_g2)
kinetic_system = rfs.PhotonCurve(rfs.systems.System_kinetic_g2)

for _ in range(1000):
    t1 = random.uniform(50.0, 2000.0)
    query_system = {
        "t1": t1,
        "t2": random.uniform(0.05, 2.0) * t1,
        "rabi_energy": random.uniform(0.0, 20.0),
        "tau": random.uniform(-5.0, 5.0) * t1,
    }
    kinetic_result = kinetic_system.query(query_system)
    analytical_result = analytical_system.query(query_system)
    output_file.write(
        f"{query_system['t1']},{query_system['t2']},{query_system['rabi_energy']},{query_system['tau']},"
        f"{analytical_result},{kinetic_result},{abs(analytical_result - kinetic_result)}\n"
    )

output_file.close()
