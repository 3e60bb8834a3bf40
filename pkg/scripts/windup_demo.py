"""Step of size 10 into an integrator chain with the actuator limited to +-1.

Compares the controller with a clamped accumulator against the unclamped one.
"""

from adrctf.design import ContinuousTuning, PlantSpec
from adrctf.discrete import discrete_bandwidth_gains, discrete_tf_general
from adrctf.freq import RationalTf
from adrctf.runtime import TfController
from adrctf.sim import Scenario, default_sample_time, metrics, plant_from_tf, run_closed_loop


def main(omega_cl=1.0, k_eso=5.0, limits=(-1.0, 1.0)):
    T = default_sample_time(omega_cl, k_eso)
    scenario = Scenario.for_duration(T, 40.0, r_profile=((0.0, 10.0),), actuator_limits=limits)
    print("n,controller,overshoot_pct,settling_time,control_effort")
    for n in (1, 2):
        plant = PlantSpec(n, 1.0)
        g = discrete_bandwidth_gains(n, ContinuousTuning(omega_cl, k_eso), T)
        coeffs = discrete_tf_general(plant, g.k, g.l, T)
        P = plant_from_tf(RationalTf([1.0], [0.0] * n + [1.0]))
        for label, lim in (("clamped", limits), ("unclamped", None)):
            m = metrics(run_closed_loop(P, TfController(coeffs, lim), scenario))
            print(f"{n},{label},{m.overshoot_pct:.2f},{m.settling_time:.3f},{m.control_effort:.3f}")


if __name__ == "__main__":
    main()
