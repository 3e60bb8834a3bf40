"""Closed-loop sensitivity sweeps on P(s) = (1 + tau*s) / (1 + s)^2.

Prints the high-frequency noise gain |G_un| and the sampled step metrics for
sweeps over k_eso, b0 and the plant zero tau.
"""

import math

import numpy as np

from adrctf.design import ContinuousTuning, PlantSpec
from adrctf.discrete import discrete_bandwidth_gains, discrete_tf_general
from adrctf.freq import RationalTf, bandwidth_design, freqresp, gang_of_six
from adrctf.runtime import TfController
from adrctf.sim import Scenario, closed_loop_bandwidth, default_sample_time, metrics, plant_from_tf, run_closed_loop

W = 0.4 * math.pi


def plant(tau=0.0):
    return RationalTf([1.0, tau], [1.0, 2.0, 1.0])


def step_run(P, b0, k, noise=0.0):
    T = default_sample_time(W, k)
    g = discrete_bandwidth_gains(2, ContinuousTuning(W, k), T)
    ctl = TfController(discrete_tf_general(PlantSpec(2, b0), g.k, g.l, T))
    trace = run_closed_loop(plant_from_tf(P), ctl, Scenario.for_duration(T, 30.0, noise_sigma=noise, seed=11))
    return trace, metrics(trace)


def main():
    print("sweep,value,G_un_hf_db,bandwidth,overshoot_pct,settling_time,peak_u")
    for name, values in (("k_eso", (5.0, 10.0, 25.0)), ("b0", (0.5, 1.0, 2.0, 5.0)), ("tau", (-0.2, 0.0, 0.2))):
        for v in values:
            k = v if name == "k_eso" else 5.0
            b0 = v if name == "b0" else 1.0
            P = plant(v if name == "tau" else 0.0)
            blocks = bandwidth_design(2, b0, W, k)
            gang = gang_of_six(P, blocks["C_FB"], blocks["C_PF"], blocks["C_FF"])
            hf = 20 * np.log10(abs(freqresp(gang.G_un, [1e3 * W])[0]))
            trace, m = step_run(P, b0, k)
            bw = closed_loop_bandwidth(trace)
            print(f"{name},{v:g},{hf:.3f},{bw:.4f},{m.overshoot_pct:.2f},{m.settling_time:.3f},{m.peak_u:.3f}")


if __name__ == "__main__":
    main()
