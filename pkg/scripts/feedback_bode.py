"""Bode data of the feedback controller C_FB for several observer bandwidth factors.

Usage: python scripts/feedback_bode.py [n] > fb_bode.csv
"""

import sys

import numpy as np

from adrctf.freq import bandwidth_design, bode, fb_poles_zeros


def main(n: int = 2, omega_cl: float = 1.0, b0: float = 1.0):
    omegas = np.logspace(-2, 3, 200) * omega_cl
    print("k_eso,omega,mag_db,phase_deg")
    for k in (1.0, 5.0, 10.0, 25.0):
        mag, ph = bode(bandwidth_design(n, b0, omega_cl, k)["C_FB"], omegas)
        for w, m, p in zip(omegas, mag, ph):
            print(f"{k:g},{w:.6g},{m:.6f},{p:.6f}")
    if n in (1, 2):
        for k in (1.0, 5.0, 10.0, 25.0, 100.0):
            pz = fb_poles_zeros(n, omega_cl, k)
            print(f"# k_eso={k:g} omega_p={pz.omega_p:.4f} omega_z={pz.omega_z:.4f} damping={pz.damping}", file=sys.stderr)


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2)
