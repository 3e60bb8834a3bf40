"""Estimate b0 from the high-frequency magnitude asymptote of a few plants."""

from adrctf.freq import RationalTf, crossover_frequency, estimate_b0_crossover

PLANTS = {
    "1/(1+s)^2": (RationalTf([1.0], [1.0, 2.0, 1.0]), 2),
    "4/(1+s)^2": (RationalTf([4.0], [1.0, 2.0, 1.0]), 2),
    "3/(2+0.5s)": (RationalTf([3.0], [2.0, 0.5]), 1),
    "(1+0.2s)/((1+s)(1+0.1s)(1+5s))": (RationalTf([1.0, 0.2], [1.0, 6.1, 5.6, 0.5]), 2),
}


def main():
    print("plant,n,b0,crossover_rad_s")
    for name, (P, n) in PLANTS.items():
        b0 = estimate_b0_crossover(P, n)
        print(f"{name},{n},{b0:.5f},{crossover_frequency(b0, n):.5f}")


if __name__ == "__main__":
    main()
