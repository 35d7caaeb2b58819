"""Pulse durations and heating budgets, global versus local addressing (nu/2pi = 4 MHz)."""

import math

from ionfock import heating_estimate


def main():
    nu = 2 * math.pi * 4e6
    print(f"{'N':>3} {'eps':>7} {'T_tot GLOBAL (us)':>18} {'phonons':>9} {'T_tot LOCAL (us)':>17} {'ratio':>6}")
    for N in (2, 4, 8, 16):
        for eps in (1e-2, 1e-4):
            g = heating_estimate(N, eps, nu)
            loc = heating_estimate(N, eps, nu, scheme="LOCAL")
            print(f"{N:>3} {eps:>7.0e} {g.T_total * 1e6:>18.1f} {g.phonons:>9.2e} "
                  f"{loc.T_total * 1e6:>17.1f} {loc.duration_ratio:>6.3f}")


if __name__ == "__main__":
    main()
