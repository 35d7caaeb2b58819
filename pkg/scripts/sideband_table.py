"""Closest higher-order sidebands to the COM blue sideband for chains of 2..20 ions."""

from ionfock import normal_modes, sideband_spectrum


def main():
    print(f"{'N':>3} {'order2':>8} {'order3':>8} {'order2+COM':>11} {'order3+COM':>11}")
    for N in range(2, 21):
        m = normal_modes(N)
        row = [sideband_spectrum(m, k, include_com=c) for c in (False, True) for k in (2, 3)]
        vals = [f"{r.min():8.4f}" if len(r) else f"{'-':>8}" for r in row]
        print(f"{N:>3} {vals[0]} {vals[1]} {vals[2]:>11} {vals[3]:>11}")


if __name__ == "__main__":
    main()
