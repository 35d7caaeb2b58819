"""Fidelity landscape of a five-ion blue pass over (g0T, delta0T)."""

import argparse

from ionfock import ChainConfig, PulseSpec
from ionfock.sweep import Axis, SweepGrid, fidelity_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tier", default="LADDER", choices=["LADDER", "FULL_LD_RWA", "BEYOND_RWA"])
    ap.add_argument("--count", type=int, default=30)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="landscape.csv")
    args = ap.parse_args()

    cfg = ChainConfig(5, 0.1, 1.0, m_max=15, tier=args.tier)
    axis = Axis(0.5, 15.0, args.count)
    res = fidelity_map(SweepGrid(axis, axis, cfg, PulseSpec(delta0T=1.0)), jobs=args.jobs)
    res.to_csv(args.out)
    bl, tr = res.quadrant_means()
    print(f"{res.fidelity.size} cells, {len(res.errors)} failed; mean F bottom-left {bl:.3f}, "
          f"top-right {tr:.3f} -> {args.out}")


if __name__ == "__main__":
    main()
