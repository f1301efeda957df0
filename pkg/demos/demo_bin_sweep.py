#!/usr/bin/env python3
"""Bin-size tradeoff: alphabet size versus crosstalk.

Small detection areas pack more symbols onto the detector (higher noiseless
limit log2 N) but the fixed-size focal spot then spills into the neighbors;
large areas catch the whole spot but waste pixels.  This sweep emits, per
bin size, the noiseless limit, the probability of hitting the correct area,
and the exact expected mutual information at a pessimistic and an
optimistic signal-to-dark-count ratio.

Run:  python demos/demo_bin_sweep.py
"""

from pathlib import Path

from photonlink import PointSpread, sweep_bin_sizes

OUT = Path(__file__).parent / "output"
BINS = (2, 4, 6, 8, 10, 12, 16, 24, 32)


def main():
    psf = PointSpread(fwhm_x=8.0, fwhm_y=8.0)
    report = sweep_bin_sizes(BINS, 896, 648, psf, r_low=10.0, r_high=100.0)

    print(f"{'bin':>4} {'symbols':>8} {'log2(N)':>8} {'hit prob':>9} "
          f"{'MI @ R=10':>10} {'MI @ R=100':>11}")
    for r in report.records:
        print(f"{r['bin_size']:>4} {r['n_symbols']:>8} {r['i_max_bits']:>8.3f} "
              f"{r['hit_prob']:>9.4f} {r['mi_rlow_bits']:>10.3f} {r['mi_rhigh_bits']:>11.3f}")

    print("\nper detected photon, the exact MI of this model mildly prefers fine bins:")
    print("Gaussian crosstalk is structured, so sub-bin position information survives.")
    print("A hard-decision receiver cannot use that structure; it lives off the hit")
    print("probability, which is why the coded link wants bins as wide as the spot.")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the tradeoff plot")
        return

    OUT.mkdir(exist_ok=True)
    bins = [r["bin_size"] for r in report.records]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.plot(bins, [r["i_max_bits"] for r in report.records], "o-", label="log2(N), no noise")
    ax.bar(bins, [r["mi_rhigh_bits"] for r in report.records], color="0.8", width=1.2)
    ax.bar(bins, [r["mi_rlow_bits"] for r in report.records], color="0.6", width=1.2,
           label="expected MI, R in [10, 100]")
    ax2 = ax.twinx()
    ax2.plot(bins, [r["hit_prob"] for r in report.records], "+", color="green",
             markersize=10, label="hit probability")
    ax2.set_ylabel("hit probability")
    ax2.set_ylim(0, 1.05)
    ax.set_xlabel("bin size [px]")
    ax.set_ylabel("bits per detected photon")
    ax.legend(loc="upper right")
    fig.tight_layout()
    path = OUT / "bin_sweep.png"
    fig.savefig(path, dpi=150)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
