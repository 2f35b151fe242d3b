"""Tabulate tunneling times of the quarter-wave barrier vs wavelength and vs angle."""

import argparse

import numpy as np

from twophoton.multilayer import (design_wavelength_for_thickness, group_delay,
                                  quarter_wave_stack, reference_delay, stack_response,
                                  tunneling_times)

FS = 1e-15
NM = 1e-9


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--total-nm", type=float, default=1100.0)
    ap.add_argument("--n-high", type=float, default=2.22)
    ap.add_argument("--n-low", type=float, default=1.41)
    ap.add_argument("--periods", type=int, default=5)
    ap.add_argument("--probe-nm", type=float, default=702.0)
    args = ap.parse_args()

    lam0 = design_wavelength_for_thickness(args.total_nm * NM, args.n_high, args.n_low, args.periods)
    stack = quarter_wave_stack(lam0, args.n_high, args.n_low, args.periods)
    print(f"design wavelength {lam0 / NM:.1f} nm, thickness {stack.total_thickness / NM:.1f} nm")

    print("\nwavelength_nm  T  group_fs  larmor_fs  semiclassical_fs  d_over_c_fs")
    for lam in np.arange(500, 901, 25):
        t = tunneling_times(stack, lam * NM)
        trans = stack_response(stack, lam * NM).T
        print(f"{lam:12.0f}  {trans:.4f}  {t.group_delay / FS:8.3f}  {t.larmor / FS:9.3f}"
              f"  {t.semiclassical / FS:16.3f}  {t.d_over_c / FS:11.3f}")

    print(f"\nangle_deg  excess_delay_fs (p, {args.probe_nm:g} nm; negative = superluminal)")
    for deg in range(0, 60, 5):
        a = np.radians(deg)
        excess = group_delay(stack, args.probe_nm * NM, a, "p") - reference_delay(stack, a)
        print(f"{deg:9d}  {excess / FS:+.3f}")


if __name__ == "__main__":
    main()
