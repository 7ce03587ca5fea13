#!/usr/bin/env python3
"""Frequency pull and field asymmetry of a capacitively end-loaded line.

Sweeps the loading capacitance on a line whose unloaded fundamental sits at
8.8 GHz (Z0 = 53 ohm, v_p = 0.403c) and prints the dressed fundamental, the
loading energy-participation ratio, and the end-field asymmetry. With
--json the sampled eigenfield profiles of the first three modes at the
nominal 320 fF load are emitted for external plotting.
"""

import argparse
import json

import numpy as np
from scipy.constants import c as c_light

from lumpedq.loadedline import LoadedLineSpec, calibrate_length, solve_modes


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--z0", type=float, default=53.0)
    parser.add_argument("--vp-fraction-c", type=float, default=0.403)
    parser.add_argument("--unloaded-ghz", type=float, default=8.8)
    parser.add_argument("--max-load-ff", type=float, default=600.0)
    parser.add_argument("--points", type=int, default=25)
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable sweep plus field profiles")
    args = parser.parse_args()

    v_p = args.vp_fraction_c * c_light
    length = calibrate_length(2 * np.pi * args.unloaded_ghz * 1e9, 1,
                              z0=args.z0, v_p=v_p, c_load=0.0)
    loads = np.linspace(0.0, args.max_load_ff, args.points) * 1e-15

    sweep = []
    for c_load in loads:
        spec = LoadedLineSpec.from_wave_params(length, args.z0, v_p, c_load)
        mode = solve_modes(spec, 1)[0]
        sweep.append({
            "c_load_ff": c_load * 1e15,
            "f1_ghz": mode.frequency / 1e9,
            "p_load": mode.p_load,
            "u0_over_uL": abs(float(mode.u(0.0))) / abs(float(mode.u(length))),
        })

    if args.json:
        nominal = LoadedLineSpec.from_wave_params(length, args.z0, v_p, 320e-15)
        z = np.linspace(0.0, length, 201)
        profiles = [
            {"mode": m.index, "f_ghz": m.frequency / 1e9,
             "z_m": z.tolist(), "u": m.u(z).tolist()}
            for m in solve_modes(nominal, 3)
        ]
        print(json.dumps({"length_m": length, "sweep": sweep,
                          "profiles_at_320fF": profiles}, indent=2))
        return

    print(f"line length {length * 1e3:.4f} mm "
          f"(unloaded fundamental {args.unloaded_ghz:.2f} GHz)")
    print(f"{'C_L (fF)':>10} {'f1 (GHz)':>10} {'pull (%)':>9} {'p_load':>8} "
          f"{'|u(0)/u(L)|':>12}")
    f0 = sweep[0]["f1_ghz"]
    for row in sweep:
        pull = 100.0 * (f0 - row["f1_ghz"]) / f0
        print(f"{row['c_load_ff']:>10.1f} {row['f1_ghz']:>10.4f} {pull:>9.2f} "
              f"{row['p_load']:>8.4f} {row['u0_over_uL']:>12.4f}")


if __name__ == "__main__":
    main()
