"""Print the headline numbers from a results directory produced by run_all.py."""
import sys
from pathlib import Path

from bosecrit.io import read_csv


def report(path):
    vals = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or "=" not in line:
            continue
        k, v = (s.strip() for s in line.split("=", 1))
        vals[k] = v
    return vals


def main(root="results"):
    root = Path(root)
    dos = root / "dos" / "dos_fit.txt"
    if dos.exists():
        r = report(dos)
        print(f"DOS slope {float(r['slope']):.5f} (asymptotic {float(r['expected_slope']):.5f})")
    lad = root / "ladder" / "ladder_summary.csv"
    if lad.exists():
        cols, meta = read_csv(lad)
        print(f"ladder tau offset {float(meta['tau_offset_fit']):.4f}")
        for n, dev in zip(cols["N"], cols["max_central_deviation"]):
            print(f"  N = {n:.3g}: max |spacing/dE - 1| = {dev:.4f}")
    for tag in ("otoc_three_mode", "otoc_five_mode"):
        for fit in sorted((root / tag).glob("otoc_fit_N*.txt")):
            r = report(fit)
            rate = r.get("rate", "n/a")
            print(f"{tag} {fit.stem[9:]}: rate {rate}, peak period {r['period']}, "
                  f"2pi/dE {float(r['heisenberg_period']):.4f}")
    sc = root / "gap_scaling" / "gap_scaling_fit.txt"
    if sc.exists():
        r = report(sc)
        print(f"gap exponents: alpha {float(r['exponent_alpha']):.4f}, energy {float(r['exponent_energy']):.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
