"""Run every experiment config in configs/ and collect the outputs.

    python scripts/run_all.py [--threads 4] [--out results] [name ...]

Each config writes into its own subdirectory of --out.
"""
import argparse
import sys
import time
from pathlib import Path

from bosecrit.cli import main as bosecrit_main
from bosecrit.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="config stems, default all")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=str(ROOT / "results"))
    args = ap.parse_args(argv)

    configs = sorted((ROOT / "configs").glob("*.cfg"))
    if args.names:
        configs = [c for c in configs if c.stem in args.names]
    status = 0
    for cfg_path in configs:
        cfg = load_config(cfg_path)
        out = Path(args.out) / cfg_path.stem
        t0 = time.perf_counter()
        code = bosecrit_main([cfg.command, "--config", str(cfg_path), "--out", str(out),
                              "--threads", str(args.threads)])
        print(f"[{cfg_path.stem}] exit {code} in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
