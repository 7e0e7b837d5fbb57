"""Run the full command battery on the built-in fixtures.

Writes configs and reports under out/ (override with --out) and prints one
line per command.  Exit status is nonzero if any command fails its checks.

    python scripts/run_all_checks.py [--out DIR]
"""

import argparse
import sys
import time
from pathlib import Path

from ahmass.cli import run

HYPERBOLIC = {"family": "hyperbolic", "n": 3, "params": {}}
STATIC_FAMILY = {"family": "schwarzschild_ads", "n": 3, "params": {"m": 0.5}}

BATTERY = [
    ("mass", HYPERBOLIC, {}),
    ("mass", STATIC_FAMILY, {}),
    ("curvature", STATIC_FAMILY, {}),
    ("verify-ah", STATIC_FAMILY, {"q_claimed": 3.0}),
    ("duality-check", STATIC_FAMILY, {"pairs": 10}),
    ("eigenfunction", STATIC_FAMILY, {}),
    ("deform", HYPERBOLIC, {}),
    ("first-variation", STATIC_FAMILY, {}),
    ("ode-verify", None, {"ode": {"p_amp": 0.3, "q_amp": 0.5, "f_amp": 1.0,
                                  "decay": 2.0}}),
    ("dichotomy", HYPERBOLIC, {"fan_count": 64}),
    ("rigidity-check", HYPERBOLIC, {}),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out")
    args = parser.parse_args()
    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    failures = 0
    for i, (command, metric, numeric) in enumerate(BATTERY):
        config = {"command": command, "numeric": dict(numeric, seed=20240801)}
        if metric is not None:
            config["metric"] = metric
        out_dir = root / f"{i:02d}_{command.replace('-', '_')}"
        t0 = time.time()
        status = run(config, out_dir=out_dir)
        label = "pass" if status == 0 else "FAIL"
        failures += status != 0
        name = metric["family"] if metric else "-"
        print(f"{label}  {command:16s} {name:18s} {time.time() - t0:6.1f}s  "
              f"-> {out_dir}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
