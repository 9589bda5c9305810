#!/usr/bin/env python3
"""Run bundled scenarios through the CLI and collect their outputs.

Default runs everything that finishes in minutes; the heavy heat-map grids
(fig6*, fig7*, fig9*) are included with --all or individually by name.
--quick shrinks sweep grids and trajectory lengths for a fast smoke pass.

Examples:
    python scripts/run_scenarios.py --out results
    python scripts/run_scenarios.py --all --parallelism 8 --out results
    python scripts/run_scenarios.py fig7 --quick --out /tmp/smoke
"""

import argparse
import json
import sys
import tempfile
import time
from pathlib import Path

from hbondsim.cli import BUNDLED, load_config, main as cli_main

FAST = ("fig4", "fig5a", "fig5b", "fig8")
HEAVY = tuple(name for name in BUNDLED if name not in FAST)


def shrink(config: dict) -> dict:
    """Reduce grid density and run length for a smoke pass."""
    config = json.loads(json.dumps(config))
    integrator = config["model"].setdefault("integrator", {})
    integrator["t_end_s"] = 2e4 * 0.01 * 3.0241067602398294e-15
    if "sweep" in config:
        for axis in ("x_values", "y_values"):
            values = config["sweep"][axis]
            step = -(-len(values) // 3)
            config["sweep"][axis] = values[::step]
        if config["sweep"].get("panel_values"):
            config["sweep"]["panel_values"] = config["sweep"]["panel_values"][:2]
    if "phonon_series" in config:
        config["phonon_series"]["n_values"] = [1, 2, 3]
    return config


def run(name: str, out_dir: Path, parallelism: int, quick: bool) -> int:
    mode = "sweep" if ("sweep" in load_config(name) or "phonon_series" in load_config(name)) \
        else "evolve"
    argv = ["--out", str(out_dir), "--parallelism", str(parallelism)]
    if quick:
        config = shrink(load_config(name))
        with tempfile.NamedTemporaryFile("w", suffix=f"_{name}.json", delete=False) as fh:
            json.dump(config, fh)
            path = fh.name
        argv = [mode, "--config", path] + argv
    else:
        argv = [mode, "--config", name] + argv
    started = time.time()
    code = cli_main(argv)
    print(f"[{name}] exit={code} ({time.time() - started:.1f}s)")
    return code


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("scenarios", nargs="*", help=f"subset of {', '.join(BUNDLED)}")
    parser.add_argument("--all", action="store_true", help="include the heavy heat-map grids")
    parser.add_argument("--quick", action="store_true", help="shrunken smoke-test settings")
    parser.add_argument("--out", default="results")
    parser.add_argument("--parallelism", type=int, default=4)
    args = parser.parse_args()

    names = args.scenarios or (BUNDLED if args.all else FAST)
    unknown = [n for n in names if n not in BUNDLED]
    if unknown:
        parser.error(f"unknown scenario(s): {', '.join(unknown)}")

    out_dir = Path(args.out)
    failures = [name for name in names if run(name, out_dir, args.parallelism, args.quick)]
    if failures:
        print(f"failed: {', '.join(failures)}", file=sys.stderr)
        return 1
    print(f"all outputs in {out_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
