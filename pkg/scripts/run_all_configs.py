"""Run every bundled config and print the headline numbers of each run."""

import argparse
import json
from pathlib import Path

from twophoton.runner import RunConfig, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", type=Path, default=ROOT / "configs")
    ap.add_argument("--output-dir", type=Path, default=ROOT / "results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    for path in sorted(args.configs.glob("*.json")):
        cfg = RunConfig.from_file(path)
        result = run_experiment(cfg, args.output_dir, workers=args.workers)
        print(f"== {path.name} ({cfg.experiment})")
        print(json.dumps(result.summary["results"], indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
