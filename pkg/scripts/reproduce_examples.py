"""Write the data behind the three worked examples into out/example{1,2,3}/.

    python scripts/reproduce_examples.py --paths 1000 --seed 2024
"""

import argparse
import json
from pathlib import Path

from stochsir.scenarios import ScenarioConfig, run_example


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    for n in (1, 2, 3):
        cfg = ScenarioConfig(params=None, n_paths=args.paths, seed=args.seed,
                             outputs=args.out / f"example{n}", scenario=f"example{n}",
                             n_workers=args.workers)
        summary = run_example(n, cfg)
        shown = {k: v for k, v in summary.items() if k not in ("classification", "files")}
        print(f"example {n}: {json.dumps(shown, default=str)}")
        print(f"  files: {', '.join(summary['files'])}")


if __name__ == "__main__":
    main()
