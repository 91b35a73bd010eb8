"""Run the synthetic-corpus comparison of every vectorization x classifier pair.

    python scripts/run_surrogate.py [--out results/surrogate] [--kinds tfidf glove-sum] [--no-roundtrip]

Writes ``table.md`` and ``results.json`` under ``--out`` and prints a line per
configuration as it finishes.
"""

import argparse
import json
import sys
from pathlib import Path

from prodclass.archive import json_default
from prodclass.experiments import run_surrogate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/surrogate")
    ap.add_argument("--kinds", nargs="*")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-roundtrip", action="store_true")
    args = ap.parse_args(argv)

    def show(r):
        status = r.error or f"acc={r.accuracy:.3f} wF1={r.weighted_f1:.3f} roundtrip={r.roundtrip_ok}"
        print(f"{r.vectorization:14s} {r.classifier:15s} {r.seconds:7.1f}s  {status}", flush=True)

    res = run_surrogate(kinds=args.kinds, seed=args.seed, roundtrip=not args.no_roundtrip, progress=show)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.md").write_text(res.table(), encoding="utf-8")
    (out / "results.json").write_text(json.dumps(res.to_dict(), indent=2, default=json_default), encoding="utf-8")
    print(res.table())
    b, w = res.best(), res.worst()
    print(f"best  {b.vectorization}/{b.classifier} {b.accuracy:.3f}")
    print(f"worst {w.vectorization}/{w.classifier} {w.accuracy:.3f}")
    print(f"total {res.total_seconds:.0f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
