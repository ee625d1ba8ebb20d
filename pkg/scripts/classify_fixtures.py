"""Classify every problem fixture and print verdict, margin and timing.

Usage: python scripts/classify_fixtures.py [fixtures_dir]
"""
import sys
import time
from pathlib import Path

from momentcone import io
from momentcone.errors import MomentConeError
from momentcone.synthesis import classify


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    root = Path(argv[0]) if argv else Path(__file__).resolve().parent.parent / "fixtures"
    print(f"{'fixture':<24} {'verdict':<22} {'margin':>12} {'cuts':>5} {'secs':>6}")
    for path in sorted(root.glob("*.json")):
        d = io.load_json(path)
        if "moments" not in d:
            continue
        try:
            prob = io.problem_from_json(d)
        except MomentConeError as exc:
            print(f"{path.stem:<24} error: {exc.kind}")
            continue
        start = time.perf_counter()
        cl = classify(prob.moments, prob.support, prob.synthesis_params(None, None, 0))
        secs = time.perf_counter() - start
        print(f"{path.stem:<24} {cl.verdict:<22} {cl.certificate.margin:>12.4e} "
              f"{cl.certificate.cuts_used:>5} {secs:>6.2f}")


if __name__ == "__main__":
    main()
