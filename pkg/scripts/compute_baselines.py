#!/usr/bin/env python3
"""Measure every baseline constant and freeze it into baselines.json.

Run once after any intentional change to the measured machinery; commit the
result.  The acceptance suite re-runs identical measurements and asserts
stability against this file.
"""

import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from resokit.baselines import repo_baselines_path, save_baselines
from resokit.measure import ALL_SUITES


def main() -> int:
    values = {}
    for name, suite in ALL_SUITES.items():
        t0 = time.time()
        values[name] = suite()
        print(f"{name}: {json.dumps(values[name])} ({time.time() - t0:.1f}s)",
              flush=True)
    path = repo_baselines_path()
    save_baselines(path, values)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
