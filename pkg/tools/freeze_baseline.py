"""Freeze the GHZ-6 paper-mode distribution used as the regression baseline.

    python3 tools/freeze_baseline.py [--check]

No hardware histograms are available, so the baseline is the simulator's own
output from a validated run; the regression test guards against drift.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from qtwin import __version__
from qtwin.bench import load_fixture
from qtwin.calibration import bundled_calibration
from qtwin.engine import simulate
from qtwin.formats import circuit_digest

TARGET = Path(__file__).resolve().parents[1] / "tests" / "data" / "ghz-6_paper_baseline.json"


def build() -> dict:
    c = load_fixture("GHZ-6")
    cal = bundled_calibration("iqm20")
    d = simulate(c, cal, "paper")
    return {"circuit": "GHZ-6", "circuit_hash": circuit_digest(c), "calibration_hash": cal.digest(),
            "mode": "paper", "tool_version": __version__,
            "probabilities": {k: d.probabilities[k] for k in sorted(d.probabilities)}}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare against the stored file")
    args = ap.parse_args()
    doc = build()
    if args.check:
        stored = json.loads(TARGET.read_text())
        drift = max(abs(stored["probabilities"].get(k, 0) - doc["probabilities"].get(k, 0))
                    for k in set(stored["probabilities"]) | set(doc["probabilities"]))
        print(f"max drift {drift:.3e}")
        return 0 if drift < 1e-10 else 1
    TARGET.parent.mkdir(parents=True, exist_ok=True)
    TARGET.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {TARGET}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
