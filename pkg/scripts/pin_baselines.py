"""Regenerate src/hrtlab/data/baselines.json from the canonical runs."""

import io
import json
from pathlib import Path

from hrtlab.cli import run

G = "surd:(1+1√5)/2"
RUNS = [
    ["scales", "--alpha", G, "--beta", "1", "--k", "6"],
    ["lowerbound", "--c0", "1", "--c1", "1", "--c2", "1", "--N", "2000"],
    ["avg", "--alpha", G, "--beta", "1", "--k", "1..6", "--seed", "3"],
    ["strips", "--alpha", G, "--beta", "1", "--k", "1..6"],
    ["ballcount", "--alpha", G, "--beta", "1", "--N", "10000", "--gamma", "2", "--seed", "11"],
    ["anprofile", "--c0", "1+1j", "--c1", "1", "--c2", "1", "--alpha", G, "--beta", "1",
     "--N", "1000", "--samples", "200", "--seed", "1"],
    ["pair", "--alpha", G, "--beta", "1", "--k", "1..6", "--samples", "100", "--seed", "7"],
    ["ratiopair", "--alpha", G, "--beta", "1", "--k", "1..6", "--samples", "100", "--seed", "7"],
    ["riemann", "--C", "2", "--D", "1", "--beta", "surd:0+1√2", "--N", "10000", "--seed", "3"],
    ["periodcheck", "--C", "2", "--D", "1", "--beta", "1/2", "--x", "0.1", "--z", "0.6", "--m", "3"],
    ["diverge", "--alpha", G, "--workers", "4"],
    ["probe", "--alpha", G, "--beta", "1", "--k", "1..6", "--seed", "7"],
]


def main():
    out = {}
    for argv in RUNS:
        buf = io.StringIO()
        run(argv, stdout=buf)
        doc = json.loads(buf.getvalue())
        for c in doc["fitted_constants"]:
            out[c["name"]] = {"value": c["value"], "direction": c["direction"], "factor": 2.0,
                              "argv": argv}
    path = Path(__file__).resolve().parents[1] / "src" / "hrtlab" / "data" / "baselines.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    for k, v in sorted(out.items()):
        print(k, v["value"])


if __name__ == "__main__":
    main()
