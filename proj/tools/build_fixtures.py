#!/usr/bin/env python3
"""Regenerates fixtures/table_prompts.json (recorded replies for the shipped comparison prompts).

Each record keys a canned model reply by the hash of the rendered request,
so the semcost binary must be built first.
"""

import argparse
import json
import pathlib
import subprocess

ROOT = pathlib.Path(__file__).resolve().parent.parent

# scenario -> prompt label -> scores
SCORES = {
    "workzone": {
        "Empty": {"ws": 0.1, "wall": 0.1},
        "Busy": {"ws": 1.0, "wall": 0.2},
    },
    "mep": {
        "MEP installed": {"ws": 0.3, "wall": 0.1},
        "Ongoing MEP": {"ws": 0.8, "wall": 0.6},
    },
    "cement": {
        "Dried cement": {"cement": 0.1, "weld": 0.8, "storage": 0.1},
        "Wet cement": {"cement": 0.8, "weld": 0.2, "storage": 0.1},
    },
}


def request_hash(semcost, scenario, text):
    out = subprocess.run(
        [semcost, "request", "--scenario", str(scenario), "--text", text, "--json"],
        check=True, capture_output=True, text=True,
    ).stdout
    return json.loads(out)["request_hash"]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--semcost", default=str(ROOT / "build" / "tools" / "semcost"))
    parser.add_argument("--out", default=str(ROOT / "fixtures" / "table_prompts.json"))
    args = parser.parse_args()

    records = []
    for name, by_label in SCORES.items():
        scenario = ROOT / "scenarios" / f"{name}.json"
        prompts = json.loads((ROOT / "scenarios" / f"{name}_prompts.json").read_text())
        for p in prompts:
            scores = by_label[p["label"]]
            reply = "Scores for the listed obstacles:\n" + json.dumps({"scores": scores})
            records.append({
                "request_hash": request_hash(args.semcost, scenario, p["text"]),
                "prompt": f"{name}: {p['text']}",
                "raw_response": reply,
            })
    pathlib.Path(args.out).write_text(json.dumps(records, indent=2) + "\n")
    print(f"wrote {len(records)} records to {args.out}")


if __name__ == "__main__":
    main()
