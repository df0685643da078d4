"""End-to-end run on synthetic data, as the ``commstab pipeline`` command does.

Writes report.json, CSV tables, per-period .net/.clu files and a heatmap
into a temporary directory and prints the headline numbers.
"""
from __future__ import annotations

import json
import tempfile
from pathlib import Path

from commstab.pipeline import PipelineConfig, run_pipeline


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "run"
        run_pipeline(PipelineConfig(output_dir=str(out), seed=42, svg=True))
        print("files:", sorted(p.name for p in out.iterdir()))
        doc = json.loads((out / "report.json").read_text())
        for rel, body in doc["relations"].items():
            structures = [p["blockmodel"]["structure"] for p in body["periods"]]
            st = body["stability"]
            print(f"[{rel}] structures {structures}")
            print(f"[{rel}] stability ({st['aggregate']}): {st['series']:.3f}")


if __name__ == "__main__":
    main()
