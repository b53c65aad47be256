#!/usr/bin/env python3
"""Regenerate the stored golden payloads from configs/golden/*.json.

Run from the repository root after an intentional numerical change:

    python3 scripts/regen_golden.py

The regression test compares campaign payload bytes against these files, so
only regenerate when the change in numbers is understood and wanted.
"""
import json
import sys
from pathlib import Path

from modbanach.cli import run_campaign

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    configs = sorted((ROOT / "configs" / "golden").glob("*.json"))
    if not configs:
        print("no golden configs found", file=sys.stderr)
        return 1
    out_dir = ROOT / "tests" / "golden"
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in configs:
        config = json.loads(path.read_text())
        result = run_campaign(config)
        payload = json.dumps(
            result.to_json_obj(include_meta=False)["payload"], sort_keys=True
        ).encode()
        target = out_dir / f"{config['name']}.payload.json"
        target.write_bytes(payload + b"\n")
        print(f"wrote {target} ({len(payload)} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
