"""
Driving the audit runner from a manifest
========================================

The projeq command line takes one JSON manifest describing a chart and
a geometry, runs a command's audits, and writes a deterministic
report.json plus CSVs into the output directory. This script writes a
manifest, invokes two commands in-process, and prints the audit lines.
The same runs work from a shell:

    projeq conserve --manifest demo_manifest.json --out out/conserve
    projeq lc-build --manifest demo_manifest.json --out out/lcbuild --tol bm_tol=1e-9
"""

import json
import pathlib
import tempfile

from projeq.cli import main

manifest = {
    "chart": {"names": ["x", "y"], "bounds": [[0.1, 1.9], [-1.0, 1.0]]},
    "geometry": {"kind": "lc", "block_sizes": [1, 1], "phis": ["x", "2"]},
    "run": {"samples": 80, "geodesics": 3, "horizon": 1.5, "r": 1},
}

work = pathlib.Path(tempfile.mkdtemp(prefix="projeq_demo_"))
mpath = work / "demo_manifest.json"
mpath.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
print(f"manifest: {mpath}")

for command in ("conserve", "split"):
    out = work / command
    rc = main([command, "--manifest", str(mpath), "--out", str(out)])
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    print(f"\n$ projeq {command} ... -> exit {rc}")
    for audit in report["audits"]:
        mark = "ok " if audit["pass"] else "FAIL"
        print(f"  [{mark}] {audit['audit']}: value {audit['value']} "
              f"(threshold {audit['threshold']})")
    for name in report.get("csv_files", []):
        print(f"  wrote {name}")
