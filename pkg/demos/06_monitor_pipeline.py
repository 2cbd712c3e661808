"""Snapshot a project on disk, break it, and let the pipeline find the regression.

Writes into a temporary directory; the same steps are available as
``abstf snapshot`` and ``abstf run``.
"""

import json
import tempfile
from pathlib import Path

from abstf import load_snapshot, run_pipeline, take_snapshot
from abstf.report import render_text

SOURCE = """
#[req(FEE-1)]
fn fee(amount) {
  if amount > 1000 { return amount / 100; }
  return 5;
}
fn total(amount) { return amount + fee(amount); }
"""

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    (root / "bank.ml0").write_text(SOURCE)
    (root / "tests.json").write_text(json.dumps({"tests": [
        {"name": "t_small", "entry": "total", "args": [50], "expected": {"value": 55}},
        {"name": "t_large", "entry": "total", "args": [5000], "expected": {"value": 5050}},
    ]}))
    (root / "requirements.json").write_text(json.dumps(
        {"requirements": [{"id": "FEE-1", "text": "fees are 1% above 1000"}]}))

    snap = take_snapshot(root)
    print(f"baseline v{snap.version}: {sorted(snap.functions)}")

    (root / "bank.ml0").write_text(SOURCE.replace("amount / 100", "amount / 10"))
    report = run_pipeline(load_snapshot(root / ".abstf"), root, write=True)
    print(render_text(report))
    print("exit code would be", report.exit_code)
