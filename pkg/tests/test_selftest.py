"""Test the shipped example corpus against its expected values."""
import json
from pathlib import Path
import shutil

from mutual_independence.selftest import MANIFEST, RESOURCES, run_selftest


def test_shipped_manifest_passes():
    """Every shipped example reproduces its expected value."""
    report = run_selftest()
    assert report.passed
    assert len(report.results) == len(json.loads(MANIFEST.read_text())["cases"])


def test_wrong_expectation_fails(tmp_path: Path):
    """A case with a wrong expected value is reported as failed."""
    shutil.copy(RESOURCES / "phi_plus.json", tmp_path / "phi_plus.json")
    manifest = tmp_path / "selftest.json"
    manifest.write_text(
        json.dumps(
            {
                "cases": [
                    {"name": "right", "file": "phi_plus.json", "kind": "state", "quantity": "entropy",
                     "args": {"labels": ["A"]}, "expected": 1.0, "tol": 1e-9},
                    {"name": "wrong", "file": "phi_plus.json", "kind": "state", "quantity": "entropy",
                     "args": {"labels": ["A", "B"]}, "expected": 1.0, "tol": 1e-9},
                ]
            }
        )
    )
    report = run_selftest(manifest)
    assert not report.passed
    assert [r.passed for r in report.results] == [True, False]
    assert abs(report.results[1].value) < 1e-9
