import json

from abstf.report import FATAL, PipelineReport, render_json, render_report, render_text

SECTIONS = ["CHANGES", "DANGEROUS EDGES", "SELECTED TESTS", "IMPACT", "REGRESSIONS",
            "TRACEABILITY FINDINGS", "GENERATED TESTS"]


def test_empty_report_lists_every_section():
    text = render_text(PipelineReport())
    positions = [text.index(f"\n{s}\n  (none)") for s in SECTIONS]
    assert positions == sorted(positions)
    assert text.startswith("ABSTF report (baseline version 0): no changes")


def test_json_round_trip():
    report = PipelineReport(version=3, status="changes", regressions=[{
        "test": "t", "old": {"status": "pass", "value": 1, "error": None},
        "new": {"status": "error", "value": None, "error": "overflow"},
        "reasons": [{"deleted": "g"}], "requirements": ["R1"]}])
    text = render_json(report)
    assert PipelineReport.from_dict(json.loads(text)) == report
    assert render_report(report, "json") == text
    assert "t: pass (value 1) -> error (error overflow)" in render_text(report)
    assert "calls deleted function g" in render_text(report)


def test_exit_codes():
    assert PipelineReport().exit_code == 0
    assert PipelineReport(findings=[{"kind": "UNTRACED_CODE", "subject": "h", "detail": ""}]).exit_code == 0
    assert PipelineReport(findings=[{"kind": "MISSING_TEST", "subject": "R1", "detail": ""}]).exit_code == 1
    assert PipelineReport(regressions=[{"test": "t"}]).exit_code == 1
    assert PipelineReport(status=FATAL, regressions=[{"test": "t"}]).exit_code == 2
