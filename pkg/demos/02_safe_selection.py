"""Run a suite on version 1, edit one branch, and select only the tests that cross it."""

from abstf import (
    ExpectValue,
    TestCase,
    build_call_graph,
    build_cfgs,
    dangerous_edges,
    diff_programs,
    execute_suite,
    parse_program,
    select_tests,
)

V1 = """
fn grade(score) {
  if score >= 90 { return 4; }
  if score >= 80 { return 3; }
  return 0;
}
fn report(a, b) { return grade(a) + grade(b); }
"""
V2 = V1.replace("return 3;", "return 2;")  # a regression in the B band

suite = [
    TestCase("t_top", "grade", (95,), ExpectValue(4)),
    TestCase("t_b", "grade", (85,), ExpectValue(3)),
    TestCase("t_fail", "grade", (10,), ExpectValue(0)),
    TestCase("t_report_top", "report", (99, 91), ExpectValue(8)),
    TestCase("t_report_mixed", "report", (99, 81), ExpectValue(7)),
]

old, new = parse_program(V1), parse_program(V2)
old_cfgs, new_cfgs = build_cfgs(old), build_cfgs(new)
baseline = execute_suite(old, old_cfgs, suite)
traces = {r.test.name: r.trace for r in baseline}

delta = diff_programs(old, new)
dangerous = dangerous_edges(old_cfgs, new_cfgs, delta, build_call_graph(old))
selection = select_tests(delta, dangerous, traces, build_call_graph(old), old_cfgs)

print("modified:", sorted(delta.modified))
print("dangerous edges:", {f: sorted(e) for f, e in dangerous.items()})
for name in sorted(selection.selected):
    print(f"selected {name}: {selection.reasons[name]}")

# only the selected tests are re-run; the others provably take unchanged paths
rerun = [t for t in suite if t.name in selection.selected]
for r in execute_suite(new, new_cfgs, rerun):
    print(f"  {r.test.name}: {r.outcome.status} (got {r.outcome.value})")
