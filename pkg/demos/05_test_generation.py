"""Synthesize characterization tests for a newly added function."""

from abstf import (
    SelectionReport,
    build_call_graph,
    build_cfgs,
    diff_programs,
    find_targets,
    parse_program,
    synthesize_tests,
)

V1 = "fn main() { return 0; }"
V2 = V1 + """
fn bucket(x, y) {
  if x > 5 {
    if y < 0 - 6 { return 2; }
    return 1;
  }
  if 0 { return 99; }   // can never run
  return 0;
}
"""

old, new = parse_program(V1), parse_program(V2)
delta = diff_programs(old, new)
new_cfgs = build_cfgs(new)
targets = find_targets({}, delta, SelectionReport(), {}, build_cfgs(old), new_cfgs, build_call_graph(new))
result = synthesize_tests(targets, new, new_cfgs, domain=(-8, 8), budget=2000)

for g in result.generated:
    t = g.test
    print(f"{t.name:<16} {t.entry}{t.args} -> {t.to_dict()['expected']}")
for target, trials in result.unmet:
    print(f"unmet: {target.function} edge {target.edge} after {trials} trials")
