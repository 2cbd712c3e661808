"""Rank changed functions by how many call sites and callers they touch."""

from abstf import build_call_graph, compute_impact, diff_programs, parse_program

V1 = """
fn clamp(x) { if x > 100 { return 100; } return x; }
fn scale(x) { return clamp(x * 2); }
fn mix(a, b) { return clamp(a) + clamp(b) + scale(a); }
fn main() { return mix(3, 4); }
fn unused() { return 0; }
"""
V2 = V1.replace("return 100;", "return 99;").replace("return 0;", "return 1;")

old, new = parse_program(V1), parse_program(V2)
impact = compute_impact(diff_programs(old, new), build_call_graph(new), build_call_graph(old))
for name in impact.ranking:
    e = impact.entries[name]
    print(f"{name:<8} call sites={e.call_sites}  impacted={sorted(e.impacted)}")
