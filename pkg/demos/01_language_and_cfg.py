"""Parse a MiniLang function, print its canonical form and control-flow graph."""

from abstf import build_call_graph, build_cfg, parse_program, serialize_program

SOURCE = """
// absolute value with a loop thrown in
#[req(ABS-1)]
fn abs(x) {
  if x < 0 { x = 0 - x; }
  return x;
}

fn sum_abs(n) {
  let total = 0;
  while n > 0 {
    total = total + abs(n - 3);
    n = n - 1;
  }
  return total;
}
"""

prog = parse_program(SOURCE, "demo.ml0")
print(serialize_program(prog))

for fn in prog.functions:
    cfg = build_cfg(fn)
    print(f"\n{fn.name}  reqs={sorted(fn.reqs)}  body_hash={fn.body_hash[:12]}")
    for node in cfg.nodes:
        print(f"  [{node.id}] {node.kind:<9} {node.label}")
    for e in cfg.edges:
        print(f"  {e.src} -{e.label}-> {e.dst}")

print("\ncall sites:", [(s.caller, s.callee) for s in build_call_graph(prog).call_sites])
