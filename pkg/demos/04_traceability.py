"""Link requirements to code through annotations and to tests through traces."""

from abstf import (
    ExpectValue,
    Requirement,
    TestCase,
    build_matrix,
    check_completeness,
    execute_suite,
    parse_program,
)

SOURCE = """
#[req(LOGIN-1)]
fn check_pin(pin) { return pin == 1234; }

#[req(LOCK-1)]
fn lock_after(fails) { return fails >= 3; }

fn helper(x) { return x + 1; }
"""

reqs = [
    Requirement("LOGIN-1", "a correct PIN unlocks the device"),
    Requirement("LOCK-1", "three failures lock the device"),
    Requirement("AUDIT-1", "every attempt is logged"),
]
suite = [
    TestCase("t_pin_ok", "check_pin", (1234,), ExpectValue(1)),
    TestCase("t_helper", "helper", (1,), ExpectValue(2)),
]

prog = parse_program(SOURCE)
results = execute_suite(prog, None, suite)
matrix = build_matrix(reqs, prog, {r.test.name: r.trace for r in results})

print("implements:", sorted(matrix.implements))
print("exercises: ", sorted(matrix.exercises))
print("covers:    ", sorted(matrix.covers))
print()
for f in check_completeness(matrix, reqs, prog, suite):
    print(f"{f.kind:<24} {f.subject:<10} {f.detail}")
