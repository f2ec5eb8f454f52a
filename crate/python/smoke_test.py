#!/usr/bin/env python3
"""Smoke test for the mechquot extension module.

Builds nothing itself: expects `cargo build -p mechquot-python` (or
--release) to have produced libmechquot.so, which it stages under a temp
directory as an importable module.
"""

import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libmechquot.so", "libmechquot.dylib", "mechquot.dll")
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p mechquot-python")
    stage = Path(tempfile.mkdtemp(prefix="mechquot-py-"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, stage / f"mechquot{suffix}")
    sys.path.insert(0, str(stage))


stage_module()

import mechquot  # noqa: E402


def check(cond, what):
    if not cond:
        sys.exit(f"FAIL: {what}")
    print(f"ok: {what}")


sys_file = mechquot.System.load(str(ROOT / "fixtures" / "body.toml"))
check(sys_file.dim == 3, "system dimension is 3")
check(sys_file.base_coords == ["x1", "x2", "x3"], "base chart")
check("d3" in sys_file.distributions, "distribution names")

acc = sys_file.check_accessibility()
check(acc["sym_rank_generic"] == 2, "Sym rank 2")
check(not acc["geodesically_accessible"], "rank 2 < 3: not accessible")

quot = sys_file.check_quotient("d3")
check(quot["overall"] and quot["routes_agree"], "quotient conditions hold, routes agree")

built = sys_file.build_quotient("d3")
check(built["kept_coordinates"] == ["x1", "x2"], "kept coordinates")
check(built["struck_coordinates"] == ["x3"], "struck coordinate")
reduced = mechquot.System.parse(built["file"])
check(reduced.dim == 2, "emitted quotient reparses to a 2-dim system")
racc = reduced.check_accessibility()
check(
    racc["sym_rank_at_point"] == 1 and not racc["geodesically_accessible"],
    "quotient's single input stays Sym rank 1",
)

comm = sys_file.check_commutation("project-to-velocity")
check(comm["pass"] and comm["residual"] <= 1e-6, f"commutation residual {comm['residual']:.3e}")
check(len(comm["times"]) == comm["steps"] + 1, "trajectory covers every step")

traj = sys_file.simulate("free-motion")
check(traj["coords"][0] == "x1" and len(traj["states"][0]) == 6, "lifted flow has 6 states")
csv = sys_file.simulate_csv("free-motion")
check(csv.splitlines()[0] == "t,x1,x2,x3,y1,y2,y3", "CSV header")

idents = sys_file.verify_identities(seed=42)
check(idents["all_identities_hold"], "bracket identities hold")
check(len(idents["tallies"]) == 6, "six identities tallied")

e = mechquot.parse_expr("(x1 + x2)^2", ["x1", "x2"])
d = e.differentiate("x1")
expect = mechquot.parse_expr("2*x1 + 2*x2", ["x1", "x2"])
check(d.equivalent(expect), "d/dx1 (x1+x2)^2 = 2x1 + 2x2")
check((e - e).is_zero(), "e - e is zero")
check(e.eval({"x1": "1/2", "x2": "1/3"}) == "25/36", "exact evaluation")

gamma = sys_file.gamma(2, 2, 2)
check(str(gamma) == "1", "Christoffel entry round-trips")

bad = False
try:
    mechquot.parse_expr("x1 +", ["x1"])
except ValueError:
    bad = True
check(bad, "syntax errors raise ValueError")

print("smoke test passed")
