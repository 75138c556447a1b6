"""End-to-end checks of the hypmin command line tool and its report schema."""

import csv
import io
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

BIN = sys.argv[1]
SCHEMA = json.loads(Path(sys.argv[2]).read_text())
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)
failures = []


def run(*args, expect=0):
    p = subprocess.run([BIN, *args], capture_output=True, text=True)
    if (p.returncode == 0) if expect is None else (p.returncode != expect):
        failures.append(f"{' '.join(args)}: exit {p.returncode}, wanted {expect}\n{p.stderr[-2000:]}")
    return p


def check(cond, what):
    if not cond:
        failures.append(what)


def report(*args, expect=0):
    p = run(*args, expect=expect)
    try:
        rep = json.loads(p.stdout)
    except json.JSONDecodeError:
        failures.append(f"{' '.join(args)}: stdout is not JSON")
        return {}
    errors = [e.message for e in VALIDATOR.iter_errors(rep)]
    check(not errors, f"{' '.join(args)}: schema violations {errors[:3]}")
    return rep


mesh = json.loads(run("mesh-info", "--genus", "2", "--resolution", "2").stdout)
check(mesh["euler_characteristic"] == -2 and mesh["vertices"] == 62, "mesh-info summary")

basis = json.loads(run("basis", "--resolution", "4", "--m", "2", "--n", "1", "--l", "1", "--expected", "4").stdout)
check(basis["dimension"] == 4 and basis["gap_ratio"] >= 10, "basis K2L dimension")

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    out = tmp / "zero"
    rep = report("verify", "--target", "rh3", "--l", "0", "--data", "zero", "--resolution", "3",
                 "--output-dir", str(out))
    check(rep.get("passed") is True, "rh3 zero run passes")
    check(rep.get("moduli", {}).get("verdict") == "Polystable", "rh3 zero verdict")
    check(json.loads((out / "report.json").read_text()) == rep, "report.json matches stdout")
    with open(out / "fields.csv") as f:
        rows = list(csv.reader(f))
    check(rows[0] == ["vertex", "x", "y", "u", "w", "kappa_gamma", "kappa_perp", "ii_norm_sq", "u4_norm_sq"],
          "fields.csv header")
    check(len(rows) == 1 + rep["mesh"]["vertices"], "fields.csv rows")

    cfg = tmp / "config.json"
    cfg.write_text(json.dumps({"genus": 2, "resolution": 3, "target": "rh3", "l": 0,
                               "data": {"kind": "manufactured", "u_star": 0.1}, "seed": 11}))
    rep = report("solve", "--config", str(cfg), "--resolution", "4", "--no-fields")
    check(rep["config_echo"]["resolution"] == 4, "flag overrides config")
    check(rep["config_echo"]["seed"] == 11, "config value kept")
    check("mms_error" in rep and rep.get("passed") is True, "manufactured solve")

    rep = report("invariants", "--config", str(cfg))
    check("invariants" in rep and "moduli" not in rep, "invariants stage stops before higgs")

    rep = report("verify", "--target", "rh3", "--l", "0", "--data", "basis_element", "--index", "9",
                 "--resolution", "4", expect=2)
    check(rep.get("failed_at", {}).get("stage") == "data", "failed_at names the stage")

    rep = report("verify", "--target", "rh4", "--l", "3", expect=2)
    check(rep.get("failed_at", {}).get("kind") == "invalid-parameter", "out-of-range l refused")

    p = run("solve", "--config", str(tmp / "missing.json"), expect=2)
    check(json.loads(p.stderr).get("kind") == "format", "missing config reported as format error")

    p = run("sweep", "--target", "rh3", "--l", "0", "--data", "basis_element", "--resolution", "4",
            "--axis", "amplitude", "--values", "0,0.5,1", "--output-dir", str(tmp / "sweep"))
    rows = list(csv.DictReader(io.StringIO(p.stdout)))
    areas = [float(r["area"]) for r in rows]
    check(len(rows) == 3 and all(r["status"] == "ok" for r in rows), "sweep rows ok")
    check(all(a > b for a, b in zip(areas, areas[1:])), "sweep area decreases")
    check((tmp / "sweep" / "sweep.csv").exists(), "sweep.csv written")
    for sub in sorted((tmp / "sweep").glob("amplitude_*")):
        errors = list(VALIDATOR.iter_errors(json.loads((sub / "report.json").read_text())))
        check(not errors, f"{sub.name} report schema")

c = json.loads(run("classify", "--genus", "2", "--n", "4", "--l", "1", "--beta2").stdout)
check(c["verdict"] == "Stable" and c["dims"]["fiber_dim"] == 10 and c["secant"]["generic_ok"], "classify l=1")
c = json.loads(run("classify", "--genus", "2", "--n", "4", "--l", "2", "--beta1", "--beta2").stdout)
check(c["verdict"] == "OutOfRange", "classify out of range")
run("frobnicate", expect=None)

for f in failures:
    print("FAIL:", f)
print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
