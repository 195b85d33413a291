#!/usr/bin/env python3
"""End-to-end checks of the overlinkd command line.

Usage: cli_contract.py <overlinkd binary> <source dir>

Every JSON document the tool writes is validated against schemas/.
"""

import json
import math
import pathlib
import subprocess
import sys
import tempfile

from jsonschema import Draft202012Validator

CLI = str(pathlib.Path(sys.argv[1]).resolve())
SRC = pathlib.Path(sys.argv[2]).resolve()
DATA = SRC / "data"
SCHEMAS = SRC / "schemas"

failures = []
passes = 0


def check(cond, what):
    global passes
    if cond:
        passes += 1
        print(f"ok    {what}")
    else:
        failures.append(what)
        print(f"FAIL  {what}")


def run(*args, timeout=900):
    p = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=timeout)
    return p.returncode, p.stdout, p.stderr


_validators = {}


def validate(kind, path):
    if kind not in _validators:
        schema = json.loads((SCHEMAS / f"{kind}.schema.json").read_text())
        Draft202012Validator.check_schema(schema)
        _validators[kind] = Draft202012Validator(schema)
    doc = json.loads(pathlib.Path(path).read_text())
    errors = [f"{'/'.join(map(str, e.path))}: {e.message[:160]}" for e in _validators[kind].iter_errors(doc)]
    check(not errors, f"{pathlib.Path(path).name} matches {kind} schema {errors[:2] if errors else ''}")
    return doc


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def parse_obj(path):
    verts, faces, groups, lines = [], [], [], []
    for raw in pathlib.Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts or parts[0] == "#":
            continue
        if parts[0] == "v":
            verts.append(tuple(float(x) for x in parts[1:4]))
        elif parts[0] == "f":
            faces.append(tuple(int(x.split("/")[0]) for x in parts[1:]))
        elif parts[0] == "g":
            groups.append(parts[1])
        elif parts[0] == "l":
            lines.append(tuple(int(x) for x in parts[1:]))
    return verts, faces, groups, lines


def rotated_curve(src, dst, angle):
    doc = json.loads(src.read_text())
    c, s = math.cos(angle), math.sin(angle)
    doc["points"] = [[c * x - s * y, s * x + c * y, z] for x, y, z in doc["points"]]
    return write_json(dst, doc)


def scaled_load(src, dst, factor):
    doc = json.loads(src.read_text())
    for ph in doc["phases"]:
        for key in ("force", "moment"):
            if key in ph:
                ph[key] = [factor * v for v in ph[key]]
    return write_json(dst, doc)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        exit_codes(tmp)
        metric(tmp)
        geometry_paths = geomopt(tmp)
        check_command(tmp, geometry_paths)
        simulate(tmp)
        trace = synth(tmp)
        export(tmp, geometry_paths, trace)
    print(f"\n{passes} passed, {len(failures)} failed")
    for f in failures:
        print(f"  failed: {f}")
    return 1 if failures else 0


def exit_codes(tmp):
    missing = tmp / "does_not_exist.json"
    code, _, err = run("metric", missing, DATA / "nh_target.json")
    check(code == 2, "missing input file exits 2")
    check(str(missing) in err, "missing input file is named on stderr")

    bad = tmp / "bad.json"
    bad.write_text("{ not json")
    code, _, err = run("synth", bad)
    check(code == 2 and "bad.json" in err, "malformed JSON exits 2 and names the file")

    code, _, err = run("synth", DATA / "nh_target.json")
    check(code == 2 and "curve" in err, "problem without a curve exits 2 and names the field")

    code, _, _ = run("geomopt", DATA / "bennett_benchmark.json", "--frames", "abc")
    check(code == 2, "unparsable option exits 2")

    inches = json.loads((DATA / "nh_target.json").read_text())
    inches["units"]["length"] = "in"
    code, _, err = run("metric", write_json(tmp / "inches.json", inches), DATA / "nh_target.json")
    check(code == 2 and "mm" in err, "non-millimetre units are rejected")

    code, _, _ = run("geomopt", DATA / "bennett_benchmark.json", "--candidates", "0",
                     "-o", tmp / "g0.json", "--report", tmp / "r0.json")
    check(code == 2, "zero Hermite candidates is an input error")

    # A single candidate cannot satisfy the Bennett length window: the run
    # reports the failure and exits with the infeasible code.
    code, _, err = run("geomopt", DATA / "bennett_benchmark.json", "--candidates", "1",
                       "-o", tmp / "g1.json", "--report", tmp / "r1.json")
    check(code == 3, "single-candidate geomopt exits 3")
    rep = validate("report", tmp / "r1.json")
    check(not rep["verified"] and rep["worst_residual"] != "", "infeasible report names the worst residual")
    check(json.loads(err)["worst_residual"] == rep["worst_residual"], "infeasible summary goes to stderr")

    code, out, _ = run("--version")
    check(code == 0 and "0.1.0" in out, "--version prints the version")


def metric(tmp):
    target = DATA / "nh_target.json"
    out = tmp / "m_same.json"
    code, _, _ = run("metric", target, target, "-o", out)
    m = validate("metric", out)
    check(code == 0 and m["similarity"] == 0 and m["hausdorff"] == 0 and m["nh"] == 0,
          "identical curves give zero similarity, Hausdorff and NH")

    code, out, _ = run("metric", target, DATA / "nh_captured.json")
    m = json.loads(out)
    check(code == 0 and abs(m["nh"] - 0.0699) < 1e-4, f"lifted-corner fixture NH 0.0699 (got {m['nh']:.6f})")
    check(abs(m["hausdorff"] - 22.5) < 1e-9 and abs(m["diagonal"] - 321.6) < 1e-9, "fixture Hausdorff 22.5 over 321.6")

    rot = rotated_curve(target, tmp / "rotated.json", 0.7)
    code, out, _ = run("metric", target, rot)
    m = json.loads(out)
    check(code == 0 and m["similarity"] < 1e-9, f"rotated copy has zero similarity (got {m['similarity']:.3g})")
    check(m["nh"] > 0.05, "rotated copy has non-zero NH")


def geomopt(tmp):
    paths = {}
    for name in ("bennett", "planar", "spherical"):
        g, r = tmp / f"g_{name}.json", tmp / f"r_{name}.json"
        code, out, _ = run("geomopt", DATA / f"{name}_benchmark.json", "-o", g, "--report", r)
        rep = validate("report", r)
        validate("geometry", g)
        check(code == 0 and rep["verified"], f"geomopt {name} is verified")
        check(rep["min_clearance"] is not None and rep["min_clearance"] >= -0.01,
              f"geomopt {name} min clearance {rep['min_clearance']} >= -0.01")
        check(rep["solver"]["total_iterations"] <= 1500 * rep["solver"]["solves"], f"geomopt {name} iteration cap")
        check(json.loads(out)["verified"], f"geomopt {name} summary on stdout")
        paths[name] = g

    g2, r2 = tmp / "g_again.json", tmp / "r_again.json"
    run("geomopt", DATA / "bennett_benchmark.json", "-o", g2, "--report", r2, "--threads", "1")
    check(g2.read_bytes() == paths["bennett"].read_bytes(), "geomopt geometry is byte-identical on rerun")
    check(r2.read_bytes() == (tmp / "r_bennett.json").read_bytes(), "geomopt report is byte-identical on rerun")
    return paths


def check_command(tmp, paths):
    for name, g in paths.items():
        rep_path = tmp / f"c_{name}.json"
        code, out, _ = run("check", g, "--report", rep_path)
        rep = validate("report", rep_path)
        check(code == 0 and rep["verified"] and json.loads(out)["verified"], f"check accepts the {name} geometry")

    # Fattening every link until they touch must fail the clearance check.
    doc = json.loads(paths["bennett"].read_text())
    for link in doc["links"]:
        link["radius"] = 40.0
    fat = write_json(tmp / "fat.json", doc)
    code, _, _ = run("check", fat, "--report", tmp / "c_fat.json")
    rep = validate("report", tmp / "c_fat.json")
    check(code == 3 and not rep["clear"] and rep["min_clearance"] < 0, "check rejects overlapping links with exit 3")

    mech_less = json.loads(paths["planar"].read_text())
    del mech_less["mechanism"]
    bare = write_json(tmp / "bare.json", mech_less)
    code, _, _ = run("check", bare)
    check(code == 2, "geometry without a mechanism needs --design")
    code, _, _ = run("check", bare, "--design", DATA / "planar_benchmark.json")
    check(code == 0, "check accepts --design for a bare geometry")


def simulate(tmp):
    design = DATA / "sample_design.json"
    csv_path, summ = tmp / "zero.csv", tmp / "zero_summary.json"
    code, _, _ = run("simulate", design, DATA / "zero_load.json", "-o", csv_path, "--summary", summ)
    s = validate("simulate", summ)
    rows = [line.split(",") for line in csv_path.read_text().splitlines()]
    header, body = rows[0], rows[1:]
    check(header == ["t", "q", "tau", "power", "energy", "singular"], "dynamics CSV columns")
    tau = [float(r[header.index("tau")]) for r in body]
    check(code == 0 and all(t == 0 for t in tau) and s["cycle_energy"] == 0 and s["max_torque"] == 0,
          "zero load gives zero torque and energy")
    check(len(body) == 120, "dynamics CSV has one row per sample")

    code, _, _ = run("simulate", design, DATA / "load_5N.json", "-o", tmp / "c.csv", "--summary", tmp / "cot.json",
                     "--energy", "65.99", "--mass", "2.3", "--distance", "0.9")
    s = validate("simulate", tmp / "cot.json")
    check(code == 0 and abs(s["cot"]["value"] - 3.25) <= 0.01, f"cost of transport 3.25 (got {s['cot']['value']:.4f})")
    check(s["cot"]["energy_source"] == "given", "cost of transport uses the given energy")

    run("simulate", design, DATA / "stance_load.json", "-o", tmp / "a.csv", "--summary", tmp / "one.json")
    double = scaled_load(DATA / "stance_load.json", tmp / "double_load.json", 2.0)
    run("simulate", design, double, "-o", tmp / "b.csv", "--summary", tmp / "two.json")
    e1 = json.loads((tmp / "one.json").read_text())["cycle_energy"]
    e2 = json.loads((tmp / "two.json").read_text())["cycle_energy"]
    check(e1 > 0 and abs(e2 - 2 * e1) <= 1e-9 * e2, f"doubling the wrench doubles the energy ({e1:.6g} -> {e2:.6g})")

    code, _, _ = run("simulate", design, DATA / "stance_load.json", "-o", tmp / "a2.csv")
    check((tmp / "a2.csv").read_bytes() == (tmp / "a.csv").read_bytes(), "dynamics CSV is byte-identical on rerun")


def synth(tmp):
    problem = DATA / "recovery_problem.json"
    res, trace = tmp / "res.json", tmp / "trace.csv"
    code, out, _ = run("synth", problem, "--seed", "1", "--budget", "200", "-o", res, "--trace", trace, timeout=1200)
    r = validate("result", res)
    check(code == 0 and r["feasible"], "recovery synthesis is feasible")
    check(r["similarity"] <= 0.02, f"recovery similarity {r['similarity']:.4f} <= 0.02")
    check(r["nh"] <= 0.10, f"recovery NH {r['nh']:.4f} <= 0.10")
    header = trace.read_text().splitlines()[0].split(",")
    check(header == ["t", "q", "theta2", "ee_x", "ee_y", "ee_z"], "trace CSV columns")

    code, _, _ = run("simulate", res, DATA / "load_5N.json", "-o", tmp / "res.csv")
    check(code == 0, "simulate accepts a synth result as the design")
    code, _, _ = run("geomopt", res, "-o", tmp / "g_res.json", "--report", tmp / "r_res.json")
    validate("report", tmp / "r_res.json")
    check(code in (0, 3), "geomopt accepts a synth result as the design")

    # The provenance block records the output paths, so each rerun writes the
    # same relative names inside its own directory.
    def rerun(sub, seed, *extra):
        d = tmp / sub
        d.mkdir()
        subprocess.run([CLI, "synth", str(problem), "--seed", str(seed), "--budget", "15", "-o", "det.json",
                        "--trace", "det.csv", *extra], cwd=d, capture_output=True, timeout=900)
        return (d / "det.json").read_bytes(), (d / "det.csv").read_bytes()

    a = rerun("det_a", 5)
    b = rerun("det_b", 5, "--threads", "1")
    check(a[0] == b[0], "synth result is byte-identical for a repeated seed")
    check(a[1] == b[1], "synth trace is byte-identical for a repeated seed")
    c = rerun("det_c", 6)
    check(c[0] != a[0], "a different seed gives a different result")
    return trace


def export(tmp, paths, trace):
    for name, g in paths.items():
        obj = tmp / f"{name}.obj"
        code, out, _ = run("export", g, "--obj", obj)
        summ = json.loads(out)
        write_json(tmp / f"x_{name}.json", summ)
        validate("export", tmp / f"x_{name}.json")
        geo = json.loads(g.read_text())
        expected = sum(16 * len(link["particles"]) + 34 for link in geo["links"])
        verts, faces, groups, _ = parse_obj(obj)
        check(code == 0 and len(verts) == expected == summ["vertices"],
              f"{name} mesh has sum(16m+34) = {expected} vertices (got {len(verts)})")
        check(len(faces) == summ["faces"] and all(len(f) == 3 and all(1 <= i <= len(verts) for i in f) for f in faces),
              f"{name} mesh faces are valid 1-based triangles")
        check(len(groups) == len(geo["links"]), f"{name} mesh has one group per link")
        radius = max(link["radius"] for link in geo["links"])
        far = max(min(math.dist(v, p) for link in geo["links"] for p in link["particles"]) for v in verts[::7])
        check(far <= radius + 1e-9, f"{name} mesh vertices lie within one radius of the particles")

    obj = tmp / "with_path.obj"
    code, out, _ = run("export", paths["bennett"], trace, "--obj", obj)
    summ = json.loads(out)
    path_obj = pathlib.Path(summ["path_obj"])
    verts, _, _, lines = parse_obj(path_obj)
    rows = trace.read_text().splitlines()[1:]
    check(code == 0 and len(verts) == len(rows) == summ["path_points"], "trace exported as a polyline with one vertex per row")
    # The trace repeats its first pose at t = T, so the polyline closes on itself.
    check(len(lines) == 1 and len(lines[0]) == len(verts), "trace polyline visits every vertex once")
    check(math.dist(verts[0], verts[-1]) <= 1e-9, "trace polyline is closed")
    first = [float(x) for x in rows[0].split(",")[3:6]]
    check(verts[0] == tuple(first), "polyline vertices round-trip the trace exactly")

    again = tmp / "with_path_again.obj"
    run("export", paths["bennett"], trace, "--obj", again)
    check(again.read_bytes() == obj.read_bytes(), "OBJ export is byte-identical on rerun")


if __name__ == "__main__":
    sys.exit(main())
