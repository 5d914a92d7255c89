import json

import pytest

from g2wall.cli import EXIT_FAIL, EXIT_INVALID, EXIT_OK, main


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_phi_eval(capsys, fixtures):
    rc, out, _ = run(capsys, "phi", "eval", "--catalog", fixtures / "single_record.json", "--cutoff", "3")
    assert rc == EXIT_OK and out.strip() == "q^1"


def test_phi_gw_json(capsys, fixtures):
    rc, out, _ = run(capsys, "phi", "gw", "--gw", fixtures / "gw_fixture.json", "--cutoff", "4", "--json")
    assert rc == EXIT_OK
    data = json.loads(out)
    assert data["n"] == 2 and len(data["gw"]) == 3


def test_phi_crit_obstructed(capsys, fixtures):
    rc, out, _ = run(capsys, "phi", "crit", "--gw", fixtures / "gw_single.json", "--cutoff", "5")
    assert rc == EXIT_OK and out.startswith("Obstructed at level 1")


def test_transition_b_pass_and_corrupt(capsys, fixtures):
    base = ["transition", "apply", "--kind", "B", "--catalog", fixtures / "minimal_b.json", "--verify",
            "--cutoff", "3"]
    rc, out, _ = run(capsys, *base, "--params", fixtures / "params_b.json")
    assert rc == EXIT_OK and out.startswith("PASS")
    rc, out, _ = run(capsys, *base, "--params", fixtures / "params_b_corrupt.json")
    assert rc == EXIT_FAIL and out.startswith("FAIL")


def test_transition_d_and_x(capsys, fixtures):
    rc, out, _ = run(capsys, "transition", "apply", "--kind", "D", "--catalog", fixtures / "minimal_d.json",
                     "--params", fixtures / "params_d.json", "--verify", "--cutoff", "5")
    assert rc == EXIT_OK and out.startswith("PASS")
    rc, out, _ = run(capsys, "transition", "apply", "--kind", "X", "--catalog", fixtures / "leaf.json",
                     "--params", fixtures / "params_x.json", "--verify", "--cutoff", "5/2")
    assert rc == EXIT_OK and out.strip() == "PASS: dPhi = 0 mod q^5/2"


def test_transition_out_file(capsys, fixtures, tmp_path):
    out_file = tmp_path / "after.json"
    rc, _, _ = run(capsys, "transition", "apply", "--kind", "B", "--catalog", fixtures / "minimal_b.json",
                   "--params", fixtures / "params_b.json", "--out", out_file)
    assert rc == EXIT_OK
    rc, _, _ = run(capsys, "phi", "eval", "--catalog", out_file, "--cutoff", "2")
    assert rc == EXIT_OK


def test_qcoh_compute(capsys, fixtures):
    rc, out, _ = run(capsys, "qcoh", "compute", "--ring", fixtures / "ring_2s3s4.json",
                     "--gw", fixtures / "gw_fixture.json", "--cutoff", "4")
    assert rc == EXIT_OK
    assert "QH^3 rank 1" in out and "torsion q^2" in out


def test_cone_smoothing_command(capsys, fixtures):
    rc, out, _ = run(capsys, "topo", "prop51", "--input", fixtures / "cone_smoothing.json")
    assert rc == EXIT_OK and "PASS" in out


def test_lawlor_commands(capsys):
    rc, out, _ = run(capsys, "lawlor", "angles", "--a", 1, 1, 1, "--json")
    data = json.loads(out)
    assert rc == EXIT_OK and abs(data["s"] - 1 / 3) < 1e-12
    rc, out, _ = run(capsys, "lawlor", "invert", "--phi", data["phi"][0], data["phi"][1], "--s", data["s"],
                     "--json")
    assert rc == EXIT_OK
    assert max(abs(x - 1) for x in json.loads(out)["a"]) < 1e-6
    rc, _, _ = run(capsys, "lawlor", "angles", "--a", 1, -1, 1)
    assert rc == EXIT_INVALID


def test_hl_and_u1(capsys):
    rc, out, _ = run(capsys, "hl", "check", "--family", 2, "--samples", 10)
    assert rc == EXIT_OK and "PASS" in out
    rc, out, _ = run(capsys, "u1", "jcheck", "--samples", 50, "--json")
    assert rc == EXIT_OK and json.loads(out)["pass"]


def test_tameness(capsys, fixtures):
    rc, _, _ = run(capsys, "g2", "check-tame", "--phi", fixtures / "phi0.json", "--psi",
                   fixtures / "star_phi0.json", "--samples", 100)
    assert rc == EXIT_OK
    rc, _, _ = run(capsys, "g2", "check-tame", "--phi", fixtures / "neg_phi0.json", "--psi",
                   fixtures / "star_phi0.json", "--samples", 100)
    assert rc == EXIT_FAIL


def test_same_seed_same_output(capsys):
    outs = [run(capsys, "u1", "jcheck", "--samples", 20, "--seed", 7, "--json")[1] for _ in range(2)]
    assert outs[0] == outs[1]


@pytest.mark.parametrize("argv", [
    ["phi", "eval", "--catalog", "bad.json", "--cutoff", "3"],
    ["phi", "eval", "--catalog", "single_record.json", "--cutoff", "x/y"],
    ["phi", "eval", "--catalog", "single_record.json"],
    ["phi", "eval", "--catalog", "missing.json", "--cutoff", "3"],
    ["hl", "check", "--family", "4"],
    ["u1", "jcheck", "--seed", "-1"],
    ["nonsense"],
])
def test_invalid_input_exits_1(capsys, fixtures, argv):
    argv = [str(fixtures / a) if a.endswith(".json") else a for a in argv]
    rc, _, err = run(capsys, *argv)
    assert rc == EXIT_INVALID
    assert err


def test_malformed_json_reports_location(capsys, fixtures):
    _, _, err = run(capsys, "phi", "eval", "--catalog", fixtures / "bad.json", "--cutoff", "3")
    assert "line" in err and "column" in err
