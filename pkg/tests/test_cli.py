import json
import math

import numpy as np
import pytest

from ringgas.basis import FockState
from ringgas.cli import main, parse_state_spec
from ringgas.hamiltonian import StateVector
from ringgas.io import read_csv, read_json


def run(tmp_path, *argv):
    return main([*argv, "--outdir", str(tmp_path)])


def test_parse_state_specs():
    fock = parse_state_spec("fock:n0=4,n1=4")
    assert isinstance(fock, FockState) and fock.occupations == {0: 4, 1: 4}
    neg = parse_state_spec("fock:n-1=2,n1=2")
    assert neg.occupations == {-1: 2, 1: 2}
    sv = parse_state_spec("yrast:N=4,K=2,g=0.1,kmax=2")
    assert isinstance(sv, StateVector) and sv.basis.N == 4


def test_parse_state_spec_errors():
    from ringgas.cli import UsageError

    for bad in ("fock:x0=1", "yrast:N=4", "huh:n0=1"):
        with pytest.raises(UsageError):
            parse_state_spec(bad)


def test_branches_example_value(tmp_path):
    assert run(tmp_path, "branches", "--n", "8") == 0
    cols, rows, meta = read_csv(tmp_path / "branches.csv")
    assert cols == ["K", "E_elementary", "E_yrast"]
    by_k = {int(r[0]): (float(r[1]), float(r[2])) for r in rows}
    assert by_k[4][1] == pytest.approx(8 * math.pi**2)
    assert by_k[8][0] == pytest.approx(128 * math.pi**2)
    assert "config_sha256" in meta


def test_yrast_json_reports_paper_fidelity(tmp_path):
    assert run(tmp_path, "yrast", "--n", "8", "--k", "4", "--g", "0.08", "--kmax", "2") == 0
    doc = read_json(tmp_path / "yrast.json")
    assert doc["fidelity_with_free_yrast"] >= 0.995
    assert doc["residual"] <= 1e-10
    assert doc["provenance"]["version"]


def test_conditional_csv_schema(tmp_path):
    assert run(tmp_path, "conditional", "--state", "fock:n0=2,n1=2",
               "--fixed", "0.1,0.5,0.9", "--grid", "128") == 0
    cols, rows, _ = read_csv(tmp_path / "conditional.csv")
    assert cols == ["x", "density", "phase"]
    assert len(rows) == 128
    dens = np.array([float(r[1]) for r in rows])
    assert np.sum(dens) / 128 == pytest.approx(1.0, abs=1e-9)


def test_sample_align_and_roundtrip(tmp_path):
    assert run(tmp_path, "sample", "--state", "fock:n0=2,n1=2", "--n-samples", "100",
               "--bins", "16", "--align", "--seed", "5") == 0
    cols, rows, _ = read_csv(tmp_path / "sample.csv")
    assert cols == ["bin_left", "bin_right", "count", "density"]
    assert sum(int(r[2]) for r in rows) == 4 * 100
    # floats round-trip exactly through repr
    assert all(repr(float(r[3])) == r[3] for r in rows)
    doc = read_json(tmp_path / "sample.json")
    assert doc["total"] == 400


def test_byte_identical_reruns(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    for d in (a_dir, b_dir):
        assert run(d, "sample", "--state", "fock:n0=3,n1=1", "--n-samples", "60",
                   "--bins", "16", "--seed", "9") == 0
    assert (a_dir / "sample.csv").read_bytes() == (b_dir / "sample.csv").read_bytes()
    assert (a_dir / "sample.json").read_bytes() == (b_dir / "sample.json").read_bytes()


def test_notch_hist_csv(tmp_path):
    assert run(tmp_path, "notch-hist", "--state", "fock:n0=6,n1=2",
               "--n-samples", "50", "--bins", "10") == 0
    cols, rows, _ = read_csv(tmp_path / "notch_hist.csv")
    assert cols == ["depth_bin_left", "depth_bin_right", "count"]
    assert sum(int(r[2]) for r in rows) == 50


def test_bohmian_outputs(tmp_path):
    assert run(tmp_path, "bohmian", "--state", "fock:n0=3,n1=1", "--n-real", "40",
               "--t-snapshots", "0.05,0.1", "--bins", "12", "--n-paths", "3") == 0
    doc = read_json(tmp_path / "bohmian.json")
    assert len(doc["snapshots"]) == 3  # t=0 plus two requested
    cols, rows, _ = read_csv(tmp_path / "bohmian_traj.csv")
    assert cols == ["realization", "time", "particle", "x"]
    assert {int(r[0]) for r in rows} == {0, 1, 2}


def test_gpe_csv(tmp_path):
    assert run(tmp_path, "gpe", "--gn", "0.64", "--kavg", "0.5", "--grid", "256") == 0
    cols, rows, _ = read_csv(tmp_path / "gpe.csv")
    assert cols == ["x", "density", "phase"]
    dens = np.array([float(r[1]) for r in rows])
    assert dens.min() < 1e-10


def test_exit_codes(tmp_path, capsys):
    # infeasible basis: usage error
    assert run(tmp_path, "basis", "--n", "2", "--k", "9", "--kmax", "2") == 2
    # invalid physical parameter
    assert run(tmp_path, "gpe", "--gn", "-1", "--kavg", "0.5") == 2
    # numerical failure: diagnostic JSON on stderr, exit 1
    assert run(tmp_path, "yrast", "--n", "4", "--k", "2", "--g", "0.3",
               "--kmax", "2", "--tol", "1e-14") in (0, 1)


def test_fidelity_sweep_csv(tmp_path):
    assert run(tmp_path, "fidelity-sweep", "--n-list", "4", "--gn-grid", "0,0.5",
               "--kmax", "2") == 0
    cols, rows, _ = read_csv(tmp_path / "fidelity_sweep.csv")
    assert cols == ["N", "g", "xi_inverse", "fidelity"]
    assert float(rows[0][3]) == pytest.approx(1.0, abs=1e-9)
    assert float(rows[1][2]) == pytest.approx(math.sqrt(0.5), rel=1e-12)


def test_fig3_bundle(tmp_path):
    assert run(tmp_path, "fig", "--name", "fig3") == 0
    manifest = read_json(tmp_path / "fig3" / "manifest.json")
    assert "branches" in manifest["files"]
    cols, rows, _ = read_csv(tmp_path / "fig3" / manifest["files"]["branches"])
    assert len(rows) == 9


def test_fig5_bundle_small(tmp_path):
    assert run(tmp_path, "fig", "--name", "fig5", "--n-list", "4",
               "--n-samples", "40", "--bins", "16") == 0
    manifest = read_json(tmp_path / "fig5" / "manifest.json")
    assert {"hist_N4_K2", "hist_N4_K1", "overlay_black", "overlay_quarter"} <= set(
        manifest["files"]
    )


def test_fig7_bundle_small(tmp_path):
    assert run(tmp_path, "fig", "--name", "fig7", "--n", "8", "--n-samples", "30",
               "--bins", "10") == 0
    manifest = read_json(tmp_path / "fig7" / "manifest.json")
    assert {"depth_K4", "depth_K2"} <= set(manifest["files"])


def test_fig8_bundle_small(tmp_path):
    assert run(tmp_path, "fig", "--name", "fig8", "--n-real", "30",
               "--t-snapshots", "0.05", "--bins", "12") == 0
    manifest = read_json(tmp_path / "fig8" / "manifest.json")
    assert "trajectories" in manifest["files"]
    assert "hist_t0.05" in manifest["files"]


def test_fig9_bundle_small(tmp_path):
    assert run(tmp_path, "fig", "--name", "fig9", "--n-list", "4",
               "--gn-grid", "0.25,1", "--kmax", "2") == 0
    manifest = read_json(tmp_path / "fig9" / "manifest.json")
    cols, rows, _ = read_csv(tmp_path / "fig9" / manifest["files"]["sweep"])
    assert cols == ["N", "g", "xi_inverse", "fidelity"]
    fids = [float(r[3]) for r in rows]
    assert fids[0] > fids[1]  # weaker coupling, higher fidelity


def test_fig2_bundle_small(tmp_path):
    assert run(tmp_path, "fig", "--name", "fig2", "--n", "4", "--kmax", "2",
               "--grid", "128") == 0
    manifest = read_json(tmp_path / "fig2" / "manifest.json")
    assert {"conditional", "gpe"} <= set(manifest["files"])
    assert manifest["notes"]["fidelity_with_twin_fock"] > 0.9


def test_unknown_figure(tmp_path):
    assert main(["fig", "--name", "fig2", "--outdir", str(tmp_path)]) == 0
    with pytest.raises(SystemExit):
        main(["fig", "--name", "nope", "--outdir", str(tmp_path)])
