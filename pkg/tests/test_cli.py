"""End-to-end CLI behavior: exit codes, output files, determinism."""

import json

import numpy as np
import pytest

import fiberdyn as fd
import fiberdyn.serialize as ser
from fiberdyn.cli import main
from support import rand_unitary

EX1 = """
[space]
atoms = 2

[experiment]
id = "example1"
betas = [0.0, 1.0]

[run]
n_grid = [1, 2, 5, 10, 20, 50]
seed = 3
"""

EX2 = """
[space]
atoms = 2

[experiment]
id = "example2"
alphas = [0.6180339887498949, 0.5]
degree_budget = 8

[run]
n_grid = [1, 2, 5, 10, 20, 50]
seed = 3
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def doubly_stochastic_bundle(space, seed=0):
    rng = np.random.default_rng(seed)
    ops = []
    for _ in space.atoms:
        u, v = rand_unitary(rng, 2), rand_unitary(rng, 2)
        ops.append([u / np.sqrt(2), v / np.sqrt(2)])
    return fd.MarkovBundle.from_kraus(space, ops)


@pytest.fixture
def custom_files(tmp_path):
    sp = fd.AtomicMeasureSpace.uniform(2)
    mb = doubly_stochastic_bundle(sp)
    phi = fd.StateBundle.canonical_trace(sp, 2)
    write(tmp_path, "state.json", ser.dumps(phi))
    write(tmp_path, "markov.json", ser.dumps(mb))
    cfg = """
[experiment]
id = "custom"
state_file = "state.json"
markov_file = "markov.json"

[run]
n_grid = [1, 2, 5, 10]
"""
    return write(tmp_path, "custom.toml", cfg)


def test_run_example1(tmp_path, capsys):
    cfg = write(tmp_path, "ex1.toml", EX1)
    rc = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 0
    for name in ("convergence.csv", "observable.json", "summary.txt"):
        assert (tmp_path / "o" / name).exists()
    summary = (tmp_path / "o" / "summary.txt").read_text()
    assert summary.rstrip().endswith("# result = PASS")
    assert "PASS monotone_decay" in summary
    assert "PASS side_condition" in summary
    assert "PASS gap_prediction" in summary


def test_run_example2_reports_non_ue(tmp_path):
    cfg = write(tmp_path, "ex2.toml", EX2)
    rc = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 0
    summary = (tmp_path / "o" / "summary.txt").read_text()
    assert "# result = PASS" in summary
    assert "INFO sup_trend" in summary          # no monotone gate here
    assert "PASS mode_coefficient_match" in summary
    assert "PASS deviation_bound" in summary
    assert "uniquely_ergodic" in summary
    assert "no" in summary.lower()              # the rational atom says no


def test_run_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path, "ex2.toml", EX2)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    for name in ("convergence.csv", "observable.json", "summary.txt"):
        ba = (tmp_path / "a" / name).read_bytes()
        bb = (tmp_path / "b" / name).read_bytes()
        assert ba == bb, name


def test_csv_metadata_headers(tmp_path):
    cfg = write(tmp_path, "ex1.toml", EX1)
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    lines = (tmp_path / "o" / "convergence.csv").read_text().splitlines()
    headers = [l for l in lines if l.startswith("#")]
    assert headers == sorted(headers)
    assert any("seed" in h for h in headers)
    data_start = lines.index("n,atom_id,deviation,sup_deviation,closed_form_if_any")
    assert lines[data_start + 1].startswith("1,w0,")


def test_observable_json_round_trips(tmp_path):
    cfg = write(tmp_path, "ex1.toml", EX1)
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    x = ser.loads((tmp_path / "o" / "observable.json").read_text())
    assert isinstance(x, fd.Section)
    assert x.kind.is_matrix


def test_run_custom_config(tmp_path, custom_files):
    rc = main(["run", "--config", str(custom_files), "--out", str(tmp_path / "o")])
    assert rc == 0
    summary = (tmp_path / "o" / "summary.txt").read_text()
    assert "# result = PASS" in summary


def test_corrupted_custom_state_exits_1(tmp_path, custom_files):
    state_path = tmp_path / "state.json"
    doc = json.loads(state_path.read_text())
    doc["densities"][0][0] = [1.4, 0.0]  # trace now wrong at the first atom
    state_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    rc = main(["run", "--config", str(custom_files), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_corrupted_custom_stderr_names_invariant(tmp_path, custom_files, capsys):
    state_path = tmp_path / "state.json"
    doc = json.loads(state_path.read_text())
    doc["densities"][0][0] = [1.4, 0.0]
    state_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    main(["run", "--config", str(custom_files), "--out", str(tmp_path / "o")])
    err = capsys.readouterr().err
    assert "invariant violated" in err
    assert "trace" in err


def test_malformed_config_exits_2(tmp_path, capsys):
    cfg = write(tmp_path, "bad.toml", EX1 + "\nfrobnicate = 1\n")
    rc = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path, capsys):
    rc = main(["run", "--config", str(tmp_path / "absent.toml")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_unparsable_args_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--no-such-flag"])
    assert exc.value.code == 2


def test_check_axioms_deterministic(tmp_path):
    assert main(["check-axioms", "--seed", "4", "--out", str(tmp_path / "a"),
                 "--quiet"]) == 0
    assert main(["check-axioms", "--seed", "4", "--out", str(tmp_path / "b"),
                 "--quiet"]) == 0
    ta = (tmp_path / "a" / "axioms.txt").read_bytes()
    tb = (tmp_path / "b" / "axioms.txt").read_bytes()
    assert ta == tb
    text = ta.decode()
    assert "FAIL" not in text
    assert text.rstrip().splitlines()[-1].startswith("# properties =")


def test_check_axioms_with_custom_bundle(tmp_path, custom_files):
    rc = main(["check-axioms", "--config", str(custom_files),
               "--out", str(tmp_path / "o"), "--quiet"])
    assert rc == 0
    text = (tmp_path / "o" / "axioms.txt").read_text()
    assert "custom" in text


def test_localize_state_document(tmp_path):
    sp = fd.AtomicMeasureSpace.uniform(2)
    rho = np.array([[0.75, 0.25j], [-0.25j, 0.25]], dtype=complex)
    phi = fd.StateBundle.from_densities(sp, [rho, np.eye(2, dtype=complex) / 2])
    probes = fd.matrix_unit_probes(sp, 2)
    cols = np.stack([fd.state_eval(phi, p).values for p in probes])
    doc = ser.GlobalStateValues(sp, 2, cols)
    p = write(tmp_path, "gs.json", ser.dumps(doc))
    rc = main(["localize", str(p), "--out", str(tmp_path / "o"), "--quiet"])
    assert rc == 0
    back = ser.loads((tmp_path / "o" / "state_bundle.json").read_text())
    assert np.allclose(back.densities[0], rho, atol=1e-12)
    report = (tmp_path / "o" / "localize_report.txt").read_text()
    assert "PASS" in report and "FAIL" not in report


def test_localize_markov_document(tmp_path):
    sp = fd.AtomicMeasureSpace.uniform(2)
    mb = doubly_stochastic_bundle(sp, seed=5)
    probes = fd.matrix_unit_probes(sp, 2)
    images = np.stack([
        np.stack([mb.apply(p).elems[i].entries for i in range(2)])
        for p in probes
    ])
    p = write(tmp_path, "gm.json", ser.dumps(ser.GlobalMarkovValues(sp, 2, images)))
    rc = main(["localize", str(p), "--out", str(tmp_path / "o"), "--quiet"])
    assert rc == 0
    back = ser.loads((tmp_path / "o" / "markov_bundle.json").read_text())
    rng = np.random.default_rng(0)
    x = fd.Section(sp, fd.FiberKind.matrix(2), tuple(
        fd.MatrixFiberElement(rng.standard_normal((2, 2)) + 0j) for _ in range(2)))
    assert fd.ess_sup(fd.section_norm(back.apply(x) - mb.apply(x))) <= 1e-12


def test_localize_rejects_wrong_document(tmp_path, capsys):
    sp = fd.AtomicMeasureSpace.uniform(2)
    x = fd.matrix_unit_section(sp, 2, 0, 0)
    p = write(tmp_path, "sec.json", ser.dumps(x))
    rc = main(["localize", str(p), "--out", str(tmp_path / "o"), "--quiet"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_localize_non_state_values_exit_1(tmp_path, capsys):
    sp = fd.AtomicMeasureSpace.uniform(2)
    # values of a functional whose reconstructed density has trace 1.5
    rho = np.diag([1.0, 0.5]).astype(complex)
    phi_vals = []
    probes = fd.matrix_unit_probes(sp, 2)
    cols = np.stack([
        fd.L0Element(sp, np.array([np.trace(rho @ pr.elems[0].entries),
                                   np.trace(rho @ pr.elems[1].entries)]))
        .values for pr in probes
    ])
    p = write(tmp_path, "gs.json", ser.dumps(ser.GlobalStateValues(sp, 2, cols)))
    rc = main(["localize", str(p), "--out", str(tmp_path / "o"), "--quiet"])
    assert rc == 1
    assert "invariant violated" in capsys.readouterr().err
