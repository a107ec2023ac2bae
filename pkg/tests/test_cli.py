import json
import math
import subprocess
import sys

import numpy as np
import pytest

from bosenhance import __version__
from bosenhance.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    SWEEP_COLUMNS,
    TRIAL_FUNCTIONS,
    build_scenario,
    fit_scale,
    main,
    parse_scenario_text,
    polarization_report,
    read_sweep,
    run_sweep,
    trial_curve,
)
from bosenhance.errors import ConfigError, DegenerateFit, RangeError
from bosenhance.ideal import structure_factor_at
from bosenhance.polarization import sigma_minus_enhancement

HARMONIC_T = """\
schema_version = 1   # format of this file
trap = harmonic
kappa = 0.5
sweep.variable = t
sweep.start = 0.6
sweep.stop = 1.4
sweep.points = 9
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def body(text):
    return [ln for ln in text.splitlines() if not ln.startswith("# timestamp")]


# ---------------------------------------------------------------------------
# scenario grammar

def test_parse_key_value_with_comments():
    raw = parse_scenario_text("# header\nschema_version = 1\n\nkappa = 0.3 # trailing\n")
    assert raw == {"schema_version": "1", "kappa": "0.3"}


def test_parse_json_is_flattened():
    text = json.dumps({"schema_version": 1, "kappa": 0.2,
                       "sweep": {"variable": "kappa", "values": [0.1, 0.3]}})
    scn = build_scenario(parse_scenario_text(text))
    assert scn.sweep.variable == "kappa"
    assert scn.sweep.values == (0.1, 0.3)


@pytest.mark.parametrize("text, field", [
    ("schema_version = 1\nkapa = 0.3\n", "kapa"),
    ("schema_version = 2\n", "schema_version"),
    ("kappa = 0.3\n", "schema_version"),
    ("schema_version = 1\nkappa = -1\n", "kappa"),
    ("schema_version = 1\nkappa = abc\n", "kappa"),
    ("schema_version = 1\ntrap = ring\n", "trap"),
    ("schema_version = 1\nmodel = mf_only\n", "scattering_length_a0"),
    ("schema_version = 1\nt = 0\n", "t"),
    ("schema_version = 1\nf = 1.0\n", "f"),
    ("schema_version = 1\nsweep.variable = mu\n", "sweep.variable"),
    ("schema_version = 1\nsweep.variable = t\nsweep.start = 2\nsweep.stop = 1\nsweep.points = 3\n",
     "sweep.start"),
    ("schema_version = 1\nkappa = 0.1\nkappa = 0.2\n", "kappa"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as info:
        build_scenario(parse_scenario_text(text))
    assert info.value.field == field


def test_power_trap_and_log_spacing():
    scn = build_scenario(parse_scenario_text(
        "schema_version = 1\ntrap = power\nd = 3\nalpha = inf\nkappa = 0.1\n"
        "sweep.variable = kappa\nsweep.start = 0.02\nsweep.stop = 0.2\nsweep.points = 3\n"
        "sweep.spacing = log\n"))
    assert scn.trap.x == 0.5
    assert scn.sweep.values[1] == pytest.approx(math.sqrt(0.02 * 0.2))


# ---------------------------------------------------------------------------
# sweep

def test_sweep_values_match_library(tmp_path):
    scn = build_scenario(parse_scenario_text(HARMONIC_T))
    rows = run_sweep(scn)
    assert [r[0] for r in rows] == list(scn.sweep.values)
    for r in rows:
        assert r[3] == structure_factor_at(r[1], 0.5).S
        assert r[-1] == ""


def test_sweep_deterministic_across_threads(tmp_path, capsys):
    path = write(tmp_path, "s.txt", HARMONIC_T)
    assert main(["sweep", path]) == EXIT_OK
    one = capsys.readouterr().out
    assert main(["--threads", "3", "sweep", path]) == EXIT_OK
    three = capsys.readouterr().out
    assert body(one) == body(three)
    assert one.startswith("# bosenhance sweep\n")
    assert f"# version = {__version__}" in one
    assert "# scenario kappa = 0.5" in one


def test_sweep_round_trip_is_bit_exact(tmp_path):
    path = write(tmp_path, "s.txt", HARMONIC_T)
    out = str(tmp_path / "out.csv")
    assert main(["--out", out, "sweep", path]) == EXIT_OK
    cols = read_sweep(out)
    rows = run_sweep(build_scenario(parse_scenario_text(HARMONIC_T)))
    assert list(cols) == list(SWEEP_COLUMNS)
    assert cols["S"] == [r[3] for r in rows]
    assert cols["term_bec_thermal"] == [r[5] for r in rows]


def test_sweep_peaks_below_tc(tmp_path):
    rows = run_sweep(build_scenario(parse_scenario_text(HARMONIC_T.replace("0.5", "0.2"))))
    S = [r[3] for r in rows]
    assert rows[int(np.argmax(S))][1] < 1.0


def test_divergent_points_are_recorded(tmp_path, capsys):
    text = "schema_version = 1\nkappa = 0\nsweep.variable = t\nsweep.values = 0.8, 1.0, 1.3\n"
    assert main(["sweep", write(tmp_path, "s.txt", text)]) == EXIT_OK
    lines = [ln for ln in capsys.readouterr().out.splitlines() if not ln.startswith("#")]
    assert lines[1].endswith("DivergentStructureFactor")
    assert lines[2].endswith("DivergentStructureFactor")
    assert lines[3].endswith(",")


def test_all_points_failing_is_numeric_error(tmp_path, capsys):
    text = "schema_version = 1\nkappa = 0\nsweep.variable = t\nsweep.values = 0.8, 1.0\n"
    assert main(["sweep", write(tmp_path, "s.txt", text)]) == EXIT_NUMERIC


def test_tol_flag_changes_accuracy(tmp_path, capsys):
    path = write(tmp_path, "s.txt", HARMONIC_T)
    assert main(["--tol", "1e-3", "sweep", path]) == EXIT_OK
    loose = read_lines_S(capsys.readouterr().out)
    assert main(["sweep", path]) == EXIT_OK
    tight = read_lines_S(capsys.readouterr().out)
    np.testing.assert_allclose(loose, tight, rtol=2e-3)
    assert main(["--tol", "-1", "sweep", path]) == EXIT_CONFIG


def read_lines_S(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")][1:]
    return [float(ln.split(",")[3]) for ln in lines]


def test_interacting_sweep(tmp_path):
    text = ("schema_version = 1\nmodel = full_interacting\nscattering_length_a0 = 85\n"
            "kappa = 0.51\nsweep.variable = t\nsweep.values = 1.01, 1.2\n")
    rows = run_sweep(build_scenario(parse_scenario_text(text)))
    assert all(r[-1] == "" for r in rows)
    assert rows[0][7].startswith("pair_correlation_local=")


# ---------------------------------------------------------------------------
# other commands

def test_exit_codes(tmp_path, capsys):
    assert main(["sweep", str(tmp_path / "missing.txt")]) == EXIT_IO
    bad = write(tmp_path, "bad.txt", "schema_version = 1\nkappa = -2\n")
    assert main(["sweep", bad]) == EXIT_CONFIG
    assert "[kappa]" in capsys.readouterr().err
    good = write(tmp_path, "s.txt", HARMONIC_T)
    assert main(["--out", str(tmp_path / "no" / "dir.csv"), "sweep", good]) == EXIT_IO


def test_classify(capsys):
    assert main(["classify", "--d", "3", "--alpha", "inf"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "class = diverges_at_tc" in out
    assert main(["classify", "--d", "1", "--alpha", "inf"]) == EXIT_OK
    assert "bec = no" in capsys.readouterr().out
    assert main(["classify", "--d", "3", "--alpha", "-1"]) == EXIT_CONFIG


def test_profile_command(tmp_path, capsys):
    text = ("schema_version = 1\nscattering_length_a0 = 85\nprofile.models = ideal, semi_ideal\n"
            "profile.t = 0.8\n")
    assert main(["profile", write(tmp_path, "p.txt", text)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("# model = ") == 2
    assert "model,r_um,n_total_cm3,n_bec_cm3,n_thermal_cm3" in out


def make_fit_inputs(tmp_path, scale, noise=None, rng=None):
    model = str(tmp_path / "model.csv")
    assert main(["--out", model, "sweep", write(tmp_path, "s.txt", HARMONIC_T)]) == EXIT_OK
    t = np.linspace(0.65, 1.35, 8)
    S = np.array([structure_factor_at(v, 0.5).S for v in t])
    model_S = np.interp(t, read_sweep(model)["t"], read_sweep(model)["S"])
    sigma = np.full(t.size, 0.05)
    signal = scale * model_S
    if noise is not None:
        signal = signal + noise * rng.standard_normal(t.size)
    lines = ["t,signal,sigma"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(t.tolist(), signal.tolist(), sigma.tolist())]
    data = write(tmp_path, "data.csv", "\n".join(lines) + "\n")
    return model, data, S


def test_fit_exact_scale(tmp_path, capsys):
    model, data, _ = make_fit_inputs(tmp_path, 2.5)
    assert main(["fit", model, data]) == EXIT_OK
    scale, chi2, dof = capsys.readouterr().out.splitlines()[1].split(",")
    assert float(scale) == pytest.approx(2.5, rel=1e-12)
    assert float(chi2) < 1e-20
    assert int(dof) == 7


def test_fit_scale_statistics(rng):
    # chi2 / dof averages to one and the scale is unbiased for Gaussian noise
    t = np.linspace(0.7, 1.3, 10)
    S = 1 + 2 * np.exp(-t)
    sigma = np.full(t.size, 0.1)
    fits = [fit_scale(t, S, t, 3.0 * S + sigma * rng.standard_normal(t.size), sigma)
            for _ in range(2000)]
    assert np.mean([f.chi2 / f.dof for f in fits]) == pytest.approx(1.0, abs=0.05)
    assert np.mean([f.scale for f in fits]) == pytest.approx(3.0, abs=3e-3)


def test_fit_scale_errors():
    t = np.linspace(0.7, 1.3, 5)
    with pytest.raises(RangeError):
        fit_scale(t, t, np.array([0.5, 1.0]), np.ones(2), np.ones(2))
    with pytest.raises(DegenerateFit):
        fit_scale(t, t, np.array([1.0]), np.ones(1), np.ones(1))
    with pytest.raises(DegenerateFit):
        fit_scale(t, t, np.array([0.8, 1.0]), np.ones(2), np.zeros(2))


def test_polarization_command(tmp_path, capsys):
    text = "schema_version = 1\nkappa = 0.5\nsweep.variable = t\nsweep.values = 0.8, 0.9, 1.0, 1.1\n"
    eta = str(tmp_path / "eta.csv")
    assert main(["--out", eta, "sweep", write(tmp_path, "s.txt", text)]) == EXIT_OK
    assert main(["polarization", eta]) == EXIT_OK
    lines = [ln for ln in capsys.readouterr().out.splitlines() if not ln.startswith("#")][1:]
    for ln in lines:
        e_plus, e_minus = (float(v) for v in ln.split(",")[1:])
        assert e_minus == pytest.approx((4 + e_plus) / 5, rel=1e-12)

    cols = read_sweep(eta)
    obs = [(4 + s) / 5 for s in cols["S"]]
    lines = ["t,observed,sigma"] + [f"{v!r},{o!r},0.01" for v, o in zip(cols["value"], obs)]
    data = write(tmp_path, "obs.csv", "\n".join(lines) + "\n")
    assert main(["polarization", eta, "--gamma", "fit", "--data", data]) == EXIT_OK
    out = capsys.readouterr().out
    gamma = float(next(ln for ln in out.splitlines() if ln.startswith("# gamma =")).split("=")[1])
    assert gamma == pytest.approx(1 / 3, abs=1e-9)
    assert main(["polarization", eta, "--gamma", "fit"]) == EXIT_CONFIG


def test_selftest_passes(capsys):
    assert main(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "\x1b[" not in out
    assert "FAIL" not in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bosenhance.cli", "--version"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip() == __version__


# ---------------------------------------------------------------------------
# worked examples

def test_harmonic_sweep_shape():
    text = ("schema_version = 1\nkappa = 0.25\nsweep.variable = t\nsweep.start = 0.1\n"
            "sweep.stop = 2\nsweep.points = 96\n")
    rows = run_sweep(build_scenario(parse_scenario_text(text)))
    S = np.array([r[3] for r in rows])
    t = np.array([r[1] for r in rows])
    assert 0.1 < t[np.argmax(S)] < 1.0
    above = structure_factor_at(1.0001, 0.25).S
    assert above == pytest.approx(1.3684327776, rel=0.05)


def test_box_sweep_inverse_kappa():
    text = "schema_version = 1\ntrap = box\nt = 1\nsweep.variable = kappa\nsweep.values = 0.05, 0.1, 0.2\n"
    S = [r[3] for r in run_sweep(build_scenario(parse_scenario_text(text)))]
    assert S[0] / S[1] == pytest.approx(2.0, rel=0.05)
    assert S[1] / S[2] == pytest.approx(2.0, rel=0.05)


def test_profile_doubled_atom_number(tmp_path, capsys):
    text = ("schema_version = 1\nscattering_length_a0 = 85\natom_number = 800000\n"
            "profile.models = semi_ideal\nprofile.t = 0.7\n")
    assert main(["profile", write(tmp_path, "p.txt", text)]) == EXIT_OK
    header = next(ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("# model"))
    N = float(header.split("N = ")[1].split(",")[0])
    assert N == pytest.approx(8e5, rel=5e-3)


def test_profile_models_coincide_without_interactions(tmp_path, capsys):
    text = "schema_version = 1\nscattering_length_a0 = 0\nprofile.t = 0.8\n"
    assert main(["profile", write(tmp_path, "p.txt", text)]) == EXIT_OK
    rows = [ln.split(",") for ln in capsys.readouterr().out.splitlines()
            if ln and not ln.startswith("#")][1:]
    by_model = {}
    for row in rows:
        by_model.setdefault(row[0], []).append([float(v) for v in row[1:]])
    blocks = [np.array(v) for v in by_model.values()]
    assert len(blocks) == 3
    for b in blocks[1:]:
        np.testing.assert_allclose(b, blocks[0], rtol=1e-9)


def test_chi2_calibration_dof_13(rng):
    t = np.linspace(0.8, 1.4, 14)
    S = np.array([structure_factor_at(v, 0.51).S for v in t])
    sigma = np.ones(t.size)
    inside = 0
    for _ in range(1000):
        res = fit_scale(t, S, t, 5.0 * S + rng.standard_normal(t.size), sigma)
        assert res.dof == 13
        inside += 4 <= res.chi2 <= 30
    assert inside >= 950


def test_fit_prefers_generating_model(rng):
    grid = np.linspace(0.85, 1.5, 27)
    A = np.array([structure_factor_at(v, 0.51).S for v in grid])
    B = np.array([structure_factor_at(v, 0.25).S for v in grid])
    t = np.linspace(0.9, 1.45, 14)
    clean = 1.7 * np.interp(t, grid, A)
    sigma = 0.05 * clean
    wins = 0
    for _ in range(500):
        data = clean + sigma * rng.standard_normal(t.size)
        wins += fit_scale(grid, A, t, data, sigma).chi2 <= fit_scale(grid, B, t, data, sigma).chi2
    assert wins >= 450


def test_polarization_flat_eta():
    cols = {"value": [0.5, 1.0, 1.5], "S": [1.0, 1.0, 1.0], "error": ["", "", ""]}
    rows, gamma, se = polarization_report(cols, 0.7)
    assert [r[2] for r in rows] == [1.0, 1.0, 1.0]
    assert se is None


@pytest.mark.parametrize("kind", TRIAL_FUNCTIONS)
def test_trial_functions_recover_gamma(kind):
    x = np.linspace(0.6, 1.6, 11)
    eta = 1.0 + 2.5 * np.exp(-x / 0.4)
    cols = {"value": list(x), "S": list(eta), "error": [""] * x.size}
    t = np.linspace(0.65, 1.55, 7)
    obs = sigma_minus_enhancement(1.0 + 2.5 * np.exp(-t / 0.4), 1 / 3)
    _, gamma, se = polarization_report(cols, "fit", (t, obs, np.full(t.size, 0.01)), kind)
    tol = 1e-9 if kind == "exponential" else 0.02
    assert gamma == pytest.approx(1 / 3, abs=tol)


def test_trial_function_errors():
    x = np.array([0.5, 1.0, 1.5])
    with pytest.raises(DegenerateFit):
        trial_curve(x, np.array([1.0, 1.2, 1.1]), "exponential")
    with pytest.raises(DegenerateFit):
        trial_curve(x, np.array([1.5, 1.2, 1.1]), "cubic")
    with pytest.raises(ConfigError):
        trial_curve(x, np.array([1.5, 1.2, 1.1]), "spline")
