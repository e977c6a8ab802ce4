import json
from importlib import resources

import numpy as np
import pytest

from envkit import cli, io, scenarios
from envkit.channels import standard_channel

DATA = resources.files("envkit") / "data"


def data(name):
    return str(DATA / name)


def run(capsys, *argv):
    code = cli.main(["--no-timestamp", *argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


def test_state_round_trip():
    psi = scenarios.swap_damping_state()
    back = io.state_from_json(io.state_to_json(psi))
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-12)
    assert back.dims == psi.dims


def test_channel_round_trip():
    ch = standard_channel("amplitude_damping", 0.3)
    back = io.channel_from_json(io.channel_to_json(ch))
    for a, b in zip(ch.kraus, back.kraus):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_bundled_fixtures_match_builders():
    psi = io.state_from_json(data("swap_damping_state.json"))
    np.testing.assert_allclose(psi.amplitudes, scenarios.swap_damping_state().amplitudes, atol=1e-12)
    ch = io.channel_from_json(data("swap_damping_channel_p03.json"))
    for a, b in zip(ch.kraus, scenarios.swap_damping_channel(0.3).kraus):
        np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("doc", [
    {"dims": [2, 2]},
    {"dims": [2, 2], "amplitudes": [[1, 0, 0]]},
    {"dims": [2], "amplitudes": ["x", 0]},
])
def test_malformed_state(doc):
    with pytest.raises(io.MalformedInput):
        io.state_from_json(doc)


def test_malformed_channel():
    with pytest.raises(io.MalformedInput):
        io.channel_from_json({"dim": 2, "kraus": [[[1, 0], [0]]]})
    with pytest.raises(io.MalformedInput):
        io.channel_from_json({"dim": 3, "kraus": [[[1, 0], [0, 1]]]})


def test_cli_schmidt(capsys):
    code, rep, _ = run(capsys, "schmidt", data("schmidt_08_06.json"))
    assert code == 0
    assert rep["values"]["coeffs"] == [0.8, 0.6]
    assert rep["values"]["multiplicity_counts"] == {"1": 2}
    code, rep, _ = run(capsys, "schmidt", data("product_state.json"))
    assert code == 0 and rep["values"]["product_state"] is True


def test_cli_envariance_exit_codes(capsys):
    code, rep, _ = run(capsys, "envariance", data("bell_state.json"), data("pauli_x.json"), data("pauli_x.json"))
    assert code == 0 and rep["verdicts"]["envariance"]["passed"]
    code, rep, _ = run(capsys, "envariance", data("bell_state.json"), data("depolarizing_05.json"), data("identity_2.json"))
    assert code == 1
    assert rep["values"]["purity_certificate"]["S"] == pytest.approx(0.4375, abs=1e-9)


def test_cli_malformed_input_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["schmidt", str(bad)]) == 2
    assert "error" in capsys.readouterr().err
    assert cli.main(["envariance", data("bell_state.json"), data("identity_2.json"),
                     data("swap_damping_channel_p03.json")]) == 2


def test_cli_partner(capsys):
    code, rep, _ = run(capsys, "partner", data("bell_state.json"), data("pauli_x.json"))
    assert code == 0 and rep["verdicts"]["envariance"]["passed"]
    code, rep, _ = run(capsys, "partner", data("schmidt_08_06.json"), data("pauli_x.json"))
    assert code == 1 and not rep["verdicts"]["admissible"]["passed"]


def test_cli_discord(capsys):
    code, rep, _ = run(capsys, "discord", data("bell_state.json"), "--restarts", "4")
    assert code == 0
    assert rep["values"]["D"] == pytest.approx(np.log(2), abs=1e-6)


def test_cli_tfd(capsys):
    code, rep, _ = run(capsys, "tfd", "--spec", data("tfd_two_level.json"))
    assert code == 0
    assert rep["values"]["bath_amplitude_damping_fidelity"] == pytest.approx(0.914071977644, abs=1e-11)


def test_cli_demo_reports_are_byte_identical(capsys):
    _, _, first = run(capsys, "demo", "nogo", "--trials", "3", "--seed", "11")
    code, rep, second = run(capsys, "demo", "nogo", "--trials", "3", "--seed", "11")
    assert code == 0 and first == second
    assert "timestamp" not in rep


def test_cli_timestamp_present_by_default(capsys):
    assert cli.main(["schmidt", data("bell_state.json")]) == 0
    assert "timestamp" in json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("name", ["swap-damping", "tfd", "easta"])
def test_cli_demos_pass(capsys, name):
    code, rep, _ = run(capsys, "demo", name)
    assert code == 0, rep["verdicts"]


def test_cli_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["demo", "nonexistent"])
    assert exc.value.code == 2
