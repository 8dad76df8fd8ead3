import json

import pytest

from pyrfstat.cli import EXIT_CONFIG, EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, SUMMARY_NAME, main
from pyrfstat.config import MANIFEST_NAME
from pyrfstat.instrument import save_clicks
from pyrfstat.units import ClickStream


def summary(directory):
    return json.loads((directory / SUMMARY_NAME).read_text())


def snapshot(directory):
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


def test_g2_command(tmp_path):
    out = tmp_path / "g2"
    assert main(["g2", "--out", str(out)]) == EXIT_OK
    result = summary(out)
    assert result["regime"] == "oscillatory"
    assert result["g2_zero_emitter"] == 0.0
    assert result["g2_zero_deconvolved"] == pytest.approx(0.0784, abs=1e-4)
    assert 0.10 < result["g2_zero_convolved"] < 0.22
    assert result["first_rabi_maximum_ps"] > 0
    for name in ("g2_ideal.csv", "g2_mixed.csv", "g2_convolved.csv", MANIFEST_NAME):
        assert (out / name).exists()
    assert not list(out.glob("*.gp"))


def test_g2_without_convolution_and_with_scripts(tmp_path):
    out = tmp_path / "g2"
    assert main(["g2", "--out", str(out), "--set", "convolve=false", "--gnuplot"]) == EXIT_OK
    assert not (out / "g2_convolved.csv").exists()
    assert "g2_zero_convolved" not in summary(out)
    assert 'plot "g2_ideal.csv"' in (out / "g2_ideal.gp").read_text()


def test_undriven_degenerate_emitter(tmp_path):
    out = tmp_path / "g2"
    args = ["g2", "--out", str(out), "--set", "emitter.t2=560", "--set", "drive.rabi_energy=0"]
    assert main(args) == EXIT_OK
    result = summary(out)
    assert result["regime"] == "degenerate"
    assert result["saturation_parameter"] == 0.0
    assert "first_rabi_maximum_ps" not in result


def test_rerun_is_byte_identical(tmp_path):
    out = tmp_path / "g2"
    args = ["g2", "--out", str(out), "--set", "grid.step=20"]
    assert main(args) == EXIT_OK
    first = snapshot(out)
    assert main(args) == EXIT_OK
    assert snapshot(out) == first


def test_manifest_reproduces_the_run(tmp_path):
    out = tmp_path / "hom"
    assert main(["hom", "--out", str(out), "--seed", "5", "--set", "interferometer.overlap=0.8"]) == EXIT_OK
    first = snapshot(out)
    assert main(["hom", "--config", str(out / MANIFEST_NAME)]) == EXIT_OK
    assert snapshot(out) == first


def test_hom_command(tmp_path):
    out = tmp_path / "hom"
    assert main(["hom", "--out", str(out)]) == EXIT_OK
    result = summary(out)
    assert result["g2_cross_zero_deconvolved"] == pytest.approx(0.539, abs=0.01)
    assert result["g2_parallel_zero_deconvolved"] == pytest.approx(0.054, abs=0.01)
    assert result["visibility_zero_deconvolved"] == pytest.approx(0.9, abs=0.05)
    assert 0.4 < result["visibility_peak_convolved"] < 0.65
    assert result["dip_positions_ps"] == [pytest.approx(-13000.0, abs=200.0), pytest.approx(13000.0, abs=200.0)]
    for value in result["dip_values_convolved"]:
        assert 0.75 < value < 0.82

    again = tmp_path / "visibility"
    args = [
        "visibility", "--out", str(again),
        "--set", f"cross={out / 'hom_cross_convolved.csv'}",
        "--set", f"parallel={out / 'hom_parallel_convolved.csv'}",
    ]
    assert main(args) == EXIT_OK
    assert summary(again)["visibility_peak"] == pytest.approx(result["visibility_peak_convolved"])


def test_mollow_command(tmp_path):
    out = tmp_path / "mollow"
    assert main(["mollow", "--out", str(out), "--set", "weak_drive=yes"]) == EXIT_OK
    result = summary(out)
    assert result["peak_separations_uev"] == [pytest.approx(26.7, abs=0.1), pytest.approx(26.7, abs=0.1)]
    assert result["rabi_frequency_ghz"] == pytest.approx(6.456, abs=1e-3)
    assert (out / "weak_drive.csv").exists()


def test_mollow_fit_from_file(tmp_path):
    spectrum = tmp_path / "mollow"
    assert main(["mollow", "--out", str(spectrum)]) == EXIT_OK
    out = tmp_path / "fit"
    args = ["fit", "--out", str(out), "--set", "kind=mollow", "--set", f"data={spectrum / 'mollow.csv'}"]
    assert main(args) == EXIT_OK
    assert summary(out)["parameters"]["rabi_energy"] == pytest.approx(26.7, rel=1e-3)
    assert (out / "fit_report.txt").read_text().startswith("# rfstat-fit v1 kind=mollow")


def test_purcell_command(tmp_path):
    out = tmp_path / "purcell"
    assert main(["purcell", "--out", str(out)]) == EXIT_OK
    result = summary(out)
    assert result["enhancement_ratio"] == pytest.approx(12.6, abs=0.05)
    assert "two_point" in result["flags"]
    assert (out / "purcell.csv").read_text().startswith("# rfstat-purcell v1")


def test_convert(capsys):
    assert main(["convert", "energy", "62.035"]) == EXIT_OK
    line = capsys.readouterr().out.strip()
    assert float(line.split("\t")[1].split()[0]) == pytest.approx(15.0, abs=1e-4)
    assert main(["convert", "rabi", "26.7", "0.9"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert float(lines[0].split("\t")[1].split()[0]) == pytest.approx(6.456, abs=1e-3)
    assert main(["convert", "t2", "fast"]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "args",
    [
        ["g2", "--set", "emitter.t3=1"],
        ["g2", "--set", "drive.rabi_energy=-1"],
        ["mc", "--set", "route=sideways"],
        ["correlate"],
        ["fit", "--set", "kind=g3", "--set", "data=x.csv"],
    ],
)
def test_configuration_errors(tmp_path, args):
    assert main(args + ["--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_input_errors(tmp_path):
    out = str(tmp_path / "out")
    assert main(["g2", "--config", str(tmp_path / "missing.ini"), "--out", out]) == EXIT_IO
    assert main(["fit", "--set", f"data={tmp_path / 'missing.csv'}", "--out", out]) == EXIT_IO
    clicks = tmp_path / "clicks.txt"
    save_clicks([ClickStream(0, [10, 200, 3000], 5000.0)], clicks)
    assert main(["correlate", "--set", f"input={clicks}", "--out", out]) == EXIT_IO
    (tmp_path / "broken.csv").write_text("# rfstat-curve v1\nnot,a,table\n")
    assert main(["fit", "--set", f"data={tmp_path / 'broken.csv'}", "--out", out]) == EXIT_IO


def test_unconverged_fit_exit_code(tmp_path):
    model = tmp_path / "g2"
    assert main(["g2", "--out", str(model), "--set", "grid.step=100"]) == EXIT_OK
    out = tmp_path / "fit"
    args = [
        "fit", "--out", str(out),
        "--set", f"data={model / 'g2_convolved.csv'}",
        "--set", "drive.rabi_energy=0.5",
        "--set", "budget=5",
    ]
    assert main(args) == EXIT_NOT_CONVERGED
    assert "not_converged" in summary(out)["flags"]


def test_mc_is_deterministic(tmp_path):
    out = tmp_path / "mc"
    args = ["mc", "--out", str(out), "--seed", "11", "--set", "duration=2e6", "--set", "drive.rabi_energy=2.0"]
    assert main(args) == EXIT_OK
    first = snapshot(out)
    assert main(args) == EXIT_OK
    assert snapshot(out) == first
    result = summary(out)
    assert sum(result["clicks_per_channel"].values()) == result["emissions"]
    assert set(result["clicks_per_channel"]) == {"0", "1"}


@pytest.mark.slow
def test_simulate_correlate_fit_pipeline(tmp_path):
    mc, corr, fit = tmp_path / "mc", tmp_path / "corr", tmp_path / "fit"
    args = ["mc", "--out", str(mc), "--seed", "2", "--set", "drive.rabi_energy=5.0",
            "--set", "duration=1e8", "--set", "batches=4", "--set", "workers=4"]
    assert main(args) == EXIT_OK
    assert main(["correlate", "--out", str(corr), "--set", f"input={mc / 'clicks.txt'}"]) == EXIT_OK
    correlation = summary(corr)
    assert correlation["g2_zero"] < 0.1
    args = [
        "fit", "--out", str(fit),
        "--set", f"data={corr / 'histogram.csv'}",
        "--set", "drive.rabi_energy=4.0",
        "--set", "instrument.rho=0.99",
        "--set", "instrument.irf_fwhm=50",
    ]
    assert main(args) == EXIT_OK
    parameters = summary(fit)["parameters"]
    assert parameters["rabi_energy"] == pytest.approx(5.0, rel=0.1)
    assert parameters["rho"] > 0.9
