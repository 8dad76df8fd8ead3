"""
rfstat command line

Every subcommand reads a RunConfig, writes CSV curves, summary.json and
manifest.ini into the output directory and exits with

    0  success
    2  invalid configuration or parameters
    3  unreadable or malformed input
    4  a fit did not converge

Examples
--------
    rfstat g2 --out runs/g2
    rfstat hom --set interferometer.overlap=0.8
    rfstat mc --seed 7 --set duration=1e8 --out runs/mc
    rfstat correlate --set input=runs/mc/clicks.txt --out runs/corr
    rfstat fit --set data=runs/corr/histogram.csv --out runs/fit
    rfstat convert energy 62.035
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from pyrfstat.config import DEFAULTS, RunConfig, parse_list, parse_points
from pyrfstat.errors import (
    ClickStreamError,
    ConfigError,
    DegenerateDataError,
    FileFormatError,
    NumericalError,
    ParameterError,
)
from pyrfstat.fitting import G2_FREE, HOM_FREE, fit_g2, fit_hom, fit_mollow, fit_purcell
from pyrfstat.instrument import (
    CURVE_MAGIC,
    HISTOGRAM_MAGIC,
    SPECTRUM_MAGIC,
    Histogram,
    convolve_irf,
    correlate_clicks,
    load_click_channels,
    load_curve,
    load_histogram,
    load_spectrum,
    mix_background,
    normalize_histogram,
    read_metadata,
    save_clicks,
    save_columns,
    save_curve,
    save_histogram,
    save_spectrum,
)
from pyrfstat.systems.analyticalsystems.analytical_systems import (
    OSCILLATORY,
    MollowParams,
    broaden_spectrum,
    emission_rate,
    first_rabi_maximum,
    g2_coefficients,
    g2_curve,
    mollow_spectrum,
    saturation_parameter,
    steady_state_population,
    weak_drive_spectrum,
)
from pyrfstat.systems.analyticalsystems.cavity_systems import CavityParams, purcell_lifetime
from pyrfstat.systems.analyticalsystems.interferometer_systems import (
    hom_curves,
    max_cw_visibility,
    visibility,
)
from pyrfstat.systems.trajectorysystems.trajectory_systems import (
    ORTHOGONAL,
    PARALLEL,
    TrajectoryConfig,
    simulate_clicks,
    simulate_mz,
    split_stream,
    waiting_times,
)
from pyrfstat.units import (
    DriveParams,
    EmitterParams,
    GridSpec,
    InterferometerParams,
    IRFParams,
    energy_to_frequency,
    frequency_to_energy,
    linewidth_to_t2,
    rabi_energy_to_frequency,
    t2_to_linewidth,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NOT_CONVERGED = 4

SUMMARY_NAME = "summary.json"
VISIBILITY_MAGIC = "rfstat-visibility"
PURCELL_MAGIC = "rfstat-purcell"


class Run:
    """Output directory bookkeeping for one subcommand"""

    def __init__(self, config: RunConfig, gnuplot: bool = False):
        self.config = config
        self.out = config.out
        self.gnuplot = gnuplot
        self.summary = {}
        self.out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out / name

    def plotted(self, name: str, ylabel: str = "value", xlabel: str = "tau (ps)"):
        """Emit a gnuplot script next to the CSV when --gnuplot is given"""
        if not self.gnuplot:
            return
        script = self.out / (Path(name).stem + ".gp")
        script.write_text(
            "\n".join([
                'set datafile separator ","',
                "set key autotitle columnhead",
                f'set xlabel "{xlabel}"',
                f'set ylabel "{ylabel}"',
                f'plot "{name}" using 1:2 with lines',
                "pause mouse close",
                "",
            ]),
            encoding="utf-8",
        )

    def finish(self):
        self.config.write_manifest(self.out)
        path = self.path(SUMMARY_NAME)
        path.write_text(json.dumps(_json_ready(self.summary), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info("wrote %s", path)


def _json_ready(value):
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_ready(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) or math.isinf(value) else value
    return value


# Shared parameter blocks


def _emitter(config: RunConfig) -> EmitterParams:
    return EmitterParams(config.get("emitter", "t1"), config.get("emitter", "t2"))


def _drive(config: RunConfig) -> DriveParams:
    return DriveParams(config.get("drive", "rabi_energy"))


def _irf(config: RunConfig) -> IRFParams:
    return IRFParams(config.get("instrument", "irf_fwhm"))


def _interferometer(config: RunConfig) -> InterferometerParams:
    ifo = config.section("interferometer")
    return InterferometerParams(
        ifo["r1"], 1.0 - ifo["r1"], ifo["r2"], 1.0 - ifo["r2"], ifo["delay"], ifo["overlap"]
    )


def _grid(config: RunConfig) -> GridSpec:
    return GridSpec.symmetric(config.get("grid", "half_width"), config.get("grid", "step"))


# Subcommands


def cmd_g2(run: Run) -> int:
    """Ideal, background-mixed and IRF-convolved g2 of the driven emitter"""
    config = run.config
    emitter, drive = _emitter(config), _drive(config)
    rho = config.get("instrument", "rho")
    ideal = g2_curve(emitter, drive, _grid(config))
    mixed = mix_background(ideal, rho)
    save_curve(ideal, run.path("g2_ideal.csv"))
    save_curve(mixed, run.path("g2_mixed.csv"), rho=repr(rho))
    run.plotted("g2_ideal.csv", "g2")
    run.plotted("g2_mixed.csv", "g2")
    coefficients = g2_coefficients(emitter, drive)
    run.summary.update(
        regime=coefficients.regime,
        g2_zero_emitter=ideal.value_at(0.0),
        g2_zero_deconvolved=mixed.value_at(0.0),
        saturation_parameter=saturation_parameter(emitter, drive),
        steady_state_population=steady_state_population(emitter, drive),
        emission_rate_per_ns=1000.0 * emission_rate(emitter, drive),
    )
    if coefficients.regime == OSCILLATORY:
        run.summary["first_rabi_maximum_ps"] = first_rabi_maximum(drive)
    if config.get("g2", "convolve"):
        convolved = convolve_irf(mixed, _irf(config))
        save_curve(convolved, run.path("g2_convolved.csv"), irf_fwhm_ps=repr(_irf(config).fwhm))
        run.plotted("g2_convolved.csv", "g2")
        run.summary["g2_zero_convolved"] = convolved.value_at(0.0)
    return EXIT_OK


def _side_dips(curve, delay):
    """Minimum of the curve on each side beyond half the interferometer delay"""
    taus = curve.taus
    dips = []
    for side in (taus <= -delay / 2.0, taus >= delay / 2.0):
        if not np.any(side):
            continue
        index = np.flatnonzero(side)[np.argmin(curve.values[side])]
        dips.append((float(taus[index]), float(curve.values[index])))
    return dips


def _save_visibility(run: Run, name: str, curve, **metadata):
    save_columns(
        run.path(name), VISIBILITY_MAGIC, ("tau_ps", "visibility"), (curve.taus, curve.values),
        tau_start_ps=repr(float(curve.tau_start)), tau_step_ps=repr(float(curve.tau_step)), **metadata,
    )
    run.plotted(name, "V_HOM")


def cmd_hom(run: Run) -> int:
    """Cross- and co-polarised interferometer correlations and their visibility"""
    config = run.config
    emitter, drive, ifo = _emitter(config), _drive(config), _interferometer(config)
    irf = _irf(config)
    cross, parallel = hom_curves(emitter, drive, ifo, _grid(config), config.get("instrument", "rho"))
    save_curve(cross, run.path("hom_cross.csv"))
    save_curve(parallel, run.path("hom_parallel.csv"))
    run.plotted("hom_cross.csv", "g2 cross")
    run.plotted("hom_parallel.csv", "g2 parallel")
    deconvolved = visibility(cross, parallel)
    _save_visibility(run, "visibility.csv", deconvolved)
    run.summary.update(
        g2_cross_zero_deconvolved=cross.value_at(0.0),
        g2_parallel_zero_deconvolved=parallel.value_at(0.0),
        visibility_zero_deconvolved=deconvolved.value_at(0.0),
        visibility_peak_deconvolved=deconvolved.peak(),
        max_cw_visibility=max_cw_visibility(emitter.t2, irf.fwhm),
    )
    if config.get("hom", "convolve"):
        cross_c, parallel_c = convolve_irf(cross, irf), convolve_irf(parallel, irf)
        save_curve(cross_c, run.path("hom_cross_convolved.csv"))
        save_curve(parallel_c, run.path("hom_parallel_convolved.csv"))
        run.plotted("hom_cross_convolved.csv", "g2 cross")
        run.plotted("hom_parallel_convolved.csv", "g2 parallel")
        convolved = visibility(cross_c, parallel_c)
        _save_visibility(run, "visibility_convolved.csv", convolved)
        dips = _side_dips(cross_c, ifo.delay)
        run.summary.update(
            g2_cross_zero_convolved=cross_c.value_at(0.0),
            g2_parallel_zero_convolved=parallel_c.value_at(0.0),
            visibility_peak_convolved=convolved.peak(),
            dip_positions_ps=[tau for tau, _ in dips],
            dip_values_convolved=[value for _, value in dips],
        )
    else:
        dips = _side_dips(cross, ifo.delay)
        run.summary["dip_positions_ps"] = [tau for tau, _ in dips]
    return EXIT_OK


def cmd_visibility(run: Run) -> int:
    """Visibility of two measured or modelled correlation curves"""
    config = run.config
    cross_path, parallel_path = config.get("visibility", "cross"), config.get("visibility", "parallel")
    if not cross_path or not parallel_path:
        raise ConfigError("both curves are required", "visibility.cross" if not cross_path else "visibility.parallel")
    curve = visibility(_load_correlation(cross_path), _load_correlation(parallel_path))
    _save_visibility(run, "visibility.csv", curve)
    defined = curve.defined
    peak_tau = float(curve.taus[defined][np.argmax(curve.values[defined])]) if np.any(defined) else math.nan
    run.summary.update(
        visibility_peak=curve.peak(),
        visibility_peak_tau_ps=peak_tau,
        visibility_zero=curve.value_at(0.0),
        undefined_bins=int(np.count_nonzero(~defined)),
    )
    return EXIT_OK


def _triplet_peaks(spectrum):
    peaks, _ = find_peaks(spectrum.density)
    strongest = peaks[np.argsort(spectrum.density[peaks])[::-1][:3]]
    return sorted(float(e) for e in spectrum.energies[strongest])


def cmd_mollow(run: Run) -> int:
    """Resonance fluorescence spectrum, optionally broadened by the spectrometer"""
    config = run.config
    section = config.section("mollow")
    params = MollowParams.from_energies(section["gamma_energy"], section["rabi_energy"])
    grid = GridSpec.symmetric(section["half_width"], section["step"])
    spectrum = mollow_spectrum(params, grid)
    if section["resolution"] > 0:
        spectrum = broaden_spectrum(spectrum, section["resolution"])
    save_spectrum(spectrum, run.path("mollow.csv"))
    run.plotted("mollow.csv", "density (1/µeV)", "energy (µeV)")
    peaks = _triplet_peaks(spectrum)
    run.summary.update(
        peak_positions_uev=peaks,
        peak_separations_uev=list(np.diff(peaks)),
        rabi_frequency_ghz=rabi_energy_to_frequency(section["rabi_energy"]),
        integral=spectrum.integral(),
    )
    if section["weak_drive"]:
        weak = weak_drive_spectrum(_emitter(config), grid)
        save_spectrum(weak, run.path("weak_drive.csv"))
        run.plotted("weak_drive.csv", "density (1/µeV)", "energy (µeV)")
        run.summary["weak_drive_linewidth_uev"] = t2_to_linewidth(config.get("emitter", "t2"))
    return EXIT_OK


def cmd_purcell(run: Run) -> int:
    """Purcell model through measured lifetime-versus-detuning points"""
    config = run.config
    section = config.section("purcell")
    result = fit_purcell(parse_points(section["points"]), section["kappa"], section["kappa_free"])
    result.write_report(run.path("purcell_fit.txt"))
    values = result.parameters
    cavity = CavityParams.from_kappa(values["kappa"], values["f_eff"], values["t1_off"])
    detunings = GridSpec.symmetric(section["half_width"], section["step"]).values()
    save_columns(run.path("purcell.csv"), PURCELL_MAGIC, ("detuning_uev", "t1_ps"),
                 (detunings, purcell_lifetime(detunings, cavity)))
    run.plotted("purcell.csv", "T1 (ps)", "detuning (µeV)")
    run.summary.update(result.to_dict())
    run.summary["enhancement_ratio"] = result.derived["enhancement_ratio"]
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_mc(run: Run) -> int:
    """Quantum-jump click streams, optionally routed through HBT or MZ optics"""
    config = run.config
    section = config.section("mc")
    route = section["route"]
    if route not in ("none", "hbt", ORTHOGONAL, PARALLEL):
        raise ConfigError(f"route must be none, hbt, {ORTHOGONAL} or {PARALLEL}, got {route!r}", "mc.route")
    emitter, drive = _emitter(config), _drive(config)
    cfg = TrajectoryConfig(
        emitter,
        drive,
        section["duration"],
        seed=config.seed,
        time_step=section["time_step"] or None,
        batches=section["batches"],
        workers=section["workers"],
    )
    source = simulate_clicks(cfg)
    if route == "none":
        streams = [source]
    elif route == "hbt":
        streams = list(split_stream(source, section["split"], config.seed + 1))
    else:
        streams = list(simulate_mz(source, _interferometer(config), route, config.seed + 1, t2=emitter.t2))
    save_clicks(streams, run.path("clicks.txt"))
    waits = waiting_times(source)
    run.summary.update(
        emissions=len(source),
        clicks_per_channel={str(s.channel): len(s) for s in streams},
        rate_per_ns=1000.0 * source.rate,
        expected_rate_per_ns=1000.0 * emission_rate(emitter, drive),
        mean_waiting_time_ps=float(np.mean(waits)) if waits.size else math.nan,
        time_step_ps=cfg.time_step,
    )
    return EXIT_OK


def cmd_correlate(run: Run) -> int:
    """Coincidence histogram and normalised g2 of a click file"""
    config = run.config
    section = config.section("correlate")
    if not section["input"]:
        raise ConfigError("no click file given", "correlate.input")
    streams = load_click_channels(section["input"])
    a, b = section["channel_a"], section["channel_b"]
    for channel in (a, b):
        if channel not in streams:
            raise ClickStreamError(f"{section['input']}: no events on channel {channel}")
    exclude = section["exclude_zero_delay"] or a == b
    histogram = correlate_clicks(
        streams[a], streams[b], section["bin_width"], section["window"], exclude, section["workers"]
    )
    save_histogram(histogram, run.path("histogram.csv"))
    run.plotted("histogram.csv", "coincidences")
    run.summary.update(coincidences=histogram.total, bins=len(histogram.counts), autocorrelation=a == b)
    if histogram.normalization is not None:
        curve = normalize_histogram(histogram)
        save_curve(curve, run.path("g2_measured.csv"))
        run.plotted("g2_measured.csv", "g2")
        run.summary.update(normalization=histogram.normalization, g2_zero=curve.value_at(0.0))
    return EXIT_OK


def _load_correlation(path):
    """Histogram or curve, whichever the file header announces"""
    magic = read_metadata(path)["format"]
    if magic == HISTOGRAM_MAGIC:
        return load_histogram(path)
    if magic == CURVE_MAGIC:
        return load_curve(path)
    raise FileFormatError(f"expected {HISTOGRAM_MAGIC} or {CURVE_MAGIC}, found {magic}", Path(path), 1)


def _as_curve(data):
    return normalize_histogram(data) if isinstance(data, Histogram) else data


def _model_start(config: RunConfig) -> dict:
    start = {
        "t1": config.get("emitter", "t1"),
        "t2": config.get("emitter", "t2"),
        "rabi_energy": config.get("drive", "rabi_energy"),
        "rho": config.get("instrument", "rho"),
    }
    start.update({k: v for k, v in config.section("interferometer").items()})
    return start


def cmd_fit(run: Run) -> int:
    """Fit g2, interferometer or spectrum data and report the parameters"""
    config = run.config
    section = config.section("fit")
    kind = section["kind"]
    if not section["data"]:
        raise ConfigError("no data file given", "fit.data")
    free = parse_list(section["free"]) or (HOM_FREE if kind == "hom" else G2_FREE)
    start = _model_start(config)
    if kind == "g2":
        start = {k: start[k] for k in ("t1", "t2", "rabi_energy", "rho")}
        result = fit_g2(_load_correlation(section["data"]), _irf(config), free, start, budget=section["budget"])
    elif kind == "hom":
        if not section["data_parallel"]:
            raise ConfigError("hom fits need the co-polarised curve", "fit.data_parallel")
        cross = _load_correlation(section["data"])
        parallel = _load_correlation(section["data_parallel"])
        # joint fits need a common scale, so histograms are normalised first
        if isinstance(cross, Histogram) or isinstance(parallel, Histogram):
            cross, parallel = _as_curve(cross), _as_curve(parallel)
        result = fit_hom(cross, parallel, _irf(config), free, start, budget=section["budget"])
    elif kind == "mollow":
        if read_metadata(section["data"])["format"] != SPECTRUM_MAGIC:
            raise FileFormatError(f"mollow fits need a {SPECTRUM_MAGIC} file", Path(section["data"]), 1)
        result = fit_mollow(load_spectrum(section["data"]), budget=section["budget"])
    else:
        raise ConfigError(f"kind must be g2, hom or mollow, got {kind!r}", "fit.kind")
    result.write_report(run.path("fit_report.txt"))
    run.summary.update(result.to_dict())
    if not result.converged:
        logger.warning("%s fit did not converge within %d evaluations", kind, result.budget)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


CONVERSIONS = {
    "energy": (energy_to_frequency, "µeV", "GHz"),
    "frequency": (frequency_to_energy, "GHz", "µeV"),
    "rabi": (rabi_energy_to_frequency, "µeV", "GHz (Omega/2pi)"),
    "linewidth": (linewidth_to_t2, "µeV", "ps (T2)"),
    "t2": (t2_to_linewidth, "ps", "µeV (FWHM)"),
}


def cmd_convert(kind: str, values, stream=None) -> int:
    """Print one converted value per input, taking stdin when no values are given"""
    function, unit_in, unit_out = CONVERSIONS[kind]
    if not values:
        values = [line.strip() for line in (stream or sys.stdin) if line.strip()]
    for text in values:
        try:
            value = float(text)
        except ValueError:
            raise ParameterError(f"cannot convert {text!r}: not a number") from None
        print(f"{value!r} {unit_in}\t{function(value)!r} {unit_out}")
    return EXIT_OK


COMMANDS = {
    "g2": cmd_g2,
    "hom": cmd_hom,
    "visibility": cmd_visibility,
    "mollow": cmd_mollow,
    "purcell": cmd_purcell,
    "mc": cmd_mc,
    "correlate": cmd_correlate,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with run settings")
    common.add_argument("--seed", type=int, help="global random seed")
    common.add_argument("--out", help="output directory")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a setting; section.key=value, or key=value for this subcommand's section",
    )
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging, repeatable")
    common.add_argument("--gnuplot", action="store_true", help="write a gnuplot script per curve")

    parser = argparse.ArgumentParser(
        prog="rfstat",
        description="Photon statistics of a resonantly driven two-level emitter",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for name, function in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=function.__doc__)
    convert = subparsers.add_parser("convert", help=cmd_convert.__doc__)
    convert.add_argument("-v", "--verbose", action="count", default=0)
    convert.add_argument("kind", choices=sorted(CONVERSIONS))
    convert.add_argument("values", nargs="*", help="values to convert, default stdin")
    return parser


def _configure_logging(verbosity: int):
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def resolve_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config.set("run", "seed", args.seed)
    if args.out is not None:
        config.set("run", "out", args.out)
    section = args.command if args.command in DEFAULTS else None
    for override in args.overrides:
        config.apply_override(override, section)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == "convert":
            return cmd_convert(args.kind, args.values)
        config = resolve_config(args)
        run = Run(config, args.gnuplot)
        status = COMMANDS[args.command](run)
        run.finish()
        return status
    except (FileFormatError, ClickStreamError, DegenerateDataError, OSError) as error:
        logger.error("%s", error)
        return EXIT_IO
    except (ConfigError, ParameterError, NumericalError) as error:
        logger.error("%s", error)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
