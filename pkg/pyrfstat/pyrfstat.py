"""PyRFStat - photon statistics of a resonantly driven two-level emitter

PhotonCurve wraps a CorrelationSystem for simulation, plotting and fitting in
the same way for every model: g2, Bloch populations, interferometer
correlations, Mollow spectra and Purcell lifetimes.
"""

import logging

import lmfit
import matplotlib.pyplot as plt
import numpy as np

from pyrfstat.errors import ParameterError
from pyrfstat.instrument import mix_background
from pyrfstat.systems import *
from pyrfstat.systems.analyticalsystems.interferometer_systems import hom_raw_asymptote
from pyrfstat.units import InterferometerParams, energy_to_frequency

logger = logging.getLogger(__name__)

rfs_plot_style = {
    "axis_label_size": 12,
    "axis_label_font": "DejaVu Sans",
    "title_size": 12,
    "title_font": "DejaVu Sans",
    "x_tick_label_font_size": 10,
    "y_tick_label_font_size": 10,
    "legend_font_size": 9,
    "dpi": 300,
    "x_axis_labelpad": None,
    "y_axis_labelpad": None,
    "title_labelpad": None,
    "fig_size": (5 * 1.2, 4 * 1.2),
}

# Human readable shortcuts accepted by PhotonCurve
SYSTEM_SHORTCUTS = {
    "g2": System_analytical_g2,
    "g2 kinetic": System_kinetic_g2,
    "population": System_analytical_population,
    "population kinetic": System_kinetic_population,
    "hom cross": System_analytical_hom_cross,
    "hom parallel": System_analytical_hom_parallel,
    "mollow": System_analytical_mollow,
    "purcell": System_analytical_purcell,
}


class Readout:
    """
    Class to change the system simulation readouts

    Readout is a container for static functions that change the system
    readout when passed as an argument to add_curve or query. These functions
    take the system parameters and the raw y-values, and return an axis label
    together with the transformed values.
    """

    @staticmethod
    def background_mixed(system_parameters: dict, y):
        """
        g2 as measured with a fraction 1 - rho of uncorrelated background

        Parameters
        ----------
        system_parameters : dict
            Dictionary of system parameters, must hold rho
        y : float or array-like
            System simulation or query values

        Returns
        -------
        tuple
            Axis label and the transformed values
        """
        return "Measured g2", mix_background(y, system_parameters["rho"])

    @staticmethod
    def frequency_axis(system_parameters: dict, y):
        """Spectral density per GHz instead of per µeV"""
        return "Density (1/GHz)", np.asarray(y) / energy_to_frequency(1.0)

    @staticmethod
    def renormalized(system_parameters: dict, y):
        """Interferometer correlation divided by its large-delay asymptote"""
        r1, r2 = system_parameters["r1"], system_parameters["r2"]
        ifo = InterferometerParams(r1, 1.0 - r1, r2, 1.0 - r2, system_parameters["delay"])
        return "Normalised coincidences", np.asarray(y) / hom_raw_asymptote(ifo)


class _Curve:
    """A simulated curve: coordinates and a legend name"""

    def __init__(self, xcoords: np.array, ycoords: np.array, series_name: str = ""):
        self.xcoords = xcoords
        self.ycoords = ycoords
        self.name = series_name


class PhotonCurve:
    """
    PhotonCurve class, used to simulate, plot and fit systems

    Parameters
    ----------
    correlation_system : CorrelationSystem or str
        A CorrelationSystem subclass or one of the shortcuts in
        SYSTEM_SHORTCUTS, such as 'g2' or 'hom parallel'.
    """

    plot_solution_colours = list("krgbycm")

    def __init__(self, correlation_system):
        if isinstance(correlation_system, str):
            key = " ".join(correlation_system.lower().split())
            if key not in SYSTEM_SHORTCUTS:
                raise ParameterError(
                    f"invalid system {correlation_system!r}, try one of: {', '.join(SYSTEM_SHORTCUTS)}"
                )
            self.system = SYSTEM_SHORTCUTS[key]()
        elif isinstance(correlation_system, type) and issubclass(correlation_system, CorrelationSystem):
            self.system = correlation_system()
        elif isinstance(correlation_system, CorrelationSystem):
            self.system = correlation_system
        else:
            raise ParameterError("pass a CorrelationSystem or a system shortcut string")
        self.curves = []
        self.fig = None
        self.axes = None
        self._last_custom_readout = None
        self._last_known_changing_parameter = "X"
        self._limits = [np.inf, -np.inf, np.inf, -np.inf]

    def query(self, parameters: dict, readout=None):
        """
        Query the system

        Parameters
        ----------
        parameters : dict
            System parameters; at most one may be array-like
        readout : func or None
            A static member of Readout or a function with the same signature

        Returns
        -------
        float or array-like
            Readout of the system
        """
        if readout is None:
            return self.system.query(parameters)
        return readout(parameters, self.system.query(parameters))[1]

    def _initialize_plot(self):
        if self.fig is None:
            self.fig, self.axes = plt.subplots(nrows=1, ncols=1, figsize=rfs_plot_style["fig_size"])
            self.axes.grid(True, which="both")
            plt.tight_layout(rect=(0.05, 0.05, 0.95, 0.92))

    def _extend_limits(self, x, y):
        self._limits = [
            np.nanmin([self._limits[0], np.nanmin(x)]),
            np.nanmax([self._limits[1], np.nanmax(x)]),
            np.nanmin([self._limits[2], np.nanmin(y)]),
            np.nanmax([self._limits[3], np.nanmax(y)]),
        ]

    def add_curve(self, parameters: dict, name: str = None, readout=None):
        """
        Add a simulated curve to the plot

        Parameters
        ----------
        parameters : dict
            System parameters with exactly one array-like entry, the x axis
        name : str, optional
            Legend entry
        readout : Readout.function, optional
            Transformation of the system readout
        """
        changing_parameters = self.system._find_changing_parameters(parameters)
        if changing_parameters is None or len(changing_parameters) != 1:
            raise ParameterError("add_curve needs exactly 1 changing parameter")
        self._initialize_plot()
        x_values = np.asarray(parameters[changing_parameters[0]], dtype=float)
        y_values = self.system.query(parameters)
        if readout is not None:
            self._last_custom_readout, y_values = readout(parameters, y_values)
        curve = _Curve(x_values, np.asarray(y_values), name or f"Curve {len(self.curves) + 1}")
        self.curves.append(curve)
        self._last_known_changing_parameter = changing_parameters[0]
        colour = self.plot_solution_colours[(len(self.curves) - 1) % len(self.plot_solution_colours)]
        self.axes.plot(curve.xcoords, curve.ycoords, colour + "-", label=curve.name, linewidth=2)
        self._extend_limits(curve.xcoords, curve.ycoords)

    def add_scatter(self, xcoords, ycoords):
        """
        Add measured points to the plot

        Parameters
        ----------
        xcoords : list or array-like
        ycoords : list or array-like
        """
        self._initialize_plot()
        self.axes.scatter(xcoords, ycoords, s=8)
        self._extend_limits(np.asarray(xcoords, dtype=float), np.asarray(ycoords, dtype=float))

    def show_plot(
        self,
        title: str = "System simulation",
        xlabel: str = None,
        ylabel: str = None,
        min_x: float = None,
        max_x: float = None,
        min_y: float = None,
        max_y: float = None,
        log_x_axis: bool = False,
        log_y_axis: bool = False,
        rfs_plot_style: dict = rfs_plot_style,
        png_filename: str = None,
        svg_filename: str = None,
        show_legend: bool = True,
        show: bool = True,
    ):
        """
        Show the PhotonCurve plot

        Parameters
        ----------
        title : str
            Plot title
        xlabel, ylabel : str, optional
            Axis labels, defaulting to the changing parameter and the readout
        min_x, max_x, min_y, max_y : float, optional
            Axis limits, defaulting to the data range
        log_x_axis, log_y_axis : bool
            Logarithmic axes
        png_filename, svg_filename : str, optional
            Files the figure is written to
        show : bool
            Open the interactive window; pass False for headless use
        """
        self._initialize_plot()
        x_low, x_high, y_low, y_high = self._limits
        x_low = x_low if min_x is None else min_x
        x_high = x_high if max_x is None else max_x
        y_low = min(0.0, y_low) if min_y is None else min_y
        y_high = y_high * 1.1 if max_y is None else max_y
        if np.isfinite([x_low, x_high]).all() and x_high > x_low:
            self.axes.set_xlim(x_low, x_high)
        if np.isfinite([y_low, y_high]).all() and y_high > y_low:
            self.axes.set_ylim(y_low, y_high)
        if log_x_axis:
            self.axes.set_xscale("log", nonpositive="clip")
        if log_y_axis:
            self.axes.set_yscale("log", nonpositive="clip")

        if xlabel is None:
            xlabel = self._last_known_changing_parameter
        if ylabel is None:
            ylabel = self._last_custom_readout or self.system.default_readout
        label_style = dict(fontsize=rfs_plot_style["axis_label_size"], fontname=rfs_plot_style["axis_label_font"])
        self.axes.set_xlabel(xlabel, labelpad=rfs_plot_style["x_axis_labelpad"], **label_style)
        self.axes.set_ylabel(ylabel, labelpad=rfs_plot_style["y_axis_labelpad"], **label_style)
        self.axes.set_title(
            title,
            fontsize=rfs_plot_style["title_size"],
            fontname=rfs_plot_style["title_font"],
            pad=rfs_plot_style["title_labelpad"],
        )
        if show_legend and self.curves:
            self.axes.legend(prop={"size": rfs_plot_style["legend_font_size"]})
        self.axes.tick_params(axis="x", labelsize=rfs_plot_style["x_tick_label_font_size"])
        self.axes.tick_params(axis="y", labelsize=rfs_plot_style["y_tick_label_font_size"])

        if png_filename is not None:
            self.fig.savefig(png_filename, dpi=rfs_plot_style["dpi"], metadata={"Title": "PyRFStat plot"})
        if svg_filename is not None:
            self.fig.savefig(svg_filename, metadata={"Title": "PyRFStat plot"})
        if show:
            plt.show()

    def fit(self, system_parameters: dict, to_fit: dict, ycoords: np.array, bounds: dict = None):
        """
        Fit system parameters to data points

        Parameters
        ----------
        system_parameters : dict
            Fixed system parameters including the array-like x axis
        to_fit : dict
            Starting values of the parameters to fit
        ycoords : np.array
            Observations at the x values in system_parameters
        bounds : dict, optional
            (min, max) tuples indexed by parameter name

        Returns
        -------
        tuple (dict, dict)
            Best-fit system parameters, and the standard errors of the fitted
            ones
        """
        system_parameters_copy = dict(system_parameters)
        if len(to_fit) == 0:
            raise ParameterError("nothing to fit, put parameters to fit into to_fit")
        known = set(system_parameters_copy) | set(to_fit)
        missing = sorted(set(self.system.arguments) - known)
        if missing:
            raise ParameterError(f"missing system parameters: {', '.join(missing)}")
        if bounds is None:
            bounds = {}
        params = lmfit.Parameters()
        for varname, value in to_fit.items():
            bnd_min, bnd_max = bounds.get(varname, (-np.inf, np.inf))
            params.add(varname, value=value, min=bnd_min, max=bnd_max)

        lmmini = lmfit.Minimizer(self._residual, params, fcn_args=(system_parameters_copy, np.asarray(ycoords)))
        result = lmmini.minimize()
        for name in to_fit:
            system_parameters_copy[name] = result.params[name].value
        logger.info("fitted %s: %s", type(self.system).__name__,
                    ", ".join(f"{p}={result.params[p].value:.6g}" for p in result.params))
        return (
            system_parameters_copy,
            dict((p, result.params[p].stderr) for p in result.params),
        )

    def _residual(self, params, system_parameters: dict, y: np.array):
        for value in params:
            system_parameters[value] = float(params[value])
        return self.system.query(system_parameters) - y
