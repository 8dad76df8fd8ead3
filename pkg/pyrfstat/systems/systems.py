import logging
from inspect import signature

import numpy as np

from pyrfstat.errors import ParameterError
from pyrfstat.systems import analyticalsystems, kineticsystems

logger = logging.getLogger(__name__)


class CorrelationSystem:
    """
    CorrelationSystem class, wrapping one model of the emitter or its optics

    A CorrelationSystem evaluates a model function over a dictionary of
    parameters. One parameter may be array-valued, in which case the model is
    evaluated once per element, giving the curve a PhotonCurve draws or fits.

    Parameters
    ----------
    correlation_system : func
        Model function taking the system parameters as keyword arguments
    analytical : bool
        The function returns the readout directly; otherwise it returns a dict
        of quantities from which default_readout is taken (default = False)
    """

    analytical = False
    arguments = []
    default_readout = None
    optional_arguments = ()

    def __init__(self, correlation_system: callable, analytical: bool = False):
        self._system = correlation_system
        self.analytical = analytical
        self.arguments = list(signature(correlation_system).parameters.keys())

        if not analytical and "interval" in self.arguments:
            self.arguments.remove("interval")

    def _find_changing_parameters(self, params: dict):
        """
        Names of the array-valued parameters

        Parameters
        ----------
        params : dict
            Parameters defining the system to be simulated.

        Returns
        -------
        list or None
            Keys of params holding arrays or lists, None if every parameter is
            a scalar
        """
        changing_list = [p for p in params if isinstance(params[p], (np.ndarray, list))]
        return changing_list or None

    def _evaluate(self, parameters: dict):
        if self.analytical:
            return self._system(**parameters)
        return self._system(**parameters)[self.default_readout]

    def query(self, parameters: dict):
        """
        Query a system

        Parameters
        ----------
        parameters : dict
            Parameters defining the system to be simulated; at most one may be
            an array or list

        Returns
        -------
        float or np.ndarray
            The default readout at a single point, or one value per element of
            the changing parameter
        """
        parameters = {k: v for k, v in parameters.items() if k not in self.optional_arguments}
        missing = sorted(set(self.arguments) - set(parameters.keys()))
        if missing:
            raise ParameterError(f"missing system parameters: {', '.join(missing)}")
        unknown = sorted(set(parameters.keys()) - set(self.arguments) - {"interval"})
        if unknown:
            raise ParameterError(f"unknown system parameters: {', '.join(unknown)}")

        changing_parameters = self._find_changing_parameters(parameters)
        if changing_parameters is None:
            return self._evaluate(parameters)
        if len(changing_parameters) > 1:
            raise ParameterError(f"only 1 parameter may change, currently changing: {changing_parameters}")
        name = changing_parameters[0]
        values = parameters[name]
        results = np.empty(len(values))
        for i in range(results.shape[0]):
            tmp_params = dict(parameters)
            tmp_params[name] = values[i]
            results[i] = self._evaluate(tmp_params)
        logger.debug("%s evaluated at %d values of %s", type(self).__name__, len(values), name)
        return results


class _BackgroundMixedSystem(CorrelationSystem):
    """
    Correlation systems that carry an optional signal fraction rho

    The model itself is the ideal emitter; rho is only read by
    Readout.background_mixed.
    """

    optional_arguments = ("rho",)


class System_analytical_g2(_BackgroundMixedSystem):
    def __init__(self):
        super().__init__(analyticalsystems.system01_driven_tls__t1_t2_rabi_energy_tau__g2, analytical=True)
        self.default_readout = "g2"


class System_kinetic_g2(_BackgroundMixedSystem):
    def __init__(self):
        super().__init__(kineticsystems.system02_bloch_regression__t1_t2_rabi_energy_tau__g2)
        self.default_readout = "g2"


class System_analytical_population(CorrelationSystem):
    def __init__(self):
        super().__init__(analyticalsystems.system02_driven_tls__t1_t2_rabi_energy__ee, analytical=True)
        self.default_readout = "ee"


class System_kinetic_population(CorrelationSystem):
    def __init__(self):
        super().__init__(kineticsystems.system01_bloch__t1_t2_rabi_energy__ee)
        self.default_readout = "ee"


class System_analytical_hom_cross(CorrelationSystem):
    def __init__(self):
        super().__init__(
            analyticalsystems.system05_hom_cross__t1_t2_rabi_energy_r1_r2_delay_tau__g2, analytical=True
        )
        self.default_readout = "g2"


class System_analytical_hom_parallel(CorrelationSystem):
    def __init__(self):
        super().__init__(
            analyticalsystems.system06_hom_parallel__t1_t2_rabi_energy_r1_r2_delay_overlap_tau__g2,
            analytical=True,
        )
        self.default_readout = "g2"


class System_analytical_mollow(CorrelationSystem):
    def __init__(self):
        super().__init__(analyticalsystems.system03_mollow__linewidth_rabi_energy_energy__density, analytical=True)
        self.default_readout = "density"


class System_analytical_purcell(CorrelationSystem):
    def __init__(self):
        super().__init__(analyticalsystems.system04_purcell__detuning_kappa_f_eff_t1_off__t1, analytical=True)
        self.default_readout = "t1"
