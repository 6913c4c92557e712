# type: ignore

from importlib.metadata import PackageNotFoundError, version  # pragma: no cover

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = __name__
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

from immigration.distributions import EtaLaw, Family, InterarrivalLaw
from immigration.kernels import (
    BirthDeath,
    DeterministicTable,
    Indicator,
    KernelSpec,
    ScaledExpDecay,
    ScaledTable,
    SpikeTrain,
)
from immigration.renewal import build_stationary_window, shift_window, simulate_forward
from immigration.process import Stationary, Transient, eval_stationary, eval_transient, fdd_sample
from immigration.diagnostics import Verdict, convergence_test, dri_mean_check, dri_path_check
import immigration.utils.logging_utils

__all__ = [
    "EtaLaw",
    "Family",
    "InterarrivalLaw",
    "KernelSpec",
    "DeterministicTable",
    "Indicator",
    "ScaledExpDecay",
    "ScaledTable",
    "BirthDeath",
    "SpikeTrain",
    "simulate_forward",
    "build_stationary_window",
    "shift_window",
    "Transient",
    "Stationary",
    "eval_transient",
    "eval_stationary",
    "fdd_sample",
    "Verdict",
    "dri_mean_check",
    "dri_path_check",
    "convergence_test",
    "__version__",
]
