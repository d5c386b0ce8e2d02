"""Monte Carlo performance studies of layered aerial/satellite networks.

One shared radio parameter table drives four scenario simulators: ad-hoc
aerial routing latency, cell-free energy efficiency, satellite coverage
with platform relays, and integrated access/backhaul capacity.  Each
emits a deterministic, seed-reproducible CSV result table.
"""

from .adhoc import AdhocConfig, RouteStrategy, sweep_latency
from .cellfree import AssociationMode, CellfreeConfig, simulate_ee_cdf
from .coverage import CoverageConfig, CoverageMode, sweep_coverage
from .harness import EmpiricalCdf, ResultTable, empirical_cdf, run_trials, trial_rng
from .iab import IabConfig, build_topology, simulate
from .radio import RadioTable

__version__ = "0.1.0"

__all__ = [
    "AdhocConfig",
    "AssociationMode",
    "CellfreeConfig",
    "CoverageConfig",
    "CoverageMode",
    "EmpiricalCdf",
    "IabConfig",
    "RadioTable",
    "ResultTable",
    "RouteStrategy",
    "__version__",
    "build_topology",
    "empirical_cdf",
    "run_trials",
    "simulate",
    "simulate_ee_cdf",
    "sweep_coverage",
    "sweep_latency",
    "trial_rng",
]
