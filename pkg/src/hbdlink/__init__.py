"""Outage and finite-SNR diversity analysis of a hybrid-duplex air-to-ground link.

The network has one full-duplex ground station exchanging data with two
half-duplex aerial stations over Rician fading. :mod:`hbdlink.outage` holds
the closed-form outage series, :mod:`hbdlink.diversity` their SNR slopes,
:mod:`hbdlink.montecarlo` an independent simulator and
:mod:`hbdlink.sweep` / :mod:`hbdlink.cli` the grid driver.
"""

from .diversity import RateMode, df_fixed, df_system, df_variable
from .montecarlo import mc_outage
from .outage import (
    Detector,
    Mode,
    Node,
    NonConvergent,
    SeriesControl,
    outage_as2_ii,
    outage_as2_sic,
    outage_gs_hbd,
    outage_hd,
    outage_system,
)
from .scenario import ScenarioConfig, default_scenario, load_scenario, load_scenarios

__all__ = [
    "Detector",
    "Mode",
    "Node",
    "NonConvergent",
    "RateMode",
    "ScenarioConfig",
    "SeriesControl",
    "default_scenario",
    "df_fixed",
    "df_system",
    "df_variable",
    "load_scenario",
    "load_scenarios",
    "mc_outage",
    "outage_as2_ii",
    "outage_as2_sic",
    "outage_gs_hbd",
    "outage_hd",
    "outage_system",
]
