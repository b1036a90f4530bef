"""Single-hop vs. two-hop wearable link exposure simulator."""

from .exposure import (
    Emitter,
    ExposureLimits,
    ExposureSample,
    TissueProperties,
    aggregate_exposure,
    compliance_report,
    power_density,
    reflection_coefficient,
    sar_from_pd,
)
from .geometry import GridSpec, NodePosition, angle_between, distance, grid_cells
from .propagation import AntennaSpec, LinkBudget, RadioConfig, link_budget, path_loss
from .protocol import (
    PowerControlSettings,
    RouteMode,
    Scene,
    Traffic,
    choose_route,
    equalize_rates,
    run_protocol,
)
from .sweep import SweepKind, SweepScenario, argmax_cell, empirical_cdf, run_sweep

__version__ = "0.1.0"
