from typing import Dict, List, Optional

import numpy as np
from pydantic import Field

from chiralwalk.config import settings
from chiralwalk.dynamics import first_maximum, transfer_probability
from chiralwalk.experiments.base import ExperimentConfig, ExperimentReport, OutputWriter, ratio
from chiralwalk.systems.switch import build_switch, switch_efficiency, trap_rate_sensitivity
from chiralwalk.utils.logger import logger


class SwitchConfig(ExperimentConfig):
    theta: float = Field(np.pi / 2, ge=-np.pi, le=np.pi)
    arm_length: int = Field(2, ge=1)
    trap: bool = Field(True, description="Also run with sinks on E and F")
    trap_rate: float = Field(default_factory=lambda: settings.SWITCH_TRAP_RATE, ge=0.0)
    efficiency_horizon: float = Field(default_factory=lambda: 10.0 * settings.SWITCH_HORIZON, gt=0.0)
    sensitivity_rates: List[float] = Field(default_factory=lambda: [0.25, 0.5, 0.8, 1.0, 2.0, 4.0])


class SwitchReport(ExperimentReport):
    experiment: str = "switch"
    theta: float
    first_max_E: float
    first_max_F: float
    first_max_time: float
    achiral_first_max: float
    enhancement: float = Field(..., description="First maximum of P_SE relative to theta = 0")
    suppression: float = Field(..., description="Same ratio at -theta")
    tau_half: Optional[float] = None
    efficiency: Optional[float] = None
    trap_rate_sensitivity: Dict[str, float] = Field(default_factory=dict)


class SwitchExperiment:
    """Routing through the switch: unitary curves, then the trapped efficiency"""

    @staticmethod
    def run(config: SwitchConfig) -> SwitchReport:
        logger.info(f"Switch: theta={config.theta:.4f}, arms={config.arm_length}, trap={config.trap}")
        writer = OutputWriter("switch", config)
        grid = config.time_grid(settings.SWITCH_HORIZON)

        def unitary_peaks(theta: float):
            system = build_switch(theta, config.arm_length, horizon=grid[-1], grid_points=grid.size)
            traj = system.run(grid)
            p_e = transfer_probability(traj, system.graph.marks["E"])
            p_f = transfer_probability(traj, system.graph.marks["F"])
            return p_e, p_f, first_maximum(p_e, grid), first_maximum(p_f, grid)

        p_e, p_f, peak_e, peak_f = unitary_peaks(config.theta)
        p_e0, _, peak_e0, _ = unitary_peaks(0.0)
        _, _, peak_rev, _ = unitary_peaks(-config.theta)

        writer.curves(
            "switch_unitary",
            {"t": grid, "P_SE": p_e, "P_SF": p_f, "P_SE_achiral": p_e0},
        )

        tau_half = efficiency = None
        sensitivity: Dict[str, float] = {}
        if config.trap:
            trapped = build_switch(
                config.theta,
                config.arm_length,
                with_traps=True,
                trap_rate=config.trap_rate,
                horizon=grid[-1],
                grid_points=grid.size,
            )
            traj = trapped.run(grid)
            writer.curves(
                "switch_trapped",
                {
                    "t": grid,
                    "sink_E": transfer_probability(traj, trapped.sink_index("sink_E")),
                    "sink_F": transfer_probability(traj, trapped.sink_index("sink_F")),
                },
            )
            tau_half = trapped.half_arrival_time(traj)
            efficiency = switch_efficiency(trapped, config.efficiency_horizon)
            values = trap_rate_sensitivity(
                config.sensitivity_rates, config.theta, config.arm_length, config.efficiency_horizon
            )
            sensitivity = {f"{rate:g}": value for rate, value in zip(config.sensitivity_rates, values)}

        report = SwitchReport(
            theta=config.theta,
            first_max_E=peak_e.value,
            first_max_F=peak_f.value,
            first_max_time=peak_e.time,
            achiral_first_max=peak_e0.value,
            enhancement=ratio(peak_e.value, peak_e0.value),
            suppression=ratio(peak_rev.value, peak_e0.value),
            tau_half=tau_half,
            efficiency=efficiency,
            trap_rate_sensitivity=sensitivity,
        )
        logger.info(
            f"Switch: enhancement={report.enhancement:.4f}, suppression={report.suppression:.4f}, "
            f"efficiency={efficiency}"
        )
        return writer.finish(report)
