"""Route selection and exposure-driven transmit power control.

Normal traffic goes through the relay when the direct Tx->Rx distance is
longer than Tx->relay; emergency traffic always goes direct. On a relayed
route the transmit power is backed off as far as possible while the
two-hop rate still matches the direct-link rate at full power.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .exposure import (
    Emitter,
    ExposureLimits,
    ExposureSample,
    TissueProperties,
    aggregate_exposure,
)
from .geometry import NodePosition, distance
from .propagation import (
    RELAY_ANTENNA,
    RX_ANTENNA,
    TX_ANTENNA,
    AntennaSpec,
    RadioConfig,
    link_budget,
)


class Traffic(str, enum.Enum):
    NORMAL = "normal"
    EMERGENCY = "emergency"


class RouteMode(str, enum.Enum):
    SINGLE_HOP = "single_hop"
    MULTI_HOP = "multi_hop"


class RouteReason(str, enum.Enum):
    DISTANCE_RULE = "distance_rule"
    EMERGENCY = "emergency"
    NO_RELAY = "no_relay"


BACKOFF_NODES = ("both", "tx", "relay")


@dataclass(frozen=True)
class PowerControlSettings:
    rate_tolerance: float = 1e3  # bit/s
    power_step_floor: float = 0.01  # dB
    max_backoff: float = 120.0  # dB, lower end of the search
    backoff_nodes: str = "both"
    tdd_halving: bool = False

    def __post_init__(self):
        if self.rate_tolerance < 0:
            raise ValueError(f"rate_tolerance must be >= 0, got {self.rate_tolerance}")
        if not self.power_step_floor > 0:
            raise ValueError(f"power_step_floor must be > 0, got {self.power_step_floor}")
        if not self.max_backoff > 0:
            raise ValueError(f"max_backoff must be > 0, got {self.max_backoff}")
        if self.backoff_nodes not in BACKOFF_NODES:
            raise ValueError(
                f"backoff_nodes must be one of {BACKOFF_NODES}, got {self.backoff_nodes!r}"
            )

    @property
    def scales(self) -> tuple[float, float]:
        """(tx, relay) multipliers applied to the dB power offset."""
        return {
            "both": (1.0, 1.0),
            "tx": (1.0, 0.0),
            "relay": (0.0, 1.0),
        }[self.backoff_nodes]

    @property
    def multi_hop_rate_factor(self) -> float:
        return 0.5 if self.tdd_halving else 1.0


@dataclass(frozen=True)
class Scene:
    tx: NodePosition
    rx: NodePosition
    relay: Optional[NodePosition] = None
    tx_power: float = 15.0  # dBm
    relay_power: float = 15.0  # dBm
    tx_antenna: AntennaSpec = TX_ANTENNA
    relay_antenna: AntennaSpec = RELAY_ANTENNA
    rx_antenna: AntennaSpec = RX_ANTENNA
    radio: RadioConfig = field(default_factory=RadioConfig)
    tissue: TissueProperties = field(default_factory=TissueProperties)
    limits: ExposureLimits = field(default_factory=ExposureLimits)
    alpha: float = 2.0
    cell_size_cm: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tx", NodePosition(*self.tx))
        object.__setattr__(self, "rx", NodePosition(*self.rx))
        if self.relay is not None:
            object.__setattr__(self, "relay", NodePosition(*self.relay))
        if self.tx == self.rx:
            raise ValueError(f"tx and rx share position {tuple(self.tx)}")
        if self.relay is not None and self.relay in (self.tx, self.rx):
            raise ValueError(f"relay at {tuple(self.relay)} coincides with tx or rx")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")

    def d(self, a: NodePosition, b: NodePosition) -> float:
        return distance(a, b, self.cell_size_cm)

    @property
    def direct_distance(self) -> float:
        return self.d(self.tx, self.rx)

    @property
    def relay_distance(self) -> float:
        return self.d(self.tx, self.relay)


@dataclass(frozen=True)
class RouteDecision:
    mode: RouteMode
    reason: RouteReason


@dataclass(frozen=True)
class PowerControlResult:
    original_power: float  # dBm, Tx
    reduced_power: float  # dBm, Tx
    original_relay_power: float
    reduced_relay_power: float
    offset_db: float
    reduction_fraction: float
    direct_rate: float
    multi_rate_before: float
    multi_rate_after: float
    exposure_before: ExposureSample
    exposure_after: ExposureSample
    reachable: bool = True


def choose_route(traffic: Traffic, scene: Scene) -> RouteDecision:
    if Traffic(traffic) is Traffic.EMERGENCY:
        return RouteDecision(RouteMode.SINGLE_HOP, RouteReason.EMERGENCY)
    if scene.relay is None:
        return RouteDecision(RouteMode.SINGLE_HOP, RouteReason.NO_RELAY)
    if scene.direct_distance <= scene.relay_distance:
        return RouteDecision(RouteMode.SINGLE_HOP, RouteReason.DISTANCE_RULE)
    return RouteDecision(RouteMode.MULTI_HOP, RouteReason.DISTANCE_RULE)


def direct_rate(scene: Scene, tx_power: Optional[float] = None) -> float:
    p = scene.tx_power if tx_power is None else tx_power
    return link_budget(
        p, scene.tx_antenna.gain, scene.rx_antenna.gain, scene.direct_distance, scene.radio
    ).rate


def multi_hop_rate(
    scene: Scene,
    tx_power: Optional[float] = None,
    relay_power: Optional[float] = None,
    rate_factor: float = 1.0,
) -> float:
    """Store-and-forward rate: the slower of Tx->relay and relay->Rx."""
    p_tx = scene.tx_power if tx_power is None else tx_power
    p_relay = scene.relay_power if relay_power is None else relay_power
    hop1 = link_budget(
        p_tx, scene.tx_antenna.gain, scene.relay_antenna.gain, scene.relay_distance, scene.radio
    )
    hop2 = link_budget(
        p_relay,
        scene.relay_antenna.gain,
        scene.rx_antenna.gain,
        scene.d(scene.relay, scene.rx),
        scene.radio,
    )
    return min(hop1.rate, hop2.rate) * rate_factor


def end_to_end_rate(decision: RouteDecision, scene: Scene, rate_factor: float = 1.0) -> float:
    if decision.mode is RouteMode.SINGLE_HOP:
        return direct_rate(scene)
    return multi_hop_rate(scene, rate_factor=rate_factor)


def single_hop_exposure(scene: Scene, tx_power: Optional[float] = None) -> ExposureSample:
    """Exposure at the Rx with the Tx as sole emitter, aimed at the Rx."""
    p = scene.tx_power if tx_power is None else tx_power
    emitters = [Emitter(scene.tx, p, scene.tx_antenna, scene.rx)]
    return aggregate_exposure(
        scene.rx, emitters, scene.tissue, scene.limits,
        scene.radio.frequency, scene.alpha, scene.cell_size_cm,
    )


def multi_hop_exposure(
    scene: Scene, tx_power: Optional[float] = None, relay_power: Optional[float] = None
) -> ExposureSample:
    """Exposure at the Rx with Tx (aimed at the relay) and relay both on air."""
    p_tx = scene.tx_power if tx_power is None else tx_power
    p_relay = scene.relay_power if relay_power is None else relay_power
    emitters = [
        Emitter(scene.tx, p_tx, scene.tx_antenna, scene.relay),
        Emitter(scene.relay, p_relay, scene.relay_antenna, scene.rx),
    ]
    return aggregate_exposure(
        scene.rx, emitters, scene.tissue, scene.limits,
        scene.radio.frequency, scene.alpha, scene.cell_size_cm,
    )


def equalize_rates(
    scene: Scene, settings: Optional[PowerControlSettings] = None
) -> PowerControlResult:
    """Back off transmit power until the two-hop rate just holds the direct rate.

    The dB offset is found by bisection on [-max_backoff, 0]; the result is
    the feasible end of the final interval, narrower than power_step_floor.
    """
    if scene.relay is None:
        raise ValueError("equalize_rates needs a relay in the scene")
    settings = settings or PowerControlSettings()
    s_tx, s_relay = settings.scales
    factor = settings.multi_hop_rate_factor

    target_rate = direct_rate(scene)
    target = target_rate - settings.rate_tolerance

    def rate_at(offset):
        return multi_hop_rate(
            scene,
            scene.tx_power + s_tx * offset,
            scene.relay_power + s_relay * offset,
            factor,
        )

    rate_before = rate_at(0.0)
    reachable = rate_before >= target
    if not reachable:
        offset = 0.0
    elif rate_at(-settings.max_backoff) >= target:
        offset = -settings.max_backoff
    else:
        lo, hi = -settings.max_backoff, 0.0
        while hi - lo > settings.power_step_floor:
            mid = 0.5 * (lo + hi)
            if rate_at(mid) >= target:
                hi = mid
            else:
                lo = mid
        offset = hi

    p_tx = scene.tx_power + s_tx * offset
    p_relay = scene.relay_power + s_relay * offset
    return PowerControlResult(
        original_power=scene.tx_power,
        reduced_power=p_tx,
        original_relay_power=scene.relay_power,
        reduced_relay_power=p_relay,
        offset_db=offset,
        reduction_fraction=1.0 - 10.0 ** (offset / 10.0),
        direct_rate=target_rate,
        multi_rate_before=rate_before,
        multi_rate_after=rate_at(offset),
        exposure_before=multi_hop_exposure(scene),
        exposure_after=multi_hop_exposure(scene, p_tx, p_relay),
        reachable=reachable,
    )


def run_protocol(
    traffic: Traffic,
    scene: Scene,
    settings: Optional[PowerControlSettings] = None,
) -> tuple[RouteDecision, Optional[PowerControlResult], ExposureSample]:
    """Route, rate-match and evaluate exposure at the Rx for one scene.

    Single-hop routes carry no power control result. If the relayed route
    cannot reach the direct rate even at full power, no backoff is applied
    and the full-power two-hop exposure is reported.
    """
    decision = choose_route(traffic, scene)
    if decision.mode is RouteMode.SINGLE_HOP:
        return decision, None, single_hop_exposure(scene)
    result = equalize_rates(scene, settings)
    return decision, result, result.exposure_after


def reference_gap(reduction_fraction: float, reference: float = 0.43) -> float:
    """Percentage-point gap between a reduction fraction and the reported ~43%."""
    if math.isnan(reduction_fraction):
        return math.inf
    return 100.0 * abs(reduction_fraction - reference)
