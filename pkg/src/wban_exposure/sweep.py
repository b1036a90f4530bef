"""Position sweeps over the body grid, heatmaps and empirical CDFs.

One node role (relay, Tx or Rx) is moved through every free cell while the
other two stay fixed; exposure is evaluated at the Rx for each placement.
The batched engine runs the per-cell link budgets and backoff search in
:mod:`kernels`; ``engine="scalar"`` loops :func:`protocol.run_protocol`
cell by cell and is kept as the reference path.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .exposure import reflection_coefficient
from .geometry import GridSpec, NodePosition, grid_cells
from .propagation import noise_power
from .protocol import (
    PowerControlSettings,
    RouteMode,
    Scene,
    Traffic,
    choose_route,
    multi_hop_exposure,
    run_protocol,
    single_hop_exposure,
)


class SweepKind(str, enum.Enum):
    RELAY = "relay_sweep"
    TX = "tx_sweep"
    RX = "rx_sweep"

    @property
    def role(self) -> str:
        return {"relay_sweep": "relay", "tx_sweep": "tx", "rx_sweep": "rx"}[self.value]


ROLES = ("tx", "relay", "rx")

DEFAULT_FIXED = {
    SweepKind.RELAY: {"tx": NodePosition(1, 1), "rx": NodePosition(15, 15)},
    SweepKind.TX: {"relay": NodePosition(5, 6), "rx": NodePosition(15, 15)},
    SweepKind.RX: {"tx": NodePosition(5, 6), "relay": NodePosition(12, 13)},
}


@dataclass(frozen=True)
class SweepScenario:
    kind: SweepKind
    fixed_positions: Mapping[str, NodePosition] = None
    grid: GridSpec = field(default_factory=GridSpec)
    protocol_enabled: bool = True
    base_scene: Scene = None
    settings: PowerControlSettings = field(default_factory=PowerControlSettings)

    def __post_init__(self):
        kind = SweepKind(self.kind)
        object.__setattr__(self, "kind", kind)
        fixed = self.fixed_positions
        if fixed is None:
            fixed = DEFAULT_FIXED[kind]
        fixed = {role: self.grid.check(pos, role) for role, pos in dict(fixed).items()}
        if kind.role in fixed:
            raise ValueError(f"{kind.value} sweeps the {kind.role}; it cannot be fixed")
        missing = set(ROLES) - {kind.role} - set(fixed)
        if missing:
            raise ValueError(f"{kind.value} needs fixed positions for {sorted(missing)}")
        unknown = set(fixed) - set(ROLES)
        if unknown:
            raise ValueError(f"unknown roles {sorted(unknown)}")
        if len(set(fixed.values())) != len(fixed):
            raise ValueError("fixed positions must be distinct")
        object.__setattr__(self, "fixed_positions", fixed)
        if self.base_scene is None:
            object.__setattr__(
                self,
                "base_scene",
                Scene(tx=NodePosition(1, 1), rx=NodePosition(2, 1),
                      cell_size_cm=self.grid.cell_size_cm),
            )

    def metadata(self) -> dict:
        meta = {
            "kind": self.kind.value,
            "protocol": "on" if self.protocol_enabled else "off",
            "length_cm": self.grid.length_cm,
            "width_cm": self.grid.width_cm,
            "cell_size_cm": self.grid.cell_size_cm,
        }
        for role in ROLES:
            if role in self.fixed_positions:
                p = self.fixed_positions[role]
                meta[role] = f"{p.x}:{p.y}"
        return meta


@dataclass
class Heatmap:
    """Per-cell values indexed ``values[x-1, y-1]``; masked cells hold NaN."""

    values: np.ndarray
    mask: np.ndarray
    metric: str
    unit: str
    metadata: dict = field(default_factory=dict)
    reduction_db: Optional[np.ndarray] = None
    multi_hop: Optional[np.ndarray] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def value_at(self, p: NodePosition) -> float:
        return float(self.values[p[0] - 1, p[1] - 1])

    def cells(self) -> list[NodePosition]:
        """Unmasked cells, x fastest (the grid enumeration order)."""
        nx, ny = self.shape
        return [
            NodePosition(x, y)
            for y in range(1, ny + 1)
            for x in range(1, nx + 1)
            if not self.mask[x - 1, y - 1]
        ]

    def samples(self) -> np.ndarray:
        order = ~self.mask.T
        return self.values.T[order]


@dataclass(frozen=True)
class EmpiricalCdf:
    values: np.ndarray
    probabilities: np.ndarray
    limit: float

    def __call__(self, x: float) -> float:
        n = self.values.shape[0]
        return np.searchsorted(self.values, x, side="right") / n

    def fraction_above(self, threshold: Optional[float] = None) -> float:
        t = self.limit if threshold is None else threshold
        n = self.values.shape[0]
        return (n - int(np.searchsorted(self.values, t, side="right"))) / n


def empirical_cdf(samples: Sequence[float], limit: float = math.nan) -> EmpiricalCdf:
    values = np.sort(np.asarray(samples, dtype=np.float64))
    if values.ndim != 1 or values.shape[0] == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    n = values.shape[0]
    return EmpiricalCdf(values, np.arange(1, n + 1) / n, float(limit))


def argmax_cell(h: Heatmap) -> tuple[NodePosition, float]:
    """Cell of the largest value; ties go to the first cell in grid order."""
    if h.mask.all():
        raise ValueError("heatmap is fully masked")
    flat = np.where(h.mask.T, -np.inf, h.values.T).ravel()
    k = int(np.argmax(flat))
    nx = h.shape[0]
    p = NodePosition(k % nx + 1, k // nx + 1)
    return p, h.value_at(p)


def _cell_array(cells: list[NodePosition]) -> np.ndarray:
    # fromiter avoids numpy's slow per-tuple sequence inference
    flat = np.fromiter((c for cell in cells for c in cell), dtype=np.int64, count=2 * len(cells))
    return flat.reshape(len(cells), 2)


def _positions(scenario: SweepScenario, cells: list[NodePosition]) -> dict[str, np.ndarray]:
    n = len(cells)
    swept = _cell_array(cells)
    out = {}
    for role in ROLES:
        if role == scenario.kind.role:
            out[role] = swept
        else:
            out[role] = np.tile(np.array(scenario.fixed_positions[role], dtype=np.int64), (n, 1))
    return out


def _dist(a: np.ndarray, b: np.ndarray, cell_size_cm: float) -> np.ndarray:
    return np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1]) * cell_size_cm / 100.0


def _path_loss(d: np.ndarray, f: float) -> np.ndarray:
    return 24.0 * np.log10(d) + 24.0 * math.log10(f) + 38.93


def _leak_gain_linear(origin, target, toward, antenna) -> np.ndarray:
    ax = target[:, 0] - origin[:, 0]
    ay = target[:, 1] - origin[:, 1]
    bx = toward[:, 0] - origin[:, 0]
    by = toward[:, 1] - origin[:, 1]
    phi = np.abs(np.degrees(np.arctan2(ax * by - ay * bx, ax * bx + ay * by)))
    att_az = np.minimum(12.0 * (phi / antenna.beamwidth_3db) ** 2, antenna.max_attenuation)
    att_el = min(12.0 * (0.0 / antenna.beamwidth_3db) ** 2, antenna.max_attenuation)
    att = np.minimum(att_az + att_el, antenna.max_attenuation)
    return 10.0 ** ((antenna.gain - att) / 10.0)


@dataclass
class SweepResult:
    pd: Heatmap
    sar: Heatmap
    cells: list[NodePosition]

    def __iter__(self):
        return iter((self.pd, self.sar))


def _assemble(scenario, cells, pd, sar_per_pd, offset, multi) -> SweepResult:
    grid = scenario.grid
    shape = grid.shape
    mask = np.ones(shape, dtype=bool)
    pd_map = np.full(shape, np.nan)
    red_map = np.full(shape, np.nan)
    multi_map = np.zeros(shape, dtype=bool)
    idx = _cell_array(cells) - 1
    mask[idx[:, 0], idx[:, 1]] = False
    pd_map[idx[:, 0], idx[:, 1]] = pd
    red_map[idx[:, 0], idx[:, 1]] = offset
    multi_map[idx[:, 0], idx[:, 1]] = multi
    sar_map = 2.0 * pd_map * sar_per_pd[0] / sar_per_pd[1]
    meta = scenario.metadata()
    return SweepResult(
        pd=Heatmap(pd_map, mask, "pd", "W/m^2", dict(meta), red_map, multi_map),
        sar=Heatmap(sar_map, mask.copy(), "sar", "W/kg", dict(meta), red_map, multi_map),
        cells=cells,
    )


def _sar_factors(scene: Scene) -> tuple[float, float]:
    # sar = 2*pd*(1-r^2)/(delta*rho), kept as (1-r^2, delta*rho) so the
    # batched path rounds exactly like exposure.sar_from_pd
    r = reflection_coefficient(scene.tissue, scene.radio.frequency)
    return 1.0 - r * r, scene.tissue.penetration_depth * scene.tissue.mass_density


def _chunked(fn, arrays, workers: int, **kwargs):
    """Apply ``fn`` to contiguous slices of ``arrays`` and concatenate.

    Cells are independent, so the split changes nothing but wall time.
    """
    n = arrays[0].shape[0]
    if workers <= 1 or n < 2 * workers:
        return fn(*arrays, **kwargs)
    bounds = np.linspace(0, n, workers + 1).astype(int)
    parts = [tuple(a[lo:hi] for a in arrays) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda part: fn(*part, **kwargs), parts))
    if isinstance(results[0], tuple):
        return tuple(np.concatenate(col) for col in zip(*results))
    return np.concatenate(results)


def _run_batched(scenario: SweepScenario, workers: int = 1) -> SweepResult:
    scene = scenario.base_scene
    settings = scenario.settings
    radio = scene.radio
    cs = scenario.grid.cell_size_cm
    cells = grid_cells(scenario.grid, scenario.fixed_positions.values())
    n = len(cells)
    pos = _positions(scenario, cells)
    tx, relay, rx = pos["tx"], pos["relay"], pos["rx"]

    d_direct = _dist(tx, rx, cs)
    d_hop1 = _dist(tx, relay, cs)
    d_hop2 = _dist(relay, rx, cs)
    if scenario.kind is SweepKind.RELAY and not scenario.protocol_enabled:
        multi = np.ones(n, dtype=bool)
    else:
        multi = d_direct > d_hop1

    offset = np.zeros(n)
    if scenario.protocol_enabled and multi.any():
        s_tx, s_relay = settings.scales
        off, _, _, _, _ = _chunked(
            kernels.equalize_batch,
            (_path_loss(d_direct[multi], radio.frequency),
             _path_loss(d_hop1[multi], radio.frequency),
             _path_loss(d_hop2[multi], radio.frequency)),
            workers,
            p_tx=scene.tx_power, p_relay=scene.relay_power,
            g_tx=scene.tx_antenna.gain, g_relay=scene.relay_antenna.gain,
            g_rx=scene.rx_antenna.gain, noise=noise_power(radio),
            bandwidth=radio.bandwidth, max_rate=radio.max_rate,
            tol=settings.rate_tolerance, step=settings.power_step_floor,
            max_backoff=settings.max_backoff, s_tx=s_tx, s_relay=s_relay,
            factor=settings.multi_hop_rate_factor,
        )
        offset[multi] = off
        p_tx_dbm = scene.tx_power + s_tx * offset
        p_relay_dbm = scene.relay_power + s_relay * offset
    else:
        p_tx_dbm = np.full(n, float(scene.tx_power))
        p_relay_dbm = np.full(n, float(scene.relay_power))

    # boresight gains: zero attenuation at (90 deg, 0 deg)
    g_tx_full = 10.0 ** ((scene.tx_antenna.gain - 0.0) / 10.0)
    g_relay = 10.0 ** ((scene.relay_antenna.gain - 0.0) / 10.0)
    g_leak = _leak_gain_linear(tx, relay, rx, scene.tx_antenna)

    power = np.zeros((n, 2))
    gain = np.zeros((n, 2))
    dist = np.ones((n, 2))
    power[:, 0] = 10.0 ** ((p_tx_dbm - 30.0) / 10.0)
    gain[:, 0] = np.where(multi, g_leak, g_tx_full)
    dist[:, 0] = d_direct
    power[:, 1] = np.where(multi, 10.0 ** ((p_relay_dbm - 30.0) / 10.0), 0.0)
    gain[:, 1] = np.where(multi, g_relay, 0.0)
    dist[:, 1] = np.where(multi, d_hop2, 1.0)
    pd = _chunked(kernels.power_density_sum, (power, gain, dist), workers, alpha=scene.alpha)
    return _assemble(scenario, cells, pd, _sar_factors(scene), offset, multi)


def _run_scalar(scenario: SweepScenario) -> SweepResult:
    base = scenario.base_scene
    cells = grid_cells(scenario.grid, scenario.fixed_positions.values())
    pd = np.zeros(len(cells))
    offset = np.zeros(len(cells))
    multi = np.zeros(len(cells), dtype=bool)
    for i, cell in enumerate(cells):
        placed = dict(scenario.fixed_positions)
        placed[scenario.kind.role] = cell
        scene = dataclasses.replace(base, **placed)
        if scenario.kind is SweepKind.RELAY and not scenario.protocol_enabled:
            sample = multi_hop_exposure(scene)
            multi[i] = True
        elif not scenario.protocol_enabled:
            multi[i] = choose_route(Traffic.NORMAL, scene).mode is RouteMode.MULTI_HOP
            sample = multi_hop_exposure(scene) if multi[i] else single_hop_exposure(scene)
        else:
            decision, result, sample = run_protocol(Traffic.NORMAL, scene, scenario.settings)
            multi[i] = decision.mode is RouteMode.MULTI_HOP
            if result is not None:
                offset[i] = result.offset_db
        pd[i] = sample.pd
    return _assemble(scenario, cells, pd, _sar_factors(base), offset, multi)


def run_sweep(scenario: SweepScenario, engine: str = "batched", workers: int = 1) -> SweepResult:
    if engine == "batched":
        return _run_batched(scenario, workers)
    if engine == "scalar":
        return _run_scalar(scenario)
    raise ValueError(f"unknown engine {engine!r}")


def _typed(kind: SweepKind, scenario: SweepScenario) -> tuple[Heatmap, Heatmap]:
    if scenario.kind is not kind:
        raise ValueError(f"expected a {kind.value} scenario, got {scenario.kind.value}")
    result = run_sweep(scenario)
    return result.pd, result.sar


def relay_sweep(scenario: SweepScenario) -> tuple[Heatmap, Heatmap]:
    return _typed(SweepKind.RELAY, scenario)


def tx_sweep(scenario: SweepScenario) -> tuple[Heatmap, Heatmap]:
    return _typed(SweepKind.TX, scenario)


def rx_sweep(scenario: SweepScenario) -> tuple[Heatmap, Heatmap]:
    return _typed(SweepKind.RX, scenario)
