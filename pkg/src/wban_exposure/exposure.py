"""Power density, air-skin SAR, multi-emitter aggregation and limit checks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geometry import NodePosition, angle_between, distance
from .propagation import AntennaSpec, combined_attenuation, db_to_linear, dbm_to_watts

EPS0 = 8.8541878128e-12  # F/m


@dataclass(frozen=True)
class TissueProperties:
    permittivity: float = 39.2  # relative, real part
    conductivity: float = 1.8  # S/m
    penetration_depth: float = 0.113  # m
    mass_density: float = 1100.0  # kg/m^3, typical skin

    def __post_init__(self):
        for name in ("permittivity", "conductivity", "penetration_depth", "mass_density"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class ExposureLimits:
    sar_head_fcc: float = 1.6  # W/kg, 1 g average
    sar_head_icnirp: float = 2.0  # W/kg, 10 g average
    sar_limb: float = 4.0  # W/kg
    pd_limit: float = 10.0  # W/m^2, general-population MPE at 2.4 GHz

    def __post_init__(self):
        for name in ("sar_head_fcc", "sar_head_icnirp", "sar_limb", "pd_limit"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class Emitter:
    position: NodePosition
    tx_power: float  # dBm
    antenna: AntennaSpec
    boresight_target: NodePosition

    def __post_init__(self):
        if tuple(self.position) == tuple(self.boresight_target):
            raise ValueError("emitter boresight target coincides with its position")


@dataclass(frozen=True)
class ExposureSample:
    pd: float  # W/m^2
    sar: float  # W/kg
    compliant_sar: bool
    compliant_pd: bool


def power_density(tx_power: float, effective_gain: float, d: float, alpha: float = 2.0) -> float:
    """Incident power density in W/m^2 at ``d`` metres from the emitter.

    ``tx_power`` is in watts and ``effective_gain`` is linear.
    """
    if not d > 0:
        raise ValueError(f"power density is singular at d = {d} m")
    if tx_power < 0 or effective_gain < 0:
        raise ValueError("tx_power and effective_gain must be non-negative")
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return tx_power * effective_gain / (4.0 * math.pi * d ** alpha)


def reflection_coefficient(tissue: TissueProperties, f: float) -> float:
    """Normal-incidence |reflection| at an air/tissue boundary, ``f`` in GHz."""
    if not f > 0:
        raise ValueError(f"frequency must be > 0 GHz, got {f}")
    omega = 2.0 * math.pi * f * 1e9
    eps = complex(tissue.permittivity, -tissue.conductivity / (omega * EPS0))
    n = cmath.sqrt(eps)
    return abs((1.0 - n) / (1.0 + n))


def sar_from_pd(pd: float, r: float, tissue: TissueProperties) -> float:
    return 2.0 * pd * (1.0 - r * r) / (tissue.penetration_depth * tissue.mass_density)


def sar_per_pd(tissue: TissueProperties, f: float) -> float:
    """Constant SAR/PD ratio for a tissue at frequency ``f`` (GHz)."""
    return sar_from_pd(1.0, reflection_coefficient(tissue, f), tissue)


def leaked_gain(emitter: Emitter, toward: NodePosition) -> float:
    """Linear gain of ``emitter`` toward a point off its boresight (in-plane)."""
    phi = angle_between(emitter.position, emitter.boresight_target, toward)
    att = combined_attenuation(90.0, phi, emitter.antenna)
    return db_to_linear(emitter.antenna.gain - att)


def make_sample(pd: float, sar: float, limits: ExposureLimits) -> ExposureSample:
    return ExposureSample(
        pd=pd,
        sar=sar,
        compliant_sar=sar <= limits.sar_head_fcc,
        compliant_pd=pd <= limits.pd_limit,
    )


def aggregate_exposure(
    point: NodePosition,
    emitters: Sequence[Emitter],
    tissue: TissueProperties,
    limits: ExposureLimits,
    frequency: float = 2.4,
    alpha: float = 2.0,
    cell_size_cm: float = 1.0,
) -> ExposureSample:
    """Worst-case exposure at ``point`` with every emitter transmitting at once."""
    pd = 0.0
    for i, em in enumerate(emitters):
        if tuple(em.position) == tuple(point):
            raise ValueError(
                f"emitter {i} at {tuple(em.position)} is co-located with the evaluation point"
            )
        pd += power_density(
            dbm_to_watts(em.tx_power),
            leaked_gain(em, point),
            distance(em.position, point, cell_size_cm),
            alpha,
        )
    sar = sar_from_pd(pd, reflection_coefficient(tissue, frequency), tissue)
    return make_sample(pd, sar, limits)


@dataclass
class ComplianceReport:
    n: int
    empty: bool
    violations: dict[str, int]
    fractions: dict[str, float]
    pd_stats: dict[str, float]
    sar_stats: dict[str, float]
    worst_sar_cell: Optional[NodePosition] = None
    worst_pd_cell: Optional[NodePosition] = None
    notes: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"samples: {self.n}"]
        if self.empty:
            lines.append("EMPTY: no samples evaluated")
        for key in self.violations:
            lines.append(
                f"violations {key}: {self.violations[key]} ({self.fractions[key]:.6g})"
            )
        for name, stats in (("pd [W/m^2]", self.pd_stats), ("sar [W/kg]", self.sar_stats)):
            lines.append(
                f"{name}: max={stats['max']:.6g} min={stats['min']:.6g} mean={stats['mean']:.6g}"
            )
        if self.worst_sar_cell is not None:
            lines.append(f"worst sar cell: {tuple(self.worst_sar_cell)}")
        if self.worst_pd_cell is not None:
            lines.append(f"worst pd cell: {tuple(self.worst_pd_cell)}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"


def compliance_report(
    samples: Sequence[ExposureSample],
    limits: ExposureLimits,
    positions: Optional[Sequence[NodePosition]] = None,
) -> ComplianceReport:
    """Count limit exceedances and summarise PD/SAR over a set of samples.

    A sample exceeds a limit only when strictly above it.
    """
    thresholds = {
        "sar_fcc": ("sar", limits.sar_head_fcc),
        "sar_icnirp": ("sar", limits.sar_head_icnirp),
        "sar_limb": ("sar", limits.sar_limb),
        "pd": ("pd", limits.pd_limit),
    }
    n = len(samples)
    violations = {
        key: sum(1 for s in samples if getattr(s, attr) > lim)
        for key, (attr, lim) in thresholds.items()
    }
    fractions = {key: (v / n if n else 0.0) for key, v in violations.items()}

    def stats(attr):
        if not n:
            return {"max": 0.0, "min": 0.0, "mean": 0.0}
        vals = [getattr(s, attr) for s in samples]
        return {"max": max(vals), "min": min(vals), "mean": math.fsum(vals) / n}

    report = ComplianceReport(
        n=n,
        empty=n == 0,
        violations=violations,
        fractions=fractions,
        pd_stats=stats("pd"),
        sar_stats=stats("sar"),
    )
    if positions is not None and n:
        if len(positions) != n:
            raise ValueError("positions and samples differ in length")
        i_sar = max(range(n), key=lambda i: (samples[i].sar, -i))
        i_pd = max(range(n), key=lambda i: (samples[i].pd, -i))
        report.worst_sar_cell = NodePosition(*positions[i_sar])
        report.worst_pd_cell = NodePosition(*positions[i_pd])
    return report
