"""Link budget for 2.4 GHz on-body links.

Path loss, antenna attenuation patterns, element gain, thermal noise floor,
SNR and achievable rate for a single hop.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

BOLTZMANN = 1.380649e-23  # J/K


@dataclass(frozen=True)
class RadioConfig:
    frequency: float = 2.4  # GHz
    bandwidth: float = 4e6  # Hz
    temperature: float = 295.0  # K
    noise_figure: float = 19.2  # dB
    max_rate: float = 10e6  # bit/s

    def __post_init__(self):
        for name in ("frequency", "bandwidth", "temperature", "max_rate"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class AntennaSpec:
    gain: float = 1.7  # dBi
    beamwidth_3db: float = 93.0  # degrees, azimuth and elevation
    max_attenuation: float = 30.0  # dB, front-to-back ratio
    element_separation: float = 0.5  # wavelengths

    def __post_init__(self):
        if not self.beamwidth_3db > 0:
            raise ValueError(f"beamwidth_3db must be > 0, got {self.beamwidth_3db}")
        if not self.max_attenuation > 0:
            raise ValueError(f"max_attenuation must be > 0, got {self.max_attenuation}")


TX_ANTENNA = AntennaSpec(gain=1.7)
RELAY_ANTENNA = AntennaSpec(gain=8.0)
RX_ANTENNA = AntennaSpec(gain=1.7)


@dataclass(frozen=True)
class LinkBudget:
    tx_power: float  # dBm
    tx_gain: float  # dBi
    rx_gain: float  # dBi
    path_loss: float  # dB
    rx_power: float  # dBm
    noise_power: float  # dBm
    snr: float  # dB
    rate: float  # bit/s


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def path_loss(d: float, f: float) -> float:
    """Empirical on-body path loss in dB; ``d`` in metres, ``f`` in GHz."""
    if not d > 0:
        raise ValueError(f"path loss needs d > 0 m, got {d}")
    if not f > 0:
        raise ValueError(f"path loss needs f > 0 GHz, got {f}")
    return 24.0 * math.log10(d) + 24.0 * math.log10(f) + 38.93


def azimuth_attenuation(phi: float, spec: AntennaSpec) -> float:
    return min(12.0 * (phi / spec.beamwidth_3db) ** 2, spec.max_attenuation)


def elevation_attenuation(theta: float, spec: AntennaSpec) -> float:
    return min(12.0 * ((theta - 90.0) / spec.beamwidth_3db) ** 2, spec.max_attenuation)


def combined_attenuation(theta: float, phi: float, spec: AntennaSpec) -> float:
    """Azimuth plus elevation attenuation, clipped at the front-to-back ratio."""
    return min(
        azimuth_attenuation(phi, spec) + elevation_attenuation(theta, spec),
        spec.max_attenuation,
    )


def element_gain(theta: float, spec: AntennaSpec) -> float:
    """Two-element pattern gain in dBi at angle ``theta`` (degrees).

    The array-factor magnitude |1 - exp(-2j*pi*delta*sin(theta))| is floored
    at 1, so the result never exceeds the element's peak gain and never
    diverges where the magnitude vanishes.
    """
    af = abs(1.0 - cmath.exp(-2j * math.pi * spec.element_separation
                             * math.sin(math.radians(theta))))
    return spec.gain - 20.0 * math.log10(max(af, 1.0))


def noise_power(config: RadioConfig) -> float:
    """Thermal noise floor kTB plus noise figure, in dBm."""
    ktb_w = BOLTZMANN * config.temperature * config.bandwidth
    return 10.0 * math.log10(ktb_w / 1e-3) + config.noise_figure


def shannon_rate(snr: float, config: RadioConfig) -> float:
    """Shannon rate of ``snr`` (dB) over the bandwidth, capped at max_rate."""
    if snr == -math.inf:
        return 0.0
    rate = config.bandwidth * math.log2(1.0 + 10.0 ** (snr / 10.0))
    return min(rate, config.max_rate)


def link_budget(
    tx_power: float,
    tx_gain: float,
    rx_gain: float,
    d: float,
    config: RadioConfig,
) -> LinkBudget:
    pl = path_loss(d, config.frequency)
    rx_power = tx_power + tx_gain + rx_gain - pl
    noise = noise_power(config)
    snr = rx_power - noise
    return LinkBudget(
        tx_power=tx_power,
        tx_gain=tx_gain,
        rx_gain=rx_gain,
        path_loss=pl,
        rx_power=rx_power,
        noise_power=noise,
        snr=snr,
        rate=shannon_rate(snr, config),
    )
