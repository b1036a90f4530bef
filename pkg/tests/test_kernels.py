import math

import numpy as np
import pytest

from wban_exposure import kernels
from wban_exposure.exposure import Emitter, aggregate_exposure
from wban_exposure.geometry import distance
from wban_exposure.propagation import noise_power, path_loss
from wban_exposure.protocol import PowerControlSettings, Scene, equalize_rates


def test_backend_env(monkeypatch):
    monkeypatch.setenv(kernels.ENV_VAR, "numpy")
    assert kernels.backend() == "numpy"
    monkeypatch.setenv(kernels.ENV_VAR, "NUMBA")
    assert kernels.backend() == ("numba" if kernels.HAVE_NUMBA else "numpy")
    monkeypatch.setenv(kernels.ENV_VAR, "cuda")
    with pytest.raises(ValueError):
        kernels.backend()


SCENES = [
    Scene(tx=(1, 1), relay=(5, 6), rx=(15, 15)),
    Scene(tx=(5, 6), relay=(12, 13), rx=(16, 1)),
    Scene(tx=(2, 9), relay=(3, 3), rx=(14, 2), tx_power=-60, relay_power=-75),
    Scene(tx=(1, 1), relay=(2, 2), rx=(3, 3), tx_power=-math.inf),
    Scene(tx=(1, 1), relay=(16, 15), rx=(8, 8), tx_power=-85, relay_power=-40),
]


@pytest.mark.parametrize("nodes", ["both", "tx", "relay"])
def test_equalize_batch_matches_scalar(backend, nodes):
    st = PowerControlSettings(backoff_nodes=nodes)
    s_tx, s_relay = st.scales
    f = SCENES[0].radio.frequency
    # powers differ per scene, so run one scene per call
    for s in SCENES:
        ref = equalize_rates(s, st)
        off, reach, direct, before, after = kernels.equalize_batch(
            [path_loss(s.direct_distance, f)],
            [path_loss(s.relay_distance, f)],
            [path_loss(s.d(s.relay, s.rx), f)],
            p_tx=s.tx_power, p_relay=s.relay_power, g_tx=1.7, g_relay=8.0, g_rx=1.7,
            noise=noise_power(s.radio), bandwidth=4e6, max_rate=10e6,
            tol=st.rate_tolerance, step=st.power_step_floor, max_backoff=st.max_backoff,
            s_tx=s_tx, s_relay=s_relay,
        )
        assert bool(reach[0]) == ref.reachable
        assert off[0] == pytest.approx(ref.offset_db, abs=st.power_step_floor)
        assert direct[0] == pytest.approx(ref.direct_rate, rel=1e-12)
        assert before[0] == pytest.approx(ref.multi_rate_before, rel=1e-12)


def test_equalize_batch_empty(backend):
    out = kernels.equalize_batch(np.zeros(0), np.zeros(0), np.zeros(0), p_tx=15, p_relay=15,
                                 g_tx=1.7, g_relay=8, g_rx=1.7, noise=-88.68, bandwidth=4e6,
                                 max_rate=10e6, tol=1e3, step=0.01, max_backoff=120)
    assert all(a.shape == (0,) for a in out)


def test_power_density_sum_matches_aggregate(backend, reference_scene):
    s = reference_scene
    ems = [Emitter(s.tx, 15, s.tx_antenna, s.relay), Emitter(s.relay, 15, s.relay_antenna, s.rx)]
    ref = aggregate_exposure(s.rx, ems, s.tissue, s.limits)
    from wban_exposure.exposure import leaked_gain
    from wban_exposure.propagation import dbm_to_watts
    power = np.array([[dbm_to_watts(15), dbm_to_watts(15)]])
    gain = np.array([[leaked_gain(ems[0], s.rx), leaked_gain(ems[1], s.rx)]])
    dist = np.array([[distance(s.tx, s.rx), distance(s.relay, s.rx)]])
    pd = kernels.power_density_sum(power, gain, dist, 2.0)
    assert pd[0] == pytest.approx(ref.pd, rel=1e-15)
