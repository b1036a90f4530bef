"""Exit criteria, one test per criterion, each at its stated tolerance.

Runtime bounds are checked on a warm call so one-off numba compilation is
not counted.
"""

import time
import warnings

import numpy as np
import pytest

from oracles import scan_min_offset
from wban_exposure.cli import main
from wban_exposure.exposure import (
    Emitter,
    ExposureLimits,
    TissueProperties,
    aggregate_exposure,
    compliance_report,
    make_sample,
    power_density,
    reflection_coefficient,
)
from wban_exposure.geometry import NodePosition
from wban_exposure.propagation import AntennaSpec, RadioConfig, noise_power, path_loss
from wban_exposure.protocol import Scene, equalize_rates, reference_gap
from wban_exposure.sweep import SweepKind, SweepScenario, argmax_cell, empirical_cdf, run_sweep

TX, RELAY, RX = NodePosition(1, 1), NodePosition(5, 6), NodePosition(15, 15)


def timed(fn, *args, **kwargs):
    fn(*args, **kwargs)
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    for scen in all_sweeps():
        run_sweep(scen)


def all_sweeps():
    return [SweepScenario(kind, protocol_enabled=p) for kind in SweepKind for p in (False, True)]


def test_c01_path_loss_values():
    assert abs(path_loss(1.0, 2.4) - 48.055) <= 0.001
    assert abs(path_loss(0.19799, 2.4) - 31.175) <= 0.001


def test_c02_noise_floor():
    assert abs(noise_power(RadioConfig()) - (-88.68)) <= 0.01


def test_c03_sar_pd_proportionality():
    tissue = TissueProperties()
    r = reflection_coefficient(tissue, 2.4)
    expected = 2 * (1 - r ** 2) / (tissue.penetration_depth * tissue.mass_density)
    t0 = time.perf_counter()
    for scen in all_sweeps():
        res = run_sweep(scen)
        live = ~res.pd.mask
        rel = np.abs(res.sar.values[live] / res.pd.values[live] / expected - 1)
        assert rel.max() <= 1e-12, scen.kind
    assert time.perf_counter() - t0 < 1.0


def test_c04_inverse_power_law():
    rng = np.random.default_rng(20261016)
    d = rng.uniform(1e-3, 5.0, 1000)
    alpha = rng.uniform(1.0, 6.0, 1000)
    t0 = time.perf_counter()
    for di, ai in zip(d, alpha):
        ratio = power_density(0.03, 1.5, 2 * di, ai) / power_density(0.03, 1.5, di, ai)
        assert abs(ratio / 2.0 ** -ai - 1) <= 1e-12
    assert time.perf_counter() - t0 < 1.0


def test_c05_relay_near_rx_is_maximum():
    scen = SweepScenario(SweepKind.RELAY, {"tx": TX, "rx": RX}, protocol_enabled=False)
    res, dt = timed(run_sweep, scen)
    assert (~res.pd.mask).sum() == 238
    for h in (res.pd, res.sar):
        cell, _ = argmax_cell(h)
        assert max(abs(cell.x - RX.x), abs(cell.y - RX.y)) <= 1
    assert dt < 1.0


def test_c06_protocol_monotonicity():
    t0 = time.perf_counter()
    for kind in SweepKind:
        off = run_sweep(SweepScenario(kind, protocol_enabled=False))
        on = run_sweep(SweepScenario(kind, protocol_enabled=True))
        live = ~on.pd.mask
        for a, b in ((on.pd, off.pd), (on.sar, off.sar)):
            assert np.all(a.values[live] <= b.values[live])
            cut = live & (on.pd.reduction_db < 0)
            assert np.all(a.values[cut] < b.values[cut])
    assert time.perf_counter() - t0 < 2.0


def test_c07_rate_equalization():
    scene = Scene(tx=TX, relay=RELAY, rx=RX)
    res, dt = timed(equalize_rates, scene)
    assert abs(res.multi_rate_after - res.direct_rate) <= 1e3
    assert abs(res.offset_db - scan_min_offset(scene, step=0.01)) <= 0.02
    gap = reference_gap(res.reduction_fraction)
    print(f"reduction_fraction={res.reduction_fraction:.10f} gap_to_43pct={gap:.1f}pp")
    if gap > 15.0:
        warnings.warn(f"reduction_fraction {res.reduction_fraction:.6g} is {gap:.1f} pp from ~43%")
    assert dt < 1.0


def test_c08_rx_sweep_fcc_compliance(tmp_path):
    scen = SweepScenario(SweepKind.RX, {"tx": NodePosition(5, 6), "relay": NodePosition(12, 13)},
                         protocol_enabled=True)
    t0 = time.perf_counter()
    res = run_sweep(scen)
    assert int((res.sar.samples() > 1.6).sum()) == 0
    assert main(["scenario", "rx_sweep", "--fail-on-violation", "--out", str(tmp_path)]) == 0
    assert time.perf_counter() - t0 < 5.0


def test_c09_aggregation_oracle():
    rng = np.random.default_rng(7)
    tissue, limits = TissueProperties(), ExposureLimits()
    t0 = time.perf_counter()
    for _ in range(100):
        k = int(rng.integers(1, 4))
        cells = rng.choice(16 * 15, size=k + 1, replace=False)
        pts = [NodePosition(int(c % 16) + 1, int(c // 16) + 1) for c in cells]
        point, ems = pts[0], []
        for p in pts[1:]:
            target = point if rng.random() < 0.5 else NodePosition(int(rng.integers(1, 17)), 16)
            ems.append(Emitter(p, float(rng.uniform(-20, 20)),
                               AntennaSpec(gain=float(rng.uniform(0, 9))), target))
        total = aggregate_exposure(point, ems, tissue, limits).pd
        singles = 0.0
        for em in ems:
            singles += aggregate_exposure(point, [em], tissue, limits).pd
        assert total == singles
    assert time.perf_counter() - t0 < 1.0


def test_c10_determinism(tmp_path, monkeypatch):
    t0 = time.perf_counter()
    runs = []
    for i, (backend, workers) in enumerate([("numba", 1), ("numba", 4), ("numpy", 1), ("numpy", 3)]):
        monkeypatch.setenv("WBAN_EXPOSURE_BACKEND", backend)
        out = tmp_path / f"run{i}"
        for kind in ("relay_sweep", "tx_sweep", "rx_sweep"):
            assert main(["scenario", kind, "--workers", str(workers), "--out", str(out / kind)]) == 0
        runs.append(out)
    for kind in ("relay_sweep", "tx_sweep", "rx_sweep"):
        for name in ("pd.csv", "sar.csv", "cdf_pd.csv", "cdf_sar.csv"):
            ref = (runs[0] / kind / name).read_bytes()
            for other in runs[1:]:
                assert (other / kind / name).read_bytes() == ref, (kind, name, other)
    assert time.perf_counter() - t0 < 10.0


def test_c11_cdf_validity():
    limits = ExposureLimits()
    t0 = time.perf_counter()
    for scen in all_sweeps():
        res = run_sweep(scen)
        for h, limit, key in ((res.pd, limits.pd_limit, "pd"), (res.sar, limits.sar_head_fcc, "sar_fcc")):
            vals = h.samples()
            cdf = empirical_cdf(vals, limit)
            n = vals.shape[0]
            assert np.all(np.diff(cdf.probabilities) >= 0)
            assert cdf.probabilities[0] == 1 / n and cdf.probabilities[-1] == 1.0
            samples = [make_sample(float(p), float(s), limits)
                       for p, s in zip(res.pd.samples(), res.sar.samples())]
            rep = compliance_report(samples, limits)
            assert cdf.fraction_above() == rep.fractions[key]
    assert time.perf_counter() - t0 < 1.0
