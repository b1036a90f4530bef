"""Independent reference computations used by several test modules."""

import numpy as np

K_B = 1.380649e-23


def scan_min_offset(scene, step=0.01, max_backoff=120.0, tol=1e3, scales=(1.0, 1.0), factor=1.0):
    """Most negative dB offset on a ``step`` lattice keeping the two-hop rate
    within ``tol`` of the direct rate, by exhaustive evaluation.

    Rates come from a closed-form chain written out here, not from the
    package. Returns None when even offset 0 misses the target.
    """
    f = scene.radio.frequency
    bw = scene.radio.bandwidth
    noise = 10 * np.log10(K_B * scene.radio.temperature * bw / 1e-3) + scene.radio.noise_figure

    def d(a, b):
        return np.hypot(a[0] - b[0], a[1] - b[1]) * scene.cell_size_cm / 100

    def rate(p, gt, gr, dist):
        pl = 24 * np.log10(dist) + 24 * np.log10(f) + 38.93
        snr = p + gt + gr - pl - noise
        return np.minimum(bw * np.log2(1 + 10 ** (snr / 10)), scene.radio.max_rate)

    g_tx, g_re, g_rx = scene.tx_antenna.gain, scene.relay_antenna.gain, scene.rx_antenna.gain
    direct = rate(scene.tx_power, g_tx, g_rx, d(scene.tx, scene.rx))
    offsets = -np.arange(0, int(round(max_backoff / step)) + 1) * step
    r1 = rate(scene.tx_power + scales[0] * offsets, g_tx, g_re, d(scene.tx, scene.relay))
    r2 = rate(scene.relay_power + scales[1] * offsets, g_re, g_rx, d(scene.relay, scene.rx))
    ok = np.minimum(r1, r2) * factor >= direct - tol
    if not ok[0]:
        return None
    # feasible offsets form a prefix of the descending lattice
    return float(offsets[np.flatnonzero(ok).max()])
