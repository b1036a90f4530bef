"""Batched per-cell kernels used by the sweep engine.

Each kernel exists twice: a numba ``@njit`` loop and a vectorised numpy
path. The backend is chosen per call from the ``WBAN_EXPOSURE_BACKEND``
environment variable (``numba`` or ``numpy``); the default is numba when it
imports. Both paths evaluate the same expressions in the same order as the
scalar functions in :mod:`propagation`, :mod:`exposure` and
:mod:`protocol`, so results agree with them to rounding.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

ENV_VAR = "WBAN_EXPOSURE_BACKEND"
BACKENDS = ("numba", "numpy")


def backend() -> str:
    default = "numba" if HAVE_NUMBA else "numpy"
    name = os.environ.get(ENV_VAR, default).strip().lower() or default
    if name not in BACKENDS:
        raise ValueError(f"{ENV_VAR} must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


# ---------------------------------------------------------------- numpy path


def _np_rate(p, gt, gr, pl, noise, bandwidth, max_rate):
    snr = p + gt + gr - pl - noise
    with np.errstate(invalid="ignore"):
        rate = bandwidth * np.log2(1.0 + 10.0 ** (snr / 10.0))
    rate = np.where(snr == -np.inf, 0.0, rate)
    return np.minimum(rate, max_rate)


def _np_multi_rate(offset, pl1, pl2, p_tx, p_relay, g_tx, g_relay, g_rx,
                   noise, bandwidth, max_rate, s_tx, s_relay, factor):
    r1 = _np_rate(p_tx + s_tx * offset, g_tx, g_relay, pl1, noise, bandwidth, max_rate)
    r2 = _np_rate(p_relay + s_relay * offset, g_relay, g_rx, pl2, noise, bandwidth, max_rate)
    return np.minimum(r1, r2) * factor


def _equalize_numpy(pl_direct, pl1, pl2, p_tx, p_relay, g_tx, g_relay, g_rx,
                    noise, bandwidth, max_rate, tol, step, max_backoff,
                    s_tx, s_relay, factor):
    args = (pl1, pl2, p_tx, p_relay, g_tx, g_relay, g_rx,
            noise, bandwidth, max_rate, s_tx, s_relay, factor)
    n = pl_direct.shape[0]
    direct = _np_rate(np.full(n, p_tx), g_tx, g_rx, pl_direct, noise, bandwidth, max_rate)
    target = direct - tol
    before = _np_multi_rate(np.zeros(n), *args)
    reachable = before >= target
    floor_ok = _np_multi_rate(np.full(n, -max_backoff), *args) >= target

    lo = np.full(n, -max_backoff)
    hi = np.zeros(n)
    # every interval has the same width, so one loop serves all cells
    width = max_backoff
    while width > step:
        mid = 0.5 * (lo + hi)
        ok = _np_multi_rate(mid, *args) >= target
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        width = hi[0] - lo[0] if n else 0.0

    offset = np.where(reachable, np.where(floor_ok, -max_backoff, hi), 0.0)
    after = _np_multi_rate(offset, *args)
    return offset, reachable, direct, before, after


def _pd_numpy(power_w, gain, dist, alpha):
    pd = np.zeros(power_w.shape[0])
    for j in range(power_w.shape[1]):
        pd = pd + power_w[:, j] * gain[:, j] / (4.0 * math.pi * dist[:, j] ** alpha)
    return pd


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _nb_rate(p, gt, gr, pl, noise, bandwidth, max_rate):
        snr = p + gt + gr - pl - noise
        if snr == -np.inf:
            return 0.0
        rate = bandwidth * math.log2(1.0 + 10.0 ** (snr / 10.0))
        return min(rate, max_rate)

    @njit(cache=True, nogil=True)
    def _nb_multi_rate(offset, pl1, pl2, p_tx, p_relay, g_tx, g_relay, g_rx,
                       noise, bandwidth, max_rate, s_tx, s_relay, factor):
        r1 = _nb_rate(p_tx + s_tx * offset, g_tx, g_relay, pl1, noise, bandwidth, max_rate)
        r2 = _nb_rate(p_relay + s_relay * offset, g_relay, g_rx, pl2, noise, bandwidth, max_rate)
        return min(r1, r2) * factor

    @njit(cache=True, nogil=True)
    def _equalize_numba(pl_direct, pl1, pl2, p_tx, p_relay, g_tx, g_relay, g_rx,
                        noise, bandwidth, max_rate, tol, step, max_backoff,
                        s_tx, s_relay, factor):
        n = pl_direct.shape[0]
        offset = np.zeros(n)
        reachable = np.zeros(n, dtype=np.bool_)
        direct = np.zeros(n)
        before = np.zeros(n)
        after = np.zeros(n)
        for i in range(n):
            a1 = pl1[i]
            a2 = pl2[i]
            direct[i] = _nb_rate(p_tx, g_tx, g_rx, pl_direct[i], noise, bandwidth, max_rate)
            target = direct[i] - tol
            before[i] = _nb_multi_rate(0.0, a1, a2, p_tx, p_relay, g_tx, g_relay, g_rx,
                                       noise, bandwidth, max_rate, s_tx, s_relay, factor)
            if before[i] < target:
                off = 0.0
            elif _nb_multi_rate(-max_backoff, a1, a2, p_tx, p_relay, g_tx, g_relay, g_rx,
                                noise, bandwidth, max_rate, s_tx, s_relay,
                                factor) >= target:
                reachable[i] = True
                off = -max_backoff
            else:
                reachable[i] = True
                lo = -max_backoff
                hi = 0.0
                while hi - lo > step:
                    mid = 0.5 * (lo + hi)
                    if _nb_multi_rate(mid, a1, a2, p_tx, p_relay, g_tx, g_relay, g_rx,
                                      noise, bandwidth, max_rate, s_tx, s_relay,
                                      factor) >= target:
                        hi = mid
                    else:
                        lo = mid
                off = hi
            offset[i] = off
            after[i] = _nb_multi_rate(off, a1, a2, p_tx, p_relay, g_tx, g_relay, g_rx,
                                      noise, bandwidth, max_rate, s_tx, s_relay, factor)
        return offset, reachable, direct, before, after

    @njit(cache=True, nogil=True)
    def _pd_numba(power_w, gain, dist, alpha):
        n, k = power_w.shape
        pd = np.zeros(n)
        for i in range(n):
            acc = 0.0
            for j in range(k):
                acc = acc + power_w[i, j] * gain[i, j] / (4.0 * math.pi * dist[i, j] ** alpha)
            pd[i] = acc
        return pd


# ---------------------------------------------------------------- dispatch


def equalize_batch(pl_direct, pl1, pl2, *, p_tx, p_relay, g_tx, g_relay, g_rx,
                   noise, bandwidth, max_rate, tol, step, max_backoff,
                   s_tx=1.0, s_relay=1.0, factor=1.0):
    """Per-cell rate-matching backoff search.

    Path losses are per-cell arrays (dB); everything else is scalar. Returns
    ``(offset_db, reachable, direct_rate, multi_rate_before, multi_rate_after)``.
    """
    pl_direct = np.ascontiguousarray(pl_direct, dtype=np.float64)
    pl1 = np.ascontiguousarray(pl1, dtype=np.float64)
    pl2 = np.ascontiguousarray(pl2, dtype=np.float64)
    scalars = tuple(float(v) for v in (p_tx, p_relay, g_tx, g_relay, g_rx, noise,
                                       bandwidth, max_rate, tol, step, max_backoff,
                                       s_tx, s_relay, factor))
    if backend() == "numba":
        return _equalize_numba(pl_direct, pl1, pl2, *scalars)
    return _equalize_numpy(pl_direct, pl1, pl2, *scalars)


def power_density_sum(power_w, gain, dist, alpha):
    """Sum of per-emitter power densities, emitters along axis 1, in column order."""
    power_w = np.ascontiguousarray(power_w, dtype=np.float64)
    gain = np.ascontiguousarray(gain, dtype=np.float64)
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    if backend() == "numba":
        return _pd_numba(power_w, gain, dist, float(alpha))
    return _pd_numpy(power_w, gain, dist, float(alpha))
