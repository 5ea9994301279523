"""Pure-Python kernels; used when the compiled extension is unavailable.

The algorithms here and in ``_kernels.pyx`` are step-for-step identical so
the two backends agree to rounding.
"""
from __future__ import annotations

import math

import numpy as np

# Dormand-Prince 5(4) tableau.
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# fifth-order minus embedded fourth-order weights
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension: y(t + theta h) = y + h sum_i k_i (P[i] . [theta, theta^2, theta^3, theta^4])
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

# PI controller (Hairer & Wanner, DOPRI5 defaults)
SAFETY = 0.9
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA
FAC_MIN = 0.2  # h may shrink by at most 5x per step
FAC_MAX = 10.0

STATUS_OK = 0
STATUS_ESCAPE = 1
STATUS_STIFF = 2
STATUS_MAX_STEPS = 3


def _rms(x: np.ndarray) -> float:
    return math.sqrt(float(np.mean(x * x)))


def initial_step(f, y0, f0, rtol, atol, max_step):
    sk = atol + rtol * np.abs(y0)
    d0, d1 = _rms(y0 / sk), _rms(f0 / sk)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    f1 = f(y0 + h0 * f0)
    d2 = _rms((f1 - f0) / sk) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def dopri5(f, x0, sample_times, t_end, rtol, atol, max_step, max_norm, max_steps, h_init=0.0):
    """Integrate ``y' = f(y)`` from ``t = 0`` to ``t_end``.

    Returns ``(out, n_filled, status, t, y, n_steps, n_rejected)``; ``out``
    holds states at ``sample_times`` (dense output) up to ``n_filled``.
    """
    y = np.array(x0, dtype=float)
    d = y.shape[0]
    ts = np.asarray(sample_times, dtype=float)
    out = np.empty((ts.shape[0], d))
    idx = 0
    while idx < ts.shape[0] and ts[idx] <= 0.0:
        out[idx] = y
        idx += 1

    k = np.empty((7, d))
    k[0] = f(y)
    t = 0.0
    h = h_init if h_init > 0 else initial_step(f, y, k[0], rtol, atol, max_step)
    facold = 1e-4
    n_steps = n_rejected = 0
    status = STATUS_OK
    eps = np.finfo(float).eps

    while t < t_end:
        if n_steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        h = min(h, max_step)
        last = False
        if t + 1.01 * h >= t_end:
            h = t_end - t
            last = True
        if h <= 16 * eps * max(1.0, abs(t)):
            status = STATUS_STIFF
            break
        for s in range(1, 6):
            acc = y.copy()
            for j, a in enumerate(A[s]):
                if a != 0.0:
                    acc += h * a * k[j]
            k[s] = f(acc)
        y_new = y + h * (B[:6] @ k[:6])
        k[6] = f(y_new)
        n_steps += 1

        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * (E @ k) / sc)
        if not math.isfinite(err):
            err = 1e10
        fac11 = err ** EXPO
        if err <= 1.0:
            if not (np.all(np.isfinite(y_new)) and math.sqrt(float(y_new @ y_new)) <= max_norm):
                status = STATUS_ESCAPE
                break
            t_new = t_end if last else t + h
            while idx < ts.shape[0] and ts[idx] <= t_new:
                theta = (ts[idx] - t) / h
                powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
                out[idx] = y + h * ((P @ powers) @ k)
                idx += 1
            fac = fac11 / facold ** BETA / SAFETY
            fac = min(1.0 / FAC_MIN, max(1.0 / FAC_MAX, fac))
            facold = max(err, 1e-4)
            t = t_new
            y = y_new
            k[0] = k[6]
            h = h / fac
        else:
            n_rejected += 1
            h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)
    return out, idx, status, t, y, n_steps, n_rejected


def pair_counts(points: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Number of unordered pairs ``i < j`` with ``|x_i - x_j| <= r`` for each r.

    `radii` must be sorted ascending.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    r2 = np.asarray(radii, dtype=float) ** 2
    n = pts.shape[0]
    hist = np.zeros(r2.shape[0] + 1, dtype=np.int64)
    for i in range(n - 1):
        diff = pts[i + 1 :] - pts[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        hist += np.bincount(np.searchsorted(r2, d2, side="left"), minlength=r2.shape[0] + 1)
    return np.cumsum(hist[:-1])


def occupied_keys(indices: np.ndarray, cells_per_axis: np.ndarray) -> np.ndarray:
    """Flatten integer grid indices to unique sorted int64 keys."""
    strides = np.cumprod(np.concatenate([[1], cells_per_axis[:-1]])).astype(np.int64)
    return np.unique(indices.astype(np.int64) @ strides)
