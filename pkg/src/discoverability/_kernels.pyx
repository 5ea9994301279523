# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Dormand-Prince integration of sparse polynomial fields
and pair counting for correlation sums.

Mirrors ``_fallback.py`` step for step.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double[7] B_ = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0]
cdef double[7] E_ = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40]
cdef double[7][6] A_ = [
    [0, 0, 0, 0, 0, 0],
    [1.0 / 5, 0, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0, 0],
    [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0],
    [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0],
    [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0],
    [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84],
]
cdef double[7][4] P_ = [
    [1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799],
    [0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072],
    [0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632],
    [0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844],
    [0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423],
]

cdef double SAFETY = 0.9
cdef double BETA = 0.04
cdef double EXPO = 0.2 - 0.75 * 0.04
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0
cdef double DBL_EPS = 2.220446049250313e-16


cdef struct Poly:
    int d
    int n_mono
    int max_deg
    const long* exps        # n_mono x d
    int n_terms
    const int* rows
    const int* cols
    const double* vals
    double* powers          # d x (max_deg + 1)
    double* mono            # n_mono


cdef inline void poly_eval(Poly* p, const double* y, double* out) noexcept nogil:
    cdef int j, k, a, stride = p.max_deg + 1
    cdef double v
    cdef long e
    for j in range(p.d):
        p.powers[j * stride] = 1.0
        for k in range(1, stride):
            p.powers[j * stride + k] = p.powers[j * stride + k - 1] * y[j]
    for a in range(p.n_mono):
        v = 1.0
        for j in range(p.d):
            e = p.exps[a * p.d + j]
            if e:
                v *= p.powers[j * stride + e]
        p.mono[a] = v
    for j in range(p.d):
        out[j] = 0.0
    for k in range(p.n_terms):
        out[p.rows[k]] += p.vals[k] * p.mono[p.cols[k]]


cdef inline double rms(const double* x, int d) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(d):
        s += x[i] * x[i]
    return sqrt(s / d)


def dopri5_poly(const long[:, ::1] exps, const int[::1] rows, const int[::1] cols, const double[::1] vals,
                const double[::1] x0, const double[::1] sample_times, double t_end,
                double rtol, double atol, double max_step, double max_norm,
                long max_steps, double h_init=0.0):
    """Compiled twin of ``_fallback.dopri5`` for a sparse polynomial field.

    The field is ``F_rows[k] += vals[k] * prod_j y_j ** exps[cols[k], j]``.
    Returns the same tuple as the fallback.
    """
    cdef int d = x0.shape[0]
    cdef int ns = sample_times.shape[0]
    cdef Poly p
    p.d = d
    p.n_mono = exps.shape[0]
    p.max_deg = 0
    cdef int a, j, s, i, c
    for a in range(exps.shape[0]):
        for j in range(d):
            if exps[a, j] > p.max_deg:
                p.max_deg = exps[a, j]
    p.exps = &exps[0, 0] if exps.shape[0] > 0 else NULL
    p.n_terms = rows.shape[0]
    p.rows = &rows[0] if rows.shape[0] > 0 else NULL
    p.cols = &cols[0] if cols.shape[0] > 0 else NULL
    p.vals = &vals[0] if vals.shape[0] > 0 else NULL

    out_arr = np.empty((ns, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* work = <double*> malloc(sizeof(double) * (d * (p.max_deg + 1) + p.n_mono + 11 * d + 4))
    if work == NULL:
        raise MemoryError()
    p.powers = work
    p.mono = work + d * (p.max_deg + 1)
    cdef double* k = p.mono + p.n_mono           # 7 x d
    cdef double* y = k + 7 * d
    cdef double* ynew = y + d
    cdef double* acc = ynew + d
    cdef double* errv = acc + d

    cdef int idx = 0, status = 0, last
    cdef long n_steps = 0, n_rejected = 0
    cdef double t = 0.0, h, t_new, err, fac, fac11, facold = 1e-4, sc, norm, theta, w, tpow
    cdef double d0, d1, d2, h0, h1, sk
    cdef double[7] wts

    try:
        with nogil:
            for j in range(d):
                y[j] = x0[j]
            while idx < ns and sample_times[idx] <= 0.0:
                for j in range(d):
                    out[idx, j] = y[j]
                idx += 1
            poly_eval(&p, y, k)

            if h_init > 0:
                h = h_init
            else:
                d0 = 0.0
                d1 = 0.0
                for j in range(d):
                    sk = atol + rtol * fabs(y[j])
                    d0 += (y[j] / sk) ** 2
                    d1 += (k[j] / sk) ** 2
                d0 = sqrt(d0 / d)
                d1 = sqrt(d1 / d)
                if d0 < 1e-5 or d1 < 1e-5:
                    h0 = 1e-6
                else:
                    h0 = 0.01 * d0 / d1
                for j in range(d):
                    acc[j] = y[j] + h0 * k[j]
                poly_eval(&p, acc, errv)
                d2 = 0.0
                for j in range(d):
                    sk = atol + rtol * fabs(y[j])
                    d2 += ((errv[j] - k[j]) / sk) ** 2
                d2 = sqrt(d2 / d) / h0
                if (d1 if d1 > d2 else d2) <= 1e-15:
                    h1 = h0 * 1e-3
                    if h1 < 1e-6:
                        h1 = 1e-6
                else:
                    h1 = pow(0.01 / (d1 if d1 > d2 else d2), 0.2)
                h = 100 * h0
                if h1 < h:
                    h = h1
                if max_step < h:
                    h = max_step

            while t < t_end:
                if n_steps >= max_steps:
                    status = 3
                    break
                if max_step < h:
                    h = max_step
                last = 0
                if t + 1.01 * h >= t_end:
                    h = t_end - t
                    last = 1
                if h <= 16 * DBL_EPS * (fabs(t) if fabs(t) > 1.0 else 1.0):
                    status = 2
                    break
                for s in range(1, 6):
                    for j in range(d):
                        w = y[j]
                        for c in range(s):
                            if A_[s][c] != 0.0:
                                w = w + h * A_[s][c] * k[c * d + j]
                        acc[j] = w
                    poly_eval(&p, acc, k + s * d)
                for j in range(d):
                    w = 0.0
                    for c in range(6):
                        w = w + B_[c] * k[c * d + j]
                    ynew[j] = y[j] + h * w
                poly_eval(&p, ynew, k + 6 * d)
                n_steps += 1

                err = 0.0
                for j in range(d):
                    w = 0.0
                    for c in range(7):
                        w = w + E_[c] * k[c * d + j]
                    sc = atol + rtol * (fabs(y[j]) if fabs(y[j]) > fabs(ynew[j]) else fabs(ynew[j]))
                    err += (h * w / sc) ** 2
                err = sqrt(err / d)
                if not isfinite(err):
                    err = 1e10
                fac11 = pow(err, EXPO)
                if err <= 1.0:
                    norm = 0.0
                    for j in range(d):
                        norm += ynew[j] * ynew[j]
                    if not isfinite(norm) or sqrt(norm) > max_norm:
                        status = 1
                        break
                    t_new = t_end if last else t + h
                    while idx < ns and sample_times[idx] <= t_new:
                        theta = (sample_times[idx] - t) / h
                        for i in range(7):
                            w = 0.0
                            tpow = theta
                            for c in range(4):
                                w = w + P_[i][c] * tpow
                                tpow = tpow * theta
                            wts[i] = w
                        for j in range(d):
                            w = 0.0
                            for i in range(7):
                                w = w + wts[i] * k[i * d + j]
                            out[idx, j] = y[j] + h * w
                        idx += 1
                    fac = fac11 / pow(facold, BETA) / SAFETY
                    if fac < 1.0 / FAC_MAX:
                        fac = 1.0 / FAC_MAX
                    if fac > 1.0 / FAC_MIN:
                        fac = 1.0 / FAC_MIN
                    facold = err if err > 1e-4 else 1e-4
                    t = t_new
                    for j in range(d):
                        y[j] = ynew[j]
                        k[j] = k[6 * d + j]
                    h = h / fac
                else:
                    n_rejected += 1
                    fac = fac11 / SAFETY
                    if fac > 1.0 / FAC_MIN:
                        fac = 1.0 / FAC_MIN
                    h = h / fac
        y_arr = np.array([y[j] for j in range(d)])
    finally:
        free(work)
    return out_arr, idx, status, t, y_arr, n_steps, n_rejected


def pair_counts(const double[:, ::1] pts, const double[::1] radii):
    """Unordered pairs with distance <= r, for each ascending radius r."""
    cdef Py_ssize_t n = pts.shape[0], d = pts.shape[1], nr = radii.shape[0]
    cdef Py_ssize_t i, j, m, lo, hi, mid
    cdef double s, diff
    hist_arr = np.zeros(nr + 1, dtype=np.int64)
    cdef long long[::1] hist = hist_arr
    r2_arr = np.asarray(radii, dtype=np.float64) ** 2
    cdef double[::1] r2 = r2_arr
    cdef double rmax2 = r2[nr - 1] if nr > 0 else 0.0
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                s = 0.0
                for m in range(d):
                    diff = pts[j, m] - pts[i, m]
                    s = s + diff * diff
                if s > rmax2:
                    hist[nr] += 1
                    continue
                # first index with r2[idx] >= s
                lo = 0
                hi = nr
                while lo < hi:
                    mid = (lo + hi) // 2
                    if r2[mid] < s:
                        lo = mid + 1
                    else:
                        hi = mid
                hist[lo] += 1
    return np.cumsum(hist_arr[:nr])
