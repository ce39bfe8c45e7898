# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of :mod:`skyslice._kernels_py`; same signatures and semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, acos, log2, exp, fabs, INFINITY, NAN

cnp.import_array()

cdef double GAIN_CONST = 16.0 / (6.76 * sqrt(8.0 * 0.6931471805599453 * 2.718281828459045))
cdef double PROJECTION_SLACK = 1e-12


cdef inline double _sigmoid(double z) nogil:
    cdef double ez = exp(-fabs(z))
    if z >= 0.0:
        return 1.0 / (1.0 + ez)
    return ez / (1.0 + ez)


cdef inline double _delay(double vb, double vm, double vc, const double[::1] avail,
                          double lq, double w, double f) nogil:
    cdef double rate = vb * avail[0] * lq * (vm * avail[1])
    cdef double cap = vc * avail[2]
    cdef double t_tran = w / rate if rate > 0.0 else INFINITY
    cdef double t_comp = f / cap if cap > 0.0 else INFINITY
    return t_tran + t_comp


def link_quality(const double[:, ::1] ev_pos, const double[:, ::1] bs_pos,
                 const cnp.int64_t[::1] pair_bs, const double[::1] power,
                 const double[:, ::1] h2, double noise, double min_az, double d_ref):
    cdef Py_ssize_t n = ev_pos.shape[0]
    cdef Py_ssize_t i, k, j
    cdef double interference, sinr, dx, dy, dz, d, c, az, dn
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        j = pair_bs[i]
        if j < 0:
            continue
        interference = 0.0
        for k in range(n):
            if pair_bs[k] >= 0 and pair_bs[k] != j:
                interference += power[k] * h2[k, j]
        sinr = power[i] * h2[i, j] / (interference + noise)
        dx = ev_pos[i, 0] - bs_pos[j, 0]
        dy = ev_pos[i, 1] - bs_pos[j, 1]
        dz = ev_pos[i, 2] - bs_pos[j, 2]
        d = sqrt(dx * dx + dy * dy + dz * dz)
        if d <= 0.0:
            continue
        c = dz / d
        if c > 1.0:
            c = 1.0
        elif c < -1.0:
            c = -1.0
        az = acos(c)
        if az < min_az:
            az = min_az
        dn = d / d_ref
        out[i] = log2(1.0 + sinr) * (GAIN_CONST / az) / (dn * dn)
    return out_arr


def evaluate_slices(const double[:, ::1] fractions, const double[::1] avail,
                    const cnp.int64_t[::1] pair_slice, const cnp.uint8_t[::1] has_task,
                    const double[::1] lq, const double[::1] w, const double[::1] f,
                    const double[::1] t_ask, double eta, double omega_v,
                    const double[::1] op_w, double omega_1, double omega_2):
    cdef Py_ssize_t nq = fractions.shape[0]
    cdef Py_ssize_t n = lq.shape[0]
    cdef Py_ssize_t i, q
    cdef double d, s, mean
    delay_arr = np.full(n, np.nan)
    sat_arr = np.full(n, np.nan)
    sat_sum_arr = np.zeros(nq)
    users_arr = np.zeros(nq, dtype=np.int64)
    late_arr = np.zeros(nq, dtype=np.int64)
    op_arr = np.zeros(nq)
    reward_arr = np.zeros(nq)
    cdef double[::1] delay = delay_arr
    cdef double[::1] sat = sat_arr
    cdef double[::1] sat_sum = sat_sum_arr
    cdef cnp.int64_t[::1] users = users_arr
    cdef cnp.int64_t[::1] late = late_arr
    cdef double[::1] op = op_arr
    cdef double[::1] reward = reward_arr
    for i in range(n):
        q = pair_slice[i]
        if q < 0 or not has_task[i]:
            continue
        d = _delay(fractions[q, 0], fractions[q, 1], fractions[q, 2], avail, lq[i], w[i], f[i])
        s = _sigmoid(eta * (t_ask[i] - d))
        delay[i] = d
        sat[i] = s
        sat_sum[q] += s
        users[q] += 1
        if d > t_ask[i]:
            late[q] += 1
    for q in range(nq):
        op[q] = fractions[q, 0] * op_w[0] + fractions[q, 1] * op_w[1] + fractions[q, 2] * op_w[2]
        mean = sat_sum[q] / users[q] if users[q] > 0 else 0.5
        reward[q] = omega_1 * (mean - 0.5) - omega_2 * (omega_v * late[q] + op[q])
    return delay_arr, sat_arr, sat_sum_arr, users_arr, late_arr, op_arr, reward_arr


def scan_actions(const double[:, ::1] fractions, Py_ssize_t agent,
                 const double[:, ::1] candidates, double step_scale,
                 const double[::1] avail, const cnp.int64_t[::1] pair_slice,
                 const cnp.uint8_t[::1] has_task, const double[::1] lq,
                 const double[::1] w, const double[::1] f, const double[::1] t_ask,
                 double eta, double omega_v, const double[::1] op_w,
                 double omega_1, double omega_2):
    cdef Py_ssize_t nk = candidates.shape[0]
    cdef Py_ssize_t nq = fractions.shape[0]
    cdef Py_ssize_t n = lq.shape[0]
    cdef Py_ssize_t c, r, i, q, nu
    cdef double others[3]
    cdef double row[3]
    cdef double v, tot, d, sat_total, op
    cdef Py_ssize_t late
    out_arr = np.empty(nk)
    cdef double[::1] out = out_arr
    for r in range(3):
        others[r] = 0.0
        for q in range(nq):
            others[r] += fractions[q, r]
        others[r] -= fractions[agent, r]
    for c in range(nk):
        for r in range(3):
            v = fractions[agent, r] + candidates[c, r] * step_scale
            if v < 0.0:
                v = 0.0
            elif v > 1.0:
                v = 1.0
            tot = others[r] + v
            if tot > 1.0 + PROJECTION_SLACK:
                v = v / tot
            row[r] = v
        op = row[0] * op_w[0] + row[1] * op_w[1] + row[2] * op_w[2]
        sat_total = 0.0
        late = 0
        nu = 0
        for i in range(n):
            if pair_slice[i] != agent or not has_task[i]:
                continue
            d = _delay(row[0], row[1], row[2], avail, lq[i], w[i], f[i])
            sat_total += _sigmoid(eta * (t_ask[i] - d))
            if d > t_ask[i]:
                late += 1
            nu += 1
        if nu == 0:
            out[c] = -omega_2 * op
        else:
            out[c] = omega_1 * (sat_total / nu - 0.5) - omega_2 * (omega_v * late + op)
    return out_arr
