"""Pure-NumPy implementation of the batched link / slice evaluation kernels.

Array conventions (n eVTOLs, m base stations, q slices):
    ev_pos (n, 3), bs_pos (m, 3), pair_bs (n,) int (-1 = not transmitting),
    pair_slice (n,) int (-1 = none), power (n,), h2 (n, m), fractions (q, 3),
    avail (3,) absolute resources released to the orchestrator,
    op_w (3,) cost per unit fraction of each resource.
"""
import math

import numpy as np

GAIN_CONST = 16.0 / (6.76 * math.sqrt(8.0 * math.log(2.0) * math.e))
PROJECTION_SLACK = 1e-12


def link_quality(ev_pos, bs_pos, pair_bs, power, h2, noise, min_az, d_ref):
    """log2(1 + SINR) * peak gain / (d / d_ref)^2 per eVTOL; 0 when not transmitting."""
    n = ev_pos.shape[0]
    out = np.zeros(n)
    tx = np.flatnonzero(pair_bs >= 0)
    if tx.size == 0:
        return out
    j = pair_bs[tx]
    # received power at BS j from every transmitter k: power[k] * h2[k, j]
    rx = power[tx][None, :] * h2[tx][:, j].T  # (links, transmitters)
    same_bs = j[:, None] == j[None, :]
    interference = np.where(same_bs, 0.0, rx).sum(axis=1)
    signal = power[tx] * h2[tx, j]
    sinr = signal / (interference + noise)
    diff = ev_pos[tx] - bs_pos[j]
    d = np.sqrt((diff * diff).sum(axis=1))
    ok = d > 0.0
    dz = np.where(ok, diff[:, 2] / np.where(ok, d, 1.0), 1.0)
    az = np.maximum(np.arccos(np.clip(dz, -1.0, 1.0)), min_az)
    dn = np.where(ok, d / d_ref, 1.0)
    lq = np.log2(1.0 + sinr) * (GAIN_CONST / az) / (dn * dn)
    out[tx] = np.where(ok, lq, 0.0)
    return out


def _delays(vb, vm, vc, avail, lq, w, f):
    rate = vb * avail[0] * lq * (vm * avail[1])
    cap = vc * avail[2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_tran = np.where(rate > 0.0, w / np.where(rate > 0.0, rate, 1.0), np.inf)
        t_comp = np.where(cap > 0.0, f / np.where(cap > 0.0, cap, 1.0), np.inf)
    return t_tran + t_comp


def _sigmoid(z):
    ez = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + ez), ez / (1.0 + ez))


def evaluate_slices(fractions, avail, pair_slice, has_task, lq, w, f, t_ask,
                    eta, omega_v, op_w, omega_1, omega_2):
    """Per-eVTOL delay/satisfaction and per-slice aggregates.

    Returns (delay, sat, sat_sum, users, late, op_cost, reward); eVTOLs with no
    slice or no task get delay = nan and sat = nan.
    """
    nq = fractions.shape[0]
    n = lq.shape[0]
    delay = np.full(n, np.nan)
    sat = np.full(n, np.nan)
    served = (pair_slice >= 0) & has_task
    idx = np.flatnonzero(served)
    q = pair_slice[idx]
    fr = fractions[q]
    d = _delays(fr[:, 0], fr[:, 1], fr[:, 2], avail, lq[idx], w[idx], f[idx])
    s = _sigmoid(eta * (t_ask[idx] - d))
    delay[idx] = d
    sat[idx] = s
    sat_sum = np.zeros(nq)
    users = np.zeros(nq, dtype=np.int64)
    late = np.zeros(nq, dtype=np.int64)
    for k, qq in enumerate(q):
        sat_sum[qq] += s[k]
        users[qq] += 1
        if d[k] > t_ask[idx[k]]:
            late[qq] += 1
    op = fractions[:, 0] * op_w[0] + fractions[:, 1] * op_w[1] + fractions[:, 2] * op_w[2]
    mean = np.where(users > 0, sat_sum / np.maximum(users, 1), 0.5)
    reward = omega_1 * (mean - 0.5) - omega_2 * (omega_v * late + op)
    return delay, sat, sat_sum, users, late, op, reward


def scan_actions(fractions, agent, candidates, step_scale, avail, pair_slice, has_task,
                 lq, w, f, t_ask, eta, omega_v, op_w, omega_1, omega_2):
    """One-step reward of slice ``agent`` for each candidate action, others holding still."""
    k = candidates.shape[0]
    row = np.clip(fractions[agent][None, :] + candidates * step_scale, 0.0, 1.0)
    others = fractions.sum(axis=0) - fractions[agent]
    sums = others[None, :] + row
    over = sums > 1.0 + PROJECTION_SLACK
    row = np.where(over, row / np.where(over, sums, 1.0), row)
    users = np.flatnonzero((pair_slice == agent) & has_task)
    op = row[:, 0] * op_w[0] + row[:, 1] * op_w[1] + row[:, 2] * op_w[2]
    if users.size == 0:
        return -omega_2 * op
    d = _delays(row[:, 0:1], row[:, 1:2], row[:, 2:3], avail,
                lq[users][None, :], w[users][None, :], f[users][None, :])
    s = _sigmoid(eta * (t_ask[users][None, :] - d))
    late = (d > t_ask[users][None, :]).sum(axis=1)
    mean = s.sum(axis=1) / users.size
    return omega_1 * (mean - 0.5) - omega_2 * (omega_v * late + op)
