"""Select the compiled kernels when available, else the NumPy reference.

Set ``SKYSLICE_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("SKYSLICE_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def backend_module(name: str | None = None):
    """Return the kernel module for ``name`` ('python' / 'cython'), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def link_quality(ev_pos, bs_pos, pair_bs, power, h2, noise, min_az, d_ref):
    return _impl.link_quality(
        np.ascontiguousarray(ev_pos, dtype=float),
        np.ascontiguousarray(bs_pos, dtype=float),
        np.ascontiguousarray(pair_bs, dtype=np.int64),
        np.ascontiguousarray(power, dtype=float),
        np.ascontiguousarray(h2, dtype=float),
        float(noise), float(min_az), float(d_ref),
    )


def evaluate_slices(fractions, avail, pair_slice, has_task, lq, w, f, t_ask,
                    eta, omega_v, op_w, omega_1, omega_2):
    return _impl.evaluate_slices(
        np.ascontiguousarray(fractions, dtype=float),
        np.ascontiguousarray(avail, dtype=float),
        np.ascontiguousarray(pair_slice, dtype=np.int64),
        np.ascontiguousarray(has_task, dtype=np.uint8),
        np.ascontiguousarray(lq, dtype=float),
        np.ascontiguousarray(w, dtype=float),
        np.ascontiguousarray(f, dtype=float),
        np.ascontiguousarray(t_ask, dtype=float),
        float(eta), float(omega_v),
        np.ascontiguousarray(op_w, dtype=float),
        float(omega_1), float(omega_2),
    )


def scan_actions(fractions, agent, candidates, step_scale, avail, pair_slice, has_task,
                 lq, w, f, t_ask, eta, omega_v, op_w, omega_1, omega_2):
    return _impl.scan_actions(
        np.ascontiguousarray(fractions, dtype=float),
        int(agent),
        np.ascontiguousarray(candidates, dtype=float),
        float(step_scale),
        np.ascontiguousarray(avail, dtype=float),
        np.ascontiguousarray(pair_slice, dtype=np.int64),
        np.ascontiguousarray(has_task, dtype=np.uint8),
        np.ascontiguousarray(lq, dtype=float),
        np.ascontiguousarray(w, dtype=float),
        np.ascontiguousarray(f, dtype=float),
        np.ascontiguousarray(t_ask, dtype=float),
        float(eta), float(omega_v),
        np.ascontiguousarray(op_w, dtype=float),
        float(omega_1), float(omega_2),
    )
