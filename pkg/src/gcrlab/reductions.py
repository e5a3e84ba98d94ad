"""Summation policy for norms and quadratures.

In deterministic mode every reduction is a strict left-to-right serial sum
over the C-ordered node sequence, so results are reproducible bit for bit
regardless of how the arrays were produced. Otherwise numpy's pairwise
summation is used (more accurate, order is an implementation detail).
"""

import contextlib
import threading

import numpy as np

_state = threading.local()


def is_deterministic():
    return getattr(_state, "deterministic", False)


def set_deterministic(flag):
    _state.deterministic = bool(flag)


@contextlib.contextmanager
def deterministic_mode(flag=True):
    previous = is_deterministic()
    set_deterministic(flag)
    try:
        yield
    finally:
        set_deterministic(previous)


def serial_sum(values):
    """Strict serial sum of a flattened array."""
    flat = np.ascontiguousarray(values, dtype=float).ravel()
    if flat.size == 0:
        return 0.0
    return float(np.cumsum(flat)[-1])


def total(values):
    """Sum of all entries under the active summation policy."""
    if is_deterministic():
        return serial_sum(values)
    return float(np.sum(values))


def batched_total(values, nbatch_axes):
    """Sum over trailing axes, one result per leading index tuple.

    ``values`` has shape ``lead + trailing`` where ``lead`` spans the first
    ``nbatch_axes`` axes.
    """
    values = np.asarray(values, dtype=float)
    lead = values.shape[:nbatch_axes]
    flat = np.ascontiguousarray(values).reshape(lead + (-1,))
    if flat.shape[-1] == 0:
        return np.zeros(lead)
    if is_deterministic():
        return np.cumsum(flat, axis=-1)[..., -1]
    return np.sum(flat, axis=-1)
