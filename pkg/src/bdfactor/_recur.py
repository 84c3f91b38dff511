"""Backward (Miller) evaluation of minimal solutions of first-order recurrences."""

from __future__ import annotations

from typing import Callable

import numpy as np

_AGREE = 1e-14


def minimal_backward(run: Callable[[int], np.ndarray], n_keep: int, start_extra: int = 64,
                     max_extra: int = 16384) -> np.ndarray | None:
    """Evaluate a minimal solution by backward recursion from growing start indices.

    ``run(M)`` must perform the backward recursion from index ``M`` with a
    zero start value and return the solution on ``0..M``.  Returns the
    first ``n_keep`` entries once two start indices agree, or ``None`` if the
    contamination decays too slowly (algebraic rather than geometric
    separation), in which case the forward direction is well-conditioned
    enough to use instead.
    """
    extra = start_extra
    prev = run(n_keep + extra)[:n_keep]
    while extra < max_extra:
        extra *= 2
        cur = run(n_keep + extra)[:n_keep]
        scale = np.maximum(np.abs(cur), np.finfo(float).tiny)
        if np.all(np.abs(cur - prev) <= _AGREE * scale):
            return cur
        prev = cur
    return None
