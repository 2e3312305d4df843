"""Dormand-Prince 5(4) stepping with a standard error controller.

The flows need to touch the state between steps (projection back onto a
level set, conservation checks, landing exactly on an angle), so this is a
small explicit stepper rather than a black-box solver.
"""

from __future__ import annotations

import numpy as np

from .errors import StepSizeError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array(_A[6] + [0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def dp_step(fun, s, y, h):
    """One Dormand-Prince step; returns (y5, error estimate y5 - y4)."""
    k = np.empty((7, y.size))
    k[0] = fun(s, y)
    for i in range(1, 7):
        yi = y + h * np.dot(_A[i], k[:i])
        k[i] = fun(s + _C[i] * h, yi)
    y5 = y + h * (_B5 @ k)
    return y5, h * (_E @ k)


class Stepper:
    """Adaptive driver: each call to :meth:`step` returns an accepted step."""

    def __init__(self, fun, rtol=1e-10, atol=1e-10, max_step=1e-2, h0=None, min_step=1e-14):
        self.fun = fun
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step
        self.min_step = min_step
        self.h = min(max_step, h0 if h0 is not None else max_step / 10)

    def step(self, s, y, h_cap=None):
        """Advance from (s, y); returns (s_new, y_new, h)."""
        while True:
            h = min(self.h, self.max_step)
            if h_cap is not None:
                h = min(h, h_cap)
            if h < self.min_step * (1.0 + abs(s)):
                raise StepSizeError(f"step size underflow at s={s:.6g} (h={h:.3e})")
            y_new, err = dp_step(self.fun, s, y, h)
            scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
            e = float(np.max(np.abs(err) / scale)) if np.all(np.isfinite(y_new)) else np.inf
            if e <= 1.0:
                grow = 5.0 if e == 0 else min(5.0, 0.9 * e ** -0.2)
                self.h = h * max(1.0, grow)
                return s + h, y_new, h
            self.h = h * max(0.1, 0.9 * e ** -0.25) if np.isfinite(e) else h * 0.1
