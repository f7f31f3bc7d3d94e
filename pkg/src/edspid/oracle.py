"""Floating-point discrete PID reference, independent of the spike path.

Used to cross-check the spike controller: record the closed-loop error as a
step function of time, reduce it to exact per-window means, and compute what
a conventional discrete PID would have commanded for the same error history.
Nothing here shares code with the spike blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clock import TICKS_PER_SECOND


@dataclass
class DiscretePid:
    """Classic positional-form PID sampled at a fixed period."""

    kp: float
    ki: float
    kd: float
    dt: float
    integral: float = 0.0
    prev_error: float = field(default=0.0)

    def step(self, error: float) -> float:
        self.integral += error * self.dt
        derivative = (error - self.prev_error) / self.dt
        self.prev_error = error
        return self.kp * error + self.ki * self.integral + self.kd * derivative


def step_windowed_means(trace: list[tuple[int, float]], window_ticks: int,
                        n_windows: int) -> np.ndarray:
    """Exact per-window means of a piecewise-constant signal.

    ``trace`` holds (tick, value) pairs: the signal takes ``value`` from that
    tick until the next entry.  Windows are [k*W, (k+1)*W) ticks.
    """
    if not trace:
        return np.zeros(n_windows)
    means = np.zeros(n_windows)
    end = n_windows * window_ticks
    for i, (t0, value) in enumerate(trace):
        t1 = trace[i + 1][0] if i + 1 < len(trace) else end
        t0, t1 = max(t0, 0), min(t1, end)
        if t1 <= t0:
            continue
        k0 = t0 // window_ticks
        k1 = (t1 - 1) // window_ticks
        for k in range(k0, k1 + 1):
            lo = max(t0, k * window_ticks)
            hi = min(t1, (k + 1) * window_ticks)
            means[k] += value * (hi - lo)
    return means / window_ticks


def integral_windowed_means(trace: list[tuple[int, float]], window_ticks: int,
                            n_windows: int) -> np.ndarray:
    """Exact per-window means of the running time-integral of a step signal.

    The integral of a piecewise-constant signal is piecewise linear; each
    linear span [a, b] contributes (S(a)+S(b))/2 * (b-a) to the mean sums.
    """
    if not trace:
        return np.zeros(n_windows)
    end = n_windows * window_ticks
    means = np.zeros(n_windows)
    s = 0.0  # running integral in value*seconds
    for i, (t0, value) in enumerate(trace):
        t1 = trace[i + 1][0] if i + 1 < len(trace) else end
        t0c, t1c = max(t0, 0), min(t1, end)
        if t1c > t0c:
            k0 = t0c // window_ticks
            k1 = (t1c - 1) // window_ticks
            for k in range(k0, k1 + 1):
                lo = max(t0c, k * window_ticks)
                hi = min(t1c, (k + 1) * window_ticks)
                s_lo = s + value * (lo - t0) / TICKS_PER_SECOND
                s_hi = s + value * (hi - t0) / TICKS_PER_SECOND
                means[k] += 0.5 * (s_lo + s_hi) * (hi - lo)
        if i + 1 < len(trace):
            s += value * (trace[i + 1][0] - t0) / TICKS_PER_SECOND
    return means / window_ticks


def pid_drive_windows(error_trace: list[tuple[int, int]], window_ticks: int,
                      n_windows: int, kp_rate: float, ki_rate: float,
                      kd_rate: float) -> np.ndarray:
    """Oracle drive (spikes/s) per window for a recorded error history.

    * P acts on the window's mean error.
    * I acts on the window's mean running error integral.
    * D acts on the change in mean error between the two windows before this
      one (the windowed differentiator publishes at each boundary, so its
      command is in force during the following window).
    """
    e_mean = step_windowed_means(error_trace, window_ticks, n_windows)
    s_mean = integral_windowed_means(error_trace, window_ticks, n_windows)
    drive = kp_rate * e_mean + ki_rate * s_mean
    for k in range(1, n_windows):
        prev = e_mean[k - 1]
        prev2 = e_mean[k - 2] if k >= 2 else 0.0
        drive[k] += kd_rate * (prev - prev2)
    return drive
