"""Real-time smoothing and mounting-angle change detection.

The estimator consumes one raw model output every half second and keeps a
smoothed angle via a capped running average on wrapped differences. Raw
outputs further than the outlier threshold from the smoothed angle are
held out; five consecutive seconds of outliers trigger a rebase to the
circular mean of the recent raw outputs, which is what detects genuine
mid-drive mounting changes.

During the first five seconds the estimator reports 0 and pumps its
outlier timer, so the first post-warmup step always runs the rebase path:
that is how the smoothed angle gets initialized from data. Event consumers
should therefore count rebases with t > warmup only.
"""

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .angles import angle_diff, circular_mean, wrap_angle
from .constants import STEP_PERIOD_S
from .errors import MalformedStreamError
from .signal import StreamingPreprocessor

ALPHA_T = np.pi / 6.0
N_MAX = 30.0
WARMUP_S = 5.0
OUTLIER_WINDOW_S = 5.0
GAP_RESET_S = 1.0

WARMING = "warming"
TRACKING = "tracking"
OUTLIER_HOLD = "outlier-hold"
REBASED = "rebased"
STATUSES = (WARMING, TRACKING, OUTLIER_HOLD, REBASED)


@dataclass
class EstimatorParams:
    """Tunables of the streaming estimator.

    paper_faithful drops the cosine-positivity guard from the inlier test,
    leaving the bare sin-threshold rule (which also admits differences
    near pi).
    """

    alpha_t_rad: float = ALPHA_T
    n_max: float = N_MAX
    step_period_s: float = STEP_PERIOD_S
    warmup_s: float = WARMUP_S
    outlier_window_s: float = OUTLIER_WINDOW_S
    paper_faithful: bool = False


@dataclass
class EstimatorState:
    """Mutable per-stream state; one owner per stream, constant size."""

    t: float = None               # elapsed stream seconds at the last step
    psi_hat: float = 0.0          # last reported smoothed angle [rad]
    ctr_sec: float = 0.0          # consecutive-outlier timer [s]
    recent: deque = field(default_factory=lambda: deque(maxlen=11))

    def reset(self):
        self.t = None
        self.psi_hat = 0.0
        self.ctr_sec = 0.0
        self.recent.clear()


@dataclass
class EstimateReport:
    t: float                      # stream time of the step [s]
    psi_hat: float                # smoothed angle [rad]
    psi_raw: float                # raw model output [rad]; nan while warming
    status: str
    latency_ms: float = 0.0


def advance(state, t, raw, params=None):
    """One estimator step at stream time t with raw model output `raw`.

    Returns the step's status. `raw` may be nan during warmup when no full
    window exists yet; it is required once t reaches the warmup horizon.
    Exactly one of the four statuses applies per step:

      * warming       t < warmup: report 0, pump the outlier timer.
      * rebased       timer full: jump to the circular mean of the raw
                      outputs buffered over the last outlier window.
      * tracking      wrapped difference within the threshold: fold the raw
                      output in with weight 1/N, N = min(n_max, t).
      * outlier-hold  otherwise: keep the previous angle, pump the timer.
    """
    params = params or EstimatorParams()
    if state.t is not None and t <= state.t:
        raise MalformedStreamError("estimator stepped backwards in time")
    state.t = t
    if raw is not None and np.isfinite(raw):
        state.recent.append((t, float(raw)))

    if t < params.warmup_s:
        state.psi_hat = 0.0
        state.ctr_sec += params.step_period_s
        return WARMING

    if raw is None or not np.isfinite(raw):
        raise ValueError("raw output required once warmup is over")

    if state.ctr_sec >= params.outlier_window_s:
        buffered = [r for (tau, r) in state.recent
                    if t - params.outlier_window_s < tau <= t]
        state.psi_hat = wrap_angle(circular_mean(buffered))
        state.ctr_sec = 0.0
        return REBASED

    delta = angle_diff(raw, state.psi_hat)
    inlier = abs(np.sin(delta)) < np.sin(params.alpha_t_rad)
    if not params.paper_faithful:
        inlier = inlier and np.cos(delta) > 0.0
    if inlier:
        n = min(params.n_max, t)
        state.psi_hat = wrap_angle(state.psi_hat + delta / n)
        state.ctr_sec = 0.0
        return TRACKING

    state.ctr_sec += params.step_period_s
    return OUTLIER_HOLD


def step(state, window, model, params=None, t=None):
    """Model call + advance; the per-step entry point for window sources.

    window may be None while warming (no full window exists yet). t
    defaults to one step period past the previous step. Returns
    (state, EstimateReport); the state argument is mutated and returned
    for convenience.
    """
    params = params or EstimatorParams()
    if t is None:
        t = 0.0 if state.t is None else state.t + params.step_period_s
    raw = np.nan
    latency_ms = 0.0
    if window is not None:
        if model is None:
            raise ValueError("a trained model is required to process windows")
        t0 = time.perf_counter()
        raw = float(model.predict(window)[0])
        latency_ms = (time.perf_counter() - t0) * 1e3
    status = advance(state, t, raw, params)
    report = EstimateReport(t=t, psi_hat=state.psi_hat, psi_raw=raw,
                            status=status, latency_ms=latency_ms)
    return state, report


def run_stream(samples, model, params=None, *, absolute_time=True):
    """Drive the estimator from a raw 100 Hz sample stream.

    samples yields (t, sample6) pairs (file replay or live). Maintains the
    sliding-window preprocessing in streaming form and emits one
    EstimateReport per step period. A gap larger than one second resets
    both the preprocessing and the estimator state (the stream re-enters
    warming); the report clock stays absolute unless absolute_time=False.
    """
    params = params or EstimatorParams()
    pre = StreamingPreprocessor(step_period_s=params.step_period_s)
    state = EstimatorState()
    raw_per_step = int(round(params.step_period_s * 100.0))
    t0 = None
    prev_t = None
    i = 0

    for t, sample in samples:
        t = float(t)
        if prev_t is not None and t - prev_t > GAP_RESET_S:
            pre.reset()
            state.reset()
            t0 = None
            i = 0
        prev_t = t
        if t0 is None:
            t0 = t

        if i % raw_per_step == 0:
            elapsed = i / 100.0
            if elapsed < params.warmup_s:
                status = advance(state, elapsed, np.nan, params)
                yield EstimateReport(
                    t=(t0 + elapsed) if absolute_time else elapsed,
                    psi_hat=state.psi_hat, psi_raw=np.nan, status=status,
                )
        out = pre.push(t, sample)
        i += 1
        if out is not None:
            t_step, window = out
            t_clk = time.perf_counter()
            raw = float(model.predict(window)[0])
            latency_ms = (time.perf_counter() - t_clk) * 1e3
            status = advance(state, t_step, raw, params)
            yield EstimateReport(
                t=(t0 + t_step) if absolute_time else t_step,
                psi_hat=state.psi_hat, psi_raw=raw, status=status,
                latency_ms=latency_ms,
            )


def run_on_raw_trace(times, raws, params=None, state=None):
    """Apply the state machine to a recorded raw-output trace.

    Returns (psi_hat trace, statuses). Times below the warmup horizon are
    treated as warming steps regardless of the raw value; this is the
    entry point for offline smoothing studies.
    """
    params = params or EstimatorParams()
    state = state or EstimatorState()
    psi_hat = np.empty(len(times))
    statuses = []
    for k, (t, raw) in enumerate(zip(times, raws)):
        status = advance(state, float(t), float(raw), params)
        psi_hat[k] = state.psi_hat
        statuses.append(status)
    return psi_hat, statuses


def smoothing_study(times, raws, n_values=(1, 5, 15, 30, 45), params=None):
    """Re-run one recorded raw trace through the estimator per cap value.

    Returns {n_max: (psi_hat trace, statuses)}. With n_max = 1 every
    accepted output replaces the smoothed angle outright, so after a real
    change the output holds stale values until the timer-driven rebase
    fires; large caps trade convergence speed for smoothness.
    """
    base = params or EstimatorParams()
    out = {}
    for n in n_values:
        p = EstimatorParams(
            alpha_t_rad=base.alpha_t_rad, n_max=float(n),
            step_period_s=base.step_period_s, warmup_s=base.warmup_s,
            outlier_window_s=base.outlier_window_s,
            paper_faithful=base.paper_faithful,
        )
        out[n] = run_on_raw_trace(times, raws, p)
    return out


def count_rebases(reports_or_statuses, times=None, warmup_s=WARMUP_S):
    """Rebase events after the initialization rebase at the warmup edge."""
    if times is None:
        pairs = [(r.t, r.status) for r in reports_or_statuses]
    else:
        pairs = list(zip(times, reports_or_statuses))
    return sum(1 for t, s in pairs if s == REBASED and t > warmup_s + 1e-9)
