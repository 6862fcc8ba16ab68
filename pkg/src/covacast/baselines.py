"""Classical reference forecasters: seasonal naive and an AR(p) model with
optional first differencing, estimated by conditional least squares."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HistoryTooShort, InsufficientData
from .series import TimeSeries

RIDGE_DAMPING = 1e-8


@dataclass(frozen=True)
class ARModel:
    order_p: int
    differencing_d: int
    coefficients: tuple[float, ...]
    intercept: float
    training_residual_variance: float
    ridge_fallback: bool = False

    def __post_init__(self):
        if len(self.coefficients) != self.order_p:
            raise ValueError("coefficient count must equal the order")
        if self.training_residual_variance < 0:
            raise ValueError("residual variance must be nonnegative")


def _values(history) -> np.ndarray:
    if isinstance(history, TimeSeries):
        return np.asarray(history.values, dtype=float)
    return np.asarray(history, dtype=float)


def seasonal_naive_forecast(history, period: int, horizon: int) -> list[float]:
    """Repeat the last observed cycle: step k takes the value one period back."""
    if period < 1 or horizon < 1:
        raise ValueError("period and horizon must be positive")
    vals = _values(history)
    if len(vals) < period:
        raise HistoryTooShort(f"need at least {period} points, have {len(vals)}")
    return [float(vals[-period + ((k - 1) % period)]) for k in range(1, horizon + 1)]


def fit_ar(history, p: int, d: int) -> ARModel:
    """Fit z_t = c + sum phi_i z_{t-i} + e on the d-times differenced series.

    Mean-adjusted conditional least squares: the differenced series is
    demeaned, the lag weights solve the normal equations, and the intercept is
    recovered as mean * (1 - sum phi). Exactly collinear lag designs fall back
    to a ridge solve (damping 1e-8) and set `ridge_fallback`.
    """
    if p < 1:
        raise ValueError("order p must be positive")
    if d not in (0, 1):
        raise ValueError("differencing d must be 0 or 1")
    y = _values(history)
    if len(y) < p + d + 2:
        raise InsufficientData(f"need at least {p + d + 2} points, have {len(y)}")

    z = np.diff(y) if d else y
    mu = float(np.mean(z))
    w = z - mu
    rows = len(w) - p
    target = w[p:]
    design = np.column_stack([w[p - 1 - i : p - 1 - i + rows] for i in range(p)])

    ridge = False
    gram = design.T @ design
    moment = design.T @ target
    if rows >= p and np.linalg.matrix_rank(design) == p:
        phi = np.linalg.solve(gram, moment)
    else:
        ridge = True
        phi = np.linalg.solve(gram + RIDGE_DAMPING * np.eye(p), moment)

    residuals = target - design @ phi
    dof = max(1, rows - p)
    variance = float(residuals @ residuals / dof)
    intercept = mu * (1.0 - float(np.sum(phi)))
    return ARModel(
        order_p=p,
        differencing_d=d,
        coefficients=tuple(float(c) for c in phi),
        intercept=intercept,
        training_residual_variance=variance,
        ridge_fallback=ridge,
    )


def ar_forecast(model: ARModel, history, horizon: int) -> list[float]:
    """Iterate the fitted recursion forward, feeding predictions back as lags;
    differencing is inverted by cumulative summation from the last level."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    y = _values(history)
    p, d = model.order_p, model.differencing_d
    if len(y) < p + d:
        raise InsufficientData(f"need at least {p + d} points, have {len(y)}")

    z = np.diff(y) if d else y
    lags = list(z[len(z) - p :]) if p else []
    steps: list[float] = []
    for _ in range(horizon):
        nxt = model.intercept
        for i in range(p):
            nxt += model.coefficients[i] * lags[-1 - i]
        steps.append(float(nxt))
        lags.append(nxt)

    if d == 0:
        return steps
    level = float(y[-1])
    out = []
    for step in steps:
        level = level + step
        out.append(level)
    return out
