"""Accuracy metrics over pooled forecast/truth pairs.

MAE  = (1/n) sum |pred_i - truth_i|
RMSE = sqrt((1/n) sum (pred_i - truth_i)^2)
MAPE = 100 * (1/m) sum |(pred_i - truth_i) / truth_i| over the m pairs with
       truth_i != 0; skipped zero-truth pairs are counted, never silent.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    mae: float
    mape_percent: float | None  # None when every truth is zero
    n_points: int
    n_skipped_zero_truth: int

    def metric(self, name: str) -> float | None:
        if name == "rmse":
            return self.rmse
        if name == "mae":
            return self.mae
        if name in ("mape", "mape_percent"):
            return self.mape_percent
        raise ValueError(f"unknown metric {name!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(
            rmse=d["rmse"],
            mae=d["mae"],
            mape_percent=d["mape_percent"],
            n_points=d["n_points"],
            n_skipped_zero_truth=d["n_skipped_zero_truth"],
        )


def compute_metrics(predictions, truths) -> MetricReport:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.ndim != 1 or t.ndim != 1 or p.shape != t.shape:
        raise LengthMismatch(f"got {p.shape} predictions and {t.shape} truths")
    if p.size == 0:
        raise EmptyInput("no forecast/truth pairs")
    if not (np.isfinite(p).all() and np.isfinite(t).all()):
        raise ValueError("predictions and truths must be finite")

    err = p - t
    mae = float(np.mean(np.abs(err)))
    rmse = float(math.sqrt(np.mean(err**2)))
    nonzero = t != 0.0
    skipped = int(t.size - np.count_nonzero(nonzero))
    if skipped == t.size:
        mape = None
    else:
        mape = float(np.mean(np.abs(err[nonzero] / t[nonzero])) * 100.0)

    # quadratic mean dominates arithmetic mean; tolerance covers float rounding
    assert rmse >= mae - 1e-9 * max(1.0, rmse), "power-mean inequality violated"
    return MetricReport(
        rmse=rmse,
        mae=mae,
        mape_percent=mape,
        n_points=int(t.size),
        n_skipped_zero_truth=skipped,
    )
