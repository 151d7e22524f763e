"""Time-series ingestion, scaling, chronological splits and the synthetic benchmark.

Models forecast one step ahead: inputs (non-target columns) at time ``t``
predict the target columns at ``t + 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class TimeSeries:
    columns: list[str]
    values: np.ndarray  # T x n
    targets: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ValueError("values must be T x len(columns)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("time series contains non-finite values")
        if any(not 0 <= t < len(self.columns) for t in self.targets):
            raise ValueError("target index out of range")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def input_indices(self) -> list[int]:
        return [i for i in range(len(self.columns)) if i not in self.targets]

    @property
    def input_columns(self) -> list[str]:
        return [self.columns[i] for i in self.input_indices]

    @property
    def target_columns(self) -> list[str]:
        return [self.columns[i] for i in self.targets]

    def window(self, start: int, stop: int) -> "TimeSeries":
        return TimeSeries(list(self.columns), self.values[start:stop].copy(), list(self.targets))

    def supervised(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, Y)`` with ``X[t]`` = inputs at ``t`` and ``Y[t]`` = targets at ``t + 1``."""
        return self.values[:-1][:, self.input_indices], self.values[1:][:, self.targets]


def load_csv(path, target_columns: list[str]) -> TimeSeries:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    missing = [t for t in target_columns if t not in header]
    if missing:
        raise ValueError(f"{path}: unknown target column(s) {missing}; available: {header}")
    body = []
    bad = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            vals = [float(c) for c in row]
            if len(vals) != len(header) or not all(math.isfinite(v) for v in vals):
                raise ValueError
        except ValueError:
            bad.append(lineno)
            continue
        body.append(vals)
    if bad:
        shown = ", ".join(map(str, bad[:10])) + (" ..." if len(bad) > 10 else "")
        raise ValueError(f"{path}: non-numeric or missing cells on row(s) {shown}")
    if not body:
        raise ValueError(f"{path}: no data rows")
    return TimeSeries(header, np.array(body), [header.index(t) for t in target_columns])


def write_csv(path, columns: list[str], values: np.ndarray) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in np.asarray(values):
            w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class MinMaxStats:
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def constant(self) -> np.ndarray:
        return self.maxs == self.mins

    def apply(self, values: np.ndarray) -> np.ndarray:
        span = np.where(self.constant, 1.0, self.maxs - self.mins)
        out = (np.asarray(values, dtype=float) - self.mins) / span
        return np.where(self.constant, 0.5, out)

    def invert(self, values: np.ndarray, columns=None) -> np.ndarray:
        idx = slice(None) if columns is None else list(columns)
        lo, hi = self.mins[idx], self.maxs[idx]
        return np.where(hi == lo, lo, np.asarray(values, dtype=float) * (hi - lo) + lo)

    def to_dict(self) -> dict:
        return {"min": self.mins.tolist(), "max": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MinMaxStats":
        return cls(np.array(d["min"], dtype=float), np.array(d["max"], dtype=float))


def minmax_normalize(series: TimeSeries, stats: MinMaxStats | None = None):
    """Scale every column to [0, 1]; constant columns become 0.5.

    Pass ``stats`` to reuse scaling fitted on another window.
    """
    if stats is None:
        if len(series) < 2:
            raise ValueError("need at least 2 rows to normalize")
        stats = MinMaxStats(series.values.min(axis=0), series.values.max(axis=0))
    scaled = TimeSeries(list(series.columns), stats.apply(series.values), list(series.targets))
    return scaled, stats


def denormalize(values: np.ndarray, stats: MinMaxStats, columns=None) -> np.ndarray:
    return stats.invert(values, columns)


def split(series: TimeSeries, train_len: int, test_len: int) -> tuple[TimeSeries, TimeSeries]:
    if train_len < 4 or test_len < 4:
        raise ValueError("train and test windows need at least 4 rows each")
    if train_len + test_len > len(series):
        raise ValueError(
            f"split needs {train_len + test_len} rows but the series has {len(series)}"
        )
    return series.window(0, train_len), series.window(train_len, train_len + test_len)


def synth_generate(seed: int, T: int, n_inputs: int, noise_std: float = 0.05) -> TimeSeries:
    """Synthetic multivariate series with a known lagged nonlinear target.

    Each input ``x_i`` is a unit-variance AR(1) process with coefficient 0.7.
    The target column ``y`` follows::

        y[t] = 0.5 * tanh(x1[t-1]) + 0.3 * x2[t-2] * x1[t-1] + noise

    with ``noise ~ N(0, noise_std**2)``; ``y[0] = y[1] = noise`` because the
    lagged terms are taken as zero before the start.
    """
    if T < 100 or n_inputs < 2:
        raise ValueError("synth_generate needs T >= 100 and n_inputs >= 2")
    rng = np.random.default_rng(seed)
    phi = 0.7
    x = np.zeros((T, n_inputs))
    x[0] = rng.normal(0.0, 1.0, n_inputs)
    innov = rng.normal(0.0, math.sqrt(1 - phi * phi), (T, n_inputs))
    for t in range(1, T):
        x[t] = phi * x[t - 1] + innov[t]
    y = synth_target(x) + rng.normal(0.0, 1.0, T) * noise_std
    cols = [f"x{i + 1}" for i in range(n_inputs)] + ["y"]
    return TimeSeries(cols, np.column_stack([x, y]), [n_inputs])


def synth_target(x: np.ndarray) -> np.ndarray:
    """Noise-free target of :func:`synth_generate` from its input matrix."""
    T = x.shape[0]
    x1_lag1 = np.concatenate([[0.0], x[:-1, 0]])
    x2_lag2 = np.concatenate([[0.0, 0.0], x[:-2, 1]])[:T]
    return 0.5 * np.tanh(x1_lag1) + 0.3 * x2_lag2 * x1_lag1


def persistence_mse(region: TimeSeries, start: int = 0) -> float:
    """MSE of forecasting ``target[t+1] = target[t]`` for pairs from ``start`` on."""
    y = region.values[:, region.targets]
    return float(np.mean((y[start + 1 :] - y[start:-1]) ** 2))
