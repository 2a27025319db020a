"""Peak / attenuation / bias fitting of rumor-driven search frequency.

The model for the daily search frequency of a rumor's fundamental entity,
``t`` days after the outbreak, is::

    y_t = exp(a * t + b) + c

where ``a`` (< 0) is the attenuation coefficient, ``b`` the peak coefficient
and ``c`` the background traffic unrelated to the rumor.  For a fixed ``c``
the pair ``(a, b)`` is an ordinary least-squares line through
``(t, ln(y_t - c))``; ``c`` is then re-estimated as the mean residual
``y_t - exp(a t + b)``.  The fitter alternates the two until ``c`` settles.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass
from os import PathLike
from typing import Sequence

import numpy as np

from .errors import (DegenerateSeries, NoDecayWarning, NonPositiveResidual,
                     ParseError, WindowOutOfRange)

log = logging.getLogger(__name__)

# Observed range of the attenuation coefficient across the rumor corpus.
A_RANGE = (-1.45, -0.26)


@dataclass(frozen=True)
class SearchSeries:
    """Consecutive daily search counts for one entity."""

    entity: str
    start: dt.date
    frequencies: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.ndim != 1:
            raise ValueError("frequencies must be one-dimensional")
        if not np.all(np.isfinite(f)) or np.any(f < 0):
            raise ValueError(f"{self.entity}: frequencies must be finite and ≥ 0")
        object.__setattr__(self, "frequencies", f)

    @classmethod
    def from_points(cls, entity: str, points: Sequence[tuple[dt.date, float]]) -> SearchSeries:
        if not points:
            raise ValueError(f"{entity}: empty series")
        dates = [p[0] for p in points]
        for prev, cur in zip(dates, dates[1:]):
            if (cur - prev).days != 1:
                raise ValueError(
                    f"{entity}: dates must increase by exactly one day ({prev} -> {cur})")
        return cls(entity, dates[0], np.array([p[1] for p in points], dtype=float))

    def __len__(self) -> int:
        return len(self.frequencies)

    @property
    def end(self) -> dt.date:
        return self.start + dt.timedelta(days=len(self) - 1)

    @property
    def dates(self) -> list[dt.date]:
        return [self.start + dt.timedelta(days=k) for k in range(len(self))]

    def points(self) -> list[tuple[dt.date, float]]:
        return list(zip(self.dates, self.frequencies.tolist()))

    def index_of(self, day: dt.date) -> int:
        return (day - self.start).days

    def covers(self, first: dt.date, last: dt.date) -> bool:
        return first >= self.start and last <= self.end

    def slice(self, first: dt.date, last: dt.date) -> SearchSeries:
        if not self.covers(first, last):
            raise WindowOutOfRange(
                f"{self.entity}: series {self.start}..{self.end} does not cover {first}..{last}")
        i, j = self.index_of(first), self.index_of(last)
        return SearchSeries(self.entity, first, self.frequencies[i:j + 1].copy())


def read_series_csv(path: str | PathLike[str], entity: str | None = None) -> SearchSeries:
    """Parse a ``date,frequency`` CSV (ISO dates, integer counts)."""
    name = entity if entity is not None else str(path)
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["date", "frequency"]:
            raise ParseError(f"expected header 'date,frequency', got {header}",
                             path=str(path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 columns, got {len(row)}",
                                 path=str(path), line=lineno)
            try:
                day = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"bad date {row[0]!r}", path=str(path),
                                 line=lineno, field="date") from None
            try:
                freq = int(row[1])
            except ValueError:
                raise ParseError(f"bad frequency {row[1]!r}", path=str(path),
                                 line=lineno, field="frequency") from None
            if freq < 0:
                raise ParseError("negative frequency", path=str(path),
                                 line=lineno, field="frequency")
            points.append((day, freq))
    try:
        return SearchSeries.from_points(name, points)
    except ValueError as exc:
        raise ParseError(str(exc), path=str(path)) from None


def write_series_csv(series: SearchSeries, path: str | PathLike[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "frequency"])
        for day, f in series.points():
            w.writerow([day.isoformat(), int(round(f))])


def extract_window(series: SearchSeries, outbreak_date: dt.date, length: int = 7) -> SearchSeries:
    """Return ``length`` days starting at the outbreak (day 0)."""
    if length < 1:
        raise ValueError("window length must be ≥ 1")
    last = outbreak_date + dt.timedelta(days=length - 1)
    return series.slice(outbreak_date, last)


def _as_array(window: SearchSeries | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(window, SearchSeries):
        return window.frequencies
    return np.asarray(window, dtype=float)


def _line_fit(t: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    # Closed-form solution of the 2x2 normal equations, written in centered
    # form so large day offsets do not cost precision.
    tm, zm = t.mean(), z.mean()
    dt_ = t - tm
    a = float(np.dot(dt_, z - zm) / np.dot(dt_, dt_))
    return a, float(zm - a * tm)


def ls_step(window: SearchSeries | Sequence[float], c: float) -> tuple[float, float]:
    """Least-squares ``(a, b)`` of ``ln(y_t - c)`` against ``t = 0..n``."""
    y = _as_array(window)
    if len(y) < 2:
        raise DegenerateSeries("need at least 2 points for a line fit")
    if np.any(y <= c):
        raise NonPositiveResidual(f"frequency ≤ bias {c!r}; logarithm undefined")
    t = np.arange(len(y), dtype=float)
    return _line_fit(t, np.log(y - c))


def total_intensity(a: float, b: float, n: int | float) -> float:
    """Sum of ``exp(a t + b)`` for ``t = 0..n`` in closed form.

    ``n = math.inf`` gives the infinite-horizon total (requires ``a < 0``).
    """
    if math.isinf(n):
        if a >= 0:
            return math.inf
        return math.exp(b) / -math.expm1(a)
    if a == 0:
        return (n + 1) * math.exp(b)
    return math.exp(b) * math.expm1(a * (n + 1)) / math.expm1(a)


def update_bias(window: SearchSeries | Sequence[float], a: float, b: float) -> float:
    """Mean of ``y_t - exp(a t + b)`` over the window, floored at zero."""
    y = _as_array(window)
    if len(y) == 0:
        raise DegenerateSeries("empty window")
    fitted = total_intensity(a, b, len(y) - 1)
    return max(0.0, (float(y.sum()) - fitted) / len(y))


def intensity_bounds(y0_tilde: float, a_range: tuple[float, float] = A_RANGE) -> tuple[float, float]:
    """Infinite-horizon total intensity range for a peak-day volume ``y0_tilde``.

    The total is ``y0 / (1 - e^a)``; over the observed attenuation range this
    gives roughly ``1.31 y0`` to ``4.37 y0``.
    """
    if not y0_tilde > 0:
        raise ValueError("peak-day frequency must be positive")
    lo_a, hi_a = sorted(a_range)
    return (y0_tilde / -math.expm1(lo_a), y0_tilde / -math.expm1(hi_a))


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    c: float
    iterations: int
    rmse: float
    window_days: int
    status: str = "ok"          # "ok" | "no_decay"
    day0_shift: int = 0
    converged: bool = True

    @property
    def peak(self) -> float:
        """Fitted day-0 frequency ``e^b + c``."""
        return math.exp(self.b) + self.c

    def total_intensity(self, n: int | float | None = None) -> float:
        if n is None:
            n = self.window_days - self.day0_shift - 1
        return total_intensity(self.a, self.b, n)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> FitResult:
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


class _BiasMap:
    """One alternation: ``c -> ls_step -> update_bias``.

    Points with ``y_t <= c`` are left out of the line fit; the bias update
    always averages over the whole window.
    """

    def __init__(self, y: np.ndarray, min_points: int = 3):
        self.y = y
        self.t = np.arange(len(y), dtype=float)
        self.min_points = min_points
        self.calls = 0

    def line(self, c: float) -> tuple[float, float, np.ndarray]:
        mask = self.y > c
        if mask.sum() < self.min_points:
            raise DegenerateSeries(
                f"only {int(mask.sum())} points above bias {c:g}; need {self.min_points}")
        a, b = _line_fit(self.t[mask], np.log(self.y[mask] - c))
        return a, b, mask

    def __call__(self, c: float) -> float:
        self.calls += 1
        a, b, _ = self.line(c)
        return update_bias(self.y, a, b)


def _solve_bias(g: _BiasMap, c0: float, upper: float, tol: float,
                max_iter: int, ref: float = 1.0) -> tuple[float, bool]:
    """Find the fixed point ``g(c) = c`` starting from ``c0``.

    Plain repetition of ``g`` contracts very slowly when the background
    dominates the rumor signal (slope of ``g`` close to 1), so the iterates
    are driven by an Illinois false-position update on ``h(c) = g(c) - c``
    inside a sign-change bracket.  Each evaluation of ``h`` is one
    alternation.  When no bracket exists the plain alternation is used.
    Steps are judged relative to ``max(|c|, ref)``.
    """
    def h(c: float) -> float:
        return g(c) - c

    h0 = h(c0)
    if h0 == 0.0:
        return c0, True
    if h0 > 0:
        lo, hlo = c0, h0
        if upper <= c0:
            return _plain(g, c0 + h0, tol, max_iter - g.calls, ref)
        hi, hhi = upper, h(upper)
        if hhi > 0:
            log.debug("no sign change below the window minimum; plain iteration")
            return _plain(g, c0 + h0, tol, max_iter - g.calls, ref)
    else:
        hi, hhi = c0, h0
        lo, hlo = 0.0, h(0.0)
        if hlo <= 0.0:
            # g(0) == 0: the floored bias is itself a fixed point.
            return 0.0, True

    side = 0
    c_prev = c0
    while g.calls < max_iter:
        c = hi - hhi * (hi - lo) / (hhi - hlo)
        if not (lo < c < hi):
            c = 0.5 * (lo + hi)
        hc = h(c)
        if hc == 0.0:
            return c, True
        if hc > 0:
            lo, hlo = c, hc
            if side == 1:
                hhi *= 0.5
            side = 1
        else:
            hi, hhi = c, hc
            if side == -1:
                hlo *= 0.5
            side = -1
        scale = tol * max(ref, abs(c))
        if abs(c - c_prev) < scale or hi - lo < scale:
            return c, True
        c_prev = c
    return c_prev, False


def _plain(g: _BiasMap, c: float, tol: float, budget: int,
           ref: float = 1.0) -> tuple[float, bool]:
    for _ in range(max(budget, 0)):
        c_next = g(c)
        if abs(c_next - c) < tol * max(ref, c):
            return c_next, True
        c = c_next
    return c, False


def fit_exponential(window: SearchSeries | Sequence[float], *, tol: float = 1e-10,
                    max_iter: int = 100, shift_to_peak: bool = True) -> FitResult:
    """Fit ``y_t = exp(a t + b) + c`` to a post-outbreak window.

    The bias starts at ``0.9 * min(window)``.  If the maximum is not on day 0
    the window is re-anchored at its maximum (``day0_shift`` records the
    offset).  A non-negative ``a`` is returned with ``status="no_decay"`` and
    a :class:`NoDecayWarning`.
    """
    y_full = _as_array(window)
    if len(y_full) < 3:
        raise DegenerateSeries(f"need at least 3 days, got {len(y_full)}")
    if np.ptp(y_full) == 0:
        raise DegenerateSeries("constant series has no rumor signal")

    shift = int(np.argmax(y_full)) if shift_to_peak else 0
    y = y_full[shift:]
    if len(y) < 3:
        raise DegenerateSeries(
            f"peak on day {shift} leaves only {len(y)} points to fit")
    if np.ptp(y) == 0:
        raise DegenerateSeries("constant series after re-anchoring at the peak")

    g = _BiasMap(y)
    y_min = float(y.min())
    c0 = 0.9 * y_min
    upper = y_min * (1.0 - 1e-12)
    # The window minimum sets the scale, so sub-unit data fit as well as counts.
    c, converged = _solve_bias(g, c0, upper, tol, max_iter, ref=y_min)
    if not converged:
        log.warning("bias did not converge within %d iterations", max_iter)

    a, b, mask = g.line(c)
    resid = np.log(y[mask] - c) - (a * g.t[mask] + b)
    rmse = float(np.sqrt(np.mean(resid ** 2)))
    status = "ok"
    if a >= 0:
        status = "no_decay"
        warnings.warn(f"fitted attenuation a={a:.4g} is not negative", NoDecayWarning,
                      stacklevel=2)
    return FitResult(a=a, b=b, c=c, iterations=max(g.calls, 1), rmse=rmse,
                     window_days=len(y_full), status=status, day0_shift=shift,
                     converged=converged)
