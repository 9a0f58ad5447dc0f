"""Asymptotics of solutions of ``|f' + delta f/t - eta/t| <= h(t)/t^eps``.

Such ``f`` approach ``eta/delta`` and, when ``eps >= delta``, the finer
profile ``eta/delta + eta'/t^delta`` for a constant ``eta'``; the error
is bounded by ``t^-eps int_t^inf h``. :func:`fit_asymptote` estimates
``eta'`` from samples and checks that bound pointwise.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = ["PowerLawMajorant", "AsymptoteFit", "fit_asymptote", "load_samples_csv"]

MIN_SAMPLES = 8


@dataclass(frozen=True)
class PowerLawMajorant:
    """``h(t) = sum_k c_k t^(-p_k)`` with ``c_k >= 0``."""

    terms: tuple = ()

    def __post_init__(self):
        terms = tuple((float(c), float(p)) for c, p in self.terms)
        if any(c < 0 for c, _ in terms):
            raise ConfigError("majorant coefficients must be non-negative")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def zero(cls):
        return cls(())

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, p in self.terms:
            out = out + c * t ** (-p)
        return out

    def tail(self, t):
        """``int_t^inf h``; infinite when some term has ``p <= 1``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, p in self.terms:
            if c == 0:
                continue
            if p <= 1:
                return np.full_like(t, np.inf)
            out = out + c * t ** (1.0 - p) / (p - 1.0)
        return out


@dataclass
class AsymptoteFit:
    """Fitted asymptote and pointwise bound check.

    ``ratios`` holds ``|f - eta/delta - eta'/t^delta| / bound`` with the
    bound ``t^-eps int_t^inf h``; a zero residual against a zero bound
    counts as ratio 0.
    """

    delta: float
    epsilon: float
    eta: float
    eta_prime: float
    t: np.ndarray
    residuals: np.ndarray
    bounds: np.ndarray
    ratios: np.ndarray
    worst_ratio: float
    worst_t: float
    tolerance: float = 1e-9
    notes: list = field(default_factory=list)

    @property
    def limit(self) -> float:
        return self.eta / self.delta

    @property
    def satisfied(self) -> bool:
        return bool(self.worst_ratio <= 1.0 + self.tolerance)

    @property
    def verdict(self) -> str:
        if self.satisfied:
            return "bound satisfied"
        return f"hypothesis not satisfied (worst ratio {self.worst_ratio:.6g} at t = {self.worst_t:.6g})"

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "eta_prime": self.eta_prime,
            "limit": self.limit,
            "worst_ratio": self.worst_ratio,
            "worst_t": self.worst_t,
            "satisfied": self.satisfied,
            "verdict": self.verdict,
        }


def fit_asymptote(
    t,
    f,
    delta: float,
    epsilon: float,
    eta: float,
    h: PowerLawMajorant | None = None,
    tolerance: float = 1e-9,
    abs_floor: float | None = None,
) -> AsymptoteFit:
    """Fit ``eta'`` and check the asymptotic bound.

    Parameters
    ----------
    t, f : array_like
        Sorted samples, ``t > 0``, at least eight.
    delta, epsilon, eta : float
        Constants of the differential inequality; ``delta > 0``, ``epsilon >= 0``.
    h : PowerLawMajorant, optional
        Majorant of the defect; zero by default.
    tolerance : float
        Slack on the worst ratio before the hypothesis is rejected.
    abs_floor : float, optional
        Residuals below this absolute level are treated as zero, to absorb
        rounding when ``h`` vanishes. Default ``64 eps max|f|``.

    Returns
    -------
    AsymptoteFit
        A violated bound is reported through ``satisfied``/``verdict``
        rather than raised.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if t.ndim != 1 or t.shape != f.shape:
        raise ConfigError("t and f must be 1-d arrays of equal length")
    if t.size < MIN_SAMPLES:
        raise ConfigError(f"need at least {MIN_SAMPLES} samples, got {t.size}")
    if not np.all(t > 0) or np.any(np.diff(t) <= 0):
        raise ConfigError("sample abscissae must be positive and strictly increasing")
    if not delta > 0 or epsilon < 0:
        raise ConfigError("need delta > 0 and epsilon >= 0")
    if not (np.all(np.isfinite(f))):
        raise ConfigError("non-finite sample values")
    h = PowerLawMajorant.zero() if h is None else h
    r = f - eta / delta
    notes = []
    if epsilon >= delta:
        tail = slice(t.size - max(t.size // 3, 2), None)
        w = t[tail] ** (-delta)
        eta_p = float(np.dot(r[tail], w) / np.dot(w, w))
    else:
        eta_p = 0.0
        notes.append("eps < delta: eta' fixed to 0")
    res = np.abs(r - eta_p * t ** (-delta))
    if abs_floor is None:
        abs_floor = 64.0 * np.finfo(float).eps * float(np.abs(f).max())
    res = np.where(res <= abs_floor, 0.0, res)
    bounds = t ** (-epsilon) * h.tail(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(res == 0, 0.0, res / bounds)
    k = int(np.argmax(ratios))
    return AsymptoteFit(
        float(delta),
        float(epsilon),
        float(eta),
        eta_p,
        t,
        res,
        bounds,
        ratios,
        float(ratios[k]),
        float(t[k]),
        tolerance,
        notes,
    )


def load_samples_csv(path):
    """Read ``t,f`` pairs (header optional) into two arrays."""
    ts, fs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                ts.append(float(row[0]))
                fs.append(float(row[1]))
            except ValueError:
                if ts:
                    raise ConfigError(f"malformed sample row {row!r}") from None
    return np.array(ts), np.array(fs)
