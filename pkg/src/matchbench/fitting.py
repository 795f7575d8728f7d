"""Single-exponential decay fits with bootstrap intervals, and fidelity extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

MAX_NFEV = 2000


class FitError(RuntimeError):
    """Raised when the optimiser stops without converging; ``estimate`` holds diagnostics."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


@dataclass
class DecayEstimate:
    k: int | None
    A: float
    lam: float
    ci: tuple[float, float] | None
    residuals: dict[int, float]
    r2: float
    iterations: int
    clamped: bool = False
    raw_lambda: float | None = None
    converged: bool = True
    interval_method: str | None = None
    message: str = ""
    bootstrap: np.ndarray | None = field(default=None, repr=False)

    def predict(self, m) -> np.ndarray:
        return self.A * self.lam ** np.asarray(m, dtype=float)

    def to_json(self) -> dict:
        return {
            "k": self.k, "A": self.A, "lambda": self.lam,
            "ci": None if self.ci is None else list(self.ci),
            "residuals": {str(m): r for m, r in self.residuals.items()},
            "r2": self.r2, "iterations": self.iterations, "clamped": self.clamped,
            "raw_lambda": self.raw_lambda, "converged": self.converged,
            "interval_method": self.interval_method, "message": self.message,
        }


def _initial_guess(m: np.ndarray, f: np.ndarray) -> np.ndarray:
    keep = np.abs(f) > 1e-12
    if keep.sum() < 2:
        return np.array([f[0] if f.size else 0.0, 0.5])
    mm, ff = m[keep], f[keep]
    slope, icpt = np.polyfit(mm, np.log(np.abs(ff)), 1)
    mag = np.exp(slope)
    best, best_err = None, np.inf
    for sign in (1.0, -1.0):
        lam = sign * mag
        a = np.exp(icpt) * np.sign(ff[0]) * sign ** (-mm[0])
        err = np.sum((a * lam ** m - f) ** 2)
        if err < best_err:
            best, best_err = np.array([a, lam]), err
    return best


def _solve(m, f, x0):
    def fun(p):
        return p[0] * p[1] ** m - f

    def jac(p):
        return np.column_stack([p[1] ** m, p[0] * m * p[1] ** (m - 1)])

    if np.allclose(fun(x0), 0.0, atol=1e-15, rtol=0):
        return x0, 0, True, "exact initial guess"
    res = least_squares(fun, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=MAX_NFEV)
    return res.x, int(res.nfev), res.status > 0, res.message


def _canonical(params, m):
    """When all lengths share a parity, ``lambda`` and ``-lambda`` fit equally; keep ``lambda >= 0``."""
    a, lam = params
    parities = set(np.asarray(m, dtype=int) % 2)
    if lam < 0 and len(parities) == 1:
        return np.array([-a if parities == {1} else a, -lam])
    return params


def _fit(m, f):
    x0 = _initial_guess(m, f)
    params, nfev, ok, msg = _solve(m, f, x0)
    return _canonical(params, m), nfev, ok, msg


def _summary(k, m, f, params, nfev, ok, msg) -> DecayEstimate:
    a, lam = float(params[0]), float(params[1])
    resid = f - a * lam ** m
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((f - f.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res < 1e-24 else 0.0)
    clamped = not -1.0 <= lam <= 1.0
    return DecayEstimate(k, a, float(np.clip(lam, -1.0, 1.0)), None,
                         {int(mi): float(r) for mi, r in zip(m, resid)}, r2, nfev,
                         clamped, lam, ok, None, str(msg))


def fit_decay(points: Sequence[tuple[int, float]] | None = None, bootstrap_resamples: int = 0, *,
              sequences: Mapping[int, Sequence[float]] | None = None, seed: int = 0,
              k: int | None = None, level: float = 0.95) -> DecayEstimate:
    """Fit ``f(m) = A lambda^m`` by unweighted nonlinear least squares.

    ``points`` are ``(m, f_hat)`` pairs. When per-sequence values are given in
    ``sequences`` (``m -> values``) the points default to their means and the
    bootstrap resamples sequences within each ``m``; otherwise the bootstrap
    resamples fit residuals. Values of any sign are kept.
    """
    if points is None:
        if sequences is None:
            raise ValueError("need points or per-sequence values")
        points = [(m, float(np.mean(v))) for m, v in sorted(sequences.items())]
    pts = sorted((int(m), float(v)) for m, v in points)
    m = np.array([p[0] for p in pts], dtype=float)
    f = np.array([p[1] for p in pts])
    if len(set(m)) < 3:
        raise ValueError("at least 3 distinct sequence lengths are required")
    params, nfev, ok, msg = _fit(m, f)
    est = _summary(k, m, f, params, nfev, ok, msg)
    if not ok:
        raise FitError(f"fit did not converge for k={k}: {msg}", est)
    if bootstrap_resamples <= 0:
        return est
    rng = np.random.default_rng(seed)
    lams = np.empty(bootstrap_resamples)
    if sequences is not None:
        seqs = [np.asarray(sequences[int(mi)], dtype=float) for mi in m]
        est.interval_method = "sequence bootstrap"
        for b in range(bootstrap_resamples):
            fb = np.array([s[rng.integers(0, len(s), len(s))].mean() for s in seqs])
            pb, _, okb, _ = _solve(m, fb, params)
            lams[b] = _canonical(pb, m)[1] if okb else np.nan
    else:
        fitted = params[0] * params[1] ** m
        resid = f - fitted
        est.interval_method = "residual bootstrap"
        for b in range(bootstrap_resamples):
            fb = fitted + resid[rng.integers(0, len(resid), len(resid))]
            pb, _, okb, _ = _solve(m, fb, params)
            lams[b] = _canonical(pb, m)[1] if okb else np.nan
    lams = np.clip(lams[np.isfinite(lams)], -1.0, 1.0)
    tail = 100 * (1 - level) / 2
    est.ci = (float(np.percentile(lams, tail)), float(np.percentile(lams, 100 - tail)))
    est.bootstrap = lams
    return est


# -- fidelity -----------------------------------------------------------------

def favg_from_lambdas(lams, n: int) -> float:
    """``F_avg = (2^-n sum_k C(2n, k) lambda_k + 1) / (2^n + 1)``."""
    lams = np.asarray(lams, dtype=float)
    if lams.shape != (2 * n + 1,):
        raise ValueError(f"need {2 * n + 1} lambda values, got {lams.shape}")
    weights = np.array([comb(2 * n, k) for k in range(2 * n + 1)], dtype=float)
    return float((2.0 ** (-n) * (weights @ lams) + 1) / (2 ** n + 1))


@dataclass
class FidelityReport:
    n: int
    estimates: list
    lambdas: np.ndarray
    favg: float
    favg_ci: tuple[float, float] | None
    two_qubit_gates: int
    fgate: float | None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "lambdas": [float(v) for v in self.lambdas],
            "favg": self.favg,
            "favg_ci": None if self.favg_ci is None else list(self.favg_ci),
            "two_qubit_gates": self.two_qubit_gates,
            "fgate": self.fgate,
            "estimates": [e.to_json() if isinstance(e, DecayEstimate) else e for e in self.estimates],
        }


def extract_fidelity(estimates, n: int, two_qubit_gates: int | None = None,
                     level: float = 0.95) -> FidelityReport:
    """Average fidelity from the ``2n + 1`` Majorana fidelities.

    ``estimates`` is a sequence of :class:`DecayEstimate` (one per ``k``, in
    order), a mapping ``k -> lambda`` or a plain list of ``lambda`` values. The
    per-gate figure is ``F_avg ** (1 / g)`` with ``g`` two-qubit gates per element,
    by default ``2n(n-1)`` (XY gates in a generic compiled element).
    """
    if isinstance(estimates, Mapping):
        missing = [k for k in range(2 * n + 1) if k not in estimates]
        if missing:
            raise ValueError(f"missing lambda values for k = {missing}")
        ests = [estimates[k] for k in range(2 * n + 1)]
    else:
        ests = list(estimates)
        if len(ests) != 2 * n + 1:
            raise ValueError(f"need {2 * n + 1} lambda values, got {len(ests)}")
    lams = np.array([e.lam if isinstance(e, DecayEstimate) else float(e) for e in ests])
    favg = favg_from_lambdas(lams, n)
    ci = None
    boots = [e.bootstrap if isinstance(e, DecayEstimate) else None for e in ests]
    if all(b is not None for b in boots):
        size = min(len(b) for b in boots)
        reps = np.array([favg_from_lambdas([b[r] for b in boots], n) for r in range(size)])
        tail = 100 * (1 - level) / 2
        ci = (float(np.percentile(reps, tail)), float(np.percentile(reps, 100 - tail)))
    if two_qubit_gates is None:
        two_qubit_gates = 2 * n * (n - 1)
    fgate = favg ** (1.0 / two_qubit_gates) if two_qubit_gates > 0 else None
    return FidelityReport(n, ests, lams, favg, ci, two_qubit_gates, fgate)
