"""Haar moments of matchgate overlaps and the empirical variance probe.

For ``|psi> = x|0> + y|e>`` with ``|e> = X_n|0>``,

    int_{SO(2n)} |<psi|U(R)|psi>|^{2t} dR = sum_m C(t, m)^2 |x|^{4m} |y|^{4(t-m)} / dim_m,

where ``dim_m`` is the dimension of the so(2n) irreducible with highest weight
``(t/2, ..., t/2, t/2 - m)``. :func:`moment_exact` evaluates this as an exact
rational; :func:`moment_closed_form` evaluates the equivalent factorial
products in high precision.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

import mpmath
import numpy as np

from .compiler import apply_local, compile_element, gate_matrix
from .linalg import OrthogonalElement, haar_sample

PRECISION = 50


def _check_t(t):
    if t < 0 or t % 2:
        raise ValueError("t must be a nonnegative even integer")


def weyl_dimension(weight) -> Fraction:
    """Dimension of the so(2n) irreducible with the given highest weight."""
    mu = [Fraction(w) for w in weight]
    n = len(mu)
    out = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            li, lj = mu[i] + n - 1 - i, mu[j] + n - 1 - j
            ri, rj = n - 1 - i, n - 1 - j
            out *= (li * li - lj * lj) / (ri * ri - rj * rj)
    return out


def irrep_dimension(n: int, t: int, m: int) -> Fraction:
    """``dim_m`` in factorial form."""
    head = Fraction(1)
    for i in range(1, n):
        for j in range(i + 1, n):
            head *= Fraction(t + i + j, i + j)
    return (head * Fraction(factorial(m + n - 1), factorial(m))
            * Fraction(factorial(t - m + n - 1), factorial(t - m)) / factorial(n - 1) ** 2)


def moment_exact(n: int, t: int, x2=Fraction(1), y2=Fraction(0)) -> Fraction:
    """Exact moment for ``|x|^2 = x2``, ``|y|^2 = y2`` (rationals)."""
    _check_t(t)
    x2, y2 = Fraction(x2), Fraction(y2)
    return sum((comb(t, m) ** 2 * x2 ** (2 * m) * y2 ** (2 * (t - m)) / irrep_dimension(n, t, m)
                for m in range(t + 1)), Fraction(0))


def _head(n, t):
    prod = mpmath.mpf(1)
    for i in range(1, t + 1):
        prod *= mpmath.factorial(i + n - 1) / mpmath.sqrt(mpmath.factorial(i) * mpmath.factorial(2 * n - 2 + i))
    return prod * mpmath.sqrt(mpmath.binomial(n + t // 2 - 1, t // 2))


def moment_closed_form(n: int, t: int):
    """``(vacuum, plus)`` moments as high-precision reals.

    vacuum: ``int |<0|U(R)|0>|^{2t}``, plus: ``int |<psi|U(R)|psi>|^{2t}`` with
    ``|psi> = (|0> + |e>)/sqrt(2)``.
    """
    _check_t(t)
    if n < 1:
        raise ValueError("n must be >= 1")
    with mpmath.workdps(PRECISION):
        head = _head(n, t)
        vacuum = head / mpmath.binomial(t + n - 1, t)
        plus = (mpmath.mpf(4) ** (-t) * head * mpmath.binomial(2 * (t + n - 1), t)
                / mpmath.binomial(t + n - 1, t) ** 2)
    return +vacuum, +plus


def _special_so(q: OrthogonalElement) -> OrthogonalElement:
    if q.parity > 0:
        return q
    m = q.matrix.copy()
    m[:, -1] *= -1
    return OrthogonalElement(m)


def overlap(q: OrthogonalElement, psi: np.ndarray) -> complex:
    """``<psi|U(Q)|psi>`` by applying the compiled gates to ``psi``."""
    c = compile_element(q)
    out = psi
    for g in c.gates:
        out = apply_local(out, gate_matrix(g), g.qubits, c.n)
    return complex(np.vdot(psi, out))


def probe_state(n: int, kind: str) -> np.ndarray:
    psi = np.zeros(2 ** n, dtype=complex)
    if kind == "vacuum":
        psi[0] = 1.0
    elif kind == "plus":
        psi[0] = psi[1] = 2 ** -0.5
    else:
        raise ValueError("kind must be 'vacuum' or 'plus'")
    return psi


def moment_monte_carlo(n: int, t: int, samples: int, rng: np.random.Generator,
                       kind: str = "vacuum") -> tuple[float, float]:
    """Monte Carlo estimate and standard error over Haar-random ``R`` in SO(2n)."""
    psi = probe_state(n, kind)
    vals = np.empty(samples)
    for s in range(samples):
        r = _special_so(haar_sample(n, rng))
        vals[s] = abs(overlap(r, psi)) ** (2 * t)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples))


def variance_probe(plan, reps: int, workers: int = 1) -> list[tuple[int, int, int, float]]:
    """Rows ``(n, k, m, K * Var(f_hat_k(m)))`` over ``reps`` noise-free repetitions of ``plan``.

    Repetition ``r`` reruns the plan with master seed ``derive_seed(plan.seed, r)``.
    """
    from dataclasses import replace

    from .protocol import Aggregator, derive_seed, iter_protocol

    means = {}
    for r in range(reps):
        rplan = replace(plan, seed=derive_seed(plan.seed, r))
        agg = Aggregator().extend(iter_protocol(rplan, None, "auto", None, workers))
        for k, m, f, _, _ in agg.table():
            means.setdefault((k, m), []).append(f)
    return [(plan.n, k, m, plan.K * float(np.var(v, ddof=1))) for (k, m), v in sorted(means.items())]
