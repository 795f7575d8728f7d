"""Quick oracle checks run by ``matchbench selftest``."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import kernels
from .compiler import circuit_unitary, compile_element, induced_rotation
from .correlation import alpha
from .covariance import run_covariance
from .dense import alpha_dense, lambdas_exact, run_dense
from .fitting import extract_fidelity
from .linalg import haar_sample, minor_sum_bruteforce, minor_sum_coefficients, pfaffian, pfaffian_cofactor
from .majorana import index_to_bits, majorana_matrix
from .moments import moment_closed_form, moment_exact
from .noise import depolarizing
from .protocol import Aggregator, RoundPlan, iter_protocol


def _antisym(rng, d, complex_=False):
    a = rng.standard_normal((d, d))
    if complex_:
        a = a + 1j * rng.standard_normal((d, d))
    return a - a.T


def check_pfaffian(rng):
    worst = 0.0
    for d in (2, 4, 6, 8):
        for cx in (False, True):
            a = _antisym(rng, d, cx)
            worst = max(worst, abs(pfaffian(a) - pfaffian_cofactor(a)))
    return worst < 1e-10, f"{kernels.BACKEND} kernel, max error {worst:.1e}"


def check_minor_sum(rng):
    a, b = _antisym(rng, 4, True), _antisym(rng, 4, True)
    c = rng.standard_normal((4, 4))
    err = np.max(np.abs(minor_sum_coefficients(a, b, c) - minor_sum_bruteforce(a, b, c)))
    return err < 1e-10, f"max error {err:.1e}"


def check_compiler(rng):
    worst = 0.0
    for n in (1, 2, 3):
        for xy in (False, True):
            q = haar_sample(n, rng)
            c = compile_element(q, xy)
            worst = max(worst, np.max(np.abs(induced_rotation(c).matrix - q.matrix)))
            u = circuit_unitary(c)
            for j in range(1, 2 * n + 1):
                lhs = u @ majorana_matrix((j,), n) @ u.conj().T
                rhs = sum(q.matrix[i - 1, j - 1] * majorana_matrix((i,), n) for i in range(1, 2 * n + 1))
                worst = max(worst, np.max(np.abs(lhs - rhs)))
    return worst < 1e-9, f"max error {worst:.1e}"


def check_alpha(rng):
    worst = 0.0
    for n in (2, 3):
        q = haar_sample(n, rng)
        x = index_to_bits(int(rng.integers(2 ** n)), n)
        for k in range(2 * n + 1):
            worst = max(worst, abs(alpha(x, q, k) - alpha_dense(x, q, k)))
    return worst < 1e-9, f"max error {worst:.1e}"


def check_backends(rng):
    n = 3
    segs = [compile_element(haar_sample(n, rng)) for _ in range(2)]
    pd = run_dense(segs)
    pc = np.array([run_covariance(segs, x=index_to_bits(i, n)) for i in range(2 ** n)])
    err = np.max(np.abs(pd - pc))
    return err < 1e-9, f"max probability difference {err:.1e}"


def check_decay(rng):
    noise = depolarizing(2, 0.1)
    plan = RoundPlan(2, tuple(range(5)), (1, 3), 1, None, 0, ensemble="design")
    agg = Aggregator().extend(iter_protocol(plan, noise))
    lam = lambdas_exact(noise, 2)
    err = max(abs(f - lam[k] ** m) for k, m, f, _, _ in agg.table())
    return err < 1e-7, f"max deviation from lambda^m {err:.1e}"


def check_fidelity(rng):
    f = extract_fidelity([1.0, 0.78, 0.85, 0.87, 0.83], 2).favg
    return abs(f - 0.8765) < 1e-12, f"F_avg = {f:.6f}"


def check_moments(rng):
    vac, _ = moment_closed_form(2, 2)
    ok = moment_exact(1, 2) == 1 and moment_exact(2, 2) == Fraction(1, 3) and abs(float(vac) - 1 / 3) < 1e-15
    return ok, f"n=2, t=2 vacuum moment {float(vac):.6f}"


CHECKS = [
    ("pfaffian", check_pfaffian),
    ("minor sum", check_minor_sum),
    ("compiler", check_compiler),
    ("correlation function", check_alpha),
    ("backend agreement", check_backends),
    ("exact decay", check_decay),
    ("fidelity formula", check_fidelity),
    ("moments", check_moments),
]


def run_all(seed: int = 2024):
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as err:  # report, don't abort the suite
            ok, detail = False, f"{type(err).__name__}: {err}"
        out.append((name, bool(ok), detail))
    return out
