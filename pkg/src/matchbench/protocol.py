"""Round scheduling, simulation of benchmarking sequences and aggregation of the signal.

Every sequence ``(k, m, i)`` draws its factors from generators seeded by
``SeedSequence(seed, spawn_key=(k, m, i, 0, j))`` and its shots from
``spawn_key=(k, m, i, 1)``, so results do not depend on execution order.

Three estimation modes are supported:

* ``L`` shots per sequence (``ensemble="haar"``, ``L >= 1``),
* exact Born probabilities per Haar sequence (``ensemble="haar"``, ``L=None``),
* the exact ensemble average (``ensemble="design"``): sequences are averaged
  analytically with a finite group that reproduces Haar second moments on every
  sector, so ``f_k(m)`` is computed without sampling error.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .compiler import GateCircuit, circuit_unitary, compile_element
from .correlation import alpha_all
from .covariance import CovarianceState, evolve_covariance
from .dense import (BackendError, DenseLimits, channel_superop, hadamard_all, initial_state,
                    majorana_basis, run_dense, unitary_superop)
from .linalg import OrthogonalElement, haar_sample
from .majorana import bits_to_index, index_to_bits
from .noise import DenseChannel, GateDependent, GaussianB, NoNoise

BACKENDS = ("dense", "covariance", "auto")
ENSEMBLES = ("haar", "design")


@dataclass(frozen=True)
class RoundPlan:
    n: int
    k_list: tuple[int, ...]
    m_list: tuple[int, ...]
    K: int
    L: int | None
    seed: int
    use_xy: bool = False
    ensemble: str = "haar"

    def __post_init__(self):
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.k_list or any(not 0 <= k <= 2 * self.n for k in self.k_list):
            raise ValueError(f"k_list must be a nonempty subset of 0..{2 * self.n}")
        if len(set(self.k_list)) != len(self.k_list):
            raise ValueError("k_list has duplicates")
        ms = self.m_list
        if not ms or ms[0] < 1 or any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("m_list must be nonempty, strictly increasing, with m >= 1")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.L is not None and self.L < 1:
            raise ValueError("L must be >= 1 (or None for exact probabilities)")
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"ensemble must be one of {ENSEMBLES}")
        if self.ensemble == "design" and self.L is not None:
            raise ValueError("the design ensemble is exact; set L to None")

    @property
    def total_shots(self) -> int | None:
        if self.L is None:
            return None
        return self.K * len(self.m_list) * len(self.k_list) * self.L


@dataclass(frozen=True)
class SpamNoise:
    prep: DenseChannel | None = None
    meas: DenseChannel | None = None

    @property
    def trivial(self) -> bool:
        return self.prep is None and self.meas is None


def spam_basis(k: int) -> str:
    return "Z" if k % 2 == 0 else "X"


@dataclass(frozen=True, eq=False)
class ShotBatch:
    k: int
    m: int
    i: int
    q: OrthogonalElement
    spam_basis: str
    L: int | None
    counts: dict[str, int] | None = None
    probabilities: dict[str, float] | None = None
    factor_seeds: tuple[int, ...] = ()
    design_index: int | None = None

    def __post_init__(self):
        if self.spam_basis != spam_basis(self.k):
            raise ValueError("spam basis must be Z for even k and X for odd k")
        if self.L is None:
            if self.probabilities is None:
                raise ValueError("exact batches carry probabilities")
        elif self.counts is None or sum(self.counts.values()) != self.L:
            raise ValueError("counts must sum to L")

    def frequencies(self) -> dict[str, float]:
        if self.L is None:
            return self.probabilities
        return {x: c / self.L for x, c in self.counts.items()}

    def to_json(self) -> dict:
        out = {
            "k": self.k, "m": self.m, "i": self.i,
            "q": self.q.matrix.tolist(), "parity": self.q.parity,
            "spam_basis": self.spam_basis, "L": self.L,
            "factor_seeds": list(self.factor_seeds),
        }
        if self.design_index is not None:
            out["design_index"] = self.design_index
        if self.L is None:
            out["probabilities"] = self.probabilities
        else:
            out["counts"] = self.counts
        return out

    @classmethod
    def from_json(cls, d: dict) -> "ShotBatch":
        return cls(int(d["k"]), int(d["m"]), int(d["i"]),
                   OrthogonalElement(np.array(d["q"]), int(d.get("parity", 0))),
                   d["spam_basis"], d["L"], d.get("counts"), d.get("probabilities"),
                   tuple(int(s) for s in d.get("factor_seeds", ())), d.get("design_index"))


# -- seeds --------------------------------------------------------------------

def derive_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(v) for v in key))
    return int(ss.generate_state(1, np.uint64)[0])


def factor_seeds(seed: int, k: int, m: int, i: int) -> tuple[int, ...]:
    return tuple(derive_seed(seed, k, m, i, 0, j) for j in range(m))


def factors_from_seeds(n: int, seeds: Sequence[int]) -> list[OrthogonalElement]:
    return [haar_sample(n, np.random.default_rng(s)) for s in seeds]


def compose(factors: Sequence[OrthogonalElement]) -> OrthogonalElement:
    """``Q_m ... Q_1`` for ``factors = [Q_1, ..., Q_m]``."""
    out = np.eye(2 * factors[0].n)
    for f in factors:
        out = f.matrix @ out
    return OrthogonalElement(out)


# -- backend selection --------------------------------------------------------

def resolve_backend(plan: RoundPlan, noise, backend: str, spam_noise: SpamNoise | None,
                    limits: DenseLimits = DenseLimits()) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    odd = any(k % 2 for k in plan.k_list)
    gaussian_ok = isinstance(noise, (NoNoise, GaussianB)) and (spam_noise is None or spam_noise.trivial)
    if backend == "covariance":
        if odd:
            raise BackendError("odd k needs X-basis SPAM, which only the dense backend provides")
        if not gaussian_ok:
            raise BackendError(f"the covariance backend cannot simulate {type(noise).__name__} noise "
                               "or SPAM channels")
        if plan.ensemble == "design":
            raise BackendError("the design ensemble runs on the dense backend")
        return backend
    if backend == "auto":
        pure = isinstance(noise, NoNoise) and (spam_noise is None or spam_noise.trivial)
        limit = limits.statevector if pure else limits.channel
        if plan.n <= limit or odd or not gaussian_ok or plan.ensemble == "design":
            return "dense"
        return "covariance"
    return backend


# -- per-sequence simulation --------------------------------------------------

@dataclass(frozen=True)
class _Job:
    plan: RoundPlan
    noise: object
    backend: str
    spam_noise: SpamNoise | None
    limits: DenseLimits


def _simulate(job: _Job, k: int, m: int, i: int) -> ShotBatch:
    plan = job.plan
    seeds = factor_seeds(plan.seed, k, m, i)
    factors = factors_from_seeds(plan.n, seeds)
    q = compose(factors)
    circuits = [compile_element(f, plan.use_xy) for f in factors]
    basis = spam_basis(k)
    shot_rng = np.random.default_rng(derive_seed(plan.seed, k, m, i, 1))
    if job.backend == "covariance":
        state = evolve_covariance(circuits, job.noise, CovarianceState.vacuum(plan.n))
        if plan.L is None:
            probs = state.probabilities()
        else:
            counts = state.sample_counts(plan.L, shot_rng)
            return ShotBatch(k, m, i, q, basis, plan.L, counts=counts, factor_seeds=seeds)
    else:
        sn = job.spam_noise or SpamNoise()
        probs = run_dense(circuits, job.noise, basis, prep_noise=sn.prep, meas_noise=sn.meas,
                          limits=job.limits)
    if plan.L is None:
        p = {index_to_bits(j, plan.n): float(v) for j, v in enumerate(probs) if v > 0}
        return ShotBatch(k, m, i, q, basis, None, probabilities=p, factor_seeds=seeds)
    counts = shot_rng.multinomial(plan.L, probs)
    c = {index_to_bits(j, plan.n): int(v) for j, v in enumerate(counts) if v}
    return ShotBatch(k, m, i, q, basis, plan.L, counts=c, factor_seeds=seeds)


def _simulate_chunk(args):
    job, keys = args
    return [_simulate(job, *key) for key in keys]


def sequence_keys(plan: RoundPlan) -> list[tuple[int, int, int]]:
    return [(k, m, i) for k in plan.k_list for m in plan.m_list for i in range(plan.K)]


def iter_protocol(plan: RoundPlan, noise=None, backend: str = "auto",
                  spam_noise: SpamNoise | None = None, workers: int = 1,
                  limits: DenseLimits = DenseLimits(), chunk: int = 64) -> Iterator[ShotBatch]:
    """Yield batches in ``(k, m, i)`` order; ``workers > 1`` distributes sequences over processes."""
    noise = NoNoise() if noise is None else noise
    chosen = resolve_backend(plan, noise, backend, spam_noise, limits)
    if plan.ensemble == "design":
        yield from _design_batches(plan, noise, spam_noise)
        return
    job = _Job(plan, noise, chosen, spam_noise, limits)
    keys = sequence_keys(plan)
    if workers <= 1:
        for key in keys:
            yield _simulate(job, *key)
        return
    chunks = [(job, keys[s:s + chunk]) for s in range(0, len(keys), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for out in pool.map(_simulate_chunk, chunks):
            yield from out


def run_protocol(plan: RoundPlan, noise=None, backend: str = "auto",
                 spam_noise: SpamNoise | None = None, workers: int = 1,
                 limits: DenseLimits = DenseLimits()) -> list[ShotBatch]:
    return list(iter_protocol(plan, noise, backend, spam_noise, workers, limits))


# -- exact ensemble average ---------------------------------------------------

DESIGN_MAX_N = 3


@lru_cache(maxsize=4)
def simplex_design(n: int) -> tuple[OrthogonalElement, ...]:
    """The symmetric group on ``2n + 1`` letters acting on the vertices of a simplex in ``R^{2n}``.

    Its exterior powers ``wedge^k``, ``k = 0..2n``, are the hook irreducibles,
    pairwise inequivalent and real, so averaging ``omega(g) (x) omega(g)`` over
    the group matches the Haar average over O(2n).
    """
    if n > DESIGN_MAX_N:
        raise ValueError(f"the exact design ensemble is limited to n <= {DESIGN_MAX_N}")
    dim = 2 * n + 1
    basis, _ = np.linalg.qr(np.column_stack([np.ones(dim), np.eye(dim)[:, :-1]]))
    v = basis[:, 1:]
    out = []
    for perm in permutations(range(dim)):
        p = np.eye(dim)[list(perm)]
        out.append(OrthogonalElement(v.T @ p @ v))
    return tuple(out)


def _design_probability_tables(plan: RoundPlan, noise, spam_noise: SpamNoise | None):
    """``probs[basis][m][g]``: outcome distribution given that the composite element is ``g``."""
    if isinstance(noise, GateDependent) or noise.mode != "per_element":
        raise BackendError("the design ensemble needs gate-independent noise applied per element")
    n = plan.n
    group = simplex_design(n)
    t = majorana_basis(n)
    lam = channel_superop(noise, n)
    omegas = [unitary_superop(circuit_unitary(compile_element(g, plan.use_xy))) for g in group]
    twirl = sum(w.conj().T @ lam @ w for w in omegas) / len(group)
    sn = spam_noise or SpamNoise()
    tables = {}
    for basis in sorted({spam_basis(k) for k in plan.k_list}):
        psi = initial_state(n, basis)
        rho0 = np.outer(psi, psi.conj())
        if sn.prep is not None:
            rho0 = sum(kr @ rho0 @ kr.conj().T for kr in sn.prep.kraus)
        v = t.conj().T @ rho0.ravel()
        h = hadamard_all(n) if basis == "X" else None
        per_m = {}
        power, last = v, 1
        for m in plan.m_list:
            power = np.linalg.matrix_power(twirl, m - last) @ power
            last = m
            rows = []
            for w in omegas:
                rho = (t @ (lam @ (w @ power))).reshape(2 ** n, 2 ** n)
                if sn.meas is not None:
                    rho = sum(kr @ rho @ kr.conj().T for kr in sn.meas.kraus)
                if h is not None:
                    rho = h @ rho @ h
                rows.append(np.clip(np.real(np.diag(rho)), 0.0, None))
            per_m[m] = rows
        tables[basis] = per_m
    return group, tables


def _design_batches(plan: RoundPlan, noise, spam_noise) -> Iterator[ShotBatch]:
    group, tables = _design_probability_tables(plan, noise, spam_noise)
    for k in plan.k_list:
        basis = spam_basis(k)
        for m in plan.m_list:
            for gi, g in enumerate(group):
                row = tables[basis][m][gi]
                p = {index_to_bits(j, plan.n): float(v) for j, v in enumerate(row) if v > 0}
                yield ShotBatch(k, m, gi, g, basis, None, probabilities=p, design_index=gi)


# -- aggregation --------------------------------------------------------------

class Aggregator:
    """Streaming accumulator of per-sequence signals ``sum_x alpha_k(x, Q) f_x``."""

    def __init__(self):
        self.values: dict[tuple[int, int], list[float]] = defaultdict(list)
        self.L: dict[tuple[int, int], int | None] = {}
        self._alpha_cache: dict = {}

    def _alphas(self, q: OrthogonalElement, x: str, basis: str) -> np.ndarray:
        key = (q.matrix.tobytes(), x, basis)
        hit = self._alpha_cache.get(key)
        if hit is None:
            hit = alpha_all(x, q, basis)
            if len(self._alpha_cache) < 200_000:
                self._alpha_cache[key] = hit
        return hit

    def signal(self, batch: ShotBatch) -> float:
        tot = 0.0
        for x, f in batch.frequencies().items():
            tot += f * self._alphas(batch.q, x, batch.spam_basis)[batch.k]
        return tot

    def add(self, batch: ShotBatch) -> float:
        s = self.signal(batch)
        self.values[(batch.k, batch.m)].append(s)
        self.L[(batch.k, batch.m)] = batch.L
        return s

    def extend(self, batches: Iterable[ShotBatch]) -> "Aggregator":
        for b in batches:
            self.add(b)
        return self

    def mean(self, k: int, m: int) -> float:
        vals = self.values.get((k, m))
        if not vals:
            raise KeyError(f"no batches for k={k}, m={m}")
        return float(np.mean(vals))

    def table(self) -> list[tuple[int, int, float, int, int | None]]:
        """Rows ``(k, m, f_hat, K, L)`` sorted by ``(k, m)``."""
        return [(k, m, self.mean(k, m), len(self.values[(k, m)]), self.L[(k, m)])
                for k, m in sorted(self.values)]

    def sequences(self, k: int) -> dict[int, np.ndarray]:
        return {m: np.array(v) for (kk, m), v in sorted(self.values.items()) if kk == k}


def aggregate(batches: Iterable[ShotBatch], k: int, m: int) -> float:
    """``f_hat_k(m) = K^{-1} sum_i sum_x alpha_k(x, Q_i) f_x^(i)``."""
    agg = Aggregator()
    for b in batches:
        if b.k == k and b.m == m:
            agg.add(b)
    return agg.mean(k, m)
