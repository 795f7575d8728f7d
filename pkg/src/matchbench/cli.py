"""Command line interface: ``matchbench sample|run|fit|report|selftest``.

Exit codes: 0 ok, 2 configuration or argument error, 3 backend cannot serve
the request, 4 fit did not converge.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import io as mio
from .compiler import compile_element
from .dense import BackendError
from .fitting import DecayEstimate, FitError, extract_fidelity, fit_decay
from .protocol import Aggregator, derive_seed, iter_protocol
from .linalg import haar_sample

EXIT_CONFIG, EXIT_BACKEND, EXIT_FIT = 2, 3, 4


def _fail(msg: str, code: int):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Matchgate benchmarking: sample, simulate, fit and report."""


@main.command()
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="qubits")
@click.option("--count", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--xy", is_flag=True, help="express XX rotations with XY gates and X flips")
@click.option("--circuit-out", type=click.Path(dir_okay=False), default=None,
              help="write JSON here instead of stdout")
def sample(n, count, seed, xy, circuit_out):
    """Haar-random O(2n) elements and their compiled circuits."""
    out = []
    for i in range(count):
        q = haar_sample(n, np.random.default_rng(derive_seed(seed, i)))
        out.append({"index": i, "q": q.matrix.tolist(), "parity": q.parity,
                    "circuit": compile_element(q, use_xy=xy).to_records()})
    text = json.dumps({"n": n, "seed": seed, "xy": xy, "elements": out}, indent=1) + "\n"
    if circuit_out:
        Path(circuit_out).write_text(text)
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help=f"output directory (default: config output_dir, ${mio.OUTPUT_ENV}, ./{mio.DEFAULT_OUTPUT})")
@click.option("--workers", type=click.IntRange(min=1), default=None)
def run(config, out_dir, workers):
    """Run the benchmarking protocol described by CONFIG."""
    try:
        cfg = mio.load_config(config)
    except mio.ConfigError as err:
        _fail(str(err), EXIT_CONFIG)
    dest = mio.output_dir(out_dir, cfg)
    dest.mkdir(parents=True, exist_ok=True)
    plan = cfg.plan()
    agg = Aggregator()
    try:
        batches = iter_protocol(plan, cfg.noise_model, cfg.backend, cfg.spam_model,
                                workers or cfg.workers)

        def tracked():
            for b in batches:
                agg.add(b)
                yield b

        mio.write_batches(dest / "batches.jsonl", tracked())
    except BackendError as err:
        _fail(str(err), EXIT_BACKEND)
    rows = agg.table()
    mio.write_fhat(dest / "fhat.csv", rows)
    mio.write_sequences(dest / "sequences.csv", agg.values)
    mio.write_json(dest / "config.json", cfg.to_dict())
    for k, m, f, K, L in rows:
        click.echo(f"k={k} m={m} f_hat={f:.8f} K={K} L={'inf' if L is None else L}")
    total = plan.total_shots
    click.echo(f"total shots: {'exact' if total is None else total}")


def _infer_n(path: Path, rows, n):
    if n is not None:
        return n
    cfg = path.parent / "config.json"
    if cfg.exists():
        return int(json.loads(cfg.read_text())["n"])
    return max(1, (max(r[0] for r in rows) + 1) // 2)


@main.command()
@click.argument("fhat", type=click.Path(dir_okay=False))
@click.option("--bootstrap", type=click.IntRange(min=0), default=1000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--n", "n", type=click.IntRange(min=1), default=None)
@click.option("--sequences", type=click.Path(dir_okay=False), default=None,
              help="per-sequence values for the sequence bootstrap (default: sequences.csv next to FHAT)")
@click.option("--two-qubit-gates", type=click.IntRange(min=0), default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def fit(fhat, bootstrap, seed, n, sequences, two_qubit_gates, out_dir):
    """Fit A_k lambda_k^m to each k in FHAT and extract the average fidelity."""
    path = Path(fhat)
    try:
        rows = mio.read_fhat(path)
    except (OSError, mio.ConfigError) as err:
        _fail(str(err), EXIT_CONFIG)
    if not rows:
        _fail(f"{path}: no rows", EXIT_CONFIG)
    n = _infer_n(path, rows, n)
    seq_path = Path(sequences) if sequences else path.parent / "sequences.csv"
    seqs = mio.read_sequences(seq_path) if seq_path.exists() else None
    dest = Path(out_dir) if out_dir else path.parent
    dest.mkdir(parents=True, exist_ok=True)

    by_k: dict[int, list] = {}
    for k, m, f, _, _ in rows:
        by_k.setdefault(k, []).append((m, f))
    estimates: dict[int, DecayEstimate] = {}
    failures = []
    for k, pts in sorted(by_k.items()):
        kseq = None
        if seqs is not None:
            kseq = {m: seqs[(k, m)] for m, _ in pts if (k, m) in seqs}
            if len(kseq) != len(pts):
                kseq = None
        try:
            estimates[k] = fit_decay(pts, bootstrap, sequences=kseq, seed=derive_seed(seed, k), k=k)
        except FitError as err:
            failures.append(k)
            estimates[k] = err.estimate
        except ValueError as err:
            _fail(f"k={k}: {err}", EXIT_CONFIG)

    absent = [k for k in range(2 * n + 1) if k not in estimates]
    report = {"n": n, "absent": absent, "failed": failures,
              "estimates": {str(k): e.to_json() for k, e in sorted(estimates.items())}}
    if not absent and not failures:
        fr = extract_fidelity([estimates[k] for k in range(2 * n + 1)], n, two_qubit_gates)
        report.update({"favg": fr.favg, "favg_ci": None if fr.favg_ci is None else list(fr.favg_ci),
                       "two_qubit_gates": fr.two_qubit_gates, "fgate": fr.fgate})
    else:
        report.update({"favg": None, "favg_ci": None, "fgate": None})
    mio.write_json(dest / "report.json", report)

    plot_rows = []
    for k, pts in sorted(by_k.items()):
        for m, f in sorted(pts):
            plot_rows.append(("data", k, m, f))
        e = estimates[k]
        ms = [m for m, _ in pts]
        for m in range(min(ms), max(ms) + 1):
            plot_rows.append(("fit", k, m, float(e.A * e.lam ** m)))
    (dest / "plot.csv").write_text(mio.table_csv(plot_rows, ("series", "k", "m", "value")))

    for k, e in sorted(estimates.items()):
        ci = "" if e.ci is None else f" ci=[{e.ci[0]:.6f}, {e.ci[1]:.6f}]"
        flag = " (clamped)" if e.clamped else ""
        click.echo(f"k={k} A={e.A:.6f} lambda={e.lam:.6f}{ci}{flag}")
    if report["favg"] is not None:
        click.echo(f"F_avg={report['favg']:.6f}")
    if failures:
        _fail(f"fit did not converge for k = {failures}", EXIT_FIT)


@main.command()
@click.argument("report_path", type=click.Path(dir_okay=False))
@click.option("--two-qubit-gates", type=click.IntRange(min=0), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def report(report_path, two_qubit_gates, out_path):
    """Average and per-gate fidelity from a fit report or a {n, lambdas} file."""
    try:
        data = json.loads(Path(report_path).read_text())
        n = int(data["n"])
        if "lambdas" in data:
            lams = data["lambdas"]
            if isinstance(lams, dict):
                lams = {int(k): float(v) for k, v in lams.items()}
        else:
            lams = {int(k): float(e["lambda"]) for k, e in data["estimates"].items()}
        gates = two_qubit_gates if two_qubit_gates is not None else data.get("two_qubit_gates")
        fr = extract_fidelity(lams, n, gates)
    except (OSError, KeyError, TypeError, ValueError) as err:
        _fail(f"{report_path}: {err}", EXIT_CONFIG)
    out = fr.to_json()
    if out_path:
        mio.write_json(out_path, out)
    click.echo(f"F_avg={fr.favg:.6f}")
    if fr.fgate is not None:
        click.echo(f"F_gate={fr.fgate:.6f} over {fr.two_qubit_gates} two-qubit gates")


@main.command()
def selftest():
    """Run the built-in oracle checks."""
    from .selfcheck import run_all

    results = run_all()
    for name, ok, detail in results:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)


if __name__ == "__main__":
    main()
