"""Experiment configuration and artifact files (JSONL batches, CSV tables, JSON reports)."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .noise import NoiseSpecError, NoNoise, noise_from_json
from .protocol import RoundPlan, ShotBatch, SpamNoise

OUTPUT_ENV = "MATCHBENCH_OUTPUT_DIR"
DEFAULT_OUTPUT = "matchbench-out"


class ConfigError(ValueError):
    pass


CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n", "m_list", "K", "seed"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "k_list": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "m_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "K": {"type": "integer", "minimum": 1},
        "L": {"type": ["integer", "null"], "minimum": 1},
        "ensemble": {"enum": ["haar", "design"]},
        "noise": {"type": ["object", "null"]},
        "spam_noise": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "properties": {"prep": {"type": ["object", "null"]}, "meas": {"type": ["object", "null"]}},
        },
        "backend": {"enum": ["dense", "covariance", "auto"]},
        "seed": {"type": "integer", "minimum": 0},
        "use_xy": {"type": "boolean"},
        "workers": {"type": "integer", "minimum": 1},
        "output_dir": {"type": ["string", "null"]},
    },
}


@dataclass
class ExperimentConfig:
    n: int
    m_list: list[int]
    K: int
    seed: int
    k_list: list[int] | None = None
    L: int | None = 400
    ensemble: str = "haar"
    noise: dict | None = None
    spam_noise: dict | None = None
    backend: str = "auto"
    use_xy: bool = False
    workers: int = 1
    output_dir: str | None = None
    _noise_model: object = field(default=None, repr=False, compare=False)
    _spam_model: object = field(default=None, repr=False, compare=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(d, CONFIG_SCHEMA)
        except jsonschema.ValidationError as err:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            raise ConfigError(f"config field {where}: {err.message}") from None
        cfg = cls(**{k: d[k] for k in d})
        if cfg.k_list is None:
            cfg.k_list = list(range(2 * cfg.n + 1))
        try:
            cfg._noise_model = noise_from_json(cfg.noise)
            sn = cfg.spam_noise or {}
            prep = noise_from_json(sn["prep"]) if sn.get("prep") else None
            meas = noise_from_json(sn["meas"]) if sn.get("meas") else None
            cfg._spam_model = SpamNoise(prep, meas)
        except (NoiseSpecError, KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"config field noise: {err}") from None
        try:
            cfg.plan()
        except ValueError as err:
            raise ConfigError(f"config: {err}") from None
        return cfg

    def to_dict(self) -> dict:
        out = {
            "n": self.n, "k_list": list(self.k_list), "m_list": list(self.m_list),
            "K": self.K, "L": self.L, "ensemble": self.ensemble,
            "noise": self.noise, "spam_noise": self.spam_noise,
            "backend": self.backend, "seed": self.seed, "use_xy": self.use_xy,
            "workers": self.workers, "output_dir": self.output_dir,
        }
        return out

    def plan(self) -> RoundPlan:
        return RoundPlan(self.n, tuple(self.k_list), tuple(self.m_list), self.K, self.L,
                         self.seed, self.use_xy, self.ensemble)

    @property
    def noise_model(self):
        return self._noise_model if self._noise_model is not None else NoNoise()

    @property
    def spam_model(self) -> SpamNoise:
        return self._spam_model if self._spam_model is not None else SpamNoise()


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from None
    return ExperimentConfig.from_dict(data)


def output_dir(cli_value: str | None, cfg: ExperimentConfig | None = None) -> Path:
    for candidate in (cli_value, cfg.output_dir if cfg else None, os.environ.get(OUTPUT_ENV)):
        if candidate:
            return Path(candidate)
    return Path(DEFAULT_OUTPUT)


# -- serialisation ------------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def write_batches(path, batches) -> int:
    count = 0
    with open(path, "w") as fh:
        for b in batches:
            fh.write(dumps(b.to_json()) + "\n")
            count += 1
    return count


def read_batches(path) -> list[ShotBatch]:
    with open(path) as fh:
        return [ShotBatch.from_json(json.loads(line)) for line in fh if line.strip()]


def _fmt(v) -> str:
    if v is None:
        return "inf"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


FHAT_HEADER = ("k", "m", "f_hat", "K", "L")
SEQUENCE_HEADER = ("k", "m", "i", "value")


def write_fhat(path, rows) -> None:
    Path(path).write_text(table_csv(rows, FHAT_HEADER))


def write_sequences(path, values: dict) -> None:
    rows = [(k, m, i, float(v)) for (k, m), vals in sorted(values.items()) for i, v in enumerate(vals)]
    Path(path).write_text(table_csv(rows, SEQUENCE_HEADER))


def read_fhat(path) -> list[tuple[int, int, float, int, int | None]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(FHAT_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        out = []
        for line, r in enumerate(reader, start=2):
            try:
                L = None if r["L"] in ("inf", "", "None") else int(r["L"])
                out.append((int(r["k"]), int(r["m"]), float(r["f_hat"]), int(r["K"]), L))
            except ValueError as err:
                raise ConfigError(f"{path}: line {line}: {err}") from None
        return out


def read_sequences(path) -> dict[tuple[int, int], list[float]]:
    out: dict[tuple[int, int], list[float]] = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            out.setdefault((int(r["k"]), int(r["m"])), []).append(float(r["value"]))
    return out


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
