"""Command-line interface: ``check``, ``scan``, ``simulate`` and ``witness``.

Results go to files under ``--out`` (and a summary to stdout); errors go to
stderr as one JSON object.  Exit status: 0 success, 2 invalid input, 3
certification failure, 4 inconclusive witness.
"""
import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, fields

import tomli

from .criterion import MILNORIAN, evaluate, format_table, scan
from .errors import (BudgetExhausted, CertificationFailure, ConditionNotMet, ConfigError,
                     DegenerateInvariant, MilnorianError, NotCollinear, NotRegular)
from .pipeline import (DEFAULT_N_MAX, DEFAULT_PREFIXES, simulate, witness)
from .rootsys import parse_type
from .schottky import DEFAULT_BUDGET, DEFAULT_S_THRESHOLD, DEFAULT_SAMPLES
from .words import DEFAULT_POOL, DEFAULT_STEP_BUDGET

EXIT_OK, EXIT_INVALID, EXIT_CERTIFICATION, EXIT_INCONCLUSIVE = 0, 2, 3, 4
COMMANDS = ("check", "scan", "simulate", "witness")
CSV_COLUMNS = ("word", "length", "margulis_norm", "defect", "s_hat", "step_decrement")
_WEIGHT_RE = re.compile(r"^\s*\d+\s*(,\s*\d+\s*)*$")


class CatalogError(ConfigError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


# --------------------------------------------------------------------------- config

@dataclass
class RunConfig:
    command: str
    type: str = None
    rank: int = None
    weight: tuple = None
    seed: int = None
    n_max: int = DEFAULT_N_MAX
    budget: int = DEFAULT_BUDGET
    sample_count: int = DEFAULT_SAMPLES
    pool_size: int = DEFAULT_POOL
    prefixes: int = DEFAULT_PREFIXES
    step_budget: int = DEFAULT_STEP_BUDGET
    s_threshold: float = DEFAULT_S_THRESHOLD
    catalog: str = None
    input: str = None
    out: str = "."

    @property
    def rep_id(self):
        return (self.type, self.rank, tuple(self.weight))

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command in ("check", "simulate"):
            if self.type is None or self.rank is None or self.weight is None:
                raise ConfigError(f"{self.command} needs --type, --rank and --weight")
            self.type = str(self.type).upper()
            parse_type(f"{self.type}{self.rank}")
            if len(self.weight) != self.rank:
                raise ConfigError(f"weight has {len(self.weight)} entries, rank is {self.rank}")
        if self.command == "scan" and self.catalog is None:
            raise ConfigError("scan needs --catalog")
        if self.command == "witness" and self.input is None:
            raise ConfigError("witness needs --input (a simulate artifact)")
        if self.command == "simulate" and self.seed is None:
            raise ConfigError("simulate needs --seed")
        for name in ("n_max", "budget", "sample_count", "pool_size", "prefixes", "step_budget"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not (0 < self.s_threshold < 1):
            raise ConfigError(f"s_threshold must lie in (0, 1), got {self.s_threshold!r}")
        return self

    def to_json(self):
        """The configuration as embedded in artifacts (output location excluded)."""
        d = asdict(self)
        d.pop("out")
        if d["weight"] is not None:
            d["weight"] = list(d["weight"])
        return d


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}
_CONFIG_ALIASES = {"samples": "sample_count", "pool": "pool_size"}


def parse_weight(text):
    if isinstance(text, (list, tuple)):
        if not all(isinstance(x, int) and x >= 0 for x in text):
            raise ConfigError(f"malformed weight {text!r}")
        return tuple(text)
    if not isinstance(text, str) or not _WEIGHT_RE.match(text):
        raise ConfigError(f"malformed weight string {text!r}")
    return tuple(int(x) for x in text.split(","))


def load_config_file(path):
    """Key/value settings from a TOML file; unknown keys are rejected."""
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config {path}: {exc}")
    out = {}
    for key, value in data.items():
        key = _CONFIG_ALIASES.get(key, key)
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r} in {path}")
        out[key] = value
    if "weight" in out:
        out["weight"] = parse_weight(out["weight"])
    return out


def build_config(command, file_values, overrides):
    values = dict(file_values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["command"] = command
    unknown = set(values) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    return RunConfig(**values).validate()


# --------------------------------------------------------------------------- catalog

def _weight_positions(text):
    """(line, column) of every ``weight = ...`` value, in file order."""
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*weight\s*=\s*", line)
        if m:
            out.append((n, m.end() + 1))
    return out


def ingest_catalog(path):
    """Representation ids listed as ``[[entry]]`` tables with ``group`` and ``weight``."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CatalogError(f"cannot read catalog {path}: {exc}")
    text = raw.decode("utf-8")
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise CatalogError(f"catalog {path}: {exc}", line, col)
    extra = set(data) - {"entry"}
    if extra:
        raise CatalogError(f"catalog {path}: unknown top-level keys {sorted(extra)}")
    positions = _weight_positions(text)
    out = []
    for n, entry in enumerate(data.get("entry", [])):
        line, col = positions[n] if n < len(positions) else (None, None)
        unknown = set(entry) - {"group", "weight"}
        if unknown:
            raise CatalogError(f"catalog entry {n + 1}: unknown keys {sorted(unknown)}", line, col)
        if "group" not in entry or "weight" not in entry:
            raise CatalogError(f"catalog entry {n + 1} needs group and weight", line, col)
        try:
            t, r = parse_type(str(entry["group"]))
            w = parse_weight(entry["weight"])
        except (ConfigError, ValueError) as exc:
            raise CatalogError(f"catalog entry {n + 1}: {exc}", line, col)
        out.append((t, r, w))
    return out


# --------------------------------------------------------------------------- serialisation

def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def _plain(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def dumps(obj, indent=0, _level=0):
    """JSON text with every float written with 17 significant digits."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    sep = ",\n" if indent else ", "
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + sep.join(items) + "\n" + end + "}" if indent else "{" + sep.join(items) + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(_plain(v), (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + sep.join(items) + "\n" + end + "]" if indent else "[" + sep.join(items) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def traces_csv(traces):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for t in traces:
        norm = float(sum(x * x for x in t.final_margulis)) ** 0.5
        defect = _fmt_float(max(t.defects)) if t.defects else ""
        dec = _fmt_float(min(t.decrements)) if t.decrements else ""
        writer.writerow([t.word, len(t.letters), _fmt_float(norm), defect, _fmt_float(t.s_hat), dec])
    return buf.getvalue()


# --------------------------------------------------------------------------- commands

def _artifact(config, body):
    return {"config": config.to_json(), "seed": config.seed, **body}


def _cmd_check(config):
    report = evaluate(config.rep_id)
    text = dumps(_artifact(config, {"report": report.to_json()}), indent=2) + "\n"
    _write(os.path.join(config.out, "check.json"), text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_scan(config):
    reports = scan(ingest_catalog(config.catalog))
    text = dumps(_artifact(config, {"reports": [r.to_json() for r in reports]}), indent=2) + "\n"
    table = format_table(reports) + "\n"
    _write(os.path.join(config.out, "scan.json"), text)
    _write(os.path.join(config.out, "scan.txt"), table)
    sys.stdout.write(table)
    return EXIT_OK


def _run_simulation(config):
    rep = evaluate(config.rep_id)
    if rep.verdict != MILNORIAN:
        raise ConfigError(f"{config.type}{config.rank} {config.weight} has verdict {rep.verdict}; "
                          "simulation needs a Milnorian representation")
    return simulate(config.rep_id, config.seed, n_max=config.n_max, budget=config.budget,
                    sample_count=config.sample_count, pool_size=config.pool_size,
                    prefixes=config.prefixes, step_budget=config.step_budget,
                    s_threshold=config.s_threshold)


def _cmd_simulate(config):
    sim = _run_simulation(config)
    _write(os.path.join(config.out, "family.json"),
           dumps(_artifact(config, sim.to_json()), indent=2) + "\n")
    _write(os.path.join(config.out, "traces.csv"), traces_csv(sim.traces))
    sys.stdout.write(dumps({"path": sim.path, "traces": len(sim.traces), "R": sim.R,
                            "C_prime": sim.C_prime}) + "\n")
    return EXIT_OK


def _cmd_witness(config):
    try:
        with open(config.input) as fh:
            source = json.load(fh)
        src_config = dict(source["config"])
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read simulate artifact {config.input}: {exc}")
    src_config.pop("command", None)
    src = build_config("simulate", {**src_config, "weight": parse_weight(src_config["weight"])}, {})
    # the artifact stores floats only; the exact family is rebuilt from its config and checked
    sim = _run_simulation(src)
    if dumps(sim.to_json()["traces"]) != dumps(source.get("traces")):
        raise CertificationFailure("simulate artifact does not match a re-run of its own config")
    if config.seed is None:
        config.seed = src.seed
    report = witness(sim, seed=config.seed)
    body = {"source": src.to_json(), "witness": report.to_json()}
    text = dumps(_artifact(config, body), indent=2) + "\n"
    _write(os.path.join(config.out, "witness.json"), text)
    sys.stdout.write(dumps({k: v for k, v in report.to_json().items() if k != "per_gamma"}) + "\n")
    if report.failures:
        raise CertificationFailure(f"{report.failures} elements failed the witness test")
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


_COMMANDS = {"check": _cmd_check, "scan": _cmd_scan, "simulate": _cmd_simulate,
             "witness": _cmd_witness}


def run(config):
    """Execute a validated configuration; returns the exit status."""
    return _COMMANDS[config.command](config)


# --------------------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    """Argument errors become :class:`ConfigError` so they reach the JSON error stream."""

    def error(self, message):
        raise ConfigError(message)


def make_parser():
    parser = _Parser(prog="milnorian", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="TOML file with default settings")
    parser.add_argument("--type", dest="type")
    parser.add_argument("--rank", type=int)
    parser.add_argument("--weight", help="highest weight in fundamental-weight coordinates, e.g. 1,0")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n-max", dest="n_max", type=int)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--samples", dest="sample_count", type=int)
    parser.add_argument("--pool", dest="pool_size", type=int)
    parser.add_argument("--prefixes", type=int)
    parser.add_argument("--step-budget", dest="step_budget", type=int)
    parser.add_argument("--s-threshold", dest="s_threshold", type=float)
    parser.add_argument("--catalog")
    parser.add_argument("--input")
    parser.add_argument("--out")
    return parser


def _error(exc, status):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_status": status}
    for key in ("line", "column", "best"):
        if getattr(exc, key, None) is not None:
            payload[key] = getattr(exc, key)
    sys.stderr.write(dumps(payload) + "\n")
    return status


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        return _error(exc, EXIT_INVALID)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = load_config_file(args.config) if args.config else {}
        if overrides.get("weight") is not None:
            overrides["weight"] = parse_weight(overrides["weight"])
        config = build_config(args.command, file_values, overrides)
    except (ConfigError, ValueError, TypeError) as exc:
        return _error(exc, EXIT_INVALID)
    try:
        return run(config)
    except (CertificationFailure, BudgetExhausted, NotRegular, DegenerateInvariant,
            NotCollinear, ConditionNotMet) as exc:
        return _error(exc, EXIT_CERTIFICATION)
    except (ConfigError, ValueError) as exc:
        return _error(exc, EXIT_INVALID)
    except MilnorianError as exc:
        return _error(exc, EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
