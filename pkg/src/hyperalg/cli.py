"""Command-line harness: ``hyperalg {concentration,capacity,encode,roundtrip}``.

Exit codes: 0 on success, 2 for usage or configuration errors (with the
config file line when there is one), 1 for failures while running.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from typing import Sequence

import numpy as np

from . import __version__
from .capacity import (
    CapacityConfig,
    ConcentrationConfig,
    correct_mask,
    run_concentration_experiment,
    run_sequence_recovery_experiment,
    score_arrays,
    stats_to_dict,
)
from .config import (
    ConfigError,
    as_bool,
    as_float,
    as_int,
    as_int_list,
    as_str,
    as_str_list,
    flag_type,
    load_config_file,
    resolve,
)
from .encoders.graph import encode_graph
from .encoders.projection import make_rp_spec, postprocess, project
from .encoders.scalar import CONCATENATION, build_level_codebook, encode_vector_compositional
from .encoders.sequence import encode_ngram_stats, tokenize
from .errors import HyperalgError
from .memory import ItemMemory
from .models import MODELS, make_model
from .serialize import to_bytes, to_dict
from .spaces import Hypervector, RngStream


def positive_int(s: str) -> int:
    v = as_int(s)
    if v < 1:
        raise ValueError(f"must be a positive integer, got {v}")
    return v


def positive_int_list(s: str) -> tuple[int, ...]:
    v = as_int_list(s)
    if min(v) < 1:
        raise ValueError("all entries must be positive")
    return v


def seed_value(s: str) -> int:
    v = as_int(s)
    if not 0 <= v < 2**64:
        raise ValueError("seed must lie in [0, 2**64)")
    return v


def model_name(s: str) -> str:
    v = as_str(s).lower()
    if v not in MODELS:
        raise ValueError(f"unknown model {v!r}; expected one of {', '.join(sorted(MODELS))}")
    return v


def model_list(s: str) -> tuple[str, ...]:
    names = as_str_list(s)
    for n in names:
        model_name(n)
    return names


def choice(*options: str):
    def conv(s: str) -> str:
        v = as_str(s).lower()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v

    conv.__name__ = "choice"
    return conv


def unit_interval(s: str) -> float:
    v = as_float(s)
    if not 0.0 < v < 1.0:
        raise ValueError(f"must lie in (0, 1), got {v}")
    return v


COMMON = {"seed": seed_value, "out": as_str, "manifest": as_str}
MODEL_PARAMS = {"density": unit_interval, "block_size": positive_int, "r": positive_int, "t": positive_int, "matrix_kind": choice("orthogonal", "bipolar")}

SCHEMAS = {
    "concentration": {
        **COMMON,
        "dims": positive_int_list,
        "count": positive_int,
        "max_pairs": positive_int,
        "samples_out": as_str,
    },
    "capacity": {
        **COMMON,
        "model": model_list,
        "dim": positive_int,
        "items": positive_int,
        "lengths": positive_int_list,
        "runs": positive_int,
        "trials": positive_int,
        "stats_trials": positive_int,
        "threads": positive_int,
        "norm": as_str,
    },
    "encode": {
        **COMMON,
        **MODEL_PARAMS,
        "model": model_name,
        "dim": positive_int,
        "input": as_str,
        "kind": choice("text", "vector", "graph"),
        "tokenize": choice("char", "byte", "whitespace"),
        "n": positive_int,
        "format": choice("json", "hvec"),
        "vector_encoder": choice("rp", "levels"),
        "rp_kind": choice("gaussian", "bipolar", "ternary"),
        "rp_density": unit_interval,
        "post": choice("none", "binarize", "ternarize"),
        "levels": positive_int,
        "lo": as_float,
        "hi": as_float,
        "clamp": as_bool,
    },
    "roundtrip": {
        **COMMON,
        **MODEL_PARAMS,
        "model": model_name,
        "dim": positive_int,
        "items": positive_int,
        "trials": positive_int,
    },
}

DEFAULTS = {
    "concentration": {"dims": (128, 1024, 8192), "count": 2000},
    "capacity": {
        "model": ("bsc", "map", "fhrr"),
        "dim": 256,
        "items": 64,
        "lengths": tuple(range(2, 51)),
        "runs": 5,
        "trials": 100,
        "stats_trials": 2000,
    },
    "encode": {
        "model": "map",
        "dim": 1024,
        "kind": "text",
        "tokenize": "char",
        "n": 3,
        "format": "json",
        "vector_encoder": "rp",
        "rp_kind": "gaussian",
        "rp_density": 0.1,
        "post": "none",
        "levels": 16,
        "lo": 0.0,
        "hi": 1.0,
        "clamp": False,
    },
    "roundtrip": {"model": "bsc", "dim": 1024, "items": 64, "trials": 1000},
}

# alternative spellings accepted in config files (and as flags)
ALIASES = {"capacity": {"models": "model"}}

# keys that change how a run executes but not what it produces
NON_RESULT_KEYS = {"threads", "out", "manifest", "samples_out"}


# ---------------------------------------------------------------- output helpers


def write_atomic(path: str, data: bytes) -> None:
    """Write ``data`` to a temporary file next to ``path`` and rename it into place."""
    target = os.path.abspath(path)
    folder = os.path.dirname(target)
    if not os.path.isdir(folder):
        raise FileNotFoundError(f"output directory does not exist: {folder}")
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def csv_bytes(rows: list[dict], columns: Sequence[str]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue().encode("utf-8")


def json_bytes(obj) -> bytes:
    # Python floats serialize with the shortest repr that round-trips exactly
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("utf-8")


def emit(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()
    else:
        write_atomic(path, data)


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    return v


def manifest_for(command: str, values: dict, extra: dict | None = None) -> dict:
    cfg = {k: _jsonable(v) for k, v in sorted(values.items()) if k not in NON_RESULT_KEYS}
    out = {"tool": "hyperalg", "version": __version__, "command": command, "config": cfg}
    if extra:
        out.update(extra)
    return out


def write_manifest(command: str, values: dict, extra: dict | None = None) -> None:
    path = values.get("manifest")
    if path is None and values.get("out") not in (None, "-"):
        path = values["out"] + ".manifest.json"
    if path is not None:
        write_atomic(path, json_bytes(manifest_for(command, values, extra)))


# ---------------------------------------------------------------- commands


def _model_from(values: dict):
    params = {}
    name = values["model"]
    if name == "sbdr":
        if "density" in values:
            params["density"] = values["density"]
        if "t" in values:
            params["T"] = values["t"]
    if name == "sbc" and "block_size" in values:
        params["block_size"] = values["block_size"]
    if name in ("mcr", "cgr") and "r" in values:
        params["r"] = values["r"]
    if name == "mbat" and "matrix_kind" in values:
        params["matrix_kind"] = values["matrix_kind"]
    return make_model(name, values["dim"], seed=values["seed"], **params)


def prepare_concentration(values: dict):
    cfg = ConcentrationConfig(values["dims"], values["count"], values["seed"], values.get("max_pairs"))
    return lambda: run_concentration(cfg, values)


def run_concentration(cfg: ConcentrationConfig, values: dict) -> int:
    res = run_concentration_experiment(cfg)
    cols = ["D", "count", "pairs", "mean", "std", "expected_std"]
    emit(values.get("out"), csv_bytes(res.rows(), cols))
    if values.get("samples_out"):
        rows = [{"D": D, "similarity": s} for D in cfg.dims for s in res.samples[D]]
        write_atomic(values["samples_out"], csv_bytes(rows, ["D", "similarity"]))
    write_manifest("concentration", values, {"fits": {str(D): list(res.fits[D]) for D in cfg.dims}})
    return 0


CAPACITY_COLUMNS = ["model", "D", "N", "m", "trials", "empirical_acc", "analytic_pcorr", "seed"]


def prepare_capacity(values: dict):
    cfg = CapacityConfig(
        models=values["model"],
        dim=values["dim"],
        items=values["items"],
        lengths=values["lengths"],
        runs=values["runs"],
        trials=values["trials"],
        stats_trials=values["stats_trials"],
        seed=values["seed"],
        threads=values.get("threads"),
        norm=values.get("norm"),
    )
    for name in cfg.models:
        model = make_model(name, cfg.dim, seed=cfg.seed)
        if cfg.norm is not None:
            model._check_norm(cfg.norm)
    return lambda: run_capacity(cfg, values)


def run_capacity(cfg: CapacityConfig, values: dict) -> int:
    curve = run_sequence_recovery_experiment(cfg)
    emit(values.get("out"), csv_bytes(curve.rows(), CAPACITY_COLUMNS))
    stats = [{"model": p.model, "m": p.m, **stats_to_dict(p.stats)} for p in curve.points]
    write_manifest("capacity", values, {"detection_stats": stats})
    return 0


def read_edges(path: str) -> list[tuple[str, str, bool]]:
    """Edge list: one ``u v`` (undirected) or ``u v ->`` (directed) per line; ``#`` comments."""
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split("#", 1)[0].split()
            if not parts:
                continue
            if len(parts) == 2:
                edges.append((parts[0], parts[1], False))
            elif len(parts) == 3 and parts[2] == "->":
                edges.append((parts[0], parts[1], True))
            else:
                raise ConfigError(f"expected 'u v' or 'u v ->', got {raw.strip()!r}", lineno, path)
    return edges


def read_vectors(path: str) -> np.ndarray:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        X = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"non-numeric vector entry: {exc}", source=path) from None
    if X.ndim != 2 or X.shape[0] == 0:
        raise ConfigError("vector file needs rows of equal length", source=path)
    return X


def encode_outputs(values: dict, model) -> list[Hypervector]:
    kind = values["kind"]
    path = values["input"]
    seed = values["seed"]
    if kind == "vector" and values["vector_encoder"] == "rp":
        X = read_vectors(path)
        spec = make_rp_spec(
            X.shape[1],
            values["dim"],
            RngStream(seed, "encode/rp"),
            kinds=(values["rp_kind"],),
            density=values["rp_density"],
            post=values["post"],
        )
        Z = postprocess(project(X, spec), spec)
        return [Hypervector(spec.space, z) for z in Z]
    if kind == "text":
        with open(path, encoding="utf-8") as fh:
            tokens = tokenize(fh.read(), values["tokenize"])
        mem = ItemMemory.from_seed(model.space, sorted(set(tokens)), seed, model.metric, label="symbols")
        return [encode_ngram_stats(model, mem, tokens, values["n"])]
    if kind == "graph":
        edges = read_edges(path)
        nodes = sorted({u for u, _, _ in edges} | {v for _, v, _ in edges})
        mem = ItemMemory.from_seed(model.space, nodes, seed, model.metric, label="nodes")
        return [encode_graph(model, mem, edges)]
    X = read_vectors(path)
    cb = build_level_codebook(
        model.space, values["levels"], CONCATENATION, RngStream(seed, "encode/levels"), values["lo"], values["hi"], values["clamp"]
    )
    return [encode_vector_compositional(model, row, cb, "permutation") for row in X]


def prepare_encode(values: dict):
    if "input" not in values:
        raise ConfigError("encode needs --input")
    if values["format"] == "hvec" and values.get("out") in (None, "-"):
        raise ConfigError("the hvec format needs --out")
    model = _model_from(values)
    return lambda: run_encode(model, values)


def run_encode(model, values: dict) -> int:
    hvs = encode_outputs(values, model)
    if values["format"] == "hvec":
        blobs = [to_bytes(hv) for hv in hvs]
        write_atomic(values["out"], b"".join(blobs))
    else:
        payload = to_dict(hvs[0]) if len(hvs) == 1 else [to_dict(h) for h in hvs]
        emit(values.get("out"), json_bytes(payload))
    write_manifest("encode", values, {"count": len(hvs)})
    return 0


UNBINDABLE = ("sbdr", "mbat", "tpr2")


def check_roundtrip_setup(model, n_items: int) -> None:
    if model.name in UNBINDABLE:
        raise ConfigError(f"roundtrip needs a model with array unbinding, not {model.name}")
    if n_items < 4:
        raise ConfigError("roundtrip needs at least 4 items")


def roundtrip_check(model, n_items: int, trials: int, seed: int) -> dict:
    """Recover both factors of ``s = a*b + c*d`` by unbinding and clean-up.

    Each trial draws four distinct items from one seeded memory. Success means
    the expected item strictly outscores every other item.
    """
    check_roundtrip_setup(model, n_items)
    atoms = model.random_arrays(n_items, RngStream(seed, "roundtrip/items"))
    gen = RngStream(seed, "roundtrip/trials").generator()
    idx = np.argsort(gen.random((trials, n_items)), axis=1)[:, :4]
    A, B, C, D = (atoms[idx[:, k]] for k in range(4))
    s = model.superpose_arrays(np.stack([model.bind_arrays(A, B), model.bind_arrays(C, D)]))
    report = {"model": model.name, "D": model.dim, "N": n_items, "trials": trials, "seed": seed}
    margins = []
    successes = []
    for key, known, target in (("a_to_b", A, idx[:, 1]), ("b_to_a", B, idx[:, 0])):
        sc = score_arrays(model, model.unbind_arrays(s, known), atoms)
        ok = correct_mask(sc, target)
        hit = sc[np.arange(trials), target]
        other = sc.copy()
        other[np.arange(trials), target] = -np.inf
        margins.append(hit - other.max(axis=1))
        successes.append(ok)
        report[f"success_{key}"] = float(ok.mean())
    report["success"] = float(np.concatenate(successes).mean())
    m = np.concatenate(margins)
    report["mean_margin"] = float(m.mean())
    report["min_margin"] = float(m.min())
    return report


def prepare_roundtrip(values: dict):
    model = _model_from(values)
    check_roundtrip_setup(model, values["items"])
    return lambda: run_roundtrip(model, values)


def run_roundtrip(model, values: dict) -> int:
    report = roundtrip_check(model, values["items"], values["trials"], values["seed"])
    line = (
        f"roundtrip model={report['model']} D={report['D']} N={report['N']} trials={report['trials']} "
        f"seed={report['seed']} success={report['success']:.6f} a_to_b={report['success_a_to_b']:.6f} "
        f"b_to_a={report['success_b_to_a']:.6f} mean_margin={report['mean_margin']:.6f} "
        f"min_margin={report['min_margin']:.6f}"
    )
    print(line)
    if values.get("out") not in (None, "-"):
        write_atomic(values["out"], json_bytes(report))
    write_manifest("roundtrip", values)
    return 0


COMMANDS = {
    "concentration": prepare_concentration,
    "capacity": prepare_capacity,
    "encode": prepare_encode,
    "roundtrip": prepare_roundtrip,
}

HELP = {
    "concentration": "pairwise cosine statistics of random bipolar vectors",
    "capacity": "sequence recovery accuracy versus length, empirical and analytic",
    "encode": "encode a text, vector or graph file into hypervectors",
    "roundtrip": "recover both factors of a*b + c*d by unbinding and clean-up",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperalg", description="Hyperdimensional computing experiments and encoders.")
    parser.add_argument("--version", action="version", version=f"hyperalg {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", help="config file; command-line flags override its values")
        for key, conv in schema.items():
            flag = "--" + key.replace("_", "-")
            if key == "t":
                flag = "--T"
            if key == "model" and name == "capacity":
                p.add_argument(flag, "--models", dest=key, type=flag_type(conv), default=None)
            else:
                p.add_argument(flag, dest=key, type=flag_type(conv), default=None)
    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise ConfigError("missing command; choose one of " + ", ".join(COMMANDS))
        command = ns.command
        flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
        file_cfg = load_config_file(ns.config) if ns.config else None
        values = {**DEFAULTS[command], **resolve(command, SCHEMAS[command], file_cfg, flags, ALIASES.get(command))}
        if "seed" not in values:
            raise ConfigError("--seed is required (no run uses hidden entropy)")
        run = COMMANDS[command](values)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (HyperalgError, ValueError) as exc:
        # everything up to here is argument, config and model validation
        print(f"hyperalg: error: {exc}", file=sys.stderr)
        return 2
    try:
        return run()
    except ConfigError as exc:
        print(f"hyperalg: error: {exc}", file=sys.stderr)
        return 2
    except (HyperalgError, ValueError, OSError) as exc:
        print(f"hyperalg: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
