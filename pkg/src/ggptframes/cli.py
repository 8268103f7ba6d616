"""Command-line front end.

Measurement files are JSON objects::

    {"model": "quantum:2",
     "effects": [{"coords": [...]}, {"matrix": {"re": [[...]], "im": [[...]]}},
                 {"vector": [...]}]}

``coords`` are adapted coordinates ``(f(m); f(u_i))``; ``matrix`` is a
Hermitian effect operator (quantum models); ``vector`` is an effect on R^n
(classical models).  ``{"named": "qubit_sic", "args": []}`` selects a built-in
measurement.  Exit codes: 0 success, 1 I/O or parse error, 2 validation
failure, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import GgptError, SolverError, ValidationError
from .ggpt import GgptModel
from .measurements import DEFAULT_TOL, Measurement, classify
from .models import (
    coords_to_matrix,
    coords_to_vector,
    effect_from_matrix,
    effect_from_vector,
    model_from_descriptor,
    named_measurement,
    sweep_family,
    write_sweep_csv,
)
from .scalable import find_scales
from .frames import Frame
from .urgleichung import predict_statistics, reconstruct_state, verify_primal_equation

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_SOLVER = 3
DIGITS = 12

COMMANDS = ("classify", "scales", "reconstruct", "predict", "verify", "sweep")


class ParseError(Exception):
    """Malformed input file or argument (exit code 1)."""


@dataclass
class CliConfig:
    command: str
    povm: str | None = None
    xi: str | None = None
    model: str | None = None
    probs: list | None = None
    scales: list | None = None
    tight: bool = False
    samples: int = 100
    seed: int = 0
    tol: float = DEFAULT_TOL
    grid: str = "50x50x50"
    out: str | None = None
    workers: int = 1
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")


# ---------------------------------------------------------------------------
# Serialization


def _round(obj):
    """Recursively convert to JSON-ready types with floats at 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return str(x)
        return float(f"{x:.{DIGITS}g}")
    return obj


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def emit(report: dict, fmt: str, stream) -> None:
    data = _round(report)
    if fmt == "csv":
        stream.write("key,value\n")
        for k, v in _flatten(data):
            stream.write(f"{k},{'' if v is None else v}\n")
    else:
        stream.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Input parsing


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def _parse_floats(text: str, what: str) -> list[float]:
    parts = [t for t in text.replace(",", " ").split() if t]
    try:
        return [float(t) for t in parts]
    except ValueError:
        raise ParseError(f"cannot parse {what} {text!r}") from None


def _effect_coords(model: GgptModel, spec) -> np.ndarray:
    if not isinstance(spec, dict):
        raise ParseError(f"effect entry must be an object, got {type(spec).__name__}")
    if "coords" in spec:
        return np.asarray(spec["coords"], dtype=float)
    if "matrix" in spec:
        mat = spec["matrix"]
        if isinstance(mat, dict):
            arr = np.asarray(mat["re"], dtype=float) + 1j * np.asarray(mat.get("im", 0.0), dtype=float)
        else:
            arr = np.asarray(mat, dtype=complex)
        return effect_from_matrix(model, arr)
    if "vector" in spec:
        return effect_from_vector(model, spec["vector"])
    raise ParseError(f"effect entry needs one of coords, matrix, vector; got keys {sorted(spec)}")


def load_measurement(path: str, model_arg: str | None, tol: float = 1e-9) -> Measurement:
    """Read a measurement file; the file's model descriptor wins over ``model_arg``."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    if "named" in doc:
        return named_measurement(doc["named"], *doc.get("args", []))
    desc = doc.get("model")
    if desc is not None and model_arg is not None:
        file_model = model_from_descriptor(desc)
        if file_model != model_from_descriptor(model_arg):
            print(f"warning: {path} declares model {file_model.name}; ignoring --model {model_arg}", file=sys.stderr)
    if desc is None:
        desc = model_arg
    if desc is None:
        raise ValidationError(f"{path}: no model given in the file or via --model")
    model = model_from_descriptor(desc)
    try:
        effects = [_effect_coords(model, e) for e in doc["effects"]]
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"{path}: malformed effect ({exc})") from None
    return Measurement(model, effects, tol=tol, label=path)


def _load_probs(cfg: CliConfig) -> np.ndarray:
    if cfg.probs is not None:
        return np.asarray(cfg.probs, dtype=float)
    path = cfg.extra.get("probs_file")
    if path is None:
        raise ValidationError("a probability vector is required (--probs or --probs-file)")
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return np.asarray(_parse_floats(text, "probability file"), dtype=float)
    if isinstance(doc, dict):
        doc = doc.get("probs")
    if not isinstance(doc, list):
        raise ParseError(f"{path}: expected a list of probabilities")
    return np.asarray(doc, dtype=float)


def _native_state(model: GgptModel, x: np.ndarray) -> dict:
    if model.descriptor["type"] == "quantum":
        mat = coords_to_matrix(model, x)
        return {"matrix": {"re": mat.real, "im": mat.imag}}
    return {"vector": coords_to_vector(model, x)}


def _scales_for(pi: Measurement, cfg: CliConfig) -> np.ndarray:
    if cfg.scales is not None:
        return np.asarray(cfg.scales, dtype=float)
    if cfg.tight:
        return 1.0 / np.sqrt(pi.pm)
    report = classify(pi, cfg.tol)
    if not report.s_tight:
        raise ValidationError("measurement is not s-tight; supply --scales explicitly")
    return report.scales


# ---------------------------------------------------------------------------
# Commands


def _cmd_classify(cfg: CliConfig, out) -> int:
    meas = load_measurement(cfg.povm, cfg.model)
    report = classify(meas, cfg.tol).to_dict()
    report["model"] = meas.model.name
    report["n"] = meas.n
    emit(report, cfg.format, out)
    return EXIT_OK


def _cmd_scales(cfg: CliConfig, out) -> int:
    meas = load_measurement(cfg.povm, cfg.model)
    res = find_scales(Frame(meas.v[:, 1:]), cfg.tol)
    emit(
        {
            "scalable": res.scalable,
            "residual": res.residual,
            "scales": res.scales,
            "frame_bound": res.frame_bound,
            "span_collapsed": res.span_collapsed,
        },
        cfg.format,
        out,
    )
    return EXIT_OK


def _cmd_reconstruct(cfg: CliConfig, out) -> int:
    meas = load_measurement(cfg.povm, cfg.model)
    p = _load_probs(cfg)
    rec = reconstruct_state(meas, _scales_for(meas, cfg), None, p, cfg.tol)
    emit({"state": rec.state, "in_cone": rec.in_cone, **_native_state(meas.model, rec.state)}, cfg.format, out)
    return EXIT_OK


def _cmd_predict(cfg: CliConfig, out) -> int:
    pi = load_measurement(cfg.povm, cfg.model)
    xi = load_measurement(cfg.xi, cfg.model)
    p = _load_probs(cfg)
    emit({"probs": predict_statistics(pi, xi, _scales_for(pi, cfg), p, cfg.tol)}, cfg.format, out)
    return EXIT_OK


def _cmd_verify(cfg: CliConfig, out) -> int:
    pi = load_measurement(cfg.povm, cfg.model)
    xi = load_measurement(cfg.xi, cfg.model)
    residual = verify_primal_equation(pi, xi, _scales_for(pi, cfg), cfg.samples, cfg.seed)
    ok = residual <= cfg.tol
    emit({"max_residual": residual, "pass": ok, "samples": cfg.samples, "seed": cfg.seed}, cfg.format, out)
    return EXIT_OK if ok else EXIT_INVALID


def _cmd_sweep(cfg: CliConfig, out) -> int:
    records = sweep_family(cfg.grid, cfg.tol, cfg.workers)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            _write_sweep(records, cfg.format, fh)
    else:
        _write_sweep(records, cfg.format, out)
    return EXIT_OK


def _write_sweep(records, fmt, stream):
    if fmt == "json":
        emit([r.__dict__ for r in records], "json", stream)
    else:
        write_sweep_csv(records, stream)


HANDLERS = {
    "classify": _cmd_classify,
    "scales": _cmd_scales,
    "reconstruct": _cmd_reconstruct,
    "predict": _cmd_predict,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
}


def run(cfg: CliConfig, out=None, err=None) -> int:
    """Execute one command; the report goes to ``out`` and diagnostics to ``err``."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        return HANDLERS[cfg.command](cfg, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver error: {exc}", file=err)
        return EXIT_SOLVER
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
    except GgptError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ggptframes", description="Frames and primal equations for GGPT measurements.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, povm=True, xi=False):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if povm:
            p.add_argument("--povm", required=True, help="measurement JSON file")
            p.add_argument("--model", help="model descriptor such as quantum:2 or classical:3")
        if xi:
            p.add_argument("--xi", required=True, help="target measurement JSON file")

    def scales_opts(p):
        p.add_argument("--scales", help="comma-separated scales s_j")
        p.add_argument("--tight", action="store_true", help="use s_j = 1/sqrt(pi_j(m))")

    def probs_opts(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--probs", help="comma-separated probability vector")
        g.add_argument("--probs-file", help="file with a JSON list or whitespace-separated probabilities")

    common(sub.add_parser("classify", help="classify a measurement"))
    common(sub.add_parser("scales", help="find scales making the traceless frame tight"))

    p = sub.add_parser("reconstruct", help="reconstruct a state from statistics")
    common(p)
    scales_opts(p)
    probs_opts(p)

    p = sub.add_parser("predict", help="predict statistics of xi from those of the reference")
    common(p, xi=True)
    scales_opts(p)
    probs_opts(p)

    p = sub.add_parser("verify", help="check the primal equation on random states")
    common(p, xi=True)
    scales_opts(p)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sweep", help="classify the 3-parameter qubit family on a grid")
    common(p, povm=False)
    p.set_defaults(format="csv")
    p.add_argument("--grid", default="50x50x50")
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--workers", type=int, default=1)
    return parser


def config_from_args(ns: argparse.Namespace) -> CliConfig:
    vals = vars(ns)
    probs = vals.get("probs")
    scales = vals.get("scales")
    return CliConfig(
        command=ns.command,
        povm=vals.get("povm"),
        xi=vals.get("xi"),
        model=vals.get("model"),
        probs=None if probs is None else _parse_floats(probs, "--probs"),
        scales=None if scales is None else _parse_floats(scales, "--scales"),
        tight=vals.get("tight", False),
        samples=vals.get("samples", 100),
        seed=vals.get("seed", 0),
        tol=ns.tol,
        grid=vals.get("grid", "50x50x50"),
        out=vals.get("out"),
        workers=vals.get("workers", 1),
        format=ns.format,
        extra={"probs_file": vals.get("probs_file")},
    )


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
