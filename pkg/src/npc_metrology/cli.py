"""Command-line front end.

Commands: ``scenario``, ``sweep``, ``spectrum`` and ``bound``. Each takes an
optional JSON ``--config`` file, ``--out`` directory and ``--threads`` count.
Individual keys can be overridden with repeated ``--set key=value`` flags;
precedence is built-in defaults < config file < ``--set``.

Every CSV written is paired with a ``<name>.manifest.json`` sidecar.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalError
from .models import SpinModel
from .scenarios import (
    Axis,
    SweepSpec,
    bound_table,
    scenario_1,
    scenario_2,
    scenario_3,
    spectrum_summary,
    sweep,
)

log = logging.getLogger("npc_metrology")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(Exception):
    pass


SCENARIO_DEFAULTS = {
    1: {"B": 0.1, "beta": math.pi / 3, "gamma": 0.05, "t_points": 400, "t_max": None,
        "method": "qubit_closed"},
    2: {"B": 0.1, "alpha": math.pi / 4, "gammas": [0.02, 0.05, 0.1, 0.2], "t_points": 400,
        "t_max": None, "grid_gamma": 0.05, "alpha_points": 61, "gamma_t_max": 6.0,
        "gamma_t_points": 121, "method": "sld"},
    3: {"B": 0.1, "vartheta": math.pi / 3, "alpha": math.pi / 4, "beta": math.pi / 3,
        "gamma": 0.03, "t_points": 400, "t_max": None, "surface_vartheta": math.pi / 4,
        "alpha_points": 19, "beta_points": 19, "method": "sld"},
}
MODEL_DEFAULTS = {"N": 1, "B": 0.1, "vartheta": math.pi / 2, "alpha": math.pi / 2, "gamma": 0.0}


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {pair!r} is not of the form key=value")
        out[key.strip()] = _parse_value(value)
    return out


def _merge(defaults: dict, *layers: dict) -> dict:
    merged = dict(defaults)
    for layer in layers:
        unknown = sorted(set(layer) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown option(s): {', '.join(unknown)}")
        merged.update(layer)
    return merged


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_table(out_dir: Path, name: str, header, rows, manifest: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    side = dict(manifest)
    side["output"] = path.name
    side["rows"] = len(rows)
    with open(out_dir / f"{name}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(side, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _manifest(command: str, config: dict, started: str, grids=None, warnings=None, **extra) -> dict:
    return {
        "command": command,
        "config": config,
        "code_version": __version__,
        "started": started,
        "finished": _now(),
        "grids": grids or {},
        "warnings": warnings or [],
        **extra,
    }


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _model(cfg: dict) -> SpinModel:
    try:
        return SpinModel(int(cfg["N"]), float(cfg["B"]), float(cfg["vartheta"]),
                         float(cfg["alpha"]), float(cfg["gamma"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# commands ---------------------------------------------------------------


def cmd_scenario(args) -> int:
    started = _now()
    sid = args.id
    cfg = _merge(SCENARIO_DEFAULTS[sid], _load_config(args.config), _overrides(args.set))
    t_max = cfg["t_max"] if cfg["t_max"] is not None else 10.0 / cfg["B"]
    times = np.linspace(0.0, float(t_max), int(cfg["t_points"]))
    grids = {"time": [0.0, float(t_max), int(cfg["t_points"])]}
    notes = []
    try:
        if sid == 1:
            tables = scenario_1(cfg["B"], cfg["beta"], cfg["gamma"], times, cfg["method"], args.threads)
        elif sid == 2:
            alphas = np.linspace(0.0, math.pi, int(cfg["alpha_points"]))
            gts = np.linspace(0.0, float(cfg["gamma_t_max"]), int(cfg["gamma_t_points"]))
            grids.update(alpha=[0.0, math.pi, len(alphas)], gamma_t=[0.0, cfg["gamma_t_max"], len(gts)])
            notes.append("decay-rate list for the F_B curves is a default choice")
            tables = scenario_2(cfg["B"], cfg["alpha"], tuple(cfg["gammas"]), times, cfg["grid_gamma"],
                                alphas, gts, cfg["method"], args.threads)
        else:
            alphas = np.linspace(0.0, math.pi / 2, int(cfg["alpha_points"]))
            betas = np.linspace(0.0, math.pi, int(cfg["beta_points"]))
            grids.update(alpha=[0.0, math.pi / 2, len(alphas)], beta=[0.0, math.pi, len(betas)])
            tables = scenario_3(cfg["B"], cfg["vartheta"], cfg["alpha"], cfg["beta"], cfg["gamma"],
                                times, cfg["surface_vartheta"], alphas, betas, cfg["method"],
                                args.threads)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    for name, (header, rows) in tables.items():
        write_table(Path(args.out), name, header, rows,
                    _manifest(f"scenario {sid}", cfg, started, grids, notes))
    return EXIT_OK


def _sweep_spec(cfg: dict) -> SweepSpec:
    try:
        model = _model({**MODEL_DEFAULTS, **cfg.get("model", {})})
        vary = tuple(Axis(a["axis"], float(a["start"]), float(a["stop"]), int(a["points"]))
                     for a in cfg.get("vary", []))
        return SweepSpec(model=model, beta=float(cfg.get("beta", math.pi / 2)),
                         state=cfg.get("state", "product"), t=float(cfg.get("t", 10.0)),
                         vary=vary, parameter=cfg.get("parameter", "B"),
                         qfi_method=cfg.get("qfi_method", "sld"),
                         output=cfg.get("output", "sweep.csv"))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid sweep specification: {exc}") from exc


SWEEP_KEYS = {"model", "vary", "beta", "state", "t", "parameter", "qfi_method", "output"}


def _apply_sweep_overrides(cfg: dict, overrides: dict) -> dict:
    cfg = json.loads(json.dumps(cfg))
    for key, value in overrides.items():
        head, _, tail = key.partition(".")
        if head == "model" and tail in MODEL_DEFAULTS:
            cfg.setdefault("model", {})[tail] = value
        elif head in SWEEP_KEYS and not tail:
            cfg[head] = value
        else:
            raise ConfigError(f"unknown option: {key}")
    return cfg


def cmd_sweep(args) -> int:
    started = _now()
    cfg = _apply_sweep_overrides(_load_config(args.config), _overrides(args.set))
    unknown = sorted(set(cfg) - SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"unknown option(s): {', '.join(unknown)}")
    spec = _sweep_spec(cfg)
    header, rows = sweep(spec, args.threads)
    out = Path(args.out)
    name = Path(spec.output).stem
    grids = {a.name: [a.start, a.stop, a.points] for a in spec.vary}
    try:
        write_table(out, name, header, rows, _manifest("sweep", cfg, started, grids))
    except OSError as exc:
        raise ConfigError(f"cannot write output: {exc}") from exc
    return EXIT_OK


def cmd_spectrum(args) -> int:
    started = _now()
    cfg = _merge(MODEL_DEFAULTS, _load_config(args.config), _overrides(args.set))
    tables, summary = spectrum_summary(_model(cfg))
    for name, (header, rows) in tables.items():
        write_table(Path(args.out), name, header, rows,
                    _manifest("spectrum", cfg, started, summary=summary))
    return EXIT_OK


BOUND_DEFAULTS = {**MODEL_DEFAULTS, "parameter": "vartheta", "t_max": None, "t_points": 400,
                  "method": "sld"}


def cmd_bound(args) -> int:
    started = _now()
    cfg = _merge(BOUND_DEFAULTS, _load_config(args.config), _overrides(args.set))
    model = _model(cfg)
    t_max = cfg["t_max"] if cfg["t_max"] is not None else 10.0 / model.B
    times = np.linspace(0.0, float(t_max), int(cfg["t_points"]))
    try:
        header, rows, ceiling = bound_table(model, cfg["parameter"], times, cfg["method"], args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    warnings = []
    if any(r[-1] for r in rows):
        warnings.append("sampled QFI exceeds the seminorm bound at some times")
    write_table(Path(args.out), "bound", header, rows,
                _manifest("bound", cfg, started, {"time": [0.0, float(t_max), len(times)]},
                          warnings, summary={"noiseless_ceiling": ceiling}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npc-metrology", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")

    p = sub.add_parser("scenario", help="reproduce one of the three spin scenarios")
    p.add_argument("id", type=int, choices=(1, 2, 3))
    common(p)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("sweep", help="QFI over a parameter grid")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="Liouvillian spectrum, steady states and relaxation time")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bound", help="channel QFI against its seminorm bound")
    common(p)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
