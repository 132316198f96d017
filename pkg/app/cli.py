"""
Batch front end: python -m app.cli <subcommand> --config run.json --out results/

Every subcommand evaluates its operation over the Cartesian grid of the
config's `sweeps` (row-major) and writes plot-ready CSV or JSON with the
full config echoed. Exit codes: 0 ok, 2 config/ingestion error, 3 every
grid point failed.
"""

import argparse
import itertools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.config import Settings, settings
from app.exceptions import ConfigError, FennecError, IngestionError
from app.schemas import CircuitModel, JunctionModel, QuantumModel, SeriesModel, SweepSpec
from app.services.gyrator_service import gyrator_service
from app.services.junction_service import junction_service
from app.services.nonlinear_service import nonlinear_service
from app.services.payload import jsonable
from app.services.quantum_service import quantum_service

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "junction-energy",
    "estimate-coupling",
    "gyrator-sweep",
    "bandwidth",
    "compression",
    "disorder-tolerance",
    "mixing",
    "circulator",
    "lindblad",
    "nonlinear-report",
)


class OutputModel(BaseModel):
    format: Literal["csv", "json"] = "csv"
    dir: Optional[str] = None


class CirculatorModel(BaseModel):
    z_tl: float = 50.0
    r: float
    z0: float
    omega0: float


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    subcommand: Optional[Literal[SUBCOMMANDS]] = None
    sweeps: List[SweepSpec] = Field(default_factory=list)
    output: OutputModel = Field(default_factory=OutputModel)
    settings: Dict[str, Any] = Field(default_factory=dict)

    junction: Optional[JunctionModel] = None
    flux: SweepSpec = SweepSpec(parameter="flux", start=-0.5, stop=0.5, count=201)
    voltage: float = 0.0

    data: Optional[str] = None
    metadata: Optional[Dict[str, Any]] = None
    points: int = Field(default=201, ge=3)

    circuit: Optional[CircuitModel] = None
    omega: SweepSpec = SweepSpec(parameter="omega", start=0.5, stop=1.5, count=1001)
    model: Literal["direct", "pauli"] = "direct"
    photon_numbers: SweepSpec = SweepSpec(parameter="photon_numbers", start=1e-3, stop=1e3, count=241, scale="log")
    db: float = 1.0
    error_budget: float = 0.01
    fields: Optional[List[str]] = None
    norm: Optional[Literal["max", "fro"]] = None
    drive: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None
    arms: Optional[Tuple[float, float]] = None
    line_capacitance: Optional[float] = None

    circulator: Optional[CirculatorModel] = None
    quantum: Optional[QuantumModel] = None

    series: Optional[SeriesModel] = None
    capacitance: Optional[List[List[float]]] = None
    impedances: Optional[Tuple[float, float]] = None
    energy_unit: str = "GHz"


REQUIRED = {
    "junction-energy": ("junction",),
    "estimate-coupling": ("data",),
    "gyrator-sweep": ("circuit",),
    "bandwidth": ("circuit",),
    "compression": ("circuit",),
    "disorder-tolerance": ("circuit",),
    "mixing": ("circuit", "drive"),
    "circulator": ("circulator",),
    "lindblad": ("quantum",),
    "nonlinear-report": ("series", "capacitance", "impedances"),
}


# -------------------------------------------------------------------- runners

Outcome = Tuple[pd.DataFrame, Dict]


def _junction_energy(cfg: RunConfig) -> Outcome:
    payload = junction_service.junction_energy(cfg.junction.build(), cfg.flux.values(), cfg.voltage)["data"]
    frame = pd.DataFrame({"flux": payload["flux"], "abs_energy": payload["abs_energy"]})
    if "large_transmission" in payload:
        frame["large_transmission"] = payload["large_transmission"]
    return frame, payload


def _estimate_coupling(cfg: RunConfig) -> Outcome:
    payload = junction_service.estimate_coupling(cfg.data, cfg.metadata, cfg.points)["data"]
    frame = pd.DataFrame({k: payload[k] for k in ("voltage", "E_J", "E_J_prime", "G_max", "G_max_times_RQ")})
    frame["is_best"] = frame["voltage"] == payload["best"]["V0"]
    return frame, payload


def _gyrator_sweep(cfg: RunConfig) -> Outcome:
    result = gyrator_service.scattering_sweep(cfg.circuit.build(), cfg.omega.values(), cfg.model)
    return result.to_frame(), jsonable(result.to_json())


def _bandwidth(cfg: RunConfig) -> Outcome:
    payload = gyrator_service.bandwidth(cfg.circuit.build())["data"]
    row = {k: payload[k] for k in ("omega0", "omega_minus", "omega_plus", "delta", "central_frequency", "G0")}
    row.update({f"estimate_{k}": v for k, v in payload["estimates"].items()})
    return pd.DataFrame([row]), payload


def _compression(cfg: RunConfig) -> Outcome:
    grid = np.concatenate([[0.0], cfg.photon_numbers.values()])
    payload = gyrator_service.compression(cfg.circuit.build(), grid, cfg.db)["data"]
    transmission = np.asarray(payload["transmission"], dtype=float)
    frame = pd.DataFrame({
        "N": payload["photon_numbers"],
        "G": payload["conductance"],
        "|S12|": transmission,
        "|S12|_dB": 20.0 * np.log10(transmission),
    })
    frame["N_1dB"] = payload["n_1db"]
    frame["N_max_reference"] = payload["reference"]
    return frame, payload


def _disorder_tolerance(cfg: RunConfig) -> Outcome:
    payload = gyrator_service.disorder_tolerance(cfg.circuit.build(), cfg.error_budget, cfg.fields, cfg.norm)["data"]
    frame = pd.DataFrame({
        "parameter": list(payload["tolerance"]),
        "tolerance": list(payload["tolerance"].values()),
    })
    frame["error_budget"] = cfg.error_budget
    return frame, payload


def _mixing(cfg: RunConfig) -> Outcome:
    drive = [complex(re, im) for re, im in cfg.drive]
    payload = gyrator_service.mixing(cfg.circuit.build(), drive, cfg.arms, cfg.line_capacitance)["data"]
    rows = []
    for key, block in payload["blocks"].items():
        target, source = key.split("<-")
        for i in range(2):
            for j in range(2):
                re, im = block[i][j]
                rows.append({"target": int(target), "source": int(source), "i": i + 1, "j": j + 1, "re": re, "im": im})
    return pd.DataFrame(rows), payload


def _circulator(cfg: RunConfig) -> Outcome:
    c = cfg.circulator
    result = gyrator_service.circulator_sweep(c.z_tl, c.r, c.z0, c.omega0, cfg.omega.values())
    return result.to_frame(), jsonable(result.to_json())


def _lindblad(cfg: RunConfig) -> Outcome:
    payload = quantum_service.simulate(cfg.quantum.build(), cfg.quantum.substeps)["data"]
    rows = []
    for i in range(2):
        for j in range(2):
            re, im = payload["S"][i][j]
            row = {"i": i + 1, "j": j + 1, "re": re, "im": im, "abs": float(np.hypot(re, im))}
            if "network_S" in payload:
                row["network_re"], row["network_im"] = payload["network_S"][i][j]
            row["photons_1"], row["photons_2"] = payload["photon_numbers"][j]
            rows.append(row)
    return pd.DataFrame(rows), payload


def _nonlinear_report(cfg: RunConfig) -> Outcome:
    s = cfg.series
    coefficients = nonlinear_service.coefficients(s.table(settings.series_m_max), s.gaps, s.n_max, s.m_max, s.energy_unit)
    payload = nonlinear_service.report(coefficients, cfg.capacitance, cfg.impedances, cfg.energy_unit)["data"]
    columns = ["kind", "mode", "n", "ell", "coefficient", "left", "right", "margin", "satisfied"]
    return pd.DataFrame(payload["report"]["terms"], columns=columns), payload


RUNNERS: Dict[str, Callable[[RunConfig], Outcome]] = {
    "junction-energy": _junction_energy,
    "estimate-coupling": _estimate_coupling,
    "gyrator-sweep": _gyrator_sweep,
    "bandwidth": _bandwidth,
    "compression": _compression,
    "disorder-tolerance": _disorder_tolerance,
    "mixing": _mixing,
    "circulator": _circulator,
    "lindblad": _lindblad,
    "nonlinear-report": _nonlinear_report,
}


# ---------------------------------------------------------------- config/grid

def _config_error(e: ValidationError) -> ConfigError:
    first = e.errors()[0]
    field = ".".join(str(p) for p in first["loc"])
    return ConfigError(f"{field}: {first['msg']}", field=field)


def load_config(path: Optional[str], subcommand: str) -> RunConfig:
    doc: Dict[str, Any] = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}", field="config")
    if doc.get("subcommand") not in (None, subcommand):
        raise ConfigError(f"config is for '{doc['subcommand']}', not '{subcommand}'", field="subcommand")
    try:
        cfg = RunConfig.model_validate(doc)
    except ValidationError as e:
        raise _config_error(e)
    for name in REQUIRED[subcommand]:
        if getattr(cfg, name) is None:
            raise ConfigError(f"'{subcommand}' needs a '{name}' block", field=name)
    unknown = sorted(set(cfg.settings) - set(Settings.model_fields))
    if unknown:
        raise ConfigError(f"unknown settings {unknown}", field="settings")
    try:
        Settings(**cfg.settings)
    except ValidationError as e:
        raise _config_error(e)
    return cfg


def _check_path(cfg: RunConfig, path: str) -> None:
    obj: Any = cfg
    for part in path.split("."):
        if not isinstance(obj, BaseModel) or part not in type(obj).model_fields:
            raise ConfigError(f"sweep parameter '{path}' does not exist", field=path)
        obj = getattr(obj, part)
    if obj is not None and not isinstance(obj, (int, float)):
        raise ConfigError(f"sweep parameter '{path}' is not a scalar", field=path)


def _set_path(doc: Dict, path: str, value: float) -> None:
    *head, last = path.split(".")
    for part in head:
        doc = doc[part]
    doc[last] = float(value)


def expand_grid(cfg: RunConfig) -> List[Tuple[Dict[str, float], RunConfig]]:
    """Row-major Cartesian product of the sweeps, one validated config per point"""
    for s in cfg.sweeps:
        _check_path(cfg, s.parameter)
    base = cfg.model_dump()
    names = [s.parameter for s in cfg.sweeps]
    points = []
    for values in itertools.product(*(s.values() for s in cfg.sweeps)):
        doc = json.loads(json.dumps(base))
        for name, value in zip(names, values):
            _set_path(doc, name, value)
        doc["sweeps"] = []
        try:
            points.append((dict(zip(names, map(float, values))), RunConfig.model_validate(doc)))
        except ValidationError as e:
            raise _config_error(e)
    return points


def evaluate_point(subcommand: str, cfg: RunConfig, overrides: Dict[str, Any]) -> Dict:
    """One grid point; runs inside a worker so the settings overrides are applied there"""
    saved = {key: getattr(settings, key) for key in overrides}
    for key, value in overrides.items():
        setattr(settings, key, value)
    try:
        frame, payload = RUNNERS[subcommand](cfg)
        return {"ok": True, "frame": frame, "payload": jsonable(payload)}
    except (ConfigError, IngestionError):
        raise
    except FennecError as e:
        return {"ok": False, "error": {"error": type(e).__name__, "message": str(e),
                                       "bracket": jsonable(getattr(e, "bracket", None))}}
    finally:
        for key, value in saved.items():
            setattr(settings, key, value)


# --------------------------------------------------------------------- output

def _write_csv(path: Path, frame: pd.DataFrame, header: Dict) -> None:
    digits = settings.csv_significant_digits
    with path.open("w", newline="") as fh:
        fh.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
        frame.to_csv(fh, index=False, float_format=f"%.{digits}g", lineterminator="\n")


def write_outputs(subcommand: str, cfg: RunConfig, points: List[Tuple[Dict[str, float], RunConfig]],
                  results: List[Dict], out_dir: Path, fmt: str) -> List[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = cfg.model_dump(mode="json")
    written: List[Path] = []
    if fmt == "json":
        doc = {
            "config": echo,
            "points": [
                {"parameters": params, **({"result": r["payload"]} if r["ok"] else {"error": r["error"]})}
                for (params, _), r in zip(points, results)
            ],
        }
        path = out_dir / f"{subcommand}.json"
        path.write_text(json.dumps(doc, sort_keys=True, indent=2))
        return [path]

    if subcommand == "gyrator-sweep":
        for k, ((params, _), r) in enumerate(zip(points, results)):
            if not r["ok"]:
                continue
            path = out_dir / (f"{subcommand}_{k:03d}.csv" if len(points) > 1 else f"{subcommand}.csv")
            _write_csv(path, r["frame"], {**echo, "point": params})
            written.append(path)
    else:
        frames = []
        for params, r in ((p, r) for (p, _), r in zip(points, results)):
            if r["ok"]:
                frame = r["frame"].copy()
                for i, (name, value) in enumerate(params.items()):
                    frame.insert(i, name, value)
                frames.append(frame)
        if frames:
            path = out_dir / f"{subcommand}.csv"
            _write_csv(path, pd.concat(frames, ignore_index=True), echo)
            written.append(path)

    errors = [{"parameters": p, **r["error"]} for (p, _), r in zip(points, results) if not r["ok"]]
    if errors:
        path = out_dir / f"{subcommand}.errors.json"
        path.write_text(json.dumps(errors, sort_keys=True, indent=2))
        written.append(path)
    return written


# ----------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fennec", description="FENNEC gyrator and circulator toolkit")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="run config JSON")
    parser.add_argument("--out", help="output directory (default: config output.dir or .)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for sweep points")
    parser.add_argument("--verbose", action="store_true")
    return parser


def run(subcommand: str, config_path: Optional[str] = None, out: Optional[str] = None,
        fmt: Optional[str] = None, jobs: Optional[int] = None) -> int:
    try:
        cfg = load_config(config_path, subcommand)
        points = expand_grid(cfg) if cfg.sweeps else [({}, cfg)]
        n_jobs = jobs or settings.cli_jobs
        if n_jobs == 1 or len(points) == 1:
            results = [evaluate_point(subcommand, p, cfg.settings) for _, p in points]
        else:
            results = Parallel(n_jobs=n_jobs)(delayed(evaluate_point)(subcommand, p, cfg.settings) for _, p in points)
    except (ConfigError, IngestionError) as e:
        record = {"error": type(e).__name__, "message": str(e), "field": getattr(e, "field", None)}
        print(json.dumps(record), file=sys.stderr)
        return 2

    out_dir = Path(out or cfg.output.dir or ".")
    written = write_outputs(subcommand, cfg, points, results, out_dir, fmt or cfg.output.format)
    failed = sum(not r["ok"] for r in results)
    for path in written:
        logger.info("wrote %s", path)
    if failed == len(results):
        print(json.dumps({"error": "AllPointsFailed", "message": f"all {failed} grid points failed"}), file=sys.stderr)
        return 3
    if failed:
        logger.warning("%d of %d grid points failed", failed, len(results))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return run(args.subcommand, args.config, args.out, args.format, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
