"""Command-line front end.

Subcommands: ``sample``, ``exact-tv``, ``dobrushin-check``, ``mixing``,
``cw-analyze`` and ``bench``. Settings come from built-in defaults, then an
optional ``--config`` file (JSON, or a CSV written by this tool), then flags.
Every table starts with a ``#`` comment line holding the resolved config,
its hash, the seed and the package version, so a run can be repeated from
its own output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from . import bounds, exact
from . import curie_weiss as cw
from .config import LIMITS, THREADS_ENV
from .errors import (
    InvalidArgumentError,
    InvalidStateError,
    NotApplicableError,
    ParseError,
    PCAError,
    ResourceCapError,
)
from .model import CouplingModel, InertiaParameter, build_model
from .samplers import RngPolicy, estimate_coalescence, max_threads, run_chain

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_RESOURCE = 4
EXIT_IO = 5

# keys that never change the numbers in an output file
_VOLATILE = ("threads", "out", "summary", "config")


class UsageError(PCAError):
    pass


# -- provenance and emission -------------------------------------------------------


def version_string() -> str:
    """Package version, with the git commit appended when available."""
    here = Path(__file__).resolve().parent
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], cwd=here, capture_output=True,
            text=True, timeout=5, check=True,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"{__version__}+g{rev}" if rev else __version__


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance(config: dict) -> dict:
    kept = {k: v for k, v in config.items() if k not in _VOLATILE}
    return {
        "config": kept,
        "config_hash": config_hash(kept),
        "seed": config.get("seed"),
        "version": version_string(),
    }


def _cell(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def emit(records: Iterable[Sequence], sink, columns: Sequence[str], prov: dict,
         fmt: str = "csv") -> None:
    """Write a provenance line, a header naming every column, then the rows.

    ``sink`` is a path, ``"-"`` for stdout, or an open text stream.
    """
    if fmt not in ("csv", "jsonl"):
        raise InvalidArgumentError(f"unknown format {fmt!r}")
    if isinstance(sink, (str, Path)) and str(sink) != "-":
        path = Path(sink)
        try:
            with path.open("w", encoding="utf-8", newline="") as fh:
                _write(records, fh, columns, prov, fmt)
        except OSError as exc:
            raise OSError(f"{path}: {exc.strerror or exc}") from exc
        return
    _write(records, sys.stdout if str(sink) == "-" else sink, columns, prov, fmt)


def _write(records, fh, columns, prov, fmt):
    line = json.dumps(prov, sort_keys=True, separators=(",", ":"))
    if fmt == "csv":
        fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in records:
            writer.writerow([_cell(v) for v in row])
    else:
        fh.write(json.dumps({"provenance": prov, "columns": list(columns)}, sort_keys=True) + "\n")
        for row in records:
            fh.write(json.dumps(dict(zip(columns, (_cell(v) for v in row)))) + "\n")


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    """Inverse of :func:`emit` for CSV output: ``(provenance, columns, rows)``."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ParseError("missing provenance comment", 1, str(path))
        try:
            prov = json.loads(first[2:])
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad provenance line: {exc.msg}", 1, str(path))
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise ParseError("missing header row", 2, str(path))
        rows = list(reader)
    return prov, columns, rows


# -- argument parsing --------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, model: bool = True, inertia: bool = True,
                multi: bool = False):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON config file (or a CSV written by this tool)")
    if model:
        p.add_argument("--model", default=S, help="generator: lattice2d, power_law_1d, curie_weiss, random")
        p.add_argument("--param", action="append", default=S, metavar="KEY=VALUE",
                       help="generator parameter, repeatable")
        p.add_argument("--edge-list", dest="edge_list", default=S, help="model file with 'i j J_ij' lines")
    if inertia:
        g = p.add_mutually_exclusive_group()
        kind = _float_list if multi else float
        g.add_argument("--q", type=kind, default=S, help="self-coupling q >= 0")
        g.add_argument("--delta", type=kind, default=S, help="flip density delta = exp(-2q)")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--threads", type=int, default=S, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--out", default=S, help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "jsonl"), default=S)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcasampler", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    S = argparse.SUPPRESS

    p = sub.add_parser("sample", help="run a chain and write per-step statistics")
    _add_common(p)
    p.add_argument("--sampler", choices=("pca", "gibbs", "reflected-pca"), default=S)
    p.add_argument("--steps", type=int, default=S)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=S)
    p.add_argument("--no-energy", dest="energy", action="store_false", default=S)

    p = sub.add_parser("exact-tv", help="exact TV distance between the PCA and Gibbs measures")
    _add_common(p, multi=True)
    p.add_argument("--bound", choices=("exact", "analytic"), default=S)

    p = sub.add_parser("dobrushin-check", help="Dobrushin coefficients and derived bounds as JSON")
    _add_common(p, multi=True)
    p.add_argument("--mode", choices=("auto", "exhaustive", "bounded"), default=S)

    p = sub.add_parser("mixing", help="coalescence times of the monotone coupling")
    _add_common(p)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--max-steps", dest="max_steps", type=int, default=S)
    p.add_argument("--summary", default=S, help="JSON summary path (default: stderr)")

    p = sub.add_parser("cw-analyze", help="Curie-Weiss magnetization laws and predictions")
    _add_common(p, model=False)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--J", type=float, default=S)
    p.add_argument("--convention", choices=cw.CONVENTIONS, default=S)
    p.add_argument("--summary", default=S, help="JSON summary path (default: stderr)")

    p = sub.add_parser("bench", help="PCA throughput per thread count against single-site updates")
    _add_common(p)
    p.add_argument("--steps", type=int, default=S)
    p.add_argument("--thread-counts", dest="thread_counts", type=_int_list, default=S)
    p.add_argument("--gibbs-sweeps", dest="gibbs_sweeps", type=int, default=S)
    return parser


_DEFAULTS: dict[str, dict[str, Any]] = {
    "sample": {"sampler": "pca", "steps": 1000, "burn_in": 0, "seed": 0, "energy": True},
    "exact-tv": {"bound": "exact", "seed": 0},
    "dobrushin-check": {"mode": "auto", "seed": 0},
    "mixing": {"trials": 100, "max_steps": 100000, "seed": 0},
    "cw-analyze": {"convention": "half", "seed": 0},
    "bench": {"model": "lattice2d", "params": {"L": 1000, "J0": 0.1, "periodic": True},
              "steps": 20, "gibbs_sweeps": 1, "seed": 0},
}
_SHARED_DEFAULTS = {"out": "-", "format": "csv"}


def _parse_value(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _parse_params(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        out[key.strip()] = _parse_value(value.strip())
    return out


def _load_config_file(path: str) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{p}: {exc.strerror or exc}") from exc
    if text.startswith("# "):
        prov, _, _ = read_table(p)
        data = prov.get("config", {})
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, str(p))
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object", None, str(p))
    return data


def parse_config(argv: Sequence[str]) -> dict:
    """Resolve defaults, config file and flags into one dict; flags win."""
    parser = build_parser()
    ns = parser.parse_args(list(argv))
    if ns.command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("a subcommand is required")
    command = ns.command
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    if "param" in flags:
        flags["params"] = _parse_params(flags.pop("param"))

    sub = parser._subparsers._group_actions[0].choices[command]
    known = {a.dest for a in sub._actions if a.dest not in ("help", "param")}
    if "model" in known:
        known.add("params")
    known.add("command")
    derived = {"q_resolved", "delta_resolved"}

    file_cfg: dict = {}
    if "config" in flags:
        file_cfg = {k: v for k, v in _load_config_file(flags["config"]).items() if k not in derived}
        unknown = sorted(set(file_cfg) - known - {"config"})
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        if file_cfg.get("command", command) != command:
            raise UsageError(f"config was written for {file_cfg['command']!r}, not {command!r}")
        if "q" in flags or "delta" in flags:
            file_cfg.pop("q", None)
            file_cfg.pop("delta", None)
        if "model" in flags or "edge_list" in flags:
            for k in ("model", "edge_list", "params"):
                file_cfg.pop(k, None)

    cfg = {**_SHARED_DEFAULTS, **_DEFAULTS[command]}
    if ("model" in file_cfg or "edge_list" in file_cfg or "model" in flags
            or "edge_list" in flags):
        cfg.pop("model", None)
        cfg.pop("params", None)
    cfg.update(file_cfg)
    cfg.update(flags)
    cfg["command"] = command
    cfg.pop("config", None)
    if "threads" not in cfg:
        env = os.environ.get(THREADS_ENV)
        try:
            cfg["threads"] = int(env) if env else 1
        except ValueError:
            raise UsageError(f"${THREADS_ENV} must be an integer, got {env!r}")
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if "q" in cfg and "delta" in cfg and cfg["q"] is not None and cfg["delta"] is not None:
        raise UsageError("give either --q or --delta, not both")
    if cfg["threads"] < 1:
        raise UsageError("threads must be >= 1")
    for key in ("steps", "burn_in", "trials", "max_steps", "gibbs_sweeps"):
        if key in cfg and cfg[key] < 0:
            raise UsageError(f"{key} must be >= 0")
    command = cfg["command"]
    if command in ("sample", "exact-tv", "dobrushin-check", "mixing", "bench"):
        has_model = cfg.get("model") is not None
        has_file = cfg.get("edge_list") is not None
        if has_model == has_file:
            raise UsageError("give exactly one model source: --model or --edge-list")
    if command in ("sample", "exact-tv", "dobrushin-check", "mixing", "bench", "cw-analyze"):
        if command == "sample" and cfg.get("sampler") == "gibbs":
            return
        if cfg.get("q") is None and cfg.get("delta") is None:
            raise UsageError("one of --q or --delta is required")
    if command == "cw-analyze":
        for key in ("n", "J"):
            if cfg.get(key) is None:
                raise UsageError(f"--{key} is required")


def _model(cfg: dict) -> CouplingModel:
    if cfg.get("edge_list") is not None:
        return build_model("edge_list", path=cfg["edge_list"])
    try:
        return build_model(cfg["model"], **cfg.get("params", {}))
    except TypeError as exc:
        raise UsageError(f"bad parameters for model {cfg['model']!r}: {exc}")


def _inertia(cfg: dict) -> list[float]:
    """Resolved ``q`` values; records both ``q`` and ``delta`` in ``cfg``."""
    if cfg.get("q") is not None:
        qs = cfg["q"] if isinstance(cfg["q"], list) else [cfg["q"]]
        qs = [InertiaParameter(float(q)).q for q in qs]
    else:
        ds = cfg["delta"] if isinstance(cfg["delta"], list) else [cfg["delta"]]
        qs = [InertiaParameter.from_delta(float(d)).q for d in ds]
    if not qs:
        raise UsageError("empty q/delta list")
    return qs


def _json_num(x: float):
    return x if math.isfinite(x) else None


def _record_inertia(cfg: dict, qs: list[float]) -> None:
    single = not isinstance(cfg.get("q", cfg.get("delta")), list)
    delta = [math.exp(-2 * q) for q in qs]
    qv = [_json_num(q) for q in qs]
    cfg["q_resolved"] = qv[0] if single else qv
    cfg["delta_resolved"] = delta[0] if single else delta


def _single_q(cfg: dict) -> float:
    qs = _inertia(cfg)
    if len(qs) != 1:
        raise UsageError(f"{cfg['command']} takes a single q/delta value")
    _record_inertia(cfg, qs)
    return qs[0]


def _write_json(obj: dict, target) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if target is None:
        sys.stderr.write(text)
    elif str(target) == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(target).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"{target}: {exc.strerror or exc}") from exc


# -- subcommands ---------------------------------------------------------------------


def cmd_sample(cfg: dict) -> int:
    model = _model(cfg)
    q = math.inf if cfg["sampler"] == "gibbs" and cfg.get("q") is None and cfg.get("delta") is None \
        else _single_q(cfg)
    if cfg["burn_in"] > cfg["steps"]:
        raise UsageError("burn-in exceeds steps")
    stats = run_chain(model, cfg["sampler"], q, cfg["steps"], cfg["burn_in"],
                      RngPolicy(cfg["seed"]), threads=cfg["threads"],
                      record_energy=cfg["energy"])
    emit(stats.rows(), cfg["out"], stats.COLUMNS, provenance(cfg), cfg["format"])
    return EXIT_OK


def cmd_exact_tv(cfg: dict) -> int:
    model = _model(cfg)
    if model.n > LIMITS.max_vector_sites:
        raise ResourceCapError(f"exact-tv enumerates 2^n states; n={model.n} exceeds "
                               f"{LIMITS.max_vector_sites}")
    qs = _inertia(cfg)
    _record_inertia(cfg, qs)
    gibbs = exact.enumerate_gibbs(model)
    rows = []
    for q in qs:
        tv = exact.tv_distance(exact.enumerate_pca(model, q), gibbs)
        ratio = exact.delta_ratio(model, q)
        try:
            ub = bounds.tv_upper_bound(model, q, cfg["bound"])
        except NotApplicableError:
            ub = math.nan
        rows.append((model.n, q, math.exp(-2 * q), tv, ratio, ub))
    emit(rows, cfg["out"], ("n", "q", "delta", "tv", "delta_ratio", "tv_upper_bound"),
         provenance(cfg), cfg["format"])
    return EXIT_OK


def cmd_dobrushin(cfg: dict) -> int:
    model = _model(cfg)
    qs = _inertia(cfg)
    _record_inertia(cfg, qs)
    coupling = bounds.dobrushin_condition(model)
    entries = []
    for q in qs:
        entry: dict[str, Any] = {"q": _json_num(q), "delta": math.exp(-2 * q)}
        for meas in ("pca", "tilde"):
            entry[meas] = bounds.pca_gamma_bound(model, q, meas, cfg["mode"]).summary()
        try:
            entry["variance_bound"] = bounds.variance_certificate(model, q, cfg["mode"]).summary()
        except NotApplicableError as exc:
            entry["variance_bound"] = {"value": None, "reason": str(exc)}
        tv: dict[str, Any] = {}
        if model.n <= LIMITS.max_vector_sites:
            tv["exact"] = bounds.tv_upper_bound(model, q, "exact")
        try:
            tv["analytic"] = _json_num(bounds.tv_upper_bound(model, q, "analytic"))
        except NotApplicableError as exc:
            tv["analytic"] = None
            tv["analytic_reason"] = str(exc)
        entry["tv_bound"] = tv
        entries.append(entry)
    report = {
        "provenance": provenance(cfg),
        "model": {"name": model.name, "n": model.n, "J": model.sup_norm,
                  "ferromagnetic": model.is_ferromagnetic},
        "gibbs": coupling.summary(),
        "satisfied": bool(coupling.satisfied and all(
            e["pca"]["satisfied"] and e["tilde"]["satisfied"] for e in entries)),
        "inertia": entries,
    }
    _write_json(report, cfg["out"])
    return EXIT_OK


def cmd_mixing(cfg: dict) -> int:
    model = _model(cfg)
    q = _single_q(cfg)
    rep = estimate_coalescence(model, q, cfg["max_steps"], cfg["trials"], RngPolicy(cfg["seed"]),
                               threads=cfg["threads"])
    rows = ((k, int(t), int(t < 0)) for k, t in enumerate(rep.taus))
    emit(rows, cfg["out"], ("trial", "tau_c", "censored"), provenance(cfg), cfg["format"])
    ts, surv = rep.survival()
    bound = rep.tail_bound(ts)
    try:
        predicted = cw.mixing_prediction(model.n, rep.bound_J, rep.delta)
    except NotApplicableError:
        predicted = None
    summary = {
        "provenance": provenance(cfg),
        "trials": int(rep.taus.size),
        "censored": rep.censored,
        "median": _json_num(rep.median),
        "quantiles": {str(k): _json_num(v) for k, v in rep.quantiles().items()},
        "bound_J": rep.bound_J,
        "predicted_mixing_time": predicted,
        "tail_violations": rep.tail_violations() if bound is not None else None,
        "warnings": rep.warnings,
    }
    _write_json(summary, cfg.get("summary"))
    return EXIT_OK


def cmd_cw(cfg: dict) -> int:
    q = _single_q(cfg)
    spec = cw.CWSpec(cfg["n"], cfg["J"], cfg["convention"], math.exp(-2 * q))
    laws = {m: cw.magnetization_law(spec, m) for m in ("gibbs", "pca", "tilde")}
    g = laws["gibbs"]
    rows = zip(g.ups, g.support, laws["gibbs"].probs, laws["pca"].probs, laws["tilde"].probs)
    emit(rows, cfg["out"], ("k", "m", "p_gibbs", "p_pca", "p_tilde"), provenance(cfg), cfg["format"])
    ratio = cw.delta_ratio_cw(spec)
    Jeff = spec.effective_J
    summary: dict[str, Any] = {
        "provenance": provenance(cfg),
        "effective_J": Jeff,
        "m_star": cw.solve_mstar(Jeff),
        "m_bar": cw.solve_mbar(Jeff, spec.delta),
        "delta_ratio": ratio.value,
        "delta_ratio_prediction": ratio.prediction,
        "tv_upper_bound": math.sqrt(ratio.value),
        "tv": 0.5 * float(np.abs(laws["pca"].probs - g.probs).sum()),
    }
    try:
        summary["contraction_prediction"] = cw.contraction_prediction(spec.J, spec.delta)
        summary["mixing_prediction"] = cw.mixing_prediction(spec.n, spec.J, spec.delta)
    except NotApplicableError as exc:
        summary["contraction_prediction"] = summary["mixing_prediction"] = None
        summary["prediction_reason"] = str(exc)
    try:
        gc = cw.gaussian_approx_check(spec)
        summary["gaussian"] = {
            "gibbs_variance": gc.gibbs_variance, "gibbs_target": gc.gibbs_target,
            "gibbs_error": gc.gibbs_error, "pca_variance": gc.pca_variance,
            "pca_target": gc.pca_target, "pca_error": gc.pca_error,
            "pca_target_corrected": gc.pca_target_corrected,
            "pca_error_corrected": gc.pca_error_corrected,
        }
    except NotApplicableError:
        summary["gaussian"] = None
    _write_json(summary, cfg.get("summary"))
    return EXIT_OK


def cmd_bench(cfg: dict) -> int:
    model = _model(cfg)
    q = _single_q(cfg)
    counts = cfg.get("thread_counts") or sorted({1, 2, max_threads()})
    if any(t < 1 for t in counts):
        raise UsageError("thread counts must be >= 1")
    rng = RngPolicy(cfg["seed"])
    steps = cfg["steps"]
    rows = []
    finals = []
    for t in counts:
        run_chain(model, "pca", q, 1, 0, rng, threads=t, record_energy=False)  # compile / warm up
        start = time.perf_counter()
        stats = run_chain(model, "pca", q, steps, 0, rng, threads=t, record_energy=False)
        secs = time.perf_counter() - start
        finals.append(stats.final)
        updates = steps * model.n
        rows.append(("pca", t, steps, secs, updates / secs if secs else math.inf,
                     float(stats.flips.sum()) / secs if secs else math.inf))
    gsteps = cfg["gibbs_sweeps"] * model.n
    if gsteps:
        run_chain(model, "gibbs", q, 1, 0, rng, record_energy=False)
        start = time.perf_counter()
        stats = run_chain(model, "gibbs", q, gsteps, 0, rng, record_energy=False)
        secs = time.perf_counter() - start
        rows.append(("gibbs", 1, gsteps, secs, gsteps / secs if secs else math.inf,
                     float(stats.flips.sum()) / secs if secs else math.inf))
    identical = all(np.array_equal(finals[0], f) for f in finals[1:])
    prov = provenance(cfg)
    prov["deterministic_across_threads"] = identical
    emit(rows, cfg["out"], ("sampler", "threads", "steps", "seconds", "site_updates_per_second",
                            "flips_per_second"), prov, cfg["format"])
    if not identical:
        sys.stderr.write("warning: final states differ across thread counts\n")
        return EXIT_ERROR
    return EXIT_OK


_COMMANDS = {
    "sample": cmd_sample,
    "exact-tv": cmd_exact_tv,
    "dobrushin-check": cmd_dobrushin,
    "mixing": cmd_mixing,
    "cw-analyze": cmd_cw,
    "bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        return _COMMANDS[cfg["command"]](cfg)
    except SystemExit as exc:  # argparse
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except ResourceCapError as exc:
        sys.stderr.write(f"resource cap: {exc}\n")
        return EXIT_RESOURCE
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    except (InvalidArgumentError, InvalidStateError) as exc:
        sys.stderr.write(f"invalid argument: {exc}\n")
        return EXIT_USAGE
    except PCAError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
