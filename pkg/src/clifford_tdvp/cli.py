"""Command-line runner.

Verbs
-----
run CONFIG --out DIR
    One evolution; writes ``trajectory.csv``, ``cooling.jsonl``,
    ``manifest.json`` and, with ``oracle_compare``, ``exact.csv`` and
    ``error.csv``.
sweep CONFIG --over KEY=V1,V2,... --out DIR
    One ``run`` per value in its own subdirectory plus ``summary.csv``.
    Worker processes: ``$CTDVP_WORKERS`` (default 1).
compare A.csv B.csv --out error.csv
    Integrated error between two trajectory (or exact) files.
enumerate-cliffords [--out FILE]
    The 720 positive-sign two-qubit tableaux as JSON lines.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dressed import EvolutionConfig, ObservableSpec, integrated_error, run_dressed_evolution
from .disentangler import RNG_ALGORITHM
from .oracle import MAX_QUBITS, basis_state, exact_evolve, exact_expect
from .pauli import ModelParams, build_model_hamiltonian
from .tableau import synthesize_circuit, two_qubit_candidates
from .tdvp import KrylovParams

logger = logging.getLogger("clifford_tdvp")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
SCHEMA_VERSION = 1
WORKERS_ENV = "CTDVP_WORKERS"

MODELS = {
    "ising_critical": ModelParams(j1x=1.0, h=-1.0),
    "xx": ModelParams(j1x=1.0, j1y=1.0),
    "nnn_ising": ModelParams(j1x=1.0, j2x=1.0, h=-1.0),
}
DEFAULTS = {
    "chi_max": 128,
    "svd_cutoff": 0.0,
    "dt": 0.05,
    "t_final": 8.0,
    "cool_every": 10,
    "d_layers": 1,
    "rng_seed": 0,
    "oracle_compare": False,
    "krylov_tolerance": 1e-12,
    "krylov_max_dim": 30,
    "tie_tolerance": 1e-12,
    "entropy_floor": 1e-14,
}
KNOWN_KEYS = {"n", "model", "initial_state", "observables", *DEFAULTS}
INT_KEYS = {"n", "chi_max", "cool_every", "d_layers", "rng_seed", "krylov_max_dim"}
FLOAT_KEYS = {"svd_cutoff", "dt", "t_final", "krylov_tolerance", "tie_tolerance", "entropy_floor"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _observable_presets(n: int) -> dict[str, ObservableSpec]:
    mid = ["I"] * n
    mid[n // 2] = "Z"
    return {
        "mz_avg": ObservableSpec("mz_avg", "Z", "site_average"),
        "mx_avg": ObservableSpec("mx_avg", "X", "site_average"),
        "sz_mid": ObservableSpec("sz_mid", "".join(mid), "single"),
    }


def _initial_bits(spec, n: int) -> tuple[int, ...]:
    if isinstance(spec, (list, tuple)):
        bits = tuple(int(b) for b in spec)
    elif spec == "polarized":
        bits = (0,) * n
    elif spec == "neel":
        bits = tuple(j % 2 for j in range(n))
    elif isinstance(spec, str) and set(spec) <= {"0", "1"} and spec:
        bits = tuple(int(c) for c in spec)
    else:
        raise ConfigError(f"initial_state: expected 'polarized', 'neel' or a bit string, got {spec!r}")
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ConfigError(f"initial_state: need {n} bits of 0/1, got {spec!r}")
    return bits


def _model(spec) -> tuple[str, ModelParams]:
    if isinstance(spec, str):
        if spec not in MODELS:
            raise ConfigError(f"model: unknown preset {spec!r} (choose from {sorted(MODELS)})")
        return spec, MODELS[spec]
    if isinstance(spec, dict):
        extra = set(spec) - {"j1x", "j1y", "j2x", "h"}
        if extra:
            raise ConfigError(f"model: unknown keys {sorted(extra)}")
        try:
            return "custom", ModelParams(**{k: float(v) for k, v in spec.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: {exc}") from exc
    raise ConfigError(f"model: expected a preset name or a coupling mapping, got {spec!r}")


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    try:
        data = yaml.safe_load(text)  # JSON is a subset of YAML
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: cannot parse: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def parse_config(raw: dict) -> tuple[EvolutionConfig, dict]:
    """Validate a raw mapping; return the config and its normalized snapshot.

    The snapshot contains every key with defaults filled in and feeds
    back into :func:`parse_config` unchanged.
    """
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("n", "model"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    snap = {**DEFAULTS, **raw}
    for key in INT_KEYS:
        v = snap[key]
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
        snap[key] = int(v)
    for key in FLOAT_KEYS:
        v = snap[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {v!r}")
        snap[key] = float(v)
    if not isinstance(snap["oracle_compare"], bool):
        raise ConfigError("oracle_compare: expected true or false")
    n = snap["n"]
    if n < 2:
        raise ConfigError("n: must be at least 2")
    name, params = _model(snap["model"])
    if name == "custom":
        snap["model"] = dataclasses.asdict(params)
    if snap.get("initial_state") is None:
        snap["initial_state"] = "neel" if name == "xx" else "polarized"
    bits = _initial_bits(snap["initial_state"], n)
    if isinstance(snap["initial_state"], (list, tuple)):
        snap["initial_state"] = "".join(map(str, bits))
    presets = _observable_presets(n)
    obs_raw = snap.get("observables")
    if obs_raw is None:
        obs_raw = ["mz_avg", "sz_mid"] if name == "xx" else ["mz_avg"]
    if not isinstance(obs_raw, list) or not obs_raw:
        raise ConfigError("observables: expected a nonempty list")
    observables = []
    for item in obs_raw:
        if isinstance(item, str):
            if item not in presets:
                raise ConfigError(f"observables: unknown preset {item!r} (choose from {sorted(presets)})")
            observables.append(presets[item])
        elif isinstance(item, dict):
            extra = set(item) - {"name", "label", "mode"}
            if extra or not {"name", "label"} <= set(item):
                raise ConfigError(f"observables: entries need name and label, got {item!r}")
            try:
                spec = ObservableSpec(str(item["name"]), str(item["label"]), str(item.get("mode", "single")))
                spec.paulis(n)
            except ValueError as exc:
                raise ConfigError(f"observables[{item.get('name')}]: {exc}") from exc
            observables.append(spec)
        else:
            raise ConfigError(f"observables: cannot read entry {item!r}")
    snap["observables"] = [
        o.name if presets.get(o.name) == o else dataclasses.asdict(o) for o in observables
    ]
    if snap["oracle_compare"] and n > MAX_QUBITS:
        raise ConfigError(f"oracle_compare: oracle limited to n <= {MAX_QUBITS}, got n={n}")
    try:
        krylov = KrylovParams(tolerance=snap["krylov_tolerance"], max_dim=snap["krylov_max_dim"])
        config = EvolutionConfig(
            n=n,
            model=params,
            chi_max=snap["chi_max"],
            svd_cutoff=snap["svd_cutoff"],
            dt=snap["dt"],
            t_final=snap["t_final"],
            cool_every=snap["cool_every"],
            d_layers=snap["d_layers"],
            initial_state=bits,
            observables=tuple(observables),
            rng_seed=snap["rng_seed"],
            oracle_compare=snap["oracle_compare"],
            krylov=krylov,
            tie_tolerance=snap["tie_tolerance"],
            entropy_floor=snap["entropy_floor"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config, snap


def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"--set expects KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), yaml.safe_load(value)


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_table(path: Path, kind: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: clifford_tdvp/{kind} v{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def read_table(path) -> tuple[list[str], dict[str, np.ndarray]]:
    """Read a CSV written by :func:`write_table`; footer rows are ignored."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = []
    for row in reader:
        try:
            data.append([float(v) for v in row])
        except ValueError:
            continue  # footer
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return header, {h: arr[:, i] for i, h in enumerate(header)}


def _trajectory_rows(rec, names):
    for m in range(len(rec)):
        yield [
            m,
            rec.times[m],
            *(rec.observables[k][m] for k in names),
            rec.entropy_mid[m],
            rec.max_chi[m],
            rec.discarded_weight[m],
            rec.energy[m],
            rec.cooled[m],
            rec.wall_ms[m],
        ]


def _write_error(path: Path, times, series: dict[str, np.ndarray]) -> None:
    names = list(series)
    rows = [[t, *(series[k][i] for k in names)] for i, t in enumerate(times)]
    footer = ["epsilon_T", *(_fmt(series[k][-1]) for k in names)]
    write_table(path, "error", ["t", *names], rows + [footer])


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def run(config: EvolutionConfig, snapshot: dict, out_dir) -> dict:
    """Execute one evolution and write its files; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    rec, _, acc = run_dressed_evolution(config)
    names = [o.name for o in config.observables]
    files = {"trajectory": "trajectory.csv", "cooling": "cooling.jsonl"}
    write_table(
        out / files["trajectory"],
        "trajectory",
        ["step", "t", *names, "entropy_mid", "max_chi", "discarded_cum", "energy", "cooled", "wall_ms"],
        _trajectory_rows(rec, names),
    )
    with open(out / files["cooling"], "w") as fh:
        for m, report in rec.cooling_reports:
            for g in report.records:
                fh.write(json.dumps({"step": m, **g.to_dict()}) + "\n")
            fh.write(
                json.dumps(
                    {
                        "step": m,
                        "summary": True,
                        "entropy_mid_before": report.entropy_mid_before,
                        "entropy_mid_after": report.entropy_mid_after,
                        "tableau_hex": report.tableau_hex,
                        "schedule": report.schedule,
                    }
                )
                + "\n"
            )
    summary = {"final_entropy_mid": rec.entropy_mid[-1], "final_tableau_hex": acc.to_hex()}
    if config.oracle_compare:
        h = build_model_hamiltonian(config.model, config.n)
        states = exact_evolve(h, basis_state(config.bits), config.dt, config.n_steps)
        exact = {}
        for spec in config.observables:
            ps = spec.paulis(config.n)
            exact[spec.name] = np.array([np.mean([exact_expect(s, p) for p in ps]) for s in states])
        files["exact"] = "exact.csv"
        files["error"] = "error.csv"
        write_table(
            out / files["exact"],
            "exact",
            ["step", "t", *names],
            ([m, rec.times[m], *(exact[k][m] for k in names)] for m in range(len(rec))),
        )
        errs = {k: integrated_error(rec.series(k), exact[k], rec.times).epsilon_t for k in names}
        _write_error(out / files["error"], rec.times, errs)
        summary.update({f"epsilon_T[{k}]": float(v[-1]) for k, v in errs.items()})
    files["manifest"] = "manifest.json"
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "config": snapshot,
        "mode": "plain" if config.plain_tdvp else "dressed",
        "seed": config.rng_seed,
        "rng": RNG_ALGORITHM,
        "started": started,
        "finished": _now(),
        "outputs": {k: str(out / v) for k, v in files.items()},
        "warnings": rec.warnings,
        "summary": summary,
    }
    with open(out / files["manifest"], "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def _sweep_member(args):
    raw, out = args
    config, snap = parse_config(raw)
    return run(config, snap, out)


def sweep(raw: dict, key: str, values: list, out_dir) -> list[dict]:
    if key not in KNOWN_KEYS:
        raise ConfigError(f"--over: unknown key {key!r}")
    out = Path(out_dir)
    jobs = []
    for v in values:
        member = {**raw, key: v}
        parse_config(member)  # fail before anything runs
        jobs.append((member, out / f"{key}={v}"))
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            manifests = list(pool.map(_sweep_member, jobs))
    else:
        manifests = [_sweep_member(j) for j in jobs]
    summary_keys = sorted({k for m in manifests for k in m["summary"] if k != "final_tableau_hex"})
    out.mkdir(parents=True, exist_ok=True)
    write_table(
        out / "summary.csv",
        "summary",
        [key, *summary_keys],
        ([str(v), *(m["summary"].get(k, float("nan")) for k in summary_keys)] for v, m in zip(values, manifests)),
    )
    return manifests


def compare(path_a, path_b, out_path, observables: list[str] | None = None):
    ha, a = read_table(path_a)
    hb, b = read_table(path_b)
    if a["t"].shape != b["t"].shape or np.max(np.abs(a["t"] - b["t"]), initial=0) > 1e-12:
        raise ConfigError(
            f"grid mismatch: {path_a} has {a['t'].size} points, {path_b} has {b['t'].size}"
        )
    if observables is None:
        observables = [h for h in _observable_columns(ha) if h in hb]
    missing = [k for k in observables if k not in a or k not in b]
    if missing:
        raise ConfigError(f"columns missing from one of the files: {missing}")
    errs = {k: integrated_error(a[k], b[k], a["t"]).epsilon_t for k in observables}
    _write_error(Path(out_path), a["t"], errs)
    return errs


_BOOKKEEPING = {"step", "t", "entropy_mid", "max_chi", "discarded_cum", "energy", "cooled", "wall_ms"}


def _observable_columns(header):
    return [h for h in header if h not in _BOOKKEEPING]


def enumerate_cliffords(out=None) -> int:
    fh = open(out, "w") if out else sys.stdout
    try:
        for g in two_qubit_candidates():
            images = [p.label() for p in g.tableau.generator_images()]
            fh.write(
                json.dumps(
                    {
                        "candidate_id": g.candidate_id,
                        "tableau_hex": g.tableau.to_hex(),
                        "images": dict(zip(["X0", "X1", "Z0", "Z1"], images)),
                        "circuit": list(synthesize_circuit(g.tableau)),
                    }
                )
                + "\n"
            )
    finally:
        if out:
            fh.close()
    return len(two_qubit_candidates())


# ---------------------------------------------------------------------------
# entry point


def _raw_from_args(args) -> dict:
    raw = load_config_file(args.config) if args.config else {}
    for text in args.set or []:
        k, v = _parse_override(text)
        raw[k] = v
    return raw


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clifford-tdvp", description="Clifford-dressed TDVP runner")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def add_config(sp):
        sp.add_argument("config", nargs="?", help="YAML or JSON config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--out", required=True, help="output directory")

    add_config(sub.add_parser("run", help="run one evolution"))
    sp = sub.add_parser("sweep", help="run one evolution per parameter value")
    add_config(sp)
    sp.add_argument("--over", required=True, metavar="KEY=V1,V2,...")
    sp = sub.add_parser("compare", help="integrated error between two trajectory files")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--out", required=True)
    sp.add_argument("--observable", action="append")
    sp = sub.add_parser("enumerate-cliffords", help="dump the 720 positive-sign tableaux")
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.verb == "run":
            config, snap = parse_config(_raw_from_args(args))
            manifest = run(config, snap, args.out)
            print(json.dumps(manifest["summary"]))
        elif args.verb == "sweep":
            key, _, vals = args.over.partition("=")
            if not vals:
                raise ConfigError("--over expects KEY=V1,V2,...")
            values = [yaml.safe_load(v) for v in vals.split(",")]
            sweep(_raw_from_args(args), key.strip(), values, args.out)
        elif args.verb == "compare":
            errs = compare(args.a, args.b, args.out, args.observable)
            print(json.dumps({k: float(v[-1]) for k, v in errs.items()}))
        elif args.verb == "enumerate-cliffords":
            enumerate_cliffords(args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
