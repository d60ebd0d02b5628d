"""Command-line driver: ``mlcut solve | generate | corpus | bench``.

Option values resolve as command-line flag, then ``MLCUT_<NAME>``
environment variable, then the built-in default.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import transfer
from .coarsen import CoarsenConfig
from .graph import (GraphFormatError, WeightedGraph, cut_value, karloff_generate,
                    load_graph, random_weighted_graph, save_gset)
from .localsearch import LsConfig
from .refine import RefineConfig, vcycle_solve

logger = logging.getLogger("mlcut")

SCHEMA = 1
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_INPUT = 0, 1, 2, 3
GRAPH_SUFFIXES = {".txt", ".gset", ".mtx", ".rud", ""}
BENCH_COLUMNS = ["name", "n", "m", "size", "solver", "avg_cut", "best_cut",
                 "avg_ratio", "best_ratio", "avg_seconds"]


class ConfigError(Exception):
    pass


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    input: str | None = None
    format: str | None = None
    solver: str = "qiro"
    subproblem_size: int = 20
    coarsest_size: int = 200
    shots: int = 10240
    qiro_smallest: int = 10
    dim: int = 5
    seed: int = 0
    repeats: int = 1
    corpus: str | None = None
    output: str | None = None
    output_format: str = "json"
    emit_assignment: bool = False
    verbose: int = 0
    best_known: float | None = None
    name: str | None = None


# option name -> parser for the environment value
_ENV_TYPES = {
    "input": str, "format": str, "solver": str, "subproblem_size": int,
    "coarsest_size": int, "shots": int, "qiro_smallest": int, "dim": int,
    "seed": int, "repeats": int, "corpus": str, "output": str,
    "output_format": str, "best_known": float, "workers": int,
}


def _env_bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def resolve(args: argparse.Namespace, defaults: dict, environ=None) -> dict:
    """Merge parsed flags over ``MLCUT_*`` variables over ``defaults``."""
    environ = os.environ if environ is None else environ
    out = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None or value is False:
            raw = environ.get("MLCUT_" + key.upper())
            if raw is not None and raw != "":
                try:
                    if isinstance(default, bool):
                        value = _env_bool(raw)
                    else:
                        value = _ENV_TYPES.get(key, str)(raw)
                except ValueError:
                    raise ConfigError(f"bad value for MLCUT_{key.upper()}: {raw!r}") from None
            elif value is None:
                value = default
        out[key] = value
    return out


def load_best_known(path=None) -> dict:
    if path is None:
        path = Path(__file__).parent / "data" / "best_known.json"
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read best-known table {path}: {exc}") from None
    return {k: float(v) for k, v in data.get("best_known", data).items()
            if isinstance(v, (int, float))}


def _read_graph(path, fmt) -> WeightedGraph:
    try:
        return load_graph(path, fmt)
    except (OSError, GraphFormatError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _read_corpus(path) -> transfer.CorpusModel:
    try:
        return transfer.load_corpus(path)
    except (OSError, transfer.CorpusFormatError) as exc:
        raise InputError(f"cannot read corpus {path}: {exc}") from None


def make_configs(cfg: RunConfig, corpus=None):
    try:
        rcfg = RefineConfig(subproblem_size=cfg.subproblem_size, sub_solver=cfg.solver,
                            shots=cfg.shots, qiro_smallest=cfg.qiro_smallest,
                            corpus=corpus, seed=cfg.seed)
        ccfg = CoarsenConfig(coarsest_size=cfg.coarsest_size, dim=cfg.dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return rcfg, ccfg


def result_record(name, g, report, best_known=None, assignment=False) -> dict:
    rec = {
        "schema": SCHEMA,
        "graph": name,
        "n": g.n,
        "m": g.m,
        "solver": report.solver,
        "seed": int(report.seed),
        "cut": float(report.cut),
        "best_known": None if best_known is None else float(best_known),
        "ratio": None if best_known is None else float(report.cut) / float(best_known),
        "seconds": float(report.seconds),
        "levels": [{"n": int(l["n"]), "cut": float(l["cut"]),
                    "seconds": float(l["seconds"])} for l in report.levels],
    }
    if assignment:
        x = np.asarray(report.assignment, dtype=np.int8)
        audited = cut_value(g, x)
        if not np.isclose(audited, report.cut, rtol=1e-9, atol=1e-9):
            raise RuntimeError(f"reported cut {report.cut} != recomputed {audited}")
        rec["cut"] = float(audited)
        rec["assignment"] = x.tolist()
    return rec


def aggregate(records: list[dict]) -> dict:
    cuts = np.array([r["cut"] for r in records])
    secs = np.array([r["seconds"] for r in records])
    bk = records[0]["best_known"]
    return {
        "name": records[0]["graph"],
        "graph": records[0]["graph"],
        "n": records[0]["n"],
        "m": records[0]["m"],
        "size": records[0]["n"] + records[0]["m"],
        "solver": records[0]["solver"],
        "repeats": len(records),
        "avg_cut": float(cuts.mean()),
        "best_cut": float(cuts.max()),
        "best_known": bk,
        "avg_ratio": None if bk is None else float(cuts.mean() / bk),
        "best_ratio": None if bk is None else float(cuts.max() / bk),
        "avg_seconds": float(secs.mean()),
    }


def run_repeats(g: WeightedGraph, cfg: RunConfig, corpus=None, name="graph",
                best_known=None) -> list[dict]:
    """``cfg.repeats`` V-cycle runs with seeds ``seed .. seed + repeats - 1``."""
    records = []
    for r in range(cfg.repeats):
        run = RunConfig(**{**asdict(cfg), "seed": cfg.seed + r})
        rcfg, ccfg = make_configs(run, corpus)
        report = vcycle_solve(g, rcfg, ccfg, LsConfig(seed=run.seed))
        rec = result_record(name, g, report, best_known, cfg.emit_assignment)
        logger.info("run %d/%d seed=%d cut=%.6g %.2fs", r + 1, cfg.repeats,
                    run.seed, rec["cut"], rec["seconds"])
        records.append(rec)
    return records


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _csv_text(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in columns})
    return buf.getvalue()


def _load_corpus_for(cfg: RunConfig):
    if cfg.solver != "gl-qaoa":
        return None
    path = cfg.corpus
    if path is None:
        path = transfer.default_corpus_path()
        if not path.exists():
            raise ConfigError("the gl-qaoa solver needs --corpus")
    return _read_corpus(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> dict:
    if cfg.input is None:
        raise ConfigError("solve needs --input")
    if cfg.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    corpus = _load_corpus_for(cfg)
    g = _read_graph(cfg.input, cfg.format)
    name = cfg.name or Path(cfg.input).stem
    best_known = cfg.best_known
    if best_known is None:
        best_known = load_best_known().get(name)
    records = run_repeats(g, cfg, corpus, name, best_known)
    doc = {"schema": SCHEMA, "runs": records, "aggregate": aggregate(records)}
    if cfg.output_format == "csv":
        _write(_csv_text([doc["aggregate"]], BENCH_COLUMNS), cfg.output)
    else:
        _write(json.dumps(doc, indent=2) + "\n", cfg.output)
    return doc


def cmd_generate(kind: str, params: dict, output=None) -> WeightedGraph:
    try:
        if kind == "karloff":
            g = karloff_generate(params["b"], params["t"])
        else:
            g = random_weighted_graph(params["n"], params["p"], params["w_upper"],
                                      seed=params["seed"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid {kind} parameters: {exc}") from None
    _write(save_gset(g), output)
    return g


def cmd_corpus(count=200, multistarts=20, eval_budget=300, seed=0, output=None,
               stream=None) -> transfer.CorpusModel:
    stream = stream or sys.stderr
    t0 = time.perf_counter()
    model = transfer.build_corpus(count, multistarts=multistarts, eval_budget=eval_budget,
                                  seed=seed)
    elapsed = time.perf_counter() - t0
    out = output or transfer.default_corpus_path()
    transfer.save_corpus(model, out)
    exps = np.array([e.expectation for e in model.entries])
    print(f"N={len(model)} elapsed={elapsed:.1f}s expectation mean={exps.mean():.4f} "
          f"min={exps.min():.4f} max={exps.max():.4f} -> {out}", file=stream)
    return model


def _bench_one(path: str, cfg: RunConfig, best_known: dict):
    g = _read_graph(path, cfg.format)
    name = Path(path).stem
    corpus = _load_corpus_for(cfg)
    records = run_repeats(g, cfg, corpus, name, best_known.get(name))
    return aggregate(records), records


def bench_files(directory) -> list[str]:
    root = Path(directory)
    if not root.is_dir():
        raise InputError(f"{directory} is not a directory")
    files = [p for p in sorted(root.iterdir())
             if p.is_file() and p.suffix.lower() in GRAPH_SUFFIXES
             and not p.name.startswith(".")]
    return [str(p) for p in files]


def cmd_bench(directory, cfg: RunConfig, best_known_path=None, json_path=None,
              workers: int = 1):
    """Run every graph in ``directory``; returns ``(rows, failures)``."""
    files = bench_files(directory)
    best_known = load_best_known(best_known_path)
    _load_corpus_for(cfg)  # fail early on a missing corpus
    rows, failures, runs = [], [], {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(p, pool.submit(_bench_one, p, cfg, best_known)) for p in files]
            results = []
            for p, fut in futures:
                try:
                    results.append((p, fut.result()))
                except Exception as exc:
                    logger.error("bench failed on %s: %s", p, exc)
                    failures.append(p)
    else:
        results = []
        for p in files:
            try:
                results.append((p, _bench_one(p, cfg, best_known)))
            except Exception as exc:
                logger.error("bench failed on %s: %s", p, exc)
                failures.append(p)
    for p, (row, records) in results:
        rows.append(row)
        runs[row["graph"]] = records
    _write(_csv_text(rows, BENCH_COLUMNS), cfg.output)
    if json_path:
        Path(json_path).write_text(json.dumps(
            {"schema": SCHEMA, "rows": rows, "failed": failures, "runs": runs},
            indent=2) + "\n", encoding="utf-8")
    return rows, failures


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["gset", "mtx"], default=None)
    p.add_argument("--solver", choices=["gl-qaoa", "qiro", "local", "exact"], default=None)
    p.add_argument("--corpus", default=None, help="donor corpus (JSONL) for gl-qaoa")
    p.add_argument("--subproblem-size", type=int, default=None, help="K (default 20)")
    p.add_argument("--coarsest-size", type=int, default=None, help="default 200")
    p.add_argument("--shots", type=int, default=None, help="default 10240")
    p.add_argument("--qiro-smallest", type=int, default=None, help="default 10")
    p.add_argument("--dim", type=int, default=None, help="embedding dimension (default 5)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--emit-assignment", action="store_true", default=None)
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlcut", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one graph")
    ps.add_argument("--input", default=None)
    ps.add_argument("--output-format", choices=["json", "csv"], default=None)
    ps.add_argument("--best-known", type=float, default=None,
                    help="C* for the ratio (default: shipped table, by file name)")
    ps.add_argument("--name", default=None)
    _solver_flags(ps)

    pg = sub.add_parser("generate", help="write a Gset-format graph")
    gsub = pg.add_subparsers(dest="kind", required=True)
    pk = gsub.add_parser("karloff")
    pk.add_argument("--b", type=int, required=True)
    pk.add_argument("--t", type=int, required=True)
    pk.add_argument("--output", default=None)
    pr = gsub.add_parser("random")
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--p", type=float, required=True)
    pr.add_argument("--w-upper", type=float, default=1.0)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--output", default=None)

    pc = sub.add_parser("corpus", help="build a donor corpus")
    pc.add_argument("--count", type=int, default=200)
    pc.add_argument("--multistarts", type=int, default=20)
    pc.add_argument("--eval-budget", type=int, default=300)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--output", default=None)
    pc.add_argument("-v", "--verbose", action="count", default=0)

    pb = sub.add_parser("bench", help="solve every graph in a directory")
    pb.add_argument("directory")
    pb.add_argument("--best-known-file", default=None)
    pb.add_argument("--json", default=None, help="also write a JSON summary here")
    pb.add_argument("--workers", type=int, default=None)
    _solver_flags(pb)
    return parser


def _run_config(args, repeats_default: int) -> RunConfig:
    defaults = asdict(RunConfig(repeats=repeats_default))
    values = resolve(args, {k: v for k, v in defaults.items() if k != "verbose"})
    values["verbose"] = getattr(args, "verbose", 0) or 0
    if values["solver"] not in ("gl-qaoa", "qiro", "local", "exact"):
        raise ConfigError(f"unknown solver {values['solver']!r}")
    for key in ("subproblem_size", "coarsest_size", "shots", "qiro_smallest", "dim"):
        if values[key] < 1:
            raise ConfigError(f"--{key.replace('_', '-')} must be positive")
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", 0) > 1
        else logging.INFO if getattr(args, "verbose", 0) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "solve":
            cmd_solve(_run_config(args, repeats_default=1))
        elif args.command == "generate":
            params = {k: v for k, v in vars(args).items()
                      if k in ("b", "t", "n", "p", "w_upper", "seed")}
            cmd_generate(args.kind, params, args.output)
        elif args.command == "corpus":
            cmd_corpus(args.count, args.multistarts, args.eval_budget, args.seed,
                       args.output)
        else:
            cfg = _run_config(args, repeats_default=20)
            workers = resolve(args, {"workers": 1})["workers"]
            _, failures = cmd_bench(args.directory, cfg, args.best_known_file,
                                    args.json, workers)
            if failures:
                return EXIT_FAILED
    except ConfigError as exc:
        print(f"mlcut: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"mlcut: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
