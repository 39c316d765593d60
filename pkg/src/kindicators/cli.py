"""Command-line surface: synthetic data, spectral embedding, clustering, evaluation, benchmarks.

Matrix CSVs are comma-separated with no header (values written with 17
significant digits, so write-then-read round-trips exactly); label CSVs hold
one 0-based id per line; results are versioned JSON documents. Exit codes:
0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import KmeansParams, SrParams, kmeans_solve, lloyd_solve, sr_solve
from .core import (
    ClusteringError,
    ClusterResult,
    EigSolverError,
    EmbeddedData,
    RankDeficientError,
    SolverTrace,
    make_indicator,
    validate_embedding,
)
from .embedding import knn_graph, spectral_embed
from .evaluation import accuracy, kind_objective, kmeans_objective, soft_indicator
from .kindap import KindapParams, kindap_solve, warm_start_centers
from .synthgen import SynthSpec, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

SCHEMA_VERSION = 1
METHODS = ("kindap", "kmeans", "sr", "kindap+l")


class UsageError(Exception):
    """Bad flags or flag values (exit code 2)."""


class DataFileError(Exception):
    """Unreadable or malformed input file (exit code 3)."""


# ---------------------------------------------------------------------------
# File formats


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless comma-separated matrix; parse errors carry line numbers."""
    rows: list[list[float]] = []
    width = None
    try:
        with open(path, newline="") as fh:
            for line_no, record in enumerate(csv.reader(fh), start=1):
                if not record:
                    continue
                try:
                    row = [float(cell) for cell in record]
                except ValueError as exc:
                    raise DataFileError(f"{path}:{line_no}: {exc}") from exc
                if width is None:
                    width = len(row)
                elif len(row) != width:
                    raise DataFileError(
                        f"{path}:{line_no}: expected {width} columns, got {len(row)}"
                    )
                rows.append(row)
    except OSError as exc:
        raise DataFileError(f"{path}: {exc}") from exc
    if not rows:
        raise DataFileError(f"{path}: empty matrix")
    return np.asarray(rows, dtype=float)


def write_matrix_csv(path, matrix) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", newline="") as fh:
        for row in m:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def read_labels_csv(path) -> np.ndarray:
    """Read one 0-based integer label per line."""
    labels: list[int] = []
    try:
        with open(path) as fh:
            for line_no, line in enumerate(fh, start=1):
                text = line.strip()
                if not text:
                    continue
                try:
                    labels.append(int(float(text)))
                except ValueError as exc:
                    raise DataFileError(f"{path}:{line_no}: {exc}") from exc
    except OSError as exc:
        raise DataFileError(f"{path}: {exc}") from exc
    if not labels:
        raise DataFileError(f"{path}: empty label file")
    return np.asarray(labels, dtype=int)


def write_labels_csv(path, labels) -> None:
    with open(path, "w") as fh:
        for value in np.asarray(labels, dtype=int):
            fh.write(f"{int(value)}\n")


def _trace_payload(trace: SolverTrace) -> dict:
    return {
        "outer_iters": trace.outer_iters,
        "inner_iters_per_outer": list(trace.inner_iters_per_outer),
        "objective_history": list(trace.objective_history),
        "outer_objective_history": list(trace.outer_objective_history),
        "replication_index": trace.replication_index,
        "replication_objectives": list(trace.replication_objectives),
        "warnings": list(trace.warnings),
    }


def result_payload(
    method: str,
    result: ClusterResult,
    *,
    seed: int,
    replications: int,
    orthonormalized: bool,
    wall_time_seconds: float,
    params: dict,
    soft_values=None,
    extra_traces: dict | None = None,
) -> dict:
    payload = {
        "schema": SCHEMA_VERSION,
        "method": method,
        "n": int(result.labels.size),
        "k": int(result.labels.max()) + 1,
        "seed": int(seed),
        "replications": int(replications),
        "orthonormalized": bool(orthonormalized),
        "labels": [int(v) for v in result.labels],
        "kind_objective": None
        if result.kind_objective is None
        else float(result.kind_objective),
        "kmeans_objective": float(result.kmeans_objective),
        "soft_indicator": None
        if soft_values is None
        else [float(v) for v in soft_values],
        "trace": _trace_payload(result.trace),
        "params": params,
        "wall_time_seconds": float(wall_time_seconds),
    }
    if extra_traces:
        payload.update(extra_traces)
    return payload


def validate_result_payload(payload: dict) -> None:
    """Raise DataFileError unless `payload` matches the result document schema."""
    if not isinstance(payload, dict):
        raise DataFileError("result document must be a JSON object")
    if payload.get("schema") != SCHEMA_VERSION:
        raise DataFileError(f"unsupported schema: {payload.get('schema')!r}")
    for key in ("method", "labels", "kmeans_objective", "trace", "params"):
        if key not in payload:
            raise DataFileError(f"result document missing key {key!r}")
    labels = payload["labels"]
    if not isinstance(labels, list) or not labels:
        raise DataFileError("labels must be a nonempty list")
    if not all(isinstance(v, int) and v >= 0 for v in labels):
        raise DataFileError("labels must be nonnegative integers")
    for key in ("kind_objective", "kmeans_objective"):
        value = payload.get(key)
        if value is not None and (not isinstance(value, (int, float)) or value < 0):
            raise DataFileError(f"{key} must be a nonnegative number or null")
    if not isinstance(payload["trace"], dict):
        raise DataFileError("trace must be an object")


def write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataFileError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFileError(f"{path}:{exc.lineno}: {exc.msg}") from exc


# ---------------------------------------------------------------------------
# Solver dispatch


def run_method(
    method: str,
    embedded: EmbeddedData,
    *,
    replications: int = 10,
    seed: int = 0,
    kindap_params: KindapParams | None = None,
    kmeans_params: KmeansParams | None = None,
    sr_params: SrParams | None = None,
):
    """Run one clustering method on validated embedded data.

    Returns (result, soft_values, outer_iters, inner_iters_total, extra_traces).
    """
    k = embedded.k
    if method == "kindap":
        params = kindap_params or KindapParams(seed=seed)
        result = kindap_solve(embedded, params)
        soft = soft_indicator(result.relaxed).s
        return (
            result,
            soft,
            result.trace.outer_iters,
            sum(result.trace.inner_iters_per_outer),
            {},
        )
    if method == "kindap+l":
        params = kindap_params or KindapParams(seed=seed)
        stage_one = kindap_solve(embedded, params)
        centers = warm_start_centers(embedded, stage_one)
        polish = kmeans_params or KmeansParams(replications=1, seed=seed)
        result = lloyd_solve(embedded.matrix, k, centers, polish)
        result.relaxed = stage_one.relaxed
        soft = soft_indicator(stage_one.relaxed).s
        inner_total = sum(stage_one.trace.inner_iters_per_outer) + len(
            result.trace.objective_history
        )
        return (
            result,
            soft,
            stage_one.trace.outer_iters,
            inner_total,
            {"kindap_trace": _trace_payload(stage_one.trace)},
        )
    if method == "kmeans":
        params = kmeans_params or KmeansParams(replications=replications, seed=seed)
        result = kmeans_solve(embedded.matrix, k, params)
        inner_total = sum(len(h) for h in result.trace.replication_histories)
        return result, None, result.trace.outer_iters, inner_total, {}
    if method == "sr":
        params = sr_params or SrParams(replications=replications, seed=seed)
        result = sr_solve(embedded, params)
        inner_total = sum(len(h) for h in result.trace.replication_histories)
        return result, None, result.trace.outer_iters, inner_total, {}
    raise UsageError(f"unknown method {method!r} (choose from {', '.join(METHODS)})")


# ---------------------------------------------------------------------------
# Benchmark harness

BENCH_FIELDS = (
    "method",
    "k",
    "rho",
    "replications",
    "seed",
    "accuracy",
    "kind_objective",
    "kmeans_objective",
    "wall_time_seconds",
    "outer_iters",
    "inner_iters_total",
    "error",
)


@dataclass
class BenchCell:
    method: str
    k: int
    rho: float
    replications: int
    seed: int
    accuracy: float | None = None
    kind_objective: float | None = None
    kmeans_objective: float | None = None
    wall_time_seconds: float | None = None
    outer_iters: int | None = None
    inner_iters_total: int | None = None
    error: str | None = None
    result: ClusterResult | None = None

    def row(self) -> dict:
        return {name: getattr(self, name) for name in BENCH_FIELDS}


def stable_cell_seed(base_seed: int, k: int, rho: float, method: str, seed_index: int) -> int:
    """Deterministic per-cell solver seed, independent of sweep execution order."""
    key = f"{base_seed}:{k}:{rho!r}:{method}:{seed_index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def run_bench(
    k_list,
    rho_list,
    methods,
    replications: int,
    seeds,
    per_cluster: int = 40,
    ambient_dim: int = 300,
    quiet: bool = True,
) -> list[BenchCell]:
    """Full-factorial sweep over (k, rho, method, seed) on synthetic data.

    Every method within a cell group sees the same dataset (generated from the
    group's seed); solver randomness is seeded per cell by
    :func:`stable_cell_seed`. Per-cell failures become rows with an `error`
    value and the sweep continues, so the row count always equals the product
    of the list cardinalities. Rows come back sorted by (k, rho, method, seed).
    """
    k_list = list(k_list)
    rho_list = list(rho_list)
    methods = list(methods)
    seeds = list(seeds)
    if not (k_list and rho_list and methods and seeds):
        raise UsageError("k-list, rho-list, methods, and seeds must be nonempty")
    for method in methods:
        if method not in METHODS:
            raise UsageError(f"unknown method {method!r}")
    cells: list[BenchCell] = []
    for k in k_list:
        for rho in rho_list:
            for seed_index, seed in enumerate(seeds):
                try:
                    data = generate(
                        SynthSpec(
                            k=k,
                            per_cluster=per_cluster,
                            rho=rho,
                            ambient_dim=ambient_dim,
                            seed=seed,
                        )
                    )
                except Exception as exc:
                    for method in methods:
                        cells.append(
                            BenchCell(
                                method,
                                k,
                                rho,
                                replications,
                                seed,
                                error=f"{type(exc).__name__}: {exc}",
                            )
                        )
                    continue
                for method in methods:
                    cell_seed = stable_cell_seed(seed, k, rho, method, seed_index)
                    cell = BenchCell(method, k, rho, replications, seed)
                    try:
                        started = time.perf_counter()
                        result, _, outer, inner_total, _ = run_method(
                            method,
                            data.embedded,
                            replications=replications,
                            seed=cell_seed,
                        )
                        cell.wall_time_seconds = time.perf_counter() - started
                        cell.accuracy = accuracy(result.labels, data.truth)
                        cell.kind_objective = result.kind_objective
                        cell.kmeans_objective = result.kmeans_objective
                        cell.outer_iters = outer
                        cell.inner_iters_total = inner_total
                        cell.result = result
                    except Exception as exc:
                        cell.error = f"{type(exc).__name__}: {exc}"
                    cells.append(cell)
                    if not quiet:
                        status = cell.error or f"accuracy={cell.accuracy:.4f}"
                        print(
                            f"bench k={k} rho={rho} method={method} seed={seed}: {status}",
                            file=sys.stderr,
                        )
    cells.sort(key=lambda c: (c.k, c.rho, c.method, c.seed))
    return cells


def write_bench_csv(path, cells: list[BenchCell]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        for cell in cells:
            row = cell.row()
            writer.writerow({key: "" if value is None else value for key, value in row.items()})


# ---------------------------------------------------------------------------
# Subcommands


def _require_out(args, kind="path"):
    if args.out is None:
        raise UsageError(f"--out {kind} is required for this command")
    return Path(args.out)


def _cmd_synth(args) -> int:
    if args.k < 2:
        raise UsageError("--k must be >= 2")
    try:
        spec = SynthSpec(
            k=args.k,
            per_cluster=args.per_cluster,
            rho=args.rho,
            ambient_dim=args.ambient_dim,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    data = generate(spec)
    out_dir = _require_out(args, "directory")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out_dir / "raw.csv", data.raw)
    write_labels_csv(out_dir / "truth.csv", data.truth)
    write_matrix_csv(out_dir / "embedded.csv", data.embedded.matrix)
    if not args.quiet:
        print(f"wrote raw/truth/embedded CSVs to {out_dir}", file=sys.stderr)
    return EXIT_OK


def _cmd_embed(args) -> int:
    matrix = read_matrix_csv(args.input)
    n = matrix.shape[0]
    if args.k < 2:
        raise UsageError("--k must be >= 2")
    if not 1 <= args.knn < n:
        raise UsageError(f"--knn must satisfy 1 <= knn < n (n={n})")
    graph = knn_graph(matrix, args.knn, weight=args.weight)
    embedded = spectral_embed(graph, args.k, row_normalize=args.row_normalize)
    out = _require_out(args, "file")
    write_matrix_csv(out, embedded.matrix)
    if not args.quiet:
        print(f"wrote {n}x{args.k} embedding to {out}", file=sys.stderr)
    return EXIT_OK


def _kindap_params_from(args) -> KindapParams:
    return KindapParams(
        max_outer=args.max_outer,
        max_inner=args.max_inner,
        tol_inner=args.tol_inner,
        tol_outer=args.tol_outer,
        seed=args.seed,
        rounding=args.rounding,
    )


def _cmd_cluster(args) -> int:
    matrix = read_matrix_csv(args.input)
    embedded = validate_embedding(matrix)
    if args.k is not None and args.k != embedded.k:
        raise UsageError(
            f"--k {args.k} does not match the embedding width {embedded.k}"
        )
    if args.replications < 1:
        raise UsageError("--replications must be >= 1")
    kindap_params = _kindap_params_from(args)
    kmeans_params = KmeansParams(
        replications=args.replications if args.method == "kmeans" else 1,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
    )
    sr_params = SrParams(
        replications=args.replications,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
    )
    started = time.perf_counter()
    result, soft, _, _, extra = run_method(
        args.method,
        embedded,
        replications=args.replications,
        seed=args.seed,
        kindap_params=kindap_params,
        kmeans_params=kmeans_params if args.method in ("kmeans", "kindap+l") else None,
        sr_params=sr_params if args.method == "sr" else None,
    )
    elapsed = time.perf_counter() - started
    payload = result_payload(
        args.method,
        result,
        seed=args.seed,
        replications=args.replications if args.method in ("kmeans", "sr") else 1,
        orthonormalized=embedded.orthonormalized,
        wall_time_seconds=elapsed,
        params={
            "max_outer": args.max_outer,
            "max_inner": args.max_inner,
            "tol_inner": args.tol_inner,
            "tol_outer": args.tol_outer,
            "rounding": args.rounding,
            "max_iters": args.max_iters,
            "tol": args.tol,
        },
        soft_values=soft,
        extra_traces=extra,
    )
    validate_result_payload(payload)
    write_json(args.out, payload)
    return EXIT_OK


def _cmd_eval(args) -> int:
    pred_path = Path(args.pred)
    if pred_path.suffix.lower() == ".json":
        payload = read_json(pred_path)
        validate_result_payload(payload)
        pred = np.asarray(payload["labels"], dtype=int)
    else:
        pred = read_labels_csv(pred_path)
    truth = read_labels_csv(args.truth)
    metrics = {
        "schema": SCHEMA_VERSION,
        "n": int(pred.size),
        "accuracy": accuracy(pred, truth),
    }
    if args.embedded is not None:
        embedded = validate_embedding(read_matrix_csv(args.embedded))
        metrics["kind_objective"] = kind_objective(
            embedded, make_indicator(pred, embedded.k)
        )
        metrics["kmeans_objective"] = kmeans_objective(embedded, pred)
    write_json(args.out, metrics)
    return EXIT_OK


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from exc
    if not values:
        raise UsageError(f"{flag} must be a nonempty comma-separated list")
    return values


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from exc
    if not values:
        raise UsageError(f"{flag} must be a nonempty comma-separated list")
    return values


def _cmd_bench(args) -> int:
    k_list = _parse_int_list(args.k_list, "--k-list")
    rho_list = _parse_float_list(args.rho_list, "--rho-list")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    seeds = _parse_int_list(args.seeds, "--seeds")
    if args.replications < 1:
        raise UsageError("--replications must be >= 1")
    cells = run_bench(
        k_list,
        rho_list,
        methods,
        args.replications,
        seeds,
        per_cluster=args.per_cluster,
        ambient_dim=args.ambient_dim,
        quiet=args.quiet,
    )
    out_dir = _require_out(args, "directory")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_bench_csv(out_dir / "bench.csv", cells)
    write_json(
        out_dir / "bench.json",
        {
            "schema": SCHEMA_VERSION,
            "replications": args.replications,
            "per_cluster": args.per_cluster,
            "ambient_dim": args.ambient_dim,
            "rows": [cell.row() for cell in cells],
        },
    )
    if not args.quiet:
        print(f"wrote {len(cells)} bench rows to {out_dir}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="kindicators",
        description="Subspace-matching clustering toolkit and benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", parents=[common], help="generate a separable synthetic dataset")
    p_synth.add_argument("--k", type=int, required=True, help="number of clusters")
    p_synth.add_argument("--rho", type=float, default=0.33, help="cluster sphere radius")
    p_synth.add_argument("--per-cluster", type=int, default=40, help="points per cluster")
    p_synth.add_argument("--ambient-dim", type=int, default=300, help="ambient dimension")
    p_synth.set_defaults(func=_cmd_synth)

    p_embed = sub.add_parser("embed", parents=[common], help="spectral-embed a raw matrix CSV")
    p_embed.add_argument("input", help="matrix CSV (no header)")
    p_embed.add_argument("--k", type=int, required=True, help="embedding width / cluster count")
    p_embed.add_argument("--knn", type=int, default=5, help="neighbor count")
    p_embed.add_argument("--row-normalize", action="store_true", help="unit-normalize rows")
    p_embed.add_argument("--weight", choices=("binary", "gaussian"), default="binary")
    p_embed.set_defaults(func=_cmd_embed)

    p_cluster = sub.add_parser("cluster", parents=[common], help="cluster an embedded matrix CSV")
    p_cluster.add_argument("input", help="embedded matrix CSV")
    p_cluster.add_argument("--method", choices=METHODS, required=True)
    p_cluster.add_argument("--k", type=int, default=None, help="cluster count (must equal the embedding width)")
    p_cluster.add_argument("--replications", type=int, default=10)
    p_cluster.add_argument("--max-outer", type=int, default=50)
    p_cluster.add_argument("--max-inner", type=int, default=200)
    p_cluster.add_argument("--tol-inner", type=float, default=1e-5)
    p_cluster.add_argument("--tol-outer", type=float, default=1e-5)
    p_cluster.add_argument("--rounding", choices=("magnitude", "binary"), default="magnitude")
    p_cluster.add_argument("--max-iters", type=int, default=300)
    p_cluster.add_argument("--tol", type=float, default=1e-6)
    p_cluster.set_defaults(func=_cmd_cluster)

    p_eval = sub.add_parser("eval", parents=[common], help="score predicted labels against ground truth")
    p_eval.add_argument("--pred", required=True, help="result JSON or label CSV")
    p_eval.add_argument("--truth", required=True, help="ground-truth label CSV")
    p_eval.add_argument("--embedded", default=None, help="embedded CSV for objective recomputation")
    p_eval.set_defaults(func=_cmd_eval)

    p_bench = sub.add_parser("bench", parents=[common], help="full-factorial synthetic benchmark sweep")
    p_bench.add_argument("--k-list", required=True, help="comma-separated cluster counts")
    p_bench.add_argument("--rho-list", required=True, help="comma-separated radii")
    p_bench.add_argument("--methods", required=True, help="comma-separated methods")
    p_bench.add_argument("--replications", type=int, default=10)
    p_bench.add_argument("--seeds", default="0", help="comma-separated dataset seeds")
    p_bench.add_argument("--per-cluster", type=int, default=40)
    p_bench.add_argument("--ambient-dim", type=int, default=300)
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataFileError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (RankDeficientError, EigSolverError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ClusteringError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc.filename or ''}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
