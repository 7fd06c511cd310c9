"""Command-line front end.

    netcom detect --input edges.txt --k 2 --backend exact --output out.json
    netcom bench  --input edges.txt --backends exact,mtree,lsh --k 16

Exit codes: 0 success, 1 computation error, 2 unreadable input,
64 invalid flags or flag combination.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .bench import DEFAULT_QUERIES, benchmark_compare, format_table
from .embed import EmbedConfig, Embedding, Phi, Sigma, auto_lambda
from .errors import NetcomError
from .graph import Graph, parse_edge_list
from .kcentral import Backend, default_threads, detect_communities, select_k
from .lsh import LshParams
from .mtree import DEFAULT_LEAF_CAPACITY
from .quality import quality_report

log = logging.getLogger("netcom")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NOINPUT = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    input_path: str
    directed: bool = False
    lam: float | str = 1.0
    per_node_lambda: bool = False
    sigma: str = "cosine"
    phi: str = "arccos"
    k: int | str = "auto"
    k_max: int = 128
    backend: str = "exact"
    lsh_bits: int = 8
    lsh_tables: int = 4
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY
    seed: int = 0
    max_iters: int = 100
    output_path: str | None = None
    format: str = "json"
    threads: int | None = None

    def validate(self) -> None:
        if isinstance(self.lam, str) and self.lam != "auto":
            raise UsageError(f"--lambda must be a number >= 0 or 'auto', got {self.lam!r}")
        if not isinstance(self.lam, str) and self.lam < 0:
            raise UsageError("--lambda must be >= 0")
        if isinstance(self.k, str) and self.k != "auto":
            raise UsageError(f"--k must be a positive integer or 'auto', got {self.k!r}")
        if not isinstance(self.k, str) and self.k < 1:
            raise UsageError("--k must be >= 1")
        for name in ("k_max", "lsh_bits", "lsh_tables", "leaf_capacity", "max_iters"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be >= 1")
        if self.lsh_bits > 62:
            raise UsageError("--lsh-bits must be <= 62")
        if self.threads is not None and self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if self.format == "csv" and not self.output_path:
            raise UsageError("--format csv needs --output (the report goes to a sidecar file)")
        if self.per_node_lambda and self.lam != 1.0 and self.lam != "auto":
            raise UsageError("--per-node-lambda cannot be combined with an explicit --lambda")

    def to_dict(self) -> dict:
        return asdict(self)


def _lam_arg(s: str) -> float | str:
    if s == "auto":
        return s
    try:
        return float(s)
    except ValueError:
        return s


def _k_arg(s: str) -> int | str:
    if s == "auto":
        return s
    try:
        return int(s)
    except ValueError:
        return s


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="edge-list file (SNAP format)")
    p.add_argument("--directed", action="store_true", help="input is directed (it is symmetrized)")
    p.add_argument("--lambda", dest="lam", type=_lam_arg, default=1.0,
                   help="diagonal value: ~0 dense graphs, ~1 moderate, >=2 sparse; 'auto' picks by mean degree")
    p.add_argument("--per-node-lambda", action="store_true", help="use the mean degree as every node's diagonal")
    p.add_argument("--sigma", choices=[s.value for s in Sigma], default="cosine")
    p.add_argument("--phi", choices=[f.value for f in Phi], default="arccos")
    p.add_argument("--k", type=_k_arg, default="auto")
    p.add_argument("--k-max", type=int, default=128, help="upper bound for --k auto")
    p.add_argument("--lsh-bits", type=int, default=8)
    p.add_argument("--lsh-tables", type=int, default=4)
    p.add_argument("--leaf-capacity", type=int, default=DEFAULT_LEAF_CAPACITY)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--output", dest="output_path")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (default: all cores; NETCOM_THREADS overrides)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netcom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    det = sub.add_parser("detect", help="detect communities and score them")
    _add_common(det)
    det.add_argument("--backend", choices=[b.value for b in Backend], default="exact")
    det.add_argument("--format", choices=["json", "csv"], default="json")

    ben = sub.add_parser("bench", help="compare backends on one graph")
    _add_common(ben)
    ben.add_argument("--backends", default="exact,mtree,lsh", help="comma-separated backend list")
    ben.add_argument("--queries", type=int, default=DEFAULT_QUERIES,
                     help="nearest-neighbor queries per backend (0 = every node)")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        input_path=args.input,
        directed=args.directed,
        lam=args.lam,
        per_node_lambda=args.per_node_lambda,
        sigma=args.sigma,
        phi=args.phi,
        k=args.k,
        k_max=args.k_max,
        backend=getattr(args, "backend", "exact"),
        lsh_bits=args.lsh_bits,
        lsh_tables=args.lsh_tables,
        leaf_capacity=args.leaf_capacity,
        seed=args.seed,
        max_iters=args.max_iters,
        output_path=args.output_path,
        format=getattr(args, "format", "json"),
        threads=args.threads,
    )


def _threads(cfg: RunConfig) -> int:
    if os.environ.get("NETCOM_THREADS"):
        return default_threads()
    return cfg.threads or default_threads()


def _load(cfg: RunConfig) -> Graph:
    path = Path(cfg.input_path)
    if not path.is_file():
        raise FileNotFoundError(f"cannot read input file {cfg.input_path}")
    return parse_edge_list(path, cfg.directed)


def _embed(g: Graph, cfg: RunConfig) -> tuple[Embedding, float]:
    lam = auto_lambda(g) if cfg.lam == "auto" else float(cfg.lam)
    ecfg = EmbedConfig(lam=lam, sigma=cfg.sigma, phi=cfg.phi, per_node=cfg.per_node_lambda)
    if not ecfg.metric_guaranteed and cfg.backend == Backend.MTREE.value:
        log.warning("sigma=%s phi=%s is not a guaranteed metric; M-tree results may be inexact",
                    cfg.sigma, cfg.phi)
    return Embedding.from_graph(g, ecfg), lam


def _resolve_k(emb: Embedding, cfg: RunConfig) -> int:
    n = len(emb)
    if cfg.k == "auto":
        return select_k(emb, min(cfg.k_max, n), cfg.seed)
    if cfg.k > n:
        raise UsageError(f"--k {cfg.k} exceeds the node count {n}")
    return int(cfg.k)


def run_pipeline(cfg: RunConfig) -> dict:
    """Parse, embed, detect and score; returns the JSON-ready result document."""
    t0 = time.perf_counter()
    g = _load(cfg)
    if g.node_count == 0:
        raise UsageError("input graph has no nodes")
    emb, lam = _embed(g, cfg)
    k = _resolve_k(emb, cfg)
    lsh = LshParams(cfg.lsh_bits, cfg.lsh_tables, "median", cfg.seed)
    part = detect_communities(
        emb, k, cfg.backend, cfg.seed, cfg.max_iters,
        lsh=lsh, leaf_capacity=cfg.leaf_capacity, threads=_threads(cfg),
    )
    runtime_ms = int(round((time.perf_counter() - t0) * 1000))
    report = quality_report(g, part, runtime_ms=runtime_ms, backend=cfg.backend)
    report.extra = {
        "lambda": lam,
        "node_count": g.node_count,
        "edge_count": g.edge_count,
        "cost": part.cost,
        "cost_history": list(part.history),
        "k_selected": cfg.k == "auto",
    }
    labels = g.labels.tolist()
    nodes = [{"id": labels[u], "community": int(c)} for u, c in enumerate(part.assignment.tolist())]
    return {"nodes": nodes, "report": report.to_dict(), "config": cfg.to_dict()}


def _write(doc: dict, cfg: RunConfig) -> None:
    if cfg.format == "csv":
        out = Path(cfg.output_path)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "community"])
            for row in doc["nodes"]:
                w.writerow([row["id"], row["community"]])
        sidecar = out.with_name(out.name + ".report.json")
        sidecar.write_text(json.dumps({"report": doc["report"], "config": doc["config"]}, indent=2) + "\n")
        return
    text = json.dumps(doc, indent=2) + "\n"
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _bench(cfg: RunConfig, backends: list[str], queries: int) -> list:
    g = _load(cfg)
    if g.node_count == 0:
        raise UsageError("input graph has no nodes")
    emb, _ = _embed(g, cfg)
    k = _resolve_k(emb, cfg)
    rows = benchmark_compare(
        emb, backends, k, graph=g,
        queries=None if queries == 0 else queries,
        seed=cfg.seed,
        lsh=LshParams(cfg.lsh_bits, cfg.lsh_tables, "median", cfg.seed),
        leaf_capacity=cfg.leaf_capacity,
        max_iters=cfg.max_iters,
        threads=_threads(cfg),
    )
    print(format_table(rows))
    if cfg.output_path:
        Path(cfg.output_path).write_text(
            json.dumps({"rows": [r.to_dict() for r in rows], "config": cfg.to_dict(), "k": k}, indent=2) + "\n"
        )
    return rows


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = _run_config(args)
    try:
        cfg.validate()
        if args.command == "detect":
            _write(run_pipeline(cfg), cfg)
        else:
            names = [b.strip() for b in args.backends.split(",") if b.strip()]
            bad = [b for b in names if b not in {x.value for x in Backend}]
            if not names or bad:
                raise UsageError(f"--backends needs names from exact,mtree,lsh; got {args.backends!r}")
            if args.queries < 0:
                raise UsageError("--queries must be >= 0")
            rows = _bench(cfg, names, args.queries)
            if all(r.error for r in rows):
                return EXIT_FAILURE
    except UsageError as exc:
        print(f"netcom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"netcom: error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except (NetcomError, UnicodeDecodeError) as exc:
        print(f"netcom: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
