"""Command-line front end: ``gpk {stirling,predict,sample,verify}``.

Exit codes: 0 success, 2 usage error, 3 validation failure (bad model,
sizes or table file), 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import crp
from .gibbs import DirichletProcess, GibbsModel, PartitionState, PitmanYor, load_table
from .stirling import noncentral_stirling, stirling, stirling_table
from .verify import SUITES, run_suite

log = logging.getLogger("gpk")

EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_VERIFY = 4

SHARD_SIZE = 4096


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model_kind: str = "py"
    alpha: float = 0.5
    theta: float = 0.5
    table_path: str | None = None
    seed: int | None = None
    output_format: str = "json"
    output: str | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        common = {"command", "model", "alpha", "theta", "table", "seed", "format", "output", "func"}
        return cls(
            command=args.command,
            model_kind=getattr(args, "model", "py"),
            alpha=getattr(args, "alpha", 0.5),
            theta=getattr(args, "theta", 0.5),
            table_path=getattr(args, "table", None),
            seed=getattr(args, "seed", None),
            output_format=getattr(args, "format", "json"),
            output=getattr(args, "output", None),
            params={k: v for k, v in vars(args).items() if k not in common},
        )

    def build_model(self) -> GibbsModel:
        if self.model_kind == "py":
            return PitmanYor(self.alpha, self.theta)
        if self.model_kind == "dp":
            return DirichletProcess(self.theta)
        if self.model_kind == "table":
            if not self.table_path:
                raise UsageError("--model table needs --table PATH")
            return load_table(self.table_path)
        raise UsageError(f"unknown model kind {self.model_kind!r}")


def _emit(cfg: RunConfig, text: str):
    if cfg.output:
        with open(cfg.output, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _pmf_doc(pmf, key=None):
    support = [list(x) if isinstance(x, tuple) else x for x in pmf.support]
    doc = {"support": support, "probs": list(pmf.probs), "sum": pmf.total}
    if key:
        doc["labels"] = key
    return doc


def cmd_stirling(cfg: RunConfig) -> int:
    n, k, gamma = cfg.params["n"], cfg.params["k"], cfg.params.get("gamma")
    if n < 0 or k < 0 or k > n:
        raise UsageError(f"need 0 <= k <= n, got n={n}, k={k}")
    if not cfg.alpha < 1:
        raise ValueError(f"alpha must be < 1, got {cfg.alpha}")
    if gamma is None:
        value = stirling(stirling_table(cfg.alpha, n), n, k)
    else:
        value = noncentral_stirling(cfg.alpha, gamma, n, k)
    if cfg.output_format == "json":
        doc = {"n": n, "k": k, "alpha": cfg.alpha, "gamma": gamma, "value": float(value),
               "sign": value.sign, "log_mag": value.log_mag if value.sign else None}
        _emit(cfg, json.dumps(doc) + "\n")
    else:
        _emit(cfg, f"{float(value):.15g}\nsign={value.sign} log_mag={value.log_mag!r}\n")
    return 0


def predict_document(model: GibbsModel, state: PartitionState, m: int) -> dict:
    """Everything ``gpk predict`` reports, as a JSON-ready dict."""
    kstar = crp.pmf_kstar(model, state, m)
    conditional = {
        str(j): _pmf_doc(crp.pmf_s_given_kstar(model, state, m, j))
        for j, p in kstar.items()
        if p > 0
    }
    doc = {
        "model": _model_doc(model),
        "sizes": list(state.sizes),
        "n": state.n,
        "k": state.k,
        "m": m,
        "joint_kstar_s": _pmf_doc(crp.joint_kstar_s(model, state, m), ["kstar", "s"]),
        "pmf_s": _pmf_doc(crp.pmf_s(model, state, m)),
        "pmf_kstar": _pmf_doc(kstar),
        "pmf_s_given_kstar": conditional,
        "expected_s": crp.expected_s(model, state, m),
        "expected_kstar": kstar.mean(),
        "prob_all_new": crp.prob_all_new(model, state, m),
        "prob_all_old": crp.prob_all_old(model, state, m),
    }
    if state.k:
        rep = crp.check_conjecture8(model, state, m)
        doc["conjecture8"] = {
            "expected_s": rep.expected_s,
            "target": rep.target,
            "rel_gap": rep.rel_gap,
            "pmf_gap_exact_polya": _finite_or_none(rep.pmf_gap_exact_polya),
            "pmf_gap_exact_shifted": _finite_or_none(rep.pmf_gap_exact_shifted),
            "pmf_gap_polya_shifted": _finite_or_none(rep.pmf_gap_polya_shifted),
        }
    else:
        doc["conjecture8"] = None
    return doc


def _finite_or_none(x):
    return x if math.isfinite(x) else None


def _model_doc(model):
    if isinstance(model, PitmanYor):
        kind = "dp" if isinstance(model, DirichletProcess) else "py"
        return {"kind": kind, "alpha": model.alpha, "theta": model.theta}
    return {"kind": "table", "alpha": model.alpha, "n_max": model.n_max}


def cmd_predict(cfg: RunConfig) -> int:
    model = cfg.build_model()
    state = PartitionState.parse(cfg.params["sizes"])
    m = cfg.params["m"]
    if m < 0:
        raise UsageError("--m must be non-negative")
    doc = predict_document(model, state, m)
    _emit(cfg, json.dumps(doc, indent=2, allow_nan=False) + "\n")
    return 0


def _sample_shard(args):
    model, state, m, seed, shard, count = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(shard,)))
    return crp.sample_groups(model, state, m, count, rng)


def sample_rows(model, state, m, seed, reps, workers=1):
    """Draw ``reps`` groups; shard ``i`` uses seed sequence ``(seed, i)`` so the
    output does not depend on ``workers``."""
    jobs = []
    for shard, start in enumerate(range(0, reps, SHARD_SIZE)):
        jobs.append((model, state, m, seed, shard, min(SHARD_SIZE, reps - start)))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_sample_shard, jobs))
    else:
        results = [_sample_shard(job) for job in jobs]
    rep = 0
    for outcomes in results:
        for o in outcomes:
            final = o.apply(state)
            yield rep, final, o
            rep += 1


def cmd_sample(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise UsageError("sample needs --seed")
    model = cfg.build_model()
    state = PartitionState.parse(cfg.params["sizes"])
    m, n_total = cfg.params.get("m"), cfg.params.get("n_total")
    if (m is None) == (n_total is None):
        raise UsageError("give exactly one of --m or --n-total")
    if m is None:
        m = n_total - state.n
    if m < 0:
        raise UsageError("group size would be negative")
    reps = cfg.params["reps"]
    if reps < 0:
        raise UsageError("--reps must be non-negative")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rep", "sizes", "kstar", "s"])
    for rep, final, o in sample_rows(model, state, m, cfg.seed, reps, cfg.params.get("workers", 1)):
        writer.writerow([rep, " ".join(map(str, final.sizes)), o.kstar, o.s])
    _emit(cfg, buf.getvalue())
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    suite = cfg.params["suite"]
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(sorted(SUITES))}")
    model = cfg.build_model()
    params = {k: cfg.params.get(k) for k in ("n", "m", "nmax", "tol")}
    checks = run_suite(suite, model, **params)
    lines = [c.line() for c in checks]
    ok = all(c.passed for c in checks)
    lines.append(f"suite {suite}: {'PASS' if ok else 'FAIL'}")
    _emit(cfg, "\n".join(lines) + "\n")
    return 0 if ok else EXIT_VERIFY


def _add_model_args(p):
    p.add_argument("--model", choices=["py", "dp", "table"], default="py")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--table", help="JSON V-table file, for --model table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpk", description="Gibbs partitions and group Chinese restaurant laws")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stirling", help="generalized Stirling number S(n, k; alpha[, gamma])")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_stirling)

    p = sub.add_parser("predict", help="exact laws of K* and S for an arriving group")
    _add_model_args(p)
    p.add_argument("--sizes", default="", help="comma list of block sizes, e.g. 3,2,1")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sample", help="simulate the construction, one CSV row per replicate")
    _add_model_args(p)
    p.add_argument("--sizes", default="")
    p.add_argument("--m", type=int)
    p.add_argument("--n-total", type=int, dest="n_total")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="run an invariant suite against the enumeration oracles")
    _add_model_args(p)
    p.add_argument("--suite", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("GPK_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig.from_args(args)
    log.debug("config %s", cfg)
    try:
        return args.func(cfg)
    except UsageError as e:
        parser.error(str(e))
    except (ValueError, IndexError, OSError) as e:
        print(f"gpk: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
