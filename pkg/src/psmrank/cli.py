"""Command-line surface: score, align, rank, selftest.

Every score record carries the seed and method parameters that produced it,
and reruns with identical inputs produce byte-identical records (the run
header's wall time is the only field that may differ).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import fixtures
from .align import brute_force_align, ctc_total_log_prob, enumerate_alignments, viterbi_align
from .errors import PsmrankError, TooManyPoints
from .ingest import Manifest, PosteriorGrid, assemble_dataset, load_feature_dir, load_manifest, write_array
from .logme import evidence, logme_classification, logme_ctc
from .rankeval import build_report, spearman
from .swd import SwdConfig, swd_score
from .tsne import TsneConfig, tsne_score

_SOURCELESS_REFUSAL = (
    "method {method!r} compares target latents against a source domain, but the "
    "manifest declares no source_features; self-supervised setups trained on the "
    "target domain have no distinct source to compare against. Use --method logme "
    "or add source_features to the manifest."
)


def _config_hash(args) -> str:
    payload = {
        "method": args.method,
        "seed": args.seed,
        "projections": args.projections,
        "batch_size": args.batch_size,
        "perplexity": args.perplexity,
        "pool_mean": args.pool_mean,
        "tsne_points": args.tsne_points,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _dump_json(path, doc) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _score_logme(manifest: Manifest, candidate_id: str, args) -> dict:
    ds = assemble_dataset(manifest, candidate_id, pool_mean=args.pool_mean)
    if manifest.task_kind == "sequence":
        if args.pool_mean:
            raise PsmrankError("--pool-mean applies to classification manifests only")
        if ds.posteriors is None:
            raise PsmrankError(
                "sequence scoring needs posterior grids; supply a posteriors directory "
                "or declare the \"uniform\" fallback in the manifest")
        alignments = [viterbi_align(grid, labels)
                      for grid, (_, labels) in zip(ds.posteriors, ds.labels.utterances)]
        result = logme_ctc(ds.features, alignments, ds.labels.vocab_size)
    else:
        if any(f.n != 1 for f in ds.features):
            raise PsmrankError(
                "classification utterances have multiple frames; pass --pool-mean "
                "to average frames into one vector per utterance")
        stacked = np.concatenate([f.data for f in ds.features], axis=0)
        labels = np.array([labs[0] for _, labs in ds.labels.utterances])
        result = logme_classification(stacked, labels, ds.labels.vocab_size)
    return {
        "candidate_id": candidate_id,
        "method": "logme",
        "score": result.score,
        "per_class": list(result.per_class),
        "flags": list(result.flags),
        "n": result.n_samples,
        "n_classes": result.n_classes,
        "skipped_classes": list(result.skipped_classes),
        "seed": args.seed,
    }


def _score_swd(manifest: Manifest, candidate_id: str, args, source) -> dict:
    ds = assemble_dataset(manifest, candidate_id)
    cfg = SwdConfig(n_projections=args.projections, batch_size=args.batch_size,
                    seed=args.seed)
    return swd_score(source, ds.features, cfg).record(candidate_id)


def _score_tsne(manifest: Manifest, candidate_id: str, args, source) -> dict:
    ds = assemble_dataset(manifest, candidate_id)
    cfg = TsneConfig(perplexity=args.perplexity, seed=args.seed)
    try:
        if args.dump_embedding:
            ts, embedding = tsne_score(source, ds.features, cfg, return_embedding=True,
                                       max_points_per_domain=args.tsne_points)
            out_dir = Path(args.dump_embedding)
            out_dir.mkdir(parents=True, exist_ok=True)
            write_array(out_dir / f"{candidate_id}.npy", embedding)
        else:
            ts = tsne_score(source, ds.features, cfg,
                            max_points_per_domain=args.tsne_points)
    except TooManyPoints as exc:
        raise TooManyPoints(f"{exc}; lower --tsne-points to subsample each domain") from exc
    return ts.record(candidate_id)


def run_score(args) -> int:
    start = time.monotonic()
    manifest = load_manifest(args.manifest)
    source = None
    if args.method in ("swd", "tsne"):
        if manifest.source_features is None:
            print(_SOURCELESS_REFUSAL.format(method=args.method), file=sys.stderr)
            return 2
        source = load_feature_dir(manifest.source_features)

    def score_one(candidate_id: str):
        if args.method == "logme":
            return _score_logme(manifest, candidate_id, args)
        if args.method == "swd":
            return _score_swd(manifest, candidate_id, args, source)
        return _score_tsne(manifest, candidate_id, args, source)

    ids = [c.candidate_id for c in manifest.candidates]
    results: dict[str, dict] = {}
    errors: list[dict] = []
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futures = {cid: pool.submit(score_one, cid) for cid in ids}
        for cid in ids:
            try:
                results[cid] = futures[cid].result()
            except PsmrankError as exc:
                errors.append({"candidate_id": cid, "error": type(exc).__name__,
                               "message": str(exc)})
                print(f"error: candidate {cid}: {exc}", file=sys.stderr)

    doc = {
        "run": {
            "subcommand": "score",
            "method": args.method,
            "manifest": str(args.manifest),
            "seed": args.seed,
            "config_hash": _config_hash(args),
            "wall_time_s": round(time.monotonic() - start, 6),
        },
        "scores": [results[cid] for cid in ids if cid in results],
        "errors": errors,
    }
    _dump_json(args.output, doc)
    return 0 if not errors else 1


def run_align(args) -> int:
    manifest = load_manifest(args.manifest)
    lines = []
    failures = 0
    for cand in manifest.candidates:
        try:
            ds = assemble_dataset(manifest, cand.candidate_id)
            if ds.posteriors is None:
                raise PsmrankError("candidate declares no posteriors (or uniform fallback)")
            for grid, (utt_id, labels) in zip(ds.posteriors, ds.labels.utterances):
                ali = viterbi_align(grid, labels)
                lines.append(json.dumps({
                    "candidate_id": cand.candidate_id,
                    "utt_id": utt_id,
                    "assigned": list(ali.assigned),
                    "log_prob": ali.path_log_prob,
                }, sort_keys=True))
        except PsmrankError as exc:
            failures += 1
            print(f"error: candidate {cand.candidate_id}: {exc}", file=sys.stderr)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + ("\n" if lines else ""))
    return 0 if failures == 0 else 1


def run_rank(args) -> int:
    scores_by_method: dict[str, list[dict]] = {}
    for path in args.scores:
        doc = json.loads(Path(path).read_text())
        for rec in doc.get("scores", []):
            scores_by_method.setdefault(rec["method"], []).append(rec)
    ground_truth = json.loads(Path(args.ground_truth).read_text())
    report = build_report(scores_by_method, ground_truth, direction=args.direction)
    if args.output:
        _dump_json(args.output, report.to_json())
    print(report.format_table())
    return 0


def _random_grid(rng, frames: int, vocab_size: int) -> PosteriorGrid:
    raw = rng.standard_normal((frames, vocab_size + 1))
    lp = raw - np.log(np.exp(raw).sum(axis=1, keepdims=True))
    return PosteriorGrid(lp)


def run_selftest(args=None) -> int:
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except AssertionError as exc:
            checks.append((name, False, str(exc)))

    def benchmark(name, rank_columns, expected_rho, reference_p):
        ft = rank_columns["ft"]
        for method, expected in expected_rho.items():
            res = spearman(np.asarray(ft, float), np.asarray(rank_columns[method], float))
            assert abs(res.rho - expected) < 5e-4, \
                f"{name}/{method}: rho {res.rho:.6f} != {expected}"
            ref = reference_p[method]
            assert ref / 2 <= res.p_value <= ref * 2, \
                f"{name}/{method}: p {res.p_value:.2e} not within 2x of {ref:.0e}"

    check("conformer17 benchmark correlations",
          lambda: benchmark("conformer17", fixtures.CONFORMER17_RANKS,
                            fixtures.CONFORMER17_EXPECTED_RHO,
                            fixtures.CONFORMER17_REFERENCE_P))
    check("ssl12 benchmark correlation",
          lambda: benchmark("ssl12", fixtures.SSL12_RANKS,
                            fixtures.SSL12_EXPECTED_RHO,
                            fixtures.SSL12_REFERENCE_P))

    def analytic_evidence():
        got = evidence(np.ones((2, 1)), np.zeros(2), 1.0, 1.0)
        want = -np.log(2 * np.pi) - 0.5 * np.log(3.0)
        assert abs(got - want) < 1e-10, f"evidence {got!r} != analytic {want!r}"

    check("one-dimensional evidence integral", analytic_evidence)

    def alignment_oracle():
        rng = np.random.default_rng(12345)
        grid = _random_grid(rng, frames=6, vocab_size=3)
        labels = [int(x) for x in rng.integers(0, 3, size=2)]
        vit = viterbi_align(grid, labels)
        ref = brute_force_align(grid, labels)
        assert vit.assigned == ref.assigned, "alignments differ"
        assert abs(vit.path_log_prob - ref.path_log_prob) < 1e-9, "path scores differ"
        total = ctc_total_log_prob(grid, labels)
        logps = [lp for _, _, lp in enumerate_alignments(grid, labels)]
        m = max(logps)
        lse = m + np.log(np.exp(np.asarray(logps) - m).sum())
        assert abs(total - lse) < 1e-9, "forward total differs from enumeration"

    check("forced alignment vs brute force", alignment_oracle)

    ok = True
    for name, passed, detail in checks:
        print(f"[{'pass' if passed else 'FAIL'}] {name}" + (f" — {detail}" if detail else ""))
        ok = ok and passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psmrank",
        description="Rank pre-trained speech model candidates by transferability scores.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    score = sub.add_parser("score", help="score every manifest candidate with one method")
    score.add_argument("--manifest", required=True)
    score.add_argument("--method", required=True, choices=("logme", "swd", "tsne"))
    score.add_argument("--output", required=True)
    score.add_argument("--seed", type=int, default=42)
    score.add_argument("--jobs", type=int, default=1)
    score.add_argument("--projections", type=int, default=128)
    score.add_argument("--batch-size", type=int, default=256)
    score.add_argument("--perplexity", type=float, default=None)
    score.add_argument("--pool-mean", action="store_true")
    score.add_argument("--tsne-points", type=int, default=1000,
                       help="per-domain subsample cap before the joint embedding")
    score.add_argument("--dump-embedding", default=None,
                       help="directory for per-candidate n x 2 embedding .npy files")
    score.set_defaults(func=run_score)

    align = sub.add_parser("align", help="write forced alignments as JSONL")
    align.add_argument("--manifest", required=True)
    align.add_argument("--output", required=True)
    align.set_defaults(func=run_align)

    rank = sub.add_parser("rank", help="rank score files against ground truth")
    rank.add_argument("scores", nargs="+", help="score JSON files from `psmrank score`")
    rank.add_argument("--ground-truth", required=True,
                      help="JSON object mapping candidate_id to metric value")
    rank.add_argument("--direction", choices=("lower_better", "higher_better"),
                      default="lower_better")
    rank.add_argument("--output", default=None)
    rank.set_defaults(func=run_rank)

    selftest = sub.add_parser("selftest", help="run the embedded fixture suite")
    selftest.set_defaults(func=run_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PsmrankError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
