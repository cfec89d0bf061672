"""Command-line pipeline.

Subcommands cover the full workflow: synthetic data generation,
vocabulary statistics, embedding training, fingerprint dumps, split
construction, train/eval runs and the two ablation sweeps.  Every
subcommand takes a seed where randomness is involved; rerunning with the
same inputs and seed reproduces every output file byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .corpus import build_corpus, unigram_distribution
from .errors import GraphDRError
from .evaluation import (
    ablation_sweep,
    auroc,
    cold_split,
    evaluate_split,
    random_split,
)
from .fingerprint import morgan_fingerprint
from .molgraph import load_drug_graphs
from .pairscore import (
    ContextFeatureSet,
    DrugFeatureSet,
    PairScorerConfig,
    TripleDataset,
    predict,
    train_pairscore,
)
from .skipgram import SkipgramConfig, export_embeddings, import_embeddings, train
from .substructure import Inducer, build_vocabulary, frequency_vector
from .synth import generate_dataset


class _StageError(GraphDRError):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise GraphDRError(f"bad seed list {text!r}") from None
    if not seeds:
        raise GraphDRError("seed list is empty")
    return seeds


def _parse_split(text: str):
    """``random:RATIO`` or ``cold`` into (kind, ratio)."""
    if text == "cold":
        return "cold", None
    if text.startswith("random:"):
        try:
            ratio = float(text.split(":", 1)[1])
        except ValueError:
            raise GraphDRError(f"bad split ratio in {text!r}") from None
        return "random", ratio
    raise GraphDRError(f"bad split spec {text!r}; expected 'random:RATIO' or 'cold'")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_graph_list(path):
    graphs = load_drug_graphs(path)
    return list(graphs.values()), list(graphs)


def cmd_synth(args) -> int:
    out = _out_dir(args)
    drug_rows, triples = generate_dataset(
        args.drugs, args.contexts, args.triples, args.seed
    )
    drugs_path = out / "drugs.tsv"
    with open(drugs_path, "w", encoding="utf-8") as handle:
        handle.write("# synthetic drugs\n")
        for drug_id, smiles in drug_rows:
            handle.write(f"{drug_id}\t{smiles}\n")
    triples_path = out / "triples.csv"
    TripleDataset(triples).to_csv(triples_path)
    labels = np.array([t.label for t in triples])
    print(f"wrote {drugs_path} ({len(drug_rows)} drugs)")
    print(f"wrote {triples_path} ({len(triples)} triples, positive rate {labels.mean():.3f})")
    return 0


def cmd_vocab(args) -> int:
    inducer = Inducer.parse(args.inducer)
    graphs, _ = _load_graph_list(args.drugs)
    vocab, multisets = build_vocabulary(graphs, inducer)
    unique_per_graph = np.array([len(ms.counts) for ms in multisets])
    print(f"graphs: {len(graphs)}")
    print(f"inducer: {inducer.tag}")
    print(f"vocabulary size: {len(vocab)}")
    print(
        "unique patterns per graph: "
        f"min {unique_per_graph.min()} "
        f"mean {unique_per_graph.mean():.2f} "
        f"max {unique_per_graph.max()}"
    )
    if args.dump_freq:
        with open(args.dump_freq, "w", encoding="utf-8") as handle:
            for ms in multisets:
                vec = frequency_vector(ms, vocab)
                handle.write(ms.graph_id + "\t" + " ".join(map(str, vec)) + "\n")
        print(f"wrote {args.dump_freq}")
    return 0


def cmd_embed(args) -> int:
    out = _out_dir(args)
    inducer = Inducer.parse(args.inducer)
    config = SkipgramConfig(
        z=args.dim,
        epochs=args.sg_epochs,
        negatives=args.negatives,
        learning_rate=args.lr,
        lr_decay="linear" if args.lr_decay else "none",
        unigram_exponent=args.unigram_exponent,
        seed=args.seed,
    )
    stage = "parse"
    try:
        graphs, ids = _load_graph_list(args.drugs)
        stage = "induce"
        vocab, multisets = build_vocabulary(graphs, inducer)
        stage = "corpus"
        corpus = build_corpus(multisets, vocab)
        table = unigram_distribution(corpus, config.unigram_exponent)
        stage = "train"
        emb, history = train(corpus, table, config)
        stage = "export"
        path = out / "embeddings.txt"
        export_embeddings(emb, ids, path, inducer.tag)
    except GraphDRError as exc:
        raise _StageError(stage, exc) from exc
    print(f"corpus: {corpus.total()} occurrences over {len(vocab)} patterns")
    print(f"final epoch mean loss: {history[-1]:.6f}")
    print(f"wrote {path}")
    return 0


def cmd_fp(args) -> int:
    out = _out_dir(args)
    graphs, ids = _load_graph_list(args.drugs)
    path = out / "fingerprints.tsv"
    with open(path, "w", encoding="utf-8") as handle:
        for g in graphs:
            fp = morgan_fingerprint(g, radius=args.radius, n_bits=args.bits)
            handle.write(f"{g.source_id}\t{np.packbits(fp.bits).tobytes().hex()}\n")
    print(f"wrote {path} ({len(ids)} fingerprints, {args.bits} bits)")
    return 0


def _fingerprint_map(graphs):
    return {g.source_id: morgan_fingerprint(g) for g in graphs}


def cmd_split(args) -> int:
    out = _out_dir(args)
    dataset = TripleDataset.from_csv(args.triples)
    kind, ratio = _parse_split(args.split)
    if kind == "random":
        plan = random_split(dataset, ratio, args.seed)
    else:
        if not args.drugs:
            raise GraphDRError("cold split needs --drugs")
        graphs, _ = _load_graph_list(args.drugs)
        plan = cold_split(_fingerprint_map(graphs), dataset)
        print(
            f"clusters: |A| = {len(plan.metadata['cluster_a'])}, "
            f"|B| = {len(plan.metadata['cluster_b'])}"
        )
    train_path, test_path = out / "train.csv", out / "test.csv"
    dataset.subset(plan.train_indices).to_csv(train_path)
    dataset.subset(plan.test_indices).to_csv(test_path)
    print(f"wrote {train_path} ({len(plan.train_indices)} triples)")
    print(f"wrote {test_path} ({len(plan.test_indices)} triples)")
    return 0


def _load_features(args, dataset) -> tuple[DrugFeatureSet, ContextFeatureSet | None]:
    mode = args.mode
    fingerprints = {}
    embeddings = None
    if mode in ("fp", "fp+dr"):
        graphs, _ = _load_graph_list(args.drugs)
        fingerprints = {
            g.source_id: morgan_fingerprint(g).bits.astype(np.float64) for g in graphs
        }
    if mode in ("dr", "fp+dr"):
        if not args.embeddings:
            raise GraphDRError(f"mode {mode!r} needs --embeddings")
        ids, matrix = import_embeddings(args.embeddings)
        embeddings = {drug_id: matrix[i] for i, drug_id in enumerate(ids)}
    if args.no_context:
        contexts = None
    elif args.context_features:
        contexts = ContextFeatureSet.from_csv(args.context_features)
    else:
        contexts = ContextFeatureSet.one_hot(dataset.contexts())
    return DrugFeatureSet(fingerprints=fingerprints, embeddings=embeddings), contexts


def cmd_train_eval(args) -> int:
    out = _out_dir(args)
    dataset = TripleDataset.from_csv(args.triples)
    kind, ratio = _parse_split(args.split)
    seeds = _parse_seeds(args.seeds)
    drugs, contexts = _load_features(args, dataset)
    base = PairScorerConfig(
        feature_mode=args.mode,
        use_context=not args.no_context,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        dropout=args.dropout,
    )
    cold_plan = None
    if kind == "cold":
        graphs, _ = _load_graph_list(args.drugs)
        cold_plan = cold_split(_fingerprint_map(graphs), dataset)
        print(
            f"cold split: |A| = {len(cold_plan.metadata['cluster_a'])}, "
            f"|B| = {len(cold_plan.metadata['cluster_b'])}, "
            f"train = {len(cold_plan.train_indices)}, "
            f"test = {len(cold_plan.test_indices)}"
        )
    rows = []
    for seed in seeds:
        plan = cold_plan if cold_plan is not None else random_split(dataset, ratio, seed)
        metrics = evaluate_split(dataset, plan, drugs, contexts, replace(base, seed=seed))
        rows.append((seed, metrics["test_auroc"]))
        print(f"seed {seed}: test AUROC {metrics['test_auroc']:.4f}")
    values = np.array([v for _, v in rows])
    if len(values) > 1:
        print(f"mean test AUROC: {values.mean():.4f} +/- {values.std(ddof=1):.4f}")
    path = out / "metrics.csv"
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["seed", "test_auroc"])
        for seed, value in rows:
            writer.writerow([seed, f"{value:.17g}"])
    print(f"wrote {path}")
    return 0


def cmd_ablate(args) -> int:
    out = _out_dir(args)
    if args.aggregate:
        return _aggregate_ablation(args.aggregate, out)
    if not args.triples or not args.drugs:
        raise GraphDRError("sweeps need --triples and --drugs")
    dataset = TripleDataset.from_csv(args.triples)
    graphs, _ = _load_graph_list(args.drugs)
    inducer = Inducer.parse(args.inducer)
    embeddings_needed = args.mode in ("dr", "fp+dr")
    if not embeddings_needed:
        raise GraphDRError("ablation sweeps vary the embedding; use mode dr or fp+dr")
    sg = SkipgramConfig(
        z=args.dim,
        epochs=args.sg_epochs,
        negatives=args.negatives,
        seed=args.seed,
    )
    scorer = PairScorerConfig(
        feature_mode=args.mode,
        use_context=not args.no_context,
        epochs=args.epochs,
        batch_size=args.batch_size,
    )
    rows = ablation_sweep(
        args.kind,
        graphs,
        dataset,
        inducer,
        sg,
        scorer,
        seeds=_parse_seeds(args.seeds),
    )
    path = out / f"ablation_{args.kind}.csv"
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["setting", "seed", "test_auroc"])
        for setting, seed, value in rows:
            writer.writerow([setting, seed, f"{value:.17g}"])
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _aggregate_ablation(source: str, out: Path) -> int:
    by_setting: dict[int, list[float]] = {}
    with open(source, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["setting", "seed", "test_auroc"]:
            raise GraphDRError(f"{source}: not an ablation CSV")
        for row in reader:
            by_setting.setdefault(int(row[0]), []).append(float(row[2]))
    path = out / (Path(source).stem + "_summary.csv")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["setting", "mean_auroc", "std_auroc"])
        for setting in sorted(by_setting):
            values = np.array(by_setting[setting])
            std = values.std(ddof=1) if len(values) > 1 else 0.0
            writer.writerow([setting, f"{values.mean():.17g}", f"{std:.17g}"])
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdr",
        description="Graph-level drug representations and pair scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(
            name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )
        p.set_defaults(func=fn)
        return p

    p = add("synth", cmd_synth, "generate a synthetic drugs/triples dataset")
    p.add_argument("--drugs", type=int, default=50, help="number of drugs (>= 10)")
    p.add_argument("--contexts", type=int, default=5, help="number of contexts")
    p.add_argument("--triples", type=int, default=2000, help="number of labeled triples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = add("vocab", cmd_vocab, "pattern vocabulary statistics")
    p.add_argument("--drugs", required=True, help="drug TSV file")
    p.add_argument("--inducer", default="wl:3", help="wl:K or sp")
    p.add_argument("--dump-freq", default=None, help="write per-drug count vectors here")

    p = add("embed", cmd_embed, "train graph embeddings")
    p.add_argument("--drugs", required=True, help="drug TSV file")
    p.add_argument("--inducer", default="wl:3", help="wl:K or sp")
    p.add_argument("--dim", type=int, default=64, help="embedding dimension")
    p.add_argument("--sg-epochs", type=int, default=1000, help="training epochs")
    p.add_argument("--negatives", type=int, default=10, help="negative samples per event")
    p.add_argument("--lr", type=float, default=0.025, help="initial learning rate")
    p.add_argument(
        "--lr-decay",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="decay the learning rate linearly over training",
    )
    p.add_argument("--unigram-exponent", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = add("fp", cmd_fp, "write fingerprints as hex strings")
    p.add_argument("--drugs", required=True, help="drug TSV file")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--out", required=True, help="output directory")

    p = add("split", cmd_split, "materialize a train/test split")
    p.add_argument("--triples", required=True, help="triple CSV file")
    p.add_argument("--drugs", help="drug TSV file (required for cold splits)")
    p.add_argument("--split", default="random:0.5", help="random:RATIO or cold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = add("train-eval", cmd_train_eval, "train the pair scorer and report AUROC")
    p.add_argument("--triples", required=True, help="triple CSV file")
    p.add_argument("--drugs", required=True, help="drug TSV file")
    p.add_argument("--embeddings", default=None, help="embedding file for dr modes")
    p.add_argument("--mode", default="fp+dr", choices=["fp", "dr", "fp+dr"])
    p.add_argument("--split", default="random:0.5", help="random:RATIO or cold")
    p.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seed list")
    p.add_argument("--no-context", action="store_true", help="drop the context encoder")
    p.add_argument("--context-features", default=None, help="context feature CSV")
    p.add_argument("--epochs", type=int, default=250)
    p.add_argument("--batch-size", type=int, default=8192)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--out", required=True, help="output directory")

    p = add("ablate", cmd_ablate, "embedding dimension / epoch sweeps")
    p.add_argument("--kind", choices=["dimension", "epochs"], default="dimension")
    p.add_argument("--triples", help="triple CSV file")
    p.add_argument("--drugs", help="drug TSV file")
    p.add_argument("--inducer", default="wl:3", help="wl:K or sp")
    p.add_argument("--mode", default="fp+dr", choices=["dr", "fp+dr"])
    p.add_argument("--dim", type=int, default=64, help="base embedding dimension")
    p.add_argument("--sg-epochs", type=int, default=1000, help="base embedding epochs")
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--epochs", type=int, default=250, help="scorer epochs")
    p.add_argument("--batch-size", type=int, default=8192)
    p.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seed list")
    p.add_argument("--no-context", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="embedding training seed")
    p.add_argument("--aggregate", default=None, help="summarize an existing sweep CSV")
    p.add_argument("--out", required=True, help="output directory")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphDRError, ValueError) as exc:
        print(f"[{args.command}] error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"[{args.command}] i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
