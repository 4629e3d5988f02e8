"""Command-line entry point.

Subcommands cover the whole workflow: fetch abstracts, annotate, build the
corpus, recompute stats, sample relations for curation, score marks,
compute agreement, run the baseline, and serve the curation UI. A TOML
config file can preload any option; explicit flags win.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import evaluation, ingest, pipeline, service
from .errors import GPCorpusError
from .lexicon import (
    DEFAULT_MIN_SYNONYM_LEN,
    EntityType,
    load_lexicon,
    load_ontology_terms,
    merge_synonyms,
)
from .matcher import (
    MatcherOptions,
    annotate,
    compile_matcher,
    merge_annotations,
    recover_adjacent,
    write_annotations,
)

log = logging.getLogger(__name__)

PORT_ENV_VAR = "GPCORPUS_PORT"


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _merge(args: argparse.Namespace, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _require(args, config, key: str):
    value = _merge(args, config, key)
    if value is None:
        raise GPCorpusError(f"missing required option --{key.replace('_', '-')} "
                            f"(flag or config key '{key}')")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpcorpus",
        description="Build and evaluate a gene-phenotype relation corpus.",
    )
    parser.add_argument("--config", help="TOML config file; flags override its values")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    fetch = sub.add_parser("fetch", help="fetch abstracts into a fixture file")
    fetch.add_argument("--source", choices=["local", "remote"], default="local")
    fetch.add_argument("--fixture", help="fixture file for the local source")
    fetch.add_argument("--base-url", dest="base_url", help="remote service base URL")
    fetch.add_argument("--rate-limit", dest="rate_limit", type=float,
                       help="remote requests per second (default 3)")
    fetch.add_argument("--terms", nargs="+", help="keyword terms, all required to match")
    fetch.add_argument("--max-results", dest="max_results", type=int)
    fetch.add_argument("--english-only", dest="english_only", action="store_true", default=None)
    fetch.add_argument("--no-recent", dest="recency_order", action="store_false", default=None)
    fetch.add_argument("--out", help="output fixture path")

    annotate_cmd = sub.add_parser("annotate", help="run dictionary NER, write annotations TSV")
    _add_corpus_inputs(annotate_cmd, gold=False)
    annotate_cmd.add_argument("--out", help="annotations TSV path")

    build = sub.add_parser("build", help="run the full corpus pipeline")
    _add_corpus_inputs(build, gold=True)
    build.add_argument("--out", help="corpus TSV path")
    build.add_argument("--workers", type=int, help="parallel document workers (default 1)")

    stats = sub.add_parser("stats", help="recompute counts from a corpus TSV")
    stats.add_argument("--corpus", help="corpus TSV path")

    sample = sub.add_parser("sample", help="sample relations into curator assignments")
    sample.add_argument("--corpus", help="corpus TSV path")
    sample.add_argument("--n-total", dest="n_total", type=int)
    sample.add_argument("--curators", dest="n_curators", type=int, help="number of curators")
    sample.add_argument("--per-curator", dest="per_curator", type=int)
    sample.add_argument("--overlap", type=int)
    sample.add_argument("--seed", type=int)
    sample.add_argument("--out", help="assignment JSON path")

    score = sub.add_parser("score", help="score curator marks against corpus labels")
    score.add_argument("--marks", help="marks TSV path")
    score.add_argument("--corpus", help="corpus TSV path")
    score.add_argument("--dedupe", choices=["none", "majority"], default=None,
                       help="collapse multi-curator marks per uid by majority (ties U)")

    agreement = sub.add_parser("agreement", help="inter-curator agreement on the overlap set")
    agreement.add_argument("--marks", help="marks TSV path")
    agreement.add_argument("--assignment", help="assignment JSON path")

    baseline = sub.add_parser("baseline", help="co-occurrence (all-true) baseline metrics")
    baseline.add_argument("--corpus", help="corpus TSV with gold labels (test set)")

    serve = sub.add_parser("serve", help="run the curation HTTP service")
    serve.add_argument("--corpus", help="corpus TSV path")
    serve.add_argument("--assignment", help="assignment JSON path")
    serve.add_argument("--marks", help="marks file (appended to)")
    serve.add_argument("--port", type=int, help=f"port (or ${PORT_ENV_VAR})")
    serve.add_argument("--host")
    serve.add_argument("--static-dir", dest="static_dir", help="directory of UI static files")
    return parser


def _add_corpus_inputs(cmd: argparse.ArgumentParser, gold: bool) -> None:
    cmd.add_argument("--documents", help="documents fixture file")
    cmd.add_argument("--gene-lexicon", dest="gene_lexicon", help="gene lexicon TSV")
    cmd.add_argument("--gene-synonyms", dest="gene_synonyms", help="gene synonyms TSV")
    cmd.add_argument("--ontology-terms", dest="ontology_terms", help="phenotype term TSV")
    if gold:
        cmd.add_argument("--gold-relations", dest="gold_relations", help="gold relations TSV")
    cmd.add_argument("--min-len", dest="min_len", type=int,
                     help=f"minimum synonym length (default {DEFAULT_MIN_SYNONYM_LEN})")
    cmd.add_argument("--no-case-fold", dest="case_fold", action="store_false", default=None)


def _cmd_fetch(args, config) -> int:
    spec = ingest.QuerySpec(
        keyword_terms=list(_require(args, config, "terms")),
        max_results=int(_merge(args, config, "max_results", 1)),
        english_only=bool(_merge(args, config, "english_only", False)),
        recency_order=bool(_merge(args, config, "recency_order", True)),
    )
    ingest.validate_query(spec)
    if _merge(args, config, "source", "local") == "remote":
        source = ingest.EutilsClient(
            base_url=_require(args, config, "base_url"),
            rate_limit=float(_merge(args, config, "rate_limit", 3.0)),
        )
    else:
        source = ingest.LocalFixtureSource(_require(args, config, "fixture"))
    records = source.fetch_records(spec)
    out = _require(args, config, "out")
    ingest.write_fixture(records, out)
    print(f"fetched {len(records)} abstracts -> {out}")
    return 0


def _load_matchers(args, config):
    options = MatcherOptions(case_fold=bool(_merge(args, config, "case_fold", True)))
    gene_lexicon = load_lexicon(_require(args, config, "gene_lexicon"), EntityType.GENE)
    synonyms = _merge(args, config, "gene_synonyms")
    if synonyms:
        gene_lexicon = merge_synonyms(
            gene_lexicon, synonyms,
            int(_merge(args, config, "min_len", DEFAULT_MIN_SYNONYM_LEN)))
    terms = load_ontology_terms(_require(args, config, "ontology_terms"))
    return compile_matcher(gene_lexicon, options), compile_matcher(terms, options)


def _cmd_annotate(args, config) -> int:
    documents = ingest.filter_documents(
        ingest.load_documents(_require(args, config, "documents")))
    gene_matcher, phenotype_matcher = _load_matchers(args, config)
    annotations = []
    for doc in documents:
        for m in (gene_matcher, phenotype_matcher):
            first = annotate(doc, m)
            annotations.extend(merge_annotations(first, recover_adjacent(doc, m, first)))
    out = _require(args, config, "out")
    write_annotations(annotations, out)
    print(f"annotated {len(documents)} documents, {len(annotations)} mentions -> {out}")
    return 0


def _cmd_build(args, config) -> int:
    cfg = pipeline.PipelineConfig(
        documents_path=_require(args, config, "documents"),
        gene_lexicon_path=_require(args, config, "gene_lexicon"),
        gene_synonyms_path=_merge(args, config, "gene_synonyms"),
        ontology_terms_path=_require(args, config, "ontology_terms"),
        gold_relations_path=_require(args, config, "gold_relations"),
        output_path=_require(args, config, "out"),
        min_len=int(_merge(args, config, "min_len", DEFAULT_MIN_SYNONYM_LEN)),
        case_fold=bool(_merge(args, config, "case_fold", True)),
        workers=int(_merge(args, config, "workers", 1)),
    )
    stats = pipeline.run_pipeline(cfg)
    print(f"abstracts ingested:    {stats.abstracts_ingested}")
    print(f"abstracts kept:        {stats.abstracts_kept}")
    print(f"gene annotations:      {stats.gene_annotations}")
    print(f"phenotype annotations: {stats.phenotype_annotations}")
    print(f"relations known:       {stats.known}")
    print(f"relations unknown:     {stats.unknown}")
    print(f"relations total:       {stats.total}")
    print(f"corpus written to {cfg.output_path}")
    return 0


def _cmd_stats(args, config) -> int:
    stats = evaluation.corpus_stats(_require(args, config, "corpus"))
    print(f"abstracts:             {stats.abstracts}")
    print(f"gene annotations:      {stats.gene_annotations}")
    print(f"phenotype annotations: {stats.phenotype_annotations}")
    print(f"relations known:       {stats.known}")
    print(f"relations unknown:     {stats.unknown}")
    print(f"relations total:       {stats.total}")
    return 0


def _cmd_sample(args, config) -> int:
    labels = pipeline.load_corpus_labels(_require(args, config, "corpus"))
    assignment = evaluation.sample_for_curation(
        corpus_uids=labels.keys(),
        n_total=int(_require(args, config, "n_total")),
        n_curators=int(_require(args, config, "n_curators")),
        per_curator=int(_require(args, config, "per_curator")),
        overlap=int(_require(args, config, "overlap")),
        seed=int(_merge(args, config, "seed", 0)),
    )
    out = _require(args, config, "out")
    evaluation.save_assignment(assignment, out)
    print(f"sampled {len(assignment.all_uids())} relations for "
          f"{len(assignment.assignments)} curators "
          f"(overlap {len(assignment.overlap_set)}) -> {out}")
    return 0


def _cmd_score(args, config) -> int:
    marks = evaluation.collapse_last_write(
        evaluation.load_marks(_require(args, config, "marks")))
    if _merge(args, config, "dedupe", "none") == "majority":
        marks = evaluation.dedupe_majority(marks)
    labels = pipeline.load_corpus_labels(_require(args, config, "corpus"))
    counts, metrics = evaluation.score_curation(marks, labels)
    print(f"tp={counts.tp} fp={counts.fp} fn={counts.fn} tn={counts.tn} "
          f"excluded_uncertain={counts.excluded_uncertain}")
    print(metrics.formatted())
    return 0


def _cmd_agreement(args, config) -> int:
    marks = evaluation.collapse_last_write(
        evaluation.load_marks(_require(args, config, "marks")))
    assignment = evaluation.load_assignment(_require(args, config, "assignment"))
    value = evaluation.inter_curator_agreement(marks, assignment.overlap_set)
    print(f"agreement={value:.4f}")
    return 0


def _cmd_baseline(args, config) -> int:
    labels = pipeline.load_corpus_labels(_require(args, config, "corpus"))
    metrics = evaluation.baseline_cooccurrence(list(labels.values()))
    print(metrics.formatted())
    return 0


def _cmd_serve(args, config) -> int:
    port = _merge(args, config, "port")
    if port is None:
        port = os.environ.get(PORT_ENV_VAR, 8642)
    static_dir = _merge(args, config, "static_dir")
    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = bundled if bundled.is_dir() else None
    service.serve_curation(
        corpus_path=_require(args, config, "corpus"),
        assignment_path=_require(args, config, "assignment"),
        marks_path=_require(args, config, "marks"),
        port=int(port),
        host=str(_merge(args, config, "host", "127.0.0.1")),
        static_dir=static_dir,
    )
    return 0


_COMMANDS = {
    "fetch": _cmd_fetch,
    "annotate": _cmd_annotate,
    "build": _cmd_build,
    "stats": _cmd_stats,
    "sample": _cmd_sample,
    "score": _cmd_score,
    "agreement": _cmd_agreement,
    "baseline": _cmd_baseline,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _load_config(args.config)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args, config)
    except (GPCorpusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
