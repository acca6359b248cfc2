"""Command-line interface.

Subcommands map one-to-one onto the library layers: corpus filtering, index
building, suggestion, generation, judging, reliability statistics, diversity
matrices, corpus stats, and the HTTP service.  Exit codes: 0 success, 1
domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import ConfigError, EngineConfig, load_config
from .corpus import (
    ConlluParseError,
    FilterConfig,
    Level,
    apply_filters,
    corpus_stats,
    parse_conllu,
    serialize_conllu,
)
from .diversity import generalize_labels, similarity_matrix
from .engine import Engine, RawContextError
from .evalstats import (
    DegenerateRatings,
    LEVEL_SCALE_TAGS,
    RatingMatrix,
    filter_raters,
    icc31,
    labels_to_numeric,
    pairwise_agreement,
)
from .genclient import (
    ChatEndpoint,
    GenerationConfig,
    GenerationError,
    GenQuery,
    HttpChatEndpoint,
    JudgeParseError,
    ScriptedEndpoint,
    generate_examples,
    judge_block,
    make_block,
)
from .index import IndexError_, build_index, save_index
from .scoring import EmbeddingError

__all__ = ["main", "run_cli", "build_parser"]

log = logging.getLogger(__name__)

_DOMAIN_ERRORS = (
    ConfigError,
    ConlluParseError,
    IndexError_,
    EmbeddingError,
    GenerationError,
    JudgeParseError,
    DegenerateRatings,
    RawContextError,
    FileNotFoundError,
    ValueError,
    OSError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reibun",
        description="Suggest diverse, level-appropriate Japanese example sentences.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("filter-corpus", help="apply well-formedness filters to CoNLL-U")
    p.add_argument("--in", dest="infile", required=True, help="input CoNLL-U file")
    p.add_argument("--out", dest="outfile", required=True, help="filtered CoNLL-U output")
    p.add_argument("--min-tokens", type=int)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--max-punct-num-ratio", type=float)

    p = sub.add_parser("build-index", help="build and save the inverted index")
    p.add_argument("--in", dest="infile", required=True, help="filtered CoNLL-U corpus")
    p.add_argument("--out", dest="outfile", required=True, help="index file to write")

    p = sub.add_parser("suggest", help="suggest example sentences for a word")
    p.add_argument("--word", required=True)
    p.add_argument("--context", required=True, help="CoNLL-U text, @file, or raw text")
    p.add_argument("--level", required=True, help="target JLPT level, e.g. N3")
    p.add_argument("--k", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--corpus", help="override corpus path")
    p.add_argument("--index", help="override index path")

    p = sub.add_parser("generate", help="generative-baseline example sentences")
    p.add_argument("--word", required=True)
    p.add_argument("--context", required=True, help="context sentence text")
    p.add_argument("--level", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--endpoint", help="chat-completion base URL")
    p.add_argument("--model", default="default")
    p.add_argument("--transcript", help="scripted replies file ('---' separated)")
    p.add_argument("--max-rounds", type=int, default=4)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--repetition-penalty", type=float)
    p.add_argument("--numbered-list", action="store_true")

    p = sub.add_parser("judge", help="rate an evaluation block by LLM majority vote")
    p.add_argument("--block", required=True, help="block JSON file")
    p.add_argument("--votes", type=int, default=3)
    p.add_argument("--endpoint", help="chat-completion base URL")
    p.add_argument("--model", default="default")
    p.add_argument("--transcript", help="scripted replies file ('---' separated)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("evaluate-icc", help="ICC(3,1) over a ratings CSV")
    p.add_argument("--ratings", required=True, help="CSV: target_id,rater_id,item,value")
    p.add_argument("--item", required=True, help="item column value to evaluate")
    p.add_argument("--scale", help="comma-separated ordinal scale for text values")
    p.add_argument("--min-completion", type=float, default=0.5)
    p.add_argument("--pairwise-out", help="write the pairwise matrix CSV here")

    p = sub.add_parser("diversity", help="pairwise syntactic similarity matrix")
    p.add_argument("--in", dest="infile", required=True, help="CoNLL-U file")

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--in", dest="infile", required=True, help="CoNLL-U file")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)

    return parser


def _emit(payload: dict | list) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2))


def _load_context_arg(context: str) -> str:
    if context.startswith("@"):
        return Path(context[1:]).read_text(encoding="utf-8")
    return context


def _make_endpoint(args) -> ChatEndpoint:
    if args.transcript:
        text = Path(args.transcript).read_text(encoding="utf-8")
        return ScriptedEndpoint([p.strip() for p in text.split("\n---\n")])
    if args.endpoint:
        return HttpChatEndpoint(args.endpoint, args.model)
    raise ConfigError("either --endpoint or --transcript is required")


def _cmd_filter_corpus(args, cfg: EngineConfig) -> int:
    fc_kwargs = {}
    if args.min_tokens is not None:
        fc_kwargs["min_tokens"] = args.min_tokens
    if args.max_tokens is not None:
        fc_kwargs["max_tokens"] = args.max_tokens
    if args.max_punct_num_ratio is not None:
        fc_kwargs["max_punct_num_ratio"] = args.max_punct_num_ratio
    fc = FilterConfig(
        min_tokens=fc_kwargs.get("min_tokens", cfg.min_tokens),
        max_tokens=fc_kwargs.get("max_tokens", cfg.max_tokens),
        max_punct_num_ratio=fc_kwargs.get("max_punct_num_ratio", cfg.max_punct_num_ratio),
        final_particles=frozenset(cfg.final_particles),
    )
    with open(args.infile, encoding="utf-8") as fh:
        sentences = parse_conllu(fh, on_error="skip")
    accepted = []
    reasons: Counter = Counter()
    for sentence, verdict in apply_filters(sentences, fc):
        if verdict.accepted:
            accepted.append(sentence)
        else:
            reasons[verdict.reason.name] += 1
    for i, s in enumerate(accepted):
        s.id = i
    Path(args.outfile).write_text(serialize_conllu(accepted), encoding="utf-8")
    _emit(
        {
            "input": len(sentences),
            "accepted": len(accepted),
            "rejected": dict(sorted(reasons.items())),
            "out": args.outfile,
        }
    )
    return 0


def _cmd_build_index(args, cfg: EngineConfig) -> int:
    with open(args.infile, encoding="utf-8") as fh:
        sentences = parse_conllu(fh)
    index = build_index(sentences)
    save_index(index, args.outfile)
    _emit(
        {
            "sentences": index.doc_count,
            "keys": len(index.postings),
            "fingerprint": index.fingerprint,
            "out": args.outfile,
        }
    )
    return 0


def _cmd_suggest(args, cfg: EngineConfig) -> int:
    if args.corpus:
        cfg.corpus_path = args.corpus
    if args.index:
        cfg.index_path = args.index
    engine = Engine.from_config(cfg)
    result = engine.suggest(
        word=args.word,
        context=_load_context_arg(args.context),
        level=args.level,
        k=args.k,
        window=args.window,
    )
    _emit(result.as_dict())
    return 0


def _cmd_generate(args, cfg: EngineConfig) -> int:
    endpoint = _make_endpoint(args)
    q = GenQuery(
        word=args.word,
        context=_load_context_arg(args.context),
        level=Level.parse(args.level),
        k=args.k,
    )
    gen_cfg = GenerationConfig(
        temperature=args.temperature,
        repetition_penalty=args.repetition_penalty,
        max_rounds=args.max_rounds,
        numbered_list=args.numbered_list,
    )
    result = generate_examples(q, gen_cfg, endpoint)
    _emit(result.as_dict())
    return 0


def _cmd_judge(args, cfg: EngineConfig) -> int:
    endpoint = _make_endpoint(args)
    spec = json.loads(Path(args.block).read_text(encoding="utf-8"))
    block = make_block(
        word=spec["word"],
        context=spec["context"],
        target_level=Level.parse(spec["level"]),
        system_outputs=spec["systems"],
        seed=spec.get("seed", args.seed),
    )
    votes, majority = judge_block(block, endpoint, n_votes=args.votes)
    _emit(
        {
            "display_order": list(block.display_order),
            "votes_valid": [v is not None for v in votes],
            "majority": majority.as_dict(),
        }
    )
    return 0


def _read_ratings_csv(
    path: str, item: str, scale: Sequence[str] | None
) -> RatingMatrix:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"target_id", "rater_id", "item", "value"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"ratings CSV must have columns {sorted(required)}")
        for rec in reader:
            if rec["item"] == item:
                rows.append((rec["target_id"], rec["rater_id"], rec["value"]))
    if not rows:
        raise ValueError(f"no rows with item {item!r} in {path}")
    targets = sorted({r[0] for r in rows})
    raters = sorted({r[1] for r in rows})
    values = np.full((len(targets), len(raters)), np.nan)
    t_pos = {t: i for i, t in enumerate(targets)}
    r_pos = {r: j for j, r in enumerate(raters)}
    numeric = all(_is_number(r[2]) for r in rows)
    if numeric:
        for t, r, v in rows:
            values[t_pos[t], r_pos[r]] = float(v)
    else:
        tags = scale if scale is not None else LEVEL_SCALE_TAGS
        for t, r, v in rows:
            values[t_pos[t], r_pos[r]] = labels_to_numeric([v], tags)[0]
    return RatingMatrix(
        values=values, target_ids=tuple(targets), rater_ids=tuple(raters)
    )


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _cmd_evaluate_icc(args, cfg: EngineConfig) -> int:
    scale = args.scale.split(",") if args.scale else None
    matrix = _read_ratings_csv(args.ratings, args.item, scale)
    matrix = filter_raters(matrix, threshold=args.min_completion)
    result = icc31(matrix)
    cells = pairwise_agreement([matrix.values[:, j] for j in range(matrix.values.shape[1])])

    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["rater"] + list(matrix.rater_ids))
    for i, rid in enumerate(matrix.rater_ids):
        row = [rid]
        for j in range(len(matrix.rater_ids)):
            cell = cells[i][j]
            if not cell.available:
                row.append("NA")
            else:
                star = "*" if cell.significant else ""
                row.append(f"{cell.estimate:.3f}{star}")
        writer.writerow(row)
    pairwise_csv = out.getvalue()
    if args.pairwise_out:
        Path(args.pairwise_out).write_text(pairwise_csv, encoding="utf-8")

    payload = {"item": args.item, "icc31": result.as_dict()}
    if not args.pairwise_out:
        payload["pairwise_csv"] = pairwise_csv
    _emit(payload)
    return 0


def _cmd_diversity(args, cfg: EngineConfig) -> int:
    with open(args.infile, encoding="utf-8") as fh:
        sentences = parse_conllu(fh)
    if not sentences:
        raise ValueError("no sentences in input")
    sims = similarity_matrix([generalize_labels(s) for s in sentences])
    writer = csv.writer(sys.stdout)
    writer.writerow(["id"] + [str(s.id) for s in sentences])
    for i, s in enumerate(sentences):
        writer.writerow([str(s.id)] + [f"{sims[i, j]:.6f}" for j in range(len(sentences))])
    return 0


def _cmd_stats(args, cfg: EngineConfig) -> int:
    with open(args.infile, encoding="utf-8") as fh:
        sentences = parse_conllu(fh, on_error="skip")
    _emit(corpus_stats(sentences).as_dict())
    return 0


def _cmd_serve(args, cfg: EngineConfig) -> int:
    import uvicorn

    from .service import create_app

    host = args.host or cfg.host
    port = args.port if args.port is not None else cfg.port
    app = create_app(Engine.from_config(cfg))
    uvicorn.run(app, host=host, port=port)
    return 0


_COMMANDS = {
    "filter-corpus": _cmd_filter_corpus,
    "build-index": _cmd_build_index,
    "suggest": _cmd_suggest,
    "generate": _cmd_generate,
    "judge": _cmd_judge,
    "evaluate-icc": _cmd_evaluate_icc,
    "diversity": _cmd_diversity,
    "stats": _cmd_stats,
    "serve": _cmd_serve,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except _DOMAIN_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
