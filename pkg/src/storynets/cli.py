"""Command-line pipeline: corpus in, tables and figures out.

Subcommands map one-to-one onto pipeline stages (ingest, featurize, compare,
train, evaluate, explain, rate, generate, distributions, report). A TOML
file passed via --config overrides flags; outputs land in a fixed layout
under --out (features/, models/, reports/, figures/, manifest.json).
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .conllu import ConlluParseError, TreeStructureError, load_parsed_story
from .corpus import (
    Corpus,
    CorpusError,
    RatingScheme,
    SchemeMismatchError,
    bin_rating,
    filter_complete,
    load_corpus,
    save_corpus_csv,
    story_word_count,
)
from .emotions import (
    LexiconError,
    NullModelConfig,
    load_emotion_lexicon,
    profile_story,
)
from .explain import (
    ShapError,
    feature_terciles,
    local_accuracy_error,
    mean_abs_shap,
    shap_matrix,
    tercile_label,
    write_importance_csv,
    write_shap_csv,
)
from .manifest import build_run_record, update_manifest
from .ml import (
    ForestParams,
    GbtParams,
    ModelSpec,
    TreeParams,
    cross_validate,
    load_model,
    save_model,
    train_model,
)
from .ml.baselines import save_baseline
from .netfeat import (
    FEATURE_NAMES,
    NetFeatConfig,
    ScalingParams,
    featurize,
    minmax_scale,
    read_feature_matrix,
    write_feature_matrix,
)
from .rater import PromptTemplates, RaterConfig, generate_stories, rate_corpus
from .stats import DegenerateDataError, mann_whitney_u, significance_stars
from .svgplot import (
    BarSeries,
    beeswarm_chart,
    confusion_heatmap,
    grouped_bar_chart,
    horizontal_importance_chart,
    write_svg,
)
from .tfmn import build_story_network, load_antonyms, load_stoplist

INPUT_ERRORS = (
    CorpusError, SchemeMismatchError, ConlluParseError, TreeStructureError,
    LexiconError, ShapError, DegenerateDataError, ValueError, OSError,
)

CLASS_NAMES = ("0", "1", "2")


def _resource(name: str) -> str:
    return str(resources.files("storynets").joinpath("resources", name))


def _out_dirs(out: str) -> dict[str, Path]:
    root = Path(out)
    dirs = {"root": root}
    for sub in ("features", "models", "reports", "figures"):
        dirs[sub] = root / sub
        dirs[sub].mkdir(parents=True, exist_ok=True)
    return dirs


def _scheme(name: str) -> RatingScheme:
    return RatingScheme(name)


def _relpaths(root: Path, paths: list[Path]) -> list[str]:
    return [str(p.relative_to(root)) for p in paths]


# ---------------------------------------------------------------- featurize

def _build_features_for(story, args, stoplist, antonyms, lexicon, net_cfg,
                        null_cfg):
    parsed = load_parsed_story(args.conllu_dir, story.id)
    network = build_story_network(
        parsed, stoplist, antonyms,
        valence_lexicon=lexicon.valence_map(),
        max_dist=args.max_tree_distance)
    profile = profile_story(network.effective_lemmas, lexicon, null_cfg)
    vector = featurize(story, network.graph, profile, net_cfg)
    return network, profile, vector


def cmd_featurize(args) -> int:
    dirs = _out_dirs(args.out)
    corpus = load_corpus(args.corpus)
    missing = [s.id for s in corpus
               if not (Path(args.conllu_dir) / f"{s.id}.conllu").exists()]
    if missing:
        raise FileNotFoundError(
            f"no parse file for {len(missing)} stories in {args.conllu_dir}: "
            + ", ".join(missing[:20])
            + ("..." if len(missing) > 20 else ""))

    stoplist = load_stoplist(args.stopwords)
    antonyms = load_antonyms(args.antonyms)
    lexicon = load_emotion_lexicon(args.lexicon)
    net_cfg = NetFeatConfig(
        pagerank_mode=args.pagerank_mode,
        degree_normalized=not args.raw_degree,
        distance_scope=args.distance_scope)
    null_cfg = NullModelConfig(mode=args.null_model.replace("-", "_"),
                               samples=args.null_samples, seed=args.seed)

    def build(story):
        return _build_features_for(story, args, stoplist, antonyms, lexicon,
                                   net_cfg, null_cfg)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(build, corpus))
    else:
        results = [build(story) for story in corpus]

    ids = [story.id for story in corpus]
    matrix = np.array([vec.values for _, _, vec in results], dtype=float)
    raw_path = dirs["features"] / "features_raw.csv"
    write_feature_matrix(raw_path, ids, matrix)
    scaling = None
    if args.reuse_scaling:
        stored = json.loads(Path(args.reuse_scaling).read_text(encoding="utf-8"))
        scaling = ScalingParams.from_dict(stored)
    scaled, scaling = minmax_scale(matrix, scaling)
    scaled_path = dirs["features"] / "features_scaled.csv"
    write_feature_matrix(scaled_path, ids, scaled)
    scaling_path = dirs["features"] / "scaling.json"
    scaling_path.write_text(
        json.dumps({"feature_names": FEATURE_NAMES, **scaling.to_dict()},
                   indent=2) + "\n", encoding="utf-8")

    edges_dir = dirs["features"] / "edges"
    edges_dir.mkdir(exist_ok=True)
    for story, (network, _, _) in zip(corpus, results):
        with open(edges_dir / f"{story.id}.tsv", "w", encoding="utf-8") as fh:
            for a, b in sorted(network.graph.edges):
                fh.write(f"{a}\t{b}\n")

    diag_path = dirs["reports"] / "featurize_diagnostics.csv"
    with open(diag_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "story_id", "nodes", "edges", "isolated_nodes",
            "negations_flipped", "negations_unresolved",
            "lexicon_tokens", "low_coverage"])
        for story, (network, profile, _) in zip(corpus, results):
            writer.writerow([
                story.id,
                network.graph.number_of_nodes(),
                network.graph.number_of_edges(),
                network.isolated_nodes,
                network.flipped_count,
                len(network.unresolved_negations),
                profile.n_lexicon_tokens,
                int(profile.low_coverage)])

    outputs = [raw_path, scaled_path, scaling_path, diag_path]
    record = build_run_record(
        "featurize",
        {
            "max_tree_distance": args.max_tree_distance,
            "null_model": args.null_model,
            "null_samples": args.null_samples,
            "seed": args.seed,
            "pagerank_mode": args.pagerank_mode,
            "degree_normalized": not args.raw_degree,
            "distance_scope": args.distance_scope,
            "scaling": "reused" if args.reuse_scaling else "fit",
        },
        {
            "corpus": args.corpus,
            "stopwords": args.stopwords,
            "antonyms": args.antonyms,
            "lexicon": args.lexicon,
        },
        _relpaths(dirs["root"], outputs),
    )
    update_manifest(dirs["root"], record)
    low = sum(1 for _, p, _ in results if p.low_coverage)
    print(f"featurized {len(corpus)} stories -> {raw_path}")
    print(f"  low-coverage emotion profiles: {low}/{len(corpus)}")
    return 0


# ------------------------------------------------------------------ ingest

def cmd_ingest(args) -> int:
    dirs = _out_dirs(args.out)
    corpus = load_corpus(args.corpus)
    if args.require_raters:
        before = len(corpus)
        corpus = filter_complete(corpus, args.require_raters)
        print(f"kept {len(corpus)}/{before} stories with "
              f">= {args.require_raters} raters")
    if not corpus:
        raise CorpusError("no stories left after filtering")
    out_path = dirs["features"] / "corpus_normalized.csv"
    save_corpus_csv(corpus, out_path)

    by_kind: dict[str, list[int]] = {}
    for story in corpus:
        by_kind.setdefault(story.author_kind, []).append(story_word_count(story))
    summary: dict = {"stories": len(corpus), "by_author": {}}
    for kind, lengths in sorted(by_kind.items()):
        summary["by_author"][kind] = {
            "stories": len(lengths),
            "mean_words": statistics.fmean(lengths),
            "median_words": statistics.median(lengths),
        }
    if set(by_kind) == {"human", "llm"}:
        res = mann_whitney_u(by_kind["human"], by_kind["llm"])
        summary["length_test"] = {
            "u_statistic": res.statistic,
            "p_value": res.p_value,
            "method": res.method,
        }
    rating_counts: dict[str, int] = {}
    for story in corpus:
        for r in story.ratings:
            rating_counts[r.rater_id] = rating_counts.get(r.rater_id, 0) + 1
    summary["ratings_per_rater"] = dict(sorted(rating_counts.items()))
    summary_path = dirs["reports"] / "corpus_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")

    record = build_run_record(
        "ingest",
        {"require_raters": args.require_raters},
        {"corpus": args.corpus},
        _relpaths(dirs["root"], [out_path, summary_path]),
    )
    update_manifest(dirs["root"], record)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


# ----------------------------------------------------------------- compare

def cmd_compare(args) -> int:
    dirs = _out_dirs(args.out)
    ids_a, mat_a = read_feature_matrix(args.matrix_a)
    ids_b, mat_b = read_feature_matrix(args.matrix_b)

    rows = []
    for j, name in enumerate(FEATURE_NAMES):
        res = mann_whitney_u(mat_a[:, j], mat_b[:, j])
        rows.append((name, res))
    table_path = dirs["reports"] / "comparison.csv"
    with open(table_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "u_statistic", "p_value", "significance",
                         "method", "degenerate"])
        for name, res in rows:
            writer.writerow([
                name, repr(res.statistic), repr(res.p_value),
                significance_stars(res.p_value), res.method,
                int(res.degenerate)])

    series = [
        BarSeries(name=args.label_a,
                  values=tuple(float(v) for v in mat_a.mean(axis=0)),
                  errors=tuple(float(v) for v in mat_a.std(axis=0, ddof=1))
                  if len(mat_a) > 1 else None),
        BarSeries(name=args.label_b,
                  values=tuple(float(v) for v in mat_b.mean(axis=0)),
                  errors=tuple(float(v) for v in mat_b.std(axis=0, ddof=1))
                  if len(mat_b) > 1 else None),
    ]
    fig_path = dirs["figures"] / "comparison.svg"
    write_svg(fig_path, grouped_bar_chart(
        FEATURE_NAMES, series, title="Feature means by corpus",
        y_label="feature value"))

    record = build_run_record(
        "compare",
        {"label_a": args.label_a, "label_b": args.label_b},
        {"matrix_a": args.matrix_a, "matrix_b": args.matrix_b},
        _relpaths(dirs["root"], [table_path, fig_path]),
    )
    update_manifest(dirs["root"], record)
    for name, res in rows:
        stars = significance_stars(res.p_value)
        print(f"{name:24s} U={res.statistic:<12g} p={res.p_value:.4g} {stars}")
    return 0


# ------------------------------------------------------------- train/eval

def _labelled_design(corpus: Corpus, ids: list[str], matrix: np.ndarray,
                     scheme: RatingScheme, mode: str):
    """Expand the story matrix into (X, y, sample_ids) training rows."""
    by_id = {s.id: s for s in corpus}
    missing = [sid for sid in ids if sid not in by_id]
    if missing:
        raise CorpusError(
            f"{len(missing)} matrix stories absent from corpus: "
            + ", ".join(missing[:10]))
    X_rows, y, sample_ids = [], [], []
    for i, sid in enumerate(ids):
        story = by_id[sid]
        if not story.ratings:
            raise CorpusError(f"story {sid!r} has no ratings to train on")
        try:
            if mode == "stacked":
                for r in story.ratings:
                    X_rows.append(matrix[i])
                    y.append(bin_rating(r.score, scheme))
                    sample_ids.append(f"{sid}#{r.rater_id}")
            else:
                mean = statistics.fmean(r.score for r in story.ratings)
                score = min(5, max(1, int(mean + 0.5)))
                X_rows.append(matrix[i])
                y.append(bin_rating(score, scheme))
                sample_ids.append(sid)
        except SchemeMismatchError as exc:
            raise SchemeMismatchError(f"story {sid!r}: {exc}") from None
    return np.array(X_rows, dtype=float), np.array(y, dtype=int), sample_ids


def _model_spec(args) -> ModelSpec:
    if args.model == "gbt":
        params = GbtParams(
            rounds=args.rounds,
            max_depth=args.max_depth if args.max_depth is not None else 6,
            learning_rate=args.learning_rate,
            lambda_l2=args.lambda_l2,
            min_child_weight=args.min_child_weight,
            seed=args.seed)
    elif args.model == "decision_tree":
        params = TreeParams(max_depth=args.max_depth, seed=args.seed)
    else:
        params = ForestParams(n_trees=args.n_trees, max_depth=args.max_depth,
                              seed=args.seed)
    return ModelSpec(kind=args.model, params=params)


def _ml_config(args) -> dict:
    return {
        "model": args.model,
        "scheme": args.scheme,
        "rating_mode": args.rating_mode,
        "rounds": args.rounds,
        "max_depth": args.max_depth,
        "learning_rate": args.learning_rate,
        "lambda_l2": args.lambda_l2,
        "min_child_weight": args.min_child_weight,
        "n_trees": args.n_trees,
        "seed": args.seed,
    }


def cmd_train(args) -> int:
    dirs = _out_dirs(args.out)
    ids, matrix = read_feature_matrix(args.matrix)
    corpus = load_corpus(args.corpus)
    X, y, _ = _labelled_design(corpus, ids, matrix, _scheme(args.scheme),
                               args.rating_mode)
    spec = _model_spec(args)
    model = train_model(spec, X, y, FEATURE_NAMES)
    model_path = dirs["models"] / f"{args.model}.json"
    if spec.kind == "gbt":
        save_model(model, model_path)
    else:
        save_baseline(model, model_path)
    record = build_run_record(
        "train", _ml_config(args),
        {"matrix": args.matrix, "corpus": args.corpus},
        _relpaths(dirs["root"], [model_path]),
    )
    update_manifest(dirs["root"], record)
    print(f"trained {args.model} on {len(y)} rows -> {model_path}")
    if spec.kind == "gbt" and model.train_loss:
        print(f"  final train log-loss: {model.train_loss[-1]:.4f}")
    return 0


def _report_markdown(report, model: str, rows: int) -> str:
    lines = [
        "# Cross-validated classification report",
        "",
        f"Model: `{model}` | folds: {report.folds} | seed: {report.seed} "
        f"| training rows: {rows}",
        "",
        "Error bounds are the sample standard deviation across folds.",
        "",
        "| | precision | recall | f1-score | support |",
        "|---|---|---|---|---|",
    ]
    for c in sorted(report.per_class):
        m = report.per_class[c]
        lines.append(
            f"| {c} | {m['precision']} | {m['recall']} | {m['f1']} "
            f"| {report.support[c]} |")
    total = sum(report.support)
    lines.append(f"| accuracy | | | {report.accuracy} | {total} |")
    for name, avg in (("macro avg", report.macro_avg),
                      ("weighted avg", report.weighted_avg)):
        lines.append(
            f"| {name} | {avg['precision']} | {avg['recall']} "
            f"| {avg['f1']} | {total} |")
    lines += [
        "",
        f"ROC-AUC (macro one-vs-rest): {report.roc_auc}",
        "",
        f"ROC-AUC (weighted one-vs-rest): {report.roc_auc_weighted}",
        "",
        "## Pooled confusion matrix",
        "",
        "| true \\ predicted | 0 | 1 | 2 |",
        "|---|---|---|---|",
    ]
    for c in range(len(CLASS_NAMES)):
        row = " | ".join(str(int(v)) for v in report.confusion[c])
        lines.append(f"| {c} | {row} |")
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    dirs = _out_dirs(args.out)
    ids, matrix = read_feature_matrix(args.matrix)
    corpus = load_corpus(args.corpus)
    X, y, _ = _labelled_design(corpus, ids, matrix, _scheme(args.scheme),
                               args.rating_mode)
    spec = _model_spec(args)
    report = cross_validate(spec, X, y, k=args.folds, seed=args.seed,
                            feature_names=FEATURE_NAMES)

    md_path = dirs["reports"] / "classification_report.md"
    md_path.write_text(_report_markdown(report, args.model, len(y)),
                       encoding="utf-8")
    metrics_path = dirs["reports"] / "cv_metrics.json"
    metrics_path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    cm_path = dirs["reports"] / "confusion_matrix.csv"
    with open(cm_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true_class", *(f"pred_{c}" for c in CLASS_NAMES)])
        for c in range(len(CLASS_NAMES)):
            writer.writerow([c, *(int(v) for v in report.confusion[c])])
    fig_path = dirs["figures"] / "confusion_matrix.svg"
    write_svg(fig_path, confusion_heatmap(
        report.confusion.tolist(), CLASS_NAMES,
        title=f"Pooled confusion matrix ({args.model}, {args.folds}-fold)"))

    record = build_run_record(
        "evaluate", {**_ml_config(args), "folds": args.folds},
        {"matrix": args.matrix, "corpus": args.corpus},
        _relpaths(dirs["root"], [md_path, metrics_path, cm_path, fig_path]),
    )
    update_manifest(dirs["root"], record)
    print(f"accuracy: {report.accuracy}  roc_auc: {report.roc_auc}")
    print(f"report -> {md_path}")
    return 0


# ----------------------------------------------------------------- explain

def cmd_explain(args) -> int:
    dirs = _out_dirs(args.out)
    model = load_model(args.model_file)
    ids, matrix = read_feature_matrix(args.matrix)
    if tuple(model.feature_names) != tuple(FEATURE_NAMES):
        raise ShapError(
            "model feature names do not match the canonical matrix header")

    shap = shap_matrix(model, matrix)
    err = local_accuracy_error(model, matrix, shap)
    summary = mean_abs_shap(model, matrix, shap)

    shap_path = dirs["reports"] / "shap_values.csv"
    write_shap_csv(shap_path, matrix, shap, FEATURE_NAMES, ids)
    imp_path = dirs["reports"] / "importance.csv"
    write_importance_csv(imp_path, summary)
    fig_paths = [dirs["figures"] / "importance.svg"]
    write_svg(fig_paths[0], horizontal_importance_chart(
        FEATURE_NAMES, summary.per_class.tolist(),
        [f"class {c}" for c in CLASS_NAMES], summary.ranking,
        title="Mean |SHAP| per feature and class"))
    order = summary.ranking
    lo, hi = feature_terciles(matrix)
    for k in range(model.class_count):
        pts = [
            [(float(shap.values[i, j, k]),
              tercile_label(float(matrix[i, j]), float(lo[j]), float(hi[j])))
             for i in range(matrix.shape[0])]
            for j in order
        ]
        path = dirs["figures"] / f"beeswarm_class{k}.svg"
        write_svg(path, beeswarm_chart(
            [FEATURE_NAMES[j] for j in order], pts,
            title=f"SHAP beeswarm, class {k}"))
        fig_paths.append(path)

    record = build_run_record(
        "explain", {"local_accuracy_error": err},
        {"model": args.model_file, "matrix": args.matrix},
        _relpaths(dirs["root"], [shap_path, imp_path, *fig_paths]),
    )
    update_manifest(dirs["root"], record)
    top = ", ".join(FEATURE_NAMES[j] for j in summary.ranking[:5])
    print(f"top features: {top}")
    print(f"local accuracy error: {err:.2e}")
    return 0


# ------------------------------------------------------------ rater cmds

def _rater_config(args) -> RaterConfig:
    return RaterConfig(
        endpoint_url=args.endpoint,
        model_name=args.model_name,
        temperature=args.temperature,
        api_key_env_var=args.api_key_env,
        max_retries=args.retries,
        request_timeout=args.timeout,
        judges=args.judges,
        max_in_flight=args.jobs,
        backoff_base=args.backoff_base)


def cmd_rate(args) -> int:
    dirs = _out_dirs(args.out)
    corpus = load_corpus(args.corpus)
    cfg = _rater_config(args)
    log_path = dirs["reports"] / "rating_log.jsonl"
    result = rate_corpus(corpus, cfg, PromptTemplates(), log_path=log_path,
                         replace_existing=args.replace_ratings)
    out_path = dirs["features"] / "rated_corpus.csv"
    save_corpus_csv(result.corpus, out_path)
    fail_path = dirs["reports"] / "rating_failures.csv"
    with open(fail_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["story_id", "judge", "reason"])
        for f in result.failures:
            writer.writerow([f.story_id, f.judge, f.reason])
    record = build_run_record(
        "rate",
        {"endpoint": args.endpoint, "model_name": args.model_name,
         "temperature": args.temperature, "judges": args.judges,
         "replace_ratings": args.replace_ratings},
        {"corpus": args.corpus},
        _relpaths(dirs["root"], [out_path, fail_path, log_path]),
    )
    update_manifest(dirs["root"], record)
    print(f"rated {len(result.corpus)} stories, "
          f"{len(result.failures)} failures -> {out_path}")
    return 0


def cmd_generate(args) -> int:
    dirs = _out_dirs(args.out)
    prompts = []
    with open(args.prompts, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            words = [w.strip() for w in line.split(",")]
            if len(words) != 3 or any(not w for w in words):
                raise ValueError(
                    f"{args.prompts}:{line_num}: expected 3 comma-separated "
                    f"words, got {line!r}")
            prompts.append(tuple(words))
    cfg = _rater_config(args)
    log_path = dirs["reports"] / "generation_log.jsonl"
    result = generate_stories(prompts, args.participants, cfg, seed=args.seed,
                              log_path=log_path)
    out_path = dirs["features"] / "generated_corpus.csv"
    save_corpus_csv(result.stories, out_path)
    gaps_path = dirs["reports"] / "generation_gaps.csv"
    with open(gaps_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["participant", "prompt", "reason"])
        for gap in result.gaps:
            writer.writerow([gap.participant, " ".join(gap.prompt), gap.reason])
    record = build_run_record(
        "generate",
        {"endpoint": args.endpoint, "model_name": args.model_name,
         "participants": args.participants, "seed": args.seed},
        {"prompts": args.prompts},
        _relpaths(dirs["root"], [out_path, gaps_path, log_path]),
    )
    update_manifest(dirs["root"], record)
    print(f"generated {len(result.stories)} stories "
          f"({len(result.gaps)} gaps) -> {out_path}")
    return 0


# ----------------------------------------------------------- distributions

def cmd_distributions(args) -> int:
    dirs = _out_dirs(args.out)
    corpus = load_corpus(args.corpus)
    scheme = _scheme(args.scheme)
    score_counts: dict[str, dict[int, int]] = {}
    class_counts: dict[str, dict[int, int]] = {}
    for story in corpus:
        for r in story.ratings:
            score_counts.setdefault(r.rater_id, {s: 0 for s in range(1, 6)})
            score_counts[r.rater_id][r.score] += 1
            cls = bin_rating(r.score, scheme)
            class_counts.setdefault(r.rater_id, {c: 0 for c in range(3)})
            class_counts[r.rater_id][cls] += 1
    if not score_counts:
        raise CorpusError("corpus has no ratings to plot")

    raters = sorted(score_counts)
    dist_path = dirs["reports"] / "rating_distribution.csv"
    with open(dist_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rater_id", "score", "count"])
        for rater in raters:
            for s in range(1, 6):
                writer.writerow([rater, s, score_counts[rater][s]])
    cls_path = dirs["reports"] / "class_distribution.csv"
    with open(cls_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rater_id", "class", "count"])
        for rater in raters:
            for c in range(3):
                writer.writerow([rater, c, class_counts[rater][c]])

    full_series = [
        BarSeries(name=rater,
                  values=tuple(float(score_counts[rater][s])
                               for s in range(1, 6)))
        for rater in raters]
    full_path = dirs["figures"] / "ratings_full.svg"
    write_svg(full_path, grouped_bar_chart(
        [str(s) for s in range(1, 6)], full_series,
        title="Rating distribution (1-5)", y_label="stories"))
    cls_series = [
        BarSeries(name=rater,
                  values=tuple(float(class_counts[rater][c]) for c in range(3)))
        for rater in raters]
    cls_fig = dirs["figures"] / "ratings_classes.svg"
    write_svg(cls_fig, grouped_bar_chart(
        list(CLASS_NAMES), cls_series,
        title=f"Class distribution ({args.scheme})", y_label="stories"))

    record = build_run_record(
        "distributions", {"scheme": args.scheme}, {"corpus": args.corpus},
        _relpaths(dirs["root"], [dist_path, cls_path, full_path, cls_fig]),
    )
    update_manifest(dirs["root"], record)
    print(f"distributions for {len(raters)} raters -> {dist_path}")
    return 0


# ------------------------------------------------------------------ report

def _csv_to_markdown(path: Path, limit: int | None = None) -> str:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return "(empty)\n"
    header, body = rows[0], rows[1:]
    if limit is not None:
        body = body[:limit]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "---|" * len(header)]
    for row in body:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    dirs = _out_dirs(args.out)
    reports = dirs["reports"]
    figures = dirs["figures"]
    sections: list[str] = [
        "# Story-network analysis report",
        "",
        f"Toolkit version {__version__}. Artifacts referenced below live in "
        "`reports/` and `figures/`.",
        "",
    ]
    found = False

    summary = reports / "corpus_summary.json"
    if summary.exists():
        found = True
        sections += ["## Corpus", "", "```json",
                     summary.read_text(encoding="utf-8").rstrip(), "```", ""]
    comparison = reports / "comparison.csv"
    if comparison.exists():
        found = True
        sections += ["## Feature comparison (rank tests)", "",
                     _csv_to_markdown(comparison),
                     "![feature means](../figures/comparison.svg)", ""]
    classification = reports / "classification_report.md"
    if classification.exists():
        found = True
        sections += [classification.read_text(encoding="utf-8").rstrip(), "",
                     "![confusion matrix](../figures/confusion_matrix.svg)", ""]
    importance = reports / "importance.csv"
    if importance.exists():
        found = True
        sections += ["## Feature attributions", "",
                     _csv_to_markdown(importance, limit=15),
                     "![importance](../figures/importance.svg)", ""]
        for k in range(3):
            fig = figures / f"beeswarm_class{k}.svg"
            if fig.exists():
                sections.append(f"![beeswarm class {k}](../figures/{fig.name})")
        sections.append("")
    dist = reports / "rating_distribution.csv"
    if dist.exists():
        found = True
        sections += ["## Rating distributions", "", _csv_to_markdown(dist),
                     "![ratings](../figures/ratings_full.svg)", ""]

    if not found:
        raise FileNotFoundError(
            f"no artifacts found under {reports}; run the pipeline commands "
            "before `report`")
    report_path = reports / "report.md"
    report_path.write_text("\n".join(sections), encoding="utf-8")
    record = build_run_record("report", {}, {},
                              _relpaths(dirs["root"], [report_path]))
    update_manifest(dirs["root"], record)
    print(f"report -> {report_path}")
    return 0


# ------------------------------------------------------------------ parser

def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output directory root")


def _add_rater_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--endpoint", required=True,
                   help="chat-completions endpoint URL")
    p.add_argument("--model-name", required=True)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--api-key-env", default="STORYNETS_API_KEY",
                   help="env var holding the bearer token")
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--judges", type=int, default=4)
    p.add_argument("--jobs", type=int, default=4,
                   help="max in-flight requests")
    p.add_argument("--backoff-base", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)


def _add_ml_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matrix", required=True, help="feature matrix CSV")
    p.add_argument("--corpus", required=True, help="corpus with ratings")
    p.add_argument("--scheme", choices=[s.value for s in RatingScheme],
                   default=RatingScheme.HUMAN_SCALE.value)
    p.add_argument("--rating-mode", choices=["stacked", "mean"],
                   default="stacked",
                   help="one row per rating, or per-story mean rating")
    p.add_argument("--model",
                   choices=["gbt", "decision_tree", "random_forest"],
                   default="gbt")
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=None,
                   help="tree depth cap (boosted default 6, baselines none)")
    p.add_argument("--learning-rate", type=float, default=0.3)
    p.add_argument("--lambda-l2", type=float, default=1.0)
    p.add_argument("--min-child-weight", type=float, default=1.0)
    p.add_argument("--n-trees", type=int, default=100,
                   help="random forest size")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storynets",
        description="Story corpora to word networks, emotion profiles, "
                    "creativity classifiers, and attribution reports.",
        epilog="Values in the --config TOML override command-line flags; "
               "sections are named after subcommands, plus [global].")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None,
                        help="TOML config overriding flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--require-raters", type=int, default=0,
                   help="drop stories with fewer distinct raters")
    _add_out(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("featurize",
                       help="corpus + parses -> 13-feature matrices")
    p.add_argument("--corpus", required=True)
    p.add_argument("--conllu-dir", required=True,
                   help="directory of <story_id>.conllu files")
    p.add_argument("--stopwords", default=_resource("stopwords_en.txt"))
    p.add_argument("--antonyms", default=_resource("antonyms_en.tsv"))
    p.add_argument("--lexicon", default=_resource("emotion_lexicon.tsv"))
    p.add_argument("--max-tree-distance", type=int, default=3)
    p.add_argument("--null-model", choices=["analytic", "monte-carlo"],
                   default="analytic")
    p.add_argument("--null-samples", type=int, default=10_000)
    p.add_argument("--pagerank-mode", choices=["mean", "max", "std"],
                   default="mean")
    p.add_argument("--raw-degree", action="store_true",
                   help="mean raw degree instead of degree/(n-1)")
    p.add_argument("--distance-scope", choices=["lcc", "components"],
                   default="lcc")
    p.add_argument("--reuse-scaling", default=None,
                   help="scaling.json from an earlier run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    _add_out(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("compare", help="rank-test two feature matrices")
    p.add_argument("--matrix-a", required=True)
    p.add_argument("--matrix-b", required=True)
    p.add_argument("--label-a", default="corpus A")
    p.add_argument("--label-b", default="corpus B")
    _add_out(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("train", help="fit a classifier on rated stories")
    _add_ml_flags(p)
    _add_out(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate",
                       help="stratified cross-validated classification report")
    _add_ml_flags(p)
    p.add_argument("--folds", type=int, default=4)
    _add_out(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="SHAP attributions for a trained model")
    p.add_argument("--model-file", required=True)
    p.add_argument("--matrix", required=True)
    _add_out(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("rate", help="score a corpus with LLM judges")
    p.add_argument("--corpus", required=True)
    p.add_argument("--replace-ratings", action="store_true",
                   help="drop existing scores before judging")
    _add_rater_flags(p)
    _add_out(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("generate", help="write stories from prompt triplets")
    p.add_argument("--prompts", required=True,
                   help="file of comma-separated word triplets, one per line")
    p.add_argument("--participants", type=int, required=True)
    _add_rater_flags(p)
    _add_out(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("distributions", help="rating histograms and tables")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scheme", choices=[s.value for s in RatingScheme],
                   default=RatingScheme.HUMAN_SCALE.value)
    _add_out(p)
    p.set_defaults(func=cmd_distributions)

    p = sub.add_parser("report", help="stitch artifacts into one Markdown report")
    _add_out(p)
    p.set_defaults(func=cmd_report)

    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if not args.config:
        return
    with open(args.config, "rb") as fh:
        cfg = tomllib.load(fh)
    for section_name in ("global", args.command):
        section = cfg.get(section_name, {})
        if not isinstance(section, dict):
            raise ValueError(f"config section [{section_name}] must be a table")
        for key, value in section.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise ValueError(
                    f"config key {key!r} in [{section_name}] does not match "
                    f"any {args.command} option")
            setattr(args, attr, value)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
