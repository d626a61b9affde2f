#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fuseval/fuseval.hpp"

namespace fs = std::filesystem;
using namespace fuseval;

namespace {

std::vector<std::size_t> parse_depth_list(const std::string& text) {
    std::vector<std::size_t> depths;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string token = text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!token.empty()) depths.push_back(std::stoul(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (depths.empty()) throw std::invalid_argument("no depths in '" + text + "'");
    return depths;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << '\n';
}

struct EvalArgs {
    std::string run_path, qrels_path, out_path, gain = "linear";
    std::vector<std::string> metric_names{"ndcg@10"};
    bool per_query = false;
};

int cmd_eval(const EvalArgs& args) {
    Run run = parse_run(args.run_path);
    Qrels qrels = parse_qrels(args.qrels_path);
    std::vector<MetricSpec> metrics;
    for (const auto& name : args.metric_names) metrics.push_back(parse_metric(name));
    EvalReport report = evaluate(run, qrels, metrics, parse_gain_mode(args.gain));
    for (const auto& metric : metrics) {
        auto it = report.aggregates.find(metric.name());
        if (it == report.aggregates.end()) {
            std::cout << metric.name() << "\tn/a\t0\n";
            continue;
        }
        std::cout << metric.name() << '\t' << detail::format_score(it->second) << '\t'
                  << report.n_evaluated.at(metric.name()) << '\n';
    }
    if (args.per_query)
        for (const auto& [metric, rows] : report.per_query)
            for (const auto& [query, value] : rows)
                std::cout << metric << '\t' << query << '\t'
                          << detail::format_score(value) << '\n';
    if (!args.out_path.empty()) {
        if (args.out_path.size() > 4 &&
            args.out_path.substr(args.out_path.size() - 4) == ".tsv")
            write_report_tsv(report, args.out_path);
        else
            write_report_json(report, args.out_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval fusion and evaluation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 0;
    app.add_option("--threads", threads,
                   "worker threads (default: FUSEVAL_THREADS or all cores)");

    // index build
    auto* index_cmd = app.add_subcommand("index", "build or inspect a BM25 index");
    auto* index_build = index_cmd->add_subcommand("build", "index a JSONL corpus");
    std::string ib_corpus, ib_out;
    index_build->add_option("--corpus", ib_corpus, "corpus JSONL")->required();
    index_build->add_option("--out", ib_out, "output index directory")->required();
    index_cmd->require_subcommand(1);

    // search
    auto* search_cmd = app.add_subcommand("search", "run a first-stage retriever");
    search_cmd->require_subcommand(1);
    std::string s_index, s_corpus, s_docs, s_queries, s_out, s_tag, s_similarity = "dot";
    std::size_t s_k = 1000;
    double s_k1 = 0.9, s_b = 0.4;

    auto* search_bm25 = search_cmd->add_subcommand("bm25", "BM25 over an indexed corpus");
    search_bm25->add_option("--index", s_index, "index directory from `index build`");
    search_bm25->add_option("--corpus", s_corpus, "corpus JSONL (index in memory)");
    search_bm25->add_option("--queries", s_queries, "queries TSV")->required();
    search_bm25->add_option("--k", s_k, "results per query");
    search_bm25->add_option("--k1", s_k1, "BM25 k1");
    search_bm25->add_option("--b", s_b, "BM25 b");
    search_bm25->add_option("--out", s_out, "output run file")->required();
    search_bm25->add_option("--tag", s_tag, "system tag");

    auto* search_sparse =
        search_cmd->add_subcommand("sparse", "dot product over sparse term vectors");
    auto* search_dense =
        search_cmd->add_subcommand("dense", "exhaustive dense vector search");
    auto* search_maxsim =
        search_cmd->add_subcommand("maxsim", "late-interaction per-token search");
    for (CLI::App* sub : {search_sparse, search_dense, search_maxsim}) {
        sub->add_option("--docs", s_docs, "doc vectors JSONL")->required();
        sub->add_option("--queries", s_queries, "query vectors JSONL")->required();
        sub->add_option("--k", s_k, "results per query");
        sub->add_option("--out", s_out, "output run file")->required();
        sub->add_option("--tag", s_tag, "system tag");
    }
    search_dense->add_option("--similarity", s_similarity, "dot | cosine");

    // eval
    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "score a run against qrels");
    eval_cmd->add_option("--run", eval_args.run_path, "run file")->required();
    eval_cmd->add_option("--qrels", eval_args.qrels_path, "qrels file")->required();
    eval_cmd->add_option("--metric", eval_args.metric_names,
                         "metrics like ndcg@10 recall@100 judged@10");
    eval_cmd->add_option("--gain", eval_args.gain, "linear | exponential");
    eval_cmd->add_flag("--per-query", eval_args.per_query, "print per-query values");
    eval_cmd->add_option("--out", eval_args.out_path, "write report (.json or .tsv)");

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "min-max normalized sum fusion");
    std::vector<std::string> f_runs;
    std::vector<double> f_weights;
    std::string f_out, f_tag = "fused";
    std::size_t f_depth = 1000;
    fuse_cmd->add_option("--runs", f_runs, "member run files")->required();
    fuse_cmd->add_option("--weights", f_weights, "per-member weights (default all 1)");
    fuse_cmd->add_option("--depth", f_depth, "output depth per query");
    fuse_cmd->add_option("--tag", f_tag, "output system tag");
    fuse_cmd->add_option("--out", f_out, "output run file")->required();

    // rerank apply | sweep
    auto* rerank_cmd = app.add_subcommand("rerank", "apply reranker scores to a run");
    rerank_cmd->require_subcommand(1);
    std::string rr_run, rr_scores, rr_qrels, rr_out, rr_metric = "ndcg@10",
                rr_gain = "linear", rr_depths = "10,20,100";
    std::size_t rr_depth = 100;
    auto* rerank_apply = rerank_cmd->add_subcommand("apply", "rerank at a fixed depth");
    rerank_apply->add_option("--run", rr_run, "first-stage run")->required();
    rerank_apply->add_option("--scores", rr_scores, "3-column reranker score file")
        ->required();
    rerank_apply->add_option("--depth", rr_depth, "rerank depth");
    rerank_apply->add_option("--out", rr_out, "output run file")->required();
    auto* rerank_sweep =
        rerank_cmd->add_subcommand("sweep", "pick the best rerank depth on dev qrels");
    rerank_sweep->add_option("--run", rr_run, "first-stage run")->required();
    rerank_sweep->add_option("--scores", rr_scores, "3-column reranker score file")
        ->required();
    rerank_sweep->add_option("--qrels", rr_qrels, "dev qrels")->required();
    rerank_sweep->add_option("--depths", rr_depths, "comma list, e.g. 10,20,100");
    rerank_sweep->add_option("--metric", rr_metric, "selection metric");
    rerank_sweep->add_option("--gain", rr_gain, "linear | exponential");
    rerank_sweep->add_option("--out", rr_out, "write the best run here");

    // sweep subsets
    auto* sweep_cmd = app.add_subcommand("sweep", "ensemble subset search");
    sweep_cmd->require_subcommand(1);
    auto* sweep_subsets = sweep_cmd->add_subcommand(
        "subsets", "best fusion subset per language from an experiment config");
    std::string ss_config, ss_mode = "auto", ss_metric, ss_out;
    bool ss_global = false;
    sweep_subsets->add_option("--config", ss_config, "experiment config JSON")->required();
    sweep_subsets->add_option("--mode", ss_mode, "exhaustive | greedy | auto");
    sweep_subsets->add_option("--metric", ss_metric, "override config metric");
    sweep_subsets->add_flag("--global", ss_global,
                            "one shared subset maximizing the macro average");
    sweep_subsets->add_option("--out", ss_out, "selection JSON output");

    // analyze judged | unjudged
    auto* analyze_cmd = app.add_subcommand("analyze", "judgment coverage analysis");
    analyze_cmd->require_subcommand(1);
    auto* analyze_judged =
        analyze_cmd->add_subcommand("judged", "judged@k profile across runs");
    std::vector<std::string> aj_runs;
    std::string aj_qrels;
    std::size_t aj_k = 10, aj_recall_k = 100;
    analyze_judged->add_option("--runs", aj_runs, "run files")->required();
    analyze_judged->add_option("--qrels", aj_qrels, "qrels file")->required();
    analyze_judged->add_option("--k", aj_k, "cutoff for judged@k and ndcg@k");
    analyze_judged->add_option("--recall-k", aj_recall_k, "cutoff for recall");

    auto* analyze_unjudged = analyze_cmd->add_subcommand(
        "unjudged", "top-rank unjudged docs, cross-run presence, annotation export");
    std::string au_run, au_qrels, au_ref, au_corpus, au_queries, au_out;
    std::size_t au_ntop = 10, au_ref_depth = 0;
    analyze_unjudged->add_option("--run", au_run, "run file")->required();
    analyze_unjudged->add_option("--qrels", au_qrels, "qrels file")->required();
    analyze_unjudged->add_option("--n-top", au_ntop, "scan the top-n ranks");
    analyze_unjudged->add_option("--ref", au_ref, "reference run for presence flags");
    analyze_unjudged->add_option("--ref-depth", au_ref_depth,
                                 "reference depth (required with --ref)");
    analyze_unjudged->add_option("--corpus", au_corpus, "corpus JSONL for the export");
    analyze_unjudged->add_option("--queries", au_queries, "queries TSV for the export");
    analyze_unjudged->add_option("--out", au_out, "annotation pool TSV");

    // leaderboard
    auto* board_cmd =
        app.add_subcommand("leaderboard", "per-language metric table with averages");
    std::vector<std::string> lb_entries, lb_qrels;
    std::string lb_metric = "ndcg@10", lb_gain = "linear", lb_out;
    board_cmd->add_option("--entry", lb_entries, "lang:name:run_path (repeatable)")
        ->required();
    board_cmd->add_option("--qrels", lb_qrels, "lang:qrels_path (repeatable)")->required();
    board_cmd->add_option("--metric", lb_metric, "metric");
    board_cmd->add_option("--gain", lb_gain, "linear | exponential");
    board_cmd->add_option("--out", lb_out, "write the table here");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "deterministic synthetic test data");
    SynthSpec synth_spec;
    std::string sy_profile = "mixed", sy_out;
    synth_cmd->add_option("--seed", synth_spec.seed, "RNG seed");
    synth_cmd->add_option("--docs", synth_spec.n_docs, "corpus size");
    synth_cmd->add_option("--queries", synth_spec.n_queries, "query count");
    synth_cmd->add_option("--systems", synth_spec.n_systems, "synthetic system count");
    synth_cmd->add_option("--profile", sy_profile, "oracle | strong | mixed | weak");
    synth_cmd->add_option("--depth", synth_spec.run_depth, "run depth per query");
    synth_cmd->add_option("--max-relevant", synth_spec.max_relevant,
                          "max relevant docs per query");
    synth_cmd->add_option("--max-negatives", synth_spec.max_negatives,
                          "max judged negatives per query");
    synth_cmd->add_option("--holdout", synth_spec.holdout_fraction,
                          "fraction of queries held out");
    synth_cmd->add_option("--out", sy_out, "output directory")->required();

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run the full experiment flow");
    std::string pl_config, pl_out_dir, pl_metric, pl_mode;
    bool pl_global = false;
    pipeline_cmd->add_option("--config", pl_config, "experiment config JSON")->required();
    pipeline_cmd->add_option("--out-dir", pl_out_dir, "override output directory");
    pipeline_cmd->add_option("--metric", pl_metric, "override metric");
    pipeline_cmd->add_option("--mode", pl_mode, "override selection mode");
    pipeline_cmd->add_flag("--global", pl_global, "override: global selection");

    CLI11_PARSE(app, argc, argv);
    if (threads == 0) threads = default_thread_count();

    try {
        if (*index_build) {
            save_index(build_index(parse_corpus(ib_corpus)), ib_out);
            std::cout << "indexed " << ib_corpus << " -> " << ib_out << '\n';
        } else if (*search_bm25) {
            if (s_index.empty() == s_corpus.empty())
                throw std::runtime_error("search bm25: give exactly one of --index, --corpus");
            InvertedIndex index =
                s_index.empty() ? build_index(parse_corpus(s_corpus)) : load_index(s_index);
            Run run = bm25_search_run(index, parse_queries(s_queries), {s_k1, s_b}, s_k,
                                      s_tag.empty() ? "bm25" : s_tag);
            write_run(run, s_out);
        } else if (*search_sparse) {
            Run run = sparse_search_run(parse_sparse_vectors(s_docs),
                                        parse_sparse_vectors(s_queries), s_k,
                                        s_tag.empty() ? "sparse" : s_tag, threads);
            write_run(run, s_out);
        } else if (*search_dense) {
            Run run = dense_search_run(parse_dense_vectors(s_docs),
                                       parse_dense_vectors(s_queries), s_k,
                                       parse_similarity(s_similarity),
                                       s_tag.empty() ? "dense" : s_tag, threads);
            write_run(run, s_out);
        } else if (*search_maxsim) {
            Run run = maxsim_search_run(parse_multi_vectors(s_docs),
                                        parse_multi_vectors(s_queries), s_k,
                                        s_tag.empty() ? "maxsim" : s_tag, threads);
            write_run(run, s_out);
        } else if (*eval_cmd) {
            return cmd_eval(eval_args);
        } else if (*fuse_cmd) {
            std::vector<Run> members;
            for (const auto& path : f_runs) members.push_back(parse_run(path));
            FusionSpec spec;
            spec.weights = f_weights;
            spec.output_tag = f_tag;
            spec.depth = f_depth;
            Run fused = fuse(members, spec);
            write_run(fused, f_out);
        } else if (*rerank_apply) {
            Run run = apply_reranker(parse_run(rr_run), parse_scorefile(rr_scores), rr_depth);
            write_run(run, rr_out,
                      run.system_tag + "-rr@" + std::to_string(rr_depth));
        } else if (*rerank_sweep) {
            DepthSweepResult sweep = sweep_depth(
                parse_run(rr_run), parse_scorefile(rr_scores), parse_qrels(rr_qrels),
                parse_depth_list(rr_depths), parse_metric(rr_metric),
                parse_gain_mode(rr_gain));
            for (const auto& [depth, value] : sweep.value_by_depth)
                std::cout << "depth " << depth << '\t' << detail::format_score(value)
                          << '\n';
            std::cout << "best_depth\t" << sweep.best_depth << '\n';
            if (!rr_out.empty())
                write_run(sweep.run, rr_out,
                          sweep.run.system_tag + "-rr@" +
                              std::to_string(sweep.best_depth));
        } else if (*sweep_subsets) {
            ExperimentConfig config = load_experiment_config(ss_config);
            if (!ss_metric.empty()) config.metric = parse_metric(ss_metric);
            SelectionConfig selection;
            selection.mode = parse_search_mode(ss_mode);
            selection.metric = config.metric;
            selection.gain = config.gain;
            selection.fusion_depth = config.fusion_depth;
            selection.global = ss_global || config.global_selection;
            selection.threads = threads;

            std::map<std::string, std::map<std::string, Run>> storage;
            std::map<std::string, std::map<std::string, const Run*>> runs_by_language;
            std::map<std::string, Qrels> qrels_storage, holdout_storage;
            std::map<std::string, const Qrels*> qrels_by_language, holdout_by_language;
            for (const auto& [language, lang] : config.languages) {
                for (const auto& [name, path] : lang.runs)
                    storage[language][name] = parse_run(path);
                for (const auto& [name, run] : storage[language])
                    runs_by_language[language][name] = &run;
                qrels_storage[language] = parse_qrels(lang.dev_qrels);
                qrels_by_language[language] = &qrels_storage[language];
                if (!lang.holdout_qrels.empty()) {
                    holdout_storage[language] = parse_qrels(lang.holdout_qrels);
                    holdout_by_language[language] = &holdout_storage[language];
                }
            }
            PerLanguageSelection result = per_language_selection(
                runs_by_language, qrels_by_language, selection, holdout_by_language);
            print_warnings(result.warnings);
            for (const auto& [language, chosen] : result.by_language) {
                std::cout << language << '\t';
                for (std::size_t i = 0; i < chosen.members.size(); ++i)
                    std::cout << (i ? "+" : "") << chosen.members[i];
                std::cout << '\t' << detail::format_score(chosen.value) << '\n';
            }
            std::cout << "macro\t" << detail::format_score(result.macro_value) << '\n';
            if (result.macro_holdout)
                std::cout << "macro_holdout\t"
                          << detail::format_score(*result.macro_holdout) << '\n';
            if (!ss_out.empty()) {
                nlohmann::json doc;
                doc["metric"] = selection.metric.name();
                doc["macro_dev"] = result.macro_value;
                if (result.macro_holdout) doc["macro_holdout"] = *result.macro_holdout;
                doc["membership"] = result.membership;
                for (const auto& [language, chosen] : result.by_language)
                    doc["languages"][language] = {{"members", chosen.members},
                                                  {"value", chosen.value},
                                                  {"mode", chosen.mode}};
                auto out = detail::open_output(ss_out);
                out << doc.dump(2) << '\n';
            }
        } else if (*analyze_judged) {
            Qrels qrels = parse_qrels(aj_qrels);
            std::map<std::string, Run> storage;
            std::map<std::string, const Run*> runs;
            for (const auto& path : aj_runs) {
                std::string name = stem_of(path);
                if (storage.count(name))
                    throw std::runtime_error("duplicate run name: " + name);
                storage[name] = parse_run(path);
            }
            for (const auto& [name, run] : storage) runs[name] = &run;
            std::cout << "run\tjudged@" << aj_k << "\tndcg@" << aj_k << "\trecall@"
                      << aj_recall_k << "\tqueries\n";
            for (const auto& row : judged_profile(runs, qrels, aj_k, aj_recall_k))
                std::cout << row.name << '\t' << detail::format_score(row.judged) << '\t'
                          << detail::format_score(row.ndcg) << '\t'
                          << detail::format_score(row.recall) << '\t' << row.n_queries
                          << '\n';
        } else if (*analyze_unjudged) {
            Run run = parse_run(au_run);
            Qrels qrels = parse_qrels(au_qrels);
            UnjudgedReport report = extract_unjudged_top(run, qrels, au_ntop);
            std::size_t n_queries = report.top1.size();
            std::cout << "queries\t" << n_queries << '\n'
                      << "top1_judged_positive\t" << report.n_top1_positive << '\n'
                      << "top1_known_negative\t" << report.n_top1_negative << '\n'
                      << "top1_unjudged\t" << report.n_top1_unjudged << '\n';
            std::size_t n_unjudged = 0;
            for (const auto& [query, entries] : report.unjudged)
                n_unjudged += entries.size();
            std::cout << "unjudged_in_top" << au_ntop << '\t' << n_unjudged << '\n';
            if (!au_ref.empty()) {
                if (au_ref_depth == 0)
                    throw std::runtime_error("--ref needs --ref-depth");
                CrossRunReport annotated =
                    cross_run_presence(report, parse_run(au_ref), au_ref_depth);
                std::cout << "ref_present\t" << annotated.n_present << '\n'
                          << "ref_absent\t" << annotated.n_absent << '\n'
                          << "ref_query_absent\t" << annotated.n_query_absent << '\n';
            }
            if (!au_out.empty()) {
                if (au_corpus.empty())
                    throw std::runtime_error("--out needs --corpus");
                Corpus corpus = parse_corpus(au_corpus);
                QuerySet queries;
                std::vector<std::string> warnings;
                if (!au_queries.empty()) queries = parse_queries(au_queries);
                export_annotation_pool(report, corpus, au_out,
                                       au_queries.empty() ? nullptr : &queries,
                                       &warnings);
                print_warnings(warnings);
            }
        } else if (*board_cmd) {
            auto split2 = [](const std::string& text, const char* what) {
                auto colon = text.find(':');
                if (colon == std::string::npos)
                    throw std::runtime_error(std::string("bad ") + what + ": " + text);
                return std::pair<std::string, std::string>(text.substr(0, colon),
                                                           text.substr(colon + 1));
            };
            std::map<std::string, Qrels> qrels;
            for (const auto& entry : lb_qrels) {
                auto [language, path] = split2(entry, "--qrels (lang:path)");
                qrels[language] = parse_qrels(path);
            }
            MetricSpec metric = parse_metric(lb_metric);
            GainMode gain = parse_gain_mode(lb_gain);
            std::map<std::string, std::map<std::string, double>> values;
            for (const auto& entry : lb_entries) {
                auto [language, rest] = split2(entry, "--entry (lang:name:path)");
                auto [name, path] = split2(rest, "--entry (lang:name:path)");
                if (!qrels.count(language))
                    throw std::runtime_error("no qrels for language: " + language);
                EvalReport report =
                    evaluate(parse_run(path), qrels.at(language), {metric}, gain);
                values[name][language] = report.aggregates.at(metric.name());
            }
            std::string table = render_leaderboard(make_leaderboard(values, metric.name()));
            std::cout << table;
            if (!lb_out.empty()) {
                auto out = detail::open_output(lb_out);
                out << table;
            }
        } else if (*synth_cmd) {
            synth_spec.profile = parse_profile(sy_profile);
            SynthData data = make_synthetic(synth_spec);
            write_synthetic(data, sy_out);

            nlohmann::json config;
            fs::path root = fs::absolute(sy_out);
            config["output_dir"] = (root / "out").string();
            config["metric"] = "ndcg@10";
            config["seed"] = synth_spec.seed;
            nlohmann::json lang;
            lang["corpus"] = (root / "corpus.jsonl").string();
            lang["queries"] = (root / "queries.tsv").string();
            lang["dev_qrels"] = (root / "dev.qrels").string();
            if (!data.holdout.judgments.empty())
                lang["holdout_qrels"] = (root / "holdout.qrels").string();
            for (const Run& run : data.runs)
                lang["runs"][run.system_tag] =
                    (root / "runs" / (run.system_tag + ".trec")).string();
            lang["retrievers"] = nlohmann::json::array(
                {{{"name", "bm25"}, {"type", "bm25"}, {"k", synth_spec.run_depth}}});
            lang["rerankers"]["oracle"] = (root / "rr_oracle.txt").string();
            config["languages"]["synth"] = std::move(lang);
            auto out = detail::open_output((root / "experiment.json").string());
            out << config.dump(2) << '\n';
            std::cout << "wrote " << sy_out << " (seed " << synth_spec.seed << ", "
                      << synth_spec.n_docs << " docs, " << synth_spec.n_queries
                      << " queries, " << synth_spec.n_systems << " systems)\n";
        } else if (*pipeline_cmd) {
            ExperimentConfig config = load_experiment_config(pl_config);
            if (!pl_out_dir.empty()) config.output_dir = pl_out_dir;
            if (!pl_metric.empty()) config.metric = parse_metric(pl_metric);
            if (!pl_mode.empty()) config.selection_mode = parse_search_mode(pl_mode);
            if (pl_global) config.global_selection = true;
            config.threads = threads;
            PipelineResult result = run_pipeline(config);
            print_warnings(result.selection.warnings);
            std::cout << render_leaderboard(result.dev_board);
            std::cout << "artifacts under " << config.output_dir << '\n';
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
    return 0;
}
