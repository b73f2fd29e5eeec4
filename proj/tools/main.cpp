#include "rrsum/config.hpp"
#include "rrsum/harness.hpp"
#include "rrsum/rouge.hpp"
#include "rrsum/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace rrsum;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RuleSet rules_from_flag(const std::string& rules_path) {
    return rules_path.empty() ? default_rules() : load_rules(rules_path);
}

struct GlobalOptions {
    std::string config_file;
    std::string backend_spec = "mock:nearest_echo";
    std::string template_file;
    std::uint32_t seed = 0;
    std::optional<double> early_stop_at;
};

struct LoadedRun {
    RunConfig run;
    BackendConfig backend;
};

LoadedRun assemble_run(const GlobalOptions& global) {
    LoadedRun loaded;
    loaded.run.seed = global.seed;
    loaded.run.search.seed = global.seed;
    if (!global.config_file.empty()) {
        apply_config(KeyValueConfig::parse_file(global.config_file), loaded.run, loaded.backend);
    }
    if (!global.template_file.empty()) {
        loaded.run.templates = load_template_config(global.template_file);
    }
    if (global.early_stop_at) loaded.run.optimizer.early_stop_at = global.early_stop_at;
    loaded.run.backend_label = global.backend_spec;
    return loaded;
}

int cmd_ingest(const std::string& raw_dir, const std::string& out_path, bool keep_ineligible) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(raw_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<RadiologyReport> reports;
    int parse_failures = 0;
    for (const auto& file : files) {
        try {
            reports.push_back(parse_report(read_file(file), file.stem().string()));
        } catch (const MissingSectionError& e) {
            ++parse_failures;
            std::cerr << "skip " << file.filename().string() << ": " << e.what() << '\n';
        }
    }

    const std::size_t parsed = reports.size();
    if (!keep_ineligible) reports = filter_eligible(reports);
    save_corpus(reports, out_path);

    std::cout << "files: " << files.size() << "  parsed: " << parsed
              << "  parse failures: " << parse_failures << "  written: " << reports.size()
              << " -> " << out_path << '\n';
    return 0;
}

int cmd_stats(const std::string& corpus_path) {
    const auto corpus = load_corpus(corpus_path);
    const CorpusStats stats = compute_stats(corpus);
    char line[160];
    std::snprintf(line, sizeof(line),
                  "reports: %d\navg words (findings): %.2f\navg words (impression): %.2f\n"
                  "avg sentences (findings): %.2f\navg sentences (impression): %.2f\n",
                  stats.report_count, stats.avg_words_findings, stats.avg_words_impression,
                  stats.avg_sentences_findings, stats.avg_sentences_impression);
    std::cout << line;
    return 0;
}

int cmd_label(const std::string& corpus_path, const std::string& out_path,
              const std::string& rules_path) {
    const auto corpus = load_corpus(corpus_path);
    const RuleSet rules = rules_from_flag(rules_path);
    const auto index = build_index(corpus, rules);
    save_labels(index, out_path);
    std::cout << "labeled " << index.size() << " reports -> " << out_path << '\n';
    return 0;
}

int cmd_search(const std::string& labels_path, const std::string& query_id, int k,
               std::optional<std::size_t> subset, std::uint32_t seed) {
    const auto index = load_labels(labels_path);
    const auto query = std::find_if(index.begin(), index.end(), [&](const IndexEntry& entry) {
        return entry.report_id == query_id;
    });
    if (query == index.end()) {
        throw DataError("query id '" + query_id + "' not present in " + labels_path);
    }

    SearchConfig config;
    config.n_similar = k;
    config.subset_size = subset;
    config.seed = seed;
    for (const auto& hit : top_k_similar(query->vector, index, config, query_id)) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s\t%.4f\n", hit.report_id.c_str(), hit.distance);
        std::cout << line;
    }
    return 0;
}

int cmd_score(const std::string& candidate_path, const std::string& reference_path,
              const std::string& metric) {
    const TokenSequence candidate = rouge_tokenize(read_file(candidate_path));
    const TokenSequence reference = rouge_tokenize(read_file(reference_path));

    RougeScore score;
    if (metric == "r1") score = rouge_n(candidate, reference, 1);
    else if (metric == "r2") score = rouge_n(candidate, reference, 2);
    else if (metric == "rl") score = rouge_l(candidate, reference);
    else throw ConfigError("unknown metric '" + metric + "' (use r1, r2 or rl)");

    char line[128];
    std::snprintf(line, sizeof(line), "P=%.4f R=%.4f F1=%.4f\n", score.precision, score.recall,
                  score.f1);
    std::cout << line;
    return 0;
}

int cmd_summarize(const GlobalOptions& global, const std::string& corpus_path,
                  const std::string& labels_path, const std::string& findings_path,
                  const std::string& trace_path, const std::string& rules_path) {
    LoadedRun loaded = assemble_run(global);
    const auto corpus = load_corpus(corpus_path);
    const auto index = labels_path.empty() ? build_index(corpus, rules_from_flag(rules_path))
                                           : load_labels(labels_path);
    const RuleSet rules = rules_from_flag(rules_path);
    const auto backend = make_backend(global.backend_spec, loaded.backend);

    const std::string findings{text::trim(read_file(findings_path))};
    if (findings.empty()) throw DataError("findings file is empty: " + findings_path);

    CorpusHandles handles{corpus, index, &rules};
    const OptimizationTrace trace =
        optimize(findings, handles, loaded.run.optimizer, loaded.run.search,
                 loaded.run.templates, *backend);

    if (!trace_path.empty()) {
        nlohmann::ordered_json doc;
        doc["final_response"] = trace.final_response;
        doc["final_score"] = trace.final_score;
        doc["prompt_tokens"] = trace.prompt_tokens;
        doc["completion_tokens"] = trace.completion_tokens;
        doc["records"] = nlohmann::ordered_json::array();
        for (const auto& record : trace.records) {
            nlohmann::ordered_json entry;
            entry["iter"] = record.iter;
            entry["response"] = record.response;
            entry["score"] = record.score;
            entry["classification"] = std::string(polarity_name(record.classification));
            doc["records"].push_back(std::move(entry));
        }
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) throw DataError("cannot write trace: " + trace_path);
        out << doc.dump(2) << '\n';
    }

    std::cout << trace.final_response << '\n';
    return 0;
}

struct EvalArgs {
    std::string corpus_path, labels_path, test_path, out_dir, rules_path;
    std::string mode = "dynamic";
    bool no_iterative = false;
    int jobs = 1;
    std::optional<int> limit;
};

int cmd_eval(const GlobalOptions& global, const EvalArgs& args) {
    LoadedRun loaded = assemble_run(global);
    loaded.run.mode = prompt_mode_from_name(args.mode);
    if (args.no_iterative) loaded.run.iterative = false;
    if (args.limit) {
        if (*args.limit <= 0) throw ConfigError("--limit must be positive");
        loaded.run.limit = static_cast<std::size_t>(*args.limit);
    }
    loaded.run.jobs = std::min(args.jobs, loaded.backend.max_in_flight);
    loaded.run.out_dir = args.out_dir;

    const auto corpus = load_corpus(args.corpus_path);
    const auto test_set_all = load_corpus(args.test_path);
    const auto test_set = filter_eligible(test_set_all);
    const auto index = args.labels_path.empty()
                           ? build_index(corpus, rules_from_flag(args.rules_path))
                           : load_labels(args.labels_path);
    const auto backend = make_backend(global.backend_spec, loaded.backend);

    const EvalReport report = run_eval(test_set, corpus, index, loaded.run, *backend);
    std::cout << render_report_text(report);
    return 0;
}

int cmd_sweep(const GlobalOptions& global, const EvalArgs& args, const std::string& axis,
              bool cartesian) {
    LoadedRun loaded = assemble_run(global);
    loaded.run.mode = prompt_mode_from_name(args.mode);
    if (args.no_iterative) loaded.run.iterative = false;
    if (args.limit) loaded.run.limit = static_cast<std::size_t>(*args.limit);
    loaded.run.jobs = std::min(args.jobs, loaded.backend.max_in_flight);

    SweepAxes axes = SweepAxes::defaults();
    axes.cartesian = cartesian;
    if (axis == "ns") {
        axes.threshold.clear(); axes.good_bad.clear(); axes.iterations.clear();
    } else if (axis == "t") {
        axes.n_similar.clear(); axes.good_bad.clear(); axes.iterations.clear();
    } else if (axis == "gdbd") {
        axes.n_similar.clear(); axes.threshold.clear(); axes.iterations.clear();
    } else if (axis == "i") {
        axes.n_similar.clear(); axes.threshold.clear(); axes.good_bad.clear();
    } else if (axis != "all") {
        throw ConfigError("unknown sweep axis '" + axis + "' (use ns, t, gdbd, i or all)");
    }

    const auto corpus = load_corpus(args.corpus_path);
    const auto test_set_all = load_corpus(args.test_path);
    const auto test_set = filter_eligible(test_set_all);
    const auto index = args.labels_path.empty()
                           ? build_index(corpus, rules_from_flag(args.rules_path))
                           : load_labels(args.labels_path);
    const auto backend = make_backend(global.backend_spec, loaded.backend);

    const auto rows = run_sweep(test_set, corpus, index, loaded.run, axes, *backend);
    const std::string rendered = render_sweep_text(rows);
    std::cout << rendered;

    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        std::ofstream text_out(std::filesystem::path(args.out_dir) / "sweep.txt", std::ios::binary);
        text_out << rendered;
        std::ofstream csv_out(std::filesystem::path(args.out_dir) / "sweep.csv", std::ios::binary);
        csv_out << render_sweep_csv(rows);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radiology report impression generation via dynamic few-shot prompts "
                 "and iterative Rouge-guided optimization"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_file, "INI-style config file");
    app.add_option("--backend", global.backend_spec,
                   "Backend: http, mock:nearest_echo, mock:template:<text> or mock:<script.json>");
    app.add_option("--template", global.template_file, "Prompt template JSON file");
    app.add_option("--seed", global.seed, "Run seed");
    app.add_option("--early-stop-at", global.early_stop_at,
                   "Stop iterating once a response scores at least this (default: off)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse raw reports into a JSONL corpus");
    std::string raw_dir, out_path;
    bool keep_ineligible = false;
    ingest->add_option("--raw-dir", raw_dir, "Directory of raw report text files")->required();
    ingest->add_option("--out", out_path, "Output corpus JSONL")->required();
    ingest->add_flag("--keep-ineligible", keep_ineligible, "Skip the eligibility filter");

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus statistics");
    std::string stats_corpus;
    stats->add_option("--corpus", stats_corpus, "Corpus JSONL")->required();

    // label
    auto* label = app.add_subcommand("label", "Extract label vectors for a corpus");
    std::string label_corpus, label_out, label_rules;
    label->add_option("--corpus", label_corpus, "Corpus JSONL")->required();
    label->add_option("--out", label_out, "Output labels TSV")->required();
    label->add_option("--rules", label_rules, "Rules JSON (default: bundled rules)");

    // search
    auto* search = app.add_subcommand("search", "Find the most similar reports to a query");
    std::string search_labels, search_query;
    int search_k = 15;
    std::optional<std::size_t> search_subset;
    search->add_option("--labels", search_labels, "Labels TSV")->required();
    search->add_option("--query-id", search_query, "Query report id")->required();
    search->add_option("--k", search_k, "Number of results");
    search->add_option("--subset", search_subset, "Systematic subsample size before search");

    // score
    auto* score = app.add_subcommand("score", "Rouge score between two text files");
    std::string cand_path, ref_path, metric = "r1";
    score->add_option("--candidate", cand_path, "Candidate text file")->required();
    score->add_option("--reference", ref_path, "Reference text file")->required();
    score->add_option("--metric", metric, "r1, r2 or rl");

    // summarize
    auto* summarize = app.add_subcommand("summarize", "Generate one impression");
    std::string sum_corpus, sum_labels, sum_findings, sum_trace, sum_rules;
    summarize->add_option("--corpus", sum_corpus, "Corpus JSONL")->required();
    summarize->add_option("--labels", sum_labels, "Labels TSV (default: label on the fly)");
    summarize->add_option("--findings", sum_findings, "File with the findings text")->required();
    summarize->add_option("--trace", sum_trace, "Write the optimization trace JSON here");
    summarize->add_option("--rules", sum_rules, "Rules JSON (default: bundled rules)");

    // eval
    auto* eval = app.add_subcommand("eval", "Batch evaluation over a test set");
    EvalArgs eval_args;
    eval->add_option("--corpus", eval_args.corpus_path, "Corpus JSONL")->required();
    eval->add_option("--labels", eval_args.labels_path, "Labels TSV (default: label on the fly)");
    eval->add_option("--test", eval_args.test_path, "Test set JSONL")->required();
    eval->add_option("--out", eval_args.out_dir, "Output directory")->required();
    eval->add_option("--mode", eval_args.mode, "dynamic or fixed");
    eval->add_flag("--no-iterative", eval_args.no_iterative, "Single-shot prompting");
    eval->add_option("--limit", eval_args.limit, "Seeded systematic subset of the test set");
    eval->add_option("--jobs", eval_args.jobs, "Concurrent reports (capped by max_in_flight)");
    eval->add_option("--rules", eval_args.rules_path, "Rules JSON (default: bundled rules)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Hyperparameter sweep");
    EvalArgs sweep_args;
    std::string sweep_axis = "all";
    bool sweep_cartesian = false;
    sweep->add_option("--corpus", sweep_args.corpus_path, "Corpus JSONL")->required();
    sweep->add_option("--labels", sweep_args.labels_path, "Labels TSV");
    sweep->add_option("--test", sweep_args.test_path, "Test set JSONL")->required();
    sweep->add_option("--out", sweep_args.out_dir, "Output directory for sweep.txt/sweep.csv");
    sweep->add_option("--axis", sweep_axis, "ns, t, gdbd, i or all");
    sweep->add_flag("--cartesian", sweep_cartesian, "Full grid instead of per-axis");
    sweep->add_option("--mode", sweep_args.mode, "dynamic or fixed");
    sweep->add_flag("--no-iterative", sweep_args.no_iterative, "Single-shot prompting");
    sweep->add_option("--limit", sweep_args.limit, "Seeded systematic subset of the test set");
    sweep->add_option("--jobs", sweep_args.jobs, "Concurrent reports");
    sweep->add_option("--rules", sweep_args.rules_path, "Rules JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(raw_dir, out_path, keep_ineligible);
        if (stats->parsed()) return cmd_stats(stats_corpus);
        if (label->parsed()) return cmd_label(label_corpus, label_out, label_rules);
        if (search->parsed()) {
            return cmd_search(search_labels, search_query, search_k, search_subset, global.seed);
        }
        if (score->parsed()) return cmd_score(cand_path, ref_path, metric);
        if (summarize->parsed()) {
            return cmd_summarize(global, sum_corpus, sum_labels, sum_findings, sum_trace,
                                 sum_rules);
        }
        if (eval->parsed()) return cmd_eval(global, eval_args);
        if (sweep->parsed()) return cmd_sweep(global, sweep_args, sweep_axis, sweep_cartesian);
    } catch (const rrsum::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const rrsum::BackendError& e) {
        std::cerr << "backend error: " << e.what() << '\n';
        return 3;
    } catch (const rrsum::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
