#include "rrsum/harness.hpp"

#include "rrsum/rouge.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace rrsum {

using ordered_json = nlohmann::ordered_json;

std::string_view prompt_mode_name(PromptMode mode) {
    return mode == PromptMode::Fixed ? "fixed" : "dynamic";
}

PromptMode prompt_mode_from_name(std::string_view name) {
    if (name == "fixed") return PromptMode::Fixed;
    if (name == "dynamic") return PromptMode::Dynamic;
    throw ConfigError("unknown prompt mode '" + std::string(name) + "'");
}

namespace {

std::string format_pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string format_fixed(double value, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string sanitize_csv(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back((c == ',' || c == '\n' || c == '\r') ? ' ' : c);
    return out;
}

}  // namespace

std::vector<RadiologyReport> limit_subset(std::span<const RadiologyReport> test_set,
                                          std::size_t limit,
                                          std::uint32_t seed) {
    if (limit == 0) throw ConfigError("limit must be positive");
    if (limit >= test_set.size()) {
        return {test_set.begin(), test_set.end()};
    }
    const std::size_t stride = test_set.size() / limit;
    const std::size_t start = static_cast<std::size_t>(std::mt19937(seed)()) % stride;
    std::vector<RadiologyReport> subset;
    subset.reserve(limit);
    for (std::size_t i = start; i < test_set.size() && subset.size() < limit; i += stride) {
        subset.push_back(test_set[i]);
    }
    return subset;
}

std::string config_echo(const RunConfig& config) {
    std::ostringstream out;
    out << "mode=" << prompt_mode_name(config.mode)
        << " iterative=" << (config.iterative ? "on" : "off")
        << " ns=" << config.optimizer.n_similar
        << " t=" << format_fixed(config.optimizer.threshold, 2)
        << " gd=" << capacity_name(config.optimizer.good_capacity)
        << " bd=" << capacity_name(config.optimizer.bad_capacity)
        << " i=" << config.optimizer.max_iterations
        << " seed=" << config.seed
        << " backend=" << (config.backend_label.empty() ? "-" : config.backend_label);
    if (config.limit) out << " limit=" << *config.limit;
    return out.str();
}

namespace {

struct PerReportOutcome {
    ReportScore score;
    OptimizationTrace trace;
    std::vector<std::pair<int, Prompt>> prompts;  // per-iteration prompt dumps
};

void write_trace_json(const std::string& id, const OptimizationTrace& trace,
                      const std::filesystem::path& path) {
    ordered_json doc;
    doc["id"] = id;
    doc["final_response"] = trace.final_response;
    doc["final_score"] = trace.final_score;
    doc["prompt_tokens"] = trace.prompt_tokens;
    doc["completion_tokens"] = trace.completion_tokens;
    doc["records"] = ordered_json::array();
    for (const auto& record : trace.records) {
        ordered_json entry;
        entry["iter"] = record.iter;
        entry["response"] = record.response;
        entry["score"] = record.score;
        entry["classification"] = std::string(polarity_name(record.classification));
        doc["records"].push_back(std::move(entry));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write trace: " + path.string());
    out << doc.dump(2) << '\n';
}

PerReportOutcome evaluate_one(const RadiologyReport& test_report,
                              const std::vector<ExemplarReport>* fixed_exemplars,
                              const CorpusHandles& handles,
                              const RunConfig& config,
                              ChatBackend& backend,
                              bool collect_prompts) {
    PerReportOutcome outcome;
    outcome.score.id = test_report.id;

    OptimizerConfig optimizer = config.optimizer;
    if (!config.iterative) optimizer.max_iterations = 1;

    PromptObserver observer;
    if (collect_prompts) {
        observer = [&outcome](int iter, const Prompt& prompt) {
            outcome.prompts.emplace_back(iter, prompt);
        };
    }

    try {
        if (fixed_exemplars != nullptr) {
            outcome.trace = optimize_with_exemplars(test_report.findings, *fixed_exemplars,
                                                    optimizer, config.templates, backend,
                                                    observer);
        } else {
            SearchConfig search = config.search;
            search.seed = config.seed;
            outcome.trace =
                optimize(test_report.findings, handles, optimizer, search, config.templates,
                         backend, test_report.id, observer);
        }
    } catch (const OptimizeError& e) {
        outcome.trace = e.partial_trace();
        outcome.score.skipped = true;
        outcome.score.error = e.what();
        return outcome;
    } catch (const BackendError& e) {
        outcome.score.skipped = true;
        outcome.score.error = e.what();
        return outcome;
    }

    const TokenSequence candidate = rouge_tokenize(outcome.trace.final_response);
    const TokenSequence reference = rouge_tokenize(test_report.impression);
    outcome.score.r1 = rouge_n(candidate, reference, 1).f1;
    outcome.score.r2 = rouge_n(candidate, reference, 2).f1;
    outcome.score.rl = rouge_l(candidate, reference).f1;
    outcome.score.best_internal = outcome.trace.final_score;
    outcome.score.prompt_tokens = outcome.trace.prompt_tokens;
    outcome.score.completion_tokens = outcome.trace.completion_tokens;
    return outcome;
}

}  // namespace

EvalReport run_eval(std::span<const RadiologyReport> test_set,
                    std::span<const RadiologyReport> corpus,
                    std::span<const IndexEntry> index,
                    const RunConfig& config,
                    ChatBackend& backend) {
    if (corpus.size() != index.size()) {
        throw DataError("corpus and label index sizes differ (" + std::to_string(corpus.size()) +
                        " vs " + std::to_string(index.size()) + ")");
    }

    std::vector<RadiologyReport> limited;
    std::span<const RadiologyReport> tests = test_set;
    if (config.limit) {
        limited = limit_subset(test_set, *config.limit, config.seed);
        tests = limited;
    }

    const RuleSet rules = default_rules();
    CorpusHandles handles{corpus, index, &rules};

    // Fixed mode shares one seeded exemplar set across every test report.
    std::vector<ExemplarReport> fixed_exemplars;
    if (config.mode == PromptMode::Fixed) {
        std::unordered_map<std::string_view, const RadiologyReport*> by_id;
        by_id.reserve(corpus.size());
        for (const auto& report : corpus) by_id.emplace(report.id, &report);

        const auto sampled = systematic_sample(
            index, static_cast<std::size_t>(config.optimizer.n_similar), config.seed);
        fixed_exemplars.reserve(sampled.size());
        for (const auto& entry : sampled) {
            const auto it = by_id.find(entry.report_id);
            if (it == by_id.end()) {
                throw DataError("label index refers to unknown report id: " + entry.report_id);
            }
            fixed_exemplars.push_back({it->second->findings, it->second->impression});
        }
    }

    const bool write_outputs = !config.out_dir.empty();
    if (write_outputs) {
        std::filesystem::create_directories(config.out_dir / "traces");
        std::filesystem::create_directories(config.out_dir / "prompts");
    }

    EvalReport report;
    report.config_echo = config_echo(config);

    // Per-report runs may go in parallel (each optimization is sequential
    // inside); outcomes land in test-set order so aggregation and files stay
    // deterministic for stateless backends.
    std::vector<PerReportOutcome> outcomes(tests.size());
    const int jobs = std::max(1, config.jobs);
    const auto worker_count =
        static_cast<std::size_t>(std::min<long>(jobs, static_cast<long>(tests.size())));
    if (worker_count <= 1) {
        for (std::size_t i = 0; i < tests.size(); ++i) {
            outcomes[i] = evaluate_one(tests[i],
                                       config.mode == PromptMode::Fixed ? &fixed_exemplars : nullptr,
                                       handles, config, backend, write_outputs);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(worker_count);
        for (std::size_t w = 0; w < worker_count; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tests.size(); i = next.fetch_add(1)) {
                    outcomes[i] = evaluate_one(
                        tests[i], config.mode == PromptMode::Fixed ? &fixed_exemplars : nullptr,
                        handles, config, backend, write_outputs);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    report.rows.reserve(tests.size());
    for (std::size_t i = 0; i < tests.size(); ++i) {
        PerReportOutcome& outcome = outcomes[i];
        if (write_outputs) {
            write_trace_json(tests[i].id, outcome.trace,
                             config.out_dir / "traces" / (tests[i].id + ".json"));
            std::ofstream prompts(config.out_dir / "prompts" / (tests[i].id + ".jsonl"),
                                  std::ios::binary);
            for (const auto& [iter, prompt] : outcome.prompts) {
                write_prompt_jsonl(prompt, prompts);
            }
        }
        report.rows.push_back(std::move(outcome.score));
    }

    double sum_r1 = 0, sum_r2 = 0, sum_rl = 0;
    long total_prompt_tokens = 0, total_completion_tokens = 0;
    for (const auto& row : report.rows) {
        total_prompt_tokens += row.prompt_tokens;
        total_completion_tokens += row.completion_tokens;
        if (row.skipped) {
            ++report.skipped;
            continue;
        }
        ++report.completed;
        sum_r1 += row.r1;
        sum_r2 += row.r2;
        sum_rl += row.rl;
    }
    if (report.completed > 0) {
        report.mean_r1 = sum_r1 / report.completed;
        report.mean_r2 = sum_r2 / report.completed;
        report.mean_rl = sum_rl / report.completed;
    }
    report.cost = static_cast<double>(total_prompt_tokens) / 1000.0 * config.price_per_1k_prompt +
                  static_cast<double>(total_completion_tokens) / 1000.0 *
                      config.price_per_1k_completion;

    if (write_outputs) {
        std::ofstream text_out(config.out_dir / "report.txt", std::ios::binary);
        text_out << render_report_text(report);
        std::ofstream csv_out(config.out_dir / "report.csv", std::ios::binary);
        csv_out << render_report_csv(report);
    }
    return report;
}

SweepAxes SweepAxes::defaults() {
    SweepAxes axes;
    axes.n_similar = {5, 10, 15, 18};
    axes.threshold = {0.5, 0.65, 0.7, 0.75};
    axes.good_bad = {{0, 1}, {1, 0}, {1, 1}, {1, std::nullopt},
                     {std::nullopt, 1}, {std::nullopt, std::nullopt}};
    axes.iterations = {7, 12, 15, 17, 20};
    return axes;
}

std::vector<SweepRow> run_sweep(std::span<const RadiologyReport> test_set,
                                std::span<const RadiologyReport> corpus,
                                std::span<const IndexEntry> index,
                                const RunConfig& base,
                                const SweepAxes& axes,
                                ChatBackend& backend) {
    std::vector<SweepRow> rows;

    auto run_cell = [&](const std::string& setting, const RunConfig& cell_config) {
        RunConfig config = cell_config;
        config.out_dir.clear();  // sweep cells write no per-report files
        rows.push_back({setting, run_eval(test_set, corpus, index, config, backend)});
    };

    if (axes.cartesian) {
        for (const int ns : axes.n_similar.empty() ? std::vector<int>{base.optimizer.n_similar}
                                                   : axes.n_similar) {
            for (const double t : axes.threshold.empty()
                                      ? std::vector<double>{base.optimizer.threshold}
                                      : axes.threshold) {
                for (const auto& [gd, bd] :
                     axes.good_bad.empty()
                         ? std::vector<std::pair<Capacity, Capacity>>{{base.optimizer.good_capacity,
                                                                       base.optimizer.bad_capacity}}
                         : axes.good_bad) {
                    for (const int iters : axes.iterations.empty()
                                               ? std::vector<int>{base.optimizer.max_iterations}
                                               : axes.iterations) {
                        RunConfig config = base;
                        config.optimizer.n_similar = ns;
                        config.optimizer.threshold = t;
                        config.optimizer.good_capacity = gd;
                        config.optimizer.bad_capacity = bd;
                        config.optimizer.max_iterations = iters;
                        std::ostringstream setting;
                        setting << "ns=" << ns << " t=" << format_fixed(t, 2) << " gd="
                                << capacity_name(gd) << " bd=" << capacity_name(bd) << " i="
                                << iters;
                        run_cell(setting.str(), config);
                    }
                }
            }
        }
        return rows;
    }

    for (const int ns : axes.n_similar) {
        RunConfig config = base;
        config.optimizer.n_similar = ns;
        run_cell("ns=" + std::to_string(ns), config);
    }
    for (const double t : axes.threshold) {
        RunConfig config = base;
        config.optimizer.threshold = t;
        run_cell("t=" + format_fixed(t, 2), config);
    }
    for (const auto& [gd, bd] : axes.good_bad) {
        RunConfig config = base;
        config.optimizer.good_capacity = gd;
        config.optimizer.bad_capacity = bd;
        run_cell("gd=" + capacity_name(gd) + " bd=" + capacity_name(bd), config);
    }
    for (const int iters : axes.iterations) {
        RunConfig config = base;
        config.optimizer.max_iterations = iters;
        run_cell("i=" + std::to_string(iters), config);
    }
    return rows;
}

std::string render_report_text(const EvalReport& report) {
    std::ostringstream out;
    out << "run: " << report.config_echo << '\n';
    out << "reports: " << report.completed << " completed, " << report.skipped << " skipped\n\n";
    out << "setting                R-1      R-2      R-L      Cost\n";
    if (report.completed + report.skipped > 0) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-20s %8s %8s %8s   $%s\n", "overall",
                      format_pct(report.mean_r1).c_str(), format_pct(report.mean_r2).c_str(),
                      format_pct(report.mean_rl).c_str(), format_fixed(report.cost, 4).c_str());
        out << line;
    }

    out << "\nid        R-1      R-2      R-L      best    p_tok    c_tok  status\n";
    for (const auto& row : report.rows) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-8s %8s %8s %8s  %6s %8ld %8ld  %s\n", row.id.c_str(),
                      format_pct(row.r1).c_str(), format_pct(row.r2).c_str(),
                      format_pct(row.rl).c_str(), format_fixed(row.best_internal, 4).c_str(),
                      row.prompt_tokens, row.completion_tokens,
                      row.skipped ? ("skipped: " + row.error).c_str() : "ok");
        out << line;
    }
    return out.str();
}

std::string render_report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "id,r1,r2,rl,best_score,prompt_tokens,completion_tokens,status\n";
    for (const auto& row : report.rows) {
        out << row.id << ',' << format_pct(row.r1) << ',' << format_pct(row.r2) << ','
            << format_pct(row.rl) << ',' << format_fixed(row.best_internal, 4) << ','
            << row.prompt_tokens << ',' << row.completion_tokens << ','
            << (row.skipped ? "skipped: " + sanitize_csv(row.error) : "ok") << '\n';
    }
    if (!report.rows.empty()) {
        out << "mean," << format_pct(report.mean_r1) << ',' << format_pct(report.mean_r2) << ','
            << format_pct(report.mean_rl) << ",,,,"
            << "completed=" << report.completed << " skipped=" << report.skipped << '\n';
    }
    return out.str();
}

std::string render_sweep_text(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << "setting                        R-1      R-2      R-L      Cost\n";
    for (const auto& row : rows) {
        char line[200];
        std::snprintf(line, sizeof(line), "%-28s %8s %8s %8s   $%s\n", row.setting.c_str(),
                      format_pct(row.report.mean_r1).c_str(),
                      format_pct(row.report.mean_r2).c_str(),
                      format_pct(row.report.mean_rl).c_str(),
                      format_fixed(row.report.cost, 4).c_str());
        out << line;
    }
    return out.str();
}

std::string render_sweep_csv(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << "setting,r1,r2,rl,cost,completed,skipped\n";
    for (const auto& row : rows) {
        out << sanitize_csv(row.setting) << ',' << format_pct(row.report.mean_r1) << ','
            << format_pct(row.report.mean_r2) << ',' << format_pct(row.report.mean_rl) << ','
            << format_fixed(row.report.cost, 4) << ',' << row.report.completed << ','
            << row.report.skipped << '\n';
    }
    return out.str();
}

}  // namespace rrsum
