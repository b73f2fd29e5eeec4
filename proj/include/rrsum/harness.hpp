#pragma once

#include "rrsum/backend.hpp"
#include "rrsum/optimizer.hpp"
#include "rrsum/prompt.hpp"
#include "rrsum/report.hpp"
#include "rrsum/similarity.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rrsum {

enum class PromptMode { Fixed, Dynamic };

std::string_view prompt_mode_name(PromptMode mode);
PromptMode prompt_mode_from_name(std::string_view name);

struct RunConfig {
    PromptMode mode = PromptMode::Dynamic;
    bool iterative = true;
    OptimizerConfig optimizer;
    SearchConfig search;
    PromptTemplateConfig templates;
    std::uint32_t seed = 0;
    std::optional<std::size_t> limit;  // seeded systematic subset of the test set
    int jobs = 1;                      // clamped to the backend in-flight cap
    std::filesystem::path out_dir;     // empty: no files written
    std::string backend_label;         // echoed into reports
    double price_per_1k_prompt = 0.001;
    double price_per_1k_completion = 0.002;
};

struct ReportScore {
    std::string id;
    double r1 = 0.0;  // F1 against the reference impression
    double r2 = 0.0;
    double rl = 0.0;
    double best_internal = 0.0;  // best mean-Rouge-1 seen by the optimizer
    long prompt_tokens = 0;
    long completion_tokens = 0;
    bool skipped = false;
    std::string error;
};

struct EvalReport {
    std::vector<ReportScore> rows;
    double mean_r1 = 0.0;  // over completed rows
    double mean_r2 = 0.0;
    double mean_rl = 0.0;
    int completed = 0;
    int skipped = 0;
    double cost = 0.0;
    std::string config_echo;
};

// Runs the configured pipeline over every test report: retrieve exemplars
// (dynamic) or reuse the seeded fixed set, optimize (one iteration when
// iterative is off), then score the final impression against the reference
// with Rouge-1/2/L. Backend failures skip the report and are surfaced in the
// skip count; means cover completed reports only. With out_dir set, writes
// report.txt, report.csv, traces/<id>.json and prompts/<id>.jsonl.
EvalReport run_eval(std::span<const RadiologyReport> test_set,
                    std::span<const RadiologyReport> corpus,
                    std::span<const IndexEntry> index,
                    const RunConfig& config,
                    ChatBackend& backend);

struct SweepAxes {
    std::vector<int> n_similar;
    std::vector<double> threshold;
    std::vector<std::pair<Capacity, Capacity>> good_bad;
    std::vector<int> iterations;
    bool cartesian = false;  // default: per-axis sweep around the base config

    // N_s in {5,10,15,18}, T in {0.5,0.65,0.7,0.75},
    // (Gd,Bd) in {(0,1),(1,0),(1,1),(1,n),(n,1),(n,n)}, I in {7,12,15,17,20}.
    static SweepAxes defaults();
};

struct SweepRow {
    std::string setting;
    EvalReport report;
};

std::vector<SweepRow> run_sweep(std::span<const RadiologyReport> test_set,
                                std::span<const RadiologyReport> corpus,
                                std::span<const IndexEntry> index,
                                const RunConfig& base,
                                const SweepAxes& axes,
                                ChatBackend& backend);

// Table-style rendering: Rouge percentages to 2 decimals, columns R-1, R-2,
// R-L, Cost. Empty reports render headers only.
std::string render_report_text(const EvalReport& report);
std::string render_report_csv(const EvalReport& report);
std::string render_sweep_text(std::span<const SweepRow> rows);
std::string render_sweep_csv(std::span<const SweepRow> rows);

// Seeded systematic subset of the test set used by --limit.
std::vector<RadiologyReport> limit_subset(std::span<const RadiologyReport> test_set,
                                          std::size_t limit,
                                          std::uint32_t seed);

std::string config_echo(const RunConfig& config);

}  // namespace rrsum
