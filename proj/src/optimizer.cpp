#include "rrsum/optimizer.hpp"

#include "rrsum/rouge.hpp"

#include <algorithm>
#include <unordered_map>

namespace rrsum {

std::string capacity_name(Capacity c) {
    return c ? std::to_string(*c) : "n";
}

Capacity capacity_from_name(std::string_view s) {
    if (s == "n") return std::nullopt;
    try {
        std::size_t consumed = 0;
        const int value = std::stoi(std::string(s), &consumed);
        if (consumed == s.size() && value >= 0) return value;
    } catch (const std::exception&) {
    }
    throw ConfigError("capacity must be a non-negative integer or 'n', got '" + std::string(s) +
                      "'");
}

OptimizeError::OptimizeError(const std::string& what, OptimizationTrace partial)
    : BackendError(what), trace_(std::move(partial)) {}

double evaluate_response(std::string_view response, std::span<const ExemplarReport> exemplars) {
    if (exemplars.empty()) throw DataError("response evaluation needs exemplars");
    std::vector<std::string> impressions;
    impressions.reserve(exemplars.size());
    for (const auto& exemplar : exemplars) impressions.push_back(exemplar.impression);
    return mean_rouge1_against(response, impressions);
}

Polarity classify(double score, const OptimizerConfig& config) {
    return score > config.threshold ? Polarity::Good : Polarity::Bad;
}

namespace {

bool contains_text(const std::vector<FeedbackExemplar>& pool, const std::string& text) {
    return std::any_of(pool.begin(), pool.end(),
                       [&](const FeedbackExemplar& e) { return e.response == text; });
}

bool contains_text(const std::deque<FeedbackExemplar>& pool, const std::string& text) {
    return std::any_of(pool.begin(), pool.end(),
                       [&](const FeedbackExemplar& e) { return e.response == text; });
}

// Argmax-score response wins; earliest iteration on ties.
void finalize(OptimizationTrace& trace) {
    trace.final_response.clear();
    trace.final_score = 0.0;
    bool found = false;
    for (const auto& record : trace.records) {
        if (!found || record.score > trace.final_score) {
            trace.final_response = record.response;
            trace.final_score = record.score;
            found = true;
        }
    }
}

}  // namespace

void update_feedback(FeedbackState& state, const IterationRecord& record,
                     const OptimizerConfig& config) {
    const FeedbackExemplar exemplar{record.response, record.classification, record.score};

    if (record.classification == Polarity::Good) {
        if (config.good_capacity && *config.good_capacity == 0) return;
        if (contains_text(state.goods, exemplar.response)) return;
        if (!config.good_capacity ||
            state.goods.size() < static_cast<std::size_t>(*config.good_capacity)) {
            state.goods.push_back(exemplar);
            return;
        }
        // At capacity: replace the weakest retained good only on a strict
        // improvement.
        auto weakest = std::min_element(
            state.goods.begin(), state.goods.end(),
            [](const FeedbackExemplar& a, const FeedbackExemplar& b) { return a.score < b.score; });
        if (exemplar.score > weakest->score) *weakest = exemplar;
        return;
    }

    if (config.bad_capacity && *config.bad_capacity == 0) return;
    if (contains_text(state.bads, exemplar.response)) return;
    state.bads.push_back(exemplar);
    if (config.bad_capacity) {
        while (state.bads.size() > static_cast<std::size_t>(*config.bad_capacity)) {
            state.bads.pop_front();  // oldest first
        }
    }
}

OptimizationTrace optimize_with_exemplars(std::string_view test_findings,
                                          std::span<const ExemplarReport> exemplars,
                                          const OptimizerConfig& config,
                                          const PromptTemplateConfig& templates,
                                          ChatBackend& backend,
                                          const PromptObserver& on_prompt) {
    if (config.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");

    const Prompt dynamic_prompt = build_dynamic_prompt(test_findings, exemplars, templates);

    OptimizationTrace trace;
    FeedbackState state;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        // Iteration 0 sends the dynamic prompt; an empty feedback state is
        // only reachable later when capacities are zero, and falls back to it.
        Prompt prompt;
        if (iter == 0 || state.empty()) {
            prompt = dynamic_prompt;
        } else {
            std::vector<FeedbackExemplar> bads(state.bads.begin(), state.bads.end());
            prompt = build_iterative_prompt(dynamic_prompt, state.goods, bads, templates,
                                            config.token_budget);
        }
        if (on_prompt) on_prompt(iter, prompt);

        CompletionResult result;
        try {
            result = backend.complete(prompt);
        } catch (const BackendError& e) {
            finalize(trace);
            throw OptimizeError(std::string(e.what()) + " (iteration " + std::to_string(iter) +
                                ")", std::move(trace));
        }

        const double score = evaluate_response(result.text, exemplars);
        const IterationRecord record{iter, result.text, score, classify(score, config)};
        trace.records.push_back(record);
        trace.prompt_tokens += result.prompt_tokens;
        trace.completion_tokens += result.completion_tokens;
        update_feedback(state, record, config);

        if (config.early_stop_at && score >= *config.early_stop_at) break;
    }

    finalize(trace);
    return trace;
}

std::vector<ExemplarReport> retrieve_exemplars(const LabelVector& query,
                                               const CorpusHandles& handles,
                                               const SearchConfig& search,
                                               std::string_view exclude_id) {
    const auto hits = top_k_similar(query, handles.index, search, exclude_id);

    std::unordered_map<std::string_view, const RadiologyReport*> by_id;
    by_id.reserve(handles.corpus.size());
    for (const auto& report : handles.corpus) by_id.emplace(report.id, &report);

    std::vector<ExemplarReport> exemplars;
    exemplars.reserve(hits.size());
    for (const auto& hit : hits) {
        const auto it = by_id.find(hit.report_id);
        if (it == by_id.end()) {
            throw DataError("label index refers to unknown report id: " + hit.report_id);
        }
        exemplars.push_back({it->second->findings, it->second->impression});
    }
    return exemplars;
}

OptimizationTrace optimize(std::string_view test_findings,
                           const CorpusHandles& handles,
                           const OptimizerConfig& config,
                           const SearchConfig& search,
                           const PromptTemplateConfig& templates,
                           ChatBackend& backend,
                           std::string_view exclude_id,
                           const PromptObserver& on_prompt) {
    if (handles.rules == nullptr) throw ConfigError("optimize needs a rule set");

    const LabelVector query = label_report(test_findings, *handles.rules);
    SearchConfig effective = search;
    effective.n_similar = config.n_similar;
    const auto exemplars = retrieve_exemplars(query, handles, effective, exclude_id);
    return optimize_with_exemplars(test_findings, exemplars, config, templates, backend,
                                   on_prompt);
}

}  // namespace rrsum
