#pragma once

#include "rrsum/backend.hpp"
#include "rrsum/labeler.hpp"
#include "rrsum/prompt.hpp"
#include "rrsum/report.hpp"
#include "rrsum/similarity.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrsum {

// Capacities for the good/bad feedback pools: nullopt means unbounded ("n").
using Capacity = std::optional<int>;

std::string capacity_name(Capacity c);          // "0", "1", ..., "n"
Capacity capacity_from_name(std::string_view s);

struct OptimizerConfig {
    int n_similar = 15;         // N_s
    double threshold = 0.7;     // Thre_S; a response is Good iff score > threshold
    int max_iterations = 17;    // I
    Capacity good_capacity = 1;           // Gd
    Capacity bad_capacity = std::nullopt; // Bd: bounded only by the token budget
    int token_budget = 3600;
    std::optional<double> early_stop_at;  // off by default; stops once score >= value
};

struct IterationRecord {
    int iter;
    std::string response;
    double score;
    Polarity classification;  // Good iff score > threshold
};

struct OptimizationTrace {
    std::vector<IterationRecord> records;
    std::string final_response;  // the argmax-score response
    double final_score = 0.0;
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

// Carries the partial trace accumulated before a backend failure.
class OptimizeError : public BackendError {
public:
    OptimizeError(const std::string& what, OptimizationTrace partial);
    const OptimizationTrace& partial_trace() const { return trace_; }

private:
    OptimizationTrace trace_;
};

// Mean Rouge-1 of the response against the exemplar impressions. The test
// report's reference impression is never an input here.
double evaluate_response(std::string_view response, std::span<const ExemplarReport> exemplars);

Polarity classify(double score, const OptimizerConfig& config);

struct FeedbackState {
    std::vector<FeedbackExemplar> goods;
    std::deque<FeedbackExemplar> bads;

    bool empty() const { return goods.empty() && bads.empty(); }
};

// Good responses: appended up to capacity; at capacity the weakest retained
// good is replaced only when the new score strictly exceeds it. Bad
// responses: FIFO up to capacity. Duplicate response text is not re-added.
void update_feedback(FeedbackState& state, const IterationRecord& record,
                     const OptimizerConfig& config);

using PromptObserver = std::function<void(int iter, const Prompt&)>;

// Algorithm core: iteration 0 sends the dynamic prompt; later iterations
// send the iterative prompt rebuilt from the current feedback state (or the
// dynamic prompt again while the state is empty). Each response is scored
// against the exemplar impressions and classified. Runs exactly
// max_iterations iterations unless early_stop_at is set. Backend failures
// raise OptimizeError with the partial trace.
OptimizationTrace optimize_with_exemplars(std::string_view test_findings,
                                          std::span<const ExemplarReport> exemplars,
                                          const OptimizerConfig& config,
                                          const PromptTemplateConfig& templates,
                                          ChatBackend& backend,
                                          const PromptObserver& on_prompt = {});

struct CorpusHandles {
    std::span<const RadiologyReport> corpus;
    std::span<const IndexEntry> index;
    const RuleSet* rules = nullptr;
};

// Labels the findings, retrieves the n_similar nearest reports (excluding
// exclude_id), and runs the iteration loop on them. n_similar comes from the
// OptimizerConfig; subset_size and seed from the SearchConfig.
OptimizationTrace optimize(std::string_view test_findings,
                           const CorpusHandles& handles,
                           const OptimizerConfig& config,
                           const SearchConfig& search,
                           const PromptTemplateConfig& templates,
                           ChatBackend& backend,
                           std::string_view exclude_id = {},
                           const PromptObserver& on_prompt = {});

// Retrieval + exemplar assembly as used by optimize(); exposed for the
// harness so fixed-prompt runs can share the same plumbing.
std::vector<ExemplarReport> retrieve_exemplars(const LabelVector& query,
                                               const CorpusHandles& handles,
                                               const SearchConfig& search,
                                               std::string_view exclude_id = {});

}  // namespace rrsum
