#pragma once

#include "arqa/corpus.hpp"
#include "arqa/postproc.hpp"
#include "arqa/text.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace arqa::eval {

class eval_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One ranked prediction of a run file.
struct RunAnswer {
    std::string answer;
    int rank = 1; // 1-based
    double score = 0.0;
    std::size_t start_token = 0;
    std::size_t end_token = 0;
};

// pq_id -> predictions ordered by rank; an empty vector is an explicit
// zero-answer prediction.
using RunFile = std::map<std::string, std::vector<RunAnswer>>;

RunFile load_run(const std::string& path);
void save_run(const RunFile& run, const std::string& path);
RunFile run_from_ranked_lists(const std::vector<postproc::RankedAnswerList>& lists);

// Inclusive token range used by the scorer.
struct SpanRange {
    std::size_t start = 0;
    std::size_t end = 0;
};

// Gold answers snapped to token ranges of the passage tokenization.
std::vector<SpanRange> gold_token_ranges(const std::vector<corpus::GoldAnswer>& golds,
                                         const std::vector<text::Token>& tokens);

// Entry (i, j) is the token-level F1 of prediction i against gold j.
std::vector<std::vector<double>> partial_match_matrix(const std::vector<SpanRange>& preds,
                                                      const std::vector<SpanRange>& golds);

// Partial Average Precision at rank k. Zero-answer questions score 1.0 for
// an empty prediction list and 0.0 otherwise. Each rank greedily consumes
// its best-matching unconsumed gold (ties: earliest gold span); partial
// precision at rank i is the mean of the match values up to i, and the sum
// over relevant ranks is normalized by the gold count. Reduces to classical
// AP@k when every match is 0 or 1. With optimal_assignment the greedy
// consumption is replaced by exhaustive assignment search (diagnostic only,
// never the default).
double pap_at_k(const std::vector<SpanRange>& preds, const std::vector<SpanRange>& golds,
                std::size_t k, bool optimal_assignment = false);

struct EvalOptions {
    std::size_t k = 10;
    bool optimal_assignment = false;
};

struct EvalReport {
    std::map<std::string, double> per_question;
    double macro_pap = 0.0;
    std::map<std::string, double> by_category;           // multi / single / zero
    std::map<std::string, std::size_t> category_counts;
    std::size_t k = 10;
    std::map<std::string, std::int64_t> drop_counts; // diagnostics from the run manifest
};

// Scores a run against every question in the given corpus slice; questions
// missing from the run count as empty prediction lists. A run entry whose
// pq_id is not in the corpus is an error.
EvalReport evaluate_run(const RunFile& run, const std::vector<corpus::QPARecord>& corpus,
                        const EvalOptions& opts = {});

enum class ReportFormat { json, table };

// json is machine-stable (sorted keys); table prints system rows with
// three-decimal scores plus the per-category breakdown.
std::string render_report(const EvalReport& report, ReportFormat format,
                          std::string_view system_name = "run", std::string_view system_type = "-");

} // namespace arqa::eval
