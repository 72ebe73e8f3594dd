#pragma once

#include "arqa/align.hpp"
#include "arqa/text.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace arqa::postproc {

struct PostprocConfig {
    double nms_overlap_threshold = 0.5;
    double question_sim_threshold = 0.6;
    double stopword_ratio_threshold = 0.75;
    std::size_t k = 10;
    std::string stoplist_path; // empty -> bundled default list
};

// key = value file; missing keys keep their defaults.
PostprocConfig load_postproc_config(const std::string& path);

// Per-question ranked predictions: scores non-increasing, length <= k,
// pairwise token overlap below the NMS threshold. May be empty.
struct RankedAnswerList {
    std::string pq_id;
    std::vector<align::CandidateSpan> spans;
};

// |A ∩ B| / min(|A|, |B|) over token index ranges.
double span_overlap(const align::CandidateSpan& a, const align::CandidateSpan& b);

// Greedy by descending score (ties: earlier start, then shorter span). A span
// is kept iff it shares no tokens with every kept span or its overlap stays
// below the threshold. Output order is acceptance order.
std::vector<align::CandidateSpan> nms(std::vector<align::CandidateSpan> spans, double threshold);

struct FilterStats {
    std::size_t dropped_question_sim = 0;
    std::size_t dropped_stopword = 0;
};

// Drops spans too similar to the question (bag F1 >= question_sim_threshold)
// or composed mainly of stop words (ratio >= stopword_ratio_threshold).
std::vector<align::CandidateSpan> filter_uninformative(const std::vector<align::CandidateSpan>& spans,
                                                       const std::vector<text::Token>& passage_tokens,
                                                       std::string_view question,
                                                       const PostprocConfig& cfg,
                                                       const text::Stoplist& stoplist,
                                                       FilterStats* stats = nullptr);

struct PipelineStats {
    std::size_t nms_suppressed = 0;
    FilterStats filter;
};

// NMS -> uninformative filter -> stable re-rank by score -> truncate to k.
RankedAnswerList run_pipeline(std::vector<align::CandidateSpan> candidates,
                              const std::vector<text::Token>& passage_tokens,
                              std::string_view question, const PostprocConfig& cfg,
                              const text::Stoplist& stoplist, PipelineStats* stats = nullptr);

} // namespace arqa::postproc
