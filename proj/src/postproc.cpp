#include "arqa/postproc.hpp"

#include "arqa/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace arqa::postproc {

namespace {

// Score descending, then earlier start, then shorter span.
bool rank_before(const align::CandidateSpan& a, const align::CandidateSpan& b) {
    if (a.score != b.score)
        return a.score > b.score;
    if (a.start_token != b.start_token)
        return a.start_token < b.start_token;
    return (a.end_token - a.start_token) < (b.end_token - b.start_token);
}

// Matching keys strip quotes/punctuation so attached marks cannot hide a
// question echo or a stopword.
std::vector<std::string> span_match_keys(const align::CandidateSpan& span,
                                         const std::vector<text::Token>& passage_tokens) {
    const auto opts = text::candidate_options();
    std::vector<std::string> keys;
    for (std::size_t i = span.start_token; i <= span.end_token && i < passage_tokens.size(); ++i) {
        std::string key = text::normalize(passage_tokens[i].norm, opts);
        if (!key.empty())
            keys.push_back(std::move(key));
    }
    return keys;
}

} // namespace

PostprocConfig load_postproc_config(const std::string& path) {
    PostprocConfig cfg;
    for (const auto& [key, value] : parse_kv_file(path)) {
        try {
            if (key == "nms_overlap_threshold")
                cfg.nms_overlap_threshold = std::stod(value);
            else if (key == "question_sim_threshold")
                cfg.question_sim_threshold = std::stod(value);
            else if (key == "stopword_ratio_threshold")
                cfg.stopword_ratio_threshold = std::stod(value);
            else if (key == "k")
                cfg.k = static_cast<std::size_t>(std::stoul(value));
            else if (key == "stoplist")
                cfg.stoplist_path = value;
            else
                throw config_error(path + ": unknown key " + key);
        } catch (const std::invalid_argument&) {
            throw config_error(path + ": bad value for " + key + ": " + value);
        }
    }
    if (cfg.k < 1)
        throw config_error(path + ": k must be >= 1");
    for (double t : {cfg.nms_overlap_threshold, cfg.question_sim_threshold, cfg.stopword_ratio_threshold})
        if (t < 0.0)
            throw config_error(path + ": thresholds must be non-negative");
    return cfg;
}

double span_overlap(const align::CandidateSpan& a, const align::CandidateSpan& b) {
    const std::size_t lo = std::max(a.start_token, b.start_token);
    const std::size_t hi = std::min(a.end_token, b.end_token);
    if (hi < lo)
        return 0.0;
    const double inter = static_cast<double>(hi - lo + 1);
    const double na = static_cast<double>(a.end_token - a.start_token + 1);
    const double nb = static_cast<double>(b.end_token - b.start_token + 1);
    return inter / std::min(na, nb);
}

std::vector<align::CandidateSpan> nms(std::vector<align::CandidateSpan> spans, double threshold) {
    std::stable_sort(spans.begin(), spans.end(), rank_before);
    std::vector<align::CandidateSpan> kept;
    for (auto& span : spans) {
        bool suppressed = false;
        for (const auto& accepted : kept) {
            const double overlap = span_overlap(span, accepted);
            // overlap == 0 never suppresses, so threshold 0 means "suppress
            // on any shared token" and threshold > 1 suppresses nothing.
            if (overlap > 0.0 && overlap >= threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed)
            kept.push_back(std::move(span));
    }
    return kept;
}

std::vector<align::CandidateSpan> filter_uninformative(const std::vector<align::CandidateSpan>& spans,
                                                       const std::vector<text::Token>& passage_tokens,
                                                       std::string_view question,
                                                       const PostprocConfig& cfg,
                                                       const text::Stoplist& stoplist,
                                                       FilterStats* stats) {
    std::vector<std::string> question_norms;
    for (const auto& tok : text::tokenize(question, text::candidate_options()))
        if (!tok.norm.empty())
            question_norms.push_back(tok.norm);

    std::vector<align::CandidateSpan> kept;
    for (const auto& span : spans) {
        const std::vector<std::string> keys = span_match_keys(span, passage_tokens);
        if (text::bag_f1(keys, question_norms) >= cfg.question_sim_threshold) {
            if (stats)
                ++stats->dropped_question_sim;
            continue;
        }
        std::vector<text::Token> span_tokens;
        for (std::size_t i = span.start_token;
             i <= span.end_token && i < passage_tokens.size(); ++i) {
            text::Token tok = passage_tokens[i];
            tok.norm = text::normalize(tok.norm, text::candidate_options());
            span_tokens.push_back(std::move(tok));
        }
        if (text::stopword_ratio(span_tokens, stoplist) >= cfg.stopword_ratio_threshold) {
            if (stats)
                ++stats->dropped_stopword;
            continue;
        }
        kept.push_back(span);
    }
    return kept;
}

RankedAnswerList run_pipeline(std::vector<align::CandidateSpan> candidates,
                              const std::vector<text::Token>& passage_tokens,
                              std::string_view question, const PostprocConfig& cfg,
                              const text::Stoplist& stoplist, PipelineStats* stats) {
    RankedAnswerList out;
    if (!candidates.empty())
        out.pq_id = candidates.front().pq_id;

    const std::size_t before = candidates.size();
    std::vector<align::CandidateSpan> surviving = nms(std::move(candidates), cfg.nms_overlap_threshold);
    if (stats)
        stats->nms_suppressed += before - surviving.size();

    surviving = filter_uninformative(surviving, passage_tokens, question, cfg, stoplist,
                                     stats ? &stats->filter : nullptr);

    std::stable_sort(surviving.begin(), surviving.end(), rank_before);
    if (surviving.size() > cfg.k)
        surviving.resize(cfg.k);
    out.spans = std::move(surviving);
    return out;
}

} // namespace arqa::postproc
