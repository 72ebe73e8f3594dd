#include "arqa/align.hpp"

#include "arqa/utf8.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <unordered_map>

using nlohmann::json;

namespace arqa::align {

namespace {

// Match keys are token norms with quotes/punctuation stripped, so candidates
// quoted or split off punctuation still line up with passage words. Tokens
// that normalize away entirely are excluded from matching.
struct KeyedToken {
    std::size_t token_index;
    std::string key;
};

std::vector<KeyedToken> passage_keys(const std::vector<text::Token>& tokens) {
    const auto opts = text::candidate_options();
    std::vector<KeyedToken> keys;
    keys.reserve(tokens.size());
    for (const auto& tok : tokens) {
        std::string key = text::normalize(tok.norm, opts);
        if (!key.empty())
            keys.push_back({tok.index, std::move(key)});
    }
    return keys;
}

std::vector<std::string> candidate_keys(std::string_view candidate) {
    const auto opts = text::candidate_options();
    std::vector<std::string> keys;
    for (const auto& tok : text::tokenize(candidate, opts))
        if (!tok.norm.empty())
            keys.push_back(tok.norm);
    return keys;
}

CandidateSpan make_span(std::size_t start_token, std::size_t end_token,
                        const std::vector<text::Token>& tokens, std::string_view passage) {
    CandidateSpan span;
    span.start_token = start_token;
    span.end_token = end_token;
    const std::size_t begin = tokens[start_token].start_char;
    const std::size_t end = tokens[end_token].end_char;
    span.text = utf8::substr(passage, begin, end - begin);
    return span;
}

} // namespace

std::string_view to_string(Origin o) {
    return o == Origin::llm ? "llm" : "nbest";
}

std::optional<AlignOutcome> align_answer(std::string_view candidate,
                                         const std::vector<text::Token>& passage_tokens,
                                         std::string_view passage, double min_fuzzy_f1) {
    if (passage_tokens.empty())
        return std::nullopt;
    const std::vector<KeyedToken> pkeys = passage_keys(passage_tokens);
    const std::vector<std::string> ckeys = candidate_keys(candidate);
    if (ckeys.empty() || pkeys.empty())
        return std::nullopt;

    // Exact stage: first contiguous occurrence of the key sequence.
    if (ckeys.size() <= pkeys.size()) {
        for (std::size_t s = 0; s + ckeys.size() <= pkeys.size(); ++s) {
            bool match = true;
            for (std::size_t j = 0; j < ckeys.size() && match; ++j)
                match = pkeys[s + j].key == ckeys[j];
            if (match) {
                AlignOutcome out;
                out.span = make_span(pkeys[s].token_index, pkeys[s + ckeys.size() - 1].token_index,
                                     passage_tokens, passage);
                out.stage = MatchStage::exact;
                return out;
            }
        }
    }

    // Fuzzy stage: windows within +/-2 of the candidate length, best bag F1.
    // Earliest start wins ties, then the shorter window.
    const std::size_t lo = ckeys.size() > 2 ? ckeys.size() - 2 : 1;
    const std::size_t hi = ckeys.size() + 2;
    double best_f1 = 0.0;
    std::size_t best_start = 0, best_len = 0;
    std::vector<std::string> window;
    for (std::size_t s = 0; s < pkeys.size(); ++s) {
        for (std::size_t len = lo; len <= hi && s + len <= pkeys.size(); ++len) {
            window.clear();
            for (std::size_t j = 0; j < len; ++j)
                window.push_back(pkeys[s + j].key);
            const double f1 = text::bag_f1(window, ckeys);
            if (f1 > best_f1) {
                best_f1 = f1;
                best_start = s;
                best_len = len;
            }
        }
    }
    if (best_len == 0 || best_f1 < min_fuzzy_f1)
        return std::nullopt;
    AlignOutcome out;
    out.span = make_span(pkeys[best_start].token_index, pkeys[best_start + best_len - 1].token_index,
                         passage_tokens, passage);
    out.stage = MatchStage::fuzzy;
    return out;
}

TokenRange snap_to_word_boundaries(std::size_t start_char, std::size_t end_char,
                                   const std::vector<text::Token>& tokens) {
    std::optional<std::size_t> first, last;
    for (const auto& tok : tokens) {
        if (tok.start_char < end_char && tok.end_char > start_char) {
            if (!first)
                first = tok.index;
            last = tok.index;
        }
    }
    if (!first)
        throw align_error("character range [" + std::to_string(start_char) + ", " +
                          std::to_string(end_char) + ") overlaps no token");
    return TokenRange{*first, *last};
}

std::map<std::string, std::vector<CandidateSpan>> load_nbest(
    const std::string& path, const std::vector<corpus::QPARecord>& corpus, std::size_t n) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw align_error("cannot open n-best file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw align_error(path + ": parse error: " + e.what());
    }
    if (!doc.is_object())
        throw align_error(path + ": expected a JSON object keyed by pq_id");

    std::unordered_map<std::string, const corpus::QPARecord*> by_id;
    for (const auto& rec : corpus)
        by_id[rec.pq_id] = &rec;

    std::map<std::string, std::vector<CandidateSpan>> out;
    for (const auto& [pq_id, entries] : doc.items()) {
        const auto rec_it = by_id.find(pq_id);
        if (rec_it == by_id.end())
            throw align_error(path + ": unknown pq_id " + pq_id);
        const corpus::QPARecord& rec = *rec_it->second;
        if (!entries.is_array())
            throw align_error(path + ": entry for " + pq_id + " is not an array");
        const std::vector<text::Token> tokens = text::tokenize(rec.passage);
        const std::size_t passage_len = utf8::length(rec.passage);

        std::vector<CandidateSpan> spans;
        for (const auto& entry : entries) {
            if (spans.size() >= n)
                break;
            if (!entry.is_object() || !entry.contains("score"))
                throw align_error(path + ": malformed candidate for " + pq_id);
            const double score = entry.at("score").get<double>();
            if (!std::isfinite(score))
                throw align_error(path + ": non-finite score for " + pq_id);

            TokenRange range;
            if (entry.contains("start_char") && entry.contains("end_char")) {
                const auto sc = entry.at("start_char").get<long long>();
                const auto ec = entry.at("end_char").get<long long>();
                if (sc < 0 || ec < sc || static_cast<std::size_t>(ec) > passage_len)
                    throw align_error(path + ": character span out of bounds for " + pq_id);
                range = snap_to_word_boundaries(static_cast<std::size_t>(sc),
                                                static_cast<std::size_t>(ec), tokens);
            } else if (entry.contains("start_token") && entry.contains("end_token")) {
                const auto st = entry.at("start_token").get<long long>();
                const auto et = entry.at("end_token").get<long long>();
                if (st < 0 || et < st || static_cast<std::size_t>(et) >= tokens.size())
                    throw align_error(path + ": token span out of bounds for " + pq_id);
                range = TokenRange{static_cast<std::size_t>(st), static_cast<std::size_t>(et)};
            } else {
                throw align_error(path + ": candidate for " + pq_id +
                                  " carries neither character nor token offsets");
            }

            CandidateSpan span;
            span.start_token = range.start;
            span.end_token = range.end;
            const std::size_t begin = tokens[range.start].start_char;
            const std::size_t end = tokens[range.end].end_char;
            span.text = utf8::substr(rec.passage, begin, end - begin);
            span.score = score;
            span.origin = Origin::nbest;
            span.pq_id = pq_id;
            spans.push_back(std::move(span));
        }
        out.emplace(pq_id, std::move(spans));
    }
    return out;
}

} // namespace arqa::align
