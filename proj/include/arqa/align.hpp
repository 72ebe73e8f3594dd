#pragma once

#include "arqa/corpus.hpp"
#include "arqa/text.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace arqa::align {

class align_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Origin { llm, nbest };
std::string_view to_string(Origin o);

// An answer anchored to the passage: text is the exact original substring
// covered by tokens [start_token..end_token].
struct CandidateSpan {
    std::string text;
    std::size_t start_token = 0;
    std::size_t end_token = 0; // inclusive
    double score = 0.0;
    Origin origin = Origin::llm;
    std::string pq_id;
};

enum class MatchStage { exact, fuzzy };

struct AlignOutcome {
    CandidateSpan span;
    MatchStage stage = MatchStage::exact;
};

// Maps a candidate answer string onto a token span of the passage.
// Exact stage: first contiguous occurrence of the candidate's normalized
// token sequence. Fuzzy stage: best bag-of-token F1 over windows within
// +/-2 of the candidate length, accepted only at F1 >= min_fuzzy_f1.
// Matching is insensitive to diacritics, quotes and punctuation; the
// returned text is re-read from the original passage.
std::optional<AlignOutcome> align_answer(std::string_view candidate,
                                         const std::vector<text::Token>& passage_tokens,
                                         std::string_view passage, double min_fuzzy_f1 = 0.8);

struct TokenRange {
    std::size_t start = 0;
    std::size_t end = 0; // inclusive

    bool operator==(const TokenRange&) const = default;
};

// Expands a character range [start_char, end_char) to the full words it
// touches; never truncates a partially covered word. Throws when the range
// overlaps no token.
TokenRange snap_to_word_boundaries(std::size_t start_char, std::size_t end_char,
                                   const std::vector<text::Token>& tokens);

// N-best file: JSON object pq_id -> ordered candidate array, each entry
// carrying "text", "score" and either character or token offsets. Keeps up
// to n candidates per question, snapped to word boundaries.
std::map<std::string, std::vector<CandidateSpan>> load_nbest(
    const std::string& path, const std::vector<corpus::QPARecord>& corpus, std::size_t n);

} // namespace arqa::align
