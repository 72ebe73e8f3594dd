#pragma once

#include "arqa/corpus.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace arqa::prompting {

class prompting_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The structured Arabic prompt. Shot and query blocks are format strings
// with {passage}, {question}, {tafsir_line} and {answers} placeholders.
struct PromptTemplate {
    std::string header;
    std::string shot_block_format;
    std::string query_block_format;
    std::string no_answer_sentinel;

    bool operator==(const PromptTemplate&) const = default;
};

// Bundled Arabic template; the sentinel appears verbatim in the header.
PromptTemplate default_template();

// JSON file with the four template fields.
PromptTemplate load_template(const std::string& path);

// Stable digest over all template fields; part of the response cache key.
std::string template_digest(const PromptTemplate& t);

// One training example per answer category.
struct FewShotSet {
    corpus::QPARecord multi;
    corpus::QPARecord single;
    corpus::QPARecord zero;
    std::uint64_t seed = 0;

    std::unordered_set<std::string> pq_ids() const {
        return {multi.pq_id, single.pq_id, zero.pq_id};
    }
};

// Deterministic for a fixed (train order, seed). Records whose pq_id is in
// exclude are never selected; throws if any category pool is empty.
FewShotSet select_shots(const std::vector<corpus::QPARecord>& train, std::uint64_t seed,
                        const std::unordered_set<std::string>& exclude = {});

// One shot block: passage, question, optional tafsir line, answers rendered
// as quoted lines (the sentinel for a zero-answer record).
std::string render_shot(const PromptTemplate& t, const corpus::QPARecord& rec);

// Pure: identical inputs give byte-identical prompts.
std::string build_prompt(const PromptTemplate& t, const FewShotSet& shots, std::string_view passage,
                         std::string_view question);

struct ParseResult {
    std::vector<std::string> answers; // quote-stripped, trimmed, in order
    bool sentinel = false;            // normalized sentinel seen in the response

    // False means the response had neither quoted answers nor the sentinel.
    bool clean() const { return !answers.empty() || sentinel; }
};

// Extracts line-level quoted segments (''..'', "..", “..”, «..») as
// candidates; prose lines are ignored. A sentinel-only response parses to an
// empty candidate list.
ParseResult parse_response(std::string_view response, std::string_view sentinel);

} // namespace arqa::prompting
