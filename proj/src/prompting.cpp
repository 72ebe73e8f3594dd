#include "arqa/prompting.hpp"

#include "arqa/sha256.hpp"
#include "arqa/text.hpp"

#include <json.hpp>

#include <array>
#include <fstream>

using nlohmann::json;

namespace arqa::prompting {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string substitute(std::string_view fmt, const std::vector<std::pair<std::string_view, std::string_view>>& vars) {
    std::string out;
    out.reserve(fmt.size());
    std::size_t i = 0;
    while (i < fmt.size()) {
        bool replaced = false;
        if (fmt[i] == '{') {
            for (const auto& [key, value] : vars) {
                if (fmt.compare(i + 1, key.size(), key) == 0 && i + 1 + key.size() < fmt.size() &&
                    fmt[i + 1 + key.size()] == '}') {
                    out.append(value);
                    i += key.size() + 2;
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced)
            out.push_back(fmt[i++]);
    }
    return out;
}

std::string render_answers(const PromptTemplate& t, const corpus::QPARecord& rec) {
    if (rec.answers.empty())
        return t.no_answer_sentinel;
    std::string out;
    for (std::size_t i = 0; i < rec.answers.size(); ++i) {
        if (i > 0)
            out.push_back('\n');
        out.append("''").append(rec.answers[i].text).append("''");
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n'))
        ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n'))
        --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

PromptTemplate load_template(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw prompting_error("cannot open template file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw prompting_error(path + ": parse error: " + e.what());
    }
    PromptTemplate t;
    try {
        t.header = doc.at("header").get<std::string>();
        t.shot_block_format = doc.at("shot_block_format").get<std::string>();
        t.query_block_format = doc.at("query_block_format").get<std::string>();
        t.no_answer_sentinel = doc.at("no_answer_sentinel").get<std::string>();
    } catch (const json::exception& e) {
        throw prompting_error(path + ": " + e.what());
    }
    return t;
}

std::string template_digest(const PromptTemplate& t) {
    std::string joined;
    joined.append(t.header).push_back('\x1f');
    joined.append(t.shot_block_format).push_back('\x1f');
    joined.append(t.query_block_format).push_back('\x1f');
    joined.append(t.no_answer_sentinel);
    return sha256_hex(joined);
}

FewShotSet select_shots(const std::vector<corpus::QPARecord>& train, std::uint64_t seed,
                        const std::unordered_set<std::string>& exclude) {
    std::array<std::vector<const corpus::QPARecord*>, 3> pools; // multi, single, zero
    for (const auto& rec : train) {
        if (exclude.count(rec.pq_id) > 0)
            continue;
        pools[static_cast<std::size_t>(rec.category())].push_back(&rec);
    }
    static constexpr std::array<corpus::AnswerCategory, 3> kOrder = {
        corpus::AnswerCategory::multi, corpus::AnswerCategory::single, corpus::AnswerCategory::zero};
    for (auto cat : kOrder) {
        if (pools[static_cast<std::size_t>(cat)].empty())
            throw prompting_error(std::string("no ") + std::string(corpus::to_string(cat)) +
                                  "-answer training record available for shot selection");
    }
    std::uint64_t state = seed;
    FewShotSet shots;
    shots.seed = seed;
    shots.multi = *pools[0][splitmix64(state) % pools[0].size()];
    shots.single = *pools[1][splitmix64(state) % pools[1].size()];
    shots.zero = *pools[2][splitmix64(state) % pools[2].size()];
    return shots;
}

std::string render_shot(const PromptTemplate& t, const corpus::QPARecord& rec) {
    std::string tafsir_line;
    if (rec.tafsir && !rec.tafsir->empty())
        tafsir_line = "التفسير: " + *rec.tafsir + "\n";
    const std::string answers = render_answers(t, rec);
    return substitute(t.shot_block_format, {{"passage", rec.passage},
                                            {"question", rec.question},
                                            {"tafsir_line", tafsir_line},
                                            {"answers", answers}});
}

std::string build_prompt(const PromptTemplate& t, const FewShotSet& shots, std::string_view passage,
                         std::string_view question) {
    std::string prompt = t.header;
    prompt.append("\n\n").append(render_shot(t, shots.multi));
    prompt.append("\n\n").append(render_shot(t, shots.single));
    prompt.append("\n\n").append(render_shot(t, shots.zero));
    prompt.append("\n\n").append(
        substitute(t.query_block_format,
                   {{"passage", passage}, {"question", question}, {"tafsir_line", ""}, {"answers", ""}}));
    return prompt;
}

ParseResult parse_response(std::string_view response, std::string_view sentinel) {
    struct QuotePair {
        std::string_view open;
        std::string_view close;
    };
    // '' pairs first so a lone apostrophe is never treated as a quote.
    static constexpr std::array<QuotePair, 4> kQuotes = {
        QuotePair{"''", "''"},
        QuotePair{"«", "»"}, // « »
        QuotePair{"“", "”"}, // “ ”
        QuotePair{"\"", "\""},
    };

    ParseResult result;
    std::size_t line_start = 0;
    while (line_start <= response.size()) {
        const std::size_t nl = response.find('\n', line_start);
        const std::string_view line =
            response.substr(line_start, nl == std::string_view::npos ? std::string_view::npos
                                                                     : nl - line_start);
        std::size_t i = 0;
        while (i < line.size()) {
            bool matched = false;
            for (const auto& q : kQuotes) {
                if (line.compare(i, q.open.size(), q.open) != 0)
                    continue;
                const std::size_t close = line.find(q.close, i + q.open.size());
                if (close == std::string_view::npos) {
                    i += q.open.size();
                } else {
                    const std::string candidate =
                        trim(line.substr(i + q.open.size(), close - i - q.open.size()));
                    if (!candidate.empty())
                        result.answers.push_back(candidate);
                    i = close + q.close.size();
                }
                matched = true;
                break;
            }
            if (!matched)
                ++i;
        }
        if (nl == std::string_view::npos)
            break;
        line_start = nl + 1;
    }

    const auto opts = text::candidate_options();
    const std::string norm_response = text::normalize(response, opts);
    const std::string norm_sentinel = text::normalize(sentinel, opts);
    result.sentinel =
        !norm_sentinel.empty() && norm_response.find(norm_sentinel) != std::string::npos;
    return result;
}

} // namespace arqa::prompting
