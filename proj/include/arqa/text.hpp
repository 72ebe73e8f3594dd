#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace arqa::text {

// Arabic-aware normalization switches. All flags are independent. The
// defaults suit passage text; candidate answers additionally strip
// quotes/punctuation (see candidate_options()).
struct NormOptions {
    bool strip_diacritics = true;      // U+064B..U+0652 and U+0670
    bool unify_alef = true;            // آ أ إ ٱ -> ا
    bool unify_ya_and_ta_marbuta = true; // ى -> ي, ة -> ه
    bool strip_tatweel = true;         // U+0640
    bool collapse_whitespace = true;
    bool strip_quotes_punct = false;   // quotes and punctuation become spaces
};

inline NormOptions candidate_options() {
    NormOptions o;
    o.strip_quotes_punct = true;
    return o;
}

// A whitespace-delimited word of the original text. Offsets are code-point
// positions into the original string; end_char is exclusive.
struct Token {
    std::string surface;
    std::size_t start_char = 0;
    std::size_t end_char = 0;
    std::string norm;
    std::size_t index = 0;
};

// Idempotent; under default options never grows the code-point count.
std::string normalize(std::string_view text, const NormOptions& opts = {});

// Interleaving the surfaces with the skipped gaps reproduces the input.
std::vector<Token> tokenize(std::string_view text, const NormOptions& opts = {});

// Harmonic mean of precision and recall over token index sets. Symmetric,
// in [0,1]; empty input on either side yields 0.
double token_f1(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

// token_f1 specialised to contiguous inclusive token ranges.
double range_f1(std::size_t a_start, std::size_t a_end, std::size_t b_start, std::size_t b_end);

// F1 over bags (multisets) of normalized token strings.
double bag_f1(const std::vector<std::string>& a, const std::vector<std::string>& b);

using Stoplist = std::unordered_set<std::string>;

// One token per line, '#' starts a comment. Entries are normalized on load.
Stoplist load_stopwords(const std::string& path);
Stoplist parse_stopwords(std::string_view content);

// Bundled default list in the stopword file format.
std::string_view default_stopwords();

// Fraction of tokens whose norm is in the stoplist; an empty token list
// counts as fully uninformative (1.0).
double stopword_ratio(const std::vector<Token>& tokens, const Stoplist& stoplist);

} // namespace arqa::text
