#include "arqa/text.hpp"

#include "arqa/utf8.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace arqa::text {

namespace {

bool is_space_cp(char32_t cp) {
    switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
    case 0x00A0: // no-break space
    case 0x2028: case 0x2029:
    case 0x3000:
        return true;
    default:
        return (cp >= 0x2000 && cp <= 0x200A) || cp == 0x202F || cp == 0x205F;
    }
}

bool is_diacritic_cp(char32_t cp) {
    return (cp >= 0x064B && cp <= 0x0652) || cp == 0x0670;
}

bool is_quote_punct_cp(char32_t cp) {
    switch (cp) {
    case U'"': case U'\'': case U'.': case U',': case U';': case U':':
    case U'!': case U'?': case U'(': case U')': case U'[': case U']':
    case U'{': case U'}': case U'-': case U'_': case U'/': case U'\\':
    case U'|': case U'*':
    case 0x00AB: case 0x00BB:             // « »
    case 0x2018: case 0x2019: case 0x201A: case 0x201B:
    case 0x201C: case 0x201D: case 0x201E: case 0x201F: // curly quotes
    case 0x2039: case 0x203A:             // ‹ ›
    case 0x060C: case 0x061B: case 0x061F: // ، ؛ ؟
    case 0x066D:                          // ٭
    case 0x06D4:                          // ۔
        return true;
    default:
        return false;
    }
}

} // namespace

std::string normalize(std::string_view text, const NormOptions& opts) {
    const std::vector<char32_t> cps = utf8::decode(text);
    std::vector<char32_t> mapped;
    mapped.reserve(cps.size());
    for (char32_t cp : cps) {
        if (opts.strip_diacritics && is_diacritic_cp(cp))
            continue;
        if (opts.strip_tatweel && cp == 0x0640)
            continue;
        if (opts.unify_alef && (cp == 0x0622 || cp == 0x0623 || cp == 0x0625 || cp == 0x0671))
            cp = 0x0627;
        if (opts.unify_ya_and_ta_marbuta) {
            if (cp == 0x0649)
                cp = 0x064A;
            else if (cp == 0x0629)
                cp = 0x0647;
        }
        if (opts.strip_quotes_punct && is_quote_punct_cp(cp))
            cp = U' ';
        mapped.push_back(cp);
    }
    if (!opts.collapse_whitespace)
        return utf8::encode(mapped);

    std::vector<char32_t> out;
    out.reserve(mapped.size());
    bool pending_space = false;
    for (char32_t cp : mapped) {
        if (is_space_cp(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(U' ');
            pending_space = false;
        }
        out.push_back(cp);
    }
    return utf8::encode(out);
}

std::vector<Token> tokenize(std::string_view text, const NormOptions& opts) {
    std::vector<Token> tokens;
    const std::vector<char32_t> cps = utf8::decode(text);
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && is_space_cp(cps[i]))
            ++i;
        if (i >= cps.size())
            break;
        const std::size_t start = i;
        while (i < cps.size() && !is_space_cp(cps[i]))
            ++i;
        Token tok;
        tok.start_char = start;
        tok.end_char = i;
        tok.surface = utf8::encode(std::vector<char32_t>(cps.begin() + static_cast<std::ptrdiff_t>(start),
                                                         cps.begin() + static_cast<std::ptrdiff_t>(i)));
        tok.norm = normalize(tok.surface, opts);
        tok.index = tokens.size();
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

double token_f1(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.empty() || b.empty())
        return 0.0;
    std::vector<std::size_t> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
    std::sort(sb.begin(), sb.end());
    sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
    std::size_t inter = 0;
    for (std::size_t i = 0, j = 0; i < sa.size() && j < sb.size();) {
        if (sa[i] == sb[j]) {
            ++inter; ++i; ++j;
        } else if (sa[i] < sb[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    if (inter == 0)
        return 0.0;
    const double p = static_cast<double>(inter) / static_cast<double>(sa.size());
    const double r = static_cast<double>(inter) / static_cast<double>(sb.size());
    return 2.0 * p * r / (p + r);
}

double range_f1(std::size_t a_start, std::size_t a_end, std::size_t b_start, std::size_t b_end) {
    const std::size_t lo = std::max(a_start, b_start);
    const std::size_t hi = std::min(a_end, b_end);
    if (hi < lo)
        return 0.0;
    const double inter = static_cast<double>(hi - lo + 1);
    const double na = static_cast<double>(a_end - a_start + 1);
    const double nb = static_cast<double>(b_end - b_start + 1);
    const double p = inter / na, r = inter / nb;
    return 2.0 * p * r / (p + r);
}

double bag_f1(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty())
        return 0.0;
    std::unordered_map<std::string, std::size_t> count_b;
    for (const auto& t : b)
        ++count_b[t];
    std::size_t inter = 0;
    for (const auto& t : a) {
        auto it = count_b.find(t);
        if (it != count_b.end() && it->second > 0) {
            ++inter;
            --it->second;
        }
    }
    if (inter == 0)
        return 0.0;
    const double p = static_cast<double>(inter) / static_cast<double>(a.size());
    const double r = static_cast<double>(inter) / static_cast<double>(b.size());
    return 2.0 * p * r / (p + r);
}

Stoplist parse_stopwords(std::string_view content) {
    Stoplist out;
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string word = normalize(line);
        if (!word.empty())
            out.insert(word);
    }
    return out;
}

Stoplist load_stopwords(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open stopword file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_stopwords(buf.str());
}

double stopword_ratio(const std::vector<Token>& tokens, const Stoplist& stoplist) {
    if (tokens.empty())
        return 1.0;
    std::size_t hits = 0;
    for (const auto& t : tokens)
        if (stoplist.count(t.norm) > 0)
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

} // namespace arqa::text
