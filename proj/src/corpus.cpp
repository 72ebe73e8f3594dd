#include "arqa/corpus.hpp"

#include "arqa/utf8.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

using nlohmann::json;

namespace arqa::corpus {

namespace {

constexpr std::array<Split, 3> kSplits = {Split::train, Split::dev, Split::test};
constexpr std::array<AnswerCategory, 3> kCategories = {AnswerCategory::multi, AnswerCategory::single,
                                                       AnswerCategory::zero};

// Verifies the exact-subspan invariant: the passage slice at start_char with
// the answer's code-point length reproduces the answer text.
bool offset_matches(const std::string& passage, const GoldAnswer& ans) {
    const std::size_t len = utf8::length(ans.text);
    return utf8::substr(passage, ans.start_char, len) == ans.text;
}

QPARecord record_from_json(const json& obj, std::optional<Split> force_split, Source default_source,
                           const std::string& where) {
    QPARecord rec;
    if (!obj.is_object())
        throw corpus_error(where + ": expected a JSON object");
    try {
        rec.pq_id = obj.at("pq_id").get<std::string>();
        rec.passage = obj.at("passage").get<std::string>();
        rec.question = obj.at("question").get<std::string>();
        for (const auto& a : obj.at("answers")) {
            GoldAnswer g;
            g.text = a.at("text").get<std::string>();
            const auto sc = a.at("start_char").get<long long>();
            if (sc < 0)
                throw corpus_error(where + ": negative start_char in " + rec.pq_id);
            g.start_char = static_cast<std::size_t>(sc);
            rec.answers.push_back(std::move(g));
        }
    } catch (const json::exception& e) {
        throw corpus_error(where + ": " + e.what());
    }
    if (force_split) {
        rec.split = *force_split;
    } else {
        const auto it = obj.find("split");
        if (it == obj.end())
            throw corpus_error(where + ": record " + rec.pq_id + " has no split field and no split was given");
        const auto s = split_from_string(it->get<std::string>());
        if (!s)
            throw corpus_error(where + ": record " + rec.pq_id + " has unknown split \"" +
                               it->get<std::string>() + "\"");
        rec.split = *s;
    }
    rec.source = default_source;
    if (const auto it = obj.find("source"); it != obj.end()) {
        const auto src = source_from_string(it->get<std::string>());
        if (!src)
            throw corpus_error(where + ": record " + rec.pq_id + " has unknown source \"" +
                               it->get<std::string>() + "\"");
        rec.source = *src;
    }
    if (const auto it = obj.find("tafsir"); it != obj.end() && it->is_string())
        rec.tafsir = it->get<std::string>();

    for (const auto& ans : rec.answers) {
        if (ans.text.empty())
            throw corpus_error(where + ": empty answer text in " + rec.pq_id);
        if (!offset_matches(rec.passage, ans))
            throw corpus_error(where + ": answer offset mismatch in " + rec.pq_id + " at start_char " +
                               std::to_string(ans.start_char));
    }
    return rec;
}

} // namespace

std::string_view to_string(Split s) {
    switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    }
    return "?";
}

std::string_view to_string(Source s) {
    switch (s) {
    case Source::qrcd: return "qrcd";
    case Source::quqa: return "quqa";
    case Source::arcd: return "arcd";
    case Source::other: return "other";
    }
    return "?";
}

std::string_view to_string(AnswerCategory c) {
    switch (c) {
    case AnswerCategory::multi: return "multi";
    case AnswerCategory::single: return "single";
    case AnswerCategory::zero: return "zero";
    }
    return "?";
}

std::optional<Split> split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "dev") return Split::dev;
    if (s == "test") return Split::test;
    return std::nullopt;
}

std::optional<Source> source_from_string(std::string_view s) {
    if (s == "qrcd") return Source::qrcd;
    if (s == "quqa") return Source::quqa;
    if (s == "arcd") return Source::arcd;
    if (s == "other") return Source::other;
    return std::nullopt;
}

std::optional<Adapter> adapter_from_string(std::string_view s) {
    if (s == "squad_style" || s == "squad") return Adapter::squad_style;
    return std::nullopt;
}

std::size_t SplitStats::split_total(Split s) const {
    std::size_t n = 0;
    for (auto c : kCategories)
        n += count(s, c);
    return n;
}

std::size_t SplitStats::category_total(AnswerCategory c) const {
    std::size_t n = 0;
    for (auto s : kSplits)
        n += count(s, c);
    return n;
}

std::vector<QPARecord> load_corpus(const std::string& path, std::optional<Split> force_split,
                                   Source default_source) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw corpus_error("cannot open corpus file: " + path);
    std::vector<QPARecord> records;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        const std::string where = path + ":" + std::to_string(line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw corpus_error(where + ": parse error: " + e.what());
        }
        QPARecord rec = record_from_json(obj, force_split, default_source, where);
        if (!seen_ids.insert(rec.pq_id).second)
            throw corpus_error(where + ": duplicate pq_id " + rec.pq_id);
        records.push_back(std::move(rec));
    }
    return records;
}

ReformatResult reformat_external(const std::string& path, Adapter adapter, Source source, Split split) {
    if (adapter != Adapter::squad_style)
        throw corpus_error("unknown adapter");
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw corpus_error("cannot open dataset file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw corpus_error(path + ": parse error: " + e.what());
    }

    ReformatResult result;
    const auto data = doc.find("data");
    if (data == doc.end() || !data->is_array())
        throw corpus_error(path + ": missing top-level \"data\" array");

    for (const auto& article : *data) {
        for (const auto& para : article.value("paragraphs", json::array())) {
            if (!para.contains("context") || !para.contains("qas"))
                continue;
            const std::string context = para.at("context").get<std::string>();
            for (const auto& qa : para.at("qas")) {
                QPARecord rec;
                rec.passage = context;
                rec.question = qa.value("question", std::string());
                rec.pq_id = qa.contains("id") && qa.at("id").is_string()
                                ? qa.at("id").get<std::string>()
                                : qa.value("id", json()).dump();
                rec.split = split;
                rec.source = source;
                bool bad_offset = false;
                for (const auto& a : qa.value("answers", json::array())) {
                    GoldAnswer g;
                    g.text = a.value("text", std::string());
                    const long long sc = a.value("answer_start", -1LL);
                    if (g.text.empty() || sc < 0) {
                        bad_offset = true;
                        break;
                    }
                    g.start_char = static_cast<std::size_t>(sc);
                    if (!offset_matches(context, g)) {
                        bad_offset = true;
                        break;
                    }
                    // SQuAD-style files may repeat the same annotation.
                    bool dup = false;
                    for (const auto& prev : rec.answers)
                        dup = dup || (prev.text == g.text && prev.start_char == g.start_char);
                    if (!dup)
                        rec.answers.push_back(std::move(g));
                }
                if (bad_offset) {
                    ++result.dropped;
                    continue;
                }
                result.records.push_back(std::move(rec));
            }
        }
    }
    return result;
}

std::vector<QPARecord> merge_corpora(const std::vector<std::vector<QPARecord>>& corpora) {
    std::vector<QPARecord> merged;
    std::unordered_set<std::string> seen;
    for (const auto& corpus : corpora) {
        for (const auto& rec : corpus) {
            QPARecord copy = rec;
            if (!seen.insert(copy.pq_id).second) {
                std::string renamed = std::string(to_string(copy.source)) + "/" + copy.pq_id;
                std::size_t bump = 2;
                while (!seen.insert(renamed).second)
                    renamed = std::string(to_string(copy.source)) + "/" + copy.pq_id + "#" +
                              std::to_string(bump++);
                copy.pq_id = renamed;
            }
            merged.push_back(std::move(copy));
        }
    }
    return merged;
}

SplitStats split_stats(const std::vector<QPARecord>& records) {
    SplitStats stats;
    for (const auto& rec : records) {
        ++stats.counts[static_cast<std::size_t>(rec.split)][static_cast<std::size_t>(rec.category())];
        ++stats.qp_total;
        stats.qpa_total += rec.answers.empty() ? 1 : rec.answers.size();
    }
    return stats;
}

std::string serialize_record(const QPARecord& rec) {
    json obj = json::object();
    obj["pq_id"] = rec.pq_id;
    obj["passage"] = rec.passage;
    obj["question"] = rec.question;
    json answers = json::array();
    for (const auto& a : rec.answers)
        answers.push_back(json{{"text", a.text}, {"start_char", a.start_char}});
    obj["answers"] = std::move(answers);
    obj["split"] = std::string(to_string(rec.split));
    obj["source"] = std::string(to_string(rec.source));
    if (rec.tafsir)
        obj["tafsir"] = *rec.tafsir;
    return obj.dump();
}

void write_corpus(const std::vector<QPARecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw corpus_error("cannot write corpus file: " + path);
    for (const auto& rec : records)
        out << serialize_record(rec) << '\n';
}

std::string render_stats(const SplitStats& s) {
    auto pct = [](std::size_t part, std::size_t whole) -> long {
        if (whole == 0)
            return 0;
        return std::lround(100.0 * static_cast<double>(part) / static_cast<double>(whole));
    };
    auto pad = [](std::string cell, std::size_t width) {
        if (cell.size() < width)
            cell.append(width - cell.size(), ' ');
        else
            cell.push_back(' ');
        return cell;
    };
    std::ostringstream out;
    out << pad("type", 15) << pad("train", 13) << pad("dev", 13) << pad("test", 13) << "all\n";
    for (auto c : kCategories) {
        out << pad(std::string(to_string(c)) + "-answer", 15);
        for (auto sp : kSplits) {
            std::ostringstream cell;
            cell << s.count(sp, c) << " (" << pct(s.count(sp, c), s.split_total(sp)) << "%)";
            out << pad(cell.str(), 13);
        }
        out << s.category_total(c) << " (" << pct(s.category_total(c), s.qp_total) << "%)\n";
    }
    out << pad("total", 15);
    for (auto sp : kSplits)
        out << pad(std::to_string(s.split_total(sp)), 13);
    out << s.qp_total << "\n";
    out << "qp " << s.qp_total << "  qpa " << s.qpa_total << "\n";
    return out.str();
}

std::vector<QPARecord> filter_split(const std::vector<QPARecord>& records, Split split) {
    std::vector<QPARecord> out;
    for (const auto& rec : records)
        if (rec.split == split)
            out.push_back(rec);
    return out;
}

} // namespace arqa::corpus
