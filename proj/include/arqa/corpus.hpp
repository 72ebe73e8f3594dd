#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace arqa::corpus {

class corpus_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Split { train, dev, test };
enum class Source { qrcd, quqa, arcd, other };
enum class AnswerCategory { multi, single, zero };

std::string_view to_string(Split s);
std::string_view to_string(Source s);
std::string_view to_string(AnswerCategory c);
std::optional<Split> split_from_string(std::string_view s);
std::optional<Source> source_from_string(std::string_view s);

// A gold answer is an exact substring of the passage; start_char is the
// code-point offset of its first character.
struct GoldAnswer {
    std::string text;
    std::size_t start_char = 0;
};

struct QPARecord {
    std::string pq_id;
    std::string passage;
    std::string question;
    std::vector<GoldAnswer> answers;
    Split split = Split::train;
    Source source = Source::qrcd;
    std::optional<std::string> tafsir;

    AnswerCategory category() const {
        if (answers.empty())
            return AnswerCategory::zero;
        return answers.size() == 1 ? AnswerCategory::single : AnswerCategory::multi;
    }
};

struct SplitStats {
    // counts[split][category]
    std::array<std::array<std::size_t, 3>, 3> counts{};
    std::size_t qp_total = 0;
    std::size_t qpa_total = 0; // answers, plus one per zero-answer record

    std::size_t count(Split s, AnswerCategory c) const {
        return counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)];
    }
    std::size_t split_total(Split s) const;
    std::size_t category_total(AnswerCategory c) const;
};

// Loads unified-schema JSON Lines. When force_split is given every record is
// stamped with it; otherwise each record must carry a "split" field. Records
// missing "source" default to default_source. Validates the gold-answer
// offset invariant and pq_id uniqueness.
std::vector<QPARecord> load_corpus(const std::string& path,
                                   std::optional<Split> force_split = std::nullopt,
                                   Source default_source = Source::qrcd);

enum class Adapter { squad_style };
std::optional<Adapter> adapter_from_string(std::string_view s);

struct ReformatResult {
    std::vector<QPARecord> records;
    std::size_t dropped = 0; // records whose answer offsets could not be verified
};

// Converts an external dataset (nested articles -> paragraphs -> qas) into
// unified records tagged with the given source and split.
ReformatResult reformat_external(const std::string& path, Adapter adapter, Source source, Split split);

// Concatenates corpora preserving input order; pq_id collisions are resolved
// by prefixing the colliding record's source tag ("arcd/<pq_id>").
std::vector<QPARecord> merge_corpora(const std::vector<std::vector<QPARecord>>& corpora);

SplitStats split_stats(const std::vector<QPARecord>& records);

// One JSON object, fixed field order, no trailing newline.
std::string serialize_record(const QPARecord& rec);
void write_corpus(const std::vector<QPARecord>& records, const std::string& path);

// Human-readable distribution table (percentages at integer precision).
std::string render_stats(const SplitStats& s);

std::vector<QPARecord> filter_split(const std::vector<QPARecord>& records, Split split);

} // namespace arqa::corpus
