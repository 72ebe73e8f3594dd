#include "arqa/corpus.hpp"
#include "arqa/utf8.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace arqa;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "arqa_corpus_tests";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path path = temp_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("load_corpus parses unified records and derives categories") {
    const std::string lines =
        R"({"pq_id":"a:1","passage":"قل هو الله أحد","question":"من؟","answers":[{"text":"الله","start_char":6}],"split":"train","source":"qrcd"})"
        "\n"
        R"({"pq_id":"a:2","passage":"الحمد لله رب العالمين","question":"ما؟","answers":[],"split":"dev","source":"qrcd"})"
        "\n"
        R"({"pq_id":"a:3","passage":"قل هو الله أحد","question":"متى؟","answers":[{"text":"قل","start_char":0},{"text":"أحد","start_char":11}],"split":"test","source":"arcd","tafsir":"شرح"})"
        "\n";
    const auto path = write_file("ok.jsonl", lines);
    const auto records = corpus::load_corpus(path.string());
    REQUIRE(records.size() == 3);
    CHECK(records[0].category() == corpus::AnswerCategory::single);
    CHECK(records[1].category() == corpus::AnswerCategory::zero);
    CHECK(records[2].category() == corpus::AnswerCategory::multi);
    CHECK(records[1].split == corpus::Split::dev);
    CHECK(records[2].source == corpus::Source::arcd);
    REQUIRE(records[2].tafsir.has_value());
    CHECK(*records[2].tafsir == "شرح");
}

TEST_CASE("load_corpus handles the empty file") {
    const auto path = write_file("empty.jsonl", "");
    CHECK(corpus::load_corpus(path.string()).empty());
}

TEST_CASE("load_corpus force_split stamps every record") {
    const std::string line =
        R"({"pq_id":"b:1","passage":"قل هو","question":"x؟","answers":[]})"
        "\n";
    const auto path = write_file("nosplit.jsonl", line);
    CHECK_THROWS_AS(corpus::load_corpus(path.string()), corpus::corpus_error);
    const auto records = corpus::load_corpus(path.string(), corpus::Split::test);
    REQUIRE(records.size() == 1);
    CHECK(records[0].split == corpus::Split::test);
    CHECK(records[0].source == corpus::Source::qrcd);
}

TEST_CASE("load_corpus rejects offset mismatches naming the pq_id") {
    const std::string line =
        R"({"pq_id":"bad:7","passage":"قل هو الله","question":"x؟","answers":[{"text":"الله","start_char":0}],"split":"train"})"
        "\n";
    const auto path = write_file("badoffset.jsonl", line);
    CHECK_THROWS_WITH_AS(corpus::load_corpus(path.string()),
                         doctest::Contains("bad:7"), corpus::corpus_error);
}

TEST_CASE("load_corpus reports the failing line number on parse errors") {
    const std::string lines =
        R"({"pq_id":"a:1","passage":"ص","question":"q","answers":[],"split":"train"})"
        "\n{not json\n";
    const auto path = write_file("badline.jsonl", lines);
    CHECK_THROWS_WITH_AS(corpus::load_corpus(path.string()), doctest::Contains(":2:"),
                         corpus::corpus_error);
}

TEST_CASE("load_corpus rejects duplicate pq_ids") {
    const std::string dup =
        R"({"pq_id":"d:1","passage":"ص","question":"q","answers":[],"split":"train"})";
    const auto path = write_file("dup.jsonl", dup + "\n" + dup + "\n");
    CHECK_THROWS_WITH_AS(corpus::load_corpus(path.string()), doctest::Contains("duplicate"),
                         corpus::corpus_error);
}

TEST_CASE("synthetic release corpus reproduces the published distribution") {
    const auto corpus_data = testsupport::make_table_corpus();
    CHECK(corpus_data.train.size() == 992);
    CHECK(corpus_data.dev.size() == 163);
    CHECK(corpus_data.test.size() == 407);

    const auto stats = corpus::split_stats(corpus_data.all());
    CHECK(stats.count(corpus::Split::train, corpus::AnswerCategory::multi) == 134);
    CHECK(stats.count(corpus::Split::train, corpus::AnswerCategory::single) == 806);
    CHECK(stats.count(corpus::Split::train, corpus::AnswerCategory::zero) == 52);
    CHECK(stats.qp_total == 1562);
    CHECK(stats.qpa_total == 1889);
}

TEST_CASE("every synthetic gold answer passes the offset invariant end to end") {
    const auto corpus_data = testsupport::make_table_corpus();
    const auto dir = temp_dir();
    testsupport::write_raw_jsonl(corpus_data.train, (dir / "synth_train.jsonl").string());
    const auto loaded =
        corpus::load_corpus((dir / "synth_train.jsonl").string(), corpus::Split::train);
    CHECK(loaded.size() == 992);
    for (const auto& rec : loaded)
        for (const auto& ans : rec.answers)
            CHECK(utf8::substr(rec.passage, ans.start_char, utf8::length(ans.text)) == ans.text);
}

TEST_CASE("reformat_external maps squad-style records") {
    const std::string squad = R"({"data":[{"title":"t","paragraphs":[
        {"context":"الحمد لله رب العالمين","qas":[
            {"id":"q1","question":"لمن الحمد؟","answers":[{"text":"لله","answer_start":6}]},
            {"id":"q2","question":"سؤال؟","answers":[{"text":"لله","answer_start":0}]},
            {"id":"q3","question":"مكرر؟","answers":[{"text":"لله","answer_start":6},{"text":"لله","answer_start":6}]}
        ]}]}]})";
    const auto path = write_file("squad.json", squad);
    const auto result = corpus::reformat_external(path.string(), corpus::Adapter::squad_style,
                                                  corpus::Source::arcd, corpus::Split::train);
    REQUIRE(result.records.size() == 2); // q2 dropped: offset mismatch
    CHECK(result.dropped == 1);
    CHECK(result.records[0].pq_id == "q1");
    CHECK(result.records[0].source == corpus::Source::arcd);
    CHECK(result.records[0].category() == corpus::AnswerCategory::single);
    // duplicate annotations collapse to one answer
    CHECK(result.records[1].category() == corpus::AnswerCategory::single);
}

TEST_CASE("merge_corpora identity and collision handling") {
    corpus::QPARecord a;
    a.pq_id = "1:1";
    a.passage = "نص";
    a.question = "س؟";
    a.source = corpus::Source::qrcd;

    CHECK(corpus::merge_corpora({{a}, {}}).size() == 1);

    corpus::QPARecord b = a;
    b.source = corpus::Source::arcd;
    const auto merged = corpus::merge_corpora({{a}, {b}});
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].pq_id == "1:1");
    CHECK(merged[1].pq_id == "arcd/1:1");

    // A third collision still gets a unique id.
    corpus::QPARecord c = b;
    const auto merged3 = corpus::merge_corpora({{a}, {b}, {c}});
    REQUIRE(merged3.size() == 3);
    CHECK(merged3[2].pq_id == "arcd/1:1#2");
}

TEST_CASE("merging corpora of the reported sizes yields the combined total") {
    auto make_n = [](std::size_t n, const std::string& prefix) {
        std::vector<corpus::QPARecord> recs(n);
        for (std::size_t i = 0; i < n; ++i) {
            recs[i].pq_id = prefix + std::to_string(i);
            recs[i].passage = "نص";
            recs[i].question = "س؟";
        }
        return recs;
    };
    const auto merged =
        corpus::merge_corpora({make_n(992, "a"), make_n(2500, "b"), make_n(1033, "c")});
    CHECK(merged.size() == 4525);
}

TEST_CASE("split_stats on the empty corpus") {
    const auto stats = corpus::split_stats({});
    CHECK(stats.qp_total == 0);
    CHECK(stats.qpa_total == 0);
    for (auto s : {corpus::Split::train, corpus::Split::dev, corpus::Split::test})
        CHECK(stats.split_total(s) == 0);
}

TEST_CASE("split_stats totals partition the corpus") {
    const auto corpus_data = testsupport::make_mini_corpus();
    const auto records = corpus_data.all();
    const auto stats = corpus::split_stats(records);
    CHECK(stats.qp_total == records.size());
    std::size_t by_cat = 0;
    for (auto c : {corpus::AnswerCategory::multi, corpus::AnswerCategory::single,
                   corpus::AnswerCategory::zero})
        by_cat += stats.category_total(c);
    CHECK(by_cat == records.size());
}

TEST_CASE("serialize/load round trip is byte-stable") {
    const auto corpus_data = testsupport::make_mini_corpus();
    const auto all = corpus_data.all();
    const auto dir = temp_dir();
    const auto p1 = dir / "round1.jsonl";
    const auto p2 = dir / "round2.jsonl";
    corpus::write_corpus(all, p1.string());
    const auto loaded = corpus::load_corpus(p1.string());
    corpus::write_corpus(loaded, p2.string());
    CHECK(read_file(p1) == read_file(p2));

    REQUIRE(loaded.size() == all.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].pq_id == all[i].pq_id);
        CHECK(loaded[i].passage == all[i].passage);
        CHECK(loaded[i].answers.size() == all[i].answers.size());
    }
}

TEST_CASE("render_stats carries the headline totals") {
    const auto stats = corpus::split_stats(testsupport::make_table_corpus().all());
    const std::string table = corpus::render_stats(stats);
    CHECK(table.find("992") != std::string::npos);
    CHECK(table.find("163") != std::string::npos);
    CHECK(table.find("407") != std::string::npos);
    CHECK(table.find("1889") != std::string::npos);
}

} // TEST_SUITE
