#include "arqa/config.hpp"
#include "arqa/postproc.hpp"
#include "arqa/text.hpp"

#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

using namespace arqa;

namespace {

align::CandidateSpan span(std::size_t start, std::size_t end, double score) {
    align::CandidateSpan s;
    s.start_token = start;
    s.end_token = end;
    s.score = score;
    s.pq_id = "q";
    s.text = "span";
    return s;
}

bool same_spans(const std::vector<align::CandidateSpan>& a,
                const std::vector<align::CandidateSpan>& b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].start_token != b[i].start_token || a[i].end_token != b[i].end_token ||
            a[i].score != b[i].score)
            return false;
    return true;
}

std::vector<align::CandidateSpan> random_instance(std::uint64_t& rng, std::size_t max_spans) {
    std::vector<align::CandidateSpan> spans;
    const std::size_t n = testsupport::mix64(rng) % (max_spans + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t start = testsupport::mix64(rng) % 25;
        const std::size_t len = 1 + testsupport::mix64(rng) % 5;
        // Quantized scores so ties actually occur.
        const double score = double(testsupport::mix64(rng) % 8) / 8.0;
        spans.push_back(span(start, start + len - 1, score));
    }
    return spans;
}

double random_threshold(std::uint64_t& rng) {
    static const double choices[] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.1};
    return choices[testsupport::mix64(rng) % 6];
}

} // namespace

TEST_SUITE("postproc") {

TEST_CASE("span_overlap uses the smaller span as the normalizer") {
    CHECK(postproc::span_overlap(span(0, 3, 1), span(0, 3, 1)) == doctest::Approx(1.0));
    CHECK(postproc::span_overlap(span(0, 1, 1), span(0, 7, 1)) == doctest::Approx(1.0)); // contained
    CHECK(postproc::span_overlap(span(0, 3, 1), span(2, 5, 1)) == doctest::Approx(0.5));
    CHECK(postproc::span_overlap(span(0, 1, 1), span(5, 6, 1)) == doctest::Approx(0.0));
}

TEST_CASE("nms keeps non-overlapping spans untouched") {
    const std::vector<align::CandidateSpan> input = {span(0, 1, 0.9), span(3, 4, 0.8),
                                                     span(6, 7, 0.7)};
    CHECK(same_spans(postproc::nms(input, 0.5), input));
}

TEST_CASE("nms drops the lower-scored duplicate") {
    const auto out = postproc::nms({span(2, 4, 0.8), span(2, 4, 0.9)}, 0.5);
    REQUIRE(out.size() == 1);
    CHECK(out[0].score == doctest::Approx(0.9));
}

TEST_CASE("nms chain keeps the two ends") {
    // A overlaps B, B overlaps C, A and C disjoint.
    const auto out =
        postproc::nms({span(0, 3, 0.9), span(2, 5, 0.8), span(5, 8, 0.7)}, 0.5);
    REQUIRE(out.size() == 2);
    CHECK(out[0].start_token == 0);
    CHECK(out[1].start_token == 5);
}

TEST_CASE("threshold edge semantics") {
    // threshold above 1: nothing suppressed, even duplicates.
    const auto all = postproc::nms({span(0, 2, 0.9), span(0, 2, 0.8), span(1, 2, 0.7)}, 1.1);
    CHECK(all.size() == 3);
    // threshold 0: any shared token suppresses, disjoint spans survive.
    const auto strict = postproc::nms({span(0, 2, 0.9), span(2, 3, 0.8), span(5, 6, 0.7)}, 0.0);
    REQUIRE(strict.size() == 2);
    CHECK(strict[0].start_token == 0);
    CHECK(strict[1].start_token == 5);
}

TEST_CASE("highest-scoring span is always retained") {
    std::uint64_t rng = 11;
    for (int i = 0; i < 200; ++i) {
        auto spans = random_instance(rng, 10);
        if (spans.empty())
            continue;
        const auto out = postproc::nms(spans, random_threshold(rng));
        REQUIRE(!out.empty());
        const double top =
            std::max_element(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
                return a.score < b.score;
            })->score;
        CHECK(out[0].score == doctest::Approx(top));
    }
}

TEST_CASE("nms matches the set-based reference and ignores input order") {
    std::uint64_t rng = 2024;
    for (int i = 0; i < 2000; ++i) {
        auto spans = random_instance(rng, 10);
        const double threshold = random_threshold(rng);
        const auto expected = testsupport::reference_nms(spans, threshold);
        const auto actual = postproc::nms(spans, threshold);
        CHECK(same_spans(actual, expected));

        auto shuffled = spans;
        for (std::size_t j = shuffled.size(); j > 1; --j)
            std::swap(shuffled[j - 1], shuffled[testsupport::mix64(rng) % j]);
        CHECK(same_spans(postproc::nms(shuffled, threshold), expected));
    }
}

TEST_CASE("filter drops question echoes and stopword runs") {
    postproc::PostprocConfig cfg;
    const text::Stoplist stops = text::parse_stopwords(text::default_stopwords());
    const std::string passage = "من هو في ما الحمد لله رب العالمين يوم الدين";
    const auto toks = text::tokenize(passage);
    const std::string question = "الحمد لله رب العالمين";

    // Token-identical to the question -> similarity 1.0, dropped.
    align::CandidateSpan echo = span(4, 7, 0.9);
    // Pure stopword run -> ratio 1.0, dropped.
    align::CandidateSpan stops_only = span(0, 3, 0.8);
    // Informative span -> kept.
    align::CandidateSpan keep = span(8, 9, 0.7);

    postproc::FilterStats stats;
    const auto out = postproc::filter_uninformative({echo, stops_only, keep}, toks, question, cfg,
                                                    stops, &stats);
    REQUIRE(out.size() == 1);
    CHECK(out[0].start_token == 8);
    CHECK(stats.dropped_question_sim == 1);
    CHECK(stats.dropped_stopword == 1);
}

TEST_CASE("attached punctuation cannot hide a question echo or stopwords") {
    postproc::PostprocConfig cfg;
    const text::Stoplist stops = text::parse_stopwords("من\nفي\n");
    const std::string passage = "الحمد، لله. رب العالمين، من، في.";
    const auto toks = text::tokenize(passage);
    const std::string question = "الحمد لله رب العالمين";
    postproc::FilterStats stats;
    const auto out = postproc::filter_uninformative({span(0, 3, 0.9), span(4, 5, 0.8)}, toks,
                                                    question, cfg, stops, &stats);
    CHECK(out.empty());
    CHECK(stats.dropped_question_sim == 1);
    CHECK(stats.dropped_stopword == 1);
}

TEST_CASE("mildly similar spans survive the default thresholds") {
    postproc::PostprocConfig cfg;
    const text::Stoplist stops = text::parse_stopwords("من\n");
    // Span of 4 tokens sharing exactly one with a 6-token question, one
    // stopword among the four: sim 0.2, ratio 0.25, both below defaults.
    const std::string passage = "من الصبر الرزق الفرقان";
    const auto toks = text::tokenize(passage);
    const std::string question = "كيف ورد الصبر عند اهل الكتاب";
    const auto out =
        postproc::filter_uninformative({span(0, 3, 0.9)}, toks, question, cfg, stops, nullptr);
    CHECK(out.size() == 1);
}

TEST_CASE("run_pipeline empty input gives an empty ranked list") {
    postproc::PostprocConfig cfg;
    const text::Stoplist stops;
    const auto out = postproc::run_pipeline({}, {}, "سؤال", cfg, stops);
    CHECK(out.spans.empty());
}

TEST_CASE("run_pipeline keeps the k best of clean candidates") {
    postproc::PostprocConfig cfg; // k = 10
    const text::Stoplist stops = text::parse_stopwords("من\n");
    std::string passage;
    for (int i = 0; i < 40; ++i)
        passage += (i ? " " : "") + std::string("كلمه") + std::to_string(i);
    const auto toks = text::tokenize(passage);

    std::vector<align::CandidateSpan> candidates;
    for (std::size_t i = 0; i < 20; ++i)
        candidates.push_back(span(2 * i, 2 * i, 0.05 * double(i + 1)));

    const auto out = postproc::run_pipeline(candidates, toks, "سؤال بعيد", cfg, stops);
    REQUIRE(out.spans.size() == 10);
    for (std::size_t i = 0; i < out.spans.size(); ++i) {
        CHECK(out.spans[i].score == doctest::Approx(1.0 - 0.05 * double(i)));
        if (i > 0)
            CHECK(out.spans[i - 1].score >= out.spans[i].score);
    }
}

TEST_CASE("run_pipeline output satisfies every ranked-list invariant") {
    std::uint64_t rng = 77;
    postproc::PostprocConfig cfg;
    const text::Stoplist stops = text::parse_stopwords(text::default_stopwords());
    const auto corpus_data = testsupport::make_mini_corpus();

    for (int iter = 0; iter < 300; ++iter) {
        const auto& rec = corpus_data.test[testsupport::mix64(rng) % corpus_data.test.size()];
        const auto toks = text::tokenize(rec.passage);
        std::vector<align::CandidateSpan> candidates;
        const std::size_t n = testsupport::mix64(rng) % 16;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t start = testsupport::mix64(rng) % toks.size();
            const std::size_t len = 1 + testsupport::mix64(rng) % 4;
            auto s = span(start, std::min(start + len - 1, toks.size() - 1),
                          double(testsupport::mix64(rng) % 8) / 8.0);
            s.pq_id = rec.pq_id;
            candidates.push_back(s);
        }
        // Adversarial extras: duplicates and a question echo.
        if (!candidates.empty())
            candidates.push_back(candidates.front());

        const auto out =
            postproc::run_pipeline(candidates, toks, rec.question, cfg, stops, nullptr);
        CHECK(out.spans.size() <= cfg.k);
        for (std::size_t i = 1; i < out.spans.size(); ++i)
            CHECK(out.spans[i - 1].score >= out.spans[i].score);
        for (std::size_t i = 0; i < out.spans.size(); ++i)
            for (std::size_t j = i + 1; j < out.spans.size(); ++j) {
                const double ov = postproc::span_overlap(out.spans[i], out.spans[j]);
                CHECK((ov == 0.0 || ov < cfg.nms_overlap_threshold));
            }

        // Deterministic: same inputs, same output.
        const auto again =
            postproc::run_pipeline(candidates, toks, rec.question, cfg, stops, nullptr);
        CHECK(same_spans(out.spans, again.spans));
    }
}

TEST_CASE("postproc config file parsing") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "arqa_postproc_tests";
    fs::create_directories(dir);
    const fs::path path = dir / "post.conf";
    {
        std::ofstream out(path);
        out << "# tuning\nnms_overlap_threshold = 0.4\nk = 5\n";
    }
    const auto cfg = postproc::load_postproc_config(path.string());
    CHECK(cfg.nms_overlap_threshold == doctest::Approx(0.4));
    CHECK(cfg.k == 5);
    CHECK(cfg.question_sim_threshold == doctest::Approx(0.6)); // default kept

    const fs::path bad = dir / "bad.conf";
    {
        std::ofstream out(bad);
        out << "mystery = 1\n";
    }
    CHECK_THROWS_AS(postproc::load_postproc_config(bad.string()), config_error);
}

} // TEST_SUITE
