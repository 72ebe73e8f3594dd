#include "arqa/eval.hpp"

#include "arqa/utf8.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_set>

using nlohmann::json;

namespace arqa::eval {

namespace {

double match_value(const SpanRange& pred, const SpanRange& gold) {
    return text::range_f1(pred.start, pred.end, gold.start, gold.end);
}

// Exhaustive injective assignment of golds to prediction ranks, maximizing
// the pAP mass. Diagnostic alternative to greedy consumption; guarded to
// small instances because the search is factorial.
double optimal_pap(const std::vector<SpanRange>& preds, const std::vector<SpanRange>& golds) {
    constexpr std::size_t kMaxGolds = 8, kMaxPreds = 12;
    if (golds.size() > kMaxGolds || preds.size() > kMaxPreds)
        throw eval_error("optimal-assignment scoring is limited to small instances");

    std::vector<std::vector<double>> m(preds.size(), std::vector<double>(golds.size(), 0.0));
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (std::size_t j = 0; j < golds.size(); ++j)
            m[i][j] = match_value(preds[i], golds[j]);

    // assigned[i] = gold index at rank i, or npos.
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> assigned(preds.size(), npos);
    double best = 0.0;

    std::function<void(std::size_t)> recurse = [&](std::size_t gold) {
        if (gold == golds.size()) {
            double msum = 0.0, total = 0.0;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                const double mi = assigned[i] == npos ? 0.0 : m[i][assigned[i]];
                msum += mi;
                if (mi > 0.0)
                    total += msum / static_cast<double>(i + 1);
            }
            best = std::max(best, total / static_cast<double>(golds.size()));
            return;
        }
        recurse(gold + 1); // leave this gold unassigned
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (assigned[i] != npos || m[i][gold] <= 0.0)
                continue;
            assigned[i] = gold;
            recurse(gold + 1);
            assigned[i] = npos;
        }
    };
    recurse(0);
    return best;
}

std::string format3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace

std::vector<SpanRange> gold_token_ranges(const std::vector<corpus::GoldAnswer>& golds,
                                         const std::vector<text::Token>& tokens) {
    std::vector<SpanRange> out;
    out.reserve(golds.size());
    for (const auto& g : golds) {
        const std::size_t len = utf8::length(g.text);
        const align::TokenRange r = align::snap_to_word_boundaries(g.start_char, g.start_char + len, tokens);
        out.push_back(SpanRange{r.start, r.end});
    }
    return out;
}

std::vector<std::vector<double>> partial_match_matrix(const std::vector<SpanRange>& preds,
                                                      const std::vector<SpanRange>& golds) {
    std::vector<std::vector<double>> matrix(preds.size(), std::vector<double>(golds.size(), 0.0));
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (std::size_t j = 0; j < golds.size(); ++j)
            matrix[i][j] = match_value(preds[i], golds[j]);
    return matrix;
}

double pap_at_k(const std::vector<SpanRange>& preds, const std::vector<SpanRange>& golds,
                std::size_t k, bool optimal_assignment) {
    if (golds.empty())
        return preds.empty() ? 1.0 : 0.0;
    if (preds.size() > k)
        throw eval_error("prediction list longer than k");
    if (optimal_assignment)
        return optimal_pap(preds, golds);

    std::vector<bool> consumed(golds.size(), false);
    double msum = 0.0, pap = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        double best_m = 0.0;
        std::size_t best_j = golds.size();
        for (std::size_t j = 0; j < golds.size(); ++j) {
            if (consumed[j])
                continue;
            const double m = match_value(preds[i], golds[j]);
            if (m <= 0.0)
                continue;
            // Ties go to the earliest gold span so the score does not depend
            // on the order golds are listed in.
            const bool wins = m > best_m ||
                              (m == best_m && best_j < golds.size() &&
                               (golds[j].start < golds[best_j].start ||
                                (golds[j].start == golds[best_j].start && golds[j].end < golds[best_j].end)));
            if (wins) {
                best_m = m;
                best_j = j;
            }
        }
        if (best_j < golds.size()) {
            consumed[best_j] = true;
            msum += best_m;
            pap += msum / static_cast<double>(i + 1);
        }
    }
    return pap / static_cast<double>(golds.size());
}

RunFile load_run(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw eval_error("cannot open run file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw eval_error(path + ": parse error: " + e.what());
    }
    if (!doc.is_object())
        throw eval_error(path + ": expected a JSON object keyed by pq_id");
    RunFile run;
    for (const auto& [pq_id, entries] : doc.items()) {
        if (!entries.is_array())
            throw eval_error(path + ": entry for " + pq_id + " is not an array");
        std::vector<RunAnswer> answers;
        for (const auto& e : entries) {
            RunAnswer a;
            try {
                a.answer = e.at("answer").get<std::string>();
                a.rank = e.at("rank").get<int>();
                a.score = e.at("score").get<double>();
                a.start_token = e.at("start_token").get<std::size_t>();
                a.end_token = e.at("end_token").get<std::size_t>();
            } catch (const json::exception& ex) {
                throw eval_error(path + ": malformed prediction for " + pq_id + ": " + ex.what());
            }
            if (a.rank < 1)
                throw eval_error(path + ": rank must be 1-based for " + pq_id);
            if (a.end_token < a.start_token)
                throw eval_error(path + ": inverted token span for " + pq_id);
            answers.push_back(std::move(a));
        }
        run.emplace(pq_id, std::move(answers));
    }
    return run;
}

void save_run(const RunFile& run, const std::string& path) {
    json doc = json::object();
    for (const auto& [pq_id, answers] : run) {
        json arr = json::array();
        for (const auto& a : answers)
            arr.push_back(json{{"answer", a.answer},
                               {"rank", a.rank},
                               {"score", a.score},
                               {"start_token", a.start_token},
                               {"end_token", a.end_token}});
        doc[pq_id] = std::move(arr);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw eval_error("cannot write run file: " + path);
    out << doc.dump(1) << '\n';
}

RunFile run_from_ranked_lists(const std::vector<postproc::RankedAnswerList>& lists) {
    RunFile run;
    for (const auto& list : lists) {
        std::vector<RunAnswer> answers;
        for (std::size_t i = 0; i < list.spans.size(); ++i) {
            const auto& span = list.spans[i];
            RunAnswer a;
            a.answer = span.text;
            a.rank = static_cast<int>(i + 1);
            a.score = span.score;
            a.start_token = span.start_token;
            a.end_token = span.end_token;
            answers.push_back(std::move(a));
        }
        run[list.pq_id] = std::move(answers);
    }
    return run;
}

EvalReport evaluate_run(const RunFile& run, const std::vector<corpus::QPARecord>& corpus,
                        const EvalOptions& opts) {
    EvalReport report;
    report.k = opts.k;

    std::unordered_set<std::string> corpus_ids;
    for (const auto& rec : corpus)
        corpus_ids.insert(rec.pq_id);
    for (const auto& [pq_id, _] : run)
        if (corpus_ids.count(pq_id) == 0)
            throw eval_error("run references unknown pq_id: " + pq_id);

    std::map<std::string, double> category_sums;
    for (const auto& rec : corpus) {
        const std::vector<text::Token> tokens = text::tokenize(rec.passage);
        const std::vector<SpanRange> golds = gold_token_ranges(rec.answers, tokens);

        std::vector<SpanRange> preds;
        const auto it = run.find(rec.pq_id);
        if (it != run.end()) {
            std::vector<RunAnswer> ordered = it->second;
            std::stable_sort(ordered.begin(), ordered.end(),
                             [](const RunAnswer& a, const RunAnswer& b) { return a.rank < b.rank; });
            for (const auto& a : ordered) {
                if (preds.size() >= opts.k)
                    break;
                if (a.end_token >= tokens.size())
                    throw eval_error("prediction span out of bounds for " + rec.pq_id);
                preds.push_back(SpanRange{a.start_token, a.end_token});
            }
        }
        const double score = pap_at_k(preds, golds, opts.k, opts.optimal_assignment);
        report.per_question[rec.pq_id] = score;
        const std::string cat(corpus::to_string(rec.category()));
        category_sums[cat] += score;
        ++report.category_counts[cat];
        report.macro_pap += score;
    }
    if (!report.per_question.empty())
        report.macro_pap /= static_cast<double>(report.per_question.size());
    for (const auto& [cat, sum] : category_sums)
        report.by_category[cat] = sum / static_cast<double>(report.category_counts[cat]);
    return report;
}

std::string render_report(const EvalReport& report, ReportFormat format, std::string_view system_name,
                          std::string_view system_type) {
    if (format == ReportFormat::json) {
        json doc;
        doc["k"] = report.k;
        doc["macro_pap"] = report.macro_pap;
        doc["questions"] = report.per_question.size();
        doc["by_category"] = report.by_category;
        doc["category_counts"] = report.category_counts;
        doc["per_question"] = report.per_question;
        if (!report.drop_counts.empty())
            doc["drop_counts"] = report.drop_counts;
        return doc.dump(1) + "\n";
    }

    std::ostringstream out;
    auto row = [&out](std::string_view system, std::string_view type, const std::string& score) {
        out << system;
        if (system.size() < 36)
            out << std::string(36 - system.size(), ' ');
        else
            out << ' ';
        out << type;
        if (type.size() < 16)
            out << std::string(16 - type.size(), ' ');
        else
            out << ' ';
        out << score << '\n';
    };
    row("system", "type", "pAP@" + std::to_string(report.k));
    row(system_name, system_type, format3(report.macro_pap));
    for (const char* cat : {"multi", "single", "zero"}) {
        const auto it = report.by_category.find(cat);
        if (it == report.by_category.end())
            continue;
        const std::size_t n = report.category_counts.at(cat);
        row("  " + std::string(cat) + "-answer (" + std::to_string(n) + ")", "", format3(it->second));
    }
    out << "questions scored: " << report.per_question.size() << '\n';
    if (report.per_question.empty())
        out << "warning: no questions were scored\n";
    for (const auto& [key, value] : report.drop_counts)
        out << "  " << key << ": " << value << '\n';
    return out.str();
}

} // namespace arqa::eval
