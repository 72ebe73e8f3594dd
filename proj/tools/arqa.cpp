// arqa - extractive question answering over Arabic passages.
//
// Subcommands mirror the pipeline phases:
//   prepare      unify and validate corpora, print split statistics
//   predict      few-shot prompt an LLM provider and write a ranked run file
//   postprocess  turn an n-best file from an external model into a run file
//   evaluate     score a run file with pAP@k
//
// Exit codes: 0 success, 1 usage, 2 data validation, 3 provider/network.

#include "arqa/align.hpp"
#include "arqa/client.hpp"
#include "arqa/config.hpp"
#include "arqa/corpus.hpp"
#include "arqa/eval.hpp"
#include "arqa/manifest.hpp"
#include "arqa/postproc.hpp"
#include "arqa/prompting.hpp"
#include "arqa/sha256.hpp"
#include "arqa/text.hpp"
#include "arqa/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

arqa::corpus::Split parse_split(const std::string& value) {
    const auto split = arqa::corpus::split_from_string(value);
    if (!split)
        throw CLI::ValidationError("--split", "expected train, dev or test");
    return *split;
}

arqa::text::Stoplist load_stoplist(const std::string& path) {
    if (path.empty())
        return arqa::text::parse_stopwords(arqa::text::default_stopwords());
    return arqa::text::load_stopwords(path);
}

// ---------------------------------------------------------------- prepare

struct InputSpec {
    std::string path;
    std::string format = "unified"; // unified | squad
    arqa::corpus::Source source = arqa::corpus::Source::qrcd;
    std::optional<arqa::corpus::Split> split;
};

InputSpec parse_input_spec(const std::string& raw) {
    InputSpec spec;
    std::vector<std::string> parts;
    std::stringstream ss(raw);
    std::string part;
    while (std::getline(ss, part, ','))
        parts.push_back(part);
    if (parts.empty() || parts[0].empty())
        throw CLI::ValidationError("--input", "empty input spec");
    spec.path = parts[0];
    if (parts.size() > 1 && !parts[1].empty())
        spec.format = parts[1];
    if (spec.format != "unified" && spec.format != "squad" && spec.format != "squad_style")
        throw CLI::ValidationError("--input", "format must be unified or squad: " + raw);
    if (parts.size() > 2 && !parts[2].empty()) {
        const auto src = arqa::corpus::source_from_string(parts[2]);
        if (!src)
            throw CLI::ValidationError("--input", "unknown source in " + raw);
        spec.source = *src;
    }
    if (parts.size() > 3 && !parts[3].empty()) {
        const auto sp = arqa::corpus::split_from_string(parts[3]);
        if (!sp)
            throw CLI::ValidationError("--input", "unknown split in " + raw);
        spec.split = *sp;
    }
    if (parts.size() > 4)
        throw CLI::ValidationError("--input", "too many fields in " + raw);
    return spec;
}

int cmd_prepare(const std::vector<std::string>& inputs, const std::string& out_path) {
    std::vector<std::vector<arqa::corpus::QPARecord>> corpora;
    std::size_t dropped_total = 0;
    for (const auto& raw : inputs) {
        const InputSpec spec = parse_input_spec(raw);
        if (spec.format == "unified") {
            corpora.push_back(arqa::corpus::load_corpus(spec.path, spec.split, spec.source));
        } else {
            if (!spec.split) {
                std::cerr << "error: squad-style input needs an explicit split: " << raw << "\n";
                return kExitUsage;
            }
            auto result = arqa::corpus::reformat_external(spec.path, arqa::corpus::Adapter::squad_style,
                                                          spec.source, *spec.split);
            dropped_total += result.dropped;
            corpora.push_back(std::move(result.records));
        }
    }
    const auto merged = arqa::corpus::merge_corpora(corpora);
    if (!out_path.empty())
        arqa::corpus::write_corpus(merged, out_path);
    const auto stats = arqa::corpus::split_stats(merged);
    std::cout << arqa::corpus::render_stats(stats);
    if (dropped_total > 0)
        std::cerr << "dropped " << dropped_total << " record(s) with unverifiable answer offsets\n";
    return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictCounters {
    std::atomic<long long> parse_failures{0};
    std::atomic<long long> align_exact{0};
    std::atomic<long long> align_fuzzy{0};
    std::atomic<long long> align_failed{0};
    std::atomic<long long> cache_hits{0};
    std::atomic<long long> live_calls{0};
    std::atomic<long long> nms_suppressed{0};
    std::atomic<long long> dropped_question_sim{0};
    std::atomic<long long> dropped_stopword{0};
};

int cmd_predict(const std::string& corpus_path, const std::string& split_name,
                arqa::prompting::ProviderConfig provider_cfg, const std::string& template_path,
                std::uint64_t seed, const arqa::postproc::PostprocConfig& post_cfg,
                double min_fuzzy_f1, std::size_t workers, const std::string& out_path) {
    using namespace arqa;

    const corpus::Split split = parse_split(split_name);
    const auto full_corpus = corpus::load_corpus(corpus_path);
    auto questions = corpus::filter_split(full_corpus, split);
    std::sort(questions.begin(), questions.end(),
              [](const corpus::QPARecord& a, const corpus::QPARecord& b) { return a.pq_id < b.pq_id; });
    const auto train = corpus::filter_split(full_corpus, corpus::Split::train);

    const prompting::PromptTemplate tmpl =
        template_path.empty() ? prompting::default_template() : prompting::load_template(template_path);
    provider_cfg.template_digest = prompting::template_digest(tmpl);

    const prompting::FewShotSet base_shots = prompting::select_shots(train, seed);
    const text::Stoplist stoplist = load_stoplist(post_cfg.stoplist_path);

    prompting::ModelClient client(provider_cfg);
    PredictCounters counters;
    std::vector<postproc::RankedAnswerList> results(questions.size());
    std::vector<std::string> cache_misses;
    std::vector<std::string> errors;
    std::mutex mu;
    std::atomic<std::size_t> cursor{0};

    auto process = [&](const corpus::QPARecord& rec, std::size_t idx) {
        prompting::FewShotSet shots = base_shots;
        if (shots.pq_ids().count(rec.pq_id) > 0)
            shots = prompting::select_shots(train, seed, {rec.pq_id});

        const std::string prompt = prompting::build_prompt(tmpl, shots, rec.passage, rec.question);
        const prompting::RawResponse response = client.query(prompt);
        if (response.from_cache)
            ++counters.cache_hits;
        else
            ++counters.live_calls;

        const prompting::ParseResult parsed =
            prompting::parse_response(response.text, tmpl.no_answer_sentinel);
        if (!parsed.clean())
            ++counters.parse_failures;

        const std::vector<text::Token> tokens = text::tokenize(rec.passage);
        std::vector<align::CandidateSpan> candidates;
        const std::size_t m = parsed.answers.size();
        for (std::size_t r = 0; r < m; ++r) {
            const auto outcome = align::align_answer(parsed.answers[r], tokens, rec.passage, min_fuzzy_f1);
            if (!outcome) {
                ++counters.align_failed;
                continue;
            }
            if (outcome->stage == align::MatchStage::exact)
                ++counters.align_exact;
            else
                ++counters.align_fuzzy;
            align::CandidateSpan span = outcome->span;
            span.score = static_cast<double>(m - r) / static_cast<double>(m);
            span.origin = align::Origin::llm;
            span.pq_id = rec.pq_id;
            candidates.push_back(std::move(span));
        }

        postproc::PipelineStats stats;
        postproc::RankedAnswerList ranked =
            postproc::run_pipeline(std::move(candidates), tokens, rec.question, post_cfg, stoplist, &stats);
        ranked.pq_id = rec.pq_id;
        counters.nms_suppressed += static_cast<long long>(stats.nms_suppressed);
        counters.dropped_question_sim += static_cast<long long>(stats.filter.dropped_question_sim);
        counters.dropped_stopword += static_cast<long long>(stats.filter.dropped_stopword);
        results[idx] = std::move(ranked);
    };

    auto worker = [&] {
        while (true) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= questions.size())
                return;
            try {
                process(questions[idx], idx);
            } catch (const prompting::offline_cache_miss&) {
                std::lock_guard<std::mutex> lock(mu);
                cache_misses.push_back(questions[idx].pq_id);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                errors.push_back(questions[idx].pq_id + ": " + e.what());
            }
        }
    };

    const std::size_t pool_size =
        std::max<std::size_t>(1, std::min(workers, questions.size() ? questions.size() : 1));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < pool_size; ++i)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();

    if (!errors.empty()) {
        for (const auto& e : errors)
            std::cerr << "error: " << e << "\n";
        return kExitProvider;
    }
    if (!cache_misses.empty()) {
        std::sort(cache_misses.begin(), cache_misses.end());
        std::cerr << "offline cache miss for " << cache_misses.size() << " question(s):";
        for (const auto& id : cache_misses)
            std::cerr << " " << id;
        std::cerr << "\n";
        return kExitProvider;
    }

    const eval::RunFile run = eval::run_from_ranked_lists(results);
    eval::save_run(run, out_path);

    RunManifest manifest;
    manifest.tool_version = kVersion;
    manifest.corpus_path = corpus_path;
    manifest.corpus_digest = sha256_hex(read_file(corpus_path));
    manifest.split = std::string(corpus::to_string(split));
    manifest.provider = provider_cfg.provider;
    manifest.model = provider_cfg.model;
    manifest.temperature = provider_cfg.temperature;
    manifest.template_digest = provider_cfg.template_digest;
    manifest.shot_pq_ids = {base_shots.multi.pq_id, base_shots.single.pq_id, base_shots.zero.pq_id};
    manifest.seed = seed;
    manifest.k = post_cfg.k;
    manifest.nms_overlap_threshold = post_cfg.nms_overlap_threshold;
    manifest.question_sim_threshold = post_cfg.question_sim_threshold;
    manifest.stopword_ratio_threshold = post_cfg.stopword_ratio_threshold;
    manifest.counters["parse_failures"] = counters.parse_failures;
    manifest.counters["align_exact"] = counters.align_exact;
    manifest.counters["align_fuzzy"] = counters.align_fuzzy;
    manifest.counters["align_failed"] = counters.align_failed;
    manifest.counters["cache_hits"] = counters.cache_hits;
    manifest.counters["live_calls"] = counters.live_calls;
    manifest.counters["nms_suppressed"] = counters.nms_suppressed;
    manifest.counters["dropped_question_sim"] = counters.dropped_question_sim;
    manifest.counters["dropped_stopword"] = counters.dropped_stopword;
    manifest.counters["latency_ms"] = static_cast<std::int64_t>(std::llround(client.network_ms()));
    save_manifest(manifest, manifest_path_for(out_path));

    std::cerr << "wrote " << run.size() << " question(s) to " << out_path << " ("
              << counters.cache_hits << " cached, " << counters.live_calls << " live)\n";
    return kExitOk;
}

// ------------------------------------------------------------ postprocess

int cmd_postprocess(const std::string& nbest_path, const std::string& corpus_path,
                    const std::string& split_name, std::size_t nbest_limit,
                    const arqa::postproc::PostprocConfig& post_cfg, const std::string& out_path) {
    using namespace arqa;

    auto records = corpus::load_corpus(corpus_path);
    if (!split_name.empty())
        records = corpus::filter_split(records, parse_split(split_name));

    const auto nbest = align::load_nbest(nbest_path, records, nbest_limit);
    const text::Stoplist stoplist = load_stoplist(post_cfg.stoplist_path);

    postproc::PipelineStats stats;
    std::vector<postproc::RankedAnswerList> results;
    results.reserve(records.size());
    for (const auto& rec : records) {
        const std::vector<text::Token> tokens = text::tokenize(rec.passage);
        std::vector<align::CandidateSpan> candidates;
        if (const auto it = nbest.find(rec.pq_id); it != nbest.end())
            candidates = it->second;
        postproc::RankedAnswerList ranked =
            postproc::run_pipeline(std::move(candidates), tokens, rec.question, post_cfg, stoplist, &stats);
        ranked.pq_id = rec.pq_id;
        results.push_back(std::move(ranked));
    }

    const eval::RunFile run = eval::run_from_ranked_lists(results);
    eval::save_run(run, out_path);

    RunManifest manifest;
    manifest.tool_version = kVersion;
    manifest.corpus_path = corpus_path;
    manifest.corpus_digest = sha256_hex(read_file(corpus_path));
    manifest.split = split_name;
    manifest.provider = "nbest";
    manifest.model = nbest_path;
    manifest.k = post_cfg.k;
    manifest.nms_overlap_threshold = post_cfg.nms_overlap_threshold;
    manifest.question_sim_threshold = post_cfg.question_sim_threshold;
    manifest.stopword_ratio_threshold = post_cfg.stopword_ratio_threshold;
    manifest.counters["nms_suppressed"] = static_cast<std::int64_t>(stats.nms_suppressed);
    manifest.counters["dropped_question_sim"] = static_cast<std::int64_t>(stats.filter.dropped_question_sim);
    manifest.counters["dropped_stopword"] = static_cast<std::int64_t>(stats.filter.dropped_stopword);
    save_manifest(manifest, manifest_path_for(out_path));

    std::cerr << "wrote " << run.size() << " question(s) to " << out_path << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- evaluate

int cmd_evaluate(const std::string& run_path, const std::string& corpus_path,
                 const std::string& split_name, std::size_t k, bool optimal,
                 const std::string& format_name, const std::string& baseline_path,
                 const std::string& out_path) {
    using namespace arqa;

    auto records = corpus::load_corpus(corpus_path);
    if (!split_name.empty())
        records = corpus::filter_split(records, parse_split(split_name));

    const eval::EvalOptions opts{k, optimal};
    eval::EvalReport report = eval::evaluate_run(eval::load_run(run_path), records, opts);
    std::ifstream manifest_in(manifest_path_for(run_path));
    if (manifest_in) {
        manifest_in.close();
        report.drop_counts = load_manifest(manifest_path_for(run_path)).counters;
    }

    const eval::ReportFormat format =
        format_name == "json" ? eval::ReportFormat::json : eval::ReportFormat::table;
    std::ostringstream rendered;
    rendered << eval::render_report(report, format, run_path, "run");

    if (!baseline_path.empty()) {
        const eval::EvalReport base = eval::evaluate_run(eval::load_run(baseline_path), records, opts);
        if (format == eval::ReportFormat::table) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3f (%+.3f vs baseline %.3f)", report.macro_pap,
                          report.macro_pap - base.macro_pap, base.macro_pap);
            rendered << "delta: " << buf << "\n";
            for (const char* cat : {"multi", "single", "zero"}) {
                const auto it = report.by_category.find(cat);
                const auto bit = base.by_category.find(cat);
                if (it == report.by_category.end() || bit == base.by_category.end())
                    continue;
                std::snprintf(buf, sizeof(buf), "%+.3f", it->second - bit->second);
                rendered << "  " << cat << ": " << buf << "\n";
            }
        } else {
            rendered << eval::render_report(base, format, baseline_path, "baseline");
        }
    }

    if (out_path.empty()) {
        std::cout << rendered.str();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write report: " + out_path);
        out << rendered.str();
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"extractive QA toolkit for Arabic passages"};
    app.require_subcommand(1);
    app.set_version_flag("--version", arqa::kVersion);

    // prepare
    auto* prepare = app.add_subcommand("prepare", "unify and validate corpora");
    std::vector<std::string> inputs;
    std::string prepare_out;
    prepare->add_option("--input", inputs, "input spec: path[,format[,source[,split]]]")->required();
    prepare->add_option("--out", prepare_out, "unified corpus output path (JSONL)");

    // shared pipeline options
    std::string corpus_path, split_name, out_path;
    arqa::postproc::PostprocConfig post_cfg;
    std::string postproc_config_path, stopwords_path;

    auto add_postproc_flags = [&](CLI::App* cmd) {
        cmd->add_option("--postproc-config", postproc_config_path, "key = value postprocessing config");
        cmd->add_option("--nms-threshold", post_cfg.nms_overlap_threshold, "NMS overlap threshold")
            ->capture_default_str();
        cmd->add_option("--qsim-threshold", post_cfg.question_sim_threshold,
                        "question similarity drop threshold")
            ->capture_default_str();
        cmd->add_option("--stopword-threshold", post_cfg.stopword_ratio_threshold,
                        "stopword ratio drop threshold")
            ->capture_default_str();
        cmd->add_option("--stopwords", stopwords_path, "stopword list file (default: bundled)");
        cmd->add_option("--k", post_cfg.k, "ranked list cutoff")->capture_default_str();
    };

    // predict
    auto* predict = app.add_subcommand("predict", "few-shot prompt an LLM provider");
    arqa::prompting::ProviderConfig provider_cfg;
    std::string provider_config_path, template_path;
    std::uint64_t seed = 109;
    double min_fuzzy_f1 = 0.8;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    predict->add_option("--corpus", corpus_path, "unified corpus JSONL")->required();
    predict->add_option("--split", split_name, "split to answer")->default_val("test");
    predict->add_option("--out", out_path, "run file output path")->required();
    predict->add_option("--provider-config", provider_config_path, "provider key = value config");
    predict->add_option("--provider", provider_cfg.provider, "gemini | deepseek | openai")
        ->capture_default_str();
    predict->add_option("--model", provider_cfg.model, "model identifier");
    predict->add_option("--endpoint", provider_cfg.endpoint, "override provider endpoint");
    predict->add_option("--temperature", provider_cfg.temperature, "sampling temperature")
        ->capture_default_str();
    predict->add_option("--cache-dir", provider_cfg.cache_dir, "response cache directory")
        ->capture_default_str();
    predict->add_flag("--offline", provider_cfg.offline, "serve from cache only, never call the network");
    predict->add_option("--template", template_path, "prompt template JSON (default: bundled)");
    predict->add_option("--seed", seed, "shot selection seed")->capture_default_str();
    predict->add_option("--min-fuzzy-f1", min_fuzzy_f1, "fuzzy alignment acceptance F1")
        ->capture_default_str();
    predict->add_option("--workers", workers, "worker threads")->capture_default_str();
    add_postproc_flags(predict);

    // postprocess
    auto* post = app.add_subcommand("postprocess", "post-process an n-best file into a run file");
    std::string nbest_path;
    std::size_t nbest_limit = 10;
    post->add_option("--nbest", nbest_path, "n-best JSON file")->required();
    post->add_option("--corpus", corpus_path, "unified corpus JSONL")->required();
    post->add_option("--split", split_name, "restrict to one split");
    post->add_option("--out", out_path, "run file output path")->required();
    post->add_option("--nbest-limit", nbest_limit, "candidates taken per question")
        ->capture_default_str();
    add_postproc_flags(post);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score a run file with pAP@k");
    std::string run_path, format_name = "table", baseline_path;
    std::size_t eval_k = 10;
    bool optimal = false;
    evaluate->add_option("--run", run_path, "run file to score")->required();
    evaluate->add_option("--corpus", corpus_path, "unified corpus JSONL")->required();
    evaluate->add_option("--split", split_name, "restrict to one split");
    evaluate->add_option("--k", eval_k, "rank cutoff")->capture_default_str();
    evaluate->add_option("--format", format_name, "table | json")->capture_default_str();
    evaluate->add_option("--baseline", baseline_path, "second run file to compare against");
    evaluate->add_option("--out", out_path, "write the report here instead of stdout");
    evaluate->add_flag("--optimal-assignment", optimal,
                       "replace greedy gold consumption with exhaustive assignment (diagnostic)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (prepare->parsed())
            return cmd_prepare(inputs, prepare_out);

        if (!postproc_config_path.empty()) {
            arqa::postproc::PostprocConfig from_file =
                arqa::postproc::load_postproc_config(postproc_config_path);
            // explicit flags win over the config file
            auto keep = [&](CLI::App* cmd, const char* flag, auto& target, auto file_value) {
                if (cmd->count(flag) == 0)
                    target = file_value;
            };
            CLI::App* active = predict->parsed() ? predict : post;
            keep(active, "--nms-threshold", post_cfg.nms_overlap_threshold, from_file.nms_overlap_threshold);
            keep(active, "--qsim-threshold", post_cfg.question_sim_threshold, from_file.question_sim_threshold);
            keep(active, "--stopword-threshold", post_cfg.stopword_ratio_threshold,
                 from_file.stopword_ratio_threshold);
            keep(active, "--k", post_cfg.k, from_file.k);
            if (stopwords_path.empty())
                stopwords_path = from_file.stoplist_path;
        }
        post_cfg.stoplist_path = stopwords_path;

        if (predict->parsed()) {
            if (!provider_config_path.empty()) {
                arqa::prompting::ProviderConfig from_file =
                    arqa::prompting::load_provider_config(provider_config_path);
                if (predict->count("--provider") == 0)
                    provider_cfg.provider = from_file.provider;
                if (predict->count("--model") == 0)
                    provider_cfg.model = from_file.model;
                if (predict->count("--endpoint") == 0)
                    provider_cfg.endpoint = from_file.endpoint;
                if (predict->count("--temperature") == 0)
                    provider_cfg.temperature = from_file.temperature;
                if (predict->count("--cache-dir") == 0)
                    provider_cfg.cache_dir = from_file.cache_dir;
                provider_cfg.api_key_env = from_file.api_key_env;
                provider_cfg.max_retries = from_file.max_retries;
                provider_cfg.timeout_sec = from_file.timeout_sec;
                provider_cfg.concurrency = from_file.concurrency;
            }
            return cmd_predict(corpus_path, split_name, provider_cfg, template_path, seed, post_cfg,
                               min_fuzzy_f1, workers, out_path);
        }
        if (post->parsed())
            return cmd_postprocess(nbest_path, corpus_path, split_name, nbest_limit, post_cfg, out_path);
        if (evaluate->parsed())
            return cmd_evaluate(run_path, corpus_path, split_name, eval_k, optimal, format_name,
                                baseline_path, out_path);
    } catch (const arqa::prompting::provider_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
