#include "arqa/manifest.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

using nlohmann::json;

namespace arqa {

std::string manifest_to_json(const RunManifest& m) {
    json doc;
    doc["tool_version"] = m.tool_version;
    doc["corpus_path"] = m.corpus_path;
    doc["corpus_digest"] = m.corpus_digest;
    doc["split"] = m.split;
    doc["provider"] = m.provider;
    doc["model"] = m.model;
    doc["temperature"] = m.temperature;
    doc["template_digest"] = m.template_digest;
    doc["shot_pq_ids"] = m.shot_pq_ids;
    doc["seed"] = m.seed;
    doc["k"] = m.k;
    doc["nms_overlap_threshold"] = m.nms_overlap_threshold;
    doc["question_sim_threshold"] = m.question_sim_threshold;
    doc["stopword_ratio_threshold"] = m.stopword_ratio_threshold;
    doc["counters"] = m.counters;
    return doc.dump(1) + "\n";
}

RunManifest manifest_from_json(const std::string& content) {
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("bad manifest: ") + e.what());
    }
    RunManifest m;
    m.tool_version = doc.value("tool_version", std::string());
    m.corpus_path = doc.value("corpus_path", std::string());
    m.corpus_digest = doc.value("corpus_digest", std::string());
    m.split = doc.value("split", std::string());
    m.provider = doc.value("provider", std::string());
    m.model = doc.value("model", std::string());
    m.temperature = doc.value("temperature", 0.0);
    m.template_digest = doc.value("template_digest", std::string());
    if (doc.contains("shot_pq_ids"))
        m.shot_pq_ids = doc.at("shot_pq_ids").get<std::vector<std::string>>();
    m.seed = doc.value("seed", std::uint64_t{0});
    m.k = doc.value("k", std::size_t{10});
    m.nms_overlap_threshold = doc.value("nms_overlap_threshold", 0.0);
    m.question_sim_threshold = doc.value("question_sim_threshold", 0.0);
    m.stopword_ratio_threshold = doc.value("stopword_ratio_threshold", 0.0);
    if (doc.contains("counters"))
        m.counters = doc.at("counters").get<std::map<std::string, std::int64_t>>();
    return m;
}

void save_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write manifest: " + path);
    out << manifest_to_json(m);
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open manifest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str());
}

std::string manifest_path_for(const std::string& run_path) {
    return run_path + ".manifest.json";
}

} // namespace arqa
