#pragma once

#include "arqa/postproc.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace arqa {

// Everything that influenced a run file, captured so a run can be replayed
// and audited. Contains no wall-clock fields that would break byte-for-byte
// reproducibility.
struct RunManifest {
    std::string tool_version;
    std::string corpus_path;
    std::string corpus_digest;
    std::string split;
    std::string provider;
    std::string model;
    double temperature = 0.0;
    std::string template_digest;
    std::vector<std::string> shot_pq_ids;
    std::uint64_t seed = 0;
    std::size_t k = 10;
    double nms_overlap_threshold = 0.0;
    double question_sim_threshold = 0.0;
    double stopword_ratio_threshold = 0.0;
    std::map<std::string, std::int64_t> counters;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& content);
void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

// <run path>.manifest.json
std::string manifest_path_for(const std::string& run_path);

} // namespace arqa
