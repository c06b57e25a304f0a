#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace scakit {

// What produced an output: command, full parameters, seed, input content
// digests and output paths. Two runs of the same command agree on
// everything except wall_time_s.
struct RunManifest {
    std::string command;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_digests;
    std::vector<std::string> output_paths;
    double wall_time_s = 0.0;
};

// FNV-1a 64-bit digest of the file's bytes, as 16 hex chars.
std::string file_digest(const std::filesystem::path& path);

void write_manifest(const RunManifest& m, const std::filesystem::path& path);

// Minimal TOML-subset reader for experiment configs: [section] headers
// (dotted allowed), key = value with strings, integers, floats, booleans
// and single-line arrays, # comments. Returns the nested JSON object.
nlohmann::json parse_toml_file(const std::filesystem::path& path);
nlohmann::json parse_toml(const std::string& text, const std::string& origin = "<config>");

}  // namespace scakit
