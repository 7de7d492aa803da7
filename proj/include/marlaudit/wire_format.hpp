#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "marlaudit/trajectory.hpp"

namespace marlaudit {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kEpisodesFile = "episodes.jsonl";

// Parsing throws ParseError (with a 1-based line for episodes.jsonl) on malformed
// text and ValidationError when the parsed content breaks an invariant.
Manifest parse_manifest(std::string_view text);
TrajectoryDataset parse_dataset(std::string_view manifest_text, std::string_view episodes_text);

// Canonical serialization: manifest keys in documented order, episode lines
// ordered by (episode, t, agent), floats in shortest round-trip decimal.
std::string serialize_manifest(const Manifest& m);
std::string serialize_episodes(const TrajectoryDataset& d);

// `dir` holds manifest.json and episodes.jsonl.
TrajectoryDataset load_dataset(const std::filesystem::path& dir);
void write_dataset(const TrajectoryDataset& d, const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, std::string_view text);

}  // namespace marlaudit
