#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "chunklab/fixtures.hpp"
#include "chunklab/io.hpp"
#include "chunklab/version.hpp"

namespace chunklab {

// Every CLI run writes one of these next to its artifacts. Replaying a
// manifest re-executes the command with the recorded parameters; for
// deterministic commands the regenerated CSV/JSON artifacts are
// byte-identical (the timestamp lives only here, never in artifacts).
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> fixture_checksums;
  std::string tool_version;
  std::string timestamp;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline RunManifest make_manifest(const std::string& command,
                                 std::map<std::string, std::string> parameters,
                                 std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.parameters = std::move(parameters);
  m.seed = seed;
  m.fixture_checksums = fixtures::checksum_map();
  m.tool_version = kVersion;
  m.timestamp = utc_timestamp();
  return m;
}

inline void save_manifest(const std::filesystem::path& path,
                          const RunManifest& m) {
  nlohmann::json j{{"command", m.command},
                   {"parameters", m.parameters},
                   {"seed", m.seed},
                   {"fixture_checksums", m.fixture_checksums},
                   {"tool_version", m.tool_version},
                   {"timestamp", m.timestamp}};
  write_text_file(path, j.dump(2) + "\n");
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.parameters =
      j.at("parameters").get<std::map<std::string, std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.fixture_checksums =
      j.at("fixture_checksums").get<std::map<std::string, std::string>>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.timestamp = j.value("timestamp", std::string());
  return m;
}

// Replayed manifests must refer to the same embedded fixtures.
inline void require_fixture_match(const RunManifest& m) {
  const auto current = fixtures::checksum_map();
  for (const auto& [name, checksum] : m.fixture_checksums) {
    const auto it = current.find(name);
    if (it == current.end() || it->second != checksum)
      throw invalid_input("fixture checksum mismatch: " + name);
  }
}

}  // namespace chunklab
