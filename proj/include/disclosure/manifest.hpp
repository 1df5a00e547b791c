#pragma once

// Run manifest written next to every output: command line, scorer config
// digests and model ids, seeds, and SHA-256 digests of inputs and outputs.
// The timestamp honors SOURCE_DATE_EPOCH so cache-backed runs can be
// byte-reproducible.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "disclosure/hash.hpp"

#ifndef DISCLOSURE_VERSION
#define DISCLOSURE_VERSION "0.0.0"
#endif

namespace disclosure {

inline constexpr const char* kToolVersion = DISCLOSURE_VERSION;

inline std::string manifest_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config_hashes;
  std::map<std::string, std::string> model_ids;
  std::map<std::string, std::string> parameters;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256

  void add_input(const std::filesystem::path& p) { inputs[p.generic_string()] = sha256_file(p); }
  void add_output(const std::filesystem::path& p) { outputs[p.generic_string()] = sha256_file(p); }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = "disclosure";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["config_hashes"] = config_hashes;
    j["model_ids"] = model_ids;
    j["parameters"] = parameters;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["timestamp"] = manifest_timestamp();
    return j;
  }

  void write(const std::filesystem::path& path) const { write_file(path, to_json().dump(2) + "\n"); }
};

}  // namespace disclosure
