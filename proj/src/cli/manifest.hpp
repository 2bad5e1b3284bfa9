#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace spnb::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents. Throws IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// Record of one command invocation, written as manifest.json at the root
/// of the command's output directory.
class RunManifest {
 public:
  RunManifest(std::string command, const nlohmann::json& effective_config);

  void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }
  void add_input(const std::filesystem::path& path) { inputs_.push_back(path.generic_string()); }

  /// Lists every file under out_dir (except the manifest) with its digest,
  /// stamps the elapsed time and writes out_dir/manifest.json.
  void write(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  nlohmann::json config_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::string> inputs_;
  std::chrono::steady_clock::time_point start_;
};

/// Writes `value` as pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace spnb::cli
