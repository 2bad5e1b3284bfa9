#include "cli/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <memory>

#include <openssl/evp.h>

#include "spnb/errors.hpp"

namespace spnb::cli {

namespace {

std::string to_hex(const unsigned char* data, unsigned int size) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * size);
  for (unsigned int i = 0; i < size; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xF]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int size = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &size, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 digest failed");
  }
  return to_hex(md.data(), size);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

RunManifest::RunManifest(std::string command, const nlohmann::json& effective_config)
    : command_(std::move(command)), config_(effective_config), start_(std::chrono::steady_clock::now()) {}

void RunManifest::write(const std::filesystem::path& out_dir) const {
  namespace fs = std::filesystem;
  const fs::path target = out_dir / "manifest.json";
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file() || entry.path() == target) continue;
    files.push_back(fs::relative(entry.path(), out_dir).generic_string());
  }
  std::sort(files.begin(), files.end());
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& f : files) outputs.push_back({{"path", f}, {"sha256", sha256_file(out_dir / f)}});

  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  const nlohmann::json manifest = {
      {"command", command_},
      {"tool_version", kToolVersion},
      {"config", config_},
      {"config_sha256", sha256_hex(config_.dump())},
      {"seeds", seeds_},
      {"inputs", inputs_},
      {"output_dir", out_dir.generic_string()},
      {"outputs", outputs},
      {"duration_seconds", elapsed},
  };
  write_json(target, manifest);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << value.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace spnb::cli
