#include "wonham/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "wonham/errors.hpp"

namespace wonham {

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path OutputDir::write_output(const std::string& name, const std::string& content) {
  const std::filesystem::path path = root_ / name;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) fail(ErrorCode::ConfigError, "write to '" + path.string() + "' failed");
  manifest_.outputs.push_back({name, sha256_hex(content), content.size()});
  return path;
}

std::filesystem::path OutputDir::write_manifest() {
  nlohmann::json outputs = nlohmann::json::array();
  for (const ManifestEntry& e : manifest_.outputs) {
    outputs.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  }
  const nlohmann::json doc{
      {"command", manifest_.command},
      {"config_hash", manifest_.config_hash},
      {"seed", manifest_.seed},
      {"version", manifest_.version},
      {"wall_clock_seconds", manifest_.wall_clock_seconds},
      {"outputs", outputs},
  };
  const std::filesystem::path path = root_ / "manifest.json";
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  return path;
}

std::filesystem::path resolve_output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("WONHAM_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "wonham_out";
}

}  // namespace wonham
