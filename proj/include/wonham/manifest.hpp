#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wonham {

inline constexpr const char* kToolVersion = "0.1.0";

// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

/// Record of one CLI run. Every file written through write_output() is listed
/// with its digest; wall_clock_seconds is the only field that differs between
/// identical reruns.
struct RunManifest {
  std::string command;
  std::string config_hash;  // sha256 of the config bytes (or of the canonical option string)
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  double wall_clock_seconds = 0.0;
  std::vector<ManifestEntry> outputs;
};

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  // Writes `content` to root/name (creating directories) and records its digest.
  std::filesystem::path write_output(const std::string& name, const std::string& content);

  RunManifest& manifest() noexcept { return manifest_; }

  // Writes manifest.json (not listed in itself).
  std::filesystem::path write_manifest();

 private:
  std::filesystem::path root_;
  RunManifest manifest_;
};

// Output directory: explicit flag, else $WONHAM_OUT_DIR, else "wonham_out".
std::filesystem::path resolve_output_dir(const std::string& flag);

}  // namespace wonham
