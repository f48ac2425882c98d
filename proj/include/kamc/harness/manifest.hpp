#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "kamc/error.hpp"

namespace kamc::harness {

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

struct Artifact {
  std::string name;  // relative to the run directory
  std::string sha256;
  std::size_t bytes = 0;
};

inline constexpr std::string_view kManifestName = "manifest.json";

/// Single writer for one run directory. Every file goes through `write`,
/// which records its hash for the manifest. If the writer is destroyed
/// before `finish`, everything it wrote is deleted again.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("outputDirectory", "cannot create " + dir_.string());
  }

  ArtifactWriter(const ArtifactWriter&) = delete;
  ArtifactWriter& operator=(const ArtifactWriter&) = delete;

  ~ArtifactWriter() {
    if (finished_) return;
    std::error_code ec;
    for (const auto& a : artifacts_) std::filesystem::remove(dir_ / a.name, ec);
  }

  const std::filesystem::path& directory() const noexcept { return dir_; }
  const std::vector<Artifact>& artifacts() const noexcept { return artifacts_; }

  void write(const std::string& name, std::string_view content) {
    for (const auto& a : artifacts_)
      if (a.name == name) throw Error("artifact written twice: " + name);
    const auto path = dir_ / name;
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + path.string());
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!out) throw Error("short write to " + path.string());
    }
    artifacts_.push_back({name, sha256_hex(content), content.size()});
  }

  /// Write the manifest (config echo, seed, artifact hashes) and keep files.
  nlohmann::json finish(nlohmann::json manifest) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& a : artifacts_)
      list.push_back({{"path", a.name}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    manifest["artifacts"] = list;
    const std::string text = manifest.dump(2) + "\n";
    std::ofstream out(dir_ / std::string(kManifestName), std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write manifest");
    out << text;
    finished_ = true;
    return manifest;
  }

 private:
  std::filesystem::path dir_;
  std::vector<Artifact> artifacts_;
  bool finished_ = false;
};

}  // namespace kamc::harness
