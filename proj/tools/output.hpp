#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "exlab/io.hpp"

namespace exlab::cli {

std::string sha256_hex(const std::string& bytes);

/// Output directory that records every file it writes, so the manifest can
/// list each one with its content hash.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const json& j);

  /// manifest.json: `meta` plus the files written so far, in write order.
  void write_manifest(json meta);

 private:
  struct Entry {
    std::string name;
    std::string sha256;
    std::size_t bytes;
  };
  std::filesystem::path root_;
  std::vector<Entry> entries_;
};

/// Two-space indented JSON with a trailing newline.
std::string pretty(const json& j);

}  // namespace exlab::cli
