#include "output.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <stdexcept>

namespace exlab::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void OutputDir::write(const std::string& name, const std::string& content) {
  const auto path = root_ / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path.string());
  for (auto& e : entries_) {
    if (e.name == name) {
      e = {name, sha256_hex(content), content.size()};
      return;
    }
  }
  entries_.push_back({name, sha256_hex(content), content.size()});
}

void OutputDir::write_json(const std::string& name, const json& j) { write(name, pretty(j)); }

void OutputDir::write_manifest(json meta) {
  json files = json::array();
  for (const auto& e : entries_) files.push_back({{"path", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  meta["files"] = files;
  const std::string content = pretty(meta);
  std::ofstream os(root_ / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write manifest.json");
  os << content;
}

}  // namespace exlab::cli
