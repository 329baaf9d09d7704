#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "sgap/errors.hpp"

namespace sgap::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts need byte swapping");

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  }
  void magic(std::string_view m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void finish() {
    out_.flush();
    if (!out_) throw RuntimeFailure("write failed");
  }

 private:
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ValidationError("cannot open " + path.string());
  }
  void expect_magic(std::string_view m) {
    std::string got(m.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(m.size()));
    if (!in_ || got != m) throw ValidationError(path_.string() + ": bad magic, expected " + std::string(m));
  }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }
  float f32() { float v; raw(&v, sizeof v); return v; }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw ValidationError(path_.string() + ": truncated file");
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

class Fnv1a {
 public:
  void add(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void add_value(const T& v) { add(&v, sizeof v); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace sgap::detail
