#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "chunklab/common.hpp"

namespace chunklab {

// Little-endian flat binary arrays of f32/f64 plus small text helpers. All
// file outputs in the project go through write_text_file so replayed runs
// produce byte-identical artifacts.

inline std::vector<double> read_flat_array(const std::filesystem::path& path,
                                           const std::string& dtype) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  std::vector<double> values;
  if (dtype == "f32") {
    if (bytes.size() % 4 != 0)
      throw invalid_input("f32 payload size not a multiple of 4");
    values.resize(bytes.size() / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      float f;
      std::memcpy(&f, bytes.data() + 4 * i, 4);
      values[i] = static_cast<double>(f);
    }
  } else if (dtype == "f64") {
    if (bytes.size() % 8 != 0)
      throw invalid_input("f64 payload size not a multiple of 8");
    values.resize(bytes.size() / 8);
    std::memcpy(values.data(), bytes.data(), bytes.size());
  } else {
    throw invalid_input("dtype must be f32 or f64");
  }
  return values;
}

inline void write_flat_array(const std::filesystem::path& path,
                             std::span<const double> values,
                             const std::string& dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  if (dtype == "f32") {
    for (double v : values) {
      const float f = static_cast<float>(v);
      out.write(reinterpret_cast<const char*>(&f), 4);
    }
  } else if (dtype == "f64") {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 8));
  } else {
    throw invalid_input("dtype must be f32 or f64");
  }
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline rewriting
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// Deterministic decimal formatting for CSV cells: up to `digits` significant
// digits, '.' separator, no locale dependence.
inline std::string format_double(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace chunklab
