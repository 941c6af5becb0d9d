#pragma once

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "cg/grammar.hpp"

namespace cgtest {

inline std::filesystem::path source_dir() { return CG_SOURCE_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cg-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline const char* kStyles[] = {"normal", "zigzag", "triangle", "square", "circle"};

inline std::string unit(std::mt19937_64& g, int lo = 0, int hi = 1000) {
  const int v = std::uniform_int_distribution<int>(lo, hi)(g);
  char buf[8];
  std::snprintf(buf, sizeof buf, "%d.%03d", v / 1000, v % 1000);
  return buf;
}

// Random well-formed action token.
inline std::string random_token(std::mt19937_64& g) {
  const std::string style = kStyles[g() % 5];
  if (g() % 2) return "line_" + style + "_" + unit(g) + "-" + unit(g);
  return "arc_" + style + "_" + unit(g) + "_" + unit(g) + "-" + unit(g);
}

inline cg::TokenImage random_token_image(std::mt19937_64& g) {
  cg::TokenImage img(1 + g() % 3);
  for (auto& shape : img) {
    const std::size_t n = 1 + g() % 6;
    for (std::size_t i = 0; i < n; ++i) shape.push_back(random_token(g));
  }
  return img;
}

}  // namespace cgtest
