#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "revlang/interpreter.hpp"
#include "revlang/parser.hpp"

namespace test {

inline std::string source_path(const std::string& rel) { return std::string(REVLANG_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& rel) {
  std::ifstream in(source_path(rel));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline revlang::Program program_file(const std::string& rel) {
  return revlang::parse_program(read_file(rel), rel);
}

inline revlang::Program program_text(const std::string& text) { return revlang::parse_program(text, "<test>"); }

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

inline revlang::Value vec(std::vector<double> xs) {
  std::vector<revlang::Value> out(xs.begin(), xs.end());
  return revlang::Array::vector(std::move(out));
}

inline double num(const revlang::Value& v) { return revlang::to_double(revlang::primal_of(v)); }

inline double at(const revlang::Value& v, std::size_t i) { return num(v.as<revlang::Array>().data[i]); }

}  // namespace test
