#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "lcqp/problem.hpp"

// Problem file layout:
//
// {
//   "n": 2, "n_A": 1, "n_C": 1,
//   "Q": {"dense": [[2.0, 0.0], [0.0, 2.0]]},
//   "A": {"coo": {"shape": [1, 2], "rows": [0], "cols": [1], "vals": [1.0]}},
//   "g": [-2.0, -2.0], "b": [0.0],
//   "L": ..., "R": ...,
//   "lb": [0.0, null], "ub": ...,           optional; null means unbounded
//   "x0": [...]                             optional
// }
//
// Matrices are also accepted without the "dense"/"coo" wrapper (a bare array
// of rows, or a bare object carrying shape/rows/cols/vals). Duplicate
// coordinate entries accumulate. Files are written in the wrapped dense form
// with 17 significant digits so finite values round-trip bit-exactly.

namespace lcqp {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing field '") + key + "'");
  return *it;
}

double as_double(const json& j, const char* field) {
  if (!j.is_number()) fail(std::string("field '") + field + "' must be numeric");
  return j.get<double>();
}

std::size_t as_size(const json& j, const char* field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    fail(std::string("field '") + field + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(j.get<long long>());
}

Vector parse_vector(const json& j, std::size_t len, const char* field,
                    bool allow_null, double null_value) {
  if (!j.is_array()) fail(std::string("field '") + field + "' must be an array");
  if (j.size() != len) {
    fail(std::string("field '") + field + "' has length " +
         std::to_string(j.size()) + ", expected " + std::to_string(len));
  }
  Vector v(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (allow_null && j[i].is_null()) {
      v[i] = null_value;
    } else {
      v[i] = as_double(j[i], field);
    }
  }
  return v;
}

Matrix parse_matrix(const json& j, std::size_t rows, std::size_t cols,
                    const char* field) {
  // Unwrap the tagged forms first.
  if (j.is_object()) {
    if (auto it = j.find("dense"); it != j.end()) {
      if (!it->is_array()) {
        fail(std::string("field '") + field + "' dense form must be an array");
      }
      return parse_matrix(*it, rows, cols, field);
    }
    if (auto it = j.find("coo"); it != j.end()) {
      if (!it->is_object()) {
        fail(std::string("field '") + field + "' coo form must be an object");
      }
      return parse_matrix(*it, rows, cols, field);
    }
  }
  Matrix m(rows, cols);
  if (j.is_array()) {
    if (j.size() != rows) {
      fail(std::string("field '") + field + "' has " + std::to_string(j.size()) +
           " rows, expected " + std::to_string(rows));
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const json& row = j[i];
      if (!row.is_array() || row.size() != cols) {
        fail(std::string("field '") + field + "' row " + std::to_string(i) +
             " must be an array of length " + std::to_string(cols));
      }
      for (std::size_t k = 0; k < cols; ++k) m(i, k) = as_double(row[k], field);
    }
    return m;
  }
  if (j.is_object()) {
    const json& shape = require(j, "shape");
    if (!shape.is_array() || shape.size() != 2 ||
        as_size(shape[0], field) != rows || as_size(shape[1], field) != cols) {
      fail(std::string("field '") + field + "' coordinate shape must be [" +
           std::to_string(rows) + ", " + std::to_string(cols) + "]");
    }
    const json& ri = require(j, "rows");
    const json& ci = require(j, "cols");
    const json& vi = require(j, "vals");
    if (!ri.is_array() || !ci.is_array() || !vi.is_array() ||
        ri.size() != ci.size() || ri.size() != vi.size()) {
      fail(std::string("field '") + field +
           "' coordinate rows/cols/vals must be arrays of equal length");
    }
    for (std::size_t k = 0; k < ri.size(); ++k) {
      const std::size_t r = as_size(ri[k], field);
      const std::size_t c = as_size(ci[k], field);
      if (r >= rows || c >= cols) {
        fail(std::string("field '") + field + "' coordinate entry " +
             std::to_string(k) + " is out of range");
      }
      m(r, c) += as_double(vi[k], field);
    }
    return m;
  }
  fail(std::string("field '") + field + "' must be a dense or coordinate matrix");
}

std::string fmt(double v) {
  if (std::isinf(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_vector(std::ofstream& out, const Vector& v) {
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ", ";
    out << fmt(v[i]);
  }
  out << ']';
}

void write_matrix(std::ofstream& out, const Matrix& m, const char* indent) {
  if (m.rows() == 0) {
    out << "{\"dense\": []}";
    return;
  }
  out << "{\"dense\": [\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << indent << "  [";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ", ";
      out << fmt(m(i, j));
    }
    out << (i + 1 < m.rows() ? "],\n" : "]\n");
  }
  out << indent << "]}";
}

}  // namespace

LcqpProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open problem file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("problem file root must be an object");

  const std::size_t n = as_size(require(j, "n"), "n");
  const std::size_t n_a = as_size(require(j, "n_A"), "n_A");
  const std::size_t n_c = as_size(require(j, "n_C"), "n_C");
  if (n == 0) fail("field 'n' must be positive");

  LcqpProblem p;
  p.Q = parse_matrix(require(j, "Q"), n, n, "Q");
  p.g = parse_vector(require(j, "g"), n, "g", false, 0.0);
  p.A = parse_matrix(require(j, "A"), n_a, n, "A");
  p.b = parse_vector(require(j, "b"), n_a, "b", false, 0.0);
  p.L = parse_matrix(require(j, "L"), n_c, n, "L");
  p.R = parse_matrix(require(j, "R"), n_c, n, "R");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (auto it = j.find("lb"); it != j.end() && !it->is_null()) {
    p.lb = parse_vector(*it, n, "lb", true, -inf);
  }
  if (auto it = j.find("ub"); it != j.end() && !it->is_null()) {
    p.ub = parse_vector(*it, n, "ub", true, inf);
  }
  if (auto it = j.find("x0"); it != j.end() && !it->is_null()) {
    p.x0 = parse_vector(*it, n, "x0", false, 0.0);
  }

  validate(p);
  return p;
}

void save_problem(const LcqpProblem& p, const std::string& path) {
  validate(p);
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);

  out << "{\n";
  out << "  \"n\": " << p.n() << ",\n";
  out << "  \"n_A\": " << p.n_general() << ",\n";
  out << "  \"n_C\": " << p.n_pairs() << ",\n";
  out << "  \"Q\": ";
  write_matrix(out, p.Q, "  ");
  out << ",\n  \"g\": ";
  write_vector(out, p.g);
  out << ",\n  \"A\": ";
  write_matrix(out, p.A, "  ");
  out << ",\n  \"b\": ";
  write_vector(out, p.b);
  out << ",\n  \"L\": ";
  write_matrix(out, p.L, "  ");
  out << ",\n  \"R\": ";
  write_matrix(out, p.R, "  ");
  if (!p.lb.empty()) {
    out << ",\n  \"lb\": ";
    write_vector(out, p.lb);
  }
  if (!p.ub.empty()) {
    out << ",\n  \"ub\": ";
    write_vector(out, p.ub);
  }
  if (!p.x0.empty()) {
    out << ",\n  \"x0\": ";
    write_vector(out, p.x0);
  }
  out << "\n}\n";
  if (!out.good()) throw Error("failed writing problem file: " + path);
}

}  // namespace lcqp
