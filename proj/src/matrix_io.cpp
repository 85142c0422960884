#include "smc/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "smc/error.hpp"

namespace smc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParameterError("malformed number '" + std::string(text) + "'");
  return value;
}

Eigen::Index parse_index(std::string_view text) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 0)
    throw ParameterError("malformed index '" + std::string(text) + "'");
  return static_cast<Eigen::Index>(value);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_dense(std::ostream& out, const DenseMatrix& x) {
  out << x.rows() << ' ' << x.cols() << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(x(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed");
}

DenseMatrix read_dense(std::istream& in) {
  long long rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw ParameterError("dense matrix: bad header");
  DenseMatrix x(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!(in >> token)) throw ParameterError("dense matrix: too few entries");
      x(i, j) = parse_double(token);
    }
  }
  if (in >> token) throw ParameterError("dense matrix: trailing data");
  require_finite(x, "dense matrix");
  return x;
}

void write_dense(const std::filesystem::path& path, const DenseMatrix& x) {
  auto out = open_out(path);
  write_dense(out, x);
}

DenseMatrix read_dense(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dense(in);
}

void write_triplets(std::ostream& out, const DenseMatrix& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (x(i, j) != 0.0) out << i << ',' << j << ',' << format_double(x(i, j)) << '\n';
  if (!out) throw IoError("write failed");
}

DenseMatrix read_triplets(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  require(rows >= 0 && cols >= 0, "triplets: negative shape");
  DenseMatrix x = DenseMatrix::Zero(rows, cols);
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw ParameterError("triplets: expected i,j,value");
    const Eigen::Index i = parse_index(trim(view.substr(0, c1)));
    const Eigen::Index j = parse_index(trim(view.substr(c1 + 1, c2 - c1 - 1)));
    const double v = parse_double(trim(view.substr(c2 + 1)));
    if (i >= rows || j >= cols) throw ParameterError("triplets: index out of bounds");
    x(i, j) = v;
  }
  require_finite(x, "triplets");
  return x;
}

void write_triplets(const std::filesystem::path& path, const DenseMatrix& x) {
  auto out = open_out(path);
  write_triplets(out, x);
}

DenseMatrix read_triplets(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
  auto in = open_in(path);
  return read_triplets(in, rows, cols);
}

}  // namespace smc
